//! Text to concept-set extraction.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kg::DistanceMatrix;
use crate::sets::{expand, union, ConceptSet};
use crate::vocab::{default_stopwords, normalize, tokenize, ConceptVocabulary};

#[derive(Debug, Clone)]
pub struct ExtractionConfig {
    pub vocab: Arc<ConceptVocabulary>,
    pub stopwords: HashSet<String>,
}

impl ExtractionConfig {
    /// Uses the bundled English stopword list.
    pub fn new(vocab: Arc<ConceptVocabulary>) -> Self {
        ExtractionConfig {
            vocab,
            stopwords: default_stopwords(),
        }
    }

    pub fn with_stopwords(vocab: Arc<ConceptVocabulary>, stopwords: HashSet<String>) -> Self {
        ExtractionConfig { vocab, stopwords }
    }
}

/// Tokenizes, drops stopwords, normalizes, and keeps in-vocabulary lemmas.
pub fn extract(text: &str, cfg: &ExtractionConfig) -> ConceptSet {
    let indices = tokenize(text)
        .filter(|t| !cfg.stopwords.contains(t))
        .filter_map(|t| cfg.vocab.index_of_lemma(&normalize(&t)));
    ConceptSet::from_indices(&cfg.vocab, indices).expect("vocabulary indices are in range")
}

/// Union of `extract` over every text.
pub fn extract_many<S: AsRef<str>>(texts: &[S], cfg: &ExtractionConfig) -> ConceptSet {
    let indices = texts
        .iter()
        .flat_map(|t| extract(t.as_ref(), cfg).indices().collect::<Vec<_>>());
    ConceptSet::from_indices(&cfg.vocab, indices).expect("vocabulary indices are in range")
}

/// The utterance-level guide set: the union of the self-persona concepts and
/// the partner's latest utterance, expanded to `k` concepts.
pub fn build_guide_set<S: AsRef<str>>(
    self_persona: &[S],
    partner_utterance: &str,
    d: &DistanceMatrix,
    k: usize,
    cfg: &ExtractionConfig,
) -> Result<ConceptSet> {
    if cfg.vocab.id() != d.vocab_id() {
        return Err(Error::VocabMismatch);
    }
    let persona = extract_many(self_persona, cfg);
    let partner = extract(partner_utterance, cfg);
    let (guide, _) = expand(&union(&persona, &partner)?, d, k)?;
    Ok(guide)
}
