//! Concept vocabulary: the ordered lemma list that fixes the index space of
//! every concept set and distance matrix.
//!
//! Words are reduced to a basic form by the English Snowball (Porter2)
//! stemmer, iterated to a fixed point so that normalization is idempotent.
//! A built vocabulary is sorted lexicographically; line `i` of a vocabulary
//! file is the concept with index `i`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

use crate::error::{Error, Result};

static DEFAULT_STOPWORDS: &str = include_str!("stopwords_en.txt");

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

/// Reduces a word to its lowercase lemma.
///
/// The stemmer is applied until the output stops changing, so
/// `normalize(normalize(w)) == normalize(w)` for every input.
pub fn normalize(word: &str) -> String {
    let mut current = word.trim().to_lowercase();
    // Snowball stems never grow, so this terminates.
    loop {
        let next = stemmer().stem(&current).into_owned();
        if next == current || next.is_empty() {
            return current;
        }
        current = next;
    }
}

/// Splits text into lowercase alphabetic tokens. Every non-alphabetic
/// character is a boundary, so "bird-watching" yields "bird" and "watching".
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// The bundled English stopword list.
pub fn default_stopwords() -> HashSet<String> {
    parse_word_list(DEFAULT_STOPWORDS)
}

/// Parses a newline-separated word list, ignoring blank lines and `#` comments.
pub fn parse_word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Stable fingerprint of a vocabulary's contents and order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VocabId(pub u64);

impl fmt::Display for VocabId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

fn fingerprint<'a>(lemmas: impl IntoIterator<Item = &'a str>) -> VocabId {
    // FNV-1a, with a separator byte so ["ab","c"] and ["a","bc"] differ.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for lemma in lemmas {
        for b in lemma.bytes().chain(std::iter::once(0xff)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    VocabId(h)
}

#[derive(Debug, Clone)]
pub struct ConceptVocabulary {
    concepts: Vec<String>,
    index_of: HashMap<String, u32>,
    id: VocabId,
}

impl ConceptVocabulary {
    /// Wraps an ordered lemma list. Position in the list is the concept index.
    ///
    /// Every lemma must be nonempty, lowercase, alphabetic, unique, and already
    /// in normalized form; otherwise it could never be matched by `lookup`.
    pub fn from_lemmas(concepts: Vec<String>) -> Result<Self> {
        if concepts.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if concepts.len() > u32::MAX as usize {
            return Err(Error::InvalidParams("vocabulary exceeds u32 indices".into()));
        }
        let mut index_of = HashMap::with_capacity(concepts.len());
        for (index, lemma) in concepts.iter().enumerate() {
            let invalid = |reason: &str| Error::InvalidLemma {
                index,
                lemma: lemma.clone(),
                reason: reason.to_string(),
            };
            if lemma.is_empty() {
                return Err(invalid("empty lemma"));
            }
            if !lemma.chars().all(char::is_alphabetic) {
                return Err(invalid("lemma must be a single alphabetic word"));
            }
            if lemma.to_lowercase() != *lemma {
                return Err(invalid("lemma must be lowercase"));
            }
            let norm = normalize(lemma);
            if norm != *lemma {
                return Err(invalid(&format!("not in normalized form (expected {norm:?})")));
            }
            if index_of.insert(lemma.clone(), index as u32).is_some() {
                return Err(invalid("duplicate lemma"));
            }
        }
        let id = fingerprint(concepts.iter().map(String::as_str));
        Ok(ConceptVocabulary {
            concepts,
            index_of,
            id,
        })
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn id(&self) -> VocabId {
        self.id
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn concept(&self, index: usize) -> Option<&str> {
        self.concepts.get(index).map(String::as_str)
    }

    /// Index of an exact lemma, without normalization.
    pub fn index_of_lemma(&self, lemma: &str) -> Option<usize> {
        self.index_of.get(lemma).map(|&i| i as usize)
    }

    /// Index of `normalize(word)`, if it is in the vocabulary.
    pub fn lookup(&self, word: &str) -> Option<usize> {
        if word.trim().is_empty() {
            return None;
        }
        self.index_of_lemma(&normalize(word))
    }

    /// Writes one lemma per line.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for lemma in &self.concepts {
            writeln!(w, "{lemma}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a vocabulary file: one lemma per line, line number = index.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lemmas = Vec::new();
        for line in r.lines() {
            let line = line?;
            lemmas.push(line.trim_end_matches('\r').to_string());
        }
        // a single trailing blank line is tolerated
        if lemmas.last().is_some_and(|l| l.is_empty()) {
            lemmas.pop();
        }
        Self::from_lemmas(lemmas)
    }
}

/// Builds a vocabulary from raw words.
///
/// Each entry is tokenized the same way as text extraction, so free text is
/// accepted. Tokens in `stopwords` or `drop_list`, or whose lemma is the lemma
/// of such a word, are discarded. Remaining lemmas are deduplicated and sorted.
pub fn build_vocabulary<S: AsRef<str>>(
    raw_words: &[S],
    stopwords: &HashSet<String>,
    drop_list: &HashSet<String>,
) -> Result<ConceptVocabulary> {
    let lemmas = filtered_lemmas(raw_words, stopwords, drop_list)
        .map(|(lemma, _)| lemma)
        .collect::<BTreeSet<_>>();
    if lemmas.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    ConceptVocabulary::from_lemmas(lemmas.into_iter().collect())
}

fn filtered_lemmas<'a, S: AsRef<str>>(
    raw_words: &'a [S],
    stopwords: &'a HashSet<String>,
    drop_list: &'a HashSet<String>,
) -> impl Iterator<Item = (String, String)> + 'a {
    let excluded_lemmas: HashSet<String> = stopwords
        .iter()
        .chain(drop_list)
        .flat_map(|w| tokenize(w).collect::<Vec<_>>())
        .map(|t| normalize(&t))
        .collect();
    raw_words
        .iter()
        .flat_map(|w| tokenize(w.as_ref()).collect::<Vec<_>>())
        .filter(move |t| !stopwords.contains(t) && !drop_list.contains(t))
        .filter_map(move |t| {
            let lemma = normalize(&t);
            (!excluded_lemmas.contains(&lemma)).then_some((lemma, t))
        })
}

/// A lemma together with the surface forms observed for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordFormGroup {
    pub lemma: String,
    pub surface_forms: BTreeSet<String>,
}

impl WordFormGroup {
    /// Creates a group; the lemma itself is always one of the forms.
    /// Fails if any form does not normalize back to the lemma.
    pub fn new(lemma: impl Into<String>, forms: impl IntoIterator<Item = String>) -> Result<Self> {
        let lemma = lemma.into();
        let mut surface_forms: BTreeSet<String> =
            forms.into_iter().map(|f| f.to_lowercase()).collect();
        if let Some(bad) = surface_forms.iter().find(|f| normalize(f) != lemma) {
            return Err(Error::InvalidWordForms {
                line: 0,
                reason: format!("form {bad:?} does not normalize to {lemma:?}"),
            });
        }
        surface_forms.insert(lemma.clone());
        Ok(WordFormGroup {
            lemma,
            surface_forms,
        })
    }
}

/// Groups the surviving raw words of a vocabulary build by lemma, in lemma order.
pub fn word_form_groups<S: AsRef<str>>(
    raw_words: &[S],
    stopwords: &HashSet<String>,
    drop_list: &HashSet<String>,
) -> Vec<WordFormGroup> {
    let mut groups: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (lemma, form) in filtered_lemmas(raw_words, stopwords, drop_list) {
        groups.entry(lemma).or_default().insert(form);
    }
    groups
        .into_iter()
        .map(|(lemma, mut surface_forms)| {
            surface_forms.insert(lemma.clone());
            WordFormGroup {
                lemma,
                surface_forms,
            }
        })
        .collect()
}

/// Writes groups as `lemma<TAB>form1,form2,...` lines.
pub fn write_word_forms<W: Write>(groups: &[WordFormGroup], mut w: W) -> Result<()> {
    for g in groups {
        let forms: Vec<&str> = g.surface_forms.iter().map(String::as_str).collect();
        writeln!(w, "{}\t{}", g.lemma, forms.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_word_forms<R: BufRead>(r: R) -> Result<Vec<WordFormGroup>> {
    let mut groups = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let (lemma, forms) = line.split_once('\t').ok_or_else(|| Error::InvalidWordForms {
            line: n + 1,
            reason: "missing tab separator".into(),
        })?;
        let forms = forms
            .split(',')
            .filter(|f| !f.is_empty())
            .map(str::to_string);
        let group = WordFormGroup::new(lemma, forms).map_err(|e| match e {
            Error::InvalidWordForms { reason, .. } => Error::InvalidWordForms { line: n + 1, reason },
            other => other,
        })?;
        groups.push(group);
    }
    Ok(groups)
}
