//! Persona dialogue rewards built on concept-set relationships between the
//! self persona (S), the partner persona (P), and a future dialogue (F).
//!
//! Coherence and fluency are produced by neural scorers outside this crate;
//! they enter here as plain numbers through [`CoherenceInput`] and
//! [`FluencyInput`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{extract_many, ExtractionConfig};
use crate::kg::DistanceMatrix;
use crate::sets::{intersect, set_distance, union, ConceptSet, DEFAULT_R};

pub const DEFAULT_GAMMA: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 1.0;
/// Future-dialogue window, in utterances, starting at the scored self turn.
pub const DEFAULT_HORIZON: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Speaker {
    #[serde(rename = "self")]
    Agent,
    #[serde(rename = "partner")]
    Partner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DialogueEpisode {
    #[serde(default)]
    pub self_persona: Vec<String>,
    #[serde(default)]
    pub partner_persona: Vec<String>,
    #[serde(default)]
    pub turns: Vec<Turn>,
}

impl DialogueEpisode {
    /// Positions of the self turns within `turns`.
    pub fn self_turns(&self) -> Vec<usize> {
        self.turns
            .iter()
            .enumerate()
            .filter(|(_, t)| t.speaker == Speaker::Agent)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn alternates(&self) -> bool {
        self.turns.windows(2).all(|w| w[0].speaker != w[1].speaker)
    }
}

/// Log-probabilities from a next-utterance classifier: the self turn given
/// its context, and the following partner turn given the self turn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct CoherenceInput {
    pub c_prev: f64,
    pub c_next: f64,
}

impl From<(f64, f64)> for CoherenceInput {
    fn from((c_prev, c_next): (f64, f64)) -> Self {
        CoherenceInput { c_prev, c_next }
    }
}

impl From<CoherenceInput> for (f64, f64) {
    fn from(c: CoherenceInput) -> Self {
        (c.c_prev, c.c_next)
    }
}

/// Language-model log-likelihood of a self turn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FluencyInput {
    pub lm_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    pub gamma: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub r: f64,
    pub horizon: usize,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            gamma: DEFAULT_GAMMA,
            beta1: DEFAULT_BETA,
            beta2: DEFAULT_BETA,
            beta3: DEFAULT_BETA,
            r: DEFAULT_R,
            horizon: DEFAULT_HORIZON,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2), ("beta3", self.beta3)] {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be nonnegative, got {b}")));
            }
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(Error::InvalidParams(format!("r must be positive, got {}", self.r)));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidParams("horizon must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParams(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    Ok(())
}

/// Fraction of persona concepts (S ∪ P) lying within `r` of the future set.
pub fn recall_score(
    future: &ConceptSet,
    self_set: &ConceptSet,
    partner_set: &ConceptSet,
    d: &DistanceMatrix,
    r: f64,
) -> Result<f64> {
    let personas = union(self_set, partner_set)?;
    if personas.is_empty() {
        return Err(Error::EmptyPersona);
    }
    let covered = intersect(future, &personas, d, r)?;
    Ok(covered.len() as f64 / personas.len() as f64)
}

pub fn coherence_score(inp: CoherenceInput) -> f64 {
    (inp.c_prev + inp.c_next) / 2.0
}

pub fn mutual_benefit_reward(s_rec: f64, s_coh: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(gamma * s_rec + (1.0 - gamma) * s_coh)
}

/// Reciprocal of the summed set distances from the future set to both personas.
pub fn common_ground_reward(
    future: &ConceptSet,
    self_set: &ConceptSet,
    partner_set: &ConceptSet,
    d: &DistanceMatrix,
) -> Result<f64> {
    let to_self = set_distance(future, self_set, d)?;
    let to_partner = set_distance(future, partner_set, d)?;
    Ok(1.0 / (to_self + to_partner))
}

pub fn final_reward(r_lm: f64, r_mut: f64, r_com: f64, cfg: &RewardConfig) -> f64 {
    cfg.beta1 * r_lm + cfg.beta2 * r_mut + cfg.beta3 * r_com
}

/// Min-max scales a batch to [0, 1], then subtracts the batch median so that
/// about half of the values end up positive. A constant batch maps to zeros.
pub fn batch_normalize(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![0.0; values.len()];
    }
    let scaled: Vec<f64> = values.iter().map(|&v| (v - lo) / span).collect();
    let mut sorted = scaled.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    };
    scaled.into_iter().map(|v| v - median).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnScore {
    /// Position of the self turn in the episode.
    pub turn: usize,
    pub s_rec: f64,
    pub r_com: Option<f64>,
    pub s_coh: f64,
    pub r_lm: f64,
    pub r_mut: f64,
    pub r: f64,
    /// True when any component was missing and counted as zero.
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeScore {
    pub s_rec: f64,
    pub r_com: Option<f64>,
    pub dist_future_self: Option<f64>,
    pub dist_future_partner: Option<f64>,
    pub unscorable: Option<String>,
    pub horizon: usize,
    pub self_turns: usize,
    pub partial: bool,
    pub per_turn: Vec<TurnScore>,
    pub normalized: Option<Vec<f64>>,
}

struct Common {
    s_rec: f64,
    to_self: Option<f64>,
    to_partner: Option<f64>,
    r_com: Option<f64>,
    unscorable: Option<String>,
}

fn concept_rewards(
    future: &ConceptSet,
    self_set: &ConceptSet,
    partner_set: &ConceptSet,
    d: &DistanceMatrix,
    r: f64,
) -> Result<Common> {
    let s_rec = recall_score(future, self_set, partner_set, d, r)?;
    let missing = if future.is_empty() {
        Some("empty future set")
    } else if self_set.is_empty() {
        Some("empty self persona set")
    } else if partner_set.is_empty() {
        Some("empty partner persona set")
    } else {
        None
    };
    if let Some(reason) = missing {
        return Ok(Common {
            s_rec,
            to_self: None,
            to_partner: None,
            r_com: None,
            unscorable: Some(reason.to_string()),
        });
    }
    let to_self = set_distance(future, self_set, d)?;
    let to_partner = set_distance(future, partner_set, d)?;
    Ok(Common {
        s_rec,
        to_self: Some(to_self),
        to_partner: Some(to_partner),
        r_com: Some(common_ground_reward(future, self_set, partner_set, d)?),
        unscorable: None,
    })
}

/// Scores every self turn of an episode.
///
/// The episode-level future set F covers all turns of both speakers. Each
/// self turn is also scored against its own lookahead window of
/// `cfg.horizon` utterances starting at that turn, and its combined reward
/// uses the window values. Missing coherence or fluency inputs count as zero
/// and mark the turn partial.
pub fn score_episode(
    ep: &DialogueEpisode,
    d: &DistanceMatrix,
    extraction: &ExtractionConfig,
    cfg: &RewardConfig,
    coherence: Option<&[CoherenceInput]>,
    fluency: Option<&[FluencyInput]>,
) -> Result<EpisodeScore> {
    cfg.validate()?;
    if extraction.vocab.id() != d.vocab_id() {
        return Err(Error::VocabMismatch);
    }
    if ep.turns.is_empty() {
        return Err(Error::EmptyEpisode);
    }
    if !ep.alternates() {
        log::warn!("episode speakers do not alternate");
    }
    let self_turns = ep.self_turns();
    if let Some(c) = coherence {
        if c.len() != self_turns.len() {
            return Err(Error::MismatchedScorerLength {
                input: "coherence",
                expected: self_turns.len(),
                got: c.len(),
            });
        }
        if let Some(bad) = c.iter().find(|c| !(c.c_prev <= 0.0 && c.c_next <= 0.0)) {
            return Err(Error::InvalidParams(format!(
                "coherence scores are log-probabilities and must be <= 0, got ({}, {})",
                bad.c_prev, bad.c_next
            )));
        }
    }
    if let Some(f) = fluency {
        if f.len() != self_turns.len() {
            return Err(Error::MismatchedScorerLength {
                input: "fluency",
                expected: self_turns.len(),
                got: f.len(),
            });
        }
        if let Some(bad) = f.iter().find(|f| !f.lm_score.is_finite()) {
            return Err(Error::InvalidParams(format!("fluency score must be finite, got {}", bad.lm_score)));
        }
    }

    let self_set = extract_many(&ep.self_persona, extraction);
    let partner_set = extract_many(&ep.partner_persona, extraction);
    let texts: Vec<&str> = ep.turns.iter().map(|t| t.text.as_str()).collect();
    let future = extract_many(&texts, extraction);
    let episode = concept_rewards(&future, &self_set, &partner_set, d, cfg.r)?;

    let mut per_turn = Vec::with_capacity(self_turns.len());
    for (n, &t) in self_turns.iter().enumerate() {
        let end = (t + cfg.horizon).min(texts.len());
        let window = extract_many(&texts[t..end], extraction);
        let w = concept_rewards(&window, &self_set, &partner_set, d, cfg.r)?;
        let s_coh = coherence.map_or(0.0, |c| coherence_score(c[n]));
        let r_lm = fluency.map_or(0.0, |f| f[n].lm_score);
        let r_mut = mutual_benefit_reward(w.s_rec, s_coh, cfg.gamma)?;
        let r = final_reward(r_lm, r_mut, w.r_com.unwrap_or(0.0), cfg);
        per_turn.push(TurnScore {
            turn: t,
            s_rec: w.s_rec,
            r_com: w.r_com,
            s_coh,
            r_lm,
            r_mut,
            r,
            partial: coherence.is_none() || fluency.is_none() || w.r_com.is_none(),
        });
    }

    let normalized = (per_turn.len() >= 2).then(|| {
        let lm = batch_normalize(&per_turn.iter().map(|s| s.r_lm).collect::<Vec<_>>());
        let mt = batch_normalize(&per_turn.iter().map(|s| s.r_mut).collect::<Vec<_>>());
        let cm = batch_normalize(&per_turn.iter().map(|s| s.r_com.unwrap_or(0.0)).collect::<Vec<_>>());
        (0..per_turn.len())
            .map(|i| final_reward(lm[i], mt[i], cm[i], cfg))
            .collect()
    });

    Ok(EpisodeScore {
        s_rec: episode.s_rec,
        r_com: episode.r_com,
        dist_future_self: episode.to_self,
        dist_future_partner: episode.to_partner,
        unscorable: episode.unscorable,
        horizon: cfg.horizon,
        self_turns: self_turns.len(),
        partial: episode.r_com.is_none() || per_turn.iter().any(|t| t.partial),
        per_turn,
        normalized,
    })
}

/// Episode file record: the episode plus optional external scorer outputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeInput {
    #[serde(flatten)]
    pub episode: DialogueEpisode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence: Option<Vec<CoherenceInput>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fluency: Option<Vec<FluencyInput>>,
}

impl EpisodeInput {
    pub fn score(&self, d: &DistanceMatrix, extraction: &ExtractionConfig, cfg: &RewardConfig) -> Result<EpisodeScore> {
        score_episode(
            &self.episode,
            d,
            extraction,
            cfg,
            self.coherence.as_deref(),
            self.fluency.as_deref(),
        )
    }
}
