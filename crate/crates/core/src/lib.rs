//! Concept-set algebra over a commonsense knowledge graph.
//!
//! Texts become sets of concepts drawn from a fixed vocabulary. A dense
//! matrix of shortest-path distances between concepts, derived from a
//! ConceptNet dump, supports knowledge-aware set operations (expansion,
//! union, thresholded intersection, distance), which in turn drive the
//! persona dialogue rewards in [`rewards`].

pub mod cli;
pub mod error;
pub mod extract;
pub mod kg;
pub mod rewards;
pub mod sets;
pub mod vocab;

pub use error::{Error, Result};
pub use extract::{build_guide_set, extract, extract_many, ExtractionConfig};
pub use kg::{compute_distance_matrix, load_matrix, save_matrix, ConceptGraph, DistanceMatrix, KnowledgeEdge};
pub use rewards::{
    batch_normalize, coherence_score, common_ground_reward, final_reward, mutual_benefit_reward, recall_score,
    score_episode, CoherenceInput, DialogueEpisode, EpisodeInput, EpisodeScore, FluencyInput, RewardConfig, Speaker,
    Turn,
};
pub use sets::{expand, intersect, set_distance, union, ConceptSet, OperationParams, RankedConcepts};
pub use vocab::{build_vocabulary, normalize, ConceptVocabulary, WordFormGroup};
