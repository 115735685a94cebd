//! Knowledge-graph ingestion: ConceptNet dump parsing, the weighted concept
//! graph, and the all-pairs distance matrix built from it.

pub mod dump;
pub mod graph;
pub mod matrix;

pub use dump::{parse_concept_uri, parse_dump, DumpParse, KnowledgeEdge};
pub use graph::{build_graph, build_graph_with, weight_to_distance, ConceptGraph, DEFAULT_MIN_EDGE_DIST};
pub use matrix::{
    compute_distance_matrix, load_matrix, save_matrix, DistanceMatrix, DEFAULT_MAX_DIST, DEFAULT_SELF_DIST,
};
