use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kg::dump::KnowledgeEdge;
use crate::vocab::ConceptVocabulary;

/// Shortest allowed edge length; a confidence weight above 1000 would
/// otherwise produce a near-zero hop.
pub const DEFAULT_MIN_EDGE_DIST: f64 = 1e-3;

/// Undirected weighted graph over vocabulary indices.
#[derive(Debug, Clone)]
pub struct ConceptGraph {
    vocab: Arc<ConceptVocabulary>,
    adjacency: Vec<Vec<(u32, f64)>>,
}

impl ConceptGraph {
    /// Builds a graph directly from index triples `(a, b, distance)`.
    /// Self-loops are dropped and parallel edges keep the shortest distance.
    pub fn from_distances(
        vocab: Arc<ConceptVocabulary>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let n = vocab.len();
        let mut arcs: Vec<(u32, u32, f64)> = Vec::new();
        for (a, b, dist) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidParams(format!(
                    "edge ({a}, {b}) outside vocabulary of size {n}"
                )));
            }
            if !(dist.is_finite() && dist > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "edge distance must be positive and finite, got {dist}"
                )));
            }
            if a != b {
                arcs.push((a as u32, b as u32, dist));
                arcs.push((b as u32, a as u32, dist));
            }
        }
        arcs.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)).then(x.2.total_cmp(&y.2)));
        // after sorting, the first arc of each (from, to) run is the shortest
        arcs.dedup_by(|next, kept| next.0 == kept.0 && next.1 == kept.1);

        let mut adjacency = vec![Vec::new(); n];
        for (from, to, dist) in arcs {
            adjacency[from as usize].push((to, dist));
        }
        Ok(ConceptGraph { vocab, adjacency })
    }

    pub fn vocab(&self) -> &Arc<ConceptVocabulary> {
        &self.vocab
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Neighbors of `node` as `(index, distance)`, sorted by index.
    pub fn neighbors(&self, node: usize) -> &[(u32, f64)] {
        &self.adjacency[node]
    }
}

/// Turns a confidence weight into an edge length: `max(1 / weight, min_edge_dist)`.
pub fn weight_to_distance(weight: f64, min_edge_dist: f64) -> f64 {
    (1.0 / weight).max(min_edge_dist)
}

/// Builds the concept graph with the default weight transform.
pub fn build_graph(edges: &[KnowledgeEdge], vocab: Arc<ConceptVocabulary>) -> Result<ConceptGraph> {
    build_graph_with(edges, vocab, DEFAULT_MIN_EDGE_DIST)
}

pub fn build_graph_with(
    edges: &[KnowledgeEdge],
    vocab: Arc<ConceptVocabulary>,
    min_edge_dist: f64,
) -> Result<ConceptGraph> {
    if !(min_edge_dist.is_finite() && min_edge_dist > 0.0) {
        return Err(Error::InvalidParams(format!(
            "min edge distance must be positive, got {min_edge_dist}"
        )));
    }
    let mut triples = Vec::with_capacity(edges.len());
    for e in edges {
        let a = vocab
            .index_of_lemma(&e.start)
            .ok_or_else(|| Error::UnknownConcept(e.start.clone()))?;
        let b = vocab
            .index_of_lemma(&e.end)
            .ok_or_else(|| Error::UnknownConcept(e.end.clone()))?;
        if !(e.weight.is_finite() && e.weight > 0.0) {
            return Err(Error::InvalidParams(format!(
                "edge weight must be positive, got {}",
                e.weight
            )));
        }
        triples.push((a, b, weight_to_distance(e.weight, min_edge_dist)));
    }
    ConceptGraph::from_distances(vocab, triples)
}
