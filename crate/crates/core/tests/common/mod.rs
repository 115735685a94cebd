//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use conceptset::kg::ConceptGraph;
use conceptset::{ConceptSet, ConceptVocabulary, DistanceMatrix};
use rand::Rng;

pub const SELF_DIST: f64 = 0.001;
pub const MAX_DIST: f64 = 10.0;

const LETTERS: &[u8] = b"bcdfgklmnprtvz";

/// Vowel-free four-letter names; the stemmer leaves them untouched and their
/// lexicographic order equals index order.
pub fn synthetic_vocab(n: usize) -> Arc<ConceptVocabulary> {
    let base = LETTERS.len();
    let names = (0..n)
        .map(|mut i| {
            let mut s = [0u8; 4];
            for slot in s.iter_mut().rev() {
                *slot = LETTERS[i % base];
                i /= base;
            }
            String::from_utf8(s.to_vec()).unwrap()
        })
        .collect();
    Arc::new(ConceptVocabulary::from_lemmas(names).unwrap())
}

pub fn toy_vocab() -> Arc<ConceptVocabulary> {
    Arc::new(ConceptVocabulary::from_lemmas(["ant", "bee", "cat", "dog"].map(String::from).to_vec()).unwrap())
}

/// The four-concept toy matrix over [ant, bee, cat, dog].
pub fn toy_matrix() -> DistanceMatrix {
    #[rustfmt::skip]
    let d = vec![
        0.001, 0.15,  0.5,   0.6,
        0.15,  0.001, 0.45,  0.55,
        0.5,   0.45,  0.001, 0.1,
        0.6,   0.55,  0.1,   0.001,
    ];
    DistanceMatrix::from_dense(toy_vocab(), d, SELF_DIST, MAX_DIST).unwrap()
}

/// Random undirected edge list with positive lengths.
pub fn random_edges<R: Rng>(rng: &mut R, n: usize, density: f64) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.gen_bool(density) {
                edges.push((a, b, rng.gen_range(0.01..2.0)));
            }
        }
    }
    // a few parallel duplicates
    for _ in 0..edges.len() / 10 {
        let (a, b, _) = edges[rng.gen_range(0..edges.len())];
        edges.push((b, a, rng.gen_range(0.01..2.0)));
    }
    edges
}

/// Floyd–Warshall with the same cap and diagonal conventions.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)], max: f64, self_dist: f64) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; n * n];
    for &(a, b, w) in edges {
        if a == b {
            continue;
        }
        d[a * n + b] = d[a * n + b].min(w);
        d[b * n + a] = d[b * n + a].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = if i == j { self_dist } else { d[i * n + j].clamp(self_dist, max) };
        }
    }
    d
}

/// A random valid matrix: shortest paths of a random graph, so the triangle
/// inequality holds by construction.
pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> DistanceMatrix {
    let density = rng.gen_range(0.1..0.6);
    let edges = random_edges(rng, n, density);
    let mut d = floyd_warshall(n, &edges, MAX_DIST, SELF_DIST);
    // FW accumulates in a different order per pair; take the symmetric min
    for i in 0..n {
        for j in (i + 1)..n {
            let m = d[i * n + j].min(d[j * n + i]);
            d[i * n + j] = m;
            d[j * n + i] = m;
        }
    }
    DistanceMatrix::from_dense(synthetic_vocab(n), d, SELF_DIST, MAX_DIST).unwrap()
}

pub fn graph_of(n: usize, edges: &[(usize, usize, f64)]) -> ConceptGraph {
    ConceptGraph::from_distances(synthetic_vocab(n), edges.iter().copied()).unwrap()
}

pub fn random_mask<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<bool> {
    (0..n).map(|_| rng.gen_bool(p)).collect()
}

pub fn random_nonempty_mask<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<bool> {
    let mut m = random_mask(rng, n, p);
    m[rng.gen_range(0..n)] = true;
    m
}

pub fn set_of(d: &DistanceMatrix, mask: &[bool]) -> ConceptSet {
    ConceptSet::from_dense(d.vocab(), mask).unwrap()
}

// Direct-definition oracles over dense membership vectors.

pub fn oracle_expand(mask: &[bool], d: &DistanceMatrix, k: usize) -> Vec<(usize, f64)> {
    let n = mask.len();
    if !mask.iter().any(|&b| b) {
        return Vec::new();
    }
    let mut scored: Vec<(usize, f64)> = (0..n)
        .map(|i| {
            let mut best = f64::INFINITY;
            for a in 0..n {
                if mask[a] && d.get(a, i) < best {
                    best = d.get(a, i);
                }
            }
            (i, best)
        })
        .collect();
    scored.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap().then(x.0.cmp(&y.0)));
    scored.truncate(k);
    scored
}

pub fn oracle_intersect(a: &[bool], b: &[bool], d: &DistanceMatrix, r: f64) -> Vec<bool> {
    let n = a.len();
    (0..n)
        .map(|j| b[j] && (0..n).any(|i| a[i] && 0.0 < d.get(i, j) && d.get(i, j) < r))
        .collect()
}

/// (c_A / |A|)ᵀ · D · (c_B / |B|) evaluated as a dense bilinear form.
pub fn oracle_set_distance(a: &[bool], b: &[bool], d: &DistanceMatrix) -> f64 {
    let n = a.len();
    let na = a.iter().filter(|&&x| x).count() as f64;
    let nb = b.iter().filter(|&&x| x).count() as f64;
    let va: Vec<f64> = a.iter().map(|&x| if x { 1.0 / na } else { 0.0 }).collect();
    let vb: Vec<f64> = b.iter().map(|&x| if x { 1.0 / nb } else { 0.0 }).collect();
    let mut row = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            row[j] += va[i] * d.get(i, j);
        }
    }
    row.iter().zip(&vb).map(|(x, y)| x * y).sum()
}
