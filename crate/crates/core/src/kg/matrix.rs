//! Dense concept distance matrix, its all-pairs construction, and the
//! `CSDM` file format.
//!
//! File layout, little-endian:
//!
//! ```text
//! magic     "CSDM"           4 bytes
//! version   u16 = 1
//! self_dist f32
//! max_dist  f32
//! n         u32              vocabulary size
//! n records u16 len + UTF-8 lemma
//! n*n       f32              row-major distances
//! ```
//!
//! Distances are accumulated in `f64` and rounded to `f32` once, when written.
//! A loaded matrix holds the widened `f32` values, so saving it again
//! reproduces the file byte for byte.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kg::graph::ConceptGraph;
use crate::vocab::{ConceptVocabulary, VocabId};

pub const DEFAULT_SELF_DIST: f64 = 0.001;
pub const DEFAULT_MAX_DIST: f64 = 10.0;

pub const MAGIC: &[u8; 4] = b"CSDM";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    vocab: Arc<ConceptVocabulary>,
    d: Vec<f64>,
    self_dist: f64,
    max_dist: f64,
}

fn check_params(self_dist: f64, max_dist: f64) -> Result<()> {
    if !(self_dist.is_finite() && max_dist.is_finite() && self_dist > 0.0 && max_dist > self_dist) {
        return Err(Error::InvalidParams(format!(
            "need max_dist > self_dist > 0, got max_dist={max_dist}, self_dist={self_dist}"
        )));
    }
    Ok(())
}

impl DistanceMatrix {
    /// Wraps a row-major `n*n` array after checking every matrix invariant
    /// except the triangle inequality (see [`DistanceMatrix::triangle_violation`]).
    pub fn from_dense(
        vocab: Arc<ConceptVocabulary>,
        d: Vec<f64>,
        self_dist: f64,
        max_dist: f64,
    ) -> Result<Self> {
        check_params(self_dist, max_dist)?;
        let n = vocab.len();
        if d.len() != n * n {
            return Err(Error::InvalidParams(format!(
                "expected {} entries for {n} concepts, got {}",
                n * n,
                d.len()
            )));
        }
        let m = DistanceMatrix {
            vocab,
            d,
            self_dist,
            max_dist,
        };
        if let Some(msg) = m.invariant_violation() {
            return Err(Error::InvalidParams(msg));
        }
        Ok(m)
    }

    fn invariant_violation(&self) -> Option<String> {
        let n = self.len();
        for i in 0..n {
            if self.get(i, i) != self.self_dist {
                return Some(format!("diagonal entry {i} is not self_dist"));
            }
            for j in (i + 1)..n {
                let v = self.get(i, j);
                if v != self.get(j, i) {
                    return Some(format!("entries ({i}, {j}) and ({j}, {i}) differ"));
                }
                if !(v >= self.self_dist && v <= self.max_dist) {
                    return Some(format!("entry ({i}, {j}) = {v} outside [self_dist, max_dist]"));
                }
            }
        }
        None
    }

    /// First triple `(i, j, k)` with `d[i][j] > d[i][k] + d[k][j] + eps`. O(n³).
    pub fn triangle_violation(&self, eps: f64) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.get(i, j) > self.get(i, k) + self.get(k, j) + eps {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    pub fn vocab(&self) -> &Arc<ConceptVocabulary> {
        &self.vocab
    }

    pub fn vocab_id(&self) -> VocabId {
        self.vocab.id()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn self_dist(&self) -> f64 {
        self.self_dist
    }

    pub fn max_dist(&self) -> f64 {
        self.max_dist
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.d[i * n..(i + 1) * n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    /// Copy with every value rounded to the file's `f32` precision.
    pub fn to_storage_precision(&self) -> DistanceMatrix {
        let round = |x: f64| f64::from(x as f32);
        DistanceMatrix {
            vocab: Arc::clone(&self.vocab),
            d: self.d.iter().map(|&x| round(x)).collect(),
            self_dist: round(self.self_dist),
            max_dist: round(self.max_dist),
        }
    }

    /// Serialized size in bytes.
    pub fn file_size(&self) -> usize {
        let header = 4 + 2 + 4 + 4 + 4;
        let vocab: usize = self.vocab.concepts().iter().map(|c| 2 + c.len()).sum();
        header + vocab + 4 * self.d.len()
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::with_capacity(1 << 16, w);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.self_dist as f32).to_le_bytes())?;
        w.write_all(&(self.max_dist as f32).to_le_bytes())?;
        w.write_all(&(self.len() as u32).to_le_bytes())?;
        for lemma in self.vocab.concepts() {
            let len = u16::try_from(lemma.len()).map_err(|_| {
                Error::InvalidParams(format!("lemma {lemma:?} longer than 65535 bytes"))
            })?;
            w.write_all(&len.to_le_bytes())?;
            w.write_all(lemma.as_bytes())?;
        }
        let mut chunk = Vec::with_capacity(4 * 4096);
        for block in self.d.chunks(4096) {
            chunk.clear();
            for &x in block {
                chunk.extend_from_slice(&(x as f32).to_le_bytes());
            }
            w.write_all(&chunk)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::with_capacity(self.file_size());
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(corrupt("bad magic bytes"));
        }
        let version = u16::from_le_bytes(cur.array()?);
        if version != VERSION {
            return Err(corrupt(&format!("unsupported version {version}")));
        }
        let self_dist = f64::from(f32::from_le_bytes(cur.array()?));
        let max_dist = f64::from(f32::from_le_bytes(cur.array()?));
        check_params(self_dist, max_dist).map_err(|_| corrupt("invalid self_dist/max_dist header"))?;
        let n = u32::from_le_bytes(cur.array()?) as usize;

        let mut lemmas = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let len = u16::from_le_bytes(cur.array()?) as usize;
            let raw = cur.take(len)?;
            let lemma = std::str::from_utf8(raw).map_err(|_| corrupt("lemma is not UTF-8"))?;
            lemmas.push(lemma.to_string());
        }
        let vocab = ConceptVocabulary::from_lemmas(lemmas)
            .map_err(|e| corrupt(&format!("vocabulary block: {e}")))?;

        let cells = n
            .checked_mul(n)
            .and_then(|c| c.checked_mul(4))
            .ok_or_else(|| corrupt("size overflow"))?;
        if cur.remaining() != cells {
            return Err(corrupt(&format!(
                "expected {cells} bytes of distances, found {}",
                cur.remaining()
            )));
        }
        let d: Vec<f64> = cur
            .take(cells)?
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect();
        let m = DistanceMatrix {
            vocab: Arc::new(vocab),
            d,
            self_dist,
            max_dist,
        };
        if let Some(msg) = m.invariant_violation() {
            return Err(corrupt(&msg));
        }
        Ok(m)
    }
}

fn corrupt(msg: &str) -> Error {
    Error::CorruptFile(msg.to_string())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.remaining() < len {
            return Err(corrupt("truncated file"));
        }
        let out = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut a = [0u8; N];
        a.copy_from_slice(self.take(N)?);
        Ok(a)
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

pub fn save_matrix(m: &DistanceMatrix, path: impl AsRef<Path>) -> Result<()> {
    m.write_to(File::create(path)?)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DistanceMatrix> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    DistanceMatrix::from_bytes(&bytes)
}

#[derive(Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Single-source Dijkstra. Paths of length `>= cap` are not explored and
/// stay at `f64::INFINITY`.
fn dijkstra(graph: &ConceptGraph, source: usize, cap: f64) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.node_count()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((Dist(0.0), source as u32)));
    while let Some(Reverse((Dist(du), u))) = heap.pop() {
        let u = u as usize;
        if du > dist[u] {
            continue;
        }
        for &(v, w) in graph.neighbors(u) {
            let nd = du + w;
            if nd < dist[v as usize] && nd < cap {
                dist[v as usize] = nd;
                heap.push(Reverse((Dist(nd), v)));
            }
        }
    }
    dist
}

/// All-pairs shortest-path distances over `graph`, capped at `max_dist`,
/// with `self_dist` on the diagonal.
///
/// Rows are computed in parallel, one Dijkstra run per source. Each
/// off-diagonal pair takes the smaller of its two directed results, so the
/// output is exactly symmetric and independent of scheduling.
pub fn compute_distance_matrix(graph: &ConceptGraph, max_dist: f64, self_dist: f64) -> Result<DistanceMatrix> {
    check_params(self_dist, max_dist)?;
    let n = graph.node_count();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| dijkstra(graph, s, max_dist))
        .collect();

    let mut d = vec![0.0; n * n];
    d.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, out)| {
        for (j, cell) in out.iter_mut().enumerate() {
            *cell = if i == j {
                self_dist
            } else {
                rows[i][j].min(rows[j][i]).clamp(self_dist, max_dist)
            };
        }
    });
    Ok(DistanceMatrix {
        vocab: Arc::clone(graph.vocab()),
        d,
        self_dist,
        max_dist,
    })
}
