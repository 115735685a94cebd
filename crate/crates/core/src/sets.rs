//! Concept sets and the knowledge-enhanced operations over them: expansion,
//! union, thresholded intersection, and set distance.
//!
//! A set is stored as a sorted list of vocabulary indices; the logical
//! membership vector is available through [`ConceptSet::to_dense`].

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kg::DistanceMatrix;
use crate::vocab::{ConceptVocabulary, VocabId};

pub const DEFAULT_K: usize = 250;
pub const DEFAULT_R: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConceptSet {
    vocab_id: VocabId,
    universe: usize,
    members: Vec<u32>,
}

impl ConceptSet {
    pub fn empty(vocab: &ConceptVocabulary) -> Self {
        ConceptSet {
            vocab_id: vocab.id(),
            universe: vocab.len(),
            members: Vec::new(),
        }
    }

    pub fn from_indices(vocab: &ConceptVocabulary, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let n = vocab.len();
        let mut members = BTreeSet::new();
        for i in indices {
            if i >= n {
                return Err(Error::InvalidParams(format!("index {i} outside vocabulary of size {n}")));
            }
            members.insert(i as u32);
        }
        Ok(ConceptSet {
            vocab_id: vocab.id(),
            universe: n,
            members: members.into_iter().collect(),
        })
    }

    /// Resolves each word through `vocab.lookup`; unknown words are an error.
    pub fn from_words<S: AsRef<str>>(vocab: &ConceptVocabulary, words: &[S]) -> Result<Self> {
        let indices = words
            .iter()
            .map(|w| {
                vocab
                    .lookup(w.as_ref())
                    .ok_or_else(|| Error::UnknownConcept(w.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(vocab, indices)
    }

    /// Builds a set from a membership vector of length |V|.
    pub fn from_dense(vocab: &ConceptVocabulary, mask: &[bool]) -> Result<Self> {
        if mask.len() != vocab.len() {
            return Err(Error::VocabMismatch);
        }
        Self::from_indices(vocab, mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
    }

    pub fn vocab_id(&self) -> VocabId {
        self.vocab_id
    }

    /// ‖c‖₁, the number of members.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        u32::try_from(index).is_ok_and(|i| self.members.binary_search(&i).is_ok())
    }

    /// Member indices in ascending order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().map(|&i| i as usize)
    }

    pub fn to_dense(&self) -> Vec<bool> {
        let mut mask = vec![false; self.universe];
        for i in self.indices() {
            mask[i] = true;
        }
        mask
    }

    pub fn is_subset(&self, other: &ConceptSet) -> bool {
        self.indices().all(|i| other.contains(i))
    }

    pub fn lemmas<'v>(&self, vocab: &'v ConceptVocabulary) -> Vec<&'v str> {
        self.indices().filter_map(|i| vocab.concept(i)).collect()
    }

    fn same_space(&self, other: &ConceptSet) -> Result<()> {
        if self.vocab_id != other.vocab_id || self.universe != other.universe {
            return Err(Error::VocabMismatch);
        }
        Ok(())
    }

    fn check_matrix(&self, d: &DistanceMatrix) -> Result<()> {
        if self.vocab_id != d.vocab_id() || self.universe != d.len() {
            return Err(Error::VocabMismatch);
        }
        Ok(())
    }

    fn with_members(&self, members: Vec<u32>) -> ConceptSet {
        ConceptSet {
            vocab_id: self.vocab_id,
            universe: self.universe,
            members,
        }
    }
}

/// Expansion size `k` and intersection threshold `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperationParams {
    pub k: usize,
    pub r: f64,
}

impl Default for OperationParams {
    fn default() -> Self {
        OperationParams {
            k: DEFAULT_K,
            r: DEFAULT_R,
        }
    }
}

impl OperationParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        check_r(self.r)
    }
}

fn check_r(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParams(format!("r must be positive, got {r}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankedConcept {
    pub index: usize,
    pub distance: f64,
}

/// Concepts ordered by distance to a set, ties by ascending index.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RankedConcepts {
    pub entries: Vec<RankedConcept>,
}

/// Per-concept distance to the nearest member of `a`; `+inf` when `a` is empty.
pub fn distances_to_set(a: &ConceptSet, d: &DistanceMatrix) -> Result<Vec<f64>> {
    a.check_matrix(d)?;
    let mut scores = vec![f64::INFINITY; d.len()];
    for m in a.indices() {
        for (s, &x) in scores.iter_mut().zip(d.row(m)) {
            if x < *s {
                *s = x;
            }
        }
    }
    Ok(scores)
}

/// The `k` concepts closest to `a`, scored by their minimum distance to any
/// member. Members score `self_dist` and so rank first. Empty in, empty out.
pub fn expand(a: &ConceptSet, d: &DistanceMatrix, k: usize) -> Result<(ConceptSet, RankedConcepts)> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    let scores = distances_to_set(a, d)?;
    if a.is_empty() {
        return Ok((a.with_members(Vec::new()), RankedConcepts::default()));
    }
    let by_score = |x: &u32, y: &u32| {
        scores[*x as usize]
            .total_cmp(&scores[*y as usize])
            .then(x.cmp(y))
    };
    let mut order: Vec<u32> = (0..d.len() as u32).collect();
    let k = k.min(order.len());
    if k < order.len() {
        order.select_nth_unstable_by(k - 1, by_score);
        order.truncate(k);
    }
    order.sort_unstable_by(by_score);

    let ranked = RankedConcepts {
        entries: order
            .iter()
            .map(|&i| RankedConcept {
                index: i as usize,
                distance: scores[i as usize],
            })
            .collect(),
    };
    order.sort_unstable();
    Ok((a.with_members(order), ranked))
}

pub fn union(a: &ConceptSet, b: &ConceptSet) -> Result<ConceptSet> {
    a.same_space(b)?;
    let mut members = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.members.len() && j < b.members.len() {
        let (x, y) = (a.members[i], b.members[j]);
        members.push(x.min(y));
        i += usize::from(x <= y);
        j += usize::from(y <= x);
    }
    members.extend_from_slice(&a.members[i..]);
    members.extend_from_slice(&b.members[j..]);
    Ok(a.with_members(members))
}

/// Members of `b` lying strictly within `r` of some member of `a`
/// (`0 < d < r`). Not commutative: the result is always a subset of `b`.
///
/// With `r <= self_dist` even identical concepts fail the strict test and
/// the result is empty.
pub fn intersect(a: &ConceptSet, b: &ConceptSet, d: &DistanceMatrix, r: f64) -> Result<ConceptSet> {
    check_r(r)?;
    a.same_space(b)?;
    a.check_matrix(d)?;
    if r <= d.self_dist() {
        log::warn!(
            "intersection threshold r={r} is not above self distance {}; exact matches will be excluded",
            d.self_dist()
        );
    }
    let members = b
        .members
        .iter()
        .copied()
        .filter(|&j| {
            a.indices().any(|i| {
                let x = d.get(i, j as usize);
                x > 0.0 && x < r
            })
        })
        .collect();
    Ok(b.with_members(members))
}

/// Mean distance over all pairs in `a × b`.
pub fn set_distance(a: &ConceptSet, b: &ConceptSet, d: &DistanceMatrix) -> Result<f64> {
    a.same_space(b)?;
    a.check_matrix(d)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut total = 0.0;
    for i in a.indices() {
        let row = d.row(i);
        total += b.indices().map(|j| row[j]).sum::<f64>();
    }
    Ok(total / (a.len() as f64 * b.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::toy;

    fn s(d: &DistanceMatrix, words: &[&str]) -> ConceptSet {
        ConceptSet::from_words(d.vocab(), words).unwrap()
    }

    fn names(d: &DistanceMatrix, set: &ConceptSet) -> Vec<String> {
        set.lemmas(d.vocab()).into_iter().map(String::from).collect()
    }

    #[test]
    fn expand_examples() {
        let d = toy();
        let (set, ranked) = expand(&s(&d, &["cat"]), &d, 2).unwrap();
        assert_eq!(names(&d, &set), ["cat", "dog"]);
        assert_eq!(
            ranked.entries,
            vec![
                RankedConcept { index: 2, distance: 0.001 },
                RankedConcept { index: 3, distance: 0.1 }
            ]
        );

        let (set, ranked) = expand(&s(&d, &[]), &d, 3).unwrap();
        assert!(set.is_empty() && ranked.entries.is_empty());

        let (set, _) = expand(&s(&d, &["ant", "bee", "cat", "dog"]), &d, 2).unwrap();
        assert_eq!(names(&d, &set), ["ant", "bee"]);
    }

    #[test]
    fn expand_k_larger_than_vocab() {
        let d = toy();
        let (set, ranked) = expand(&s(&d, &["ant"]), &d, 100).unwrap();
        assert_eq!(set.len(), 4);
        let order: Vec<usize> = ranked.entries.iter().map(|e| e.index).collect();
        assert_eq!(order, [0, 1, 2, 3]);
        assert!(matches!(expand(&s(&d, &["ant"]), &d, 0), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn union_examples() {
        let d = toy();
        assert_eq!(names(&d, &union(&s(&d, &["ant"]), &s(&d, &["cat"])).unwrap()), ["ant", "cat"]);
        let a = s(&d, &["bee", "dog"]);
        assert_eq!(union(&a, &s(&d, &[])).unwrap(), a);
        assert_eq!(
            names(&d, &union(&s(&d, &["ant", "cat"]), &s(&d, &["cat", "dog"])).unwrap()),
            ["ant", "cat", "dog"]
        );
    }

    #[test]
    fn intersect_examples() {
        let d = toy();
        let got = intersect(&s(&d, &["cat"]), &s(&d, &["dog", "bee"]), &d, 0.2).unwrap();
        assert_eq!(names(&d, &got), ["dog"]);

        let ab = intersect(&s(&d, &["cat"]), &s(&d, &["dog"]), &d, 0.2).unwrap();
        let ba = intersect(&s(&d, &["dog"]), &s(&d, &["cat"]), &d, 0.2).unwrap();
        assert_eq!(names(&d, &ab), ["dog"]);
        assert_eq!(names(&d, &ba), ["cat"]);
        assert_ne!(ab, ba);

        assert!(intersect(&s(&d, &[]), &s(&d, &["cat"]), &d, 0.2).unwrap().is_empty());
        assert!(intersect(&s(&d, &["cat"]), &s(&d, &[]), &d, 0.2).unwrap().is_empty());
    }

    #[test]
    fn intersect_threshold_edge_cases() {
        let d = toy();
        let cat = s(&d, &["cat"]);
        assert!(matches!(intersect(&cat, &cat, &d, 0.0), Err(Error::InvalidParams(_))));
        assert!(matches!(intersect(&cat, &cat, &d, -1.0), Err(Error::InvalidParams(_))));
        // strict inequality against the 0.001 diagonal
        assert!(intersect(&cat, &cat, &d, 0.001).unwrap().is_empty());
        assert_eq!(intersect(&cat, &cat, &d, 0.0011).unwrap(), cat);
        // d(cat, dog) = 0.1 is not strictly below 0.1
        assert!(intersect(&cat, &s(&d, &["dog"]), &d, 0.1).unwrap().is_empty());
    }

    #[test]
    fn set_distance_examples() {
        let d = toy();
        let x = set_distance(&s(&d, &["ant"]), &s(&d, &["cat", "dog"]), &d).unwrap();
        assert!((x - 0.55).abs() < 1e-12);
        assert_eq!(set_distance(&s(&d, &["cat"]), &s(&d, &["cat"]), &d).unwrap(), 0.001);
        assert!(matches!(
            set_distance(&s(&d, &[]), &s(&d, &["cat"]), &d),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn vocab_mismatch_detected() {
        let d = toy();
        let other = ConceptVocabulary::from_lemmas(vec!["ant".into(), "bee".into(), "cat".into(), "emu".into()]).unwrap();
        let foreign = ConceptSet::from_indices(&other, [0]).unwrap();
        let ant = s(&d, &["ant"]);
        assert!(matches!(expand(&foreign, &d, 2), Err(Error::VocabMismatch)));
        assert!(matches!(union(&foreign, &ant), Err(Error::VocabMismatch)));
        assert!(matches!(intersect(&foreign, &ant, &d, 0.2), Err(Error::VocabMismatch)));
        assert!(matches!(set_distance(&ant, &foreign, &d), Err(Error::VocabMismatch)));
    }

    #[test]
    fn dense_round_trip_and_bounds() {
        let d = toy();
        let set = s(&d, &["bee", "dog"]);
        assert_eq!(set.to_dense(), [false, true, false, true]);
        assert_eq!(ConceptSet::from_dense(d.vocab(), &set.to_dense()).unwrap(), set);
        assert!(ConceptSet::from_indices(d.vocab(), [4]).is_err());
        assert!(matches!(
            ConceptSet::from_words(d.vocab(), &["horse"]),
            Err(Error::UnknownConcept(_))
        ));
        assert!(set.contains(1) && !set.contains(0) && !set.contains(usize::MAX));
    }

    #[test]
    fn params_validation() {
        assert!(OperationParams::default().validate().is_ok());
        assert_eq!(OperationParams::default(), OperationParams { k: 250, r: 0.2 });
        assert!(OperationParams { k: 0, r: 0.2 }.validate().is_err());
        assert!(OperationParams { k: 1, r: 0.0 }.validate().is_err());
    }
}
