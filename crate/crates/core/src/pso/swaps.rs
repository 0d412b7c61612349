//! Swap-pair velocities over task permutations.
//!
//! A velocity is an ordered list of index transpositions. Adding a velocity
//! to a sequence applies the swaps left to right; subtracting two sequences
//! yields the swaps that turn one into the other.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::model::TaskId;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SwapError {
    #[error("swap ({i}, {j}) is out of range for a sequence of length {len}")]
    OutOfRange { i: usize, j: usize, len: usize },
    #[error("sequences are not permutations of the same tasks")]
    Mismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SwapPair(pub usize, pub usize);

impl SwapPair {
    fn key(self) -> (usize, usize) {
        (self.0.min(self.1), self.0.max(self.1))
    }
}

/// Ordered transpositions with no repeated index set; `(i, j)` and `(j, i)`
/// count as the same pair and self-swaps are dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SwapPairList {
    pairs: Vec<SwapPair>,
    seen: HashSet<(usize, usize)>,
}

impl SwapPairList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `pair` unless it is a self-swap or already present.
    pub fn push(&mut self, pair: SwapPair) -> bool {
        if pair.0 == pair.1 || !self.seen.insert(pair.key()) {
            return false;
        }
        self.pairs.push(pair);
        true
    }

    pub fn contains(&self, pair: SwapPair) -> bool {
        self.seen.contains(&pair.key())
    }

    pub fn pairs(&self) -> &[SwapPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `max_pairs` or fewer distinct random pairs (at least one when the
    /// sequence has two or more positions).
    pub fn random<R: Rng + ?Sized>(len: usize, max_pairs: usize, rng: &mut R) -> Self {
        let mut v = Self::new();
        if len < 2 || max_pairs == 0 {
            return v;
        }
        let distinct = len * (len - 1) / 2;
        let count = rng.gen_range(1..=max_pairs).min(distinct);
        while v.len() < count {
            let picked = index::sample(rng, len, 2);
            v.push(SwapPair(picked.index(0), picked.index(1)));
        }
        v
    }
}

impl FromIterator<SwapPair> for SwapPairList {
    fn from_iter<T: IntoIterator<Item = SwapPair>>(iter: T) -> Self {
        let mut v = Self::new();
        for p in iter {
            v.push(p);
        }
        v
    }
}

impl<'a> IntoIterator for &'a SwapPairList {
    type Item = &'a SwapPair;
    type IntoIter = std::slice::Iter<'a, SwapPair>;

    fn into_iter(self) -> Self::IntoIter {
        self.pairs.iter()
    }
}

/// Sequence plus velocity. The result may violate precedence; repair it
/// before use.
pub fn apply_swaps(seq: &[TaskId], velocity: &SwapPairList) -> Result<Vec<TaskId>, SwapError> {
    let mut out = seq.to_vec();
    for &SwapPair(i, j) in velocity {
        if i >= out.len() || j >= out.len() {
            return Err(SwapError::OutOfRange { i, j, len: out.len() });
        }
        out.swap(i, j);
    }
    Ok(out)
}

/// `target - current`: scanning positions in ascending order, whenever the
/// working copy of `current` disagrees with `target` at `i`, swap in the task
/// `target` wants there. Applying the result to `current` yields `target`.
pub fn sequence_difference(target: &[TaskId], current: &[TaskId]) -> Result<SwapPairList, SwapError> {
    if target.len() != current.len() {
        return Err(SwapError::Mismatch);
    }
    let mut work = current.to_vec();
    let mut where_is: std::collections::HashMap<TaskId, usize> =
        work.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    if where_is.len() != work.len() {
        return Err(SwapError::Mismatch);
    }
    let mut out = SwapPairList::new();
    for i in 0..target.len() {
        if work[i] == target[i] {
            continue;
        }
        let j = *where_is.get(&target[i]).ok_or(SwapError::Mismatch)?;
        if j < i {
            // target repeats a task
            return Err(SwapError::Mismatch);
        }
        let displaced = work[i];
        work.swap(i, j);
        where_is.insert(displaced, j);
        where_is.insert(target[i], i);
        out.push(SwapPair(i, j));
    }
    Ok(out)
}
