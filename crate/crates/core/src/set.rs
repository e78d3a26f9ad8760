use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// A set of vertices stored as a bitset over `0..capacity`.
///
/// Serializes as a sorted list of members.
#[derive(Clone)]
pub struct VertexSet {
    words: Vec<u64>,
}

impl VertexSet {
    fn trimmed(&self) -> &[u64] {
        let end = self.words.iter().rposition(|&w| w != 0).map_or(0, |i| i + 1);
        &self.words[..end]
    }
}

impl PartialEq for VertexSet {
    fn eq(&self, other: &Self) -> bool {
        self.trimmed() == other.trimmed()
    }
}

impl Eq for VertexSet {}

impl core::hash::Hash for VertexSet {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.trimmed().hash(state);
    }
}

/// Orders sets by their sorted member lists.
impl Ord for VertexSet {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for VertexSet {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl VertexSet {
    pub fn new(capacity: usize) -> Self {
        VertexSet { words: vec![0; capacity.div_ceil(64)] }
    }

    pub fn from_members(capacity: usize, members: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new(capacity);
        for v in members {
            s.insert(v);
        }
        s
    }

    /// Set whose members are the one-bits of `mask`.
    pub fn from_mask(capacity: usize, mask: u64) -> Self {
        let mut s = Self::new(capacity.max(1));
        s.words[0] = mask;
        s
    }

    pub fn insert(&mut self, v: usize) {
        let w = v / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        if let Some(word) = self.words.get_mut(v / 64) {
            *word &= !(1 << (v % 64));
        }
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.words.get(v / 64).is_some_and(|w| w >> (v % 64) & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut bits = w;
            core::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i * 64 + tz)
            })
        })
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.words.iter().enumerate().all(|(i, &w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// Removes every member of `other` from `self`.
    pub fn subtract(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for VertexSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let members = Vec::<usize>::deserialize(deserializer)?;
        let cap = members.iter().max().map_or(1, |m| m + 1);
        Ok(VertexSet::from_members(cap, members))
    }
}
