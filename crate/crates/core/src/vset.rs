//! Small vertex sets over configuration indices, stored as a 128-bit mask.

use std::cmp::Ordering;
use std::fmt;

/// Largest number of points a configuration may hold.
pub const MAX_POINTS: usize = 128;

/// A set of vertex indices `< 128`.
///
/// Ordering is lexicographic on the ascending index sequence, so sorting a
/// list of simplices gives the same order as sorting their sorted id tuples.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VertexSet(u128);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub fn from_bits(bits: u128) -> Self {
        VertexSet(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_POINTS);
        VertexSet(1u128 << i)
    }

    /// Builds a set from ids. Panics on ids `>= 128`.
    pub fn from_ids<I: IntoIterator<Item = usize>>(ids: I) -> Self {
        let mut bits = 0u128;
        for i in ids {
            assert!(i < MAX_POINTS, "vertex id {i} exceeds {MAX_POINTS}");
            bits |= 1u128 << i;
        }
        VertexSet(bits)
    }

    /// Mask with ids `0..n` set.
    pub fn full(n: usize) -> Self {
        if n >= MAX_POINTS {
            VertexSet(u128::MAX)
        } else {
            VertexSet((1u128 << n) - 1)
        }
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_POINTS && self.0 >> i & 1 == 1
    }

    pub fn is_subset(self, other: VertexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: VertexSet) -> Self {
        VertexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VertexSet) -> Self {
        VertexSet(self.0 & other.0)
    }

    pub fn minus(self, other: VertexSet) -> Self {
        VertexSet(self.0 & !other.0)
    }

    pub fn with(self, i: usize) -> Self {
        VertexSet(self.0 | 1u128 << i)
    }

    pub fn without(self, i: usize) -> Self {
        VertexSet(self.0 & !(1u128 << i))
    }

    pub fn is_disjoint(self, other: VertexSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Smallest id, if any.
    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 127 - self.0.leading_zeros() as usize)
    }

    /// Ids in ascending order.
    pub fn iter(self) -> Ids {
        Ids(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Position of `i` within the ascending id sequence.
    pub fn rank_of(self, i: usize) -> Option<usize> {
        if !self.contains(i) {
            return None;
        }
        let below = if i == 0 { 0 } else { self.0 & ((1u128 << i) - 1) };
        Some(below.count_ones() as usize)
    }
}

/// All `k`-element subsets of `pool`, in lexicographic order.
pub fn subsets(pool: VertexSet, k: usize) -> Subsets {
    let ids = pool.to_vec();
    let done = k > ids.len();
    Subsets { ids, idx: (0..k).collect(), done }
}

pub struct Subsets {
    ids: Vec<usize>,
    idx: Vec<usize>,
    done: bool,
}

impl Iterator for Subsets {
    type Item = VertexSet;

    fn next(&mut self) -> Option<VertexSet> {
        if self.done {
            return None;
        }
        let out = VertexSet::from_ids(self.idx.iter().map(|&i| self.ids[i]));
        let n = self.ids.len();
        let k = self.idx.len();
        match (0..k).rev().find(|&i| self.idx[i] < n - k + i) {
            Some(i) => {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
            }
            None => self.done = true,
        }
        Some(out)
    }
}

pub struct Ids(u128);

impl Iterator for Ids {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Ids {}

impl IntoIterator for VertexSet {
    type Item = usize;
    type IntoIter = Ids;

    fn into_iter(self) -> Ids {
        self.iter()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::from_ids(iter)
    }
}

impl Ord for VertexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        // Both sequences agree below the lowest differing id `b`. The set that
        // holds `b` is smaller unless the other one has run out of elements,
        // in which case the other one is a proper prefix.
        let b = diff.trailing_zeros();
        let above = if b == 127 { 0 } else { u128::MAX << (b + 1) };
        let self_has = self.0 >> b & 1 == 1;
        let lacks = if self_has { other.0 } else { self.0 };
        let holder_is_smaller = lacks & above != 0;
        if self_has == holder_is_smaller {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for VertexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in self.iter() {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        Ok(())
    }
}
