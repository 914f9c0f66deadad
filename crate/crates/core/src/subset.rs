//! Subsets of a ground set `{0, .., n-1}` stored as 64-bit masks.

use std::fmt;

use crate::error::{Error, Result};

/// Largest ground set representable by an [`IndexSet`].
pub const MAX_GROUND_SET: usize = 63;

/// A subset of `{0, .., 62}`; iteration is always in ascending index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct IndexSet(u64);

/// A point configuration of a finite process.
pub type Configuration = IndexSet;

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_mask(mask: u64) -> Self {
        IndexSet(mask)
    }

    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_GROUND_SET);
        IndexSet((1u64 << n) - 1)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, indices: I) -> Result<Self> {
        let mut mask = 0u64;
        for i in indices {
            if i >= n || i >= MAX_GROUND_SET {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            mask |= 1 << i;
        }
        Ok(IndexSet(mask))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn is_subset_of(self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// True when every member is below `n`.
    pub fn fits(self, n: usize) -> bool {
        n >= 64 || self.0 >> n == 0
    }

    pub fn union(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 | other.0)
    }

    pub fn indices(self) -> Indices {
        Indices(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.indices().collect()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.indices().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

pub struct Indices(u64);

impl Iterator for Indices {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

/// All subsets of `{0, .., n-1}` in mask order.
pub fn all_subsets(n: usize) -> impl Iterator<Item = IndexSet> {
    assert!(n <= MAX_GROUND_SET);
    (0..1u64 << n).map(IndexSet)
}

/// All `m`-element subsets of `{0, .., n-1}` in increasing mask order
/// (Gosper's hack).
pub fn combinations(n: usize, m: usize) -> Vec<IndexSet> {
    assert!(n <= MAX_GROUND_SET);
    if m > n {
        return Vec::new();
    }
    if m == 0 {
        return vec![IndexSet::EMPTY];
    }
    let limit = 1u64 << n;
    let mut out = Vec::new();
    let mut x: u64 = (1 << m) - 1;
    while x < limit {
        out.push(IndexSet(x));
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// All supersets of `base` inside `{0, .., n-1}`.
pub fn supersets(base: IndexSet, n: usize) -> impl Iterator<Item = IndexSet> {
    let free = IndexSet::full(n).0 & !base.0;
    // enumerate submasks of `free`, including 0 and `free` itself
    let mut sub = Some(free);
    std::iter::from_fn(move || {
        let s = sub?;
        sub = if s == 0 { None } else { Some((s - 1) & free) };
        Some(IndexSet(base.0 | s))
    })
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_count_and_order() {
        for n in 0..10 {
            for m in 0..=n {
                let c = combinations(n, m);
                assert_eq!(c.len(), binomial(n, m));
                assert!(c.iter().all(|s| s.len() == m && s.fits(n)));
                assert!(c.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn superset_enumeration() {
        let base = IndexSet::from_indices(5, [1, 3]).unwrap();
        let sups: Vec<_> = supersets(base, 5).collect();
        assert_eq!(sups.len(), 8);
        assert!(sups.iter().all(|s| base.is_subset_of(*s) && s.fits(5)));
    }

    #[test]
    fn indices_ascending() {
        let s = IndexSet::from_indices(10, [7, 2, 9]).unwrap();
        assert_eq!(s.to_vec(), vec![2, 7, 9]);
        assert_eq!(s.to_string(), "{2,7,9}");
        assert!(IndexSet::from_indices(3, [3]).is_err());
    }
}
