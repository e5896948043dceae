//! Multi-indices over the axes `1..=D` and their canonical ranking.
//!
//! A dense order-`l` tensor axis is addressed by words `(i_1, ..., i_l)`
//! through the mixed-radix rank with the first entry most significant, so
//! row-major storage and index arithmetic agree everywhere in the crate.

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    dim: usize,
    entries: Vec<usize>,
}

impl MultiIndex {
    pub fn new(dim: usize, entries: Vec<usize>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        for &e in &entries {
            if e < 1 || e > dim {
                return Err(Error::InvalidIndexEntry { entry: e, dim });
            }
        }
        Ok(MultiIndex { dim, entries })
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[must_use]
    pub fn order(&self) -> usize {
        self.entries.len()
    }

    #[must_use]
    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// Mixed-radix rank, first entry most significant:
    /// `rank((e_1, ..., e_l)) = sum (e_i - 1) D^(l - i)`.
    #[must_use]
    pub fn rank(&self) -> usize {
        rank_of(self.dim, &self.entries)
    }

    #[must_use]
    pub fn from_rank(dim: usize, order: usize, rank: usize) -> Self {
        let mut entries = vec![1usize; order];
        entries_of_rank(dim, rank, &mut entries);
        MultiIndex { dim, entries }
    }

    /// Nondecreasing representative of the same multiset of axes.
    #[must_use]
    pub fn sorted(&self) -> Self {
        let mut entries = self.entries.clone();
        entries.sort_unstable();
        MultiIndex {
            dim: self.dim,
            entries,
        }
    }

    #[must_use]
    pub fn prepend(&self, axis: usize) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len() + 1);
        entries.push(axis);
        entries.extend_from_slice(&self.entries);
        MultiIndex {
            dim: self.dim,
            entries,
        }
    }
}

/// Rank of a word without constructing a [`MultiIndex`].
#[must_use]
pub fn rank_of(dim: usize, entries: &[usize]) -> usize {
    let mut r = 0usize;
    for &e in entries {
        r = r * dim + (e - 1);
    }
    r
}

/// Decodes `rank` into 1-based entries; `out.len()` fixes the order.
pub fn entries_of_rank(dim: usize, rank: usize, out: &mut [usize]) {
    let mut r = rank;
    for slot in out.iter_mut().rev() {
        *slot = r % dim + 1;
        r /= dim;
    }
}

/// `C(n, k)` without overflow for the sizes used here.
#[must_use]
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Number of multisets of size `order` over `dim` axes.
#[must_use]
pub fn multiset_count(dim: usize, order: usize) -> usize {
    binomial(dim + order - 1, order)
}

/// Exact `n!` for the word lengths in play.
#[must_use]
pub fn factorial_u128(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Lexicographically ordered nondecreasing words of a fixed order,
/// with a reverse lookup from any sorted word to its position.
#[derive(Debug, Clone)]
pub struct NondecreasingTable {
    dim: usize,
    order: usize,
    list: Vec<Vec<usize>>,
    position: HashMap<Vec<usize>, usize>,
}

impl NondecreasingTable {
    #[must_use]
    pub fn new(dim: usize, order: usize) -> Self {
        let mut list = Vec::with_capacity(multiset_count(dim, order));
        let mut current = vec![1usize; order];
        loop {
            list.push(current.clone());
            // Advance to the next nondecreasing word.
            let mut pos = order;
            while pos > 0 {
                if current[pos - 1] < dim {
                    current[pos - 1] += 1;
                    for p in pos..order {
                        current[p] = current[pos - 1];
                    }
                    break;
                }
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
        }
        let position = list
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        NondecreasingTable {
            dim,
            order,
            list,
            position,
        }
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.list.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[must_use]
    pub fn order(&self) -> usize {
        self.order
    }

    #[must_use]
    pub fn word(&self, i: usize) -> &[usize] {
        &self.list[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.list.iter().map(|w| w.as_slice())
    }

    /// Position of a sorted word; the word must be nondecreasing.
    #[must_use]
    pub fn position_of(&self, sorted: &[usize]) -> usize {
        self.position[sorted]
    }

    /// Position of an arbitrary word after sorting it.
    #[must_use]
    pub fn position_of_word(&self, word: &[usize]) -> usize {
        let mut sorted = word.to_vec();
        sorted.sort_unstable();
        self.position[&sorted]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_examples_dim3() {
        let d = 3;
        assert_eq!(rank_of(d, &[1, 1]), 0);
        assert_eq!(rank_of(d, &[1, 2]), 1);
        assert_eq!(rank_of(d, &[3, 3]), 8);
        assert_eq!(rank_of(d, &[2, 1]), 3);
    }

    #[test]
    fn order_zero_has_single_rank() {
        let idx = MultiIndex::new(4, vec![]).unwrap();
        assert_eq!(idx.rank(), 0);
        assert_eq!(MultiIndex::from_rank(4, 0, 0), idx);
    }

    #[test]
    fn entries_validated() {
        assert!(MultiIndex::new(3, vec![1, 4]).is_err());
        assert!(MultiIndex::new(3, vec![0]).is_err());
        assert!(MultiIndex::new(1, vec![1]).is_err());
    }

    #[test]
    fn nondecreasing_table_dim3_order2() {
        let t = NondecreasingTable::new(3, 2);
        assert_eq!(t.len(), multiset_count(3, 2));
        assert_eq!(t.word(0), &[1, 1]);
        assert_eq!(t.word(1), &[1, 2]);
        assert_eq!(t.word(5), &[3, 3]);
        assert_eq!(t.position_of_word(&[2, 1]), 1);
    }

    #[test]
    fn nondecreasing_table_order_zero() {
        let t = NondecreasingTable::new(5, 0);
        assert_eq!(t.len(), 1);
        assert_eq!(t.word(0), &[] as &[usize]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn rank_roundtrip(dim in 2usize..6, order in 0usize..5, seed in any::<usize>()) {
            let side = dim.pow(order as u32);
            let rank = seed % side;
            let idx = MultiIndex::from_rank(dim, order, rank);
            prop_assert_eq!(idx.rank(), rank);
            prop_assert_eq!(idx.order(), order);
        }

        #[test]
        fn sorted_is_permutation(dim in 2usize..6, order in 1usize..5, seed in any::<usize>()) {
            let side = dim.pow(order as u32);
            let idx = MultiIndex::from_rank(dim, order, seed % side);
            let sorted = idx.sorted();
            let mut a = idx.entries().to_vec();
            a.sort_unstable();
            prop_assert_eq!(a.as_slice(), sorted.entries());
            let table = NondecreasingTable::new(dim, order);
            let pos = table.position_of_word(idx.entries());
            prop_assert_eq!(table.word(pos), sorted.entries());
        }
    }
}
