//! Bitsets over element indices and multisets of elements.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A subset of a group of order `n`, stored as a length-`n` bitset over
/// mixed-radix element indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElementSet {
    words: Vec<u64>,
    len: usize,
}

impl ElementSet {
    pub fn empty(n: usize) -> Self {
        ElementSet {
            words: vec![0; n.div_ceil(WORD)],
            len: n,
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = ElementSet {
            words: vec![!0; n.div_ceil(WORD)],
            len: n,
        };
        s.trim();
        s
    }

    pub fn singleton(n: usize, x: usize) -> Self {
        let mut s = Self::empty(n);
        s.insert(x);
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, items: I) -> Result<Self> {
        let mut s = Self::empty(n);
        for x in items {
            if x >= n {
                return Err(Error::IndexOutOfRange { index: x, order: n });
            }
            s.insert(x);
        }
        Ok(s)
    }

    /// Group order this set lives in.
    #[inline]
    pub fn group_order(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn insert(&mut self, x: usize) {
        debug_assert!(x < self.len);
        self.words[x / WORD] |= 1u64 << (x % WORD);
    }

    #[inline]
    pub fn remove(&mut self, x: usize) {
        debug_assert!(x < self.len);
        self.words[x / WORD] &= !(1u64 << (x % WORD));
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        x < self.len && self.words[x / WORD] >> (x % WORD) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn copy_from(&mut self, other: &ElementSet) {
        debug_assert_eq!(self.len, other.len);
        self.words.copy_from_slice(&other.words);
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            word_idx: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn union_with(&mut self, other: &ElementSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn intersect_with(&mut self, other: &ElementSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &ElementSet) -> ElementSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &ElementSet) -> ElementSet {
        let mut s = self.clone();
        for (a, b) in s.words.iter_mut().zip(&other.words) {
            *a &= !*b;
        }
        s
    }

    pub fn complement(&self) -> ElementSet {
        let mut s = self.clone();
        s.words.iter_mut().for_each(|w| *w = !*w);
        s.trim();
        s
    }

    pub fn is_subset_of(&self, other: &ElementSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersection_count(&self, other: &ElementSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `self |= src << shift`, dropping bits that land at or beyond `n`.
    pub(crate) fn or_shifted_up(&mut self, src: &ElementSet, shift: usize) {
        let (ws, bs) = (shift / WORD, shift % WORD);
        let nw = self.words.len();
        for i in (ws..nw).rev() {
            let mut w = src.words[i - ws] << bs;
            if bs != 0 && i > ws {
                w |= src.words[i - ws - 1] >> (WORD - bs);
            }
            self.words[i] |= w;
        }
        self.trim();
    }

    /// `self |= src >> shift`.
    pub(crate) fn or_shifted_down(&mut self, src: &ElementSet, shift: usize) {
        let (ws, bs) = (shift / WORD, shift % WORD);
        let nw = self.words.len();
        for i in 0..nw.saturating_sub(ws) {
            let mut w = src.words[i + ws] >> bs;
            if bs != 0 && i + ws + 1 < nw {
                w |= src.words[i + ws + 1] << (WORD - bs);
            }
            self.words[i] |= w;
        }
    }

    fn trim(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Order by the ascending member lists, compared lexicographically.
    pub fn lex_cmp(&self, other: &ElementSet) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let tz = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word_idx * WORD + tz);
            }
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
    }
}

/// A sequence of (not necessarily distinct) elements, kept as sorted
/// `(index, multiplicity)` entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultisetSequence {
    entries: Vec<(usize, u32)>,
    group_order: usize,
}

impl MultisetSequence {
    pub fn empty(n: usize) -> Self {
        MultisetSequence {
            entries: Vec::new(),
            group_order: n,
        }
    }

    pub fn from_items(n: usize, items: &[usize]) -> Result<Self> {
        let mut sorted = items.to_vec();
        sorted.sort_unstable();
        let mut entries: Vec<(usize, u32)> = Vec::new();
        for x in sorted {
            if x >= n {
                return Err(Error::IndexOutOfRange { index: x, order: n });
            }
            match entries.last_mut() {
                Some((y, m)) if *y == x => *m += 1,
                _ => entries.push((x, 1)),
            }
        }
        Ok(MultisetSequence {
            entries,
            group_order: n,
        })
    }

    pub fn from_set(set: &ElementSet) -> Self {
        MultisetSequence {
            entries: set.iter().map(|x| (x, 1)).collect(),
            group_order: set.group_order(),
        }
    }

    pub fn group_order(&self) -> usize {
        self.group_order
    }

    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    /// Total length, counting multiplicity.
    pub fn len(&self) -> usize {
        self.entries.iter().map(|&(_, m)| m as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every copy in index order, e.g. `[1, 1, 3]`.
    pub fn items(&self) -> Vec<usize> {
        self.entries
            .iter()
            .flat_map(|&(x, m)| std::iter::repeat_n(x, m as usize))
            .collect()
    }

    pub fn support(&self) -> ElementSet {
        let mut s = ElementSet::empty(self.group_order);
        for &(x, _) in &self.entries {
            s.insert(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_set_algebra() {
        let a = ElementSet::from_indices(70, [0, 3, 64, 69]).unwrap();
        let b = ElementSet::from_indices(70, [3, 5]).unwrap();
        assert_eq!(a.count(), 4);
        assert_eq!(a.union(&b).to_vec(), vec![0, 3, 5, 64, 69]);
        assert_eq!(a.intersection(&b).to_vec(), vec![3]);
        assert_eq!(a.difference(&b).to_vec(), vec![0, 64, 69]);
        assert_eq!(a.complement().count(), 66);
        assert!(!a.complement().contains(69));
        assert!(ElementSet::full(70).is_full());
        assert!(ElementSet::from_indices(4, [4]).is_err());
    }

    #[test]
    fn shifts_drop_out_of_range_bits() {
        let src = ElementSet::from_indices(130, [0, 63, 64, 129]).unwrap();
        let mut up = ElementSet::empty(130);
        up.or_shifted_up(&src, 1);
        assert_eq!(up.to_vec(), vec![1, 64, 65]);
        let mut down = ElementSet::empty(130);
        down.or_shifted_down(&src, 64);
        assert_eq!(down.to_vec(), vec![0, 65]);
    }

    #[test]
    fn lex_order_compares_member_lists() {
        let a = ElementSet::from_indices(4, [1, 2]).unwrap();
        let b = ElementSet::from_indices(4, [1, 3]).unwrap();
        let c = ElementSet::from_indices(4, [1]).unwrap();
        assert_eq!(a.lex_cmp(&b), Ordering::Less);
        assert_eq!(c.lex_cmp(&a), Ordering::Less);
    }

    #[test]
    fn multiset_counts_copies() {
        let s = MultisetSequence::from_items(11, &[3, 1, 1]).unwrap();
        assert_eq!(s.entries(), &[(1, 2), (3, 1)]);
        assert_eq!(s.len(), 3);
        assert_eq!(s.items(), vec![1, 1, 3]);
        assert_eq!(s.support().to_vec(), vec![1, 3]);
    }
}
