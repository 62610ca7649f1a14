use std::cmp::Ordering;
use std::fmt;

use smallvec::{smallvec, SmallVec};

/// Occupation bitset over spatial orbitals of one spin channel.
///
/// Word 0 holds orbitals 0..63. Orbital counts up to 128 stay inline; larger
/// active spaces spill to the heap. Two masks are only comparable when they
/// were built for the same orbital count (same word length).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMask {
    words: SmallVec<[u64; 2]>,
}

impl BitMask {
    /// Number of 64-bit words needed for `n_orb` orbitals (at least one).
    pub fn words_for(n_orb: usize) -> usize {
        n_orb.div_ceil(64).max(1)
    }

    pub fn zeros(n_orb: usize) -> Self {
        BitMask {
            words: smallvec![0; Self::words_for(n_orb)],
        }
    }

    pub fn from_words(words: &[u64]) -> Self {
        BitMask {
            words: SmallVec::from_slice(words),
        }
    }

    pub fn from_orbitals<I: IntoIterator<Item = usize>>(n_orb: usize, orbitals: I) -> Self {
        let mut m = Self::zeros(n_orb);
        for p in orbitals {
            m.set(p);
        }
        m
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Highest orbital index this mask can address plus one.
    pub fn capacity(&self) -> usize {
        self.words.len() * 64
    }

    #[inline]
    pub fn get(&self, p: usize) -> bool {
        self.words[p >> 6] >> (p & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, p: usize) {
        self.words[p >> 6] |= 1 << (p & 63);
    }

    #[inline]
    pub fn clear(&mut self, p: usize) {
        self.words[p >> 6] &= !(1 << (p & 63));
    }

    #[inline]
    pub fn flip(&mut self, p: usize) {
        self.words[p >> 6] ^= 1 << (p & 63);
    }

    #[inline]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of set bits strictly below orbital `p`.
    #[inline]
    pub fn count_below(&self, p: usize) -> usize {
        let (w, b) = (p >> 6, p & 63);
        let mut n: usize = self.words[..w].iter().map(|x| x.count_ones() as usize).sum();
        if b > 0 {
            n += (self.words[w] & ((1u64 << b) - 1)).count_ones() as usize;
        }
        n
    }

    /// Number of set bits strictly between orbitals `p` and `q` (exclusive).
    #[inline]
    pub fn count_between(&self, p: usize, q: usize) -> usize {
        let (lo, hi) = if p < q { (p, q) } else { (q, p) };
        self.count_below(hi) - self.count_below(lo + 1)
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Number of differing bits between two masks.
    pub fn hamming_distance(&self, other: &BitMask) -> usize {
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Orbitals set in `self` but not in `other`.
    pub fn difference(&self, other: &BitMask) -> BitMask {
        BitMask {
            words: self
                .words
                .iter()
                .zip(other.words.iter())
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    /// Iterates set orbital indices in increasing order.
    pub fn iter_ones(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            word: 0,
            current: self.words[0],
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    word: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let tz = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word * 64 + tz);
            }
            self.word += 1;
            if self.word >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word];
        }
    }
}

impl Ord for BitMask {
    /// Unsigned-integer comparison: most significant word first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.words
            .len()
            .cmp(&other.words.len())
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for BitMask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BitMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMask{:?}", self.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_below_spans_words() {
        let m = BitMask::from_orbitals(130, [0, 5, 63, 64, 100, 129]);
        assert_eq!(m.words().len(), 3);
        assert_eq!(m.count_below(0), 0);
        assert_eq!(m.count_below(6), 2);
        assert_eq!(m.count_below(64), 3);
        assert_eq!(m.count_below(65), 4);
        assert_eq!(m.count_below(129), 5);
        assert_eq!(m.count_between(5, 100), 2);
        assert_eq!(m.to_vec(), vec![0, 5, 63, 64, 100, 129]);
    }

    #[test]
    fn ordering_is_unsigned_integer_order() {
        let a = BitMask::from_orbitals(70, [0]);
        let b = BitMask::from_orbitals(70, [1]);
        let c = BitMask::from_orbitals(70, [65]);
        assert!(a < b);
        assert!(b < c);
        let d = BitMask::from_orbitals(70, [0, 1, 2, 3]);
        assert!(d < c);
    }
}
