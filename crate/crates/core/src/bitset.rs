use alloc::vec;
use alloc::vec::Vec;

const WORD_BITS: usize = 64;

/// Fixed-length bit-vector backed by `u64` words.
///
/// Bits at positions `>= len` in the last word are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD_BITS)],
            len,
        }
    }

    /// Builds a bit-vector of length `len` whose low bits are taken from `mask`.
    ///
    /// Bits of `mask` at or above `len` are ignored.
    pub fn from_low_bits(len: usize, mask: u64) -> Self {
        let mut set = Self::new(len);
        if let Some(w) = set.words.first_mut() {
            *w = mask;
        }
        set.clear_tail();
        set
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Mutable access to the backing words. Callers must leave tail bits
    /// clear; [`BitSet::clear_tail`] restores the invariant.
    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        i < self.len && (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    /// Sets bit `i`.
    ///
    /// # Panics
    ///
    /// Panics if `i >= len`.
    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of set bits in the half-open range `lo..hi` (clipped to `len`).
    pub fn count_ones_in(&self, lo: usize, hi: usize) -> usize {
        let hi = hi.min(self.len);
        if lo >= hi {
            return 0;
        }
        let (first, last) = (lo / WORD_BITS, (hi - 1) / WORD_BITS);
        let low_mask = !0u64 << (lo % WORD_BITS);
        let high_mask = !0u64 >> (WORD_BITS - 1 - (hi - 1) % WORD_BITS);
        if first == last {
            return (self.words[first] & low_mask & high_mask).count_ones() as usize;
        }
        let mut total = (self.words[first] & low_mask).count_ones() as usize;
        total += self.words[first + 1..last]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum::<usize>();
        total + (self.words[last] & high_mask).count_ones() as usize
    }

    /// Number of clear bits in the half-open range `lo..hi` (clipped to `len`).
    pub fn count_zeros_in(&self, lo: usize, hi: usize) -> usize {
        let hi = hi.min(self.len);
        hi.saturating_sub(lo) - self.count_ones_in(lo, hi)
    }

    pub fn iter_ones(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    /// `self |= src << shift`, discarding bits that land at or beyond `len`.
    pub fn or_shifted(&mut self, src: &BitSet, shift: usize) {
        let word_shift = shift / WORD_BITS;
        let bit_shift = shift % WORD_BITS;
        let dst = &mut self.words;
        if word_shift >= dst.len() {
            return;
        }
        let n = src.words.len().min(dst.len() - word_shift);
        if bit_shift == 0 {
            for (d, s) in dst[word_shift..word_shift + n].iter_mut().zip(&src.words) {
                *d |= *s;
            }
        } else {
            for i in 0..n {
                let s = src.words[i];
                dst[i + word_shift] |= s << bit_shift;
                if let Some(next) = dst.get_mut(i + word_shift + 1) {
                    *next |= s >> (WORD_BITS - bit_shift);
                }
            }
        }
        self.clear_tail();
    }
}

/// Iterator over the indices of set bits, in increasing order.
pub struct Ones<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD_BITS + bit);
            }
            self.index += 1;
            self.current = *self.words.get(self.index)?;
        }
    }
}
