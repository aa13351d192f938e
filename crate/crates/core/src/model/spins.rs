use rand::Rng;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// An assignment of ±1 spins to `n` sites, bit-packed.
///
/// Site `i` lives in word `i / 64` at bit `i % 64` (little-endian within a
/// word); a set bit means spin +1. Bits above `n` in the last word are always
/// clear, so two configurations are equal iff their words are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    n: usize,
    words: Vec<u64>,
}

impl SpinConfiguration {
    /// All spins −1.
    pub fn all_down(n: usize) -> Self {
        Self {
            n,
            words: vec![0; n.div_ceil(WORD_BITS)],
        }
    }

    /// All spins +1.
    pub fn all_up(n: usize) -> Self {
        let mut c = Self::all_down(n);
        for w in &mut c.words {
            *w = u64::MAX;
        }
        c.clear_padding();
        c
    }

    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut c = Self::all_down(spins.len());
        for (i, &s) in spins.iter().enumerate() {
            match s {
                1 => c.words[i / WORD_BITS] |= 1 << (i % WORD_BITS),
                -1 => {}
                other => {
                    return Err(Error::Config(format!("spin {i} is {other}, expected ±1")));
                }
            }
        }
        Ok(c)
    }

    /// Configuration whose first `n <= 64` sites are given by the bits of `bits`.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        assert!(n <= WORD_BITS, "from_bits supports at most 64 sites");
        let mut c = Self::all_down(n);
        if n > 0 {
            c.words[0] = bits;
            c.clear_padding();
        }
        c
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut c = Self::all_down(n);
        for w in &mut c.words {
            *w = rng.random();
        }
        c.clear_padding();
        c
    }

    fn clear_padding(&mut self) {
        let rem = self.n % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn is_up(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn get(&self, i: usize) -> i8 {
        if self.is_up(i) {
            1
        } else {
            -1
        }
    }

    /// Spin `i` as a float, ±1.0.
    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        if self.is_up(i) {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    pub fn spins(&self) -> Vec<i8> {
        (0..self.n).map(|i| self.get(i)).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }

    /// Bits of a configuration with at most 64 sites.
    pub fn as_bits(&self) -> Option<u64> {
        (self.n <= WORD_BITS).then(|| self.words.first().copied().unwrap_or(0))
    }

    /// Sum of spins.
    pub fn magnetization(&self) -> i64 {
        let up: u32 = self.words.iter().map(|w| w.count_ones()).sum();
        2 * up as i64 - self.n as i64
    }

    /// Global spin flip.
    pub fn negated(&self) -> Self {
        let mut c = self.clone();
        for w in &mut c.words {
            *w = !*w;
        }
        c.clear_padding();
        c
    }

    /// Dot product with a real vector of the same length.
    pub fn dot(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.n);
        let terms: Vec<f64> = v.iter().enumerate().map(|(i, &vi)| self.value(i) * vi).collect();
        crate::stats::pairwise_sum(&terms)
    }
}

/// Spin `i` of a packed word slice, ±1.0.
#[inline]
pub(crate) fn spin_at(words: &[u64], i: usize) -> f64 {
    if words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}
