//! Fixed-length bitstrings over an edge indexing.
//!
//! Bit `j` is the variable (qubit) of edge `j`. The textual form lists bit 0
//! first, so `"0101"` selects edges 1 and 3.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bitstring {
    len: usize,
    words: Vec<u64>,
}

impl Bitstring {
    pub fn zeros(len: usize) -> Self {
        Bitstring {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Self::zeros(len);
        for j in 0..len {
            b.set(j, true);
        }
        b
    }

    /// Bitstring of a computational-basis index: bit `j` of `index` is bit `j`.
    pub fn from_index(index: u64, len: usize) -> Self {
        assert!(len <= 64, "basis index only covers 64 bits");
        let mut b = Self::zeros(len);
        if len > 0 {
            let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
            b.words[0] = index & mask;
        }
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (j, &bit) in bits.iter().enumerate() {
            b.set(j, bit);
        }
        b
    }

    /// Basis index of this bitstring; `None` when it is longer than 64 bits.
    pub fn to_index(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, value: bool) {
        assert!(j < self.len, "bit {j} out of range for length {}", self.len);
        let mask = 1u64 << (j % 64);
        if value {
            self.words[j / 64] |= mask;
        } else {
            self.words[j / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, j: usize) {
        assert!(j < self.len);
        self.words[j / 64] ^= 1u64 << (j % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let t = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len {
            f.write_str(if self.get(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitstring({self})")
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut b = Bitstring::zeros(s.len());
        for (j, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => b.set(j, true),
                other => {
                    return Err(Error::InvalidMatching(format!(
                        "bitstring contains {other:?} at position {j}"
                    )))
                }
            }
        }
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_form_lists_bit_zero_first() {
        let b: Bitstring = "0101".parse().unwrap();
        assert_eq!(b.iter_ones().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(b.to_string(), "0101");
        assert_eq!(b.to_index(), Some(0b1010));
        assert_eq!(Bitstring::from_index(0b1010, 4), b);
    }

    #[test]
    fn long_bitstrings_span_words() {
        let mut b = Bitstring::zeros(130);
        b.set(0, true);
        b.set(64, true);
        b.set(129, true);
        assert_eq!(b.count_ones(), 3);
        assert_eq!(b.iter_ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(b.to_index(), None);
        b.flip(64);
        assert_eq!(b.count_ones(), 2);
    }

    #[test]
    fn rejects_non_binary_text() {
        assert!("01x".parse::<Bitstring>().is_err());
    }
}
