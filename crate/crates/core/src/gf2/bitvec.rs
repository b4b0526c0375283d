use std::fmt;
use std::ops::{BitAnd, BitXor, BitXorAssign};

use serde::{Serialize, Serializer};

use crate::{Error, Result};

const WORD_BITS: usize = 64;

/// A packed vector over F₂.
///
/// Coordinate `i` lives in bit `i % 64` of word `i / 64`. Bits above `len` in the
/// last word are always zero, so equality and hashing are bitwise.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            len,
            words: vec![!0; len.div_ceil(WORD_BITS)],
        };
        v.mask_tail();
        v
    }

    /// The standard basis vector `e_i`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a string of `0`/`1` characters, coordinate 0 first.
    pub fn from_binary_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid binary digit {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(&bits))
    }

    /// Builds a vector of length `len ≤ 64` from the low bits of `index`.
    pub fn from_index(len: usize, index: u64) -> Self {
        assert!(len <= WORD_BITS, "from_index needs len <= 64");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = index;
            v.mask_tail();
        }
        v
    }

    /// The coordinates packed into one word. Only defined for `len ≤ 64`.
    pub fn to_index(&self) -> u64 {
        assert!(self.len <= WORD_BITS, "to_index needs len <= 64");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn from_words(len: usize, words: Vec<u64>) -> Result<Self> {
        if words.len() != len.div_ceil(WORD_BITS) {
            return Err(Error::DimensionMismatch {
                expected: len.div_ceil(WORD_BITS),
                found: words.len(),
            });
        }
        let mut v = BitVector { len, words };
        v.mask_tail();
        Ok(v)
    }

    fn mask_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
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

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "coordinate {i} out of range {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "coordinate {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Hamming weight `|v|`.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// F₂ inner product: parity of the AND.
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    /// Integer inner product (number of shared ones).
    pub fn overlap(&self, other: &BitVector) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Index of the lowest set coordinate.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD_BITS + w.trailing_zeros() as usize)
    }

    /// Iterator over the indices of set coordinates, ascending.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let tz = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * WORD_BITS + tz)
                }
            })
        })
    }

    /// Concatenation `self ‖ other`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        for i in self.ones_iter() {
            out.set(i, true);
        }
        for i in other.ones_iter() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Lowercase hex, four coordinates per digit, coordinate `4j` in the low bit
    /// of digit `j`. The highest coordinates therefore come last.
    pub fn to_hex(&self) -> String {
        const DIGITS: &[u8; 16] = b"0123456789abcdef";
        (0..self.len.div_ceil(4))
            .map(|j| {
                let bit = 4 * j;
                let nibble = (self.words[bit / WORD_BITS] >> (bit % WORD_BITS)) & 0xf;
                DIGITS[nibble as usize] as char
            })
            .collect()
    }

    /// Inverse of [`BitVector::to_hex`] for a vector of the given length.
    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        if s.len() != len.div_ceil(4) {
            return Err(Error::Parse(format!(
                "hex string of {} digits cannot hold {len} coordinates",
                s.len()
            )));
        }
        let mut v = Self::zeros(len);
        for (j, c) in s.chars().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit {c:?}")))? as u64;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let i = 4 * j + b;
                    if i >= len {
                        return Err(Error::Parse("hex digit sets a coordinate beyond the length".into()));
                    }
                    v.set(i, true);
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl BitXorAssign<&BitVector> for BitVector {
    fn bitxor_assign(&mut self, rhs: &BitVector) {
        self.xor_assign(rhs);
    }
}

impl BitXor for &BitVector {
    type Output = BitVector;
    fn bitxor(self, rhs: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(rhs);
        out
    }
}

impl BitAnd for &BitVector {
    type Output = BitVector;
    fn bitand(self, rhs: &BitVector) -> BitVector {
        assert_eq!(self.len, rhs.len);
        BitVector {
            len: self.len,
            words: self.words.iter().zip(&rhs.words).map(|(a, b)| a & b).collect(),
        }
    }
}

impl Serialize for BitVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_bits_stay_clear() {
        let v = BitVector::ones(70);
        assert_eq!(v.weight(), 70);
        assert_eq!(v.words()[1], (1 << 6) - 1);
        let w = BitVector::from_index(3, 0xff);
        assert_eq!(w.to_index(), 0b111);
    }

    #[test]
    fn dot_is_parity_of_and() {
        let a = BitVector::from_binary_str("1101").unwrap();
        let b = BitVector::from_binary_str("1011").unwrap();
        assert_eq!(a.overlap(&b), 2);
        assert!(!a.dot(&b));
        let c = BitVector::from_binary_str("1000").unwrap();
        assert!(a.dot(&c));
    }

    #[test]
    fn hex_puts_high_coordinates_last() {
        let v = BitVector::from_binary_str("100000001").unwrap();
        assert_eq!(v.to_hex(), "101");
        assert_eq!(BitVector::from_hex("101", 9).unwrap(), v);
        assert!(BitVector::from_hex("102", 9).is_err());
        assert!(BitVector::from_hex("10", 9).is_err());
    }

    #[test]
    fn ones_iter_crosses_words() {
        let mut v = BitVector::zeros(130);
        for i in [0, 63, 64, 129] {
            v.set(i, true);
        }
        assert_eq!(v.ones_iter().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(v.first_one(), Some(0));
    }
}
