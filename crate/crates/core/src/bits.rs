//! Fixed-length bit strings.
//!
//! Bit `i` of a [`BitString`] is the `i`-th character of its textual form,
//! so `"0110"` has bit 0 clear and bits 1, 2 set. The hex form packs four
//! bits per digit, first bit in the digit's most significant position, and
//! carries the bit length separately so lengths not divisible by four
//! survive a round trip.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitsError {
    #[error("invalid bit character {0:?} (expected '0' or '1')")]
    InvalidBit(char),
    #[error("invalid hex digit {0:?}")]
    InvalidHex(char),
    #[error("hex string holds {have} digits but {bits} bits need {need}")]
    HexLength {
        bits: usize,
        have: usize,
        need: usize,
    },
    #[error("padding bits beyond bit length {0} must be zero")]
    NonZeroPadding(usize),
    #[error("length mismatch: {left} bits vs {right} bits")]
    LengthMismatch { left: usize, right: usize },
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut out = Self::default();
        for b in bits {
            out.push(b);
        }
        out
    }

    /// Builds from packed words, bit `i` at `words[i / 64] >> (i % 64)`.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(len.div_ceil(64), 0);
        let mut out = Self { words, len };
        out.clear_tail();
        out
    }

    /// Uniformly random bit string of the given length.
    pub fn random<R: rand::Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut out = Self::zeros(len);
        for w in out.words.iter_mut() {
            *w = rng.gen();
        }
        out.clear_tail();
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Bitwise exclusive-or of two equal-length strings.
    pub fn xor(&self, other: &BitString) -> Result<BitString, BitsError> {
        if self.len != other.len {
            return Err(BitsError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(BitString {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
            len: self.len,
        })
    }

    pub fn slice(&self, start: usize, end: usize) -> BitString {
        assert!(start <= end && end <= self.len);
        BitString::from_bits((start..end).map(|i| self.get(i)))
    }

    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.len.div_ceil(4));
        for chunk in 0..self.len.div_ceil(4) {
            let mut digit = 0u32;
            for k in 0..4 {
                let i = chunk * 4 + k;
                digit <<= 1;
                if i < self.len && self.get(i) {
                    digit |= 1;
                }
            }
            out.push(char::from_digit(digit, 16).unwrap());
        }
        out
    }

    pub fn from_hex(hex: &str, bits: usize) -> Result<BitString, BitsError> {
        let digits: Vec<char> = hex.chars().collect();
        let need = bits.div_ceil(4);
        if digits.len() != need {
            return Err(BitsError::HexLength {
                bits,
                have: digits.len(),
                need,
            });
        }
        let mut out = BitString::zeros(bits);
        for (chunk, c) in digits.into_iter().enumerate() {
            let digit = c.to_digit(16).ok_or(BitsError::InvalidHex(c))?;
            for k in 0..4 {
                let bit = (digit >> (3 - k)) & 1 == 1;
                let i = chunk * 4 + k;
                if i < bits {
                    out.set(i, bit);
                } else if bit {
                    return Err(BitsError::NonZeroPadding(bits));
                }
            }
        }
        Ok(out)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "BitString({self})")
        } else {
            write!(f, "BitString({} bits, 0x{})", self.len, self.to_hex())
        }
    }
}

impl FromStr for BitString {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = BitString::default();
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                '_' | ' ' => {}
                other => return Err(BitsError::InvalidBit(other)),
            }
        }
        Ok(out)
    }
}

/// Wire form: `{"bits": L, "hex": "..."}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HexBits {
    pub bits: usize,
    pub hex: String,
}

impl From<&BitString> for HexBits {
    fn from(b: &BitString) -> Self {
        HexBits {
            bits: b.len(),
            hex: b.to_hex(),
        }
    }
}

impl TryFrom<HexBits> for BitString {
    type Error = BitsError;

    fn try_from(h: HexBits) -> Result<Self, Self::Error> {
        BitString::from_hex(&h.hex, h.bits)
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        HexBits::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let h = HexBits::deserialize(d)?;
        BitString::try_from(h).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn text_order_is_index_order() {
        let x = b("0110");
        assert!(!x.get(0));
        assert!(x.get(1) && x.get(2));
        assert!(!x.get(3));
        assert_eq!(x.to_string(), "0110");
    }

    #[test]
    fn xor_truth_table() {
        assert_eq!(b("1010").xor(&b("0110")).unwrap(), b("1100"));
        assert!(b("1010").xor(&b("1010")).unwrap().is_zero());
    }

    #[test]
    fn xor_rejects_mismatched_lengths() {
        assert_eq!(
            b("101").xor(&b("1010")),
            Err(BitsError::LengthMismatch { left: 3, right: 4 })
        );
    }

    #[test]
    fn hex_handles_partial_digits() {
        let x = b("10100");
        assert_eq!(x.to_hex(), "a0");
        assert_eq!(BitString::from_hex("a0", 5).unwrap(), x);
        assert_eq!(
            BitString::from_hex("a4", 5),
            Err(BitsError::NonZeroPadding(5))
        );
        assert!(matches!(
            BitString::from_hex("a", 5),
            Err(BitsError::HexLength { .. })
        ));
    }

    #[test]
    fn json_form_carries_length() {
        let x = b("101100111");
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, r#"{"bits":9,"hex":"b38"}"#);
        let back: BitString = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn random_keeps_tail_clear() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = BitString::random(70, &mut rng);
        assert_eq!(x.len(), 70);
        assert_eq!(x.words[1] >> 6, 0);
    }
}
