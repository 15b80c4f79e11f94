//! Fibonacci LFSR keystreams.
//!
//! ```text
//!      stage g-1          stage 1   stage 0
//!     ┌───────┐         ┌───────┐ ┌───────┐
//! ┌──▶│ s_g-1 ├─▶ ... ─▶│  s_1  ├▶│  s_0  ├──▶ output
//! │   └───┬───┘         └───┬───┘ └───┬───┘
//! └───────⊕ ◀─── ... ◀──────⊕ ◀───────┘      taps: coefficients c_0..c_g-1
//! ```
//!
//! The register satisfies `s_{n+g} = Σ c_i s_{n+i}` where `c_i` are the
//! coefficients of the generator polynomial below `x^g`. Seed bit `i` loads
//! stage `i`; each step emits stage 0, shifts toward it, and feeds the
//! parity of the tapped stages into stage `g-1`. The first `g` output bits
//! are therefore the seed itself.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::poly::{GeneratorPolynomial, G_CAP};
use super::Gf2Error;
use crate::bits::BitString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LfsrSpec {
    polynomial: GeneratorPolynomial,
    seed: u64,
}

impl LfsrSpec {
    /// `seed` bit `i` initializes stage `i`; must be nonzero and below `2^g`.
    pub fn new(polynomial: GeneratorPolynomial, seed: u64) -> Result<Self, Gf2Error> {
        let g = polynomial.degree();
        if seed == 0 {
            return Err(Gf2Error::InvalidSeed("seed is all-zero".into()));
        }
        if seed >> g != 0 {
            return Err(Gf2Error::InvalidSeed(format!(
                "seed {seed:#x} wider than degree {g}"
            )));
        }
        Ok(Self { polynomial, seed })
    }

    pub fn from_seed_bits(
        polynomial: GeneratorPolynomial,
        seed: &BitString,
    ) -> Result<Self, Gf2Error> {
        let g = polynomial.degree() as usize;
        if seed.len() != g {
            return Err(Gf2Error::InvalidSeed(format!(
                "seed has {} bits, degree is {g}",
                seed.len()
            )));
        }
        let mask = seed
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, b)| m | (u64::from(b) << i));
        Self::new(polynomial, mask)
    }

    /// Uniform nonzero seed for the given polynomial.
    pub fn random_seed<R: Rng + ?Sized>(polynomial: GeneratorPolynomial, rng: &mut R) -> Self {
        let g = polynomial.degree();
        let seed = rng.gen_range(1..=((1u64 << g) - 1));
        Self { polynomial, seed }
    }

    pub fn polynomial(&self) -> GeneratorPolynomial {
        self.polynomial
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn degree(&self) -> u32 {
        self.polynomial.degree()
    }

    pub fn register(&self) -> Lfsr {
        Lfsr {
            taps: self.polynomial.mask() & !(1u64 << self.degree()),
            state: self.seed,
            top: self.degree() - 1,
        }
    }

    /// First `length` output bits.
    pub fn keystream(&self, length: usize) -> BitString {
        let mut reg = self.register();
        let mut words = vec![0u64; length.div_ceil(64)];
        let mut left = length;
        for w in words.iter_mut() {
            for bit in 0..left.min(64) {
                *w |= u64::from(reg.step()) << bit;
            }
            left = left.saturating_sub(64);
        }
        BitString::from_words(words, length)
    }
}

/// Running register; an endless bit iterator.
#[derive(Debug, Clone)]
pub struct Lfsr {
    taps: u64,
    state: u64,
    top: u32,
}

impl Lfsr {
    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn step(&mut self) -> bool {
        let out = self.state & 1 == 1;
        let feedback = parity(self.state & self.taps);
        self.state = (self.state >> 1) | (feedback << self.top);
        out
    }
}

/// Parity without relying on a hardware popcount.
fn parity(mut x: u64) -> u64 {
    x ^= x >> 1;
    x ^= x >> 2;
    x = (x & 0x1111_1111_1111_1111).wrapping_mul(0x1111_1111_1111_1111);
    (x >> 60) & 1
}

impl Iterator for Lfsr {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        Some(self.step())
    }
}

/// Convenience wrapper that validates the seed bits before generating.
pub fn keystream(spec: &LfsrSpec, length: usize) -> Result<BitString, Gf2Error> {
    if spec.seed == 0 {
        return Err(Gf2Error::InvalidSeed("seed is all-zero".into()));
    }
    Ok(spec.keystream(length))
}

/// Smallest `g` with `2^g - 1 > message_length`.
pub fn min_degree(message_length: u64) -> u32 {
    let mut g = 1;
    while g < 64 && ((1u128 << g) - 1) <= message_length as u128 {
        g += 1;
    }
    g
}

/// Inclusive range of LFSR degrees a key may be drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeRange {
    g_min: u32,
    g_max: u32,
}

impl DegreeRange {
    pub fn new(g_min: u32, g_max: u32) -> Result<Self, Gf2Error> {
        if g_min == 0 {
            return Err(Gf2Error::InvalidDegree(0));
        }
        if g_min > g_max {
            return Err(Gf2Error::InvalidRange { g_min, g_max });
        }
        if g_max > G_CAP {
            return Err(Gf2Error::Capacity {
                g: g_max,
                cap: G_CAP,
            });
        }
        Ok(Self { g_min, g_max })
    }

    /// Range starting at the minimum degree that covers `message_length`.
    pub fn for_message(message_length: u64, span: u32) -> Result<Self, Gf2Error> {
        let g_min = min_degree(message_length);
        Self::new(g_min, g_min.saturating_add(span))
    }

    pub fn g_min(&self) -> u32 {
        self.g_min
    }

    pub fn g_max(&self) -> u32 {
        self.g_max
    }

    pub fn degrees(&self) -> impl Iterator<Item = u32> {
        self.g_min..=self.g_max
    }

    pub fn guards(&self, message_length: u64) -> bool {
        ((1u128 << self.g_min) - 1) > message_length as u128
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2_lfsr::poly::enumerate_primitive;

    fn x3x1() -> GeneratorPolynomial {
        GeneratorPolynomial::from_exponents(&[3, 1, 0]).unwrap()
    }

    /// Direct evaluation of the recurrence s_{n+3} = s_{n+1} + s_n.
    fn hand_stepped(seed: [u8; 3], n: usize) -> Vec<u8> {
        let mut s = seed.to_vec();
        while s.len() < n {
            let k = s.len();
            s.push(s[k - 2] ^ s[k - 3]);
        }
        s.truncate(n);
        s
    }

    #[test]
    fn parity_matches_popcount() {
        for x in [
            0u64,
            1,
            3,
            0x8000_0000_0000_0000,
            u64::MAX,
            0x1234_5678_9abc_def0,
        ] {
            assert_eq!(parity(x), u64::from(x.count_ones() & 1));
        }
    }

    #[test]
    fn empty_keystream() {
        let spec = LfsrSpec::new(x3x1(), 1).unwrap();
        assert!(spec.keystream(0).is_empty());
    }

    #[test]
    fn degree_three_sequence_matches_recurrence() {
        let seed: BitString = "001".parse().unwrap();
        let spec = LfsrSpec::from_seed_bits(x3x1(), &seed).unwrap();
        let ks = spec.keystream(14);
        let expect: Vec<bool> = hand_stepped([0, 0, 1], 14)
            .into_iter()
            .map(|b| b == 1)
            .collect();
        assert_eq!(ks.iter().collect::<Vec<_>>(), expect);
        assert_eq!(ks.to_string(), "00101110010111");
        assert_eq!(ks.slice(0, 7).count_ones(), 4);
        assert_eq!(ks.slice(0, 7), ks.slice(7, 14));
        assert_eq!(spec.keystream(7), ks.slice(0, 7));
    }

    #[test]
    fn zero_seed_rejected() {
        assert!(matches!(
            LfsrSpec::new(x3x1(), 0),
            Err(Gf2Error::InvalidSeed(_))
        ));
        assert!(LfsrSpec::new(x3x1(), 0b1000).is_err());
        let zero: BitString = "000".parse().unwrap();
        assert!(LfsrSpec::from_seed_bits(x3x1(), &zero).is_err());
    }

    #[test]
    fn full_period_visits_every_state() {
        for g in 2..=8 {
            for &p in enumerate_primitive(g).unwrap() {
                let spec = LfsrSpec::new(p, 1).unwrap();
                let mut reg = spec.register();
                let mut seen = vec![false; 1 << g];
                let period = (1usize << g) - 1;
                for _ in 0..period {
                    let s = reg.state() as usize;
                    assert!(!seen[s], "{p:?} revisits state {s:#x}");
                    seen[s] = true;
                    reg.step();
                }
                assert_eq!(reg.state(), 1);
                assert!(!seen[0]);
            }
        }
    }

    #[test]
    fn min_degree_examples() {
        assert_eq!(min_degree(0), 1);
        assert_eq!(min_degree(6), 3);
        assert_eq!(min_degree(7), 4);
        assert_eq!(min_degree(u64::MAX), 64);
    }

    #[test]
    fn min_degree_bounds_hold() {
        for l in 0..5000u64 {
            let g = min_degree(l);
            assert!((1u64 << g) - 1 > l);
            assert!((1u64 << (g - 1)) - 1 <= l);
        }
    }

    #[test]
    fn degree_range_validation() {
        assert!(DegreeRange::new(3, 2).is_err());
        assert!(DegreeRange::new(0, 2).is_err());
        assert!(DegreeRange::new(3, 63).is_err());
        let r = DegreeRange::for_message(64, 3).unwrap();
        assert_eq!((r.g_min(), r.g_max()), (7, 10));
        assert!(r.guards(64));
        assert!(!r.guards(127));
    }
}
