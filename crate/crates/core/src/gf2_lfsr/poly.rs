//! Polynomials over GF(2) packed into a machine word.
//!
//! Bit `i` of the mask is the coefficient of `x^i`, so `x^3 + x + 1` is
//! `0b1011 = 0xB`. Degrees up to [`G_CAP`] keep every intermediate of the
//! shift-and-add product inside a `u64`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::totient::{euler_totient, factorize};
use super::Gf2Error;

/// Largest supported degree; `2^g - 1` must fit a 64-bit word.
pub const G_CAP: u32 = 62;
/// Largest degree for exhaustive enumeration.
pub const G_ENUM_CAP: u32 = 20;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GeneratorPolynomial {
    mask: u64,
}

impl GeneratorPolynomial {
    pub fn from_mask(mask: u64) -> Result<Self, Gf2Error> {
        if mask < 2 {
            return Err(Gf2Error::InvalidPolynomial(format!(
                "mask {mask:#x} has degree < 1"
            )));
        }
        let g = 63 - mask.leading_zeros();
        if g > G_CAP {
            return Err(Gf2Error::Capacity { g, cap: G_CAP });
        }
        Ok(Self { mask })
    }

    /// Builds from exponents with nonzero coefficients, e.g. `[3, 1, 0]`.
    pub fn from_exponents(exps: &[u32]) -> Result<Self, Gf2Error> {
        let mut mask = 0u64;
        for &e in exps {
            if e > G_CAP {
                return Err(Gf2Error::Capacity { g: e, cap: G_CAP });
            }
            mask ^= 1 << e;
        }
        Self::from_mask(mask)
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn degree(&self) -> u32 {
        63 - self.mask.leading_zeros()
    }

    pub fn coefficient(&self, i: u32) -> bool {
        i < 64 && (self.mask >> i) & 1 == 1
    }

    pub fn to_hex(&self) -> String {
        format!("{:#X}", self.mask).replacen("0X", "0x", 1)
    }
}

impl fmt::Display for GeneratorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for e in (0..=self.degree()).rev().filter(|&e| self.coefficient(e)) {
            if !first {
                f.write_str("+")?;
            }
            first = false;
            match e {
                0 => f.write_str("1")?,
                1 => f.write_str("x")?,
                _ => write!(f, "x^{e}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for GeneratorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.to_hex(), self)
    }
}

impl FromStr for GeneratorPolynomial {
    type Err = Gf2Error;

    /// Parses the hex mask form (`0xB`, `b`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let digits = t
            .strip_prefix("0x")
            .or_else(|| t.strip_prefix("0X"))
            .unwrap_or(t);
        let mask = u64::from_str_radix(digits, 16)
            .map_err(|e| Gf2Error::InvalidPolynomial(format!("{s:?}: {e}")))?;
        Self::from_mask(mask)
    }
}

impl TryFrom<String> for GeneratorPolynomial {
    type Error = Gf2Error;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<GeneratorPolynomial> for String {
    fn from(p: GeneratorPolynomial) -> Self {
        p.to_hex()
    }
}

// Arithmetic modulo a polynomial of degree g; operands are reduced (< 2^g).

fn reduce(mut a: u128, modulus: u64) -> u64 {
    let g = 63 - modulus.leading_zeros();
    while a >> g != 0 {
        let shift = 127 - a.leading_zeros() - g;
        a ^= (modulus as u128) << shift;
    }
    a as u64
}

pub(crate) fn mul_mod(a: u64, mut b: u64, modulus: u64) -> u64 {
    let g = 63 - modulus.leading_zeros();
    let top = 1u64 << g;
    let mut a = a;
    let mut acc = 0u64;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= modulus;
        }
    }
    acc
}

pub(crate) fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut base = reduce(base as u128, modulus);
    let mut acc = reduce(1, modulus);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, modulus);
        }
        base = mul_mod(base, base, modulus);
        exp >>= 1;
    }
    acc
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = reduce(a as u128, b);
        a = b;
        b = r;
    }
    a
}

/// Carry-less product (test and oracle helper).
pub fn clmul(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    for i in 0..64 {
        if (b >> i) & 1 == 1 {
            acc ^= (a as u128) << i;
        }
    }
    acc
}

/// True iff `p` has no nontrivial factorization over GF(2).
///
/// Uses the distinct-degree criterion: `p` of degree `g` is irreducible iff
/// `gcd(x^(2^i) - x, p) = 1` for every `1 <= i <= g/2`.
pub fn is_irreducible(p: &GeneratorPolynomial) -> bool {
    let g = p.degree();
    if g == 1 {
        return true;
    }
    let m = p.mask();
    if m & 1 == 0 {
        return false;
    }
    let x = 0b10;
    let mut h = x;
    for _ in 1..=g / 2 {
        h = mul_mod(h, h, m);
        if gcd(m, h ^ x) != 1 {
            return false;
        }
    }
    true
}

/// True iff `p` is irreducible and `x` has multiplicative order `2^g - 1`
/// modulo `p`.
pub fn is_primitive(p: &GeneratorPolynomial) -> bool {
    if !is_irreducible(p) {
        return false;
    }
    let m = p.mask();
    if m & 1 == 0 {
        // p = x: x is not a unit.
        return false;
    }
    let g = p.degree();
    let order = (1u64 << g) - 1;
    let x = 0b10;
    if pow_mod(x, order, m) != 1 {
        return false;
    }
    factorize(order)
        .into_iter()
        .all(|(q, _)| pow_mod(x, order / q, m) != 1)
}

fn check_degree(g: u32, cap: u32) -> Result<(), Gf2Error> {
    if g == 0 {
        return Err(Gf2Error::InvalidDegree(g));
    }
    if g > cap {
        return Err(Gf2Error::Capacity { g, cap });
    }
    Ok(())
}

/// Number of primitive polynomials of degree `g`: φ(2^g − 1) / g.
pub fn count_primitive(g: u32) -> Result<u64, Gf2Error> {
    check_degree(g, G_CAP)?;
    Ok(euler_totient((1u64 << g) - 1)? / g as u64)
}

fn enumeration_cache() -> &'static [OnceLock<Vec<GeneratorPolynomial>>] {
    static CACHE: OnceLock<Vec<OnceLock<Vec<GeneratorPolynomial>>>> = OnceLock::new();
    CACHE.get_or_init(|| (0..=G_ENUM_CAP).map(|_| OnceLock::new()).collect())
}

fn scan_primitive(g: u32) -> Vec<GeneratorPolynomial> {
    let lo = 1u64 << g;
    (lo..lo << 1)
        .step_by(2)
        .map(|m| m | 1)
        .filter_map(|m| GeneratorPolynomial::from_mask(m).ok())
        .filter(is_primitive)
        .collect()
}

/// All primitive polynomials of degree `g` in ascending mask order.
pub fn enumerate_primitive(g: u32) -> Result<&'static [GeneratorPolynomial], Gf2Error> {
    check_degree(g, G_ENUM_CAP)?;
    Ok(enumeration_cache()[g as usize].get_or_init(|| scan_primitive(g)))
}

/// Uniformly chosen primitive polynomial of degree `g`.
pub fn random_primitive<R: Rng + ?Sized>(
    g: u32,
    rng: &mut R,
) -> Result<GeneratorPolynomial, Gf2Error> {
    check_degree(g, G_CAP)?;
    if g <= G_ENUM_CAP {
        let all = enumerate_primitive(g)?;
        return Ok(all[rng.gen_range(0..all.len())]);
    }
    let top = 1u64 << g;
    loop {
        let middle = rng.gen::<u64>() & (top - 1) & !1;
        let p = GeneratorPolynomial::from_mask(top | middle | 1)?;
        if is_primitive(&p) {
            return Ok(p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn poly(exps: &[u32]) -> GeneratorPolynomial {
        GeneratorPolynomial::from_exponents(exps).unwrap()
    }

    /// Trial division by every polynomial of degree 1..=g/2.
    fn irreducible_by_trial_division(m: u64) -> bool {
        let g = 63 - m.leading_zeros();
        for d in 1..=g / 2 {
            for divisor in (1u64 << d)..(1u64 << (d + 1)) {
                if reduce(m as u128, divisor) == 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Order of x found by stepping powers until they return to 1.
    fn order_of_x(m: u64) -> u64 {
        let mut h = reduce(0b10, m);
        let mut k = 1;
        while h != 1 {
            h = mul_mod(h, 0b10, m);
            k += 1;
            if k > 1 << 21 {
                return 0;
            }
        }
        k
    }

    #[test]
    fn irreducibility_examples() {
        assert!(is_irreducible(&poly(&[2, 1, 0])));
        assert!(!is_irreducible(&poly(&[2, 0])));
        assert_eq!(clmul(0b11, 0b11), 0b101);
        assert!(is_irreducible(&poly(&[3, 1, 0])));
    }

    #[test]
    fn primitivity_examples() {
        assert!(is_primitive(&poly(&[3, 1, 0])));
        let five_cycle = poly(&[4, 3, 2, 1, 0]);
        assert!(is_irreducible(&five_cycle));
        assert!(!is_primitive(&five_cycle));
        assert_eq!(order_of_x(five_cycle.mask()), 5);
        assert!(!is_primitive(&poly(&[2, 0])));
        assert!(is_primitive(&poly(&[1, 0])));
        assert!(!is_primitive(&poly(&[1])));
    }

    #[test]
    fn irreducibility_agrees_with_trial_division() {
        for m in 2u64..(1 << 13) {
            let p = GeneratorPolynomial::from_mask(m).unwrap();
            assert_eq!(
                is_irreducible(&p),
                irreducible_by_trial_division(m),
                "{p:?}"
            );
        }
    }

    #[test]
    fn primitivity_agrees_with_order_stepping() {
        for m in (1u64 << 2..1 << 12).filter(|m| m & 1 == 1) {
            let p = GeneratorPolynomial::from_mask(m).unwrap();
            let expect = irreducible_by_trial_division(m) && order_of_x(m) == (1 << p.degree()) - 1;
            assert_eq!(is_primitive(&p), expect, "{p:?}");
        }
    }

    #[test]
    fn counts_small_degrees() {
        assert_eq!(count_primitive(2).unwrap(), 1);
        assert_eq!(count_primitive(3).unwrap(), 2);
        assert_eq!(count_primitive(4).unwrap(), 2);
        assert!(matches!(
            count_primitive(63),
            Err(Gf2Error::Capacity { .. })
        ));
        assert!(matches!(
            count_primitive(0),
            Err(Gf2Error::InvalidDegree(0))
        ));
        // 2^62 - 1 at the cap still works.
        assert!(count_primitive(62).unwrap() > 0);
    }

    #[test]
    fn enumerates_small_degrees() {
        assert_eq!(enumerate_primitive(1).unwrap(), &[poly(&[1, 0])]);
        assert_eq!(enumerate_primitive(2).unwrap(), &[poly(&[2, 1, 0])]);
        assert_eq!(
            enumerate_primitive(3).unwrap(),
            &[poly(&[3, 1, 0]), poly(&[3, 2, 0])]
        );
        assert!(matches!(
            enumerate_primitive(21),
            Err(Gf2Error::Capacity { g: 21, cap: 20 })
        ));
    }

    #[test]
    fn random_primitive_is_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(random_primitive(2, &mut rng).unwrap(), poly(&[2, 1, 0]));
        let a = random_primitive(3, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = random_primitive(3, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
        assert!(enumerate_primitive(3).unwrap().contains(&a));
    }

    #[test]
    fn random_primitive_is_uniform_at_degree_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let first = poly(&[3, 1, 0]);
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| random_primitive(3, &mut rng).unwrap() == first)
            .count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.02, "freq = {freq}");
    }

    #[test]
    fn rejection_sampling_above_enumeration_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for g in [21, 32, 47, 62] {
            let p = random_primitive(g, &mut rng).unwrap();
            assert_eq!(p.degree(), g);
            assert!(is_primitive(&p));
        }
    }

    #[test]
    fn hex_rendering() {
        let p = poly(&[3, 1, 0]);
        assert_eq!(p.to_hex(), "0xB");
        assert_eq!("0xB".parse::<GeneratorPolynomial>().unwrap(), p);
        assert_eq!("b".parse::<GeneratorPolynomial>().unwrap(), p);
        assert_eq!(p.to_string(), "x^3+x+1");
        assert!("0x1".parse::<GeneratorPolynomial>().is_err());
        assert!("zz".parse::<GeneratorPolynomial>().is_err());
    }
}
