//! Encrypted entropy and attacker equivocation of layered XOR ciphertexts.
//!
//! With `k = η + 1` keys on an `L`-bit message, the number of distinct
//! (message, key set) combinations is `k! · C(2^L − 2, k) · 2^L`; its log2 is
//! the entropy `H_e(m′)` of the ciphertext. An attacker not knowing `η`
//! must consider every key count `1..=η_max + 1`, which sums those logs
//! into the equivocation `H(m′|m)`.
//!
//! Messages up to [`L_EXACT`] bits are evaluated with exact big-integer
//! arithmetic. Longer ones use the log-domain identity
//! `log2(k! · C(n, k)) = Σ_{i<k} log2(n − i)` with
//! `log2(2^L − 2 − i) = L + log2(1 − (i + 2) / 2^L)`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

/// Longest message evaluated exactly by default.
pub const L_EXACT: u64 = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquivocationError {
    #[error("{message_bits}-bit messages admit too few distinct keys for {keys} keys (need 2^L - 2 >= {keys})")]
    ScenarioTooSmall { message_bits: u64, keys: u64 },
    #[error("eta {eta} exceeds eta_max {eta_max}")]
    EtaAboveMax { eta: u64, eta_max: u64 },
}

fn check_keys(message_bits: u64, keys: u64) -> Result<(), EquivocationError> {
    let fits = message_bits >= 127 || (1u128 << message_bits) - 2 >= keys as u128;
    if message_bits == 0 || !fits {
        return Err(EquivocationError::ScenarioTooSmall { message_bits, keys });
    }
    Ok(())
}

fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().unwrap() as f64).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap() as f64;
    top.log2() + shift as f64
}

fn factorial(k: u64) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * i)
}

fn binomial_big(n: &BigUint, k: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `k! · C(2^L − 2, k) · 2^L` as an exact integer.
pub fn combination_count(message_bits: u64, keys: u64) -> Result<BigUint, EquivocationError> {
    check_keys(message_bits, keys)?;
    let space = BigUint::one() << message_bits;
    let n = &space - 2u32;
    Ok(factorial(keys) * binomial_big(&n, keys) * space)
}

/// log2 of [`combination_count`] via big integers.
pub fn log_combinations_exact(message_bits: u64, keys: u64) -> Result<f64, EquivocationError> {
    Ok(log2_big(&combination_count(message_bits, keys)?))
}

/// log2 of [`combination_count`] in the log domain.
pub fn log_combinations_approx(message_bits: u64, keys: u64) -> Result<f64, EquivocationError> {
    check_keys(message_bits, keys)?;
    let l = message_bits as f64;
    let unit = (-l).exp2();
    let falling: f64 = (0..keys)
        .map(|i| l + (-((i + 2) as f64) * unit).ln_1p() / std::f64::consts::LN_2)
        .sum();
    Ok(falling + l)
}

fn log_combinations(message_bits: u64, keys: u64) -> Result<f64, EquivocationError> {
    if message_bits <= L_EXACT {
        log_combinations_exact(message_bits, keys)
    } else {
        log_combinations_approx(message_bits, keys)
    }
}

/// `H_e(m′)` for `η` anonymization nodes (`η + 1` keys).
pub fn encrypted_entropy(message_bits: u64, eta: u64) -> Result<f64, EquivocationError> {
    log_combinations(message_bits, eta + 1)
}

/// `H(m′|m)`: summed over every key count the attacker must consider.
pub fn attacker_equivocation(message_bits: u64, eta_max: u64) -> Result<f64, EquivocationError> {
    check_keys(message_bits, eta_max + 1)?;
    (0..=eta_max)
        .map(|i| log_combinations(message_bits, eta_max + 1 - i))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecrecyScenario {
    pub message_bits: u64,
    pub eta: u64,
    pub eta_max: u64,
}

impl SecrecyScenario {
    pub fn new(message_bits: u64, eta: u64, eta_max: u64) -> Result<Self, EquivocationError> {
        if eta > eta_max {
            return Err(EquivocationError::EtaAboveMax { eta, eta_max });
        }
        check_keys(message_bits, eta_max + 1)?;
        Ok(Self {
            message_bits,
            eta,
            eta_max,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivocationReport {
    pub scenario: SecrecyScenario,
    /// `H(m′) = L`.
    pub h_plain: f64,
    pub h_encrypted: f64,
    pub h_attacker: f64,
    pub normalized_by_he: f64,
    pub normalized_by_h: f64,
    pub lemma1_holds: bool,
}

pub fn secrecy_report(s: &SecrecyScenario) -> Result<EquivocationReport, EquivocationError> {
    let s = SecrecyScenario::new(s.message_bits, s.eta, s.eta_max)?;
    let h_plain = s.message_bits as f64;
    let h_encrypted = encrypted_entropy(s.message_bits, s.eta)?;
    let h_attacker = attacker_equivocation(s.message_bits, s.eta_max)?;
    Ok(EquivocationReport {
        scenario: s,
        h_plain,
        h_encrypted,
        h_attacker,
        normalized_by_he: h_attacker / h_encrypted,
        normalized_by_h: h_attacker / h_plain,
        lemma1_holds: h_attacker >= h_plain,
    })
}

/// Attacker equivocation normalized by `L`, weighted by the probability the
/// attacker obtains the ciphertext at all.
pub fn mean_equivocation(
    p_wiretap: f64,
    message_bits: u64,
    eta_max: u64,
) -> Result<f64, EquivocationError> {
    Ok(p_wiretap * attacker_equivocation(message_bits, eta_max)? / message_bits as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_counts() {
        assert_eq!(combination_count(4, 1).unwrap(), BigUint::from(224u32));
        assert_eq!(combination_count(4, 2).unwrap(), BigUint::from(2912u32));
        assert!((encrypted_entropy(4, 0).unwrap() - 224f64.log2()).abs() < 1e-12);
        assert!((encrypted_entropy(4, 1).unwrap() - 2912f64.log2()).abs() < 1e-12);
        assert!((encrypted_entropy(4, 0).unwrap() - 7.807).abs() < 1e-3);
        assert!((encrypted_entropy(4, 1).unwrap() - 11.508).abs() < 1e-3);
    }

    #[test]
    fn equivocation_examples() {
        assert_eq!(
            attacker_equivocation(4, 0).unwrap(),
            encrypted_entropy(4, 0).unwrap()
        );
        let v = attacker_equivocation(4, 1).unwrap();
        assert!((v - (2912f64.log2() + 224f64.log2())).abs() < 1e-12);
        assert!((v - 19.315).abs() < 1e-3);
    }

    #[test]
    fn large_message_asymptote() {
        let v = attacker_equivocation(1024, 9).unwrap() / 1024.0;
        assert!((v - 65.0).abs() / 65.0 < 0.02, "{v}");
    }

    #[test]
    fn approx_matches_exact_in_overlap() {
        for l in 16..=24 {
            for k in 1..=10 {
                let a = log_combinations_exact(l, k).unwrap();
                let b = log_combinations_approx(l, k).unwrap();
                assert!((a - b).abs() / a < 1e-6, "L={l} k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn approx_matches_exact_far_out() {
        // Big integers stay cheap for small key counts even at L = 1024.
        for k in [1, 5, 10] {
            let a = log_combinations_exact(1024, k).unwrap();
            let b = log_combinations_approx(1024, k).unwrap();
            assert!((a - b).abs() / a < 1e-12);
        }
    }

    #[test]
    fn scenario_too_small() {
        assert_eq!(
            attacker_equivocation(2, 9),
            Err(EquivocationError::ScenarioTooSmall {
                message_bits: 2,
                keys: 10
            })
        );
        assert!(SecrecyScenario::new(2, 0, 9).is_err());
        assert!(SecrecyScenario::new(8, 3, 2).is_err());
        // 2^2 - 2 = 2 keys fit exactly
        assert!(encrypted_entropy(2, 1).is_ok());
        assert!(encrypted_entropy(2, 2).is_err());
    }

    #[test]
    fn report_at_evaluation_scale() {
        let top = secrecy_report(&SecrecyScenario::new(1024, 9, 9).unwrap()).unwrap();
        assert!((top.normalized_by_he - 65.0 / 11.0).abs() / (65.0 / 11.0) < 0.02);
        let bottom = secrecy_report(&SecrecyScenario::new(1024, 0, 9).unwrap()).unwrap();
        assert!((bottom.normalized_by_he - 32.5).abs() < 0.5);
        assert!(top.lemma1_holds && bottom.lemma1_holds);
    }

    #[test]
    fn mean_equivocation_scales_with_probability() {
        let full = mean_equivocation(1.0, 4096, 2).unwrap();
        assert!((full - 9.0).abs() < 0.01);
        assert_eq!(mean_equivocation(0.0, 4096, 2).unwrap(), 0.0);
    }
}
