//! Layered XOR encryption of payloads and the key-space secrecy gate.
//!
//! A payload is wrapped by XOR-ing in one session key per anonymization
//! node plus the destination key. Every hop peels its own key; since XOR is
//! commutative and self-inverse the peeling order does not matter.

use thiserror::Error;

use crate::bits::{BitString, BitsError};
use crate::gf2_lfsr::{count_primitive, DegreeRange, Gf2Error};

pub type Payload = BitString;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("key {index} has {found} bits, schedule length is {expected}")]
    KeyLength {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("key {0} is all-zero")]
    ZeroKey(usize),
    #[error("keys {0} and {1} are identical")]
    DuplicateKey(usize, usize),
    #[error("key {0} equals the plaintext")]
    KeyEqualsPayload(usize),
    #[error("payload has {payload} bits, schedule keys have {keys}")]
    PayloadLength { payload: usize, keys: usize },
    #[error("degree range yields an empty key space")]
    EmptyKeySpace,
}

/// Session keys `c_1..c_η` of the anonymization nodes followed by the
/// destination key `c_d`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KeySchedule {
    keys: Vec<BitString>,
}

impl KeySchedule {
    /// Keys must share one length, be nonzero and pairwise distinct.
    pub fn new(keys: Vec<BitString>) -> Result<Self, CryptoError> {
        if let Some(first) = keys.first() {
            let expected = first.len();
            for (index, k) in keys.iter().enumerate() {
                if k.len() != expected {
                    return Err(CryptoError::KeyLength {
                        index,
                        expected,
                        found: k.len(),
                    });
                }
                if k.is_zero() {
                    return Err(CryptoError::ZeroKey(index));
                }
            }
            for i in 0..keys.len() {
                for j in i + 1..keys.len() {
                    if keys[i] == keys[j] {
                        return Err(CryptoError::DuplicateKey(i, j));
                    }
                }
            }
        }
        Ok(Self { keys })
    }

    pub fn keys(&self) -> &[BitString] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key_length(&self) -> Option<usize> {
        self.keys.first().map(BitString::len)
    }
}

pub fn xor_combine(a: &BitString, b: &BitString) -> Result<BitString, CryptoError> {
    Ok(a.xor(b)?)
}

/// `m′ ⊕ c_1 ⊕ … ⊕ c_d`; an empty schedule returns `m′` unchanged.
pub fn layer_encrypt(plain: &Payload, schedule: &KeySchedule) -> Result<Payload, CryptoError> {
    if let Some(keys) = schedule.key_length() {
        if keys != plain.len() {
            return Err(CryptoError::PayloadLength {
                payload: plain.len(),
                keys,
            });
        }
    }
    let mut out = plain.clone();
    for (i, k) in schedule.keys().iter().enumerate() {
        if k == plain {
            return Err(CryptoError::KeyEqualsPayload(i));
        }
        out = out.xor(k)?;
    }
    Ok(out)
}

/// Removes one layer; `peel(peel(m, k), k) == m`.
pub fn peel(wrapped: &Payload, key: &BitString) -> Result<Payload, CryptoError> {
    xor_combine(wrapped, key)
}

/// Entropy of a session key chosen via polynomial and seed:
/// `Σ_g log2(C_g · (2^g − 1))` over the degree range.
pub fn key_entropy_h1(range: &DegreeRange) -> Result<f64, CryptoError> {
    let mut total = 0.0;
    let mut any = false;
    for g in range.degrees() {
        let count = count_primitive(g)?;
        if count == 0 {
            continue;
        }
        any = true;
        total += (count as f64).log2() + (((1u64 << g) - 1) as f64).log2();
    }
    if !any {
        return Err(CryptoError::EmptyKeySpace);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecrecyParams {
    pub message_length: u64,
    pub degree_range: DegreeRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecrecyVerdict {
    Holds,
    FailsEntropy,
    FailsLength,
}

/// Key entropy must cover the message (`H1 ≥ L_m`) and the shortest LFSR
/// period must cover it too (`L_m ≤ 2^g_min − 1`). The length check wins
/// when both fail.
pub fn perfect_secrecy_check(params: &SecrecyParams) -> Result<SecrecyVerdict, CryptoError> {
    let g_min = params.degree_range.g_min();
    if params.message_length as u128 > (1u128 << g_min) - 1 {
        return Ok(SecrecyVerdict::FailsLength);
    }
    let h1 = key_entropy_h1(&params.degree_range)?;
    if h1 >= params.message_length as f64 {
        Ok(SecrecyVerdict::Holds)
    } else {
        Ok(SecrecyVerdict::FailsEntropy)
    }
}
