//! GF(2) polynomials, primitive-polynomial counting and selection, and the
//! LFSR keystreams that session keys are cut from.

mod lfsr;
mod poly;
mod totient;

use thiserror::Error;

pub use lfsr::{keystream, min_degree, DegreeRange, Lfsr, LfsrSpec};
pub use poly::{
    clmul, count_primitive, enumerate_primitive, is_irreducible, is_primitive, random_primitive,
    GeneratorPolynomial, G_CAP, G_ENUM_CAP,
};
pub use totient::{euler_totient, factorize, is_prime};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degree {g} exceeds capacity {cap}")]
    Capacity { g: u32, cap: u32 },
    #[error("invalid degree {0}")]
    InvalidDegree(u32),
    #[error("invalid degree range {g_min}..={g_max}")]
    InvalidRange { g_min: u32, g_max: u32 },
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("invalid seed: {0}")]
    InvalidSeed(String),
}
