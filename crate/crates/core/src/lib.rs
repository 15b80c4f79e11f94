//! # oor-core
//!
//! Optical onion routing over a simulated WDM network.
//!
//! - [`gf2_lfsr`] - GF(2) polynomials, primitive polynomial selection, LFSR keystreams
//! - [`onion_crypto`] - layered XOR encryption and the key-space secrecy gate
//! - [`topology`] - fiber graph, wavelength path ensembles, bundled 24-node network
//! - [`availability`] - closed-form path availability, blocking and selection
//! - [`threat`] - link eavesdropper model and fixed wiretap sets
//! - [`equivocation`] - encrypted entropy and attacker equivocation
//! - [`circuit_sim`] - control-plane setup, node state machines, Monte Carlo harness
//!
//! Probabilities are `f64`; combinatorial sums use fixed-order pairwise
//! summation so results are reproducible bit for bit.

pub mod availability;
pub mod bits;
pub mod circuit_sim;
pub mod equivocation;
pub mod gf2_lfsr;
pub mod onion_crypto;
pub mod threat;
pub mod topology;

mod sum;

pub use bits::BitString;
