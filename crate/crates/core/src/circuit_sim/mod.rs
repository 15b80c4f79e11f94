//! End-to-end circuit simulation.
//!
//! A [`CircuitPlan`] fixes the wavelength path, the anonymization nodes and
//! their LFSR session keys. [`setup_circuit`] wraps one sealed
//! configuration per key-holding node into a [`ControlOnion`];
//! [`Circuit::establish`] walks it along the path and installs the keys in
//! each node's key table; [`Circuit::transmit`] then pushes a payload hop by
//! hop and records what a fiber tap would see. [`run_monte_carlo`] repeats
//! the availability and attack experiment to cross-check the closed forms.

mod monte_carlo;
mod onion;
mod plan;
mod registry;
mod transmit;

use thiserror::Error;

use crate::availability::AvailabilityError;
use crate::bits::BitsError;
use crate::gf2_lfsr::Gf2Error;
use crate::onion_crypto::CryptoError;
use crate::topology::{NodeId, TopologyError};

pub use monte_carlo::{
    run_monte_carlo, wilson_interval, MonteCarloConfig, TrialRecord, TrialStats,
};
pub use onion::{setup_circuit, ControlOnion, NodeConfig};
pub use plan::{plan_circuit, CircuitPlan, KeyPolicy, NodeKey, Planner, SelectionPolicy};
pub use registry::{
    ModelSealedBox, NodeCapabilities, NodeRegistry, PrivateKey, PublicKey, SealedBox, SealedMessage,
};
pub use transmit::{transmit, Circuit, NodeRole, WireRecord, WireTrace};

#[derive(Debug, Error)]
pub enum SimError {
    /// No path of the ensemble was available in this trial.
    #[error("every path is unavailable; transmission blocked")]
    Blocked,
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Availability(#[from] AvailabilityError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error("node {0} has no registered key pair")]
    MissingKeyPair(NodeId),
    #[error("node {node} cannot open a layer sealed to node {recipient}")]
    AccessDenied { node: NodeId, recipient: NodeId },
    #[error("node {node} holds no key for input port {port} on wavelength {wavelength}")]
    Misconfigured {
        node: NodeId,
        port: NodeId,
        wavelength: u32,
    },
    #[error("control message codec: {0}")]
    Codec(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
