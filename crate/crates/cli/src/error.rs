use std::path::PathBuf;

use thiserror::Error;

use oor_core::availability::AvailabilityError;
use oor_core::circuit_sim::SimError;
use oor_core::equivocation::EquivocationError;
use oor_core::gf2_lfsr::Gf2Error;
use oor_core::onion_crypto::CryptoError;
use oor_core::threat::ThreatError;
use oor_core::topology::TopologyError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Manifest {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("availability: {0}")]
    Availability(#[from] AvailabilityError),
    #[error("threat: {0}")]
    Threat(#[from] ThreatError),
    #[error("equivocation: {0}")]
    Equivocation(#[from] EquivocationError),
    #[error("keys: {0}")]
    Gf2(#[from] Gf2Error),
    #[error("crypto: {0}")]
    Crypto(#[from] CryptoError),
    #[error("simulation: {0}")]
    Sim(#[from] SimError),
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for failed checks, 2 for anything wrong with the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed { .. } => 1,
            _ => 2,
        }
    }
}
