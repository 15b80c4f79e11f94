//! Random circuit planning: path, anonymization nodes and session keys.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::availability::{selection_vector, AvailabilityError};
use crate::bits::BitString;
use crate::gf2_lfsr::{random_primitive, DegreeRange, LfsrSpec};
use crate::onion_crypto::KeySchedule;
use crate::topology::{NodeId, PathEnsemble, WavelengthPath};

/// How a path is picked once the trial is known not to be blocked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Path `α` with probability `P(α) / (1 − P_B)`, the closed-form
    /// selection law.
    #[default]
    ClosedForm,
    /// Uniformly among the paths available in this trial.
    UniformAvailable,
}

/// Session key shape: `message_bits`-long keystreams from LFSRs of degree
/// `min_degree(message_bits) ..= min_degree + degree_span`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyPolicy {
    pub message_bits: usize,
    pub degree_span: u32,
}

impl Default for KeyPolicy {
    fn default() -> Self {
        Self {
            message_bits: 64,
            degree_span: 3,
        }
    }
}

impl KeyPolicy {
    pub fn degree_range(&self) -> Result<DegreeRange, SimError> {
        Ok(DegreeRange::for_message(
            self.message_bits as u64,
            self.degree_span,
        )?)
    }
}

/// A key-holding node and its LFSR parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeKey {
    pub node: NodeId,
    pub spec: LfsrSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitPlan {
    pub path: WavelengthPath,
    /// Position of `path` in its ensemble.
    pub path_index: usize,
    /// `a_1..a_η` in path order.
    pub anonymization: Vec<NodeId>,
    pub eta: usize,
    pub eta_max: usize,
    /// One entry per anonymization node in path order, then the destination.
    pub node_keys: Vec<NodeKey>,
    pub message_bits: usize,
}

impl CircuitPlan {
    pub fn destination_key(&self) -> &NodeKey {
        self.node_keys
            .last()
            .expect("destination always holds a key")
    }

    /// Keystreams `c_1..c_η, c_d` cut to the message length.
    pub fn key_schedule(&self) -> Result<KeySchedule, SimError> {
        let keys = self
            .node_keys
            .iter()
            .map(|k| k.spec.keystream(self.message_bits))
            .collect();
        Ok(KeySchedule::new(keys)?)
    }
}

/// Reusable sampler for one ensemble; precomputes the selection law.
#[derive(Debug, Clone)]
pub struct Planner {
    ensemble: PathEnsemble,
    availability: Vec<f64>,
    selection: Option<WeightedIndex<f64>>,
    policy: SelectionPolicy,
    eta_max: usize,
    keys: KeyPolicy,
    degrees: DegreeRange,
}

impl Planner {
    pub fn new(
        ensemble: &PathEnsemble,
        eta_max: usize,
        policy: SelectionPolicy,
        keys: KeyPolicy,
    ) -> Result<Self, SimError> {
        let availability = ensemble.availabilities()?;
        if keys.message_bits == 0 {
            return Err(SimError::InvalidConfig(
                "message_bits must be positive".into(),
            ));
        }
        let degrees = keys.degree_range()?;
        // Rejecting a zero key or a repeated key needs room for eta_max + 1
        // distinct nonzero keystreams.
        if (keys.message_bits as u32) < 64 && (1u64 << keys.message_bits) - 1 < eta_max as u64 + 1 {
            return Err(SimError::InvalidConfig(format!(
                "{}-bit keys cannot hold {} distinct nonzero keys",
                keys.message_bits,
                eta_max + 1
            )));
        }
        let selection = match (policy, ensemble.is_empty()) {
            (SelectionPolicy::ClosedForm, false) => match selection_vector(ensemble) {
                Ok(weights) => WeightedIndex::new(&weights).ok(),
                Err(AvailabilityError::Degenerate) => None,
                Err(e) => return Err(e.into()),
            },
            _ => None,
        };
        Ok(Self {
            ensemble: ensemble.clone(),
            availability,
            selection,
            policy,
            eta_max,
            keys,
            degrees,
        })
    }

    pub fn ensemble(&self) -> &PathEnsemble {
        &self.ensemble
    }

    pub fn eta_max(&self) -> usize {
        self.eta_max
    }

    pub fn key_policy(&self) -> KeyPolicy {
        self.keys
    }

    /// Samples one path-availability outcome; `None` when blocked.
    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let mut available = Vec::with_capacity(self.availability.len());
        for (i, &p) in self.availability.iter().enumerate() {
            if rng.gen::<f64>() < p {
                available.push(i);
            }
        }
        if available.is_empty() {
            return None;
        }
        match (self.policy, &self.selection) {
            (SelectionPolicy::ClosedForm, Some(w)) => Some(w.sample(rng)),
            // Selection law degenerate (all paths certain): only uniform is left.
            _ => Some(available[rng.gen_range(0..available.len())]),
        }
    }

    /// Anonymization nodes and fresh keys for a fixed path.
    pub fn plan_on<R: Rng + ?Sized>(
        &self,
        path_index: usize,
        rng: &mut R,
    ) -> Result<CircuitPlan, SimError> {
        let path = self
            .ensemble
            .paths()
            .get(path_index)
            .ok_or_else(|| SimError::InvalidConfig(format!("no path at index {path_index}")))?
            .clone();
        let theta = path.theta();
        let eta = rng.gen_range(0..=self.eta_max.min(theta));
        let mut picks = index::sample(rng, theta, eta).into_vec();
        picks.sort_unstable();
        let anonymization: Vec<NodeId> = picks.iter().map(|&i| path.intermediates()[i]).collect();

        let len = self.keys.message_bits;
        // A sequence of linear complexity g is fixed by its first 2g bits, so
        // past that length distinct specs give distinct nonzero keystreams
        // and nothing needs materializing here.
        let by_spec = len >= 2 * self.degrees.g_max() as usize;
        let mut node_keys: Vec<NodeKey> = Vec::with_capacity(eta + 1);
        let mut keys: Vec<BitString> = Vec::new();
        for &node in anonymization.iter().chain(std::iter::once(&path.dest())) {
            loop {
                let g = rng.gen_range(self.degrees.g_min()..=self.degrees.g_max());
                let spec = LfsrSpec::random_seed(random_primitive(g, rng)?, rng);
                let fresh = if by_spec {
                    node_keys.iter().all(|k| k.spec != spec)
                } else {
                    let key = spec.keystream(len);
                    let fresh = !key.is_zero() && !keys.contains(&key);
                    if fresh {
                        keys.push(key);
                    }
                    fresh
                };
                if fresh {
                    node_keys.push(NodeKey { node, spec });
                    break;
                }
            }
        }
        Ok(CircuitPlan {
            path,
            path_index,
            anonymization,
            eta,
            eta_max: self.eta_max,
            node_keys,
            message_bits: len,
        })
    }

    /// Full plan, or [`SimError::Blocked`] when no path is available.
    pub fn plan<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CircuitPlan, SimError> {
        let index = self.sample_path(rng).ok_or(SimError::Blocked)?;
        self.plan_on(index, rng)
    }
}

/// One-shot planning with the default selection and key policies.
pub fn plan_circuit<R: Rng + ?Sized>(
    ensemble: &PathEnsemble,
    eta_max: usize,
    rng: &mut R,
) -> Result<CircuitPlan, SimError> {
    Planner::new(
        ensemble,
        eta_max,
        SelectionPolicy::default(),
        KeyPolicy::default(),
    )?
    .plan(rng)
}
