//! Node state machines and hop-by-hop data-plane transmission.

use std::collections::HashMap;

use serde::Serialize;

use super::onion::setup_circuit;
use super::plan::CircuitPlan;
use super::registry::{ModelSealedBox, NodeRegistry, SealedBox};
use super::SimError;
use crate::bits::BitString;
use crate::onion_crypto::{layer_encrypt, peel, KeySchedule, Payload};
use crate::topology::{LinkRef, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Source,
    Forwarding,
    Anonymization,
    Destination,
}

#[derive(Debug, Clone)]
struct NodeState {
    role: NodeRole,
    /// Key generation unit output, indexed by (input port, wavelength).
    keys: HashMap<(NodeId, u32), BitString>,
}

/// Payload seen on one fiber of the path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WireRecord {
    pub link: LinkRef,
    pub wavelength: u32,
    pub payload: Payload,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WireTrace {
    pub hops: Vec<WireRecord>,
}

impl WireTrace {
    pub fn first(&self) -> Option<&WireRecord> {
        self.hops.first()
    }

    pub fn last(&self) -> Option<&WireRecord> {
        self.hops.last()
    }
}

/// An established circuit: key tables installed along the path.
#[derive(Debug, Clone)]
pub struct Circuit {
    path: Vec<NodeId>,
    wavelength: u32,
    message_bits: usize,
    source_keys: KeySchedule,
    nodes: HashMap<NodeId, NodeState>,
}

impl Circuit {
    /// Runs control-plane setup: builds the onion, lets every key node open
    /// its own layer and load its keystream.
    pub fn establish<S: SealedBox + ?Sized>(
        plan: &CircuitPlan,
        registry: &NodeRegistry,
        sealer: &S,
    ) -> Result<Self, SimError> {
        let onion = setup_circuit(plan, registry, sealer)?;
        let configs = onion.unwrap_all(sealer, registry)?;
        let path = plan.path.nodes().to_vec();
        let dest = plan.path.dest();
        let mut nodes: HashMap<NodeId, NodeState> = path
            .iter()
            .map(|&v| {
                let role = if v == plan.path.source() {
                    NodeRole::Source
                } else {
                    NodeRole::Forwarding
                };
                (
                    v,
                    NodeState {
                        role,
                        keys: HashMap::new(),
                    },
                )
            })
            .collect();
        for cfg in &configs {
            let key = cfg.spec()?.keystream(plan.message_bits);
            let state = nodes.get_mut(&cfg.node).expect("config for a path node");
            state.role = if cfg.node == dest {
                NodeRole::Destination
            } else {
                NodeRole::Anonymization
            };
            state.keys.insert((cfg.input_port, cfg.wavelength), key);
        }
        Ok(Self {
            path,
            wavelength: plan.path.wavelength(),
            message_bits: plan.message_bits,
            source_keys: plan.key_schedule()?,
            nodes,
        })
    }

    pub fn role(&self, node: NodeId) -> Option<NodeRole> {
        self.nodes.get(&node).map(|s| s.role)
    }

    pub fn wavelength(&self) -> u32 {
        self.wavelength
    }

    /// Sends `m′` on the planned wavelength.
    pub fn transmit(&self, m_prime: &Payload) -> Result<(Payload, WireTrace), SimError> {
        self.transmit_on(m_prime, self.wavelength)
    }

    /// Sends `m′` with the source laser tuned to `wavelength`. Any
    /// wavelength other than the planned one misses the key tables.
    pub fn transmit_on(
        &self,
        m_prime: &Payload,
        wavelength: u32,
    ) -> Result<(Payload, WireTrace), SimError> {
        if m_prime.len() != self.message_bits {
            return Err(SimError::InvalidConfig(format!(
                "payload has {} bits, circuit keys have {}",
                m_prime.len(),
                self.message_bits
            )));
        }
        let mut wire = layer_encrypt(m_prime, &self.source_keys)?;
        let mut trace = WireTrace::default();
        for hop in self.path.windows(2) {
            let (u, v) = (hop[0], hop[1]);
            trace.hops.push(WireRecord {
                link: LinkRef::new(u, v),
                wavelength,
                payload: wire.clone(),
            });
            let state = &self.nodes[&v];
            match state.role {
                NodeRole::Forwarding | NodeRole::Source => {}
                NodeRole::Anonymization | NodeRole::Destination => {
                    let key = state
                        .keys
                        .get(&(u, wavelength))
                        .ok_or(SimError::Misconfigured {
                            node: v,
                            port: u,
                            wavelength,
                        })?;
                    wire = peel(&wire, key)?;
                }
            }
        }
        Ok((wire, trace))
    }
}

/// Establishes `plan` over a throwaway registry of the path's nodes and
/// sends `m′` through it.
pub fn transmit(plan: &CircuitPlan, m_prime: &Payload) -> Result<(Payload, WireTrace), SimError> {
    let registry = NodeRegistry::for_nodes(plan.path.nodes().iter().copied(), 0);
    Circuit::establish(plan, &registry, &ModelSealedBox)?.transmit(m_prime)
}
