//! Layered control message carrying each key node's configuration.

use serde::{Deserialize, Serialize};

use super::plan::CircuitPlan;
use super::registry::{NodeRegistry, PrivateKey, PublicKey, SealedBox, SealedMessage};
use super::SimError;
use crate::gf2_lfsr::{GeneratorPolynomial, LfsrSpec};
use crate::topology::NodeId;

/// What one key-holding node learns during setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeConfig {
    pub node: NodeId,
    /// Upstream neighbor whose fiber feeds the key-matched input port.
    pub input_port: NodeId,
    /// Next key node (or the destination itself for the last layer).
    pub next_hop: NodeId,
    pub wavelength: u32,
    pub polynomial: GeneratorPolynomial,
    pub seed: u64,
}

impl NodeConfig {
    pub fn spec(&self) -> Result<LfsrSpec, SimError> {
        Ok(LfsrSpec::new(self.polynomial, self.seed)?)
    }
}

/// Layer plaintext: the fixed-width config, then optionally the next
/// sealed layer (recipient node, recipient id, body).
struct LayerContent {
    config: NodeConfig,
    inner: Option<SealedMessage>,
}

const CONFIG_BYTES: usize = 4 * 4 + 8 * 2;

impl LayerContent {
    fn encode(&self) -> Vec<u8> {
        let c = &self.config;
        let inner_len = self.inner.as_ref().map_or(0, |m| 12 + m.body().len());
        let mut out = Vec::with_capacity(CONFIG_BYTES + inner_len);
        for v in [c.node, c.input_port, c.next_hop, c.wavelength] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&c.polynomial.mask().to_le_bytes());
        out.extend_from_slice(&c.seed.to_le_bytes());
        if let Some(m) = &self.inner {
            out.extend_from_slice(&m.recipient().node().to_le_bytes());
            out.extend_from_slice(&m.recipient().id().to_le_bytes());
            out.extend_from_slice(m.body());
        }
        out
    }

    fn decode(bytes: &[u8]) -> Result<Self, SimError> {
        if bytes.len() < CONFIG_BYTES
            || (bytes.len() > CONFIG_BYTES && bytes.len() < CONFIG_BYTES + 12)
        {
            return Err(SimError::Codec(format!(
                "layer of {} bytes is truncated",
                bytes.len()
            )));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        let config = NodeConfig {
            node: u32_at(0),
            input_port: u32_at(4),
            next_hop: u32_at(8),
            wavelength: u32_at(12),
            polynomial: GeneratorPolynomial::from_mask(u64_at(16))?,
            seed: u64_at(24),
        };
        let inner = (bytes.len() > CONFIG_BYTES).then(|| {
            let recipient = PublicKey::from_parts(u32_at(CONFIG_BYTES), u64_at(CONFIG_BYTES + 4));
            SealedMessage::from_parts(recipient, bytes[CONFIG_BYTES + 12..].to_vec())
        });
        Ok(Self { config, inner })
    }
}

/// Nested sealed layers, outermost addressed to the first key node on the
/// path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlOnion {
    outer: SealedMessage,
    layers: usize,
}

impl ControlOnion {
    pub fn layers(&self) -> usize {
        self.layers
    }

    /// Node the outer layer is addressed to.
    pub fn recipient(&self) -> NodeId {
        self.outer.recipient().node()
    }

    /// Opens the outer layer: this node's config and the residual onion.
    pub fn open<S: SealedBox + ?Sized>(
        &self,
        sealer: &S,
        key: &PrivateKey,
    ) -> Result<(NodeConfig, Option<ControlOnion>), SimError> {
        let bytes = sealer.open(key, &self.outer)?;
        let content = LayerContent::decode(&bytes)?;
        let rest = content.inner.map(|outer| ControlOnion {
            outer,
            layers: self.layers - 1,
        });
        Ok((content.config, rest))
    }

    /// Opens every layer in path order, each with its recipient's own
    /// private handle.
    pub fn unwrap_all<S: SealedBox + ?Sized>(
        &self,
        sealer: &S,
        registry: &NodeRegistry,
    ) -> Result<Vec<NodeConfig>, SimError> {
        let mut out = Vec::with_capacity(self.layers);
        let mut current = Some(self.clone());
        while let Some(onion) = current {
            let key = registry.private_key(onion.recipient())?;
            let (config, rest) = onion.open(sealer, key)?;
            out.push(config);
            current = rest;
        }
        Ok(out)
    }
}

/// Per-node configurations in path order.
pub(crate) fn node_configs(plan: &CircuitPlan) -> Vec<NodeConfig> {
    let nodes = plan.path.nodes();
    let position = |v: NodeId| {
        nodes
            .iter()
            .position(|&n| n == v)
            .expect("key node on path")
    };
    let mut out: Vec<NodeConfig> = plan
        .node_keys
        .iter()
        .map(|k| {
            let at = position(k.node);
            NodeConfig {
                node: k.node,
                input_port: nodes[at - 1],
                next_hop: k.node,
                wavelength: plan.path.wavelength(),
                polynomial: k.spec.polynomial(),
                seed: k.spec.seed(),
            }
        })
        .collect();
    for i in 0..out.len().saturating_sub(1) {
        out[i].next_hop = out[i + 1].node;
    }
    out
}

/// Seals each key node's configuration to its public handle, innermost
/// layer for the destination.
pub fn setup_circuit<S: SealedBox + ?Sized>(
    plan: &CircuitPlan,
    registry: &NodeRegistry,
    sealer: &S,
) -> Result<ControlOnion, SimError> {
    for &v in plan.path.nodes() {
        registry.public_key(v)?;
    }
    let configs = node_configs(plan);
    let mut inner: Option<SealedMessage> = None;
    for config in configs.iter().rev() {
        let public = registry.public_key(config.node)?;
        let content = LayerContent {
            config: *config,
            inner: inner.take(),
        };
        inner = Some(sealer.seal(&public, content.encode()));
    }
    Ok(ControlOnion {
        outer: inner.expect("destination layer always present"),
        layers: configs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit_sim::plan::plan_circuit;
    use crate::circuit_sim::registry::ModelSealedBox;
    use crate::topology::{attach_availabilities, load_bundled, PathEnsemble, WavelengthPath};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_hop_onion_opens_only_at_destination() {
        let p = WavelengthPath::new(vec![1, 2], 3).unwrap();
        let e = attach_availabilities(PathEnsemble::new(1, 2, vec![p]).unwrap(), &[1.0]).unwrap();
        let plan = plan_circuit(&e, 0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let reg = NodeRegistry::for_nodes([1, 2], 11);
        let onion = setup_circuit(&plan, &reg, &ModelSealedBox).unwrap();
        assert_eq!(onion.layers(), 1);
        assert!(matches!(
            onion.open(&ModelSealedBox, reg.private_key(1).unwrap()),
            Err(SimError::AccessDenied { .. })
        ));
        let (cfg, rest) = onion
            .open(&ModelSealedBox, reg.private_key(2).unwrap())
            .unwrap();
        assert!(rest.is_none());
        assert_eq!((cfg.node, cfg.input_port, cfg.wavelength), (2, 1, 3));
    }

    #[test]
    fn truncated_layer_rejected() {
        assert!(matches!(
            LayerContent::decode(&[0u8; 20]),
            Err(SimError::Codec(_))
        ));
    }

    #[test]
    fn unregistered_node_is_an_error() {
        let e = load_bundled().ensemble(0).unwrap();
        let plan = plan_circuit(&e, 2, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let reg = NodeRegistry::for_nodes([1], 0);
        assert!(matches!(
            setup_circuit(&plan, &reg, &ModelSealedBox),
            Err(SimError::MissingKeyPair(_))
        ));
    }

    #[test]
    fn round_trip_reconstructs_every_key() {
        let t = load_bundled();
        let e = t.ensemble(0).unwrap();
        let reg = NodeRegistry::for_topology(&t, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let plan = plan_circuit(&e, 9, &mut rng).unwrap();
            let onion = setup_circuit(&plan, &reg, &ModelSealedBox).unwrap();
            let configs = onion.unwrap_all(&ModelSealedBox, &reg).unwrap();
            assert_eq!(configs.len(), plan.node_keys.len());
            for (c, k) in configs.iter().zip(&plan.node_keys) {
                assert_eq!(c.node, k.node);
                assert_eq!(c.spec().unwrap(), k.spec);
                assert_eq!(c.wavelength, plan.path.wavelength());
            }
        }
    }
}
