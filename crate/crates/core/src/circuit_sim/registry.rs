//! Node key pairs and the sealed-box abstraction for control messages.
//!
//! No concrete public-key scheme is fixed. [`ModelSealedBox`] models one as
//! an access-control token: a sealed message names its recipient's public
//! handle and only the matching private handle opens it. A real scheme can
//! be substituted by implementing [`SealedBox`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::topology::{NodeId, Topology};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Public handle `K+`: globally readable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PublicKey {
    node: NodeId,
    id: u64,
}

impl PublicKey {
    pub(crate) fn from_parts(node: NodeId, id: u64) -> Self {
        Self { node, id }
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn id(&self) -> u64 {
        self.id
    }
}

/// Private handle `K−`: held by the owning node only.
#[derive(Clone, PartialEq, Eq)]
pub struct PrivateKey {
    node: NodeId,
    secret: u64,
}

impl PrivateKey {
    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn public(&self) -> PublicKey {
        PublicKey {
            node: self.node,
            id: splitmix64(self.secret),
        }
    }
}

impl std::fmt::Debug for PrivateKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PrivateKey(node {})", self.node)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCapabilities {
    pub source: bool,
    pub forwarding: bool,
    pub anonymization: bool,
    pub destination: bool,
}

impl NodeCapabilities {
    pub const ALL: NodeCapabilities = NodeCapabilities {
        source: true,
        forwarding: true,
        anonymization: true,
        destination: true,
    };
}

#[derive(Debug, Clone)]
struct Entry {
    capabilities: NodeCapabilities,
    private: PrivateKey,
}

/// One key pair per registered node.
#[derive(Debug, Clone, Default)]
pub struct NodeRegistry {
    entries: BTreeMap<NodeId, Entry>,
}

impl NodeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every node of the topology, full capabilities, secrets derived from
    /// `seed`.
    pub fn for_topology(topology: &Topology, seed: u64) -> Self {
        Self::for_nodes(1..=topology.node_count(), seed)
    }

    pub fn for_nodes<I: IntoIterator<Item = NodeId>>(nodes: I, seed: u64) -> Self {
        let mut r = Self::new();
        for n in nodes {
            r.register(n, NodeCapabilities::ALL, seed);
        }
        r
    }

    /// Issues a key pair for `node`, replacing any earlier one.
    pub fn register(
        &mut self,
        node: NodeId,
        capabilities: NodeCapabilities,
        seed: u64,
    ) -> PublicKey {
        let secret = splitmix64(seed ^ splitmix64(u64::from(node)));
        let private = PrivateKey { node, secret };
        let public = private.public();
        self.entries.insert(
            node,
            Entry {
                capabilities,
                private,
            },
        );
        public
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.entries.contains_key(&node)
    }

    pub fn public_key(&self, node: NodeId) -> Result<PublicKey, SimError> {
        self.entries
            .get(&node)
            .map(|e| e.private.public())
            .ok_or(SimError::MissingKeyPair(node))
    }

    /// The private handle, as handed to the node itself.
    pub fn private_key(&self, node: NodeId) -> Result<&PrivateKey, SimError> {
        self.entries
            .get(&node)
            .map(|e| &e.private)
            .ok_or(SimError::MissingKeyPair(node))
    }

    pub fn capabilities(&self, node: NodeId) -> Result<NodeCapabilities, SimError> {
        self.entries
            .get(&node)
            .map(|e| e.capabilities)
            .ok_or(SimError::MissingKeyPair(node))
    }
}

/// Opaque sealed payload. The body is not reachable except via
/// [`SealedBox::open`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SealedMessage {
    recipient: PublicKey,
    body: Vec<u8>,
}

impl SealedMessage {
    /// For sealed-box implementations and layer codecs; the body is
    /// whatever [`SealedBox::seal`] produced.
    pub fn from_parts(recipient: PublicKey, body: Vec<u8>) -> Self {
        Self { recipient, body }
    }

    pub fn recipient(&self) -> PublicKey {
        self.recipient
    }

    pub(crate) fn body(&self) -> &[u8] {
        &self.body
    }
}

pub trait SealedBox {
    fn seal(&self, recipient: &PublicKey, plaintext: Vec<u8>) -> SealedMessage;
    fn open(&self, key: &PrivateKey, message: &SealedMessage) -> Result<Vec<u8>, SimError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ModelSealedBox;

impl SealedBox for ModelSealedBox {
    fn seal(&self, recipient: &PublicKey, plaintext: Vec<u8>) -> SealedMessage {
        SealedMessage {
            recipient: *recipient,
            body: plaintext,
        }
    }

    fn open(&self, key: &PrivateKey, message: &SealedMessage) -> Result<Vec<u8>, SimError> {
        if key.public() != message.recipient {
            return Err(SimError::AccessDenied {
                node: key.node,
                recipient: message.recipient.node,
            });
        }
        Ok(message.body.clone())
    }
}
