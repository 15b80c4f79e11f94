//! Directed WDM fiber graph and wavelength path ensembles.
//!
//! A fiber link `v′ → v″` offers `c_e` available wavelength channels. A
//! wavelength path is a loop-free route from source to destination that
//! holds one channel on every fiber it crosses and keeps one wavelength id
//! end to end. [`enumerate_paths`] builds the ensemble of such paths by
//! allocating channels to routes shortest-first until no route can be
//! served. [`enumerate_routes`] lists the loop-free routes themselves.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = u32;

/// Guard against pathological graphs during route enumeration.
pub const DEFAULT_ROUTE_LIMIT: usize = 1_000_000;

/// Wavelengths per fiber when the document does not say.
pub const DEFAULT_FIBER_WAVELENGTHS: u32 = 10;

const BUNDLED: &str = include_str!("../data/oor24-v1.json");

/// File name of the bundled evaluation network.
pub const BUNDLED_FILE_NAME: &str = "oor24-v1.json";

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error in {field}: {message}")]
    Validation { field: String, message: String },
    #[error("node {0} is not in the topology")]
    UnknownNode(NodeId),
    #[error("link {0} is not in the topology")]
    UnknownLink(LinkRef),
    #[error("source and destination are both node {0}")]
    SameEndpoints(NodeId),
    #[error("route enumeration exceeded {0} routes")]
    RouteLimit(usize),
    #[error("expected {expected} availabilities, got {found}")]
    AvailabilityCount { expected: usize, found: usize },
    #[error("availability {value} at position {index} is outside [0, 1]")]
    AvailabilityRange { index: usize, value: f64 },
    #[error("path availabilities have not been attached")]
    MissingAvailability,
    #[error("invalid path: {0}")]
    InvalidPath(String),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> TopologyError {
    TopologyError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

/// A directed fiber identified by its endpoints, written `from-to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkRef {
    pub from: NodeId,
    pub to: NodeId,
}

impl LinkRef {
    pub fn new(from: NodeId, to: NodeId) -> Self {
        Self { from, to }
    }
}

impl fmt::Display for LinkRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.from, self.to)
    }
}

impl FromStr for LinkRef {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .trim()
            .split_once('-')
            .ok_or_else(|| invalid("link", format!("{s:?} is not of the form FROM-TO")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<NodeId>()
                .map_err(|e| invalid("link", format!("{s:?}: {e}")))
        };
        Ok(LinkRef::new(parse(a)?, parse(b)?))
    }
}

/// Parses a comma-separated link list such as `3-7,8-9`.
pub fn parse_link_list(s: &str) -> Result<Vec<LinkRef>, TopologyError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberLink {
    pub from: NodeId,
    pub to: NodeId,
    /// Available wavelength channels `c_e`.
    pub wavelengths: u32,
}

impl FiberLink {
    pub fn link_ref(&self) -> LinkRef {
        LinkRef::new(self.from, self.to)
    }
}

/// Source/destination pair with its path availability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub source: NodeId,
    pub dest: NodeId,
    #[serde(default)]
    pub availabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TopologyDocument {
    name: String,
    #[serde(default)]
    version: Option<u32>,
    node_count: u32,
    #[serde(default)]
    fiber_wavelengths: Option<u32>,
    links: Vec<FiberLink>,
    #[serde(default)]
    ensembles: Vec<EnsembleSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    name: String,
    node_count: u32,
    fiber_wavelengths: u32,
    links: Vec<FiberLink>,
    ensembles: Vec<EnsembleSpec>,
}

impl Topology {
    /// Validates and builds a topology. Nodes are numbered `1..=node_count`.
    pub fn new(
        name: impl Into<String>,
        node_count: u32,
        fiber_wavelengths: u32,
        links: Vec<FiberLink>,
        ensembles: Vec<EnsembleSpec>,
    ) -> Result<Self, TopologyError> {
        if fiber_wavelengths == 0 {
            return Err(invalid("fiber_wavelengths", "must be at least 1"));
        }
        let mut seen = HashSet::new();
        for (i, l) in links.iter().enumerate() {
            let field = format!("links[{i}]");
            for v in [l.from, l.to] {
                if v == 0 || v > node_count {
                    return Err(invalid(field, format!("node {v} outside 1..={node_count}")));
                }
            }
            if l.from == l.to {
                return Err(invalid(field, format!("self-loop at node {}", l.from)));
            }
            if l.wavelengths == 0 {
                return Err(invalid(field, "wavelength count must be at least 1"));
            }
            if l.wavelengths > fiber_wavelengths {
                return Err(invalid(
                    field,
                    format!(
                        "{} available wavelengths exceed {fiber_wavelengths} per fiber",
                        l.wavelengths
                    ),
                ));
            }
            if !seen.insert(l.link_ref()) {
                return Err(invalid(field, format!("duplicate link {}", l.link_ref())));
            }
        }
        for (i, e) in ensembles.iter().enumerate() {
            let field = format!("ensembles[{i}]");
            for v in [e.source, e.dest] {
                if v == 0 || v > node_count {
                    return Err(invalid(field, format!("node {v} outside 1..={node_count}")));
                }
            }
            if e.source == e.dest {
                return Err(invalid(field, "source equals destination"));
            }
            if let Some((j, p)) = e
                .availabilities
                .iter()
                .enumerate()
                .find(|(_, p)| !(0.0..=1.0).contains(*p))
            {
                return Err(invalid(
                    format!("{field}.availabilities[{j}]"),
                    format!("{p} outside [0, 1]"),
                ));
            }
        }
        Ok(Self {
            name: name.into(),
            node_count,
            fiber_wavelengths,
            links,
            ensembles,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> u32 {
        self.node_count
    }

    pub fn fiber_wavelengths(&self) -> u32 {
        self.fiber_wavelengths
    }

    pub fn links(&self) -> &[FiberLink] {
        &self.links
    }

    pub fn ensembles(&self) -> &[EnsembleSpec] {
        &self.ensembles
    }

    pub fn link(&self, r: LinkRef) -> Option<&FiberLink> {
        self.links.iter().find(|l| l.link_ref() == r)
    }

    pub fn contains_link(&self, r: LinkRef) -> bool {
        self.link(r).is_some()
    }

    fn check_node(&self, v: NodeId) -> Result<(), TopologyError> {
        if v == 0 || v > self.node_count {
            Err(TopologyError::UnknownNode(v))
        } else {
            Ok(())
        }
    }

    fn adjacency(&self) -> Vec<Vec<NodeId>> {
        let mut adj = vec![Vec::new(); self.node_count as usize + 1];
        for l in &self.links {
            adj[l.from as usize].push(l.to);
        }
        for out in adj.iter_mut() {
            out.sort_unstable();
        }
        adj
    }

    /// Enumerates and attaches availabilities for the document's `index`-th
    /// ensemble.
    pub fn ensemble(&self, index: usize) -> Result<PathEnsemble, TopologyError> {
        let spec = self
            .ensembles
            .get(index)
            .ok_or_else(|| invalid("ensembles", format!("no ensemble at index {index}")))?;
        let paths = enumerate_paths(self, spec.source, spec.dest)?;
        attach_availabilities(paths, &spec.availabilities)
    }
}

/// Parses and validates a topology document.
pub fn load_topology(document: &str) -> Result<Topology, TopologyError> {
    let doc: TopologyDocument =
        serde_json::from_str(document).map_err(|e| TopologyError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    Topology::new(
        doc.name,
        doc.node_count,
        doc.fiber_wavelengths.unwrap_or(DEFAULT_FIBER_WAVELENGTHS),
        doc.links,
        doc.ensembles,
    )
}

/// Raw text of the bundled 24-node evaluation network.
pub fn bundled_document() -> &'static str {
    BUNDLED
}

pub fn load_bundled() -> Topology {
    load_topology(BUNDLED).expect("bundled topology is valid")
}

/// A loop-free wavelength path `s = v_0, v_1, …, v_{θ+1} = d`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavelengthPath {
    nodes: Vec<NodeId>,
    wavelength: u32,
    availability: Option<f64>,
}

impl WavelengthPath {
    pub fn new(nodes: Vec<NodeId>, wavelength: u32) -> Result<Self, TopologyError> {
        if nodes.len() < 2 {
            return Err(TopologyError::InvalidPath(format!(
                "{} nodes; a path needs at least 2",
                nodes.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(v) = nodes.iter().find(|v| !seen.insert(**v)) {
            return Err(TopologyError::InvalidPath(format!("node {v} repeats")));
        }
        Ok(Self {
            nodes,
            wavelength,
            availability: None,
        })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn dest(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    /// Intermediate nodes `v_1..v_θ`.
    pub fn intermediates(&self) -> &[NodeId] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    /// Hop metric θ: number of intermediate nodes.
    pub fn theta(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn link_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn links(&self) -> impl Iterator<Item = LinkRef> + '_ {
        self.nodes.windows(2).map(|w| LinkRef::new(w[0], w[1]))
    }

    pub fn uses_link(&self, r: LinkRef) -> bool {
        self.links().any(|l| l == r)
    }

    pub fn wavelength(&self) -> u32 {
        self.wavelength
    }

    pub fn availability(&self) -> Option<f64> {
        self.availability
    }

    /// Route written as `1-3-4-5`.
    pub fn route_string(&self) -> String {
        self.nodes
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// Paths between one source and destination, sorted ascending by hops and
/// then by node sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    source: NodeId,
    dest: NodeId,
    paths: Vec<WavelengthPath>,
}

impl PathEnsemble {
    pub fn new(
        source: NodeId,
        dest: NodeId,
        paths: Vec<WavelengthPath>,
    ) -> Result<Self, TopologyError> {
        for p in &paths {
            if p.source() != source || p.dest() != dest {
                return Err(TopologyError::InvalidPath(format!(
                    "{} does not run {source} -> {dest}",
                    p.route_string()
                )));
            }
        }
        if paths
            .windows(2)
            .any(|w| (w[0].theta(), &w[0].nodes) > (w[1].theta(), &w[1].nodes))
        {
            return Err(TopologyError::InvalidPath(
                "paths are not sorted by hop count".into(),
            ));
        }
        Ok(Self {
            source,
            dest,
            paths,
        })
    }

    /// Parallel single-hop paths over one fiber `1 → 2`, one per wavelength,
    /// with the given availabilities. Handy for analyses that only look at
    /// the availability vector.
    pub fn parallel(availabilities: &[f64]) -> Result<Self, TopologyError> {
        let paths = (0..availabilities.len())
            .map(|w| WavelengthPath::new(vec![1, 2], w as u32))
            .collect::<Result<Vec<_>, _>>()?;
        attach_availabilities(Self::new(1, 2, paths)?, availabilities)
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn dest(&self) -> NodeId {
        self.dest
    }

    pub fn paths(&self) -> &[WavelengthPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// The availability vector `P`, in ensemble order.
    pub fn availabilities(&self) -> Result<Vec<f64>, TopologyError> {
        self.paths
            .iter()
            .map(|p| p.availability.ok_or(TopologyError::MissingAvailability))
            .collect()
    }
}

/// All loop-free directed routes from `s` to `d`, sorted ascending by hop
/// count with ties broken lexicographically by node sequence.
pub fn enumerate_routes(
    t: &Topology,
    s: NodeId,
    d: NodeId,
    limit: usize,
) -> Result<Vec<Vec<NodeId>>, TopologyError> {
    t.check_node(s)?;
    t.check_node(d)?;
    if s == d {
        return Err(TopologyError::SameEndpoints(s));
    }
    let adj = t.adjacency();
    let mut on_path = vec![false; adj.len()];
    let mut stack = vec![s];
    let mut routes = Vec::new();
    on_path[s as usize] = true;
    dfs(&adj, d, &mut stack, &mut on_path, &mut routes, limit)?;
    routes.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    Ok(routes)
}

fn dfs(
    adj: &[Vec<NodeId>],
    d: NodeId,
    stack: &mut Vec<NodeId>,
    on_path: &mut [bool],
    routes: &mut Vec<Vec<NodeId>>,
    limit: usize,
) -> Result<(), TopologyError> {
    let v = *stack.last().unwrap();
    if v == d {
        if routes.len() == limit {
            return Err(TopologyError::RouteLimit(limit));
        }
        routes.push(stack.clone());
        return Ok(());
    }
    for &w in &adj[v as usize] {
        if on_path[w as usize] {
            continue;
        }
        on_path[w as usize] = true;
        stack.push(w);
        dfs(adj, d, stack, on_path, routes, limit)?;
        stack.pop();
        on_path[w as usize] = false;
    }
    Ok(())
}

/// Wavelength path ensemble from `s` to `d`.
///
/// Routes are served in [`enumerate_routes`] order. The first route that
/// still has a free channel on each of its fibers and a wavelength id free
/// on all of them gets a path on the lowest such id; this repeats until no
/// route can be served. The result holds one entry per allocated channel
/// set, so a route appears once per wavelength it carries.
pub fn enumerate_paths(t: &Topology, s: NodeId, d: NodeId) -> Result<PathEnsemble, TopologyError> {
    let routes = enumerate_routes(t, s, d, DEFAULT_ROUTE_LIMIT)?;
    let index_of = |r: LinkRef| {
        t.links
            .iter()
            .position(|l| l.link_ref() == r)
            .expect("route follows topology links")
    };
    let mut free: Vec<u32> = t.links.iter().map(|l| l.wavelengths).collect();
    let mut taken = vec![vec![false; t.fiber_wavelengths as usize]; t.links.len()];
    let mut paths = Vec::new();
    let mut next = 0;
    while next < routes.len() {
        let route = &routes[next];
        let links: Vec<usize> = route
            .windows(2)
            .map(|w| index_of(LinkRef::new(w[0], w[1])))
            .collect();
        let wavelength = if links.iter().all(|&i| free[i] > 0) {
            (0..t.fiber_wavelengths as usize).find(|&w| links.iter().all(|&i| !taken[i][w]))
        } else {
            None
        };
        match wavelength {
            Some(w) => {
                for &i in &links {
                    free[i] -= 1;
                    taken[i][w] = true;
                }
                paths.push(WavelengthPath::new(route.clone(), w as u32)?);
            }
            None => next += 1,
        }
    }
    PathEnsemble::new(s, d, paths)
}

/// Assigns `P_l` positionally to the sorted ensemble.
pub fn attach_availabilities(
    mut ensemble: PathEnsemble,
    p: &[f64],
) -> Result<PathEnsemble, TopologyError> {
    if p.len() != ensemble.paths.len() {
        return Err(TopologyError::AvailabilityCount {
            expected: ensemble.paths.len(),
            found: p.len(),
        });
    }
    if let Some((index, &value)) = p
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(TopologyError::AvailabilityRange { index, value });
    }
    for (path, &v) in ensemble.paths.iter_mut().zip(p) {
        path.availability = Some(v);
    }
    Ok(ensemble)
}
