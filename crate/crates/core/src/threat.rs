//! External link eavesdropper.
//!
//! Taps are per fiber: a broadband receiver on a fiber sees every
//! wavelength on it. Either every fiber is tapped independently with
//! probability `φ`, or a fixed set of fibers is tapped.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::availability::{selection_vector, AvailabilityError, Combinations};
use crate::sum::pairwise_sum;
use crate::topology::{LinkRef, PathEnsemble, Topology, TopologyError, WavelengthPath};

#[derive(Debug, Error)]
pub enum ThreatError {
    #[error(transparent)]
    Availability(#[from] AvailabilityError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("tap probability {0} is outside [0, 1]")]
    Phi(f64),
    #[error("subset size {w} exceeds {candidates} candidate links")]
    SubsetSize { w: usize, candidates: usize },
}

fn check_phi(phi: f64) -> Result<(), ThreatError> {
    if (0.0..=1.0).contains(&phi) {
        Ok(())
    } else {
        Err(ThreatError::Phi(phi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ThreatConfig {
    /// Each fiber is tapped independently with probability `phi`.
    Probabilistic { phi: f64 },
    /// A fixed list of tapped fibers; with `w` below the list length an
    /// attack covers a uniformly chosen `w`-subset.
    FixedSet {
        links: Vec<LinkRef>,
        #[serde(default)]
        w: Option<usize>,
    },
}

impl ThreatConfig {
    pub fn validate(&self, topology: &Topology) -> Result<(), ThreatError> {
        match self {
            ThreatConfig::Probabilistic { phi } => check_phi(*phi),
            ThreatConfig::FixedSet { links, w } => {
                let set = WiretapSet::new(topology, links)?;
                match w {
                    Some(w) if *w > set.len() => Err(ThreatError::SubsetSize {
                        w: *w,
                        candidates: set.len(),
                    }),
                    _ => Ok(()),
                }
            }
        }
    }
}

/// Validated set of tapped fibers, deduplicated and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WiretapSet {
    links: Vec<LinkRef>,
}

impl WiretapSet {
    pub fn new(topology: &Topology, links: &[LinkRef]) -> Result<Self, ThreatError> {
        if let Some(&bad) = links.iter().find(|l| !topology.contains_link(**l)) {
            return Err(TopologyError::UnknownLink(bad).into());
        }
        let links: BTreeSet<LinkRef> = links.iter().copied().collect();
        Ok(Self {
            links: links.into_iter().collect(),
        })
    }

    pub fn links(&self) -> &[LinkRef] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn subset(&self, positions: &[usize]) -> WiretapSet {
        WiretapSet {
            links: positions.iter().map(|&i| self.links[i]).collect(),
        }
    }

    pub fn intersects(&self, path: &WavelengthPath) -> bool {
        path.links().any(|l| self.links.binary_search(&l).is_ok())
    }
}

/// `1 − (1 − φ)^(θ+1)` for a path with `θ` intermediate nodes.
pub fn wiretap_prob_by_hops(theta: usize, phi: f64) -> Result<f64, ThreatError> {
    check_phi(phi)?;
    Ok(1.0 - (1.0 - phi).powi(theta as i32 + 1))
}

/// `P^w(𝒫_l)`: at least one fiber of the path is tapped.
pub fn wiretap_path_prob(path: &WavelengthPath, phi: f64) -> Result<f64, ThreatError> {
    wiretap_prob_by_hops(path.theta(), phi)
}

/// `P^φ_w = Σ_α P^w(𝒫_α) P(α)`.
pub fn wiretapped_transmission_prob(ensemble: &PathEnsemble, phi: f64) -> Result<f64, ThreatError> {
    Ok(threat_report(ensemble, phi)?.aggregate)
}

/// `Σ P(α)` over paths crossing at least one tapped fiber.
pub fn fixed_set_wiretap_prob(
    ensemble: &PathEnsemble,
    set: &WiretapSet,
) -> Result<f64, ThreatError> {
    if set.is_empty() || ensemble.is_empty() {
        return Ok(0.0);
    }
    let selection = selection_vector(ensemble)?;
    Ok(fixed_set_from(ensemble, &selection, set))
}

fn fixed_set_from(ensemble: &PathEnsemble, selection: &[f64], set: &WiretapSet) -> f64 {
    let terms: Vec<f64> = ensemble
        .paths()
        .iter()
        .zip(selection)
        .map(|(path, &s)| if set.intersects(path) { s } else { 0.0 })
        .collect();
    pairwise_sum(&terms)
}

/// Mean of [`fixed_set_wiretap_prob`] over every `w`-subset of the
/// candidates, subsets taken in lexicographic order.
pub fn fixed_set_sweep(
    ensemble: &PathEnsemble,
    candidates: &WiretapSet,
    w: usize,
) -> Result<f64, ThreatError> {
    if w > candidates.len() {
        return Err(ThreatError::SubsetSize {
            w,
            candidates: candidates.len(),
        });
    }
    if w == 0 || ensemble.is_empty() {
        return Ok(0.0);
    }
    let selection = selection_vector(ensemble)?;
    let values: Vec<f64> = Combinations::new(candidates.len(), w)
        .map(|pos| fixed_set_from(ensemble, &selection, &candidates.subset(&pos)))
        .collect();
    Ok(pairwise_sum(&values) / values.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreatReport {
    pub config: ThreatConfig,
    /// `P^w(𝒫_l)` per path; for fixed sets 1 or 0 (or the subset-averaged
    /// hit rate when `w` is below the set size).
    pub per_path: Vec<f64>,
    pub aggregate: f64,
}

fn threat_report(ensemble: &PathEnsemble, phi: f64) -> Result<ThreatReport, ThreatError> {
    check_phi(phi)?;
    let per_path = ensemble
        .paths()
        .iter()
        .map(|p| wiretap_path_prob(p, phi))
        .collect::<Result<Vec<_>, _>>()?;
    let aggregate = if ensemble.is_empty() || phi == 0.0 {
        0.0
    } else {
        let selection = selection_vector(ensemble)?;
        let terms: Vec<f64> = per_path
            .iter()
            .zip(&selection)
            .map(|(a, b)| a * b)
            .collect();
        pairwise_sum(&terms)
    };
    Ok(ThreatReport {
        config: ThreatConfig::Probabilistic { phi },
        per_path,
        aggregate,
    })
}

/// Closed-form report for either threat mode.
pub fn analyze(
    topology: &Topology,
    ensemble: &PathEnsemble,
    config: &ThreatConfig,
) -> Result<ThreatReport, ThreatError> {
    config.validate(topology)?;
    match config {
        ThreatConfig::Probabilistic { phi } => threat_report(ensemble, *phi),
        ThreatConfig::FixedSet { links, w } => {
            let set = WiretapSet::new(topology, links)?;
            let w = w.unwrap_or(set.len());
            let subsets: Vec<WiretapSet> = Combinations::new(set.len(), w)
                .map(|pos| set.subset(&pos))
                .collect();
            let per_path = ensemble
                .paths()
                .iter()
                .map(|p| {
                    let hits = subsets.iter().filter(|s| s.intersects(p)).count();
                    hits as f64 / subsets.len() as f64
                })
                .collect();
            Ok(ThreatReport {
                config: config.clone(),
                per_path,
                aggregate: fixed_set_sweep(ensemble, &set, w)?,
            })
        }
    }
}
