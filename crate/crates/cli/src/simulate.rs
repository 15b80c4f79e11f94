//! Monte Carlo runs with closed-form comparison columns.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use oor_core::availability::blocking_probability;
use oor_core::circuit_sim::{run_monte_carlo, KeyPolicy, MonteCarloConfig, TrialStats};
use oor_core::threat::{analyze, ThreatConfig};
use oor_core::topology::{PathEnsemble, Topology};

use crate::error::CliError;
use crate::table::{num, opt, Table};

/// Experiment document. Every field is optional; flags override it.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub topology: Option<PathBuf>,
    pub ensemble: Option<String>,
    pub threat: Option<ThreatConfig>,
    pub eta_max: Option<usize>,
    pub message_bits: Option<usize>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut m: Manifest = serde_json::from_str(&text).map_err(|source| CliError::Manifest {
            path: path.to_path_buf(),
            source,
        })?;
        // Topology paths are relative to the manifest.
        if let (Some(t), Some(dir)) = (&m.topology, path.parent()) {
            if t.is_relative() {
                m.topology = Some(dir.join(t));
            }
        }
        Ok(m)
    }
}

pub struct Experiment<'a> {
    pub topology: &'a Topology,
    pub ensemble: &'a PathEnsemble,
    pub eta_max: usize,
    pub keys: KeyPolicy,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub threat: ThreatConfig,
    pub stats: TrialStats,
    pub closed_form: f64,
    pub unconditional_closed_form: f64,
    pub blocking_closed_form: f64,
}

impl Outcome {
    pub fn wiretap_in_ci(&self) -> bool {
        self.stats.wiretap_in_ci(self.closed_form)
    }

    pub fn unconditional_in_ci(&self) -> bool {
        let (lo, hi) = self.stats.unconditional_interval();
        lo <= self.unconditional_closed_form && self.unconditional_closed_form <= hi
    }

    pub fn blocking_in_ci(&self) -> bool {
        self.stats.blocking_in_ci(self.blocking_closed_form)
    }
}

pub fn run(x: &Experiment<'_>, threat: &ThreatConfig, record: bool) -> Result<Outcome, CliError> {
    if x.trials == 0 {
        return Err(CliError::Input("trials must be positive".into()));
    }
    let aggregate = analyze(x.topology, x.ensemble, threat)?.aggregate;
    let pb = blocking_probability(x.ensemble)?;
    let mut config = MonteCarloConfig::new(
        x.ensemble.clone(),
        threat.clone(),
        x.eta_max,
        x.trials,
        x.seed,
    );
    config.keys = x.keys;
    config.record_trials = record;
    let stats = run_monte_carlo(&config)?;
    Ok(Outcome {
        threat: threat.clone(),
        stats,
        closed_form: if pb < 1.0 {
            aggregate / (1.0 - pb)
        } else {
            0.0
        },
        unconditional_closed_form: aggregate,
        blocking_closed_form: pb,
    })
}

pub const COLUMNS: &[&str] = &[
    "mode",
    "phi",
    "w",
    "eta_max",
    "trials",
    "seed",
    "blocked",
    "wiretapped",
    "estimate",
    "ci95_low",
    "ci95_high",
    "ci95_half_width",
    "closed_form",
    "in_ci",
    "unconditional_estimate",
    "unconditional_closed_form",
    "unconditional_in_ci",
    "blocking_estimate",
    "blocking_closed_form",
    "blocking_in_ci",
];

pub fn table(x: &Experiment<'_>, outcomes: &[Outcome]) -> Table {
    let mut t = Table::new(COLUMNS);
    for o in outcomes {
        let (mode, phi, w) = match &o.threat {
            ThreatConfig::Probabilistic { phi } => ("probabilistic", Some(*phi), None),
            ThreatConfig::FixedSet { links, w } => {
                ("fixed_set", None, Some(w.unwrap_or(links.len())))
            }
        };
        let s = &o.stats;
        let (lo, hi) = s.wiretap_interval();
        t.push(vec![
            mode.into(),
            phi.map(num).unwrap_or_default(),
            opt(w),
            x.eta_max.to_string(),
            s.trials.to_string(),
            x.seed.to_string(),
            s.blocked.to_string(),
            s.wiretapped.to_string(),
            num(s.estimate),
            num(lo),
            num(hi),
            num(s.ci95_half_width),
            num(o.closed_form),
            o.wiretap_in_ci().to_string(),
            num(s.unconditional_estimate),
            num(o.unconditional_closed_form),
            o.unconditional_in_ci().to_string(),
            num(s.blocking_estimate),
            num(o.blocking_closed_form),
            o.blocking_in_ci().to_string(),
        ]);
    }
    t
}

/// Per-trial dump, one block per run.
pub fn trace_table(outcomes: &[Outcome]) -> Table {
    let mut t = Table::new(&["run", "trial", "blocked", "path_index", "eta", "wiretapped"]);
    for (run, o) in outcomes.iter().enumerate() {
        for r in o.stats.records.iter().flatten() {
            t.push(vec![
                run.to_string(),
                r.trial.to_string(),
                r.blocked.to_string(),
                opt(r.path_index.map(|i| i + 1)),
                opt(r.eta),
                r.wiretapped.to_string(),
            ]);
        }
    }
    t
}
