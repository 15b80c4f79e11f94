//! Monte Carlo cross-check of blocking and wiretap probabilities.
//!
//! Trial `i` draws from its own ChaCha8 stream (master seed, stream `i`),
//! so results do not depend on how trials are split across threads.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::plan::{KeyPolicy, Planner, SelectionPolicy};
use super::SimError;
use crate::threat::ThreatConfig;
use crate::topology::{LinkRef, PathEnsemble};

const Z95: f64 = 1.959_963_984_540_054;
const CHUNK: u64 = 4096;

#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    pub ensemble: PathEnsemble,
    pub threat: ThreatConfig,
    pub eta_max: usize,
    pub trials: u64,
    pub seed: u64,
    pub selection: SelectionPolicy,
    pub keys: KeyPolicy,
    /// Keep a per-trial record for debugging.
    pub record_trials: bool,
}

impl MonteCarloConfig {
    pub fn new(
        ensemble: PathEnsemble,
        threat: ThreatConfig,
        eta_max: usize,
        trials: u64,
        seed: u64,
    ) -> Self {
        Self {
            ensemble,
            threat,
            eta_max,
            trials,
            seed,
            selection: SelectionPolicy::default(),
            keys: KeyPolicy::default(),
            record_trials: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub blocked: bool,
    pub path_index: Option<usize>,
    pub eta: Option<usize>,
    pub wiretapped: bool,
}

/// Counts and estimates. `estimate` is conditional on the trial not being
/// blocked (`wiretapped / (trials − blocked)`); `unconditional_estimate`
/// divides by all trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialStats {
    pub trials: u64,
    pub blocked: u64,
    pub wiretapped: u64,
    pub estimate: f64,
    pub ci95_half_width: f64,
    pub unconditional_estimate: f64,
    pub unconditional_ci95_half_width: f64,
    pub blocking_estimate: f64,
    pub blocking_ci95_half_width: f64,
    /// Times each ensemble path was chosen.
    pub path_counts: Vec<u64>,
    #[serde(skip)]
    pub records: Option<Vec<TrialRecord>>,
}

fn ratio(k: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

fn wald_half_width(k: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = ratio(k, n);
    Z95 * (p * (1.0 - p) / n as f64).sqrt()
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn inside((lo, hi): (f64, f64), x: f64) -> bool {
    lo <= x && x <= hi
}

impl TrialStats {
    pub fn served(&self) -> u64 {
        self.trials - self.blocked
    }

    pub fn wiretap_interval(&self) -> (f64, f64) {
        wilson_interval(self.wiretapped, self.served())
    }

    pub fn unconditional_interval(&self) -> (f64, f64) {
        wilson_interval(self.wiretapped, self.trials)
    }

    pub fn blocking_interval(&self) -> (f64, f64) {
        wilson_interval(self.blocked, self.trials)
    }

    /// Whether a closed-form conditional wiretap probability lies in the
    /// 95% interval.
    pub fn wiretap_in_ci(&self, closed_form: f64) -> bool {
        inside(self.wiretap_interval(), closed_form)
    }

    pub fn blocking_in_ci(&self, closed_form: f64) -> bool {
        inside(self.blocking_interval(), closed_form)
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    blocked: u64,
    wiretapped: u64,
    path_counts: Vec<u64>,
    records: Vec<TrialRecord>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.blocked += other.blocked;
        self.wiretapped += other.wiretapped;
        if self.path_counts.len() < other.path_counts.len() {
            self.path_counts.resize(other.path_counts.len(), 0);
        }
        for (a, b) in self.path_counts.iter_mut().zip(&other.path_counts) {
            *a += b;
        }
        self.records.extend(other.records);
        self
    }
}

enum Attack {
    Probabilistic(f64),
    Fixed { links: Vec<LinkRef>, w: usize },
}

impl Attack {
    fn from_config(config: &ThreatConfig) -> Result<Self, SimError> {
        match config {
            ThreatConfig::Probabilistic { phi } => {
                if !(0.0..=1.0).contains(phi) {
                    return Err(SimError::InvalidConfig(format!("phi {phi} outside [0, 1]")));
                }
                Ok(Attack::Probabilistic(*phi))
            }
            ThreatConfig::FixedSet { links, w } => {
                let mut links = links.clone();
                links.sort_unstable();
                links.dedup();
                let w = w.unwrap_or(links.len());
                if w > links.len() {
                    return Err(SimError::InvalidConfig(format!(
                        "w = {w} exceeds {} candidate links",
                        links.len()
                    )));
                }
                Ok(Attack::Fixed { links, w })
            }
        }
    }

    fn hits<R: Rng + ?Sized>(&self, path: &[LinkRef], rng: &mut R) -> bool {
        match self {
            Attack::Probabilistic(phi) => {
                let mut hit = false;
                for _ in path {
                    hit |= rng.gen::<f64>() < *phi;
                }
                hit
            }
            Attack::Fixed { links, w } if *w == links.len() => {
                path.iter().any(|l| links.binary_search(l).is_ok())
            }
            Attack::Fixed { links, w } => index::sample(rng, links.len(), *w)
                .iter()
                .any(|i| path.contains(&links[i])),
        }
    }
}

/// Runs `config.trials` independent trials; deterministic given the seed.
pub fn run_monte_carlo(config: &MonteCarloConfig) -> Result<TrialStats, SimError> {
    if config.trials == 0 {
        return Err(SimError::InvalidConfig("trials must be at least 1".into()));
    }
    let planner = Planner::new(
        &config.ensemble,
        config.eta_max,
        config.selection,
        config.keys,
    )?;
    let attack = Attack::from_config(&config.threat)?;
    let path_links: Vec<Vec<LinkRef>> = config
        .ensemble
        .paths()
        .iter()
        .map(|p| p.links().collect())
        .collect();
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    let n_paths = config.ensemble.len();

    let run_chunk = |chunk: u64| -> Result<Tally, SimError> {
        let mut tally = Tally {
            path_counts: vec![0; n_paths],
            ..Tally::default()
        };
        let end = ((chunk + 1) * CHUNK).min(config.trials);
        for trial in chunk * CHUNK..end {
            let mut rng = base.clone();
            rng.set_stream(trial);
            let mut record = TrialRecord {
                trial,
                blocked: false,
                path_index: None,
                eta: None,
                wiretapped: false,
            };
            match planner.plan(&mut rng) {
                Err(SimError::Blocked) => {
                    tally.blocked += 1;
                    record.blocked = true;
                }
                Err(e) => return Err(e),
                Ok(plan) => {
                    tally.path_counts[plan.path_index] += 1;
                    record.path_index = Some(plan.path_index);
                    record.eta = Some(plan.eta);
                    if attack.hits(&path_links[plan.path_index], &mut rng) {
                        tally.wiretapped += 1;
                        record.wiretapped = true;
                    }
                }
            }
            if config.record_trials {
                tally.records.push(record);
            }
        }
        Ok(tally)
    };

    let chunks = config.trials.div_ceil(CHUNK);
    let tallies: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(run_chunk)
        .collect::<Result<_, _>>()?;
    let total = tallies.into_iter().fold(
        Tally {
            path_counts: vec![0; n_paths],
            ..Tally::default()
        },
        Tally::merge,
    );

    let n = config.trials;
    let served = n - total.blocked;
    Ok(TrialStats {
        trials: n,
        blocked: total.blocked,
        wiretapped: total.wiretapped,
        estimate: ratio(total.wiretapped, served),
        ci95_half_width: wald_half_width(total.wiretapped, served),
        unconditional_estimate: ratio(total.wiretapped, n),
        unconditional_ci95_half_width: wald_half_width(total.wiretapped, n),
        blocking_estimate: ratio(total.blocked, n),
        blocking_ci95_half_width: wald_half_width(total.blocked, n),
        path_counts: total.path_counts,
        records: config.record_trials.then_some(total.records),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::load_bundled;

    fn cfg(phi: f64, trials: u64, seed: u64) -> MonteCarloConfig {
        let e = load_bundled().ensemble(0).unwrap();
        MonteCarloConfig::new(e, ThreatConfig::Probabilistic { phi }, 2, trials, seed)
    }

    #[test]
    fn phi_zero_never_wiretaps() {
        let s = run_monte_carlo(&cfg(0.0, 5000, 1)).unwrap();
        assert_eq!(s.wiretapped, 0);
        assert_eq!(s.estimate, 0.0);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(
            run_monte_carlo(&cfg(0.1, 0, 1)),
            Err(SimError::InvalidConfig(_))
        ));
    }

    #[test]
    fn deterministic_and_recorded() {
        let mut c = cfg(0.3, 9000, 77);
        c.record_trials = true;
        let a = run_monte_carlo(&c).unwrap();
        let b = run_monte_carlo(&c).unwrap();
        assert_eq!(a, b);
        let rec = a.records.as_ref().unwrap();
        assert_eq!(rec.len(), 9000);
        assert!(rec.iter().enumerate().all(|(i, r)| r.trial == i as u64));
        assert_eq!(
            rec.iter().filter(|r| r.wiretapped).count() as u64,
            a.wiretapped
        );
        assert_eq!(a.path_counts.iter().sum::<u64>(), a.served());
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(0, 100_000);
        assert_eq!(lo, 0.0);
        assert!(hi > 3.0e-5 && hi < 4.0e-5);
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((hi - 0.5 - (0.5 - lo)).abs() < 1e-12);
    }

    #[test]
    fn fixed_set_full_cover() {
        let t = load_bundled();
        let e = t.ensemble(0).unwrap();
        let links = t.links().iter().map(|l| l.link_ref()).collect();
        let c = MonteCarloConfig::new(e, ThreatConfig::FixedSet { links, w: None }, 2, 2000, 3);
        let s = run_monte_carlo(&c).unwrap();
        assert_eq!(s.wiretapped, s.served());
    }
}
