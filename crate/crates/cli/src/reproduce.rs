//! Figure data for the evaluation network plus a pass/fail summary.

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use oor_core::availability::AvailabilityReport;
use oor_core::circuit_sim::{transmit, KeyPolicy, Planner, SelectionPolicy};
use oor_core::equivocation::{secrecy_report, SecrecyScenario};
use oor_core::gf2_lfsr::{
    count_primitive, enumerate_primitive, euler_totient, DegreeRange, LfsrSpec,
};
use oor_core::onion_crypto::{perfect_secrecy_check, SecrecyParams, SecrecyVerdict};
use oor_core::threat::{fixed_set_sweep, wiretapped_transmission_prob, ThreatConfig, WiretapSet};
use oor_core::topology::{LinkRef, PathEnsemble, Topology};
use oor_core::BitString;

use crate::analysis;
use crate::error::CliError;
use crate::simulate::{self, Experiment};
use crate::table::{num, Table};

/// Blocking probability of the bundled availability vector.
pub const REFERENCE_BLOCKING: f64 = 3.986_718_75e-7;
pub const EVALUATION_LINKS: &str = "3-7,8-9,17-18,13-11";
pub const EXPECTED_PATHS: usize = 12;

pub struct Settings<'a> {
    pub topology: &'a Topology,
    pub ensemble: &'a PathEnsemble,
    pub links: Vec<LinkRef>,
    pub message_bits: u64,
    pub eta_max: u64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

/// Writes every figure table into `out` and returns the check list.
pub fn reproduce(s: &Settings<'_>, out: &Path) -> Result<Vec<Check>, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let e = s.ensemble;
    let mut checks = Vec::new();

    checks.push(check(
        "1 path enumeration",
        e.len() == EXPECTED_PATHS,
        format!(
            "{} wavelength paths from {} to {}",
            e.len(),
            e.source(),
            e.dest()
        ),
    ));

    analysis::availability(e)?.emit(Some(&out.join("availability.csv")))?;
    checks.push(normalization(e)?);

    let phis = [0.1, 0.3, 0.5];
    let x = Experiment {
        topology: s.topology,
        ensemble: e,
        eta_max: s.eta_max as usize,
        keys: KeyPolicy::default(),
        trials: s.trials,
        seed: s.seed,
    };
    let started = Instant::now();
    let outcomes = phis
        .iter()
        .map(|&phi| simulate::run(&x, &ThreatConfig::Probabilistic { phi }, false))
        .collect::<Result<Vec<_>, _>>()?;
    simulate::table(&x, &outcomes).emit(Some(&out.join("monte_carlo.csv")))?;
    checks.push(check(
        "3 Monte Carlo calibration",
        outcomes
            .iter()
            .all(|o| o.wiretap_in_ci() && o.blocking_in_ci()),
        outcomes
            .iter()
            .zip(phis)
            .map(|(o, phi)| {
                format!(
                    "phi={phi}: {:.5} vs {:.5} in-CI {}, blocking in-CI {}",
                    o.stats.estimate,
                    o.closed_form,
                    o.wiretap_in_ci(),
                    o.blocking_in_ci()
                )
            })
            .collect::<Vec<_>>()
            .join("; ")
            + &format!(
                " ({} trials each, seed {}, {:.1?})",
                s.trials,
                s.seed,
                started.elapsed()
            ),
    ));

    let fig3 = fig3(s.message_bits, s.eta_max);
    fig3.emit(Some(&out.join("fig3.csv")))?;
    let sweep: Vec<f64> = (0..=10)
        .map(|i| i as f64 * 0.05)
        .map(|p| (p * 1e12f64).round() / 1e12)
        .collect();
    let fig4 = analysis::phi_sweep(e, &sweep, s.message_bits, s.eta_max)?;
    fig4.emit(Some(&out.join("fig4.csv")))?;
    let ws: Vec<u64> = (1..=s.links.len() as u64).collect();
    let fig5 = analysis::w_sweep(s.topology, e, &s.links, &ws, s.message_bits, s.eta_max)?;
    fig5.emit(Some(&out.join("fig5.csv")))?;
    checks.extend(threat(s)?);
    checks.push(equivocation());
    checks.push(key_space()?);
    checks.push(onion(e, s.seed)?);
    checks.push(secrecy_gate()?);

    let mut summary = Table::new(&["check", "passed", "detail"]);
    for c in &checks {
        summary.push(vec![c.name.into(), c.pass.to_string(), c.detail.clone()]);
    }
    summary.emit(Some(&out.join("summary.csv")))?;
    Ok(checks)
}

/// `(η, η_max, H(m′|m)/H_e(m′))` for every `η ≤ η_max ≤ eta_max`.
fn fig3(message_bits: u64, eta_max: u64) -> Table {
    let grid = analysis::equivocation(message_bits, &(0..=eta_max).collect::<Vec<_>>());
    let mut t = Table::new(&["eta", "eta_max", "normalized_by_he"]);
    for r in grid.rows().iter().filter(|r| r[8].is_empty()) {
        t.push(vec![r[1].clone(), r[2].clone(), r[5].clone()]);
    }
    t
}

fn normalization(e: &PathEnsemble) -> Result<Check, CliError> {
    let r = AvailabilityReport::compute(e)?;
    let p = e.availabilities()?;
    let total: f64 = r.distribution.iter().sum();
    let selected: f64 = r.selection.as_deref().map_or(0.0, |s| s.iter().sum());
    let mut worst = 0.0f64;
    if p.len() <= 20 {
        let mut exactly = vec![0.0; p.len() + 1];
        for mask in 0u32..(1 << p.len()) {
            let pr: f64 = p
                .iter()
                .enumerate()
                .map(|(i, &q)| if mask >> i & 1 == 1 { q } else { 1.0 - q })
                .product();
            exactly[mask.count_ones() as usize] += pr;
        }
        for (a, b) in exactly.iter().zip(&r.distribution) {
            worst = worst.max((a - b).abs());
        }
    }
    let reference = (r.blocking - REFERENCE_BLOCKING).abs() <= 1e-9 * REFERENCE_BLOCKING;
    Ok(check(
        "2 availability normalization",
        (total - 1.0).abs() < 1e-9 && (selected - (1.0 - r.blocking)).abs() < 1e-9 && worst < 1e-12 && reference,
        format!(
            "sum P(Omega=j) = {}, sum P(alpha) + P_B = {}, brute-force gap {worst:e}, P_B = {} (reference {})",
            num(total),
            num(selected + r.blocking),
            num(r.blocking),
            num(REFERENCE_BLOCKING)
        ),
    ))
}

fn threat(s: &Settings<'_>) -> Result<Vec<Check>, CliError> {
    let sweep = (0..=10)
        .map(|i| wiretapped_transmission_prob(s.ensemble, i as f64 * 0.05))
        .collect::<Result<Vec<_>, _>>()?;
    let set = WiretapSet::new(s.topology, &s.links)?;
    let by_w = (1..=set.len())
        .map(|w| fixed_set_sweep(s.ensemble, &set, w))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(vec![
        check(
            "4a threat monotone in phi",
            sweep.windows(2).all(|w| w[0] <= w[1]),
            format!("phi 0..0.5: {}", list(&sweep)),
        ),
        check(
            "4b threat above 0.95 at phi=0.5",
            sweep[10] > 0.95,
            format!("P_w(0.5) = {:.5}", sweep[10]),
        ),
        check(
            "4c fixed-set sweep strictly increasing",
            by_w.windows(2).all(|w| w[0] < w[1]),
            format!("w=1..{}: {}", by_w.len(), list(&by_w)),
        ),
    ])
}

fn list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.5}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn equivocation() -> Check {
    let by_eta: Vec<f64> = (0..=9)
        .filter_map(|eta| {
            SecrecyScenario::new(1024, eta, 9)
                .and_then(|s| secrecy_report(&s))
                .ok()
        })
        .map(|r| r.normalized_by_he)
        .collect();
    let target = 65.0 / 11.0;
    let top_ok = by_eta.len() == 10 && (by_eta[9] - target).abs() / target < 0.02;
    let bottom_ok = by_eta.first().is_some_and(|v| (30.0..=36.0).contains(v));
    let decreasing = by_eta.windows(2).all(|w| w[0] > w[1]);
    let mut lemma = true;
    for l in 1..=16u64 {
        for eta_max in 0..=9u64 {
            if let Ok(s) = SecrecyScenario::new(l, 0, eta_max) {
                lemma &= secrecy_report(&s).is_ok_and(|r| r.lemma1_holds);
            }
        }
    }
    check(
        "5 equivocation",
        top_ok && bottom_ok && decreasing && lemma,
        format!(
            "L=1024: eta=9 {:.4} (target {target:.4}), eta=0 {:.3}, decreasing {decreasing}, lemma for L<=16 {lemma}",
            by_eta.last().copied().unwrap_or(f64::NAN),
            by_eta.first().copied().unwrap_or(f64::NAN)
        ),
    )
}

fn key_space() -> Result<Check, CliError> {
    let mut ok = true;
    for g in 2..=12u32 {
        let expect = euler_totient((1u64 << g) - 1)? / g as u64;
        ok &= enumerate_primitive(g)?.len() as u64 == expect && count_primitive(g)? == expect;
    }
    let mut polys = 0;
    for g in 2..=10u32 {
        let period = (1u64 << g) - 1;
        for &p in enumerate_primitive(g)? {
            polys += 1;
            let mut reg = LfsrSpec::new(p, 1)?.register();
            let mut steps = 0;
            loop {
                reg.step();
                steps += 1;
                if reg.state() == 1 || steps > period {
                    break;
                }
            }
            ok &= steps == period;
        }
    }
    Ok(check(
        "6 LFSR key space",
        ok,
        format!("primitive counts for g<=12, full periods of {polys} polynomials g<=10"),
    ))
}

fn onion(e: &PathEnsemble, seed: u64) -> Result<Check, CliError> {
    let planner = Planner::new(e, 9, SelectionPolicy::ClosedForm, KeyPolicy::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut delivered, mut changed, mut hops, mut circuits, mut attempts) = (0, 0, 0, 0, 0);
    while circuits < 10_000 && attempts < 1_000_000 {
        attempts += 1;
        let Ok(plan) = planner.plan(&mut rng) else {
            continue;
        };
        circuits += 1;
        let m = BitString::random(plan.message_bits, &mut rng);
        let (out, trace) = transmit(&plan, &m)?;
        delivered += (out == m) as u32;
        for w in trace.hops.windows(2) {
            if plan.anonymization.contains(&w[0].link.to) {
                hops += 1;
                changed += (w[0].payload != w[1].payload) as u32;
            }
        }
    }
    Ok(check(
        "7 end-to-end onion delivery",
        circuits == 10_000 && delivered == circuits && changed == hops,
        format!("{delivered}/{circuits} delivered, {changed}/{hops} anonymization hops changed the wire"),
    ))
}

fn secrecy_gate() -> Result<Check, CliError> {
    let mut cases = 0;
    let mut mismatches = 0;
    for g_min in 3..=16u32 {
        for g_max in g_min..=16 {
            let range = DegreeRange::new(g_min, g_max)?;
            let mut h1 = 0.0;
            for g in g_min..=g_max {
                let period = (1u64 << g) - 1;
                h1 += ((euler_totient(period)? / g as u64) as f64 * period as f64).log2();
            }
            for l in 1..=200u64 {
                let expect = if l > (1u64 << g_min) - 1 {
                    SecrecyVerdict::FailsLength
                } else if h1 < l as f64 {
                    SecrecyVerdict::FailsEntropy
                } else {
                    SecrecyVerdict::Holds
                };
                let got = perfect_secrecy_check(&SecrecyParams {
                    message_length: l,
                    degree_range: range,
                })?;
                cases += 1;
                mismatches += (got != expect) as u32;
            }
        }
    }
    Ok(check(
        "8 perfect-secrecy gate",
        mismatches == 0,
        format!("{cases} grid points, {mismatches} mismatches"),
    ))
}
