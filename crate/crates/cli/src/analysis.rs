//! Closed-form reports: availability, threat sweeps, equivocation grids.

use oor_core::availability::AvailabilityReport;
use oor_core::equivocation::{mean_equivocation, secrecy_report, SecrecyScenario};
use oor_core::threat::{analyze, wiretapped_transmission_prob, ThreatConfig};
use oor_core::topology::{LinkRef, PathEnsemble, Topology};

use crate::error::CliError;
use crate::table::{num, Table};

pub fn availability(ensemble: &PathEnsemble) -> Result<Table, CliError> {
    let r = AvailabilityReport::compute(ensemble)?;
    let mut t = Table::new(&[
        "table",
        "index",
        "route",
        "wavelength",
        "availability",
        "value",
    ]);
    for (j, p) in r.distribution.iter().enumerate() {
        t.push(vec![
            "prob_exactly".into(),
            j.to_string(),
            String::new(),
            String::new(),
            String::new(),
            num(*p),
        ]);
    }
    t.push(vec![
        "blocking".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        num(r.blocking),
    ]);
    match &r.selection {
        Some(sel) => {
            for (i, (path, p)) in ensemble.paths().iter().zip(sel).enumerate() {
                t.push(vec![
                    "selection".into(),
                    (i + 1).to_string(),
                    path.route_string(),
                    path.wavelength().to_string(),
                    path.availability().map(num).unwrap_or_default(),
                    num(*p),
                ]);
            }
        }
        None => eprintln!("note: no single-path outcome is possible; selection table omitted"),
    }
    Ok(t)
}

pub fn phi_sweep(
    ensemble: &PathEnsemble,
    phis: &[f64],
    message_bits: u64,
    eta_max: u64,
) -> Result<Table, CliError> {
    let mut t = Table::new(&["phi", "p_phi_w", "mean_equivocation"]);
    for &phi in phis {
        let p = wiretapped_transmission_prob(ensemble, phi)?;
        t.push(vec![
            num(phi),
            num(p),
            num(mean_equivocation(p, message_bits, eta_max)?),
        ]);
    }
    Ok(t)
}

/// Rows for `w` in `ws`; each averages over all `w`-subsets of `links`.
pub fn w_sweep(
    topology: &Topology,
    ensemble: &PathEnsemble,
    links: &[LinkRef],
    ws: &[u64],
    message_bits: u64,
    eta_max: u64,
) -> Result<Table, CliError> {
    let mut t = Table::new(&["w", "p_w", "mean_equivocation"]);
    for &w in ws {
        let config = ThreatConfig::FixedSet {
            links: links.to_vec(),
            w: Some(w as usize),
        };
        let p = analyze(topology, ensemble, &config)?.aggregate;
        t.push(vec![
            w.to_string(),
            num(p),
            num(mean_equivocation(p, message_bits, eta_max)?),
        ]);
    }
    Ok(t)
}

/// One row per `(η, η_max)` with `η ≤ η_max`; infeasible scenarios become
/// error rows instead of aborting the grid.
pub fn equivocation(message_bits: u64, eta_maxes: &[u64]) -> Table {
    let mut t = Table::new(&[
        "message_bits",
        "eta",
        "eta_max",
        "h_encrypted",
        "h_attacker",
        "normalized_by_he",
        "normalized_by_h",
        "lemma1_holds",
        "error",
    ]);
    for &eta_max in eta_maxes {
        for eta in 0..=eta_max {
            let report =
                SecrecyScenario::new(message_bits, eta, eta_max).and_then(|s| secrecy_report(&s));
            let mut row = vec![
                message_bits.to_string(),
                eta.to_string(),
                eta_max.to_string(),
            ];
            match report {
                Ok(r) => row.extend([
                    num(r.h_encrypted),
                    num(r.h_attacker),
                    num(r.normalized_by_he),
                    num(r.normalized_by_h),
                    r.lemma1_holds.to_string(),
                    String::new(),
                ]),
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 5));
                    row.push(e.to_string());
                }
            }
            t.push(row);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use oor_core::topology::load_bundled;

    #[test]
    fn availability_has_twelve_selection_rows() {
        let e = load_bundled().ensemble(0).unwrap();
        let t = availability(&e).unwrap();
        assert_eq!(t.rows().iter().filter(|r| r[0] == "selection").count(), 12);
        assert_eq!(
            t.rows().iter().filter(|r| r[0] == "prob_exactly").count(),
            13
        );
    }

    #[test]
    fn too_small_scenario_is_an_error_row() {
        let t = equivocation(2, &[9]);
        assert_eq!(t.rows().len(), 10);
        assert!(t.rows().iter().all(|r| !r[8].is_empty()));
        let ok = equivocation(1024, &[0]);
        assert_eq!(ok.rows().len(), 1);
        assert_eq!(ok.rows()[0][3], ok.rows()[0][4]);
    }
}
