//! Dataset loading and flag parsing shared by every command.

use std::path::{Path, PathBuf};

use oor_core::topology::{
    bundled_document, load_topology, PathEnsemble, Topology, BUNDLED_FILE_NAME,
};

use crate::error::CliError;

pub const DATA_DIR_ENV: &str = "OOR_DATA_DIR";

/// `--topology` wins, then `$OOR_DATA_DIR/<bundled file>`, then the copy
/// compiled into the binary.
pub fn load(topology: Option<&Path>) -> Result<Topology, CliError> {
    let path = match topology {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(DATA_DIR_ENV).map(|d| PathBuf::from(d).join(BUNDLED_FILE_NAME)),
    };
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
            load_topology(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
        None => Ok(load_topology(bundled_document())?),
    }
}

/// Ensemble by position (`0`) or by endpoints (`1-5`); the first one when
/// no name is given.
pub fn ensemble(topology: &Topology, name: Option<&str>) -> Result<PathEnsemble, CliError> {
    let index = match name {
        None => 0,
        Some(n) => match n.split_once('-') {
            Some((s, d)) => {
                let s: u32 = parse_num(s, "ensemble source")?;
                let d: u32 = parse_num(d, "ensemble destination")?;
                topology
                    .ensembles()
                    .iter()
                    .position(|e| e.source == s && e.dest == d)
                    .ok_or_else(|| CliError::Input(format!("no ensemble from {s} to {d}")))?
            }
            None => parse_num(n, "ensemble index")?,
        },
    };
    if index >= topology.ensembles().len() {
        return Err(CliError::Input(format!(
            "ensemble {index} requested, topology defines {}",
            topology.ensembles().len()
        )));
    }
    Ok(topology.ensemble(index)?)
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Input(format!("{what}: cannot parse {s:?}")))
}

/// `A:B:STEP`, inclusive of `B` up to rounding.
pub fn float_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, step] = parts[..] else {
        return Err(CliError::Input(format!("sweep {spec:?} is not A:B:STEP")));
    };
    let (a, b, step): (f64, f64, f64) = (
        parse_num(a, "sweep start")?,
        parse_num(b, "sweep end")?,
        parse_num(step, "sweep step")?,
    );
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
        return Err(CliError::Input(format!(
            "sweep {spec:?} is empty or unbounded"
        )));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// `A:B` or `A:B:STEP` over integers, inclusive.
pub fn int_sweep(spec: &str) -> Result<Vec<u64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let (a, b, step) = match parts[..] {
        [a] => {
            let v = parse_num(a, "sweep value")?;
            (v, v, 1)
        }
        [a, b] => (parse_num(a, "sweep start")?, parse_num(b, "sweep end")?, 1),
        [a, b, s] => (
            parse_num(a, "sweep start")?,
            parse_num(b, "sweep end")?,
            parse_num(s, "sweep step")?,
        ),
        _ => return Err(CliError::Input(format!("sweep {spec:?} is not A:B[:STEP]"))),
    };
    if step == 0 || b < a {
        return Err(CliError::Input(format!("sweep {spec:?} is empty")));
    }
    Ok((a..=b).step_by(step as usize).collect())
}
