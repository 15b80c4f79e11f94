//! `oor`: closed-form analyses, Monte Carlo runs and figure data for
//! optical onion routing.

mod analysis;
mod error;
mod input;
mod keygen;
mod reproduce;
mod simulate;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oor_core::circuit_sim::KeyPolicy;
use oor_core::threat::ThreatConfig;
use oor_core::topology::{parse_link_list, LinkRef};

use error::CliError;
use simulate::{Experiment, Manifest};

#[derive(Debug, Parser)]
#[command(
    name = "oor",
    version,
    about = "Optical onion routing analyses and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Data {
    /// Topology document (JSON); defaults to the bundled 24-node network.
    #[arg(long, value_name = "PATH")]
    topology: Option<PathBuf>,
    /// Ensemble index or `SOURCE-DEST`.
    #[arg(long, value_name = "NAME")]
    ensemble: Option<String>,
}

#[derive(Debug, Args)]
struct Threat {
    /// Per-link wiretap probability.
    #[arg(long, conflicts_with_all = ["phi_sweep", "wiretap_links"])]
    phi: Option<f64>,
    /// Sweep of phi values, `A:B:STEP`.
    #[arg(long, value_name = "A:B:STEP", conflicts_with = "wiretap_links")]
    phi_sweep: Option<String>,
    /// Fixed wiretap set, e.g. `3-7,8-9`.
    #[arg(long, value_name = "LIST")]
    wiretap_links: Option<String>,
    /// Subset sizes `A:B` drawn from the wiretap set; defaults to the whole set.
    #[arg(long, value_name = "A:B", requires = "wiretap_links")]
    w_sweep: Option<String>,
}

#[derive(Debug, Args)]
struct Out {
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Availability distribution, blocking probability and selection table.
    AnalyzeAvailability {
        #[command(flatten)]
        data: Data,
        #[command(flatten)]
        out: Out,
    },
    /// Wiretap probability over a phi sweep or a fixed-set sweep.
    AnalyzeThreat {
        #[command(flatten)]
        data: Data,
        #[command(flatten)]
        threat: Threat,
        #[arg(long, value_name = "L", default_value_t = 1024)]
        message_bits: u64,
        #[arg(long, value_name = "N", default_value_t = 9)]
        eta_max: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Normalized equivocation for every eta up to each eta_max.
    AnalyzeEquivocation {
        #[arg(long, value_name = "L", default_value_t = 1024)]
        message_bits: u64,
        #[arg(
            long,
            value_name = "N",
            default_value_t = 9,
            conflicts_with = "eta_sweep"
        )]
        eta_max: u64,
        /// Range of eta_max values, `A:B`.
        #[arg(long, value_name = "A:B")]
        eta_sweep: Option<String>,
        #[command(flatten)]
        out: Out,
    },
    /// Monte Carlo estimate against the closed forms.
    Simulate {
        /// Experiment document (JSON); flags override its fields.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[command(flatten)]
        data: Data,
        #[command(flatten)]
        threat: Threat,
        #[arg(long, value_name = "N")]
        eta_max: Option<usize>,
        #[arg(long, value_name = "L")]
        message_bits: Option<usize>,
        #[arg(long, value_name = "N")]
        trials: Option<u64>,
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
        /// Per-trial dump (CSV).
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Random LFSR session keys with distinct keystreams.
    Keygen {
        #[arg(long, value_name = "L", default_value_t = 64)]
        message_bits: u64,
        #[arg(long, value_name = "N", default_value_t = 1)]
        count: usize,
        /// Degrees are drawn from g_min..=g_min+SPAN.
        #[arg(long, value_name = "SPAN", default_value_t = 3)]
        degree_span: u32,
        #[arg(long, value_name = "N", default_value_t = 2024)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Figure data and the pass/fail summary for the evaluation network.
    ReproducePaper {
        #[command(flatten)]
        data: Data,
        #[arg(long, value_name = "LIST", default_value = reproduce::EVALUATION_LINKS)]
        wiretap_links: String,
        #[arg(long, value_name = "L", default_value_t = 1024)]
        message_bits: u64,
        #[arg(long, value_name = "N", default_value_t = 9)]
        eta_max: u64,
        #[arg(long, value_name = "N", default_value_t = 100_000)]
        trials: u64,
        #[arg(long, value_name = "N", default_value_t = 2024)]
        seed: u64,
        /// Output directory.
        #[arg(long, value_name = "DIR", default_value = "figure-data")]
        out: PathBuf,
    },
}

fn links(list: &str) -> Result<Vec<LinkRef>, CliError> {
    parse_link_list(list).map_err(|e| CliError::Input(format!("--wiretap-links: {e}")))
}

/// Threat configurations requested on the command line, if any.
fn threats(t: &Threat) -> Result<Option<Vec<ThreatConfig>>, CliError> {
    if let Some(list) = &t.wiretap_links {
        let links = links(list)?;
        let ws = match &t.w_sweep {
            Some(s) => input::int_sweep(s)?
                .into_iter()
                .map(|w| Some(w as usize))
                .collect(),
            None => vec![None],
        };
        return Ok(Some(
            ws.into_iter()
                .map(|w| ThreatConfig::FixedSet {
                    links: links.clone(),
                    w,
                })
                .collect(),
        ));
    }
    let phis = match (t.phi, &t.phi_sweep) {
        (Some(phi), _) => vec![phi],
        (None, Some(s)) => input::float_sweep(s)?,
        (None, None) => return Ok(None),
    };
    Ok(Some(
        phis.into_iter()
            .map(|phi| ThreatConfig::Probabilistic { phi })
            .collect(),
    ))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::AnalyzeAvailability { data, out } => {
            let t = input::load(data.topology.as_deref())?;
            let e = input::ensemble(&t, data.ensemble.as_deref())?;
            analysis::availability(&e)?.emit(out.out.as_deref())
        }
        Command::AnalyzeThreat {
            data,
            threat,
            message_bits,
            eta_max,
            out,
        } => {
            let t = input::load(data.topology.as_deref())?;
            let e = input::ensemble(&t, data.ensemble.as_deref())?;
            let table = match &threat.wiretap_links {
                Some(list) => {
                    let links = links(list)?;
                    let ws = match &threat.w_sweep {
                        Some(s) => input::int_sweep(s)?,
                        None => (1..=links.len() as u64).collect(),
                    };
                    analysis::w_sweep(&t, &e, &links, &ws, message_bits, eta_max)?
                }
                None => {
                    let phis = match (threat.phi, &threat.phi_sweep) {
                        (Some(phi), _) => vec![phi],
                        (None, Some(s)) => input::float_sweep(s)?,
                        (None, None) => input::float_sweep("0:0.5:0.05")?,
                    };
                    analysis::phi_sweep(&e, &phis, message_bits, eta_max)?
                }
            };
            table.emit(out.out.as_deref())
        }
        Command::AnalyzeEquivocation {
            message_bits,
            eta_max,
            eta_sweep,
            out,
        } => {
            let eta_maxes = match eta_sweep {
                Some(s) => input::int_sweep(&s)?,
                None => vec![eta_max],
            };
            analysis::equivocation(message_bits, &eta_maxes).emit(out.out.as_deref())
        }
        Command::Simulate {
            config,
            data,
            threat,
            eta_max,
            message_bits,
            trials,
            seed,
            trace,
            out,
        } => {
            let m = match &config {
                Some(p) => Manifest::read(p)?,
                None => Manifest::default(),
            };
            let topology_path = data.topology.or(m.topology);
            let t = input::load(topology_path.as_deref())?;
            let e = input::ensemble(&t, data.ensemble.as_deref().or(m.ensemble.as_deref()))?;
            let configs = match threats(&threat)? {
                Some(c) => c,
                None => vec![m.threat.ok_or_else(|| {
                    CliError::Input(
                        "no threat given: use --phi, --phi-sweep, --wiretap-links or a config"
                            .into(),
                    )
                })?],
            };
            let keys = KeyPolicy {
                message_bits: message_bits
                    .or(m.message_bits)
                    .unwrap_or(KeyPolicy::default().message_bits),
                ..KeyPolicy::default()
            };
            let x = Experiment {
                topology: &t,
                ensemble: &e,
                eta_max: eta_max.or(m.eta_max).unwrap_or(9),
                keys,
                trials: trials.or(m.trials).unwrap_or(100_000),
                seed: seed.or(m.seed).unwrap_or(2024),
            };
            let outcomes = configs
                .iter()
                .map(|c| simulate::run(&x, c, trace.is_some()))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(p) = &trace {
                simulate::trace_table(&outcomes).emit(Some(p))?;
            }
            simulate::table(&x, &outcomes).emit(out.out.as_deref())
        }
        Command::Keygen {
            message_bits,
            count,
            degree_span,
            seed,
            out,
        } => keygen::keygen(message_bits, count, degree_span, seed)?.emit(out.out.as_deref()),
        Command::ReproducePaper {
            data,
            wiretap_links,
            message_bits,
            eta_max,
            trials,
            seed,
            out,
        } => {
            let t = input::load(data.topology.as_deref())?;
            let e = input::ensemble(&t, data.ensemble.as_deref())?;
            let settings = reproduce::Settings {
                topology: &t,
                ensemble: &e,
                links: links(&wiretap_links)?,
                message_bits,
                eta_max,
                trials,
                seed,
            };
            let checks = reproduce::reproduce(&settings, &out)?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            for c in &checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                println!("[{tag}] {}: {}", c.name, c.detail);
            }
            println!(
                "{} of {} checks passed; tables in {}",
                checks.len() - failed,
                checks.len(),
                out.display()
            );
            if failed > 0 {
                return Err(CliError::ChecksFailed {
                    failed,
                    total: checks.len(),
                });
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("oor: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
