//! Scenario runner for the vortex Majorana qubit simulator.
//!
//! Exit status: 0 when every enabled check passes, 1 when a check fails,
//! 2 on usage, config, or validation errors.

mod config;
mod reference;
mod report;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{RunConfig, DEFAULT_SEED};
use report::{emit, Report, Stdout};

#[derive(Parser)]
#[command(
    name = "vortexq",
    version,
    about = "Simulator scenarios for qubits built from vortex Majorana modes"
)]
struct Cli {
    /// TOML config with one section per scenario.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed for randomized suites.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Replace the tolerance of every residual check.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Print the JSON report to stdout instead of the summary.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Print the checks as CSV to stdout instead of the summary.
    #[arg(long, global = true)]
    csv: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suite: algebra, spectrum, zero mode, exchange
    /// matrix, composite gate, eigenstate table.
    Verify {
        /// Run only checks whose name contains this substring.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Print the continuous gate M(eta, phi), its 4x4 composite, and the
    /// exchange-dwell-exchange schedule realizing it.
    Gate {
        #[arg(allow_hyphen_values = true)]
        eta: f64,
        #[arg(allow_hyphen_values = true)]
        phi: f64,
        /// Further gates multiplied on the right, listed as ETA,PHI.
        #[arg(long, value_name = "ETA,PHI", allow_hyphen_values = true)]
        compose: Vec<String>,
    },
    /// Factor a 2x2 unitary into at most three continuous gates.
    Synthesize {
        /// Row-major target entries: re,im,re,im,re,im,re,im.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        target: Option<Vec<f64>>,
    },
    /// Drive the four ground/excited pairs resonantly and report transfers.
    Rabi {
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        delta_j: Option<f64>,
        /// Integration steps per drive period.
        #[arg(long)]
        steps: Option<usize>,
        /// Write the full population trace as CSV.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Run the two-qubit entangling protocol.
    Entangle {
        #[arg(allow_hyphen_values = true)]
        j12: Option<f64>,
        #[arg(allow_hyphen_values = true)]
        j1p2p: Option<f64>,
        #[arg(allow_hyphen_values = true)]
        j11p: Option<f64>,
        /// Coupling-hierarchy ratio floor.
        #[arg(long)]
        threshold: Option<f64>,
        /// Sweep the inter-qubit coupling, e.g. J11p=0.2,0.1,0.05,0.02.
        #[arg(long, value_name = "J11p=V1,V2,...")]
        sweep: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let out = cli.out.clone().or_else(|| cfg.out.clone());
    let mode = if cli.json {
        Stdout::Json
    } else if cli.csv {
        Stdout::Csv
    } else {
        Stdout::Human
    };

    let started = Instant::now();
    let mut report: Report = match &cli.command {
        Command::Verify { filter } => {
            scenarios::verify::run(&cfg.verify, seed, cli.tol, filter.as_deref())?
        }
        Command::Gate { eta, phi, compose } => {
            let pairs: Vec<(f64, f64)> = compose
                .iter()
                .map(|raw| scenarios::gate::parse_angle_pair(raw))
                .collect::<Result<_>>()?;
            scenarios::gate::run(*eta, *phi, &pairs, &cfg.gate, cli.tol)?
        }
        Command::Synthesize { target } => {
            scenarios::synthesize::run(target.as_deref(), &cfg.synthesize, seed, cli.tol)?
        }
        Command::Rabi {
            omega,
            delta_j,
            steps,
            trace,
        } => {
            let mut rabi_cfg = cfg.rabi.clone();
            if let Some(v) = omega {
                rabi_cfg.omega = *v;
            }
            if let Some(v) = delta_j {
                rabi_cfg.delta_j = *v;
            }
            if let Some(v) = steps {
                rabi_cfg.steps_per_drive_period = *v;
            }
            scenarios::rabi::run(&rabi_cfg, trace.as_deref(), cli.tol)?
        }
        Command::Entangle {
            j12,
            j1p2p,
            j11p,
            threshold,
            sweep,
        } => {
            let mut ent_cfg = cfg.entangle.clone();
            if let Some(v) = j12 {
                ent_cfg.j12 = *v;
            }
            if let Some(v) = j1p2p {
                ent_cfg.j1p2p = *v;
            }
            if let Some(v) = j11p {
                ent_cfg.j11p = *v;
            }
            if let Some(v) = threshold {
                ent_cfg.threshold = *v;
            }
            match sweep {
                Some(raw) => {
                    let values = scenarios::entangle::parse_sweep(raw)?;
                    scenarios::entangle::run_sweep(&ent_cfg, &values)?
                }
                None => scenarios::entangle::run(&ent_cfg, cli.tol)?,
            }
        }
    };
    report.duration_ms = started.elapsed().as_millis() as u64;
    emit(&report, mode, out.as_deref())?;
    Ok(report.all_pass())
}
