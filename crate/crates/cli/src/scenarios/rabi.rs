//! Resonant-drive scenario: transfer table for the four ground/excited
//! pairs, plus a population trace embedded in the report and optionally
//! written as CSV.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use vortexq::{
    build_fock_space, evolve_schedule, rabi_schedule, rabi_transition_check, EvolutionTrace,
    RABI_PAIRS,
};

use crate::config::RabiConfig;
use crate::report::{real_rows, sig15, Report};

const PARITY_DRIFT_TOL: f64 = 1e-9;
const CROSS_LEAKAGE_TOL: f64 = 1e-6;
const ZERO_TRANSFER_TOL: f64 = 1e-9;
/// Drive amplitudes above this fraction of the splitting draw a warning.
const PERTURBATIVE_RATIO: f64 = 0.2;

pub fn run(cfg: &RabiConfig, trace_path: Option<&Path>, tol_override: Option<f64>) -> Result<Report> {
    let RabiConfig {
        omega,
        delta_j,
        steps_per_drive_period,
        transfer_min,
        trace_samples,
    } = *cfg;
    if delta_j.abs() / omega > PERTURBATIVE_RATIO {
        eprintln!(
            "warning: delta_j/omega = {:.3} exceeds {PERTURBATIVE_RATIO}; \
             the drive is outside the perturbative regime",
            delta_j.abs() / omega
        );
    }

    let ops = build_fock_space(3)?;
    let schedule = rabi_schedule(omega, delta_j, steps_per_drive_period)?;
    let inputs = serde_json::json!({
        "omega": omega,
        "delta_j": delta_j,
        "steps_per_drive_period": steps_per_drive_period,
        "duration": schedule.duration(),
        "transfer_min": transfer_min,
    });
    let mut report = Report::new("rabi", inputs);

    let results = rabi_transition_check(&ops, omega, delta_j, steps_per_drive_period)?;
    for r in &results {
        let pair = format!("{}_to_{}", r.ground, r.excited);
        report.fidelity(&format!("transfer_{pair}"), r.max_transfer);
        if delta_j == 0.0 {
            report.check_residual(
                &format!("transfer_zero/{pair}"),
                r.max_transfer,
                tol_override.unwrap_or(ZERO_TRANSFER_TOL),
            );
        } else {
            report.check_floor(&format!("transfer/{pair}"), r.max_transfer, transfer_min);
        }
        report.check_residual(
            &format!("parity_drift/{}", r.ground),
            r.parity_drift,
            tol_override.unwrap_or(PARITY_DRIFT_TOL),
        );
        report.check_residual(
            &format!("cross_parity_leakage/{}", r.ground),
            r.cross_parity_leakage,
            tol_override.unwrap_or(CROSS_LEAKAGE_TOL),
        );
    }

    // One full trace from the first pair's ground state feeds both the
    // embedded samples and the CSV artifact.
    let table = vortexq::eigenstate_table(&ops, 0.0)?;
    let start = table.get(RABI_PAIRS[0].0).expect("fixed label").state.clone();
    let trace = evolve_schedule(&ops, &schedule, &start)?;
    report.matrix(
        "trace_samples",
        real_rows(&downsample(&trace, trace_samples.max(2))),
    );
    if let Some(path) = trace_path {
        write_csv(&trace, path)?;
    }
    Ok(report)
}

/// Rows `[t, populations...]`, thinned to about `count` evenly spaced samples.
fn downsample(trace: &EvolutionTrace, count: usize) -> Vec<Vec<f64>> {
    let times = trace.times();
    let stride = (times.len().saturating_sub(1) / (count - 1)).max(1);
    let mut rows = Vec::new();
    let mut k = 0;
    while k < times.len() {
        let mut row = vec![times[k]];
        row.extend(trace.populations()[k].iter().copied());
        rows.push(row);
        if k == times.len() - 1 {
            break;
        }
        k = (k + stride).min(times.len() - 1);
    }
    rows
}

fn write_csv(trace: &EvolutionTrace, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating trace file {}", path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "t,{}", trace.labels().join(","))?;
    for (t, row) in trace.times().iter().zip(trace.populations()) {
        let values: Vec<String> = row.iter().map(|&p| sig15(p)).collect();
        writeln!(out, "{},{}", sig15(*t), values.join(","))?;
    }
    Ok(())
}
