//! Machine-readable scenario reports.
//!
//! The JSON schema is stable: `scenario`, `inputs`, `matrices` (row-major
//! `[re, im]` pairs), `checks` (`{name, value, tol, pass}` each), `fidelities`,
//! `duration_ms`. Field order and the sorted maps make a report byte-identical
//! across reruns with the same config and seed, with `duration_ms` the single
//! wall-clock exception.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use nalgebra::{Dim, Matrix, Storage};
use serde::Serialize;
use vortexq::C64;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub inputs: serde_json::Value,
    pub matrices: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    pub checks: Vec<Check>,
    pub fidelities: BTreeMap<String, f64>,
    pub duration_ms: u64,
}

impl Report {
    pub fn new(scenario: &str, inputs: serde_json::Value) -> Self {
        Self {
            scenario: scenario.to_string(),
            inputs,
            matrices: BTreeMap::new(),
            checks: Vec::new(),
            fidelities: BTreeMap::new(),
            duration_ms: 0,
        }
    }

    /// Residual-style check: passes when `value <= tol`.
    pub fn check_residual(&mut self, name: &str, value: f64, tol: f64) {
        self.checks.push(Check {
            name: name.to_string(),
            value,
            tol,
            pass: value <= tol,
        });
    }

    /// Floor-style check: passes when `value >= tol`.
    pub fn check_floor(&mut self, name: &str, value: f64, tol: f64) {
        self.checks.push(Check {
            name: name.to_string(),
            value,
            tol,
            pass: value >= tol,
        });
    }

    pub fn fidelity(&mut self, name: &str, value: f64) {
        self.fidelities.insert(name.to_string(), value);
    }

    pub fn matrix(&mut self, name: &str, rows: Vec<Vec<[f64; 2]>>) {
        self.matrices.insert(name.to_string(), rows);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Row-major `[re, im]` serialization of any complex matrix.
pub fn complex_rows<R, C, S>(m: &Matrix<C64, R, C, S>) -> Vec<Vec<[f64; 2]>>
where
    R: Dim,
    C: Dim,
    S: Storage<C64, R, C>,
{
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Real rows wrapped as complex pairs with zero imaginary part.
pub fn real_rows(rows: &[Vec<f64>]) -> Vec<Vec<[f64; 2]>> {
    rows.iter()
        .map(|row| row.iter().map(|&x| [x, 0.0]).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stdout {
    Human,
    Json,
    Csv,
}

/// Decimal with 15 significant digits, the trace and CSV number format.
pub fn sig15(x: f64) -> String {
    format!("{x:.14e}")
}

/// Writes the JSON file when requested and renders the report to stdout.
pub fn emit(report: &Report, mode: Stdout, out: Option<&Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(report).context("serializing report")?;
    if let Some(path) = out {
        std::fs::write(path, format!("{json}\n"))
            .with_context(|| format!("writing report {}", path.display()))?;
    }
    match mode {
        Stdout::Json => println!("{json}"),
        Stdout::Csv => {
            println!("name,value,tol,pass");
            for c in &report.checks {
                println!("{},{},{},{}", c.name, sig15(c.value), sig15(c.tol), c.pass);
            }
        }
        Stdout::Human => {
            println!("scenario: {}", report.scenario);
            for c in &report.checks {
                let flag = if c.pass { "PASS" } else { "FAIL" };
                println!("  [{flag}] {:<42} value {:>12.5e}  tol {:.1e}", c.name, c.value, c.tol);
            }
            for (name, value) in &report.fidelities {
                println!("  fidelity {name} = {value:.12}");
            }
            let passed = report.checks.iter().filter(|c| c.pass).count();
            let overall = if report.all_pass() { "PASS" } else { "FAIL" };
            println!(
                "result: {overall} ({passed}/{} checks, {} ms)",
                report.checks.len(),
                report.duration_ms
            );
        }
    }
    Ok(())
}
