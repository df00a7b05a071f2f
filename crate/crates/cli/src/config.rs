//! TOML run configuration: one section per scenario, unknown keys rejected,
//! complex entries serialized as `[re, im]` pairs.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

/// Fixed default seed for every randomized suite.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Seed for randomized suites; the `--seed` flag wins over this.
    pub seed: Option<u64>,
    /// Report file path; the `--out` flag wins over this.
    pub out: Option<PathBuf>,
    pub verify: VerifyConfig,
    pub gate: GateConfig,
    pub synthesize: SynthesizeConfig,
    pub rabi: RabiConfig,
    pub entangle: EntangleConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Random parameter draws per randomized identity check.
    pub samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { samples: 10 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateConfig {
    /// Level splitting used to convert the dwell angle into a dwell time.
    pub omega: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self { omega: 1.0 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesizeConfig {
    /// Row-major 2x2 target, four `[re, im]` pairs. Absent means a seeded
    /// random target.
    pub target: Option<[[f64; 2]; 4]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RabiConfig {
    pub omega: f64,
    pub delta_j: f64,
    pub steps_per_drive_period: usize,
    /// Floor for each pair's peak transfer when the drive is on.
    pub transfer_min: f64,
    /// Rows of the downsampled trace embedded in the report.
    pub trace_samples: usize,
}

impl Default for RabiConfig {
    fn default() -> Self {
        Self {
            omega: 1.0,
            delta_j: 0.02,
            steps_per_drive_period: vortexq::DEFAULT_STEPS_PER_DRIVE_PERIOD,
            transfer_min: 0.99,
            trace_samples: 33,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntangleConfig {
    pub j12: f64,
    pub j1p2p: f64,
    pub j11p: f64,
    /// Floor for both coupling-hierarchy ratios.
    pub threshold: f64,
    /// Floor for the protocol's Bell fidelity check.
    pub fidelity_min: f64,
}

impl Default for EntangleConfig {
    fn default() -> Self {
        Self {
            j12: 1.0,
            j1p2p: 1.0,
            j11p: 0.02,
            threshold: 20.0,
            fidelity_min: 0.99,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let config = match path {
            None => Self::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                toml::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        let named: [(&str, f64); 9] = [
            ("gate.omega", self.gate.omega),
            ("rabi.omega", self.rabi.omega),
            ("rabi.delta_j", self.rabi.delta_j),
            ("rabi.transfer_min", self.rabi.transfer_min),
            ("entangle.j12", self.entangle.j12),
            ("entangle.j1p2p", self.entangle.j1p2p),
            ("entangle.j11p", self.entangle.j11p),
            ("entangle.threshold", self.entangle.threshold),
            ("entangle.fidelity_min", self.entangle.fidelity_min),
        ];
        for (name, value) in named {
            if !value.is_finite() {
                bail!("config value {name} must be finite, got {value}");
            }
        }
        if let Some(target) = &self.synthesize.target {
            for pair in target.iter().flatten() {
                if !pair.is_finite() {
                    bail!("config value synthesize.target must be finite, got {pair}");
                }
            }
        }
        Ok(())
    }
}
