//! Gate synthesis scenario: factor a 2x2 unitary into at most three
//! exchange-and-dwell gates and report the angle sequence and fidelity.

use anyhow::{bail, Result};
use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortexq::{compose_m_gates, decompose_su2, gate_fidelity, C64};

use crate::config::SynthesizeConfig;
use crate::report::{complex_rows, real_rows, Report};

const UNITARITY_TOL: f64 = 1e-8;
const INFIDELITY_TOL: f64 = 1e-9;
const FACTOR_BUDGET: f64 = 3.0;

enum Source {
    Flag,
    Config,
    Random,
}

pub fn run(
    target_flag: Option<&[f64]>,
    cfg: &SynthesizeConfig,
    seed: u64,
    tol_override: Option<f64>,
) -> Result<Report> {
    let (target, source) = match (target_flag, &cfg.target) {
        (Some(entries), _) => {
            if entries.len() != 8 || entries.iter().any(|x| !x.is_finite()) {
                bail!("--target needs 8 finite numbers: re,im of the four row-major entries");
            }
            let c = |k: usize| C64::new(entries[2 * k], entries[2 * k + 1]);
            (Matrix2::new(c(0), c(1), c(2), c(3)), Source::Flag)
        }
        (None, Some(pairs)) => {
            let c = |k: usize| C64::new(pairs[k][0], pairs[k][1]);
            (Matrix2::new(c(0), c(1), c(2), c(3)), Source::Config)
        }
        (None, None) => (haar_su2(&mut ChaCha8Rng::seed_from_u64(seed)), Source::Random),
    };

    let unitarity = unitarity_defect(&target);
    if unitarity > UNITARITY_TOL {
        bail!("target is not unitary: defect {unitarity:.3e} exceeds {UNITARITY_TOL:.0e}");
    }

    let sequence = decompose_su2(&target)?;
    let reconstruction = compose_m_gates(&sequence);
    let fid = gate_fidelity(&reconstruction, &target);

    let inputs = serde_json::json!({
        "seed": seed,
        "target_source": match source {
            Source::Flag => "flag",
            Source::Config => "config",
            Source::Random => "seeded_random",
        },
        "factors": sequence.len(),
    });
    let mut report = Report::new("synthesize", inputs);
    report.matrix("target", complex_rows(&target));
    report.matrix("reconstruction", complex_rows(&reconstruction));
    let angle_rows: Vec<Vec<f64>> = sequence.iter().map(|g| vec![g.eta, g.phi]).collect();
    report.matrix("sequence_angles", real_rows(&angle_rows));
    for (k, gate) in sequence.iter().enumerate() {
        report.matrix(&format!("factor_{}", k + 1), complex_rows(&gate.matrix()));
    }
    report.check_residual(
        "target_unitarity",
        unitarity,
        tol_override.unwrap_or(UNITARITY_TOL),
    );
    report.check_residual("factor_budget", sequence.len() as f64, FACTOR_BUDGET);
    report.check_residual(
        "reconstruction_infidelity",
        1.0 - fid,
        tol_override.unwrap_or(INFIDELITY_TOL),
    );
    report.fidelity("reconstruction", fid);
    Ok(report)
}

fn unitarity_defect(m: &Matrix2<C64>) -> f64 {
    let gram = m.adjoint() * m;
    let identity = Matrix2::<C64>::identity();
    (gram - identity).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn haar_su2(rng: &mut ChaCha8Rng) -> Matrix2<C64> {
    let sample: [f64; 4] = std::array::from_fn(|_| {
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        (-2.0 * u.ln()).sqrt() * v.cos()
    });
    let norm = sample.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a = C64::new(sample[0] / norm, sample[1] / norm);
    let b = C64::new(sample[2] / norm, sample[3] / norm);
    Matrix2::new(a, b, -b.conj(), a.conj())
}
