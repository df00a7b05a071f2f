//! The identity suite: algebra, spectrum, zero mode, exchange matrix,
//! composite gate, and eigenstate table, each reduced to one worst residual.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI, TAU};

use anyhow::Result;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortexq::{
    anticommutator, build_fock_space, commutator, composite_gate, composite_gate_even,
    couplings_from_angles, eigenstate_table, m31_odd, quasiparticle_ops, FockSpace, MGate,
    Spectrum, StateVector, C64,
};

use crate::config::VerifyConfig;
use crate::reference;
use crate::report::Report;

struct IdentityCheck {
    name: &'static str,
    tol: f64,
    run: fn(&VerifyConfig, &mut ChaCha8Rng) -> vortexq::Result<f64>,
}

const SUITE: &[IdentityCheck] = &[
    IdentityCheck {
        name: "algebra/anticommutators_3_modes",
        tol: 1e-12,
        run: |_, _| anticommutator_residual(3),
    },
    IdentityCheck {
        name: "algebra/anticommutators_4_modes",
        tol: 1e-12,
        run: |_, _| anticommutator_residual(4),
    },
    IdentityCheck {
        name: "spectrum/fourfold_levels",
        tol: 1e-10,
        run: |cfg, rng| sample_cells(cfg, rng, spectrum_residual),
    },
    IdentityCheck {
        name: "spectrum/zero_mode_commutes",
        tol: 1e-12,
        run: |cfg, rng| sample_cells(cfg, rng, zero_mode_residual),
    },
    IdentityCheck {
        name: "spectrum/number_form",
        tol: 1e-12,
        run: |cfg, rng| sample_cells(cfg, rng, number_form_residual),
    },
    IdentityCheck {
        name: "m31/matches_closed_form",
        tol: 1e-10,
        run: |_, _| exchange_residual(),
    },
    IdentityCheck {
        name: "m31/unitarity",
        tol: 1e-12,
        run: |_, _| exchange_unitarity_residual(),
    },
    IdentityCheck {
        name: "composite_gate/block_entries",
        tol: 1e-10,
        run: |cfg, rng| composite_residual(cfg, rng, false),
    },
    IdentityCheck {
        name: "composite_gate/off_diagonal",
        tol: 1e-10,
        run: |cfg, rng| composite_residual(cfg, rng, true),
    },
    IdentityCheck {
        name: "table/amplitudes",
        tol: 1e-10,
        run: |_, _| table_residual(false),
    },
    IdentityCheck {
        name: "table/parity",
        tol: 1e-10,
        run: |_, _| table_residual(true),
    },
];

/// Runs the suite, restricted to checks whose name contains `filter`.
/// Each check draws from its own seeded stream, so filtering one check
/// never shifts another's random samples.
pub fn run(
    cfg: &VerifyConfig,
    seed: u64,
    tol_override: Option<f64>,
    filter: Option<&str>,
) -> Result<Report> {
    let inputs = serde_json::json!({
        "samples": cfg.samples,
        "seed": seed,
        "filter": filter,
    });
    let mut report = Report::new("verify", inputs);
    for (index, check) in SUITE.iter().enumerate() {
        if let Some(needle) = filter {
            if !check.name.contains(needle) {
                continue;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
        let residual = (check.run)(cfg, &mut rng)?;
        report.check_residual(check.name, residual, tol_override.unwrap_or(check.tol));
    }
    Ok(report)
}

fn max_entry(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn anticommutator_residual(n: usize) -> vortexq::Result<f64> {
    let ops = build_fock_space(n)?;
    let dim = ops.space().dim();
    let id2 = DMatrix::<C64>::identity(dim, dim) * C64::new(2.0, 0.0);
    let mut worst = 0.0f64;
    for i in 1..=n {
        for j in 1..=n {
            let pair = anticommutator(&ops.gamma(i)?, &ops.gamma(j)?)?;
            let defect = if i == j {
                max_entry(&(pair.matrix() - &id2))
            } else {
                pair.max_norm()
            };
            worst = worst.max(defect);
        }
    }
    Ok(worst)
}

/// Worst residual of `per_cell` over `samples` random `(J, theta, phi)`.
fn sample_cells(
    cfg: &VerifyConfig,
    rng: &mut ChaCha8Rng,
    per_cell: fn(f64, f64, f64) -> vortexq::Result<f64>,
) -> vortexq::Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..cfg.samples.max(1) {
        let j: f64 = rng.gen_range(0.1..2.0);
        let theta: f64 = rng.gen_range(0.0..PI);
        let phi: f64 = rng.gen_range(0.0..TAU);
        worst = worst.max(per_cell(j, theta, phi)?);
    }
    Ok(worst)
}

fn spectrum_residual(j: f64, theta: f64, phi: f64) -> vortexq::Result<f64> {
    let ops = build_fock_space(3)?;
    let h = couplings_from_angles(j, theta, phi)?.hamiltonian(&ops)?;
    let spectrum = Spectrum::of(&h)?;
    let mut worst = 0.0f64;
    for (k, value) in spectrum.eigenvalues().iter().enumerate() {
        let expected = if k < 4 { -j } else { j };
        worst = worst.max((value - expected).abs());
    }
    Ok(worst)
}

fn zero_mode_residual(j: f64, theta: f64, phi: f64) -> vortexq::Result<f64> {
    let ops = build_fock_space(3)?;
    let h = couplings_from_angles(j, theta, phi)?.hamiltonian(&ops)?;
    let q = quasiparticle_ops(&ops, theta, phi)?;
    Ok(commutator(&h, &q.beta)?.max_norm())
}

fn number_form_residual(j: f64, theta: f64, phi: f64) -> vortexq::Result<f64> {
    let ops = build_fock_space(3)?;
    let h = couplings_from_angles(j, theta, phi)?.hamiltonian(&ops)?;
    let q = quasiparticle_ops(&ops, theta, phi)?;
    let identity = DMatrix::<C64>::identity(8, 8);
    let number_form =
        q.number().matrix() * C64::new(2.0 * j, 0.0) - identity * C64::new(j, 0.0);
    Ok(max_entry(&(h.matrix() - number_form)))
}

const EXCHANGE_ANGLES: [f64; 4] = [0.0, FRAC_PI_6, FRAC_PI_4, 1.0];

fn exchange_residual() -> vortexq::Result<f64> {
    let space = FockSpace::new(3)?;
    let mut worst = 0.0f64;
    for phi in EXCHANGE_ANGLES {
        let projected = m31_odd(space, phi)?;
        let diff = projected.matrix() - reference::exchange_matrix(phi);
        worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(worst)
}

fn exchange_unitarity_residual() -> vortexq::Result<f64> {
    let space = FockSpace::new(3)?;
    let mut worst = 0.0f64;
    for phi in EXCHANGE_ANGLES {
        worst = worst.max(m31_odd(space, phi)?.unitarity_defect());
    }
    Ok(worst)
}

fn composite_residual(
    cfg: &VerifyConfig,
    rng: &mut ChaCha8Rng,
    off_diagonal: bool,
) -> vortexq::Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..cfg.samples.max(1) {
        let eta: f64 = rng.gen_range(-PI..PI);
        let phi: f64 = rng.gen_range(-PI..PI);
        let upper = MGate::new(eta, phi).matrix();
        let lower = MGate::new(-eta, phi).matrix();
        for gate in [composite_gate(eta, phi)?, composite_gate_even(eta, phi)?] {
            if off_diagonal {
                worst = worst.max(gate.block_offdiagonal_defect());
            } else {
                for diff in [
                    gate.upper_left_block() - upper,
                    gate.lower_right_block() - lower,
                ] {
                    worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
                }
            }
        }
    }
    Ok(worst)
}

fn table_residual(parity: bool) -> vortexq::Result<f64> {
    let ops = build_fock_space(3)?;
    let mut worst = 0.0f64;
    for phi in [0.0, 0.9] {
        let table = eigenstate_table(&ops, phi)?;
        for (label, _, sector, entries) in reference::eigenstate_rows(phi) {
            let entry = table.get(label).expect("fixed labels");
            if parity {
                worst = worst
                    .max((entry.state.parity_expectation() - f64::from(sector)).abs());
            } else {
                let mut amplitudes =
                    nalgebra::DVector::<C64>::zeros(ops.space().dim());
                for (index, value) in entries {
                    amplitudes[index] = value;
                }
                let reference = StateVector::from_amplitudes(ops.space(), amplitudes)?;
                worst = worst.max(entry.state.max_diff(&reference));
            }
        }
    }
    Ok(worst)
}
