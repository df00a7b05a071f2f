//! Inter-vortex coupling Hamiltonians and the quasiparticle structure of a
//! three-vortex cell.
//!
//! Tunneling between the core modes of vortices `a` and `b` contributes a
//! term `i J_ab gamma_a gamma_b` to the Hamiltonian. A set of such terms is
//! a [`CouplingSet`]; [`build_hamiltonian`] turns it into a dense Hermitian
//! operator. The three-vortex cell gets its own [`ThreeVortexCouplings`]
//! wrapper with the spherical parametrization
//!
//! ```text
//! (J_23, J_31, J_12) = J (sin t cos p, sin t sin p, cos t)
//! ```
//!
//! in terms of the magnitude `J` and angles `(t, p)`. In those variables the
//! cell Hamiltonian is `H = J (2 a^dag a - 1)` for the quasiparticle mode
//! returned by [`quasiparticle_ops`], with a third Majorana combination
//! `beta` that commutes with `H` and makes every level doubly degenerate per
//! parity sector.

use nalgebra::{DMatrix, DVector};

use crate::clifford::{check_same_space, FockOps, Operator, StateVector, C64};
use crate::error::Error;
use crate::Result;

/// Tolerance for grouping eigenvalues into degenerate levels, relative to
/// the spectral scale.
const LEVEL_GROUP_TOL: f64 = 1e-9;

/// Gap threshold (relative to the spectral scale) joining eigenvalues of the
/// real embedding into one degenerate cluster during eigenvector extraction.
/// The embedding repeats every eigenvalue with splits at machine level, a few
/// orders below this; genuinely distinct levels sit far above it.
const EXTRACT_CLUSTER_TOL: f64 = 1e-12;

/// Convergence threshold for the Jacobi eigensolver: off-diagonal Frobenius
/// norm relative to the matrix Frobenius norm.
const JACOBI_TOL: f64 = 1e-15;

/// Sweep budget for the Jacobi eigensolver. Cyclic Jacobi converges
/// quadratically once the off-diagonal mass is small; a matrix of this size
/// finishes in well under ten sweeps.
const JACOBI_MAX_SWEEPS: usize = 64;

/// Diagonalizes a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns unsorted eigenvalues and the orthogonal matrix of matching
/// eigenvector columns. Jacobi is used instead of a library eigensolver
/// because it stays accurate on heavily degenerate spectra, which this
/// module produces constantly.
fn jacobi_symmetric(mut a: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut v = DMatrix::<f64>::identity(n, n);
    let frobenius = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = JACOBI_TOL * frobenius;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)] * a[(p, q)])
            .sum::<f64>()
            .sqrt();
        if off <= stop {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                // Smaller root of t^2 + 2 tau t - 1 = 0: the rotation angle
                // stays below pi/4, which keeps the iteration stable.
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(p, k)] = a[(k, p)];
                    a[(k, q)] = s * akp + c * akq;
                    a[(q, k)] = a[(k, q)];
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

/// One tunneling term `i J gamma_a gamma_b`, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingTerm {
    pub a: usize,
    pub b: usize,
    pub strength: f64,
}

/// A set of pairwise tunneling terms defining `H = sum i J_ab gamma_a gamma_b`.
///
/// Terms are normalized to `a < b` on insertion; since
/// `gamma_b gamma_a = -gamma_a gamma_b`, a term given as `(b, a, J)` is
/// stored as `(a, b, -J)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CouplingSet {
    terms: Vec<CouplingTerm>,
}

impl CouplingSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set from `(a, b, strength)` triples.
    pub fn with_terms(terms: &[(usize, usize, f64)]) -> Result<Self> {
        let mut set = Self::new();
        for &(a, b, j) in terms {
            set.push(a, b, j)?;
        }
        Ok(set)
    }

    /// Adds the term `i J gamma_a gamma_b`, folding it to `a < b` order.
    pub fn push(&mut self, a: usize, b: usize, strength: f64) -> Result<()> {
        if !strength.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if a == b {
            return Err(Error::IdenticalVortices(a));
        }
        let term = if a < b {
            CouplingTerm { a, b, strength }
        } else {
            CouplingTerm {
                a: b,
                b: a,
                strength: -strength,
            }
        };
        self.terms.push(term);
        Ok(())
    }

    pub fn terms(&self) -> &[CouplingTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Couplings of the three-vortex cell, one per vortex pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeVortexCouplings {
    pub j12: f64,
    pub j23: f64,
    pub j31: f64,
}

impl ThreeVortexCouplings {
    pub fn new(j12: f64, j23: f64, j31: f64) -> Result<Self> {
        if !(j12.is_finite() && j23.is_finite() && j31.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { j12, j23, j31 })
    }

    /// Coupling magnitude `J = sqrt(J_12^2 + J_23^2 + J_31^2)`.
    pub fn magnitude(&self) -> f64 {
        (self.j12 * self.j12 + self.j23 * self.j23 + self.j31 * self.j31).sqrt()
    }

    /// Spherical angles `(J, theta, phi)` of the coupling vector, with
    /// `theta` measured from the `J_12` axis and `phi = atan2(J_31, J_23)`.
    /// Both angles are 0 when the vector vanishes.
    pub fn angles(&self) -> (f64, f64, f64) {
        let j = self.magnitude();
        if j == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let theta = (self.j12 / j).clamp(-1.0, 1.0).acos();
        let (phi, _) = phi_from_couplings(self.j23, self.j31);
        (j, theta, phi)
    }

    /// The equivalent general coupling set, with the `(3, 1)` pair folded to
    /// `(1, 3)` order.
    pub fn coupling_set(&self) -> CouplingSet {
        let mut set = CouplingSet::new();
        set.push(1, 2, self.j12).expect("static indices");
        set.push(2, 3, self.j23).expect("static indices");
        set.push(3, 1, self.j31).expect("static indices");
        set
    }

    /// Dense Hamiltonian of the cell on the given space.
    pub fn hamiltonian(&self, ops: &FockOps) -> Result<Operator> {
        build_hamiltonian(ops, &self.coupling_set())
    }
}

/// Builds [`ThreeVortexCouplings`] from magnitude and spherical angles.
///
/// The magnitude must be finite and non-negative.
pub fn couplings_from_angles(j: f64, theta: f64, phi: f64) -> Result<ThreeVortexCouplings> {
    if !(j.is_finite() && theta.is_finite() && phi.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    if j < 0.0 {
        return Err(Error::NegativeMagnitude(j));
    }
    ThreeVortexCouplings::new(
        j * theta.cos(),
        j * theta.sin() * phi.cos(),
        j * theta.sin() * phi.sin(),
    )
}

/// Azimuthal angle `phi = atan2(J_31, J_23)` of a coupling pair.
///
/// The boolean is true when both couplings vanish and the angle is an
/// arbitrary convention (0 is returned).
pub fn phi_from_couplings(j23: f64, j31: f64) -> (f64, bool) {
    if j23 == 0.0 && j31 == 0.0 {
        (0.0, true)
    } else {
        (j31.atan2(j23), false)
    }
}

/// Assembles `H = sum i J_ab gamma_a gamma_b` as a dense operator.
///
/// Each term with `a != b` is Hermitian on its own, so the sum is exactly
/// Hermitian by construction.
pub fn build_hamiltonian(ops: &FockOps, couplings: &CouplingSet) -> Result<Operator> {
    let mut h = Operator::zero(ops.space());
    for term in couplings.terms() {
        let pair = ops.gamma_product(term.a, term.b)?;
        h = &h + &pair.scaled(C64::new(0.0, term.strength));
    }
    debug_assert!(h.hermiticity_defect() < 1e-12 * (1.0 + h.max_norm()));
    Ok(h)
}

/// One degenerate level of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub multiplicity: usize,
}

/// Full eigendecomposition of a Hermitian operator.
///
/// Eigenvalues are sorted ascending and eigenvector columns are permuted to
/// match. Eigenvalues closer than `1e-9` times the spectral scale are
/// grouped into one [`Level`].
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
    levels: Vec<Level>,
}

impl Spectrum {
    /// Diagonalizes a Hermitian operator.
    ///
    /// The complex matrix `H = A + iB` is diagonalized through its real
    /// symmetric embedding `[[A, -B], [B, A]]`, whose spectrum repeats each
    /// eigenvalue of `H` twice: a real eigenvector `(x; y)` maps back to the
    /// complex eigenvector `x + iy`, and the redundant copies (the same
    /// vectors times `i`) are removed per degenerate cluster by pivoted
    /// Gram-Schmidt. The candidates of a cluster form a tight frame over its
    /// eigenspace, so the largest remaining residual is never small and the
    /// extraction stays well conditioned. The real-symmetric solver is used
    /// for every input because the direct complex Hermitian path has been
    /// observed to return a unitary basis that fails to diagonalize some
    /// degenerate inputs.
    pub fn of(op: &Operator) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if defect > 1e-10 * (1.0 + op.max_norm()) {
            return Err(Error::NotHermitian { defect });
        }
        let h = op.matrix();
        let n = h.nrows();
        let mut embedded = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = h[(i, j)];
                embedded[(i, j)] = z.re;
                embedded[(i + n, j + n)] = z.re;
                embedded[(i, j + n)] = -z.im;
                embedded[(i + n, j)] = z.im;
            }
        }
        let (embedded_values, embedded_vectors) = jacobi_symmetric(embedded);
        let mut order: Vec<usize> = (0..2 * n).collect();
        order.sort_by(|&i, &j| embedded_values[i].total_cmp(&embedded_values[j]));
        let spectral_scale = embedded_values
            .iter()
            .map(|e| e.abs())
            .fold(0.0f64, f64::max);
        let cluster_tol = EXTRACT_CLUSTER_TOL * spectral_scale;

        let mut eigenvalues: Vec<f64> = Vec::with_capacity(n);
        let mut eigenvectors = DMatrix::<C64>::zeros(n, n);
        let mut accepted = 0usize;
        let mut start = 0usize;
        while start < 2 * n {
            let mut end = start + 1;
            while end < 2 * n
                && embedded_values[order[end]] - embedded_values[order[end - 1]] <= cluster_tol
            {
                end += 1;
            }
            let cluster = &order[start..end];
            debug_assert_eq!(cluster.len() % 2, 0);
            let energy = cluster
                .iter()
                .map(|&k| embedded_values[k])
                .sum::<f64>()
                / cluster.len() as f64;
            // Map the real eigenvectors to complex candidates, removing the
            // span of everything accepted in earlier clusters.
            let mut residuals: Vec<DVector<C64>> = cluster
                .iter()
                .map(|&k| {
                    let col = embedded_vectors.column(k);
                    let mut v =
                        DVector::<C64>::from_fn(n, |i, _| C64::new(col[i], col[i + n]));
                    for j in 0..accepted {
                        let w = eigenvectors.column(j);
                        let overlap = w.dotc(&v);
                        v.axpy(-overlap, &w.into_owned(), C64::new(1.0, 0.0));
                    }
                    v
                })
                .collect();
            // Half the candidates are genuine; always take the largest
            // remaining residual so normalization never amplifies noise.
            for _ in 0..cluster.len() / 2 {
                let pick = residuals
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                    .map(|(i, _)| i)
                    .expect("cluster is non-empty");
                let mut v = residuals.swap_remove(pick);
                // Second orthogonalization pass against the accepted basis.
                for j in 0..accepted {
                    let w = eigenvectors.column(j);
                    let overlap = w.dotc(&v);
                    v.axpy(-overlap, &w.into_owned(), C64::new(1.0, 0.0));
                }
                let norm = v.norm();
                eigenvectors.set_column(accepted, &(v / C64::new(norm, 0.0)));
                eigenvalues.push(energy);
                accepted += 1;
                let w = eigenvectors.column(accepted - 1).into_owned();
                for r in residuals.iter_mut() {
                    let overlap = w.dotc(r);
                    r.axpy(-overlap, &w, C64::new(1.0, 0.0));
                }
            }
            start = end;
        }
        debug_assert_eq!(accepted, n);
        debug_assert!({
            let mut scaled = eigenvectors.clone();
            for (mut col, &e) in scaled.column_iter_mut().zip(eigenvalues.iter()) {
                col *= C64::new(e, 0.0);
            }
            let residual = scaled * eigenvectors.adjoint() - h;
            residual.iter().map(|z| z.norm()).fold(0.0, f64::max)
                < 1e-11 * (1.0 + op.max_norm())
        });

        let scale = eigenvalues
            .iter()
            .map(|e| e.abs())
            .fold(1.0f64, f64::max);
        let tol = LEVEL_GROUP_TOL * scale;
        let mut levels: Vec<Level> = Vec::new();
        let mut group: Vec<f64> = Vec::new();
        for &e in &eigenvalues {
            match group.last() {
                Some(&prev) if (e - prev).abs() <= tol => group.push(e),
                Some(_) => {
                    levels.push(Self::close_group(&group));
                    group = vec![e];
                }
                None => group.push(e),
            }
        }
        if !group.is_empty() {
            levels.push(Self::close_group(&group));
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
            levels,
        })
    }

    fn close_group(group: &[f64]) -> Level {
        Level {
            energy: group.iter().sum::<f64>() / group.len() as f64,
            multiplicity: group.len(),
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvector columns, ordered like the eigenvalues.
    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    /// Degenerate levels in ascending energy order.
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Spectral function `V diag(exp(factor * lambda)) V^dag`.
    ///
    /// With `factor = -i t` this is the exact propagator `exp(-i H t)`.
    pub fn exp_scaled(&self, factor: C64) -> DMatrix<C64> {
        let phases = DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&e| (factor * e).exp()),
        );
        let scaled = {
            let mut v = self.eigenvectors.clone();
            for (mut col, p) in v.column_iter_mut().zip(phases.iter()) {
                col *= *p;
            }
            v
        };
        scaled * self.eigenvectors.adjoint()
    }
}

/// Quasiparticle mode operators of the three-vortex cell at angles `(t, p)`.
///
/// `alpha` annihilates the cell quasiparticle, `alpha_dag` creates it, and
/// `beta` is the residual Majorana combination: Hermitian, unitary, and
/// commuting with the cell Hamiltonian.
#[derive(Debug, Clone)]
pub struct QuasiparticleOps {
    pub alpha: Operator,
    pub alpha_dag: Operator,
    pub beta: Operator,
    pub theta: f64,
    pub phi: f64,
}

impl QuasiparticleOps {
    /// Number operator `alpha^dag alpha`.
    pub fn number(&self) -> Operator {
        &self.alpha_dag * &self.alpha
    }
}

/// Builds the quasiparticle operators of a three-mode cell.
///
/// ```text
/// alpha = [(cos t cos p - i sin p) gamma_1
///          + (cos t sin p + i cos p) gamma_2
///          - sin t gamma_3] / 2
/// beta  = sin t cos p gamma_1 + sin t sin p gamma_2 + cos t gamma_3
/// ```
///
/// They satisfy `alpha^2 = 0`, `{alpha, alpha^dag} = 1`, `beta^2 = 1`, and
/// `{alpha, beta} = 0`.
pub fn quasiparticle_ops(ops: &FockOps, theta: f64, phi: f64) -> Result<QuasiparticleOps> {
    if !(theta.is_finite() && phi.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    if ops.space().n_modes() != 3 {
        return Err(Error::SpaceMismatch(3, ops.space().n_modes()));
    }
    let (st, ct) = (theta.sin(), theta.cos());
    let (sp, cp) = (phi.sin(), phi.cos());
    let g1 = ops.gamma(1)?;
    let g2 = ops.gamma(2)?;
    let g3 = ops.gamma(3)?;

    let half = |re: f64, im: f64| C64::new(re / 2.0, im / 2.0);
    let alpha = &(&g1.scaled(half(ct * cp, -sp)) + &g2.scaled(half(ct * sp, cp)))
        + &g3.scaled(half(-st, 0.0));
    let alpha_dag = alpha.adjoint();
    let beta = &(&g1.scaled(C64::new(st * cp, 0.0)) + &g2.scaled(C64::new(st * sp, 0.0)))
        + &g3.scaled(C64::new(ct, 0.0));
    Ok(QuasiparticleOps {
        alpha,
        alpha_dag,
        beta,
        theta,
        phi,
    })
}

/// One labeled simultaneous eigenstate of the cell Hamiltonian and parity.
#[derive(Debug, Clone)]
pub struct LabeledEigenstate {
    /// Short name of the operator word applied to the vacuum, with `a` for
    /// `alpha`, `ad` for `alpha^dag`, and `b` for `beta`, in product order.
    pub label: &'static str,
    /// Sign of the energy in units of the coupling magnitude: -1 ground,
    /// +1 excited.
    pub energy_sign: i32,
    /// Total fermion parity of the state: +1 even, -1 odd.
    pub parity: i32,
    /// The normalized state.
    pub state: StateVector,
}

/// The eight labeled eigenstates of an axial cell (`theta = 0`).
#[derive(Debug, Clone)]
pub struct EigenstateTable {
    pub phi: f64,
    pub states: Vec<LabeledEigenstate>,
}

impl EigenstateTable {
    pub fn get(&self, label: &str) -> Option<&LabeledEigenstate> {
        self.states.iter().find(|s| s.label == label)
    }
}

/// Builds the eigenstate table of an axial cell (`theta = 0`) at angle `phi`.
///
/// Each entry is the normalized result of applying a word in
/// `{alpha, alpha^dag, beta}` to the vacuum. Every raw word state has norm
/// `1/sqrt(2)`, so each basis spans its sector completely: the four ground
/// and four excited states split two per parity sector.
pub fn eigenstate_table(ops: &FockOps, phi: f64) -> Result<EigenstateTable> {
    let q = quasiparticle_ops(ops, 0.0, phi)?;
    let vac = StateVector::vacuum(ops.space());
    // (label, word, energy sign, parity); words act right to left.
    let entries: [(&'static str, Vec<&Operator>, i32, i32); 8] = [
        ("a", vec![&q.alpha], -1, -1),
        ("a_ad_b", vec![&q.alpha, &q.alpha_dag, &q.beta], -1, -1),
        ("a_ad", vec![&q.alpha, &q.alpha_dag], -1, 1),
        ("a_b", vec![&q.alpha, &q.beta], -1, 1),
        ("ad", vec![&q.alpha_dag], 1, -1),
        ("ad_a_b", vec![&q.alpha_dag, &q.alpha, &q.beta], 1, -1),
        ("ad_a", vec![&q.alpha_dag, &q.alpha], 1, 1),
        ("ad_b", vec![&q.alpha_dag, &q.beta], 1, 1),
    ];
    let mut states = Vec::with_capacity(8);
    for (label, word, energy_sign, parity) in entries {
        let mut psi = vac.clone();
        for op in word.iter().rev() {
            psi = op.apply(&psi)?;
        }
        states.push(LabeledEigenstate {
            label,
            energy_sign,
            parity,
            state: psi.normalized()?,
        });
    }
    Ok(EigenstateTable { phi, states })
}

/// Checks that two operators act on the same space, then returns the
/// spectral decomposition of their difference's max norm.
pub fn operator_distance(a: &Operator, b: &Operator) -> Result<f64> {
    check_same_space(a.space(), b.space())?;
    Ok((a - b).max_norm())
}
