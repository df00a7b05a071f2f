//! Vortex exchange unitaries and the logical gates they generate.
//!
//! A counterclockwise exchange of vortices `a` and `b` acts on the Majorana
//! operators as `gamma_a -> gamma_b`, `gamma_b -> -gamma_a`, leaving all
//! others fixed. Two distinct unitaries realize this exchange and both
//! matter here:
//!
//! - [`braid_unitary`] is the Schroedinger-picture operator
//!   `exp(-(pi/4) gamma_a gamma_b) = (1 - gamma_a gamma_b)/sqrt(2)`, the one
//!   that acts on state vectors during a physical exchange.
//! - [`braid_transport`] is the unitary defined by carrying each operator
//!   word through the exchange while holding the vacuum fixed:
//!   `L (w |0)) = (U w U^dag) |0)`. Its matrix elements in the labeled
//!   eigenbasis are the exchange matrices returned by [`m31_odd`] and
//!   [`m31_even`], which track how the basis-defining operator words
//!   transform rather than how an individual state vector does.
//!
//! Composing exchange, timed dwell ([`dynamical_phase_matrix`]), and inverse
//! exchange yields the continuous gate family [`composite_gate`] whose
//! diagonal blocks are [`MGate`] rotations; [`decompose_su2`] factorizes an
//! arbitrary SU(2) target into at most three such rotations.

use nalgebra::{Matrix2, Matrix4};

use crate::clifford::{FockOps, FockSpace, Operator, StateVector, C64};
use crate::error::Error;
use crate::hamiltonian::eigenstate_table;
use crate::Result;

/// Gram / completeness tolerance for the projection bases.
const PROJECTION_TOL: f64 = 1e-10;

/// Block-structure tolerance for the composite gate.
const BLOCK_TOL: f64 = 1e-10;

/// Unitarity tolerance accepted by [`decompose_su2`].
const SU2_INPUT_TOL: f64 = 1e-8;

/// Angles smaller than this are dropped from synthesized sequences.
const ANGLE_DROP_TOL: f64 = 1e-12;

/// Labels of the odd-parity projection basis, in matrix order.
const ODD_BASIS: [&str; 4] = ["a", "ad_a_b", "a_ad_b", "ad"];

/// Labels of the even-parity projection basis, in matrix order, paired
/// ground/excited like the odd basis so the same dwell matrix applies.
/// The pair order puts `(a_b, ad_a)` first so the composite's upper block
/// carries `M(eta, phi)` exactly as in the odd sector.
const EVEN_BASIS: [&str; 4] = ["a_b", "ad_a", "a_ad", "ad_b"];

/// Sense of a vortex exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Ccw,
    Cw,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::Ccw => Orientation::Cw,
            Orientation::Cw => Orientation::Ccw,
        }
    }
}

/// One exchange of vortices `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BraidMove {
    pub a: usize,
    pub b: usize,
    pub orientation: Orientation,
}

/// An ordered sequence of exchanges, first move applied first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BraidWord {
    moves: Vec<BraidMove>,
}

impl BraidWord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(a: usize, b: usize, orientation: Orientation) -> Result<Self> {
        let mut word = Self::new();
        word.push(a, b, orientation)?;
        Ok(word)
    }

    pub fn push(&mut self, a: usize, b: usize, orientation: Orientation) -> Result<()> {
        if a == b {
            return Err(Error::IdenticalVortices(a));
        }
        self.moves.push(BraidMove { a, b, orientation });
        Ok(())
    }

    pub fn moves(&self) -> &[BraidMove] {
        &self.moves
    }

    /// The inverse word: moves reversed, every orientation flipped.
    pub fn inverse(&self) -> Self {
        Self {
            moves: self
                .moves
                .iter()
                .rev()
                .map(|m| BraidMove {
                    a: m.a,
                    b: m.b,
                    orientation: m.orientation.flipped(),
                })
                .collect(),
        }
    }

    /// Schroedinger unitary of the word: the product of the per-move
    /// unitaries with the first move rightmost.
    pub fn unitary(&self, space: FockSpace) -> Result<Operator> {
        let mut total = Operator::identity(space);
        for m in &self.moves {
            total = &braid_unitary(space, m.a, m.b, m.orientation)? * &total;
        }
        Ok(total)
    }

    /// Net substitution on Majorana labels: entry `i-1` is `(j, s)` meaning
    /// `gamma_i -> s * gamma_j` under conjugation by the word's unitary.
    pub fn majorana_map(&self, n_modes: usize) -> Result<Vec<(usize, f64)>> {
        let mut map: Vec<(usize, f64)> = (1..=n_modes).map(|j| (j, 1.0)).collect();
        for m in &self.moves {
            if m.a == 0 || m.a > n_modes {
                return Err(Error::VortexIndexOutOfRange {
                    index: m.a,
                    n_modes,
                });
            }
            if m.b == 0 || m.b > n_modes {
                return Err(Error::VortexIndexOutOfRange {
                    index: m.b,
                    n_modes,
                });
            }
            for entry in map.iter_mut() {
                let (j, s) = *entry;
                *entry = match m.orientation {
                    // Ccw: a -> b, b -> -a.
                    Orientation::Ccw if j == m.a => (m.b, s),
                    Orientation::Ccw if j == m.b => (m.a, -s),
                    // Cw is the inverse: a -> -b, b -> a.
                    Orientation::Cw if j == m.a => (m.b, -s),
                    Orientation::Cw if j == m.b => (m.a, s),
                    _ => (j, s),
                };
            }
        }
        Ok(map)
    }
}

/// Schroedinger unitary of a single counterclockwise or clockwise exchange.
///
/// For the counterclockwise sense,
/// `U = exp(-(pi/4) gamma_a gamma_b) = (1 - gamma_a gamma_b)/sqrt(2)`,
/// which conjugates `gamma_a -> gamma_b` and `gamma_b -> -gamma_a`.
/// The clockwise unitary is its inverse.
pub fn braid_unitary(
    space: FockSpace,
    a: usize,
    b: usize,
    orientation: Orientation,
) -> Result<Operator> {
    if a == b {
        return Err(Error::IdenticalVortices(a));
    }
    let ops = FockOps::new(space);
    let pair = ops.gamma_product(a, b)?;
    let sign = match orientation {
        Orientation::Ccw => -1.0,
        Orientation::Cw => 1.0,
    };
    let half = C64::new(0.5f64.sqrt(), 0.0);
    Ok(&Operator::identity(space).scaled(half) + &pair.scaled(half * sign))
}

/// Operator-transport unitary of a braid word.
///
/// Defined on the subset-word basis by `L (gamma_S |0)) = (U gamma_S U^dag) |0)`
/// with `gamma_S` the ascending product over the occupied modes of each basis
/// index. Every conjugated `gamma_i` is a signed single `gamma_j`, so `L` is
/// an exact signed permutation of the Fock basis: unitary, parity-preserving,
/// and fixing the vacuum.
pub fn braid_transport(space: FockSpace, word: &BraidWord) -> Result<Operator> {
    let map = word.majorana_map(space.n_modes())?;
    let dim = space.dim();
    let mut mat = nalgebra::DMatrix::<C64>::zeros(dim, dim);
    for col in 0..dim {
        let mut index = 0usize;
        let mut sign = 1.0f64;
        // gamma_S = gamma_{i1} ... gamma_{im} with i1 < ... < im applies its
        // rightmost (largest-mode) factor first.
        for mode in (1..=space.n_modes()).rev() {
            if space.occupation(col, mode) == 1 {
                let (target, s) = map[mode - 1];
                sign *= s;
                let (next, jw) = space.gamma_action(index, target);
                sign *= jw;
                index = next;
            }
        }
        mat[(index, col)] = C64::new(sign, 0.0);
    }
    Operator::from_matrix(space, mat)
}

/// Dense 4x4 matrix over the labeled ground/excited projection basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateMatrix4 {
    mat: Matrix4<C64>,
}

impl GateMatrix4 {
    pub fn from_matrix(mat: Matrix4<C64>) -> Self {
        Self { mat }
    }

    pub fn identity() -> Self {
        Self {
            mat: Matrix4::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            mat: self.mat * rhs.mat,
        }
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        (self.mat - other.mat).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn unitarity_defect(&self) -> f64 {
        (self.mat.adjoint() * self.mat - Matrix4::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry magnitude in the two off-diagonal 2x2 blocks.
    pub fn block_offdiagonal_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 2..4 {
                worst = worst.max(self.mat[(r, c)].norm());
                worst = worst.max(self.mat[(c, r)].norm());
            }
        }
        worst
    }

    pub fn upper_left_block(&self) -> Matrix2<C64> {
        self.mat.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn lower_right_block(&self) -> Matrix2<C64> {
        self.mat.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn from_blocks(upper: &Matrix2<C64>, lower: &Matrix2<C64>) -> Self {
        let mut mat = Matrix4::zeros();
        mat.fixed_view_mut::<2, 2>(0, 0).copy_from(upper);
        mat.fixed_view_mut::<2, 2>(2, 2).copy_from(lower);
        Self { mat }
    }
}

/// Shared projection of the (3,1) counterclockwise exchange transport onto a
/// labeled 4-state basis. Row `i` holds the expansion coefficients of the
/// transported basis word `i` over the basis words.
fn project_exchange(space: FockSpace, phi: f64, labels: [&str; 4]) -> Result<GateMatrix4> {
    if !phi.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let ops = FockOps::new(space);
    let table = eigenstate_table(&ops, phi)?;
    let basis: Vec<&StateVector> = labels
        .iter()
        .map(|label| {
            table
                .get(label)
                .map(|entry| &entry.state)
                .expect("labels drawn from the fixed table")
        })
        .collect();

    let mut gram_defect = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let overlap = basis[i].inner(basis[j])?;
            let expected = if i == j { 1.0 } else { 0.0 };
            gram_defect = gram_defect.max((overlap - C64::new(expected, 0.0)).norm());
        }
    }
    if gram_defect > PROJECTION_TOL {
        return Err(Error::BasisNotOrthonormal {
            defect: gram_defect,
        });
    }

    let word = BraidWord::single(3, 1, Orientation::Ccw)?;
    let transport = braid_transport(space, &word)?;
    let mut mat = Matrix4::zeros();
    for i in 0..4 {
        let image = transport.apply(basis[i])?;
        let mut captured = 0.0f64;
        for j in 0..4 {
            let coeff = basis[j].inner(&image)?;
            captured += coeff.norm_sqr();
            mat[(i, j)] = coeff;
        }
        let defect = (image.norm().powi(2) - captured).abs();
        if defect > PROJECTION_TOL {
            return Err(Error::ProjectionNotComplete { defect });
        }
    }
    Ok(GateMatrix4::from_matrix(mat))
}

/// Exchange matrix of the (3,1) counterclockwise move on the odd-parity
/// basis `(a, ad_a_b, a_ad_b, ad)` at angle `phi`.
///
/// Row `i` expands;`L` applied to basis word `i` over the basis words, with
/// `L` the operator-transport unitary of the exchange.
pub fn m31_odd(space: FockSpace, phi: f64) -> Result<GateMatrix4> {
    project_exchange(space, phi, ODD_BASIS)
}

/// Exchange matrix of the same move on the even-parity basis
/// `(a_ad, ad_b, a_b, ad_a)`, ordered ground/excited like the odd basis.
pub fn m31_even(space: FockSpace, phi: f64) -> Result<GateMatrix4> {
    project_exchange(space, phi, EVEN_BASIS)
}

/// Phase matrix of a timed dwell at dwell angle `eta`: ground levels
/// acquire `e^{-i eta}`, excited levels `e^{+i eta}`, in the alternating
/// ground/excited basis order shared by both sectors.
pub fn dynamical_phase_matrix(eta: f64) -> GateMatrix4 {
    let g = C64::from_polar(1.0, -eta);
    let e = C64::from_polar(1.0, eta);
    GateMatrix4::from_matrix(Matrix4::from_diagonal(&nalgebra::Vector4::new(g, e, g, e)))
}

/// The continuous one-qubit gate: exchange, dwell through angle `eta`,
/// inverse exchange, projected on the odd-parity basis.
///
/// Equals `P Z(eta) P^{-1}` with `P` the exchange matrix and `Z` the dwell
/// phase matrix, and is exactly block diagonal: the upper-left block is
/// `M(eta, phi)`, the lower-right block `M(-eta, phi)`.
pub fn composite_gate(eta: f64, phi: f64) -> Result<GateMatrix4> {
    composite_from(eta, phi, m31_odd)
}

/// The same composition on the even-parity basis; the block structure and
/// blocks match the odd sector.
pub fn composite_gate_even(eta: f64, phi: f64) -> Result<GateMatrix4> {
    composite_from(eta, phi, m31_even)
}

fn composite_from(
    eta: f64,
    phi: f64,
    exchange: fn(FockSpace, f64) -> Result<GateMatrix4>,
) -> Result<GateMatrix4> {
    if !(eta.is_finite() && phi.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let space = FockSpace::new(3)?;
    let p = exchange(space, phi)?;
    let defect = p.unitarity_defect();
    if defect > PROJECTION_TOL {
        return Err(Error::NotUnitary {
            defect,
            tol: PROJECTION_TOL,
        });
    }
    let z = dynamical_phase_matrix(eta);
    let composite = p.mul(&z).mul(&p.adjoint());
    let block_defect = composite.block_offdiagonal_defect();
    if block_defect > BLOCK_TOL {
        return Err(Error::BlockStructure(block_defect));
    }
    Ok(composite)
}

/// One member of the continuous gate family: a rotation by `2 eta` about
/// the equatorial Bloch axis at azimuth `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MGate {
    pub eta: f64,
    pub phi: f64,
}

impl MGate {
    pub fn new(eta: f64, phi: f64) -> Self {
        Self { eta, phi }
    }

    /// `[[cos eta, -i e^{-i phi} sin eta], [-i e^{i phi} sin eta, cos eta]]`.
    pub fn matrix(&self) -> Matrix2<C64> {
        let c = C64::new(self.eta.cos(), 0.0);
        let s = self.eta.sin();
        Matrix2::new(
            c,
            -C64::i() * C64::from_polar(s, -self.phi),
            -C64::i() * C64::from_polar(s, self.phi),
            c,
        )
    }
}

/// Builds the gate for dwell angle `eta` and exchange azimuth `phi`.
pub fn m_gate(eta: f64, phi: f64) -> MGate {
    MGate::new(eta, phi)
}

/// Composes a gate sequence in application order: the first element acts
/// first, so the result is `M(seq[n-1]) * ... * M(seq[0])`.
pub fn compose_m_gates(seq: &[MGate]) -> Matrix2<C64> {
    let mut total = Matrix2::identity();
    for gate in seq {
        total = gate.matrix() * total;
    }
    total
}

/// Overlap fidelity `|tr(A^dag B)| / 2` between 2x2 unitaries, invariant
/// under global phase; 1 iff the gates agree on every ray.
pub fn gate_fidelity(a: &Matrix2<C64>, b: &Matrix2<C64>) -> f64 {
    ((a.adjoint() * b).trace().norm() / 2.0).min(1.0)
}

fn unitarity_defect_2(m: &Matrix2<C64>) -> f64 {
    (m.adjoint() * m - Matrix2::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Factors a 2x2 unitary into at most three gates about the `phi = 0` and
/// `phi = pi/2` axes, returned in application order (first element acts
/// first). Recomposition matches the target up to global phase.
///
/// The closed form: strip the determinant phase to reach
/// `V = [[a, b], [-conj(b), conj(a)]]`, then with sum and difference
/// angles `s = gamma + alpha`, `d = gamma - alpha` of the outer factors and
/// middle angle `beta`,
///
/// ```text
/// cos(beta) (cos s, -sin s) = (Re a, Im b)
/// sin(beta) (-sin d, -cos d) = (Im a, Re b)
/// ```
///
/// which `atan2` inverts directly; factors with `|eta| <= 1e-12` are
/// dropped, so the identity yields an empty sequence.
pub fn decompose_su2(target: &Matrix2<C64>) -> Result<Vec<MGate>> {
    if target.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let defect = unitarity_defect_2(target);
    if defect > SU2_INPUT_TOL {
        return Err(Error::NotUnitary {
            defect,
            tol: SU2_INPUT_TOL,
        });
    }
    let det = target[(0, 0)] * target[(1, 1)] - target[(0, 1)] * target[(1, 0)];
    let v = target / det.sqrt();
    let a = v[(0, 0)];
    let b = v[(0, 1)];

    let cos_beta = a.re.hypot(b.im);
    let sin_beta = a.im.hypot(b.re);
    let beta = sin_beta.atan2(cos_beta);
    let mut s = (-b.im).atan2(a.re);
    let mut d = (-a.im).atan2(-b.re);
    // When one of the hypotenuses vanishes, the corresponding angle is
    // unconstrained and atan2 of two signed zeros may return +-pi; pin it
    // to its partner so the redundant outer factor cancels to zero.
    if sin_beta == 0.0 {
        d = s;
    } else if cos_beta == 0.0 {
        s = d;
    }
    let gamma = (s + d) / 2.0;
    let alpha = (s - d) / 2.0;

    let sequence = [
        MGate::new(alpha, 0.0),
        MGate::new(beta, std::f64::consts::FRAC_PI_2),
        MGate::new(gamma, 0.0),
    ];
    Ok(sequence
        .into_iter()
        .filter(|g| g.eta.abs() > ANGLE_DROP_TOL)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_fock_space, commutator, parity_operator};
    use nalgebra::DMatrix;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

    const TOL: f64 = 1e-12;

    fn space3() -> FockSpace {
        FockSpace::new(3).unwrap()
    }

    fn op_diff(a: &Operator, b: &Operator) -> f64 {
        (a - b).max_norm()
    }

    /// Reference exchange matrix on the odd basis, entered from its closed
    /// form in `phi`.
    fn reference_m31(phi: f64) -> GateMatrix4 {
        let e = |k: f64| C64::from_polar(0.5, k * phi);
        let h = C64::new(0.5, 0.0);
        GateMatrix4::from_matrix(Matrix4::new(
            h,
            -e(-1.0),
            -e(-1.0),
            -e(-2.0),
            e(1.0),
            h,
            -h,
            e(-1.0),
            e(1.0),
            -h,
            h,
            e(-1.0),
            -e(2.0),
            -e(1.0),
            -e(1.0),
            h,
        ))
    }

    fn haar_su2(rng: &mut ChaCha8Rng) -> Matrix2<C64> {
        let sample: [f64; 4] = std::array::from_fn(|_| {
            // Box-Muller keeps the dev-dependency surface small.
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            (-2.0 * u.ln()).sqrt() * v.cos()
        });
        let norm = sample.iter().map(|x| x * x).sum::<f64>().sqrt();
        let a = C64::new(sample[0] / norm, sample[1] / norm);
        let b = C64::new(sample[2] / norm, sample[3] / norm);
        Matrix2::new(a, b, -b.conj(), a.conj())
    }

    #[test]
    fn braid_conjugation_fixes_the_sign_convention() {
        let ops = build_fock_space(3).unwrap();
        let u = braid_unitary(ops.space(), 3, 1, Orientation::Ccw).unwrap();
        assert!(u.is_unitary(TOL));
        let g1 = ops.gamma(1).unwrap();
        let g3 = ops.gamma(3).unwrap();
        let conj = |g: &Operator| &(&u * g) * &u.adjoint();
        assert!(op_diff(&conj(&g3), &g1) < TOL);
        assert!(op_diff(&conj(&g1), &-(&g3)) < TOL);
        // Exchanging twice rotates the pair by a full turn: gamma_3 -> -gamma_3.
        let twice = &u * &u;
        let conj2 = &(&twice * &g3) * &twice.adjoint();
        assert!(op_diff(&conj2, &-(&g3)) < TOL);
    }

    #[test]
    fn clockwise_is_the_inverse() {
        let space = space3();
        let ccw = braid_unitary(space, 3, 1, Orientation::Ccw).unwrap();
        let cw = braid_unitary(space, 3, 1, Orientation::Cw).unwrap();
        let id = Operator::identity(space);
        assert!(op_diff(&(&ccw * &cw), &id) < TOL);
        assert!(op_diff(&braid_unitary(space, 1, 3, Orientation::Cw).unwrap(), &ccw) < TOL);
        assert!(matches!(
            braid_unitary(space, 2, 2, Orientation::Ccw),
            Err(Error::IdenticalVortices(2))
        ));
    }

    #[test]
    fn braids_preserve_parity() {
        let space = space3();
        let p = parity_operator(space);
        let u = braid_unitary(space, 1, 2, Orientation::Ccw).unwrap();
        assert!(commutator(&p, &u).unwrap().max_norm() < TOL);
    }

    #[test]
    fn braid_word_inverse_and_map() {
        let space = space3();
        let mut word = BraidWord::new();
        word.push(1, 2, Orientation::Ccw).unwrap();
        word.push(2, 3, Orientation::Cw).unwrap();
        let u = word.unitary(space).unwrap();
        let inv = word.inverse().unitary(space).unwrap();
        assert!(op_diff(&(&inv * &u), &Operator::identity(space)) < TOL);

        // The label map must match conjugation by the word unitary.
        let ops = build_fock_space(3).unwrap();
        let map = word.majorana_map(3).unwrap();
        for (i, &(j, s)) in map.iter().enumerate() {
            let gi = ops.gamma(i + 1).unwrap();
            let conj = &(&u * &gi) * &u.adjoint();
            let expected = ops.gamma(j).unwrap().scaled(C64::new(s, 0.0));
            assert!(op_diff(&conj, &expected) < TOL, "gamma_{}", i + 1);
        }
    }

    #[test]
    fn transport_carries_words_through_the_exchange() {
        // L (gamma_S |0)) must equal (U gamma_S U^dag) |0) for every subset.
        let ops = build_fock_space(3).unwrap();
        let space = ops.space();
        for word in [
            BraidWord::single(3, 1, Orientation::Ccw).unwrap(),
            BraidWord::single(2, 3, Orientation::Cw).unwrap(),
            {
                let mut w = BraidWord::new();
                w.push(1, 2, Orientation::Ccw).unwrap();
                w.push(3, 1, Orientation::Ccw).unwrap();
                w
            },
        ] {
            let l = braid_transport(space, &word).unwrap();
            let u = word.unitary(space).unwrap();
            assert!(l.is_unitary(TOL));
            let p = parity_operator(space);
            assert!(commutator(&p, &l).unwrap().max_norm() < TOL);
            for col in 0..space.dim() {
                // gamma_S |0) = |S) exactly in this convention.
                let gs = StateVector::basis_state(space, col);
                let mut conjugated = StateVector::vacuum(space);
                for mode in (1..=3).rev() {
                    if space.occupation(col, mode) == 1 {
                        conjugated = ops.gamma(mode).unwrap().apply(&conjugated).unwrap();
                    }
                }
                let via_u = (&(&u * &{
                    // Build gamma_S as a dense operator directly.
                    let mut prod = Operator::identity(space);
                    for mode in 1..=3 {
                        if space.occupation(col, mode) == 1 {
                            prod = &prod * &ops.gamma(mode).unwrap();
                        }
                    }
                    prod
                }) * &u.adjoint())
                    .apply(&StateVector::vacuum(space))
                    .unwrap();
                let via_l = l.apply(&gs).unwrap();
                assert!(via_l.max_diff(&via_u) < TOL, "col={col}");
                assert!(conjugated.max_diff(&gs) < TOL, "subset convention col={col}");
            }
        }
    }

    #[test]
    fn transport_fixes_vacuum_and_composes() {
        let space = space3();
        let w1 = BraidWord::single(1, 2, Orientation::Ccw).unwrap();
        let w2 = BraidWord::single(3, 1, Orientation::Cw).unwrap();
        let mut w12 = w1.clone();
        w12.push(3, 1, Orientation::Cw).unwrap();
        let l1 = braid_transport(space, &w1).unwrap();
        let l2 = braid_transport(space, &w2).unwrap();
        let l12 = braid_transport(space, &w12).unwrap();
        assert!(op_diff(&l12, &(&l2 * &l1)) < TOL);
        let vac = StateVector::vacuum(space);
        assert!(l12.apply(&vac).unwrap().max_diff(&vac) < TOL);
    }

    #[test]
    fn exchange_matrix_matches_reference() {
        for phi in [0.0, FRAC_PI_6, FRAC_PI_4, 1.0] {
            let m = m31_odd(space3(), phi).unwrap();
            let reference = reference_m31(phi);
            assert!(
                m.max_diff(&reference) < 1e-12,
                "phi={phi} diff={}",
                m.max_diff(&reference)
            );
            assert!(m.unitarity_defect() < 1e-12);
        }
        // Spot values: first row at phi = 0 and the (1,4) entry at phi = pi/4.
        let at0 = m31_odd(space3(), 0.0).unwrap();
        for (j, want) in [0.5, -0.5, -0.5, -0.5].iter().enumerate() {
            assert!((at0.matrix()[(0, j)] - C64::new(*want, 0.0)).norm() < TOL);
        }
        let at4 = m31_odd(space3(), FRAC_PI_4).unwrap();
        assert!((at4.matrix()[(0, 3)] - C64::new(0.0, 0.5)).norm() < TOL);
        // The alignment phase between projection and reference is exactly 1.
        let phase = at0.matrix()[(0, 0)] / C64::new(0.5, 0.0);
        assert!((phase - C64::new(1.0, 0.0)).norm() < TOL);
    }

    #[test]
    fn even_exchange_matrix_is_unitary_and_complete() {
        for phi in [0.0, 0.8, FRAC_PI_4] {
            let m = m31_even(space3(), phi).unwrap();
            assert!(m.unitarity_defect() < 1e-12, "phi={phi}");
        }
    }

    #[test]
    fn dwell_phase_matrix_values() {
        let id = dynamical_phase_matrix(0.0);
        assert!(id.max_diff(&GateMatrix4::identity()) < TOL);
        let quarter = dynamical_phase_matrix(FRAC_PI_2);
        let mi = C64::new(0.0, -1.0);
        let pi_ = C64::new(0.0, 1.0);
        for (k, want) in [mi, pi_, mi, pi_].iter().enumerate() {
            assert!((quarter.matrix()[(k, k)] - want).norm() < TOL);
        }
    }

    #[test]
    fn composite_gate_is_block_diagonal_m_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let eta = rng.gen_range(-PI..PI);
            let phi = rng.gen_range(-PI..PI);
            let c = composite_gate(eta, phi).unwrap();
            assert!(c.block_offdiagonal_defect() < 1e-12);
            let expected = GateMatrix4::from_blocks(
                &m_gate(eta, phi).matrix(),
                &m_gate(-eta, phi).matrix(),
            );
            assert!(c.max_diff(&expected) < 1e-12, "eta={eta} phi={phi}");
        }
        let id = composite_gate(0.0, 0.3).unwrap();
        assert!(id.max_diff(&GateMatrix4::identity()) < TOL);
        // (pi/2, 0): the upper block is -i sigma_x.
        let half = composite_gate(FRAC_PI_2, 0.0).unwrap();
        let block = half.upper_left_block();
        let want = Matrix2::new(
            C64::new(0.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 0.0),
        );
        assert!((block - want).iter().map(|z| z.norm()).fold(0.0, f64::max) < TOL);
    }

    #[test]
    fn even_sector_composite_matches_odd_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let eta = rng.gen_range(-PI..PI);
            let phi = rng.gen_range(-PI..PI);
            let even = composite_gate_even(eta, phi).unwrap();
            let odd = composite_gate(eta, phi).unwrap();
            assert!(even.block_offdiagonal_defect() < 1e-12);
            assert!(even.max_diff(&odd) < 1e-12, "eta={eta} phi={phi}");
        }
    }

    #[test]
    fn m_gate_identities() {
        let any = m_gate(0.0, 1.234).matrix();
        assert!((any - Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max) < TOL);
        let m = m_gate(0.7, -1.1);
        let minv = m_gate(-0.7, -1.1);
        let prod = m.matrix() * minv.matrix();
        assert!((prod - Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max) < TOL);
        let det = m.matrix()[(0, 0)] * m.matrix()[(1, 1)] - m.matrix()[(0, 1)] * m.matrix()[(1, 0)];
        assert!((det - C64::new(1.0, 0.0)).norm() < TOL);
        assert!(unitarity_defect_2(&m.matrix()) < TOL);
    }

    #[test]
    fn specific_product_implements_hadamard() {
        let product = m_gate(FRAC_PI_4, -FRAC_PI_2).matrix() * m_gate(FRAC_PI_2, 0.0).matrix();
        let h = Matrix2::new(
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
        ) / C64::new(2f64.sqrt(), 0.0);
        assert!(gate_fidelity(&product, &h) > 1.0 - 1e-12);
        // Same pair expressed in application order through the composer.
        let seq = [m_gate(FRAC_PI_2, 0.0), m_gate(FRAC_PI_4, -FRAC_PI_2)];
        assert!(gate_fidelity(&compose_m_gates(&seq), &h) > 1.0 - 1e-12);
    }

    #[test]
    fn decompose_identity_and_hadamard() {
        let empty = decompose_su2(&Matrix2::identity()).unwrap();
        assert!(empty.is_empty());
        let h = Matrix2::new(
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
        ) / C64::new(2f64.sqrt(), 0.0);
        let seq = decompose_su2(&h).unwrap();
        assert!(seq.len() <= 3);
        assert!(gate_fidelity(&compose_m_gates(&seq), &h) > 1.0 - 1e-9);
    }

    #[test]
    fn decompose_haar_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for k in 0..100 {
            let target = haar_su2(&mut rng);
            let seq = decompose_su2(&target).unwrap();
            assert!(seq.len() <= 3);
            let fidelity = gate_fidelity(&compose_m_gates(&seq), &target);
            assert!(fidelity > 1.0 - 1e-9, "k={k} fidelity={fidelity}");
            for g in &seq {
                assert!(g.phi == 0.0 || (g.phi - FRAC_PI_2).abs() < TOL);
            }
        }
    }

    #[test]
    fn decompose_rejects_non_unitary() {
        let bad = Matrix2::new(
            C64::new(1.0, 0.0),
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        );
        assert!(matches!(
            decompose_su2(&bad),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn gate_fidelity_phase_invariance() {
        let m = m_gate(0.4, 0.9).matrix();
        let rotated = m * C64::from_polar(1.0, 1.7);
        assert!((gate_fidelity(&m, &rotated) - 1.0).abs() < TOL);
        let other = m_gate(0.9, 0.1).matrix();
        assert!(gate_fidelity(&m, &other) < 1.0 - 1e-3);
    }

    #[test]
    fn schroedinger_projection_differs_from_transport_projection() {
        // The state-vector braid projects block-sparse; the transport
        // projection is the dense exchange matrix. They must not agree.
        let space = space3();
        let ops = build_fock_space(3).unwrap();
        let table = eigenstate_table(&ops, 0.0).unwrap();
        let u = braid_unitary(space, 3, 1, Orientation::Ccw).unwrap();
        let mut p = Matrix4::zeros();
        for (i, li) in ODD_BASIS.iter().enumerate() {
            for (j, lj) in ODD_BASIS.iter().enumerate() {
                let vi = &table.get(li).unwrap().state;
                let vj = &table.get(lj).unwrap().state;
                p[(i, j)] = vi.inner(&u.apply(vj).unwrap()).unwrap();
            }
        }
        let transported = m31_odd(space, 0.0).unwrap();
        let diff = (p - transported.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff > 0.5, "projections unexpectedly close: {diff}");
        // The Schroedinger projection is still unitary on the subspace.
        let defect = (p.adjoint() * p - Matrix4::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(defect < 1e-12);
    }

    #[test]
    fn transport_distance_from_dense_conjugation() {
        // Independent oracle for braid_transport: build L column by column
        // with dense operators only.
        let ops = build_fock_space(3).unwrap();
        let space = ops.space();
        let word = BraidWord::single(3, 1, Orientation::Ccw).unwrap();
        let u = word.unitary(space).unwrap();
        let l = braid_transport(space, &word).unwrap();
        let mut dense = DMatrix::<C64>::zeros(space.dim(), space.dim());
        for col in 0..space.dim() {
            let mut prod = Operator::identity(space);
            for mode in 1..=3 {
                if space.occupation(col, mode) == 1 {
                    prod = &prod * &ops.gamma(mode).unwrap();
                }
            }
            let image = (&(&u * &prod) * &u.adjoint())
                .apply(&StateVector::vacuum(space))
                .unwrap();
            for row in 0..space.dim() {
                dense[(row, col)] = image.amplitude(row);
            }
        }
        let diff = (l.matrix() - &dense).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < TOL);
    }
}
