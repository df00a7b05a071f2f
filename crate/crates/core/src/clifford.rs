//! Fock space, mode operators, and the Majorana (real Clifford) algebra.
//!
//! Conventions, fixed once and used everywhere:
//!
//! - A space with `k` modes has dimension `2^k`. Basis states are occupation
//!   tuples `(n_1, ..., n_k)` with index `sum_i n_i * 2^(k - i)`, so mode 1
//!   is the most significant bit: for `k = 3`, `|110)` has index 6.
//! - Mode operators follow the Jordan-Wigner construction with the parity
//!   string over modes `1..i-1`: `c_i = Z^(i-1) (x) a (x) I^(k-i)` where
//!   `a = [[0, 1], [0, 0]]` and `Z = diag(1, -1)`.
//! - Majorana operators are `gamma_i = c_i + c_i^dag`. They are Hermitian,
//!   unitary, and satisfy `{gamma_i, gamma_j} = 2 delta_ij`.
//!
//! Vortex (mode) indices are 1-based throughout, matching the physics
//! labeling used by the rest of the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

const ONE: C64 = C64::new(1.0, 0.0);

/// Largest supported mode count (dense dimension 4096).
pub const MAX_MODES: usize = 12;

/// Norm defect beyond which a state no longer counts as normalized.
/// Loose enough to admit states after long unitary evolutions, whose norm
/// drift stays below 1e-9.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// A fermionic Fock space over `n_modes` vortex-core modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    n_modes: usize,
}

impl FockSpace {
    /// Creates a space with `n_modes` in `1..=12`.
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 || n_modes > MAX_MODES {
            return Err(Error::ModeCountOutOfRange(n_modes));
        }
        Ok(Self { n_modes })
    }

    /// Number of modes `k`.
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Hilbert-space dimension `2^k`.
    pub fn dim(&self) -> usize {
        1 << self.n_modes
    }

    /// Occupation of 1-based `mode` in the basis state `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        debug_assert!(mode >= 1 && mode <= self.n_modes);
        (index >> (self.n_modes - mode)) & 1
    }

    /// Basis index of the occupation tuple `(n_1, ..., n_k)`.
    pub fn basis_index(&self, occupations: &[usize]) -> usize {
        debug_assert_eq!(occupations.len(), self.n_modes);
        occupations
            .iter()
            .fold(0, |acc, &n| (acc << 1) | (n & 1))
    }

    /// Occupation tuple of a basis index, most significant mode first.
    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (1..=self.n_modes).map(|m| self.occupation(index, m)).collect()
    }

    /// Total occupation parity of a basis index: +1 even, -1 odd.
    pub fn parity_of_index(&self, index: usize) -> i32 {
        if (index.count_ones() & 1) == 0 {
            1
        } else {
            -1
        }
    }

    /// Action of `gamma_mode` on the basis state `index`: the image basis
    /// index and its real sign. Exact because every Majorana operator is a
    /// signed permutation in the Fock basis.
    pub fn gamma_action(&self, index: usize, mode: usize) -> (usize, f64) {
        debug_assert!(mode >= 1 && mode <= self.n_modes);
        let bit = 1usize << (self.n_modes - mode);
        (index ^ bit, self.sign_string(index, mode))
    }

    /// Jordan-Wigner sign string over modes `1..mode-1` for basis `index`.
    fn sign_string(&self, index: usize, mode: usize) -> f64 {
        let mut occupied = 0u32;
        for m in 1..mode {
            occupied += self.occupation(index, m) as u32;
        }
        if occupied & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn check_mode(&self, index: usize) -> Result<()> {
        if index == 0 || index > self.n_modes {
            return Err(Error::VortexIndexOutOfRange {
                index,
                n_modes: self.n_modes,
            });
        }
        Ok(())
    }
}

/// Dense operator on a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: FockSpace,
    mat: DMatrix<C64>,
}

impl Operator {
    /// Wraps a dense matrix whose dimension must match the space.
    pub fn from_matrix(space: FockSpace, mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != space.dim() || mat.ncols() != space.dim() {
            return Err(Error::SpaceMismatch(space.n_modes(), mat.nrows()));
        }
        Ok(Self { space, mat })
    }

    /// The identity operator.
    pub fn identity(space: FockSpace) -> Self {
        Self {
            space,
            mat: DMatrix::identity(space.dim(), space.dim()),
        }
    }

    /// The zero operator.
    pub fn zero(space: FockSpace) -> Self {
        Self {
            space,
            mat: DMatrix::zeros(space.dim(), space.dim()),
        }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    /// Hermitian adjoint.
    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            mat: self.mat.adjoint(),
        }
    }

    /// Scales by a complex factor.
    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            space: self.space,
            mat: &self.mat * factor,
        }
    }

    /// Largest entry magnitude; the residual norm used by the checks.
    pub fn max_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Deviation from Hermiticity in max norm.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.mat - self.mat.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Deviation from unitarity in max norm.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.mat.nrows();
        (self.mat.adjoint() * &self.mat - DMatrix::<C64>::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Applies the operator to a state.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        check_same_space(self.space, psi.space)?;
        Ok(StateVector {
            space: psi.space,
            amp: &self.mat * &psi.amp,
        })
    }

    fn assert_same_space(&self, other: &Self) {
        assert_eq!(
            self.space, other.space,
            "operator arithmetic across different spaces"
        );
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.assert_same_space(rhs);
        Operator {
            space: self.space,
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl std::ops::Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.assert_same_space(rhs);
        Operator {
            space: self.space,
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.assert_same_space(rhs);
        Operator {
            space: self.space,
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl std::ops::Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator {
            space: self.space,
            mat: -&self.mat,
        }
    }
}

/// Pure state on a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: FockSpace,
    amp: DVector<C64>,
}

impl StateVector {
    pub fn from_amplitudes(space: FockSpace, amp: DVector<C64>) -> Result<Self> {
        if amp.len() != space.dim() {
            return Err(Error::SpaceMismatch(space.n_modes(), amp.len()));
        }
        Ok(Self { space, amp })
    }

    /// The Fock basis state with the given index.
    pub fn basis_state(space: FockSpace, index: usize) -> Self {
        let mut amp = DVector::zeros(space.dim());
        amp[index] = ONE;
        Self { space, amp }
    }

    /// The all-unoccupied vacuum `|0...0)`.
    pub fn vacuum(space: FockSpace) -> Self {
        Self::basis_state(space, 0)
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amp
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amp[index]
    }

    pub fn norm(&self) -> f64 {
        self.amp.norm()
    }

    /// Returns the normalized copy, or an error for the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::NotNormalized { defect: 1.0 });
        }
        Ok(Self {
            space: self.space,
            amp: &self.amp / C64::new(n, 0.0),
        })
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        check_same_space(self.space, other.space)?;
        Ok(self.amp.dotc(&other.amp))
    }

    /// Adds `factor * other` to this state.
    pub fn add_scaled(&mut self, factor: C64, other: &Self) {
        assert_eq!(self.space, other.space);
        self.amp.axpy(factor, &other.amp, ONE);
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            space: self.space,
            amp: &self.amp * factor,
        }
    }

    /// Max-norm distance between amplitude vectors.
    pub fn max_diff(&self, other: &Self) -> f64 {
        (&self.amp - &other.amp)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Expectation of the total occupation parity, in `[-1, 1]`.
    pub fn parity_expectation(&self) -> f64 {
        self.amp
            .iter()
            .enumerate()
            .map(|(i, z)| self.space.parity_of_index(i) as f64 * z.norm_sqr())
            .sum()
    }

    /// Total weight on basis states of the given parity (+1 or -1).
    pub fn parity_weight(&self, parity: i32) -> f64 {
        self.amp
            .iter()
            .enumerate()
            .filter(|(i, _)| self.space.parity_of_index(*i) == parity)
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }
}

/// Mode and Majorana operators over a [`FockSpace`].
///
/// Matrices are constructed on demand. Each construction fills `O(dim)`
/// entries into a fresh dense matrix, so repeated calls are cheap at the
/// crate's working dimensions (8 and 16) and nothing large is retained.
#[derive(Debug, Clone, Copy)]
pub struct FockOps {
    space: FockSpace,
}

impl FockOps {
    pub fn new(space: FockSpace) -> Self {
        Self { space }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    /// Annihilation operator `c_i` for 1-based `mode`.
    pub fn annihilation(&self, mode: usize) -> Result<Operator> {
        self.space.check_mode(mode)?;
        let k = self.space.n_modes();
        let bit = 1usize << (k - mode);
        let mut mat = DMatrix::zeros(self.space.dim(), self.space.dim());
        for col in 0..self.space.dim() {
            if col & bit != 0 {
                let sign = self.space.sign_string(col, mode);
                mat[(col & !bit, col)] = C64::new(sign, 0.0);
            }
        }
        Ok(Operator {
            space: self.space,
            mat,
        })
    }

    /// Creation operator `c_i^dag` for 1-based `mode`.
    pub fn creation(&self, mode: usize) -> Result<Operator> {
        Ok(self.annihilation(mode)?.adjoint())
    }

    /// Majorana operator `gamma_i = c_i + c_i^dag` for 1-based `mode`.
    pub fn gamma(&self, mode: usize) -> Result<Operator> {
        self.space.check_mode(mode)?;
        let k = self.space.n_modes();
        let bit = 1usize << (k - mode);
        let mut mat = DMatrix::zeros(self.space.dim(), self.space.dim());
        // The string counts occupations strictly before `mode`, so flipping
        // mode `i` leaves the sign unchanged between the two branches.
        for col in 0..self.space.dim() {
            let sign = self.space.sign_string(col, mode);
            mat[(col ^ bit, col)] = C64::new(sign, 0.0);
        }
        Ok(Operator {
            space: self.space,
            mat,
        })
    }

    /// Product `gamma_a * gamma_b`.
    pub fn gamma_product(&self, a: usize, b: usize) -> Result<Operator> {
        Ok(&self.gamma(a)? * &self.gamma(b)?)
    }

    /// All Majorana operators `gamma_1..gamma_k`.
    pub fn gammas(&self) -> Result<Vec<Operator>> {
        (1..=self.space.n_modes()).map(|m| self.gamma(m)).collect()
    }

    /// Total fermion parity `(-1)^N`, diagonal in the Fock basis.
    pub fn parity(&self) -> Operator {
        let mut mat = DMatrix::zeros(self.space.dim(), self.space.dim());
        for i in 0..self.space.dim() {
            mat[(i, i)] = C64::new(self.space.parity_of_index(i) as f64, 0.0);
        }
        Operator {
            space: self.space,
            mat,
        }
    }
}

/// Builds the operator set for a space with `n_modes` in `1..=12`.
pub fn build_fock_space(n_modes: usize) -> Result<FockOps> {
    Ok(FockOps::new(FockSpace::new(n_modes)?))
}

/// Total fermion parity operator for a space.
pub fn parity_operator(space: FockSpace) -> Operator {
    FockOps::new(space).parity()
}

/// Anticommutator `{A, B} = AB + BA`.
pub fn anticommutator(a: &Operator, b: &Operator) -> Result<Operator> {
    check_same_space(a.space, b.space)?;
    Ok(&(a * b) + &(b * a))
}

/// Commutator `[A, B] = AB - BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    check_same_space(a.space, b.space)?;
    Ok(&(a * b) - &(b * a))
}

/// Squared overlap `|<a|b>|^2` between two normalized states.
///
/// Both inputs must be normalized within [`NORMALIZATION_TOL`].
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    check_same_space(a.space, b.space)?;
    for psi in [a, b] {
        let defect = (psi.norm() - 1.0).abs();
        if defect > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { defect });
        }
    }
    Ok(a.inner(b)?.norm_sqr())
}

pub(crate) fn check_same_space(a: FockSpace, b: FockSpace) -> Result<()> {
    if a != b {
        return Err(Error::SpaceMismatch(a.n_modes(), b.n_modes()));
    }
    Ok(())
}
