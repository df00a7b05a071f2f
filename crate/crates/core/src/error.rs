//! Error type shared by all modules.

use thiserror::Error;

/// Errors reported by simulator operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Mode count outside the supported dense range.
    #[error("mode count {0} outside supported range 1..=12")]
    ModeCountOutOfRange(usize),

    /// Two objects built over different Fock spaces were combined.
    #[error("operands act on different spaces ({0} vs {1} modes)")]
    SpaceMismatch(usize, usize),

    /// A vortex index fell outside the space.
    #[error("vortex index {index} outside 1..={n_modes}")]
    VortexIndexOutOfRange { index: usize, n_modes: usize },

    /// A pair operation was given the same vortex twice.
    #[error("operation requires two distinct vortices, got ({0}, {0})")]
    IdenticalVortices(usize),

    /// A coupling or angle was NaN or infinite.
    #[error("couplings and angles must be finite")]
    NonFiniteInput,

    /// A coupling magnitude that must be non-negative was negative.
    #[error("coupling magnitude J must be non-negative, got {0}")]
    NegativeMagnitude(f64),

    /// A state expected to be normalized was not.
    #[error("state norm deviates from 1 by {defect:.3e}")]
    NotNormalized { defect: f64 },

    /// A matrix expected to be unitary was not.
    #[error("matrix deviates from unitarity by {defect:.3e} (tolerance {tol:.1e})")]
    NotUnitary { defect: f64, tol: f64 },

    /// A matrix expected to be Hermitian was not.
    #[error("matrix deviates from Hermiticity by {defect:.3e}")]
    NotHermitian { defect: f64 },

    /// Requested schedule resolution below the supported minimum.
    #[error("steps_per_drive_period {0} below minimum 32")]
    TooFewSteps(usize),

    /// Drive terms must oscillate; a static shift belongs in the statics.
    #[error("drive angular frequency {0} is not positive")]
    DriveFrequencyNotPositive(f64),

    /// A schedule would exceed the global step budget.
    #[error("schedule requires {requested} steps, exceeding the {budget}-step budget")]
    StepBudgetExceeded { requested: u64, budget: u64 },

    /// A state carried weight outside the logical subspace of a gate.
    #[error("state carries weight {weight:.3e} outside the logical subspace (tolerance {tol:.1e})")]
    LogicalLeakage { weight: f64, tol: f64 },

    /// A logical-gate target other than qubit 1 or qubit 2.
    #[error("qubit index {0} is not 1 or 2")]
    QubitIndexOutOfRange(usize),

    /// The entangling protocol found no inter-qubit oscillation to lock onto.
    #[error("no beat oscillation detected within the probe window")]
    NoBeatDetected,

    /// A matrix expected to be block-diagonal was not.
    #[error("block structure violated: off-block magnitude {0:.3e}")]
    BlockStructure(f64),

    /// A projection basis failed its orthonormality check.
    #[error("projection basis not orthonormal: Gram defect {defect:.3e}")]
    BasisNotOrthonormal { defect: f64 },

    /// A projected operator leaked weight outside the projection basis.
    #[error("projection incomplete: norm defect {defect:.3e}")]
    ProjectionNotComplete { defect: f64 },
}
