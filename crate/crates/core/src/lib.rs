//! Numerically exact simulator of qubits built from Majorana modes bound to
//! vortices in a p-wave superfluid.
//!
//! The crate models a register of vortex-core modes as a dense fermionic Fock
//! space and builds everything else on top of that:
//!
//! - [`clifford`]: Fock space, mode operators, Majorana operators, parity.
//! - [`hamiltonian`]: inter-vortex coupling Hamiltonians, their spectra, and
//!   the quasiparticle eigenmodes of a three-vortex cell.
//! - [`braiding`]: vortex exchange unitaries, the logical single-qubit gates
//!   they generate, and Euler-angle synthesis of arbitrary rotations.
//! - [`dynamics`]: exact piecewise-constant time evolution with conservation
//!   monitors, and Rabi-style transition analysis.
//! - [`twoqubit`]: a two-cell register, the entangling beat protocol, and its
//!   validity conditions.
//!
//! All matrices are dense `nalgebra` matrices over `Complex64`; every public
//! result is exact to numerical precision rather than perturbative.

pub mod braiding;
pub mod clifford;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod twoqubit;

pub use braiding::{
    braid_transport, braid_unitary, compose_m_gates, composite_gate, composite_gate_even,
    decompose_su2, dynamical_phase_matrix, gate_fidelity, m31_even, m31_odd, m_gate, BraidMove,
    BraidWord, GateMatrix4, MGate, Orientation,
};
pub use clifford::{
    anticommutator, build_fock_space, commutator, fidelity, parity_operator, FockOps, FockSpace,
    Operator, StateVector, C64,
};
pub use dynamics::{
    evolve_constant, evolve_schedule, rabi_schedule, rabi_transition_check, trace_constant,
    DriveTerm, EvolutionTrace, PulseSchedule, RabiPairResult, DEFAULT_STEPS_PER_DRIVE_PERIOD,
    MIN_STEPS_PER_DRIVE_PERIOD, RABI_PAIRS, STEP_BUDGET,
};
pub use error::Error;
pub use hamiltonian::{
    build_hamiltonian, couplings_from_angles, eigenstate_table, phi_from_couplings,
    quasiparticle_ops, CouplingSet, CouplingTerm, EigenstateTable, LabeledEigenstate, Level,
    QuasiparticleOps, Spectrum, ThreeVortexCouplings,
};
pub use twoqubit::{
    apply_logical_gate, beat_oscillation_probe, bell_minus_target, bell_plus_target,
    build_two_qubit, entangling_protocol, entangling_protocol_for, ivanov_braid, ConditionReport,
    ProtocolOutcome, TwoQubitSystem, DEFAULT_CONDITION_THRESHOLD, LEAKAGE_TOL,
};

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
