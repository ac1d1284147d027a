//! Entanglement detection for two-qubit states from weak values measured on
//! two copies of the state.
//!
//! The crate is `no_std` (it needs `alloc`). It contains the dense complex
//! matrix kernel, the two-qubit state model with its separability machinery,
//! the weak-value protocol (detection and tomography), the gate-level circuit
//! for the weak interaction, and the perturbation robustness check.
//!
//! The pointer simulation, file formats and the command-line tool live in the
//! `twocopy` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod circuit;
pub mod protocol;
pub mod qmat;
pub mod robustness;
pub mod states;

pub use qmat::{CMatrix, ComplexScalar, HermitianEigen, QmatError};
pub use states::{PureAmplitudes, StateError, TwoQubitState, Verdict};

/// Decision thresholds shared by the protocol and its oracles.
pub mod tolerances {
    /// Absolute threshold on det(ρ^{T_B}) (and on PT eigenvalues) for the
    /// Entangled/Separable call.
    pub const TAU_DET: f64 = 1e-9;
    /// A diagonal element below this counts as "no signal".
    pub const TAU_DIAG: f64 = 1e-10;
    /// Nullity threshold for weak values in the special-case branches and the
    /// pure-state equality test.
    pub const TAU_WV: f64 = 1e-9;
    /// Minimum post-selection probability for a weak value to be defined.
    pub const TAU_DEN: f64 = 1e-12;
    /// Hermiticity / unit-trace / positivity slack when validating states.
    pub const STATE_TOL: f64 = 1e-10;
}
