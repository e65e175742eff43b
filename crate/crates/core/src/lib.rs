//! Gaussian Petz recovery channels for bosonic continuous-variable systems.
//!
//! Conventions used throughout the crate:
//!
//! * Quadratures are ordered `r = (x_1, .., x_n, p_1, .., p_n)` ("xxpp"), so the
//!   symplectic form is `[[0, I], [-I, 0]]`. Many other libraries use xpxp.
//! * `hbar = 1` and the covariance matrix is the anticommutator
//!   `V = <{r - s, (r - s)^T}>` without a factor one half, so the vacuum has `V = I`.
//! * Displacement operators are `D_z = exp(i z^T Omega r)`.
//! * Entropies are in nats.
//!
//! The [`fock`] module is a dense truncated-number-basis reference used to
//! cross-check the closed forms; it is slow by design.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod fock;
pub mod info;
pub mod lie;
mod linalg;
pub mod petz;
pub mod search;
pub mod symplectic;
pub mod tol;

pub use channels::{CpReport, DisplacementAdjoint, GaussianChannel};
pub use error::{Error, Result};
pub use fock::{
    dense_deficit, dense_measures, oracle_suite, DenseDeficit, DenseMeasures, FockOperator,
    OracleCheck,
};
pub use info::{
    entropy, fidelity, fidelity_recovery_bound, log_fidelity, recovery_deficit, relative_entropy,
    BoundReport, DeficitReport, Instance, QuadratureConfig,
};
pub use lie::{
    lie_exp, product_to_single, sandwich_via_golden_rule, GroupElement, QuadraticHamiltonian,
};
pub use petz::{
    cp_certificate, petz_channel, petz_identity_sides, probe_vectors, rotated_petz,
    symplectic_flow, verify_petz_identity, PetzConstruction, SymplecticFlow,
};
pub use search::{run_search, sample_instance, SearchConfig, SearchRecord, SearchSummary};
pub use symplectic::{
    char_function, covariance_from_hamiltonian, hamiltonian_from_covariance, sandwich_char,
    sqrt_filter, sqrt_sandwich_covariance, sqrt_state_covariance, symplectic_form, validate_state,
    williamson, GaussianState, HamiltonianForm, ValidityReport, Williamson,
};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
