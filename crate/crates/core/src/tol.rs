//! Default numerical tolerances.

/// Maximum allowed `|V - V^T|` entry for a matrix to count as symmetric.
pub const SYMMETRY: f64 = 1e-10;

/// Slack on the smallest eigenvalue of `V + i Omega` for a valid state.
pub const UNCERTAINTY: f64 = 1e-9;

/// A state is faithful when the smallest eigenvalue of `V + i Omega` exceeds this,
/// and a covariance counts as faithful for Petz construction when every symplectic
/// eigenvalue exceeds `1 + FAITHFUL`.
pub const FAITHFUL: f64 = 1e-7;

/// A recovery deficit below this value counts as a counterexample.
pub const COUNTEREXAMPLE: f64 = -1e-6;
