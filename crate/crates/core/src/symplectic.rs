//! Gaussian states, Williamson decomposition, and matrix functions of `V Omega`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    asymmetry, inverse, matrix_to_rows, min_eig_hermitian, require_even, require_square,
    rows_to_matrix, spd_sqrt, symmetric_eigen, symmetric_pinv, symmetrize,
};
use crate::tol;

/// `Omega = [[0, I_n], [-I_n, 0]]` in xxpp ordering.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for j in 0..modes {
        omega[(j, modes + j)] = 1.0;
        omega[(modes + j, j)] = -1.0;
    }
    omega
}

/// Mean vector and covariance matrix of an `n`-mode Gaussian state.
///
/// Construction checks only shapes; use [`validate_state`] for physicality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    modes: usize,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

impl TryFrom<StateRepr> for GaussianState {
    type Error = Error;

    fn try_from(repr: StateRepr) -> Result<Self> {
        let cov = rows_to_matrix(&repr.cov, "cov")?;
        let state = GaussianState::new(DVector::from_vec(repr.mean), cov)?;
        if state.modes() != repr.modes {
            return Err(Error::Dimension(format!(
                "\"modes\" is {} but cov describes {} modes",
                repr.modes,
                state.modes()
            )));
        }
        Ok(state)
    }
}

impl From<GaussianState> for StateRepr {
    fn from(state: GaussianState) -> Self {
        StateRepr {
            modes: state.modes(),
            mean: state.mean.iter().copied().collect(),
            cov: matrix_to_rows(&state.cov),
        }
    }
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = require_square(&cov, "covariance")?;
        require_even(dim, "covariance")?;
        if mean.len() != dim {
            return Err(Error::Dimension(format!(
                "mean has length {} but covariance is {dim}x{dim}",
                mean.len()
            )));
        }
        Ok(Self { mean, cov })
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::thermal(modes, 1.0)
    }

    /// Isotropic thermal state with covariance `nu I`.
    pub fn thermal(modes: usize, nu: f64) -> Self {
        Self {
            mean: DVector::zeros(2 * modes),
            cov: DMatrix::identity(2 * modes, 2 * modes) * nu,
        }
    }

    pub fn coherent(mean: DVector<f64>) -> Result<Self> {
        let dim = mean.len();
        Self::new(mean, DMatrix::identity(dim, dim))
    }

    /// Single-mode rotated, squeezed thermal state: `R(theta) Z(r) (nu I) Z(r) R(theta)^T`.
    pub fn squeezed_thermal(nu: f64, squeezing: f64, angle: f64, mean: [f64; 2]) -> Self {
        let (c, s) = (angle.cos(), angle.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        let sq = DMatrix::from_diagonal(&DVector::from_vec(vec![
            squeezing.exp(),
            (-squeezing).exp(),
        ]));
        let sym = &rot * sq;
        let cov = symmetrize(&(&sym * sym.transpose() * nu));
        Self {
            mean: DVector::from_column_slice(&mean),
            cov,
        }
    }

    pub fn with_mean(mut self, mean: DVector<f64>) -> Result<Self> {
        if mean.len() != self.mean.len() {
            return Err(Error::Dimension("mean length changed".into()));
        }
        self.mean = mean;
        Ok(self)
    }

    pub fn modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(williamson(&self.cov)?.symplectic_eigenvalues)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    pub symmetric_defect: f64,
    pub min_uncertainty_eigenvalue: f64,
    pub is_valid: bool,
    pub is_faithful: bool,
}

pub fn validate_state(state: &GaussianState) -> ValidityReport {
    let symmetric_defect = asymmetry(&state.cov);
    let min_uncertainty_eigenvalue = min_eig_hermitian(&state.cov, &symplectic_form(state.modes()));
    let is_valid =
        symmetric_defect <= tol::SYMMETRY && min_uncertainty_eigenvalue >= -tol::UNCERTAINTY;
    ValidityReport {
        symmetric_defect,
        min_uncertainty_eigenvalue,
        is_valid,
        is_faithful: is_valid && min_uncertainty_eigenvalue > tol::FAITHFUL,
    }
}

pub(crate) fn require_valid(state: &GaussianState, what: &str) -> Result<()> {
    let report = validate_state(state);
    if report.is_valid {
        Ok(())
    } else {
        Err(Error::InvalidState(format!(
            "{what}: symmetry defect {:.3e}, min eigenvalue of V + i Omega {:.3e}",
            report.symmetric_defect, report.min_uncertainty_eigenvalue
        )))
    }
}

/// `V = S (D + D) S^T` with `S` symplectic and `D = diag(symplectic_eigenvalues)`,
/// eigenvalues sorted in descending order.
#[derive(Clone, Debug)]
pub struct Williamson {
    pub symplectic: DMatrix<f64>,
    pub symplectic_eigenvalues: Vec<f64>,
}

pub fn williamson(cov: &DMatrix<f64>) -> Result<Williamson> {
    let dim = require_square(cov, "covariance")?;
    let modes = require_even(dim, "covariance")?;
    let root = spd_sqrt(cov, "covariance")?;
    // K = V^1/2 Omega V^1/2 is antisymmetric; its eigenvalues are +-i nu.
    let k = &root * symplectic_form(modes) * &root;
    // -K^2 = K^T K is symmetric with eigenvalues nu^2, each twice. Take `a` from its
    // eigenvectors and `b = -K a / nu`, so that K a = -nu b and K b = nu a, the xxpp
    // block form of Omega D. Near-degenerate pairs stay resolved to rounding.
    let (values, vectors) = symmetric_eigen(&(k.transpose() * &k));
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let mut basis = DMatrix::<f64>::zeros(dim, dim);
    let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(dim);
    let mut nus = Vec::with_capacity(modes);
    for &idx in &order {
        if nus.len() == modes {
            break;
        }
        let mut a = vectors.column(idx).into_owned();
        for _ in 0..2 {
            for c in &chosen {
                a -= c * c.dot(&a);
            }
        }
        let norm = a.norm();
        if norm < 0.5 {
            continue;
        }
        a /= norm;
        let ka = &k * &a;
        let nu = ka.norm();
        if !(nu > 0.0) {
            return Err(Error::Domain(
                "covariance has a vanishing symplectic eigenvalue".into(),
            ));
        }
        let b = -ka / nu;
        let j = nus.len();
        basis.set_column(j, &a);
        basis.set_column(modes + j, &b);
        chosen.push(a);
        chosen.push(b);
        nus.push(nu);
    }
    if nus.len() != modes {
        return Err(Error::Domain(
            "symplectic spectrum could not be resolved".into(),
        ));
    }
    let scale = DVector::from_fn(dim, |i, _| 1.0 / nus[i % modes].sqrt());
    let symplectic = root * basis * DMatrix::from_diagonal(&scale);
    Ok(Williamson {
        symplectic,
        symplectic_eigenvalues: nus,
    })
}

impl Williamson {
    pub fn modes(&self) -> usize {
        self.symplectic_eigenvalues.len()
    }

    /// `S^-1 = Omega S^T Omega^T`.
    pub fn inverse_symplectic(&self) -> DMatrix<f64> {
        let omega = symplectic_form(self.modes());
        &omega * self.symplectic.transpose() * omega.transpose()
    }

    /// `S diag(f(nu) + f(nu)) S^-1`, the even part of a function of `V Omega`.
    pub(crate) fn conjugate_scalar(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let diag = self.doubled(f);
        &self.symplectic * DMatrix::from_diagonal(&diag) * self.inverse_symplectic()
    }

    /// `S^-T diag(f(nu) + f(nu)) S^T`, the same function of `Omega V`.
    pub(crate) fn conjugate_scalar_transposed(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        self.conjugate_scalar(f).transpose()
    }

    pub(crate) fn doubled(&self, f: impl Fn(f64) -> f64) -> DVector<f64> {
        let n = self.modes();
        DVector::from_fn(2 * n, |i, _| f(self.symplectic_eigenvalues[i % n]))
    }

    pub fn smallest(&self) -> f64 {
        self.symplectic_eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn filter_block(nu: f64) -> Result<f64> {
    if nu < 1.0 - tol::FAITHFUL {
        return Err(Error::Domain(format!(
            "symplectic eigenvalue {nu} below 1 violates the uncertainty relation"
        )));
    }
    Ok((1.0 - 1.0 / (nu * nu)).max(0.0).sqrt())
}

/// `sqrt(I + (V Omega)^-2)`; each symplectic block scales by `sqrt(1 - 1/nu^2)`.
pub fn sqrt_filter(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let w = williamson(cov)?;
    for &nu in &w.symplectic_eigenvalues {
        filter_block(nu)?;
    }
    Ok(w.conjugate_scalar(|nu| filter_block(nu).unwrap_or(0.0)))
}

/// Covariance of the normalized operator `sqrt(sigma)`: `(sqrt_filter(V) + I) V`.
pub fn sqrt_state_covariance(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let filter = sqrt_filter(cov)?;
    let dim = cov.nrows();
    Ok(symmetrize(&((filter + DMatrix::identity(dim, dim)) * cov)))
}

/// Exponential form `rho = exp(-(r - s)^T H (r - s) / 2) / Z`.
#[derive(Clone, Debug)]
pub struct HamiltonianForm {
    pub matrix: DMatrix<f64>,
    /// `ln Z`, with `Z = prod_j 1 / (2 sinh(h_j / 2))`.
    pub log_partition: f64,
}

fn arcoth(nu: f64) -> f64 {
    0.5 * ((nu + 1.0) / (nu - 1.0)).ln()
}

pub(crate) fn require_faithful_spectrum(w: &Williamson, what: &str) -> Result<()> {
    let smallest = w.smallest();
    if smallest > 1.0 + tol::FAITHFUL {
        Ok(())
    } else {
        Err(Error::NotFaithful {
            what: what.to_string(),
            smallest,
        })
    }
}

pub fn hamiltonian_from_covariance(cov: &DMatrix<f64>) -> Result<HamiltonianForm> {
    let w = williamson(cov)?;
    hamiltonian_from_williamson(&w)
}

pub(crate) fn hamiltonian_from_williamson(w: &Williamson) -> Result<HamiltonianForm> {
    require_faithful_spectrum(w, "state")?;
    let energies = w.doubled(|nu| 2.0 * arcoth(nu));
    let s_inv = w.inverse_symplectic();
    let matrix = symmetrize(&(s_inv.transpose() * DMatrix::from_diagonal(&energies) * &s_inv));
    let log_partition = w
        .symplectic_eigenvalues
        .iter()
        // 2 sinh(arcoth nu) = 2 / sqrt(nu^2 - 1)
        .map(|&nu| 0.5 * (nu * nu - 1.0).ln() - std::f64::consts::LN_2)
        .sum();
    Ok(HamiltonianForm {
        matrix,
        log_partition,
    })
}

/// Inverse of [`hamiltonian_from_covariance`]: `V = coth(i Omega H / 2) i Omega`.
pub fn covariance_from_hamiltonian(hamiltonian: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let w = williamson(hamiltonian)
        .map_err(|e| Error::Domain(format!("Hamiltonian must be positive definite: {e}")))?;
    // H = T (E + E) T^T, so V = T^-T coth(E/2) T^-1.
    let t_inv = w.inverse_symplectic();
    let occupation = w.doubled(|energy| 1.0 / (energy / 2.0).tanh());
    Ok(symmetrize(
        &(t_inv.transpose() * DMatrix::from_diagonal(&occupation) * t_inv),
    ))
}

/// `chi(w) = Tr[rho D_-w] = exp(-(Omega w)^T V (Omega w) / 4 + i (Omega w)^T s)`.
pub fn char_function(state: &GaussianState, w: &DVector<f64>) -> Complex64 {
    let ow = symplectic_form(state.modes()) * w;
    let quad = ow.dot(&(state.cov() * &ow));
    Complex64::new(-0.25 * quad, ow.dot(state.mean())).exp()
}

/// `Tr[D_-y sqrt(sigma) D_x sqrt(sigma)]` for a zero-mean Gaussian `sigma`.
pub fn sandwich_char(cov: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> Result<Complex64> {
    let filter = sqrt_filter(cov)?;
    Ok(sandwich_char_with_filter(cov, &filter, x, y))
}

pub(crate) fn sandwich_char_with_filter(
    cov: &DMatrix<f64>,
    filter: &DMatrix<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Complex64 {
    let omega = symplectic_form(cov.nrows() / 2);
    let ox = &omega * x;
    let oy = &omega * y;
    let exponent = -0.25 * ox.dot(&(cov * &ox)) - 0.25 * oy.dot(&(cov * &oy))
        + 0.5 * ox.dot(&(filter * cov * &oy));
    Complex64::new(exponent, 0.0).exp()
}

/// Covariance of the normalized operator `sqrt(sigma) omega sqrt(sigma)`.
pub fn sqrt_sandwich_covariance(
    cov_sigma: &DMatrix<f64>,
    cov_omega: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if cov_sigma.shape() != cov_omega.shape() {
        return Err(Error::Dimension("covariances differ in size".into()));
    }
    let w = williamson(cov_sigma)?;
    for &nu in &w.symplectic_eigenvalues {
        filter_block(nu)?;
    }
    let filter = w.conjugate_scalar(|nu| filter_block(nu).unwrap_or(0.0));
    let filter_t = w.conjugate_scalar_transposed(|nu| filter_block(nu).unwrap_or(0.0));
    let sum = cov_sigma + cov_omega;
    let sum_inv = inverse(&sum, "V_omega + V_sigma").unwrap_or_else(|_| symmetric_pinv(&sum));
    let out = cov_sigma - filter * cov_sigma * sum_inv * cov_sigma * filter_t;
    Ok(symmetrize(&out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use approx::assert_abs_diff_eq;

    fn symplectic_defect(s: &DMatrix<f64>) -> f64 {
        let omega = symplectic_form(s.nrows() / 2);
        max_abs(&(s * &omega * s.transpose() - omega))
    }

    #[test]
    fn omega_identities() {
        for n in 1..=3 {
            let omega = symplectic_form(n);
            let eye = DMatrix::<f64>::identity(2 * n, 2 * n);
            assert_eq!(omega.transpose() * &omega, eye);
            assert_eq!(&omega * &omega, -eye);
        }
        assert_eq!(
            symplectic_form(1),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
        );
    }

    #[test]
    fn validity_examples() {
        let vac = validate_state(&GaussianState::vacuum(1));
        assert!(vac.is_valid && !vac.is_faithful);
        let th = validate_state(&GaussianState::thermal(1, 3.0));
        assert!(th.is_faithful);
        assert_abs_diff_eq!(th.min_uncertainty_eigenvalue, 2.0, epsilon = 1e-12);
        let bad = validate_state(&GaussianState::thermal(1, 0.5));
        assert!(!bad.is_valid);
        assert_abs_diff_eq!(bad.min_uncertainty_eigenvalue, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn williamson_examples() {
        let w = williamson(&DMatrix::identity(2, 2)).unwrap();
        assert_abs_diff_eq!(w.symplectic_eigenvalues[0], 1.0, epsilon = 1e-12);
        assert!(
            max_abs(&(&w.symplectic * w.symplectic.transpose() - DMatrix::identity(2, 2))) < 1e-12
        );

        let sq = DMatrix::from_diagonal(&DVector::from_vec(vec![1f64.exp(), (-1f64).exp()]));
        let w = williamson(&sq).unwrap();
        assert_abs_diff_eq!(w.symplectic_eigenvalues[0], 1.0, epsilon = 1e-12);
        // S is fixed up to an orthosymplectic factor; diag(e^0.5, e^-0.5) is one choice.
        assert!(max_abs(&(&w.symplectic * w.symplectic.transpose() - &sq)) < 1e-12);
        assert!(symplectic_defect(&w.symplectic) < 1e-12);

        let v = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let w = williamson(&v).unwrap();
        assert_abs_diff_eq!(w.symplectic_eigenvalues[0], 3f64.sqrt(), epsilon = 1e-12);
        assert!(symplectic_defect(&w.symplectic) < 1e-12);
    }

    #[test]
    fn williamson_reconstructs_multimode() {
        // Two-mode squeezed thermal with unequal local noise.
        let v = DMatrix::from_row_slice(
            4,
            4,
            &[
                3.0, 1.2, 0.3, 0.0, 1.2, 2.5, 0.0, -0.4, 0.3, 0.0, 2.0, 0.1, 0.0, -0.4, 0.1, 1.8,
            ],
        );
        let w = williamson(&v).unwrap();
        assert!(w.symplectic_eigenvalues[0] >= w.symplectic_eigenvalues[1]);
        let d = DMatrix::from_diagonal(&w.doubled(|nu| nu));
        assert!(max_abs(&(&w.symplectic * d * w.symplectic.transpose() - &v)) < 1e-12);
        assert!(symplectic_defect(&w.symplectic) < 1e-12);
    }

    #[test]
    fn williamson_degenerate_spectrum() {
        let v = DMatrix::<f64>::identity(6, 6) * 2.0;
        let w = williamson(&v).unwrap();
        for nu in &w.symplectic_eigenvalues {
            assert_abs_diff_eq!(*nu, 2.0, epsilon = 1e-12);
        }
        assert!(symplectic_defect(&w.symplectic) < 1e-12);
    }

    #[test]
    fn sqrt_filter_examples() {
        assert!(max_abs(&sqrt_filter(&DMatrix::identity(2, 2)).unwrap()) < 1e-12);
        let f = sqrt_filter(&(DMatrix::identity(2, 2) * 3.0)).unwrap();
        assert!(max_abs(&(f - DMatrix::identity(2, 2) * (8.0f64 / 9.0).sqrt())) < 1e-12);
        assert!(sqrt_filter(&(DMatrix::identity(2, 2) * 0.5)).is_err());
    }

    #[test]
    fn sqrt_filter_squares_to_definition() {
        // Dense oracle: F^2 must equal I + (V Omega)^-2.
        let v = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let f = sqrt_filter(&v).unwrap();
        let vo_inv = (&v * symplectic_form(1)).try_inverse().unwrap();
        let target = DMatrix::identity(2, 2) + &vo_inv * &vo_inv;
        assert!(max_abs(&(&f * &f - target)) < 1e-12);
        // F is similar to sqrt(2/3) I.
        let eig = f.complex_eigenvalues();
        for e in eig.iter() {
            assert_abs_diff_eq!(e.re, (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn sqrt_state_covariance_examples() {
        let eye = DMatrix::<f64>::identity(2, 2);
        assert!(max_abs(&(sqrt_state_covariance(&eye).unwrap() - &eye)) < 1e-12);
        let out = sqrt_state_covariance(&(&eye * 3.0)).unwrap();
        assert!(max_abs(&(out - &eye * (3.0 + 2.0 * 2f64.sqrt()))) < 1e-12);
    }

    #[test]
    fn hamiltonian_examples() {
        let h = hamiltonian_from_covariance(&(DMatrix::identity(2, 2) * 3.0)).unwrap();
        assert!(max_abs(&(h.matrix - DMatrix::identity(2, 2) * 2f64.ln())) < 1e-12);
        assert_abs_diff_eq!(h.log_partition, 2f64.sqrt().ln(), epsilon = 1e-12);
        let v = covariance_from_hamiltonian(&(DMatrix::identity(2, 2) * 2f64.ln())).unwrap();
        assert!(max_abs(&(v - DMatrix::identity(2, 2) * 3.0)) < 1e-12);
        let big = hamiltonian_from_covariance(&(DMatrix::identity(2, 2) * 1e6)).unwrap();
        assert_abs_diff_eq!(big.matrix[(0, 0)], 2e-6, epsilon = 1e-12);
        assert!(hamiltonian_from_covariance(&DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn hamiltonian_transforms_covariantly() {
        let s = DMatrix::from_row_slice(2, 2, &[1.3, 0.4, 0.2, (1.0 + 0.4 * 0.2) / 1.3]);
        let v = &s * 3.0 * s.transpose();
        let h = hamiltonian_from_covariance(&v).unwrap();
        let s_inv = s.clone().try_inverse().unwrap();
        let expected = s_inv.transpose() * 2f64.ln() * &s_inv;
        assert!(max_abs(&(h.matrix - expected)) < 1e-12);
    }

    #[test]
    fn char_function_examples() {
        let vac = GaussianState::vacuum(1);
        let w0 = DVector::zeros(2);
        assert_abs_diff_eq!(char_function(&vac, &w0).re, 1.0, epsilon = 1e-15);
        let chi = char_function(&vac, &DVector::from_vec(vec![1.0, 0.0]));
        assert_abs_diff_eq!(chi.re, (-0.25f64).exp(), epsilon = 1e-15);
        // Omega (0, 1) = (1, 0), so the phase is +s_x.
        let th = GaussianState::thermal(1, 3.0)
            .with_mean(DVector::from_vec(vec![1.0, 0.0]))
            .unwrap();
        let chi = char_function(&th, &DVector::from_vec(vec![0.0, 1.0]));
        let expected = Complex64::new(-0.75, 1.0).exp();
        assert_abs_diff_eq!((chi - expected).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sandwich_examples() {
        let eye = DMatrix::<f64>::identity(2, 2);
        let x = DVector::from_vec(vec![0.7, -0.3]);
        let y = DVector::from_vec(vec![0.2, 1.1]);
        let vac = sandwich_char(&eye, &x, &y).unwrap();
        assert_abs_diff_eq!(
            vac.re,
            (-x.norm_squared() / 4.0 - y.norm_squared() / 4.0).exp(),
            epsilon = 1e-14
        );
        let zero = DVector::zeros(2);
        assert_abs_diff_eq!(
            sandwich_char(&(&eye * 3.0), &zero, &zero).unwrap().re,
            1.0,
            epsilon = 1e-15
        );
        let th = sandwich_char(
            &(&eye * 3.0),
            &DVector::from_vec(vec![1.0, 0.0]),
            &DVector::from_vec(vec![0.0, 1.0]),
        )
        .unwrap();
        assert_abs_diff_eq!(th.re, (-1.5f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn sqrt_sandwich_examples() {
        let eye = DMatrix::<f64>::identity(2, 2);
        let pure = sqrt_sandwich_covariance(&eye, &(&eye * 2.0)).unwrap();
        assert!(max_abs(&(pure - &eye)) < 1e-12);
        let th = sqrt_sandwich_covariance(&(&eye * 3.0), &(&eye * 3.0)).unwrap();
        assert!(max_abs(&(th - &eye * (5.0 / 3.0))) < 1e-12);
    }

    #[test]
    fn state_json_roundtrip() {
        let json = r#"{"modes":1,"mean":[0.0,0.0],"cov":[[3.0,0.0],[0.0,3.0]]}"#;
        let state: GaussianState = serde_json::from_str(json).unwrap();
        assert_eq!(state, GaussianState::thermal(1, 3.0));
        assert_eq!(serde_json::to_string(&state).unwrap(), json);
        let bad = r#"{"modes":2,"mean":[0.0,0.0],"cov":[[3.0,0.0],[0.0,3.0]]}"#;
        assert!(serde_json::from_str::<GaussianState>(bad).is_err());
    }
}
