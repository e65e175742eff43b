//! Inhomogeneous quadratic Hamiltonians `(i/2) r^T Omega X r + i s^T Omega r + (i/2) a`
//! and their faithful `(2n+2)`-dimensional matrix representation
//! `[[0, s^T Omega^T, a], [0, X, s], [0, 0, 0]]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, max_abs, real_log, require_even, require_square, to_complex};
use crate::symplectic::{hamiltonian_from_covariance, symplectic_form};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticHamiltonian {
    /// `X`, with `Omega X` symmetric.
    pub generator: DMatrix<f64>,
    /// `s`, the linear (displacement) part.
    pub linear: DVector<f64>,
    /// `a`, the central element; it carries operator phases.
    pub constant: f64,
}

/// A group element `exp(embed(h))`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub matrix: DMatrix<f64>,
}

impl QuadraticHamiltonian {
    pub fn new(generator: DMatrix<f64>, linear: DVector<f64>, constant: f64) -> Result<Self> {
        let dim = require_square(&generator, "generator")?;
        let modes = require_even(dim, "generator")?;
        if linear.len() != dim {
            return Err(Error::Dimension(format!(
                "linear part has length {}, expected {dim}",
                linear.len()
            )));
        }
        let defect = asymmetry(&(symplectic_form(modes) * &generator));
        if defect > 1e-10 * max_abs(&generator).max(1.0) {
            return Err(Error::Domain(format!(
                "Omega X is not symmetric (defect {defect:.3e})"
            )));
        }
        Ok(Self {
            generator,
            linear,
            constant,
        })
    }

    /// Generator from a symmetric quadratic form `A = Omega X`.
    pub fn from_quadratic_form(
        form: &DMatrix<f64>,
        linear: DVector<f64>,
        constant: f64,
    ) -> Result<Self> {
        let modes = require_even(require_square(form, "quadratic form")?, "quadratic form")?;
        let form = (form + form.transpose()) * 0.5;
        Self::new(symplectic_form(modes).transpose() * form, linear, constant)
    }

    pub fn displacement(linear: DVector<f64>) -> Result<Self> {
        let dim = linear.len();
        Self::new(DMatrix::zeros(dim, dim), linear, 0.0)
    }

    pub fn modes(&self) -> usize {
        self.linear.len() / 2
    }

    pub fn embed(&self) -> DMatrix<f64> {
        let dim = self.linear.len();
        let mut m = DMatrix::zeros(dim + 2, dim + 2);
        let border = symplectic_form(self.modes()) * &self.linear;
        for i in 0..dim {
            m[(0, 1 + i)] = border[i];
            m[(1 + i, dim + 1)] = self.linear[i];
        }
        m.view_mut((1, 1), (dim, dim)).copy_from(&self.generator);
        m[(0, dim + 1)] = self.constant;
        m
    }

    /// Lie bracket matching the operator commutator.
    pub fn commutator(&self, other: &Self) -> Self {
        let omega = symplectic_form(self.modes());
        Self {
            generator: &self.generator * &other.generator - &other.generator * &self.generator,
            linear: &self.generator * &other.linear - &other.generator * &self.linear,
            constant: -2.0 * self.linear.dot(&(&omega * &other.linear)),
        }
    }

    pub fn negate(&self) -> Self {
        Self {
            generator: -&self.generator,
            linear: -&self.linear,
            constant: -self.constant,
        }
    }
}

/// `(e^X, (e^X - I)/X, (e^X - I - X)/X^2)` by Taylor series on `X / 2^k` and doubling.
fn phi_functions(x: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let dim = x.nrows();
    let identity = DMatrix::<f64>::identity(dim, dim);
    let norm = x
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut halvings = 0_i32;
    while norm / 2f64.powi(halvings) >= 0.25 {
        halvings += 1;
    }
    let y = x / 2f64.powi(halvings);

    let mut exp = identity.clone();
    let mut phi1 = identity.clone();
    let mut phi2 = &identity * 0.5;
    let mut power = identity.clone();
    let mut factorial = 1.0_f64;
    for j in 1..=22 {
        power = &power * &y;
        factorial *= j as f64;
        exp += &power / factorial;
        phi1 += &power / (factorial * (j + 1) as f64);
        phi2 += &power / (factorial * ((j + 1) * (j + 2)) as f64);
    }
    for _ in 0..halvings {
        let next_phi2 = (&phi2 * 2.0 + &phi1 * &phi1) * 0.25;
        let next_phi1 = &phi1 * (&exp + &identity) * 0.5;
        exp = &exp * &exp;
        phi1 = next_phi1;
        phi2 = next_phi2;
    }
    (exp, phi1, phi2)
}

/// Closed-form exponential of the embedded Hamiltonian.
pub fn lie_exp(h: &QuadraticHamiltonian) -> GroupElement {
    let dim = h.linear.len();
    let omega = symplectic_form(h.modes());
    let (exp_plus, phi1_plus, phi2_plus) = phi_functions(&h.generator);
    let (_, phi1_minus, phi2_minus) = phi_functions(&(-&h.generator));
    // (X - sinh X) / X^2 = (phi2(-X) - phi2(X)) / 2
    let odd = (phi2_minus - phi2_plus) * 0.5;

    let mut m = DMatrix::<f64>::identity(dim + 2, dim + 2);
    let border = &omega * (phi1_minus * &h.linear);
    let right = phi1_plus * &h.linear;
    for i in 0..dim {
        m[(0, 1 + i)] = border[i];
        m[(1 + i, dim + 1)] = right[i];
    }
    m.view_mut((1, 1), (dim, dim)).copy_from(&exp_plus);
    m[(0, dim + 1)] = h.constant + h.linear.dot(&(omega * odd * &h.linear));
    GroupElement { matrix: m }
}

/// `h3` with `exp(h1) exp(h2) = exp(h3)`, using the principal logarithm.
pub fn product_to_single(
    h1: &QuadraticHamiltonian,
    h2: &QuadraticHamiltonian,
) -> Result<QuadraticHamiltonian> {
    if h1.modes() != h2.modes() {
        return Err(Error::Dimension(
            "Hamiltonians act on different numbers of modes".into(),
        ));
    }
    let product = lie_exp(h1).matrix * lie_exp(h2).matrix;
    let log =
        real_log(&product).map_err(|e| Error::Domain(format!("no single exponential: {e}")))?;
    let dim = h1.linear.len();
    let modes = h1.modes();
    let omega = symplectic_form(modes);
    let generator = log.view((1, 1), (dim, dim)).into_owned();
    let form = &omega * &generator;
    let defect = asymmetry(&form);
    if defect > 1e-9 * max_abs(&form).max(1.0) {
        return Err(Error::Domain(format!(
            "logarithm left the algebra (Omega X defect {defect:.3e})"
        )));
    }
    let linear = log.view((1, dim + 1), (dim, 1)).column(0).into_owned();
    QuadraticHamiltonian::from_quadratic_form(&form, linear, log[(0, dim + 1)])
}

/// `sqrt(sigma) D_x sqrt(sigma) = exp(log_weight) D_u sigma D_-u` with the purely
/// imaginary displacement `u = i * imaginary_displacement`.
#[derive(Clone, Debug, PartialEq)]
pub struct GoldenRuleSandwich {
    pub log_weight: f64,
    pub imaginary_displacement: DVector<f64>,
}

impl GoldenRuleSandwich {
    /// `Tr[D_-y sqrt(sigma) D_x sqrt(sigma)]` implied by the factorization.
    pub fn char_at(&self, cov: &DMatrix<f64>, y: &DVector<f64>) -> Complex64 {
        let omega = symplectic_form(cov.nrows() / 2);
        let oy = &omega * y;
        let exponent =
            self.log_weight + self.imaginary_displacement.dot(&oy) - 0.25 * oy.dot(&(cov * &oy));
        Complex64::new(exponent, 0.0).exp()
    }
}

/// Factor `sqrt(sigma) D_x sqrt(sigma)` for a zero-mean faithful `sigma` by multiplying
/// group elements: `sqrt(sigma)` is `exp((i/2) r^T Omega X r)` with complex `X = -(i/2) Omega H`.
pub fn sandwich_via_golden_rule(
    cov: &DMatrix<f64>,
    x: &DVector<f64>,
) -> Result<GoldenRuleSandwich> {
    let dim = cov.nrows();
    if x.len() != dim {
        return Err(Error::Dimension("x does not match the covariance".into()));
    }
    let h = hamiltonian_from_covariance(cov)?.matrix;
    let omega = to_complex(&symplectic_form(dim / 2));
    let generator = &omega * to_complex(&h) * Complex64::new(0.0, -0.5);
    let half = generator.exp();
    let full = &half * &half;
    let identity = DMatrix::<Complex64>::identity(dim, dim);
    let xc = x.map(|v| Complex64::new(v, 0.0));
    // Matching the right border of e^M_H e^M_x e^M_H = e^M_u e^{2 M_H} e^-M_u e^M_c
    // gives (I - E^2) u = E x; the corner then fixes the central element c.
    let u = (&identity - &full)
        .lu()
        .solve(&(&half * xc))
        .ok_or_else(|| Error::Domain("I - exp(-i Omega H) is singular".into()))?;
    let central = u.transpose() * omega.transpose() * &full * &u;
    let log_weight = Complex64::new(0.0, 0.5) * central[(0, 0)];
    Ok(GoldenRuleSandwich {
        log_weight: log_weight.re,
        imaginary_displacement: u.map(|c| c.im),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::sandwich_char;
    use approx::assert_abs_diff_eq;

    fn v(values: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(values)
    }

    fn rotation(theta: f64) -> QuadraticHamiltonian {
        QuadraticHamiltonian::new(symplectic_form(1) * theta, DVector::zeros(2), 0.0).unwrap()
    }

    #[test]
    fn embed_layout() {
        let h = QuadraticHamiltonian::displacement(v(&[0.5, -1.0])).unwrap();
        let m = h.embed();
        for i in 0..4 {
            for j in 0..=i {
                assert_eq!(m[(i, j)], 0.0);
            }
        }
        assert_eq!(m[(1, 3)], 0.5);
        assert_eq!(m[(0, 1)], -1.0); // (Omega s)_x = s_p
        let rot = rotation(0.4).embed();
        assert_eq!(
            rot.view((1, 1), (2, 2)).into_owned(),
            symplectic_form(1) * 0.4
        );
        assert!(QuadraticHamiltonian::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            DVector::zeros(2),
            0.0
        )
        .is_err());
    }

    #[test]
    fn exp_examples() {
        let h = QuadraticHamiltonian::new(DMatrix::zeros(2, 2), v(&[0.3, 0.9]), 0.2).unwrap();
        let g = lie_exp(&h).matrix;
        let mut expected = DMatrix::<f64>::identity(4, 4) + h.embed();
        expected[(0, 3)] = 0.2;
        assert!(max_abs(&(g - expected)) < 1e-15);
        let g = lie_exp(&rotation(0.7)).matrix;
        let block = g.view((1, 1), (2, 2)).into_owned();
        let expected = DMatrix::identity(2, 2) * 0.7f64.cos() + symplectic_form(1) * 0.7f64.sin();
        assert!(max_abs(&(block - expected)) < 1e-15);
    }

    #[test]
    fn exp_matches_generic_exponential() {
        let form = DMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, -0.3]);
        let h = QuadraticHamiltonian::from_quadratic_form(&form, v(&[1.0, 0.0]), 0.2).unwrap();
        let generic = h.embed().exp();
        assert!(max_abs(&(lie_exp(&h).matrix - generic)) < 1e-12);
    }

    #[test]
    fn product_examples() {
        let s1 = v(&[0.4, -0.2]);
        let s2 = v(&[-0.1, 0.7]);
        let h3 = product_to_single(
            &QuadraticHamiltonian::displacement(s1.clone()).unwrap(),
            &QuadraticHamiltonian::displacement(s2.clone()).unwrap(),
        )
        .unwrap();
        assert!(max_abs(&h3.generator) < 1e-14);
        assert!((h3.linear - (&s1 + &s2)).amax() < 1e-14);
        assert_abs_diff_eq!(
            h3.constant,
            -s1.dot(&(symplectic_form(1) * &s2)),
            epsilon = 1e-14
        );

        let h = QuadraticHamiltonian::from_quadratic_form(
            &DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.2]),
            v(&[0.3, 0.1]),
            0.4,
        )
        .unwrap();
        let zero = product_to_single(&h, &h.negate()).unwrap();
        assert!(
            max_abs(&zero.generator) < 1e-13
                && zero.linear.amax() < 1e-13
                && zero.constant.abs() < 1e-13
        );

        let sum = product_to_single(&rotation(1.0), &rotation(1.5)).unwrap();
        assert!(max_abs(&(sum.generator - symplectic_form(1) * 2.5)) < 1e-12);
        assert!(product_to_single(&rotation(2.0), &rotation(std::f64::consts::PI - 2.0)).is_err());
    }

    #[test]
    fn golden_rule_thermal() {
        let cov = DMatrix::identity(2, 2) * 3.0;
        let zero = sandwich_via_golden_rule(&cov, &DVector::zeros(2)).unwrap();
        assert_abs_diff_eq!(zero.log_weight, 0.0, epsilon = 1e-15);
        let g = sandwich_via_golden_rule(&cov, &v(&[1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(g.log_weight, -0.75, epsilon = 1e-12);
        let x = v(&[1.0, 0.0]);
        let y = v(&[0.3, -0.8]);
        let direct = sandwich_char(&cov, &x, &y).unwrap();
        assert!((g.char_at(&cov, &y) - direct).norm() < 1e-12);
    }
}
