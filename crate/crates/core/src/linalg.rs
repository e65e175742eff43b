//! Small dense linear-algebra helpers shared by the modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub(crate) fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub(crate) fn asymmetry(m: &DMatrix<f64>) -> f64 {
    max_abs(&(m - m.transpose()))
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn require_square(m: &DMatrix<f64>, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub(crate) fn require_even(dim: usize, what: &str) -> Result<usize> {
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "{what} needs a positive even dimension, got {dim}"
        )));
    }
    Ok(dim / 2)
}

/// Smallest eigenvalue of the Hermitian matrix `re + i im`, where `re` is
/// symmetric and `im` antisymmetric, via the real embedding `[[re, -im], [im, re]]`.
pub(crate) fn min_eig_hermitian(re: &DMatrix<f64>, im: &DMatrix<f64>) -> f64 {
    let d = re.nrows();
    let mut big = DMatrix::<f64>::zeros(2 * d, 2 * d);
    let re = symmetrize(re);
    let im = (im - im.transpose()) * 0.5;
    big.view_mut((0, 0), (d, d)).copy_from(&re);
    big.view_mut((d, d), (d, d)).copy_from(&re);
    big.view_mut((0, d), (d, d)).copy_from(&(-&im));
    big.view_mut((d, 0), (d, d)).copy_from(&im);
    symmetric_eigen(&big).0.min()
}

/// Eigen-decomposition of a symmetric matrix as `(values, vectors)`.
///
/// nalgebra's QR iteration can stop with residuals near 1e-8 on clustered spectra, so
/// its result is polished with cyclic Jacobi sweeps on `Q^T M Q`.
pub(crate) fn symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let m = symmetrize(m);
    let n = m.nrows();
    let mut q = m.clone().symmetric_eigen().eigenvectors;
    let mut a = q.transpose() * &m * &q;
    let scale = max_abs(&m).max(f64::MIN_POSITIVE);
    for _ in 0..8 {
        let off = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .fold(0.0_f64, |acc, (i, j)| acc.max(a[(i, j)].abs()));
        if off <= f64::EPSILON * scale * 1e-2 {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                let apr = a[(p, r)];
                if apr == 0.0 {
                    continue;
                }
                let tau = (a[(r, r)] - a[(p, p)]) / (2.0 * apr);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akr) = (a[(k, p)], a[(k, r)]);
                    a[(k, p)] = c * akp - s * akr;
                    a[(k, r)] = s * akp + c * akr;
                }
                for k in 0..n {
                    let (apk, ark) = (a[(p, k)], a[(r, k)]);
                    a[(p, k)] = c * apk - s * ark;
                    a[(r, k)] = s * apk + c * ark;
                }
                for k in 0..n {
                    let (qkp, qkr) = (q[(k, p)], q[(k, r)]);
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
    }
    (a.diagonal(), q)
}

/// Principal square root of a symmetric positive-definite matrix.
pub(crate) fn spd_sqrt(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let (values, u) = symmetric_eigen(m);
    let smallest = values.min();
    if !(smallest > 0.0) {
        return Err(Error::Domain(format!(
            "{what} must be positive definite (smallest eigenvalue {smallest:.3e})"
        )));
    }
    let roots = values.map(f64::sqrt);
    Ok(&u * DMatrix::from_diagonal(&roots) * u.transpose())
}

pub(crate) fn inverse(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain(format!("{what} is singular")))
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix with relative cutoff.
pub(crate) fn symmetric_pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, u) = symmetric_eigen(m);
    let scale = values.amax().max(f64::MIN_POSITIVE);
    let inv = values.map(|l| {
        if l.abs() > 1e-13 * scale {
            1.0 / l
        } else {
            0.0
        }
    });
    &u * DMatrix::from_diagonal(&inv) * u.transpose()
}

/// Principal logarithm of a real matrix by inverse scaling and squaring.
///
/// Fails when an eigenvalue lies on the closed negative real axis, where no
/// real principal logarithm exists.
pub(crate) fn real_log(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = m.nrows();
    let scale = max_abs(m).max(1.0);
    for ev in m.complex_eigenvalues().iter() {
        if ev.re <= 0.0 && ev.im.abs() <= 1e-9 * scale {
            return Err(Error::Domain(format!(
                "matrix logarithm undefined: eigenvalue {:.6}{:+.6}i on the negative real axis",
                ev.re, ev.im
            )));
        }
    }
    let identity = DMatrix::<f64>::identity(d, d);
    let mut root = m.clone();
    let mut squarings = 0_u32;
    while max_abs(&(&root - &identity)) > 0.25 {
        root = sqrt_denman_beavers(&root)?;
        squarings += 1;
        if squarings > 60 {
            return Err(Error::Domain(
                "matrix logarithm: square roots did not converge".into(),
            ));
        }
    }
    // log(B) = 2 atanh(Z), Z = (B - I)(B + I)^-1
    let z = (&root - &identity) * inverse(&(&root + &identity), "B + I")?;
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z.clone();
    for k in 1..200 {
        term = &term * &z2;
        let contribution = &term / (2 * k + 1) as f64;
        sum += &contribution;
        if max_abs(&contribution) < 1e-18 {
            break;
        }
    }
    Ok(sum * 2.0 * 2f64.powi(squarings as i32))
}

fn sqrt_denman_beavers(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = m.nrows();
    let mut y = m.clone();
    let mut z = DMatrix::<f64>::identity(d, d);
    for _ in 0..100 {
        let y_inv = inverse(&y, "square-root iterate")?;
        let z_inv = inverse(&z, "square-root iterate")?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let change = max_abs(&(&y_next - &y));
        y = y_next;
        z = z_next;
        if change <= 1e-15 * max_abs(&y).max(1.0) {
            return Ok(y);
        }
    }
    Err(Error::Domain(
        "matrix square root iteration did not converge".into(),
    ))
}

pub(crate) fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension(format!("{what} has ragged rows")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}
