//! Dense truncated-Fock representations used as an independent check on the
//! covariance-matrix formulas. Everything here works with explicit density
//! matrices, so it is slow and only meant for one or two modes.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::GaussianChannel;
use crate::error::{Error, Result};
use crate::info;
use crate::lie::QuadraticHamiltonian;
use crate::petz::{petz_channel, petz_identity_sides, probe_vectors};
use crate::symplectic::{
    char_function, hamiltonian_from_covariance, sandwich_char, sqrt_sandwich_covariance,
    sqrt_state_covariance, symplectic_form, GaussianState,
};

pub const MIN_CUTOFF: usize = 2;
pub const MAX_CUTOFF: usize = 60;
/// Eigenvalues of `N(sigma)` below this are treated as zero when inverting.
pub const EIGEN_FLOOR: f64 = 1e-14;
/// Tail mass above which a result is flagged as inaccurate.
pub const TAIL_WARNING: f64 = 1e-6;

/// An operator on `modes` modes truncated to `cutoff` levels per mode.
/// Mode 0 is the most significant digit of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    modes: usize,
    cutoff: usize,
    matrix: DMatrix<Complex64>,
    /// Probability mass lost to truncation, where that is meaningful.
    pub tail_mass: f64,
}

impl FockOperator {
    pub fn new(modes: usize, cutoff: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = checked_dim(modes, cutoff)?;
        if matrix.shape() != (dim, dim) {
            return Err(Error::Dimension(format!(
                "Fock matrix is {:?}, expected {dim}x{dim}",
                matrix.shape()
            )));
        }
        Ok(Self {
            modes,
            cutoff,
            matrix,
            tail_mass: 0.0,
        })
    }

    pub fn identity(modes: usize, cutoff: usize) -> Result<Self> {
        let dim = checked_dim(modes, cutoff)?;
        Self::new(modes, cutoff, DMatrix::identity(dim, dim))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            ..self.clone()
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_c(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn accuracy_warning(&self) -> bool {
        self.tail_mass > TAIL_WARNING
    }

    /// Keep the levels below `cutoff` in every mode.
    pub fn truncate(&self, cutoff: usize) -> Result<Self> {
        if cutoff > self.cutoff {
            return Err(Error::Dimension(
                "cannot truncate to a larger cutoff".into(),
            ));
        }
        let matrix = truncate_matrix(&self.matrix, self.modes, self.cutoff, cutoff);
        Ok(Self {
            modes: self.modes,
            cutoff,
            matrix,
            tail_mass: self.tail_mass,
        })
    }

    fn with_matrix(&self, matrix: DMatrix<Complex64>) -> Self {
        Self {
            matrix,
            ..self.clone()
        }
    }
}

fn checked_dim(modes: usize, cutoff: usize) -> Result<usize> {
    if !(1..=2).contains(&modes) {
        return Err(Error::Config(format!(
            "Fock representation supports 1 or 2 modes, got {modes}"
        )));
    }
    if cutoff < MIN_CUTOFF {
        return Err(Error::Config(format!(
            "cutoff {cutoff} is below {MIN_CUTOFF}"
        )));
    }
    Ok(cutoff.pow(modes as u32))
}

fn max_abs_c(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn truncate_matrix(
    m: &DMatrix<Complex64>,
    modes: usize,
    from: usize,
    to: usize,
) -> DMatrix<Complex64> {
    let keep: Vec<usize> = (0..from.pow(modes as u32))
        .filter(|&idx| {
            let mut rest = idx;
            (0..modes).all(|_| {
                let digit = rest % from;
                rest /= from;
                digit < to
            })
        })
        .collect();
    DMatrix::from_fn(keep.len(), keep.len(), |i, j| m[(keep[i], keep[j])])
}

/// `I (x) ... (x) op (x) ... (x) I` with `op` acting on `mode`.
fn on_mode(op: &DMatrix<Complex64>, mode: usize, modes: usize) -> DMatrix<Complex64> {
    let cutoff = op.nrows();
    let id = DMatrix::<Complex64>::identity(cutoff, cutoff);
    (0..modes).fold(
        DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
        |acc, k| acc.kronecker(if k == mode { op } else { &id }),
    )
}

fn annihilation(cutoff: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(cutoff, cutoff, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Quadratures `(x_1..x_n, p_1..p_n)` with `x = (a + a^dag)/sqrt 2`, `p = -i (a - a^dag)/sqrt 2`.
/// These are only exact away from the top level; build at a larger cutoff
/// and truncate products.
fn quadrature_matrices(modes: usize, cutoff: usize) -> Vec<DMatrix<Complex64>> {
    let a = annihilation(cutoff);
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = (&a + &ad) * Complex64::new(s, 0.0);
    let p = (&a - &ad) * Complex64::new(0.0, -s);
    let xs = (0..modes).map(|m| on_mode(&x, m, modes));
    let ps = (0..modes).map(|m| on_mode(&p, m, modes));
    xs.chain(ps).collect()
}

/// `sum_jk form_jk (r_j - c_j)(r_k - c_k) / 2 + sum_j lin_j r_j` at `cutoff`, exact in all entries.
fn quadratic_operator(
    modes: usize,
    cutoff: usize,
    form: &DMatrix<f64>,
    center: &DVector<f64>,
    lin: &DVector<f64>,
) -> DMatrix<Complex64> {
    let big = quadrature_matrices(modes, cutoff + 1);
    let dim = (cutoff + 1).pow(modes as u32);
    let id = DMatrix::<Complex64>::identity(dim, dim);
    let shifted: Vec<DMatrix<Complex64>> = big
        .iter()
        .enumerate()
        .map(|(j, r)| r - &id * Complex64::new(center[j], 0.0))
        .collect();
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    for j in 0..2 * modes {
        if lin[j] != 0.0 {
            acc += &big[j] * Complex64::new(lin[j], 0.0);
        }
        for k in 0..2 * modes {
            if form[(j, k)] != 0.0 {
                acc += &shifted[j] * &shifted[k] * Complex64::new(0.5 * form[(j, k)], 0.0);
            }
        }
    }
    truncate_matrix(&acc, modes, cutoff + 1, cutoff)
}

fn hermitian_eigen(m: &DMatrix<Complex64>) -> (DVector<f64>, DMatrix<Complex64>) {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    (eig.eigenvalues, eig.eigenvectors)
}

fn hermitian_apply(m: &DMatrix<Complex64>, f: impl Fn(f64) -> Complex64) -> DMatrix<Complex64> {
    let (values, vectors) = hermitian_eigen(m);
    let diag = DMatrix::from_diagonal(&values.map(f));
    &vectors * diag * vectors.adjoint()
}

fn padded_cutoff(modes: usize, cutoff: usize) -> usize {
    if modes == 1 {
        cutoff + cutoff.max(20)
    } else {
        cutoff + 6
    }
}

/// Truncated `rho^power` of a faithful Gaussian state, from `exp(-power G)` on a
/// padded space; `tail_mass` is the fraction of `Tr[rho^power]` lost to truncation.
pub fn gaussian_power(state: &GaussianState, cutoff: usize, power: f64) -> Result<FockOperator> {
    let modes = state.modes();
    checked_dim(modes, cutoff)?;
    let hamiltonian = hamiltonian_from_covariance(state.cov())?.matrix;
    let work = padded_cutoff(modes, cutoff);
    let generator = quadratic_operator(
        modes,
        work,
        &hamiltonian,
        state.mean(),
        &DVector::zeros(2 * modes),
    );
    let (values, vectors) = hermitian_eigen(&generator);
    let lowest = values.min();
    let boltzmann = values.map(|v| (lowest - v).exp());
    let total = boltzmann.sum();
    let weights = boltzmann.map(|b| Complex64::new((b / total).powf(power), 0.0));
    let full = &vectors * DMatrix::from_diagonal(&weights) * vectors.adjoint();
    let mut op = FockOperator::new(modes, cutoff, truncate_matrix(&full, modes, work, cutoff))?;
    op.tail_mass = (1.0 - op.trace().re / full.trace().re).max(0.0);
    Ok(op)
}

/// Density matrix of a faithful Gaussian state, renormalized after truncation.
pub fn gaussian_density(state: &GaussianState, cutoff: usize) -> Result<FockOperator> {
    let op = gaussian_power(state, cutoff, 1.0)?;
    let kept = op.trace().re;
    Ok(op.with_matrix(&op.matrix / Complex64::new(kept, 0.0)))
}

/// Truncated `ln rho = -G - ln Z` of a faithful Gaussian state. Unlike a logarithm
/// of the truncated density matrix, this stays exact where `rho` is tiny.
pub fn gaussian_log_density(state: &GaussianState, cutoff: usize) -> Result<FockOperator> {
    let modes = state.modes();
    checked_dim(modes, cutoff)?;
    let hamiltonian = hamiltonian_from_covariance(state.cov())?.matrix;
    let work = padded_cutoff(modes, cutoff);
    let generator = quadratic_operator(
        modes,
        work,
        &hamiltonian,
        state.mean(),
        &DVector::zeros(2 * modes),
    );
    let (values, _) = hermitian_eigen(&generator);
    let lowest = values.min();
    let log_partition = -lowest + values.map(|v| (lowest - v).exp()).sum().ln();
    let dim = generator.nrows();
    let log = -(generator
        + DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(log_partition, 0.0));
    FockOperator::new(modes, cutoff, truncate_matrix(&log, modes, work, cutoff))
}

fn single_mode_displacement(alpha: Complex64, cutoff: usize) -> DMatrix<Complex64> {
    let x = alpha.norm_sqr();
    let envelope = (-0.5 * x).exp();
    let mut d = DMatrix::zeros(cutoff, cutoff);
    for shift in 0..cutoff {
        // L_n^(shift)(x) for n = 0..cutoff-shift, by the three-term recurrence.
        let k = shift as f64;
        let count = cutoff - shift;
        let mut laguerre = Vec::with_capacity(count);
        laguerre.push(1.0);
        if count > 1 {
            laguerre.push(1.0 + k - x);
        }
        for j in 1..count.saturating_sub(1) {
            let jf = j as f64;
            let next =
                ((2.0 * jf + 1.0 + k - x) * laguerre[j] - (jf + k) * laguerre[j - 1]) / (jf + 1.0);
            laguerre.push(next);
        }
        for (n, lag) in laguerre.iter().enumerate() {
            let m = n + shift;
            // sqrt(n!/m!) alpha^shift, accumulated factor by factor.
            let lower = (n + 1..=m).fold(Complex64::new(1.0, 0.0), |acc, j| {
                acc * alpha / (j as f64).sqrt()
            });
            let upper = (n + 1..=m).fold(Complex64::new(1.0, 0.0), |acc, j| {
                acc * -alpha.conj() / (j as f64).sqrt()
            });
            d[(m, n)] = lower * envelope * *lag;
            d[(n, m)] = upper * envelope * *lag;
        }
    }
    d
}

/// Truncated matrix of `D_z = exp(i z^T Omega r)`.
pub fn displacement_operator(z: &DVector<f64>, cutoff: usize) -> Result<FockOperator> {
    if !z.len().is_multiple_of(2) {
        return Err(Error::Dimension(
            "displacement vector must have even length".into(),
        ));
    }
    let modes = z.len() / 2;
    checked_dim(modes, cutoff)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let matrix = (0..modes).fold(
        DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
        |acc, m| {
            let alpha = Complex64::new(-z[m] * s, -z[modes + m] * s);
            acc.kronecker(&single_mode_displacement(alpha, cutoff))
        },
    );
    FockOperator::new(modes, cutoff, matrix)
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

fn kraus_from_entries(
    cutoff: usize,
    entries: impl Iterator<Item = (usize, usize, f64)>,
) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(cutoff, cutoff);
    for (row, col, value) in entries {
        m[(row, col)] = Complex64::new(value, 0.0);
    }
    m
}

/// Kraus operators of the single-mode pure-loss channel of transmissivity `eta`.
pub fn loss_kraus(eta: f64, cutoff: usize) -> Result<Vec<FockOperator>> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!(
            "transmissivity {eta} outside [0, 1]"
        )));
    }
    let lf = ln_factorials(cutoff);
    let lf = &lf;
    (0..cutoff)
        .filter(|&k| k == 0 || eta < 1.0)
        .map(|k| {
            let entries = (k..cutoff).map(move |n| {
                let ln_binom = lf[n] - lf[k] - lf[n - k];
                let value = if eta == 0.0 {
                    if n == k {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    let ln_loss = if k == 0 {
                        0.0
                    } else {
                        0.5 * k as f64 * (1.0 - eta).ln()
                    };
                    (0.5 * ln_binom + 0.5 * (n - k) as f64 * eta.ln() + ln_loss).exp()
                };
                (n - k, n, value)
            });
            FockOperator::new(1, cutoff, kraus_from_entries(cutoff, entries))
        })
        .collect()
}

/// Kraus operators of the single-mode quantum-limited amplifier of gain `gain`,
/// restricted to the truncated space (transitions above the cutoff are dropped).
pub fn amplifier_kraus(gain: f64, cutoff: usize) -> Result<Vec<FockOperator>> {
    if gain < 1.0 {
        return Err(Error::Domain(format!("gain {gain} below 1")));
    }
    let lf = ln_factorials(2 * cutoff);
    (0..cutoff)
        .filter(|&k| k == 0 || gain > 1.0)
        .map(|k| {
            let entries: Vec<_> = (0..cutoff - k)
                .map(|n| {
                    let ln_binom = lf[n + k] - lf[n] - lf[k];
                    let ln_gain = if k == 0 {
                        0.0
                    } else {
                        0.5 * k as f64 * ((gain - 1.0) / gain).ln()
                    };
                    let value =
                        (-0.5 * (n + 1) as f64 * gain.ln() + ln_gain + 0.5 * ln_binom).exp();
                    (n + k, n, value)
                })
                .collect();
            FockOperator::new(1, cutoff, kraus_from_entries(cutoff, entries.into_iter()))
        })
        .collect()
}

/// Gauss-Hermite nodes and weights for `int e^{-t^2} f(t) dt`.
fn gauss_hermite(points: usize) -> Vec<(f64, f64)> {
    let jacobi = DMatrix::from_fn(points, points, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let root_pi = std::f64::consts::PI.sqrt();
    let mut out: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            (
                eig.eigenvalues[i],
                root_pi * eig.eigenvectors[(0, i)].powi(2),
            )
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

const NOISE_NODES: usize = 21;

/// Classical additive noise of variance `variance` as a random displacement,
/// discretized with a tensor Gauss-Hermite rule.
pub fn noise_kraus(variance: f64, cutoff: usize) -> Result<Vec<FockOperator>> {
    if variance < 0.0 {
        return Err(Error::Domain(format!(
            "noise variance {variance} is negative"
        )));
    }
    if variance == 0.0 {
        return Ok(vec![FockOperator::identity(1, cutoff)?]);
    }
    let rule = gauss_hermite(NOISE_NODES);
    let scale = variance.sqrt();
    let pi = std::f64::consts::PI;
    let mut ops = Vec::with_capacity(NOISE_NODES * NOISE_NODES);
    for &(tx, wx) in &rule {
        for &(tp, wp) in &rule {
            let z = DVector::from_vec(vec![scale * tx, scale * tp]);
            let d = displacement_operator(&z, cutoff)?;
            let amp = Complex64::new((wx * wp / pi).sqrt(), 0.0);
            ops.push(d.with_matrix(d.matrix() * amp));
        }
    }
    Ok(ops)
}

/// A Kraus realization of a recognized single-mode channel: loss, amplifier or
/// classical noise with scalar `X` and `Y`, followed by an optional displacement.
pub fn channel_kraus(channel: &GaussianChannel, cutoff: usize) -> Result<Vec<FockOperator>> {
    if channel.modes_in() != 1 || channel.modes_out() != 1 {
        return Err(Error::Config(
            "Kraus realizations exist only for single-mode channels".into(),
        ));
    }
    let (x, y) = (channel.transform(), channel.noise());
    let scalar = |m: &DMatrix<f64>| {
        let v = m[(0, 0)];
        let off = (m - DMatrix::identity(2, 2) * v).abs().max();
        (off < 1e-12).then_some(v)
    };
    let unsupported = || Error::Config("channel has no built-in Kraus realization".into());
    let (c, noise) = (
        scalar(x).ok_or_else(unsupported)?,
        scalar(y).ok_or_else(unsupported)?,
    );
    let ops = if (c - 1.0).abs() < 1e-12 {
        noise_kraus(noise, cutoff)?
    } else if c > 0.0 && c < 1.0 && (noise - (1.0 - c * c)).abs() < 1e-10 {
        loss_kraus(c * c, cutoff)?
    } else if c > 1.0 && (noise - (c * c - 1.0)).abs() < 1e-10 {
        amplifier_kraus(c * c, cutoff)?
    } else {
        return Err(unsupported());
    };
    let delta = channel.delta();
    if delta.iter().all(|&v| v == 0.0) {
        return Ok(ops);
    }
    // D_z shifts the mean by -z.
    let shift = displacement_operator(&-delta, cutoff)?;
    Ok(ops
        .into_iter()
        .map(|k| k.with_matrix(shift.matrix() * k.matrix()))
        .collect())
}

pub fn apply_kraus(kraus: &[FockOperator], op: &FockOperator) -> FockOperator {
    let sum = kraus.iter().fold(
        DMatrix::zeros(op.matrix.nrows(), op.matrix.ncols()),
        |acc, k| acc + &k.matrix * &op.matrix * k.matrix.adjoint(),
    );
    op.with_matrix(sum)
}

pub fn apply_kraus_adjoint(kraus: &[FockOperator], op: &FockOperator) -> FockOperator {
    let sum = kraus.iter().fold(
        DMatrix::zeros(op.matrix.nrows(), op.matrix.ncols()),
        |acc, k| acc + k.matrix.adjoint() * &op.matrix * &k.matrix,
    );
    op.with_matrix(sum)
}

/// Output of [`petz_oracle`].
#[derive(Clone, Debug)]
pub struct OracleRecovery {
    pub state: FockOperator,
    /// Whether eigenvalues of `N(sigma)` were dropped below [`EIGEN_FLOOR`].
    pub floored: bool,
}

/// `sigma^1/2 N^dag(N(sigma)^-1/2 omega N(sigma)^-1/2) sigma^1/2` by dense linear algebra.
/// Fails when `omega` has more than `TAIL_WARNING` weight on the discarded support.
pub fn petz_oracle(
    sigma: &GaussianState,
    kraus: &[FockOperator],
    omega_d: &FockOperator,
) -> Result<OracleRecovery> {
    let cutoff = omega_d.cutoff;
    let sigma_d = gaussian_density(sigma, cutoff)?;
    let sigma_out = apply_kraus(kraus, &sigma_d);
    let (values, vectors) = hermitian_eigen(&sigma_out.matrix);
    let floored = values.iter().any(|&v| v < EIGEN_FLOOR);
    let inv_sqrt = values.map(|v| {
        if v >= EIGEN_FLOOR {
            1.0 / v.sqrt()
        } else {
            0.0
        }
    });
    let projector_weight = values.map(|v| if v >= EIGEN_FLOOR { 1.0 } else { 0.0 });
    let in_eigenbasis = vectors.adjoint() * &omega_d.matrix * &vectors;
    let captured: f64 = (0..values.len())
        .map(|i| projector_weight[i] * in_eigenbasis[(i, i)].re)
        .sum();
    if 1.0 - captured > TAIL_WARNING {
        return Err(Error::OraclePrecision(format!(
            "N(sigma) is ill-conditioned: {:.3e} of omega lies below the eigenvalue floor",
            1.0 - captured
        )));
    }
    let scaled = DMatrix::from_fn(values.len(), values.len(), |i, j| {
        in_eigenbasis[(i, j)] * inv_sqrt[i] * inv_sqrt[j]
    });
    let middle = sigma_out.with_matrix(&vectors * scaled * vectors.adjoint());
    let pulled = apply_kraus_adjoint(kraus, &middle);
    let root = gaussian_power(sigma, cutoff, 0.5)?.matrix;
    let mut state = sigma_d.with_matrix(&root * &pulled.matrix * &root);
    state.tail_mass = sigma_d
        .tail_mass
        .max(omega_d.tail_mass)
        .max((1.0 - state.trace().re).abs());
    Ok(OracleRecovery { state, floored })
}

/// First and second moments of a trace-normalized operator.
pub fn moments(op: &FockOperator) -> Result<GaussianState> {
    let modes = op.modes;
    let dim = 2 * modes;
    let big = quadrature_matrices(modes, op.cutoff + 1);
    let small: Vec<DMatrix<Complex64>> = big
        .iter()
        .map(|r| truncate_matrix(r, modes, op.cutoff + 1, op.cutoff))
        .collect();
    let norm = op.trace().re;
    if norm.abs() < 1e-12 {
        return Err(Error::InvalidOperator("operator has zero trace".into()));
    }
    let expect = |m: &DMatrix<Complex64>| (&op.matrix * m).trace().re / norm;
    let mean = DVector::from_fn(dim, |j, _| expect(&small[j]));
    let mut cov = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        for k in j..dim {
            let anti = &big[j] * &big[k] + &big[k] * &big[j];
            let value = expect(&truncate_matrix(&anti, modes, op.cutoff + 1, op.cutoff))
                - 2.0 * mean[j] * mean[k];
            cov[(j, k)] = value;
            cov[(k, j)] = value;
        }
    }
    GaussianState::new(mean, cov)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMeasures {
    pub fidelity: f64,
    pub relative_entropy: f64,
    pub entropy: f64,
    /// Whether eigenvalues of the second argument were floored for its logarithm.
    pub floored: bool,
}

/// Fidelity `(Tr|sqrt(rho) sqrt(sigma)|)^2`, `D(rho||sigma)` and `S(rho)` of two density matrices.
pub fn dense_measures(rho: &FockOperator, sigma: &FockOperator) -> Result<DenseMeasures> {
    if rho.matrix.shape() != sigma.matrix.shape() {
        return Err(Error::Dimension("density matrices differ in size".into()));
    }
    for (name, op) in [("rho", rho), ("sigma", sigma)] {
        if op.hermiticity_defect() > 1e-8 {
            return Err(Error::InvalidOperator(format!("{name} is not Hermitian")));
        }
    }
    let normalize = |op: &FockOperator| &op.matrix / Complex64::new(op.trace().re, 0.0);
    let (rho_m, sigma_m) = (normalize(rho), normalize(sigma));
    let (rho_vals, rho_vecs) = hermitian_eigen(&rho_m);
    if rho_vals.min() < -1e-8 {
        return Err(Error::InvalidOperator(format!(
            "rho has eigenvalue {:.3e}",
            rho_vals.min()
        )));
    }
    let root = &rho_vecs
        * DMatrix::from_diagonal(&rho_vals.map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0)))
        * rho_vecs.adjoint();
    let (inner, _) = hermitian_eigen(&(&root * &sigma_m * &root));
    let fidelity = inner.iter().map(|v| v.max(0.0).sqrt()).sum::<f64>().powi(2);
    let entropy: f64 = rho_vals
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum();

    let (sigma_vals, sigma_vecs) = hermitian_eigen(&sigma_m);
    let floored = sigma_vals.iter().any(|&v| v < EIGEN_FLOOR);
    let rho_in_sigma = sigma_vecs.adjoint() * &rho_m * &sigma_vecs;
    let cross: f64 = (0..sigma_vals.len())
        .map(|i| rho_in_sigma[(i, i)].re * sigma_vals[i].max(EIGEN_FLOOR).ln())
        .sum();
    Ok(DenseMeasures {
        fidelity,
        relative_entropy: -entropy - cross,
        entropy,
        floored,
    })
}

/// `D(rho||sigma)` given `ln sigma` directly.
pub fn relative_entropy_with_log(rho: &FockOperator, log_sigma: &FockOperator) -> Result<f64> {
    if rho.matrix.shape() != log_sigma.matrix.shape() {
        return Err(Error::Dimension("operators differ in size".into()));
    }
    let rho_m = &rho.matrix / Complex64::new(rho.trace().re, 0.0);
    let (values, _) = hermitian_eigen(&rho_m);
    if values.min() < -1e-8 {
        return Err(Error::InvalidOperator(format!(
            "rho has eigenvalue {:.3e}",
            values.min()
        )));
    }
    let neg_entropy: f64 = values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum();
    Ok(neg_entropy - (&rho_m * &log_sigma.matrix).trace().re)
}

/// The three relative entropies of the recovery deficit evaluated on density matrices:
/// `N` acts through Kraus operators and the recovery through [`petz_oracle`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseDeficit {
    pub d_in: f64,
    pub d_out: f64,
    pub d_recovery: f64,
    pub floored: bool,
    pub tail_mass: f64,
}

pub fn dense_deficit(
    rho: &GaussianState,
    sigma: &GaussianState,
    channel: &GaussianChannel,
    cutoff: usize,
) -> Result<DenseDeficit> {
    let kraus = channel_kraus(channel, cutoff)?;
    let rho_d = gaussian_density(rho, cutoff)?;
    let sigma_d = gaussian_density(sigma, cutoff)?;
    let d_in = relative_entropy_with_log(&rho_d, &gaussian_log_density(sigma, cutoff)?)?;
    let rho_out = apply_kraus(&kraus, &rho_d);
    let sigma_out_log = gaussian_log_density(&channel.apply(sigma)?, cutoff)?;
    let d_out = relative_entropy_with_log(&rho_out, &sigma_out_log)?;
    let recovery = petz_oracle(sigma, &kraus, &rho_out)?;
    let measures = dense_measures(&rho_d, &recovery.state)?;
    let tail_mass = [rho_d.tail_mass, sigma_d.tail_mass, recovery.state.tail_mass]
        .into_iter()
        .fold(0.0, f64::max);
    Ok(DenseDeficit {
        d_in,
        d_out,
        d_recovery: measures.relative_entropy,
        floored: recovery.floored || measures.floored,
        tail_mass,
    })
}

/// Truncated `exp(H)` for the operator `H = (i/2) r^T Omega X r + i s^T Omega r + (i/2) a`,
/// computed on a padded space.
pub fn quadratic_unitary(h: &QuadraticHamiltonian, cutoff: usize) -> Result<FockOperator> {
    let modes = h.modes();
    checked_dim(modes, cutoff)?;
    let omega = symplectic_form(modes);
    let form = &omega * &h.generator;
    // H = i K with K = r^T A r / 2 + (Omega^T s)^T r + a / 2 Hermitian.
    let lin = omega.transpose() * &h.linear;
    let work = padded_cutoff(modes, cutoff);
    let mut k = quadratic_operator(modes, work, &form, &DVector::zeros(2 * modes), &lin);
    let dim = k.nrows();
    k += DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(0.5 * h.constant, 0.0);
    let u = hermitian_apply(&k, |v| Complex64::from_polar(1.0, v));
    FockOperator::new(modes, cutoff, truncate_matrix(&u, modes, work, cutoff))
}

/// One row of the oracle battery: a dense quantity compared against its closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    /// Largest deviation; infinite when the dense computation itself failed.
    pub error: f64,
    pub tail_mass: f64,
    pub note: Option<String>,
}

impl OracleCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.error <= tol
    }
}

fn trace_product(a: &FockOperator, b: &FockOperator) -> Complex64 {
    (&a.matrix * &b.matrix).trace()
}

fn moment_error(dense: &GaussianState, expected: &GaussianState) -> f64 {
    let cov = (dense.cov() - expected.cov()).abs().max();
    let mean = (dense.mean() - expected.mean()).abs().max();
    cov.max(mean)
}

/// `(error, tail_mass)` of one comparison.
type CheckResult = Result<(f64, f64)>;

fn check_thermal_population(cutoff: usize) -> CheckResult {
    let dense = gaussian_density(&GaussianState::thermal(1, 3.0), cutoff)?;
    Ok(((dense.matrix[(0, 0)].re - 0.5).abs(), dense.tail_mass))
}

fn displaced_squeezed() -> GaussianState {
    GaussianState::squeezed_thermal(2.0, 0.3, 0.7, [0.6, -0.4])
}

fn check_characteristic_function(cutoff: usize) -> CheckResult {
    let state = displaced_squeezed();
    let dense = gaussian_density(&state, cutoff)?;
    let mut err = 0.0_f64;
    for w in probe_vectors(5, 2, 2) {
        let value = trace_product(&dense, &displacement_operator(&-&w, cutoff)?);
        err = err.max((value - char_function(&state, &w)).norm());
    }
    Ok((err, dense.tail_mass))
}

fn check_density_moments(cutoff: usize) -> CheckResult {
    let state = displaced_squeezed();
    let dense = gaussian_density(&state, cutoff)?;
    Ok((moment_error(&moments(&dense)?, &state), dense.tail_mass))
}

/// Covariance of the normalized `sqrt(rho)` for thermal states.
pub fn check_sqrt_state(cutoff: usize) -> CheckResult {
    let (mut err, mut tail) = (0.0_f64, 0.0_f64);
    for nu in [1.5, 2.0, 3.0] {
        let state = GaussianState::thermal(1, nu);
        let root = gaussian_power(&state, cutoff, 0.5)?;
        tail = tail.max(root.tail_mass);
        err = err.max(
            (moments(&root)?.cov() - sqrt_state_covariance(state.cov())?)
                .abs()
                .max(),
        );
    }
    Ok((err, tail))
}

/// `Tr[D_-y sqrt(sigma) D_x sqrt(sigma)]` on a 5x5 grid of `(x, y)` for thermal states.
pub fn check_sandwich(cutoff: usize) -> CheckResult {
    let (mut err, mut tail) = (0.0_f64, 0.0_f64);
    for nu in [1.5, 3.0] {
        let state = GaussianState::thermal(1, nu);
        let root = gaussian_power(&state, cutoff, 0.5)?;
        tail = tail.max(root.tail_mass);
        for x in probe_vectors(5, 2, 2) {
            let inner = &root.matrix * displacement_operator(&x, cutoff)?.matrix * &root.matrix;
            for y in probe_vectors(5, 2, 1) {
                let value = (displacement_operator(&-&y, cutoff)?.matrix * &inner).trace();
                err = err.max((value - sandwich_char(state.cov(), &x, &y)?).norm());
            }
        }
    }
    Ok((err, tail))
}

fn check_sqrt_sandwich_covariance(cutoff: usize) -> CheckResult {
    let sigma = GaussianState::thermal(1, 2.0);
    let omega = GaussianState::squeezed_thermal(1.6, 0.2, 0.4, [0.0, 0.0]);
    let root = gaussian_power(&sigma, cutoff, 0.5)?;
    let omega_d = gaussian_density(&omega, cutoff)?;
    let sandwich = root.with_matrix(&root.matrix * &omega_d.matrix * &root.matrix);
    let expected = sqrt_sandwich_covariance(sigma.cov(), omega.cov())?;
    Ok((
        (moments(&sandwich)?.cov() - expected).abs().max(),
        root.tail_mass.max(omega_d.tail_mass),
    ))
}

fn check_information_measures(cutoff: usize) -> CheckResult {
    let rho = GaussianState::squeezed_thermal(1.4, 0.2, 0.5, [0.3, -0.2]);
    let sigma = GaussianState::squeezed_thermal(1.6, 0.2, 0.4, [0.0, 0.0]);
    let rho_d = gaussian_density(&rho, cutoff)?;
    let sigma_d = gaussian_density(&sigma, cutoff)?;
    let dense = dense_measures(&rho_d, &sigma_d)?;
    let err = (dense.fidelity - info::fidelity(&rho, &sigma)?)
        .abs()
        .max((dense.relative_entropy - info::relative_entropy(&rho, &sigma)?).abs())
        .max((dense.entropy - info::entropy(&rho)?).abs());
    Ok((err, rho_d.tail_mass.max(sigma_d.tail_mass)))
}

fn check_channel(cutoff: usize, channel: GaussianChannel) -> CheckResult {
    let input = GaussianState::squeezed_thermal(1.3, 0.15, 0.2, [0.4, 0.1]);
    let input_d = gaussian_density(&input, cutoff)?;
    let output = apply_kraus(&channel_kraus(&channel, cutoff)?, &input_d);
    let tail = input_d.tail_mass.max((1.0 - output.trace().re).abs());
    Ok((
        moment_error(&moments(&output)?, &channel.apply(&input)?),
        tail,
    ))
}

fn check_petz(
    cutoff: usize,
    sigma: &GaussianState,
    channel: &GaussianChannel,
    omega: &GaussianState,
) -> CheckResult {
    let kraus = channel_kraus(channel, cutoff)?;
    let recovery = petz_oracle(sigma, &kraus, &gaussian_density(omega, cutoff)?)?;
    let expected = petz_channel(sigma, channel)?.channel().apply(omega)?;
    Ok((
        moment_error(&moments(&recovery.state)?, &expected),
        recovery.state.tail_mass,
    ))
}

fn displaced_loss() -> Result<GaussianChannel> {
    GaussianChannel::loss(1, 0.7)?.with_displacement(DVector::from_vec(vec![0.2, -0.3]))
}

/// Largest deviation between the dense left side of the Petz identity,
/// `Tr[sigma^1/2 D_-w2 sigma^1/2 N^dag(D_w1)]`, and the closed form on a probe grid.
pub fn check_identity_trace(
    sigma: &GaussianState,
    channel: &GaussianChannel,
    cutoff: usize,
    probes: usize,
) -> CheckResult {
    // N^dag(D_w1) is formed on a padded space so its cutoff block is free of Kraus truncation.
    let work = padded_cutoff(1, cutoff);
    let kraus = channel_kraus(channel, work)?;
    let recovery = petz_channel(sigma, channel)?;
    let root = gaussian_power(sigma, cutoff, 0.5)?;
    let mut err = 0.0_f64;
    for w1 in probe_vectors(probes, 2, 1) {
        let pulled =
            apply_kraus_adjoint(&kraus, &displacement_operator(&w1, work)?).truncate(cutoff)?;
        for w2 in probe_vectors(probes, 2, 2) {
            let shifted = displacement_operator(&-&w2, cutoff)?;
            let dense = (&root.matrix * &shifted.matrix * &root.matrix * &pulled.matrix).trace();
            let (lhs, rhs) = petz_identity_sides(sigma, channel, recovery.channel(), &w1, &w2)?;
            err = err.max((dense - lhs).norm()).max((dense - rhs).norm());
        }
    }
    Ok((err, root.tail_mass))
}

/// `exp(h1) exp(h2)` against `exp(h3)` as truncated operators, with `h3` from the
/// matrix-group product, as the Frobenius norm of the difference. The product is summed
/// over four times the cutoff: squeezing spreads the upper columns far above it.
pub fn check_lie_product(
    h1: &QuadraticHamiltonian,
    h2: &QuadraticHamiltonian,
    cutoff: usize,
) -> CheckResult {
    let h3 = crate::lie::product_to_single(h1, h2)?;
    let work = 4 * cutoff;
    let u1 = quadratic_unitary(h1, work)?;
    let u2 = quadratic_unitary(h2, work)?;
    let u3 = quadratic_unitary(&h3, work)?;
    let product = u1.with_matrix(&u1.matrix * &u2.matrix).truncate(cutoff)?;
    let single = u3.truncate(cutoff)?;
    let err = (&product.matrix - &single.matrix).norm();
    Ok((err, 0.0))
}

fn lie_pair() -> Result<(QuadraticHamiltonian, QuadraticHamiltonian)> {
    let squeeze = DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 0.3, 0.0]);
    let rotate = DMatrix::from_row_slice(2, 2, &[0.4, 0.0, 0.0, 0.4]);
    Ok((
        QuadraticHamiltonian::from_quadratic_form(
            &squeeze,
            DVector::from_vec(vec![0.3, -0.2]),
            0.0,
        )?,
        QuadraticHamiltonian::from_quadratic_form(
            &rotate,
            DVector::from_vec(vec![-0.1, 0.25]),
            0.1,
        )?,
    ))
}

type NamedCheck<'a> = (&'static str, Box<dyn Fn() -> CheckResult + 'a>);

/// Compare the closed-form Gaussian formulas against dense Fock computations.
/// A comparison whose dense side fails is reported with an infinite error.
pub fn oracle_suite(cutoff: usize) -> Result<Vec<OracleCheck>> {
    if !(MIN_CUTOFF..=MAX_CUTOFF).contains(&cutoff) {
        return Err(Error::Config(format!(
            "cutoff must lie in [{MIN_CUTOFF}, {MAX_CUTOFF}]"
        )));
    }
    let petz_sigma = GaussianState::squeezed_thermal(1.8, 0.2, 0.6, [0.3, 0.1]);
    let checks: Vec<NamedCheck> = vec![
        (
            "thermal_vacuum_population",
            Box::new(|| check_thermal_population(cutoff)),
        ),
        (
            "characteristic_function",
            Box::new(|| check_characteristic_function(cutoff)),
        ),
        (
            "density_moments",
            Box::new(|| check_density_moments(cutoff)),
        ),
        (
            "sqrt_state_covariance",
            Box::new(|| check_sqrt_state(cutoff)),
        ),
        (
            "sandwich_characteristic",
            Box::new(|| check_sandwich(cutoff)),
        ),
        (
            "sqrt_sandwich_covariance",
            Box::new(|| check_sqrt_sandwich_covariance(cutoff)),
        ),
        (
            "information_measures",
            Box::new(|| check_information_measures(cutoff)),
        ),
        (
            "loss_channel",
            Box::new(|| check_channel(cutoff, GaussianChannel::loss(1, 0.6)?)),
        ),
        (
            "amplifier_channel",
            Box::new(|| check_channel(cutoff, GaussianChannel::amplifier(1, 1.3)?)),
        ),
        (
            "noise_channel",
            Box::new(|| check_channel(cutoff, GaussianChannel::classical_noise(1, 0.4)?)),
        ),
        (
            "petz_thermal_loss",
            Box::new(|| {
                let sigma = GaussianState::thermal(1, 3.0);
                check_petz(
                    cutoff,
                    &sigma,
                    &GaussianChannel::loss(1, 0.5)?,
                    &GaussianState::thermal(1, 2.5),
                )
            }),
        ),
        (
            "petz_displaced_squeezed",
            Box::new(|| {
                let channel = displaced_loss()?;
                let omega =
                    channel.apply(&GaussianState::squeezed_thermal(1.5, 0.1, 0.2, [0.5, -0.2]))?;
                check_petz(cutoff, &petz_sigma, &channel, &omega)
            }),
        ),
        (
            "petz_identity_trace",
            Box::new(|| check_identity_trace(&petz_sigma, &displaced_loss()?, cutoff, 3)),
        ),
        (
            "lie_product",
            Box::new(|| {
                let (h1, h2) = lie_pair()?;
                check_lie_product(&h1, &h2, cutoff.min(30))
            }),
        ),
    ];
    Ok(checks
        .into_iter()
        .map(|(name, run)| match run() {
            Ok((error, tail_mass)) => OracleCheck {
                name: name.into(),
                error,
                tail_mass,
                note: None,
            },
            Err(e) => OracleCheck {
                name: name.into(),
                error: f64::INFINITY,
                tail_mass: f64::NAN,
                note: Some(e.to_string()),
            },
        })
        .collect())
}
