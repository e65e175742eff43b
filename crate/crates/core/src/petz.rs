//! Gaussian Petz recovery channels and their rotated variants.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channels::{CpReport, GaussianChannel};
use crate::error::{Error, Result};
use crate::linalg::{inverse, max_abs, max_abs_vec, symmetrize};
use crate::symplectic::{
    require_faithful_spectrum, require_valid, sandwich_char_with_filter, sqrt_filter,
    symplectic_form, williamson, GaussianState,
};

/// The recovery channel for a reference state `sigma` and forward channel `N`,
/// optionally rotated by the modular flow.
#[derive(Clone, Debug)]
pub struct PetzConstruction {
    channel: GaussianChannel,
    cp_min_eigenvalue: f64,
    sigma: GaussianState,
    sigma_out: GaussianState,
    forward: GaussianChannel,
    base_transform: DMatrix<f64>,
    base_noise: DMatrix<f64>,
    time: f64,
}

/// `exp(Omega H_sigma t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticFlow {
    pub matrix: DMatrix<f64>,
}

impl SymplecticFlow {
    pub fn symplecticity_defect(&self) -> f64 {
        let omega = symplectic_form(self.matrix.nrows() / 2);
        max_abs(&(&self.matrix * &omega * self.matrix.transpose() - omega))
    }
}

pub fn petz_channel(sigma: &GaussianState, forward: &GaussianChannel) -> Result<PetzConstruction> {
    require_valid(sigma, "sigma")?;
    if sigma.modes() != forward.modes_in() {
        return Err(Error::Dimension(format!(
            "sigma has {} modes but the channel expects {}",
            sigma.modes(),
            forward.modes_in()
        )));
    }
    let sigma_out = forward.apply(sigma)?;
    let cov_out = sigma_out.cov();
    let out_williamson = williamson(cov_out)?;
    require_faithful_spectrum(&out_williamson, "N(sigma)")?;

    // [sqrt(I + (Omega V_out)^-2)]^-1, blockwise 1 / sqrt(1 - 1/mu^2).
    let inverse_filter_t =
        out_williamson.conjugate_scalar_transposed(|mu| 1.0 / (1.0 - 1.0 / (mu * mu)).sqrt());
    let cov_out_inv = inverse(cov_out, "N(sigma) covariance")?;
    let transform = sqrt_filter(sigma.cov())?
        * sigma.cov()
        * forward.transform().transpose()
        * inverse_filter_t
        * cov_out_inv;
    let noise = symmetrize(&(sigma.cov() - &transform * cov_out * transform.transpose()));
    let construction = PetzConstruction {
        channel: GaussianChannel::new_unchecked(
            transform.clone(),
            noise.clone(),
            DVector::zeros(sigma.mean().len()),
        )?,
        cp_min_eigenvalue: 0.0,
        sigma: sigma.clone(),
        sigma_out,
        forward: forward.clone(),
        base_transform: transform,
        base_noise: noise,
        time: 0.0,
    };
    construction.assemble(
        construction.base_transform.clone(),
        construction.base_noise.clone(),
        0.0,
    )
}

pub fn symplectic_flow(sigma: &GaussianState, t: f64) -> Result<SymplecticFlow> {
    flow_for_covariance(sigma.cov(), t, "sigma")
}

fn flow_for_covariance(cov: &DMatrix<f64>, t: f64, what: &str) -> Result<SymplecticFlow> {
    let w = williamson(cov)?;
    require_faithful_spectrum(&w, what)?;
    let dim = cov.nrows();
    if t == 0.0 {
        return Ok(SymplecticFlow {
            matrix: DMatrix::identity(dim, dim),
        });
    }
    let modes = w.modes();
    // Omega H = S (Omega diag(h)) S^-1, and exp(t h J) = cos(t h) I + sin(t h) J per mode.
    let mut block = DMatrix::<f64>::zeros(dim, dim);
    for (j, &nu) in w.symplectic_eigenvalues.iter().enumerate() {
        let angle = t * ((nu + 1.0) / (nu - 1.0)).ln();
        let (sin, cos) = angle.sin_cos();
        block[(j, j)] = cos;
        block[(modes + j, modes + j)] = cos;
        block[(j, modes + j)] = sin;
        block[(modes + j, j)] = -sin;
    }
    Ok(SymplecticFlow {
        matrix: &w.symplectic * block * w.inverse_symplectic(),
    })
}

/// Rotated recovery map `X_P^t = S_{sigma,t} X_P S_{N(sigma),-t}`, `Y_P^t = S Y_P S^T`.
pub fn rotated_petz(
    sigma: &GaussianState,
    forward: &GaussianChannel,
    t: f64,
) -> Result<PetzConstruction> {
    petz_channel(sigma, forward)?.rotated(t)
}

pub fn cp_certificate(construction: &PetzConstruction) -> CpReport {
    construction.channel.check_cp()
}

impl PetzConstruction {
    fn assemble(&self, transform: DMatrix<f64>, noise: DMatrix<f64>, time: f64) -> Result<Self> {
        let displacement = self.sigma.mean() - &transform * self.sigma_out.mean();
        let channel = GaussianChannel::new_unchecked(transform, noise, displacement)?;
        let cp_min_eigenvalue = channel.check_cp().min_eigenvalue;
        Ok(Self {
            channel,
            cp_min_eigenvalue,
            time,
            ..self.clone()
        })
    }

    pub fn rotated(&self, t: f64) -> Result<Self> {
        let sigma_flow = flow_for_covariance(self.sigma.cov(), t, "sigma")?.matrix;
        let out_flow = flow_for_covariance(self.sigma_out.cov(), -t, "N(sigma)")?.matrix;
        let transform = &sigma_flow * &self.base_transform * out_flow;
        let noise = symmetrize(&(&sigma_flow * &self.base_noise * sigma_flow.transpose()));
        self.assemble(transform, noise, t)
    }

    pub fn channel(&self) -> &GaussianChannel {
        &self.channel
    }

    pub fn cp_min_eigenvalue(&self) -> f64 {
        self.cp_min_eigenvalue
    }

    pub fn sigma(&self) -> &GaussianState {
        &self.sigma
    }

    pub fn sigma_out(&self) -> &GaussianState {
        &self.sigma_out
    }

    pub fn forward(&self) -> &GaussianChannel {
        &self.forward
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Max-norm covariance and mean defects of `P(N(sigma))` against `sigma`.
    pub fn reversal_defect(&self) -> Result<(f64, f64)> {
        let back = self.channel.apply(&self.sigma_out)?;
        Ok((
            max_abs(&(back.cov() - self.sigma.cov())),
            max_abs_vec(&(back.mean() - self.sigma.mean())),
        ))
    }

    /// Both sides of the Petz equation at `(w1, w2)` using this recovery map.
    pub fn identity_sides(
        &self,
        w1: &DVector<f64>,
        w2: &DVector<f64>,
    ) -> Result<(Complex64, Complex64)> {
        petz_identity_sides(&self.sigma, &self.forward, &self.channel, w1, w2)
    }
}

/// Both sides of `Tr[sigma^1/2 D_-w2 sigma^1/2 N^dag(D_w1)] = Tr[P^dag(D_-w2) N(sigma)^1/2 D_w1 N(sigma)^1/2]`.
///
/// The left side uses only `sigma` and `N`; the right side uses the supplied
/// recovery channel, so a wrong recovery map shows up as a mismatch.
pub fn petz_identity_sides(
    sigma: &GaussianState,
    forward: &GaussianChannel,
    recovery: &GaussianChannel,
    w1: &DVector<f64>,
    w2: &DVector<f64>,
) -> Result<(Complex64, Complex64)> {
    let (n_in, n_out) = (forward.modes_in(), forward.modes_out());
    if w1.len() != 2 * n_out || w2.len() != 2 * n_in {
        return Err(Error::Dimension(
            "w1 must live on the output, w2 on the input".into(),
        ));
    }
    if recovery.modes_in() != n_out || recovery.modes_out() != n_in {
        return Err(Error::Dimension(
            "recovery channel does not invert the forward shape".into(),
        ));
    }
    let omega_in = symplectic_form(n_in);
    let omega_out = symplectic_form(n_out);
    let sigma_out = forward.apply(sigma)?;
    let (cov, cov_out) = (sigma.cov(), sigma_out.cov());

    let a = omega_out.transpose() * w1;
    let b = &omega_in * w2;
    let lhs_exponent = -0.25 * a.dot(&(cov_out * &a))
        - 0.25 * b.dot(&(cov * &b))
        - 0.5 * a.dot(&(forward.transform() * sqrt_filter(cov)? * cov * &b));
    let lhs = Complex64::new(lhs_exponent, 0.0).exp();

    let y = &omega_out * recovery.transform().transpose() * omega_in.transpose() * w2;
    let c = omega_in.transpose() * w2;
    let rhs = sandwich_char_with_filter(cov_out, &sqrt_filter(cov_out)?, w1, &y)
        * (-0.25 * c.dot(&(recovery.noise() * &c))).exp();

    let phase = -sigma_out.mean().dot(&(&omega_out * w1)) + sigma.mean().dot(&(&omega_in * w2));
    let phase = Complex64::from_polar(1.0, phase);
    Ok((lhs * phase, rhs * phase))
}

pub fn verify_petz_identity(
    sigma: &GaussianState,
    forward: &GaussianChannel,
    w1: &DVector<f64>,
    w2: &DVector<f64>,
) -> Result<(Complex64, Complex64)> {
    petz_channel(sigma, forward)?.identity_sides(w1, w2)
}

/// `count` deterministic probe vectors in `[-2, 2]^dim` built from a uniform
/// one-dimensional lattice; `stride` decorrelates coordinates.
pub fn probe_vectors(count: usize, dim: usize, stride: usize) -> Vec<DVector<f64>> {
    let lattice: Vec<f64> = if count <= 1 {
        vec![0.0]
    } else {
        (0..count)
            .map(|i| -2.0 + 4.0 * i as f64 / (count - 1) as f64)
            .collect()
    };
    (0..lattice.len())
        .map(|i| {
            DVector::from_fn(dim, |k, _| {
                lattice[(i + stride * k + k / 2) % lattice.len()]
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(values: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(values)
    }

    #[test]
    fn identity_channel_is_its_own_recovery() {
        let p = petz_channel(
            &GaussianState::thermal(1, 3.0),
            &GaussianChannel::identity(1),
        )
        .unwrap();
        assert!(max_abs(&(p.channel().transform() - DMatrix::identity(2, 2))) < 1e-12);
        assert!(max_abs(p.channel().noise()) < 1e-12);
        assert!(max_abs_vec(p.channel().delta()) < 1e-12);
        assert_abs_diff_eq!(cp_certificate(&p).min_eigenvalue, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn thermal_through_loss() {
        let sigma = GaussianState::thermal(1, 3.0);
        let loss = GaussianChannel::loss(1, 0.5).unwrap();
        let p = petz_channel(&sigma, &loss).unwrap();
        let eye = DMatrix::<f64>::identity(2, 2);
        assert!(max_abs(&(p.channel().transform() - &eye * (2.0 / 3f64.sqrt()))) < 1e-12);
        assert!(max_abs(&(p.channel().noise() - &eye / 3.0)) < 1e-12);
        assert_abs_diff_eq!(p.cp_min_eigenvalue(), 0.0, epsilon = 1e-12);

        let shifted = loss.with_displacement(v(&[1.0, 0.0])).unwrap();
        let p = petz_channel(&sigma, &shifted).unwrap();
        assert!(max_abs_vec(&(p.channel().delta() - v(&[-2.0 / 3f64.sqrt(), 0.0]))) < 1e-12);
    }

    #[test]
    fn pure_output_is_rejected() {
        let err = petz_channel(
            &GaussianState::vacuum(1),
            &GaussianChannel::phase_rotation(1, 0.3),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotFaithful { .. }));
    }

    #[test]
    fn flow_examples() {
        let sigma = GaussianState::thermal(1, 3.0);
        assert_eq!(
            symplectic_flow(&sigma, 0.0).unwrap().matrix,
            DMatrix::identity(2, 2)
        );
        let flow = symplectic_flow(&sigma, 1.0).unwrap();
        let ln2 = 2f64.ln();
        let expected = DMatrix::identity(2, 2) * ln2.cos() + symplectic_form(1) * ln2.sin();
        assert!(max_abs(&(flow.matrix - expected)) < 1e-12);
    }

    #[test]
    fn rotated_thermal_loss() {
        let sigma = GaussianState::thermal(1, 3.0);
        let loss = GaussianChannel::loss(1, 0.5).unwrap();
        let p = rotated_petz(&sigma, &loss, 1.0).unwrap();
        // Flows are rotations by ln 2 (sigma) and -ln 3 (N(sigma) = 2 I).
        let rot = |a: f64| DMatrix::identity(2, 2) * a.cos() + symplectic_form(1) * a.sin();
        let expected = rot(2f64.ln()) * (2.0 / 3f64.sqrt()) * rot(-(3f64.ln()));
        assert!(max_abs(&(p.channel().transform() - expected)) < 1e-12);
        assert!(max_abs(&(p.channel().noise() - DMatrix::identity(2, 2) / 3.0)) < 1e-12);
        assert!(p.cp_min_eigenvalue() >= -1e-9);
        let (dc, dm) = p.reversal_defect().unwrap();
        assert!(dc < 1e-12 && dm < 1e-12);
    }

    #[test]
    fn identity_sides_match_on_thermal_loss() {
        let sigma = GaussianState::thermal(1, 3.0);
        let loss = GaussianChannel::loss(1, 0.5).unwrap();
        let (l0, r0) =
            verify_petz_identity(&sigma, &loss, &DVector::zeros(2), &DVector::zeros(2)).unwrap();
        assert_abs_diff_eq!((l0 - 1.0).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((r0 - 1.0).norm(), 0.0, epsilon = 1e-15);
        let (l, r) = verify_petz_identity(&sigma, &loss, &v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        assert!((l - r).norm() < 1e-12);
    }

    #[test]
    fn probe_lattice_shapes() {
        assert_eq!(probe_vectors(1, 4, 1), vec![DVector::zeros(4)]);
        let probes = probe_vectors(8, 2, 3);
        assert_eq!(probes.len(), 8);
        assert!(probes.iter().all(|p| p.iter().all(|x| x.abs() <= 2.0)));
    }
}
