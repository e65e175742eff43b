//! Gaussian channels `(X, Y, delta)` acting as `V -> X V X^T + Y`, `s -> X s + delta`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    asymmetry, inverse, matrix_to_rows, min_eig_hermitian, require_even, rows_to_matrix, symmetrize,
};
use crate::symplectic::{symplectic_form, GaussianState};
use crate::tol;

/// A Gaussian channel from `n_in` to `n_out` modes.
///
/// [`GaussianChannel::new`] checks symmetry of the noise matrix and complete positivity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr", into = "ChannelRepr")]
pub struct GaussianChannel {
    transform: DMatrix<f64>,
    noise: DMatrix<f64>,
    displacement: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    #[serde(rename = "X")]
    transform: Vec<Vec<f64>>,
    #[serde(rename = "Y")]
    noise: Vec<Vec<f64>>,
    delta: Vec<f64>,
}

impl TryFrom<ChannelRepr> for GaussianChannel {
    type Error = Error;

    fn try_from(repr: ChannelRepr) -> Result<Self> {
        GaussianChannel::new(
            rows_to_matrix(&repr.transform, "X")?,
            rows_to_matrix(&repr.noise, "Y")?,
            DVector::from_vec(repr.delta),
        )
    }
}

impl From<GaussianChannel> for ChannelRepr {
    fn from(channel: GaussianChannel) -> Self {
        ChannelRepr {
            transform: matrix_to_rows(&channel.transform),
            noise: matrix_to_rows(&channel.noise),
            delta: channel.displacement.iter().copied().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CpReport {
    pub min_eigenvalue: f64,
    pub is_cp: bool,
}

/// `N^dag(D_{Omega z}) = D_{Omega X^T z} exp(log_weight + i phase)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementAdjoint {
    pub vector: DVector<f64>,
    pub log_weight: f64,
    pub phase: f64,
}

impl GaussianChannel {
    pub fn new(
        transform: DMatrix<f64>,
        noise: DMatrix<f64>,
        displacement: DVector<f64>,
    ) -> Result<Self> {
        let channel = Self::new_unchecked(transform, noise, displacement)?;
        let asym = asymmetry(&channel.noise);
        if asym > tol::SYMMETRY {
            return Err(Error::Domain(format!(
                "noise matrix Y is not symmetric (defect {asym:.3e})"
            )));
        }
        let cp = channel.check_cp();
        if !cp.is_cp {
            return Err(Error::NotCompletelyPositive(cp.min_eigenvalue));
        }
        Ok(channel)
    }

    /// Shape checks only. Used for recovery maps whose positivity is certified
    /// separately and for negative controls.
    pub fn new_unchecked(
        transform: DMatrix<f64>,
        noise: DMatrix<f64>,
        displacement: DVector<f64>,
    ) -> Result<Self> {
        require_even(transform.nrows(), "X rows")?;
        require_even(transform.ncols(), "X columns")?;
        if noise.shape() != (transform.nrows(), transform.nrows()) {
            return Err(Error::Dimension(format!(
                "Y is {:?} but X has {} rows",
                noise.shape(),
                transform.nrows()
            )));
        }
        if displacement.len() != transform.nrows() {
            return Err(Error::Dimension(format!(
                "delta has length {} but X has {} rows",
                displacement.len(),
                transform.nrows()
            )));
        }
        Ok(Self {
            transform,
            noise,
            displacement,
        })
    }

    pub fn identity(modes: usize) -> Self {
        let dim = 2 * modes;
        Self {
            transform: DMatrix::identity(dim, dim),
            noise: DMatrix::zeros(dim, dim),
            displacement: DVector::zeros(dim),
        }
    }

    /// Pure loss with transmissivity `eta` in `[0, 1]`.
    pub fn loss(modes: usize, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!(
                "transmissivity {eta} outside [0, 1]"
            )));
        }
        Ok(Self::isotropic(modes, eta.sqrt(), 1.0 - eta))
    }

    /// Quantum-limited amplifier with gain `G >= 1`.
    pub fn amplifier(modes: usize, gain: f64) -> Result<Self> {
        if !(gain >= 1.0) {
            return Err(Error::Domain(format!("gain {gain} below 1")));
        }
        Ok(Self::isotropic(modes, gain.sqrt(), gain - 1.0))
    }

    /// Additive classical noise `Y = y I`.
    pub fn classical_noise(modes: usize, variance: f64) -> Result<Self> {
        if !(variance >= 0.0) {
            return Err(Error::Domain(format!(
                "noise variance {variance} is negative"
            )));
        }
        Ok(Self::isotropic(modes, 1.0, variance))
    }

    pub fn displacement(delta: DVector<f64>) -> Result<Self> {
        let modes = require_even(delta.len(), "delta")?;
        Ok(Self {
            displacement: delta,
            ..Self::identity(modes)
        })
    }

    /// Phase rotation `exp(theta Omega)` on every mode.
    pub fn phase_rotation(modes: usize, theta: f64) -> Self {
        let dim = 2 * modes;
        let transform =
            DMatrix::identity(dim, dim) * theta.cos() + symplectic_form(modes) * theta.sin();
        Self {
            transform,
            ..Self::identity(modes)
        }
    }

    fn isotropic(modes: usize, scale: f64, noise: f64) -> Self {
        let dim = 2 * modes;
        Self {
            transform: DMatrix::identity(dim, dim) * scale,
            noise: DMatrix::identity(dim, dim) * noise,
            displacement: DVector::zeros(dim),
        }
    }

    pub fn with_displacement(mut self, delta: DVector<f64>) -> Result<Self> {
        if delta.len() != self.displacement.len() {
            return Err(Error::Dimension("displacement length changed".into()));
        }
        self.displacement = delta;
        Ok(self)
    }

    pub fn modes_in(&self) -> usize {
        self.transform.ncols() / 2
    }

    pub fn modes_out(&self) -> usize {
        self.transform.nrows() / 2
    }

    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
    }

    pub fn noise(&self) -> &DMatrix<f64> {
        &self.noise
    }

    pub fn delta(&self) -> &DVector<f64> {
        &self.displacement
    }

    fn require_input(&self, modes: usize) -> Result<()> {
        if modes != self.modes_in() {
            return Err(Error::Dimension(format!(
                "channel expects {} input modes, got {modes}",
                self.modes_in()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        self.require_input(state.modes())?;
        let cov =
            symmetrize(&(&self.transform * state.cov() * self.transform.transpose() + &self.noise));
        let mean = &self.transform * state.mean() + &self.displacement;
        GaussianState::new(mean, cov)
    }

    /// Heisenberg-picture moments: `V -> X^-1 (V + Y) X^-T`, `s -> X^-1 (s - delta)`.
    /// Only defined for square invertible `X`.
    pub fn adjoint_transform(
        &self,
        cov: &DMatrix<f64>,
        mean: &DVector<f64>,
    ) -> Result<(DMatrix<f64>, DVector<f64>)> {
        if self.modes_in() != self.modes_out() {
            return Err(Error::Domain(
                "moment adjoint needs a square invertible X; use adjoint_on_displacement instead"
                    .into(),
            ));
        }
        if cov.shape() != self.noise.shape() || mean.len() != self.displacement.len() {
            return Err(Error::Dimension(
                "moments do not match the channel output".into(),
            ));
        }
        let x_inv = inverse(&self.transform, "X")
            .map_err(|_| Error::Domain("moment adjoint needs an invertible X".into()))?;
        let cov_out = symmetrize(&(&x_inv * (cov + &self.noise) * x_inv.transpose()));
        let mean_out = &x_inv * (mean - &self.displacement);
        Ok((cov_out, mean_out))
    }

    pub fn adjoint_on_displacement(&self, z: &DVector<f64>) -> Result<DisplacementAdjoint> {
        if z.len() != self.displacement.len() {
            return Err(Error::Dimension(format!(
                "z has length {} but the channel outputs {} quadratures",
                z.len(),
                self.displacement.len()
            )));
        }
        Ok(DisplacementAdjoint {
            vector: self.transform.transpose() * z,
            log_weight: -0.25 * z.dot(&(&self.noise * z)),
            phase: z.dot(&self.displacement),
        })
    }

    /// Smallest eigenvalue of `Y + i Omega_out - i X Omega_in X^T`.
    pub fn check_cp(&self) -> CpReport {
        let antisym = symplectic_form(self.modes_out())
            - &self.transform * symplectic_form(self.modes_in()) * self.transform.transpose();
        let min_eigenvalue = min_eig_hermitian(&self.noise, &antisym);
        CpReport {
            min_eigenvalue,
            is_cp: min_eigenvalue >= -tol::UNCERTAINTY,
        }
    }

    /// The channel `after . before`.
    pub fn compose(after: &GaussianChannel, before: &GaussianChannel) -> Result<GaussianChannel> {
        if after.modes_in() != before.modes_out() {
            return Err(Error::Dimension(format!(
                "cannot chain a {}-mode output into a {}-mode input",
                before.modes_out(),
                after.modes_in()
            )));
        }
        let transform = &after.transform * &before.transform;
        let noise = symmetrize(
            &(&after.transform * &before.noise * after.transform.transpose() + &after.noise),
        );
        let displacement = &after.transform * &before.displacement + &after.displacement;
        Ok(GaussianChannel {
            transform,
            noise,
            displacement,
        })
    }
}
