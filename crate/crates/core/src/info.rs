//! Entropy, relative entropy, and fidelity of Gaussian states, plus the
//! recovery deficit and the fidelity-of-recovery bound built on them.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::GaussianChannel;
use crate::error::{Error, Result};
use crate::linalg::inverse;
use crate::petz::petz_channel;
use crate::symplectic::{
    hamiltonian_from_covariance, require_valid, sqrt_sandwich_covariance, williamson, GaussianState,
};
use crate::tol;

/// A triple `(rho, sigma, N)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub rho: GaussianState,
    pub sigma: GaussianState,
    pub channel: GaussianChannel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport {
    pub d_in: f64,
    pub d_out: f64,
    pub d_recovery: f64,
    pub deficit: f64,
    pub instance: Instance,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// Trapezoid rule for the density `p(t) = (pi/2) / (cosh(pi t) + 1)` on `[-half_range, half_range]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub half_range: f64,
    pub points: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            half_range: 5.0,
            points: 201,
        }
    }
}

/// Largest tail mass of `p` outside the quadrature window that is accepted.
pub const MAX_TAIL_MASS: f64 = 1e-4;

pub fn recovery_density(t: f64) -> f64 {
    0.5 * PI / ((PI * t).cosh() + 1.0)
}

impl QuadratureConfig {
    /// Mass of `p` outside the window; the CDF is `(1 + tanh(pi t / 2)) / 2`.
    pub fn tail_mass(&self) -> f64 {
        1.0 - (0.5 * PI * self.half_range).tanh()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_range > 0.0) || self.points < 2 {
            return Err(Error::Config(format!(
                "quadrature needs a positive range and at least 2 points, got range {} with {} points",
                self.half_range, self.points
            )));
        }
        let tail = self.tail_mass();
        if tail > MAX_TAIL_MASS {
            return Err(Error::Config(format!(
                "quadrature range {} leaves tail mass {tail:.3e} > {MAX_TAIL_MASS:.0e}",
                self.half_range
            )));
        }
        Ok(())
    }

    /// Nodes `t_k` with combined weights `w_k p(t_k)`.
    pub fn weighted_nodes(&self) -> Vec<(f64, f64)> {
        let step = 2.0 * self.half_range / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                let t = -self.half_range + step * k as f64;
                let end = k == 0 || k + 1 == self.points;
                let w = if end { 0.5 * step } else { step };
                (t, w * recovery_density(t))
            })
            .collect()
    }

    pub fn mass(&self) -> f64 {
        self.weighted_nodes().iter().map(|(_, w)| w).sum()
    }
}

fn entropy_term(nu: f64) -> f64 {
    if nu <= 1.0 {
        return 0.0;
    }
    let plus = 0.5 * (nu + 1.0);
    let minus = 0.5 * (nu - 1.0);
    plus * plus.ln() - minus * minus.ln()
}

/// Von Neumann entropy in nats.
pub fn entropy(state: &GaussianState) -> Result<f64> {
    require_valid(state, "state")?;
    Ok(williamson(state.cov())?
        .symplectic_eigenvalues
        .iter()
        .map(|&nu| entropy_term(nu))
        .sum())
}

fn require_same_modes(a: &GaussianState, b: &GaussianState) -> Result<()> {
    if a.modes() != b.modes() {
        return Err(Error::Dimension(format!(
            "states have {} and {} modes",
            a.modes(),
            b.modes()
        )));
    }
    Ok(())
}

pub fn relative_entropy(rho: &GaussianState, sigma: &GaussianState) -> Result<f64> {
    relative_entropy_named(rho, sigma, "sigma")
}

fn relative_entropy_named(rho: &GaussianState, sigma: &GaussianState, what: &str) -> Result<f64> {
    require_same_modes(rho, sigma)?;
    require_valid(rho, "rho")?;
    require_valid(sigma, what)?;
    let h = hamiltonian_from_covariance(sigma.cov()).map_err(|e| match e {
        Error::NotFaithful { smallest, .. } => Error::NotFaithful {
            what: what.to_string(),
            smallest,
        },
        other => other,
    })?;
    let delta = rho.mean() - sigma.mean();
    let cross = 0.25 * (&h.matrix * rho.cov()).trace() + 0.5 * delta.dot(&(&h.matrix * &delta));
    Ok(cross + h.log_partition - entropy(rho)?)
}

/// `ln F` for the Uhlmann fidelity `F = (Tr |sqrt(rho) sqrt(sigma)|)^2`.
///
/// `sqrt(rho) sigma sqrt(rho)` is Gaussian with trace `Tr[rho sigma]` and normalized
/// covariance `W`; the trace of its square root contributes `arccosh(w_j)` per
/// symplectic eigenvalue of `W`.
pub fn log_fidelity(rho: &GaussianState, sigma: &GaussianState) -> Result<f64> {
    require_same_modes(rho, sigma)?;
    require_valid(rho, "rho")?;
    require_valid(sigma, "sigma")?;
    let sum = rho.cov() + sigma.cov();
    let half_det = (&sum * 0.5).determinant();
    if !(half_det > 0.0) {
        return Err(Error::Domain("V_rho + V_sigma is singular".into()));
    }
    let delta = rho.mean() - sigma.mean();
    let log_overlap =
        -0.5 * half_det.ln() - delta.dot(&(inverse(&sum, "V_rho + V_sigma")? * &delta));
    let sandwich: DMatrix<f64> = sqrt_sandwich_covariance(rho.cov(), sigma.cov())?;
    let root_trace: f64 = williamson(&sandwich)?
        .symplectic_eigenvalues
        .iter()
        .map(|&w| w.max(1.0).acosh())
        .sum();
    Ok((log_overlap + root_trace).min(0.0))
}

pub fn fidelity(rho: &GaussianState, sigma: &GaussianState) -> Result<f64> {
    Ok(log_fidelity(rho, sigma)?.exp())
}

/// `D(rho||sigma) - D(N rho||N sigma) - D(rho||P(N(rho)))` with `P` the Petz map of `(sigma, N)`.
pub fn recovery_deficit(
    rho: &GaussianState,
    sigma: &GaussianState,
    channel: &GaussianChannel,
) -> Result<DeficitReport> {
    let d_in = relative_entropy_named(rho, sigma, "sigma")?;
    let rho_out = channel.apply(rho)?;
    let sigma_out = channel.apply(sigma)?;
    let d_out = relative_entropy_named(&rho_out, &sigma_out, "N(sigma)")?;
    let recovered = petz_channel(sigma, channel)?.channel().apply(&rho_out)?;
    let smallest = williamson(recovered.cov())?.smallest();
    if smallest <= 1.0 + tol::FAITHFUL {
        return Err(Error::NotFaithful {
            what: "recovered state P(N(rho))".into(),
            smallest,
        });
    }
    let d_recovery = relative_entropy_named(rho, &recovered, "recovered state P(N(rho))")?;
    Ok(DeficitReport {
        d_in,
        d_out,
        d_recovery,
        deficit: d_in - d_out - d_recovery,
        instance: Instance {
            rho: rho.clone(),
            sigma: sigma.clone(),
            channel: channel.clone(),
        },
    })
}

/// `D(rho||sigma) >= D(N rho||N sigma) - int p(t) ln F(rho, P^{t/2}(N(rho))) dt`, evaluated
/// by quadrature. Returns `lhs`, `rhs` and `slack = lhs - rhs`.
pub fn fidelity_recovery_bound(
    rho: &GaussianState,
    sigma: &GaussianState,
    channel: &GaussianChannel,
    quad: &QuadratureConfig,
) -> Result<BoundReport> {
    quad.validate()?;
    let lhs = relative_entropy_named(rho, sigma, "sigma")?;
    let rho_out = channel.apply(rho)?;
    let d_out = relative_entropy_named(&rho_out, &channel.apply(sigma)?, "N(sigma)")?;
    let petz = petz_channel(sigma, channel)?;
    let terms = quad
        .weighted_nodes()
        .into_par_iter()
        .map(|(t, weight)| {
            let recovered = petz.rotated(0.5 * t)?.channel().apply(&rho_out)?;
            Ok(weight * log_fidelity(rho, &recovered)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    // Fixed-order summation keeps the result independent of scheduling.
    let integral: f64 = terms.iter().sum();
    let rhs = d_out - integral;
    Ok(BoundReport {
        lhs,
        rhs,
        slack: lhs - rhs,
    })
}
