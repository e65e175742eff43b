//! Random faithful states and completely positive channels on 1 to 3 modes.
#![allow(dead_code)]

use gauss_petz::{symplectic_form, Complex64, DMatrix, DVector, GaussianChannel, GaussianState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Orthogonal symplectic matrix of a random unitary `exp(iK)`.
pub fn random_passive(rng: &mut ChaCha8Rng, modes: usize) -> DMatrix<f64> {
    let mut k = DMatrix::<Complex64>::zeros(modes, modes);
    for i in 0..modes {
        k[(i, i)] = Complex64::new(rng.gen_range(-3.0..3.0), 0.0);
        for j in 0..i {
            let z = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            k[(i, j)] = z;
            k[(j, i)] = z.conj();
        }
    }
    let u = (k * Complex64::new(0.0, 1.0)).exp();
    let mut o = DMatrix::zeros(2 * modes, 2 * modes);
    for i in 0..modes {
        for j in 0..modes {
            let (a, b) = (u[(i, j)].re, u[(i, j)].im);
            o[(i, j)] = a;
            o[(modes + i, modes + j)] = a;
            o[(i, modes + j)] = -b;
            o[(modes + i, j)] = b;
        }
    }
    o
}

pub fn random_symplectic(rng: &mut ChaCha8Rng, modes: usize, max_squeezing: f64) -> DMatrix<f64> {
    let r: Vec<f64> = (0..modes)
        .map(|_| rng.gen_range(0.0..max_squeezing))
        .collect();
    let diag = DVector::from_fn(2 * modes, |i, _| {
        if i < modes {
            r[i].exp()
        } else {
            (-r[i - modes]).exp()
        }
    });
    random_passive(rng, modes) * DMatrix::from_diagonal(&diag) * random_passive(rng, modes)
}

pub fn random_state(rng: &mut ChaCha8Rng, modes: usize) -> GaussianState {
    let nus: Vec<f64> = (0..modes).map(|_| rng.gen_range(1.05..4.0)).collect();
    let diag = DVector::from_fn(2 * modes, |i, _| nus[i % modes]);
    let s = random_symplectic(rng, modes, 0.8);
    let cov = &s * DMatrix::from_diagonal(&diag) * s.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    let mean = DVector::from_fn(2 * modes, |_, _| rng.gen_range(-2.0..2.0));
    GaussianState::new(mean, cov).unwrap()
}

/// A channel from a random symplectic coupling to a thermal environment of equal size.
pub fn random_channel(rng: &mut ChaCha8Rng, modes: usize) -> GaussianChannel {
    let total = 2 * modes;
    let s = random_symplectic(rng, total, 0.6);
    let env_nu: Vec<f64> = (0..modes).map(|_| rng.gen_range(1.0..3.0)).collect();
    // xxpp indices of system and environment quadratures in the joint space.
    let sys: Vec<usize> = (0..modes).chain(total..total + modes).collect();
    let env: Vec<usize> = (modes..total).chain(total + modes..2 * total).collect();
    let x = DMatrix::from_fn(2 * modes, 2 * modes, |i, j| s[(sys[i], sys[j])]);
    let coupling = DMatrix::from_fn(2 * modes, 2 * modes, |i, j| s[(sys[i], env[j])]);
    let env_cov = DMatrix::from_diagonal(&DVector::from_fn(2 * modes, |i, _| env_nu[i % modes]));
    let y = &coupling * env_cov * coupling.transpose();
    let y = (&y + y.transpose()) * 0.5;
    let delta = DVector::from_fn(2 * modes, |_, _| rng.gen_range(-1.0..1.0));
    GaussianChannel::new(x, y, delta).unwrap()
}

pub struct RandomInstance {
    pub rho: GaussianState,
    pub sigma: GaussianState,
    pub channel: GaussianChannel,
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> RandomInstance {
    let modes = rng.gen_range(1..=3);
    RandomInstance {
        rho: random_state(rng, modes),
        sigma: random_state(rng, modes),
        channel: random_channel(rng, modes),
    }
}

pub fn is_symplectic(m: &DMatrix<f64>) -> f64 {
    let omega = symplectic_form(m.nrows() / 2);
    (m * &omega * m.transpose() - omega).abs().max()
}
