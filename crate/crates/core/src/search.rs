//! Randomized search for instances where the recovery deficit
//! `D(rho||sigma) - D(N rho||N sigma) - D(rho||P(N(rho)))` is negative.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::GaussianChannel;
use crate::error::{Error, Result};
use crate::info::{recovery_deficit, Instance};
use crate::symplectic::GaussianState;
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub samples: u64,
    pub modes: usize,
    /// How many of the most negative records to keep.
    pub top: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub seed: u64,
    pub index: u64,
    pub deficit: f64,
    pub d_in: f64,
    pub d_out: f64,
    pub d_recovery: f64,
    pub near_singular: bool,
    pub instance: Instance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub seed: u64,
    pub samples: u64,
    pub modes: usize,
    pub evaluated: u64,
    /// Samples whose recovered state was too close to pure to evaluate.
    pub near_singular: u64,
    pub failed: u64,
    pub counterexamples: u64,
    pub min_deficit: Option<f64>,
    pub records: Vec<SearchRecord>,
}

impl SearchSummary {
    pub fn found(&self) -> bool {
        self.counterexamples > 0
    }
}

/// Independent generator for sample `index`: one ChaCha stream per index.
fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn sample_single_mode(rng: &mut ChaCha8Rng) -> GaussianState {
    let nu = rng.gen_range(1.05..4.0);
    let squeezing = rng.gen_range(0.0..1.0);
    let angle = rng.gen_range(0.0..2.0 * PI);
    let mean = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
    GaussianState::squeezed_thermal(nu, squeezing, angle, mean)
}

/// Beam splitter with transmission angle `theta` and phase `phi` in xxpp ordering.
fn beam_splitter(theta: f64, phi: f64) -> DMatrix<f64> {
    let (c, s) = (theta.cos(), theta.sin());
    let (cp, sp) = (phi.cos(), phi.sin());
    // Unitary [[c, -s e^{-i phi}], [s e^{i phi}, c]] written as a real 4x4 block matrix.
    let re = DMatrix::from_row_slice(2, 2, &[c, -s * cp, s * cp, c]);
    let im = DMatrix::from_row_slice(2, 2, &[0.0, s * sp, s * sp, 0.0]);
    let mut m = DMatrix::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(&re);
    m.view_mut((2, 2), (2, 2)).copy_from(&re);
    m.view_mut((0, 2), (2, 2)).copy_from(&(-&im));
    m.view_mut((2, 0), (2, 2)).copy_from(&im);
    m
}

fn sample_two_mode(rng: &mut ChaCha8Rng) -> Result<GaussianState> {
    let first = sample_single_mode(rng);
    let second = sample_single_mode(rng);
    let mut cov = DMatrix::zeros(4, 4);
    let mut mean = DVector::zeros(4);
    for (mode, state) in [(0, &first), (1, &second)] {
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            cov[(mode + 2 * i, mode + 2 * j)] = state.cov()[(i, j)];
        }
        mean[mode] = state.mean()[0];
        mean[mode + 2] = state.mean()[1];
    }
    let mixer = beam_splitter(rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
    GaussianState::new(&mixer * mean, &mixer * cov * mixer.transpose())
}

fn sample_state(rng: &mut ChaCha8Rng, modes: usize) -> Result<GaussianState> {
    match modes {
        1 => Ok(sample_single_mode(rng)),
        2 => sample_two_mode(rng),
        _ => Err(Error::Config(format!(
            "search supports 1 or 2 modes, got {modes}"
        ))),
    }
}

fn sample_channel(rng: &mut ChaCha8Rng, modes: usize) -> Result<GaussianChannel> {
    let channel = match rng.gen_range(0..3) {
        0 => GaussianChannel::loss(modes, rng.gen_range(0.1..0.95))?,
        1 => GaussianChannel::amplifier(modes, rng.gen_range(1.05..3.0))?,
        _ => GaussianChannel::classical_noise(modes, rng.gen_range(0.1..2.0))?,
    };
    let delta = DVector::from_fn(2 * modes, |_, _| rng.gen_range(-2.0..2.0));
    channel.with_displacement(delta)
}

/// The instance drawn for sample `index` under `seed`.
pub fn sample_instance(seed: u64, index: u64, modes: usize) -> Result<Instance> {
    let mut rng = sample_rng(seed, index);
    let rho = sample_state(&mut rng, modes)?;
    let sigma = sample_state(&mut rng, modes)?;
    let channel = sample_channel(&mut rng, modes)?;
    Ok(Instance {
        rho,
        sigma,
        channel,
    })
}

enum Outcome {
    Evaluated(Box<SearchRecord>),
    NearSingular,
    Failed,
}

fn evaluate(seed: u64, index: u64, modes: usize) -> Outcome {
    let Ok(instance) = sample_instance(seed, index, modes) else {
        return Outcome::Failed;
    };
    match recovery_deficit(&instance.rho, &instance.sigma, &instance.channel) {
        Ok(report) => Outcome::Evaluated(Box::new(SearchRecord {
            seed,
            index,
            deficit: report.deficit,
            d_in: report.d_in,
            d_out: report.d_out,
            d_recovery: report.d_recovery,
            near_singular: false,
            instance,
        })),
        Err(Error::NotFaithful { .. }) => Outcome::NearSingular,
        Err(_) => Outcome::Failed,
    }
}

/// Evaluate `samples` random instances in parallel and keep the `top` most negative
/// deficits, ordered by `(deficit, index)`. The result does not depend on thread count.
pub fn run_search(config: &SearchConfig) -> Result<SearchSummary> {
    if !(1..=2).contains(&config.modes) {
        return Err(Error::Config(format!(
            "search supports 1 or 2 modes, got {}",
            config.modes
        )));
    }
    let outcomes: Vec<Outcome> = (0..config.samples)
        .into_par_iter()
        .map(|i| evaluate(config.seed, i, config.modes))
        .collect();

    let mut summary = SearchSummary {
        seed: config.seed,
        samples: config.samples,
        modes: config.modes,
        evaluated: 0,
        near_singular: 0,
        failed: 0,
        counterexamples: 0,
        min_deficit: None,
        records: Vec::new(),
    };
    let mut records = Vec::new();
    for outcome in outcomes {
        match outcome {
            Outcome::Evaluated(record) => {
                summary.evaluated += 1;
                if record.deficit < tol::COUNTEREXAMPLE {
                    summary.counterexamples += 1;
                }
                records.push(*record);
            }
            Outcome::NearSingular => summary.near_singular += 1,
            Outcome::Failed => summary.failed += 1,
        }
    }
    records.sort_by(|a, b| a.deficit.total_cmp(&b.deficit).then(a.index.cmp(&b.index)));
    summary.min_deficit = records.first().map(|r| r.deficit);
    records.truncate(config.top);
    summary.records = records;
    Ok(summary)
}
