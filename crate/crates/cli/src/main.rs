//! `gauss-petz`: build and check Gaussian Petz recovery channels from the command line.
//!
//! Exit codes: 0 success, 1 a check failed, 2 a required state is not faithful,
//! 3 malformed input or configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gauss_petz::{
    fidelity_recovery_bound, oracle_suite, petz_channel, petz_identity_sides, probe_vectors,
    run_search, DMatrix, Error, GaussianChannel, GaussianState, QuadratureConfig, SearchConfig,
};
use serde::de::DeserializeOwned;
use serde_json::json;

const THREADS_VAR: &str = "GAUSS_PETZ_THREADS";
const CP_TOLERANCE: f64 = 1e-9;
const SLACK_TOLERANCE: f64 = -1e-6;

#[derive(Parser)]
#[command(
    name = "gauss-petz",
    version,
    about = "Petz recovery channels for Gaussian states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct the recovery channel for a reference state and a forward channel.
    Petz {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        channel: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Largest accepted reversal defect on `N(sigma)`.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Check the characteristic-function identity defining the recovery channel on a probe grid.
    Verify {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Add this multiple of the identity to the recovery noise before checking.
        #[arg(long)]
        corrupt_noise: Option<f64>,
    },
    /// Randomized search for a negative recovery deficit.
    Search {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        modes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of most negative records to keep.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Evaluate both sides of the fidelity-of-recovery entropy bound.
    Bound {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, default_value_t = 201)]
        quad_points: usize,
        #[arg(long, default_value_t = 5.0)]
        quad_range: f64,
    },
    /// Compare closed forms against dense truncated-Fock computations.
    Oracle {
        #[arg(long, default_value_t = 40)]
        cutoff: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotFaithful { .. } => 2,
            Error::OraclePrecision(_) => 1,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).map_err(|e| Failure {
            code: 3,
            message: format!("{}: {e}", path.display()),
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn run_petz(state: &Path, channel: &Path, out: Option<&Path>, tol: f64) -> Outcome {
    let sigma: GaussianState = read_json(state)?;
    let forward: GaussianChannel = read_json(channel)?;
    let petz = petz_channel(&sigma, &forward)?;
    let (cov_defect, mean_defect) = petz.reversal_defect()?;
    let recovery = petz.channel();
    let report = json!({
        "X_P": rows(recovery.transform()),
        "Y_P": rows(recovery.noise()),
        "delta_P": recovery.delta().iter().copied().collect::<Vec<f64>>(),
        "cp_min_eigenvalue": petz.cp_min_eigenvalue(),
        "reversal_defect": { "cov": cov_defect, "mean": mean_defect },
    });
    emit(
        out,
        &serde_json::to_string_pretty(&report).expect("JSON values serialize"),
    )?;
    let cp_ok = petz.cp_min_eigenvalue() >= -CP_TOLERANCE;
    let reversal_ok = cov_defect.max(mean_defect) <= tol;
    if !cp_ok {
        eprintln!(
            "complete-positivity certificate failed: min eigenvalue {:.3e}",
            petz.cp_min_eigenvalue()
        );
    }
    if !reversal_ok {
        eprintln!(
            "reversal defect {:.3e} exceeds {tol:.1e}",
            cov_defect.max(mean_defect)
        );
    }
    Ok(cp_ok && reversal_ok)
}

fn run_verify(
    state: &Path,
    channel: &Path,
    grid: usize,
    tol: f64,
    corrupt: Option<f64>,
) -> Outcome {
    let sigma: GaussianState = read_json(state)?;
    let forward: GaussianChannel = read_json(channel)?;
    let petz = petz_channel(&sigma, &forward)?;
    let mut recovery = petz.channel().clone();
    if let Some(eps) = corrupt {
        let dim = recovery.noise().nrows();
        recovery = GaussianChannel::new_unchecked(
            recovery.transform().clone(),
            recovery.noise() + DMatrix::identity(dim, dim) * eps,
            recovery.delta().clone(),
        )?;
    }
    let outputs = probe_vectors(grid, 2 * forward.modes_out(), 1);
    let inputs = probe_vectors(grid, 2 * forward.modes_in(), 2);
    let mut worst = (0.0_f64, 0, 0);
    for (i, w1) in outputs.iter().enumerate() {
        for (j, w2) in inputs.iter().enumerate() {
            let (lhs, rhs) = petz_identity_sides(&sigma, &forward, &recovery, w1, w2)?;
            let diff = (lhs - rhs).norm();
            if diff > worst.0 {
                worst = (diff, i, j);
            }
        }
    }
    let (diff, i, j) = worst;
    println!("max_abs_difference\t{diff:.6e}");
    if diff > 0.0 {
        println!("at_w1\t{:?}", outputs[i].as_slice());
        println!("at_w2\t{:?}", inputs[j].as_slice());
    }
    Ok(diff <= tol)
}

fn run_search_command(config: SearchConfig, out: Option<&Path>) -> Outcome {
    let summary = run_search(&config)?;
    eprintln!(
        "evaluated {} of {} samples; near-singular {}; failed {}; counterexamples {}",
        summary.evaluated,
        summary.samples,
        summary.near_singular,
        summary.failed,
        summary.counterexamples
    );
    if let Some(min) = summary.min_deficit {
        eprintln!("most negative deficit {min:.6e}");
    }
    emit(
        out,
        &serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    Ok(summary.found())
}

fn run_bound(rho: &Path, sigma: &Path, channel: &Path, quad: QuadratureConfig) -> Outcome {
    quad.validate()?;
    let rho: GaussianState = read_json(rho)?;
    let sigma: GaussianState = read_json(sigma)?;
    let channel: GaussianChannel = read_json(channel)?;
    let report = fidelity_recovery_bound(&rho, &sigma, &channel, &quad)?;
    println!("lhs\t{:.12e}", report.lhs);
    println!("rhs\t{:.12e}", report.rhs);
    println!("slack\t{:.12e}", report.slack);
    Ok(report.slack >= SLACK_TOLERANCE)
}

fn run_oracle(cutoff: usize, tol: f64) -> Outcome {
    let checks = oracle_suite(cutoff)?;
    println!("check\terror\ttail_mass\tstatus\tnote");
    let mut all = true;
    for check in &checks {
        let pass = check.passes(tol);
        all &= pass;
        println!(
            "{}\t{:.3e}\t{:.3e}\t{}\t{}",
            check.name,
            check.error,
            check.tail_mass,
            if pass { "PASS" } else { "FAIL" },
            check.note.as_deref().unwrap_or("")
        );
    }
    Ok(all)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure {
            code: 3,
            message: format!("{THREADS_VAR} must be a positive integer"),
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure {
            code: 3,
            message: e.to_string(),
        })
}

fn run(cli: Cli) -> Outcome {
    configure_threads()?;
    match cli.command {
        Command::Petz {
            state,
            channel,
            out,
            tol,
        } => run_petz(&state, &channel, out.as_deref(), tol),
        Command::Verify {
            state,
            channel,
            grid,
            tol,
            corrupt_noise,
        } => run_verify(&state, &channel, grid, tol, corrupt_noise),
        Command::Search {
            seed,
            samples,
            modes,
            out,
            top,
        } => run_search_command(
            SearchConfig {
                seed,
                samples,
                modes,
                top,
            },
            out.as_deref(),
        ),
        Command::Bound {
            rho,
            sigma,
            channel,
            quad_points,
            quad_range,
        } => run_bound(
            &rho,
            &sigma,
            &channel,
            QuadratureConfig {
                half_range: quad_range,
                points: quad_points,
            },
        ),
        Command::Oracle { cutoff, tol } => run_oracle(cutoff, tol),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
