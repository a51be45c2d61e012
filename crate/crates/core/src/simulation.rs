//! Data-generating process and Monte Carlo coverage harness for the
//! instrumental-regression experiments.

use nalgebra::{Matrix3, Vector3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::inference::{build_band, BandMethod, BandRequest, ProcessIndex};
use crate::kernel::KernelSpec;
use crate::model::{npiv_fit, npiv_residuals, NpivData};

/// Structural function of the simulated design: `φ(z) = exp(−z²/0.8)`.
pub fn true_phi(z: f64) -> f64 {
    (-z * z / 0.8).exp()
}

/// Covariance of the trivariate normal (Z, W, U): σ_z = σ_w = 0.3,
/// σ_u² = 0.03, σ_zu = 0.04, corr(Z, W) = 0.3, corr(W, U) = 0.
const DGP_COVARIANCE: [[f64; 3]; 3] = [
    [0.09, 0.027, 0.04],
    [0.027, 0.09, 0.0],
    [0.04, 0.0, 0.03],
];

/// One Monte Carlo experiment: sample size, tuning constants, band choice,
/// and the master seed every replication derives from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n: usize,
    pub replications: usize,
    pub alpha: f64,
    pub h: f64,
    pub gamma: f64,
    pub method: BandMethod,
    pub process_index: ProcessIndex,
    pub grid_m: usize,
    pub truncation: f64,
    pub master_seed: u64,
}

/// Aggregated Monte Carlo results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    /// Fraction of successful replications whose band contained the
    /// structural function at every grid point.
    pub coverage: f64,
    pub mean_half_width: f64,
    /// Mean over replications of `sup_k |φ̂(z_k) − φ(z_k)|`.
    pub mean_sup_bias: f64,
    /// Replications that completed without error (failed ones are excluded).
    pub replications_used: usize,
    pub config: McConfig,
}

impl McReport {
    /// Canonical JSON form of the report, used by the CLI and byte-for-byte
    /// reproducibility checks.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

/// Named tuning configurations of the simulation study. `fig1a`/`fig1b` are
/// Gaussian bands at (n=1000, α=0.14, h=1) and (n=5000, α=0.10, h=1);
/// `fig2a`/`fig2b` are concentration bands at (n=1000, α=0.24, h=1) and
/// (n=5000, α=0.17, h=0.6). All use γ=0.05, a 100-point grid, truncation 1,
/// 200 replications, and master seed 0.
pub fn preset(name: &str) -> Option<McConfig> {
    let base = McConfig {
        n: 0,
        replications: 200,
        alpha: 0.0,
        h: 0.0,
        gamma: 0.05,
        method: BandMethod::Gauss,
        process_index: ProcessIndex::One,
        grid_m: 100,
        truncation: 1.0,
        master_seed: 0,
    };
    match name {
        "fig1a" => Some(McConfig { n: 1000, alpha: 0.14, h: 1.0, ..base }),
        "fig1b" => Some(McConfig { n: 5000, alpha: 0.10, h: 1.0, ..base }),
        "fig2a" => Some(McConfig {
            n: 1000,
            alpha: 0.24,
            h: 1.0,
            method: BandMethod::Concentration,
            ..base
        }),
        "fig2b" => Some(McConfig {
            n: 5000,
            alpha: 0.17,
            h: 0.6,
            method: BandMethod::Concentration,
            ..base
        }),
        _ => None,
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one replication's sub-task, derived only from the master seed,
/// the replication index, and a task tag, so replications can run in any
/// order or in parallel without changing results.
fn derive_seed(master: u64, replication: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(master.wrapping_add(tag)).wrapping_add(replication))
}

const TAG_DGP: u64 = 0x01;
const TAG_BAND: u64 = 0x02;

/// Draw an i.i.d. sample from the simulated design with a caller-supplied
/// structural function and noise scale: `Y = structural(Z) + noise_scale · U`.
/// Draws with `|Z| > truncation` or `|W| > truncation` are rejected and
/// redrawn until exactly `n` observations are kept.
pub fn simulate_npiv_dgp_with(
    n: usize,
    truncation: f64,
    seed: u64,
    structural: impl Fn(f64) -> f64,
    noise_scale: f64,
) -> Result<NpivData> {
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }
    if truncation <= 0.0 || !truncation.is_finite() {
        return Err(Error::InvalidBounds { a: -truncation, b: truncation });
    }
    let cov = Matrix3::from_fn(|i, j| DGP_COVARIANCE[i][j]);
    let chol = cov.cholesky().ok_or(Error::NonPsdCovariance)?;
    let l = chol.l();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    while z.len() < n {
        let xi = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let v = l * xi;
        let (zi, wi, ui) = (v[0], v[1], v[2]);
        if zi.abs() <= truncation && wi.abs() <= truncation {
            y.push(structural(zi) + noise_scale * ui);
            z.push(zi);
            w.push(wi);
        }
    }
    NpivData::new(y, z, w)
}

/// Standard design: `Y = φ(Z) + U` with [`true_phi`].
pub fn simulate_npiv_dgp(n: usize, truncation: f64, seed: u64) -> Result<NpivData> {
    simulate_npiv_dgp_with(n, truncation, seed, true_phi, 1.0)
}

struct RepOutcome {
    covered: bool,
    half_width: f64,
    sup_bias: f64,
}

/// Coverage experiment against a caller-supplied structural function. Each
/// replication simulates, fits, and builds a band; coverage records whether
/// the structural function stays inside the band at every grid point.
/// Replications that error are excluded from the averages.
pub fn run_coverage_with<F>(config: &McConfig, structural: F, noise_scale: f64) -> Result<McReport>
where
    F: Fn(f64) -> f64 + Sync,
{
    if config.replications == 0 {
        return Err(Error::TooFewObservations(0));
    }
    if !(config.gamma > 0.0 && config.gamma < 1.0) {
        return Err(Error::InvalidGamma(config.gamma));
    }
    let grid = Grid::uniform(-config.truncation, config.truncation, config.grid_m)?;

    let outcomes: Vec<Result<RepOutcome>> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let dgp_seed = derive_seed(config.master_seed, rep as u64, TAG_DGP);
            let band_seed = derive_seed(config.master_seed, rep as u64, TAG_BAND);
            let data = simulate_npiv_dgp_with(
                config.n,
                config.truncation,
                dgp_seed,
                &structural,
                noise_scale,
            )?;
            let fit = npiv_fit(
                &data,
                config.alpha,
                config.h,
                &grid,
                &grid,
                KernelSpec::Epanechnikov,
            )?;
            let res = npiv_residuals(&fit, config.process_index, KernelSpec::Epanechnikov)?;
            let req = BandRequest {
                method: config.method,
                process: config.process_index,
                gamma: config.gamma,
                c0: 0.0,
                gauss_draws: 2000,
                seed: band_seed,
            };
            let band = build_band(&fit, &res, &req)?;
            let covered = band.covers(&structural);
            let sup_bias = grid
                .points()
                .iter()
                .enumerate()
                .map(|(k, &zk)| (fit.phi_hat.value(k) - structural(zk)).abs())
                .fold(0.0f64, f64::max);
            Ok(RepOutcome { covered, half_width: band.half_width, sup_bias })
        })
        .collect();

    let used: Vec<&RepOutcome> = outcomes.iter().filter_map(|r| r.as_ref().ok()).collect();
    if used.is_empty() {
        return Err(Error::DegenerateSample("every replication failed".into()));
    }
    let m = used.len() as f64;
    Ok(McReport {
        coverage: used.iter().filter(|o| o.covered).count() as f64 / m,
        mean_half_width: used.iter().map(|o| o.half_width).sum::<f64>() / m,
        mean_sup_bias: used.iter().map(|o| o.sup_bias).sum::<f64>() / m,
        replications_used: used.len(),
        config: config.clone(),
    })
}

/// Coverage experiment for the standard design `Y = φ(Z) + U`.
pub fn run_coverage(config: &McConfig) -> Result<McReport> {
    run_coverage_with(config, true_phi, 1.0)
}
