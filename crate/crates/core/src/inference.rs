//! Uniform confidence bands for Tikhonov-regularized estimators.
//!
//! Two constructions are provided. The Gaussian route simulates paths of a
//! centered Gaussian process with the estimated residual covariance and turns
//! a norm quantile into a band half-width through a normalized upper bound on
//! the estimator's variance term. The concentration route bounds the same
//! supremum with a data-driven Talagrand-type inequality built from one
//! Rademacher-symmetrized realization and an envelope estimate. A
//! Dvoretzky–Kiefer–Wolfowitz band for the empirical CDF is included as the
//! elementary instance of the same idea.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::model::{Fit, ResidualMatrix};
use crate::operator::DiscreteOperator;

/// Which of the two variance processes a residual matrix (or band) refers to.
/// Process 1 lives on the instrument grid and is mapped through the adjoint;
/// process 2 lives on the regressor grid and is mapped through the resolvent
/// alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessIndex {
    One,
    Two,
}

impl ProcessIndex {
    pub fn as_u8(self) -> u8 {
        match self {
            ProcessIndex::One => 1,
            ProcessIndex::Two => 2,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            1 => Some(ProcessIndex::One),
            2 => Some(ProcessIndex::Two),
            _ => None,
        }
    }
}

impl Serialize for ProcessIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for ProcessIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        ProcessIndex::from_u8(v)
            .ok_or_else(|| serde::de::Error::custom(format!("process index must be 1 or 2, got {v}")))
    }
}

/// Band construction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandMethod {
    Gauss,
    Concentration,
}

/// Norm whose quantile is simulated for Gaussian paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathNorm {
    /// Squared L2 norm with quadrature weight: `Δ Σ_j G(x_j)²`.
    L2Squared,
    /// Supremum norm `max_j |G(x_j)|`.
    Sup,
}

/// Norm applied to residual rows when estimating the envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowNorm {
    L2,
    Sup,
}

/// Parameters of a single band construction.
#[derive(Debug, Clone)]
pub struct BandRequest {
    pub method: BandMethod,
    pub process: ProcessIndex,
    /// Miscoverage level; the band targets coverage 1 − γ.
    pub gamma: f64,
    /// Additive slack constant in the half-width numerators.
    pub c0: f64,
    /// Number of simulated Gaussian paths (Gaussian method only).
    pub gauss_draws: usize,
    pub seed: u64,
}

impl BandRequest {
    pub fn new(method: BandMethod, process: ProcessIndex) -> Self {
        BandRequest { method, process, gamma: 0.05, c0: 0.0, gauss_draws: 2000, seed: 0 }
    }
}

/// Scalars recorded while building a band.
#[derive(Debug, Clone)]
pub struct BandDiagnostics {
    /// Mixed (2, ∞) norm of the estimated operator kernel.
    pub norm_2inf: f64,
    /// Envelope estimate (concentration method).
    pub envelope: Option<f64>,
    /// Supremum of the symmetrized process (concentration method).
    pub sym_supremum: Option<f64>,
    /// Simulated norm quantile (Gaussian method).
    pub gauss_quantile: Option<f64>,
    /// Number of observations behind the band.
    pub n: usize,
    /// Regularization parameter of the underlying fit.
    pub alpha: f64,
    /// Bandwidth of the underlying fit, when it has one.
    pub h: Option<f64>,
}

/// A uniform band `[estimate − q, estimate + q]` on the estimate's grid.
#[derive(Debug, Clone)]
pub struct ConfidenceBand {
    pub estimate: GridFunction,
    pub half_width: f64,
    pub lower: GridFunction,
    pub upper: GridFunction,
    pub request: BandRequest,
    pub diagnostics: BandDiagnostics,
}

impl ConfidenceBand {
    /// True when `f(x_k)` lies inside the band at every grid point.
    pub fn covers(&self, f: impl Fn(f64) -> f64) -> bool {
        self.estimate
            .grid()
            .points()
            .iter()
            .enumerate()
            .all(|(k, &x)| {
                let v = f(x);
                v >= self.lower.value(k) && v <= self.upper.value(k)
            })
    }
}

/// Empirical-CDF band from the Dvoretzky–Kiefer–Wolfowitz inequality.
#[derive(Debug, Clone)]
pub struct EcdfBand {
    pub estimate: GridFunction,
    pub half_width: f64,
    pub lower: GridFunction,
    pub upper: GridFunction,
    pub gamma: f64,
    pub n: usize,
}

/// Estimated covariance of residual rows with its degeneracy flag.
#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    pub matrix: DMatrix<f64>,
    /// Set when every residual row is identically zero.
    pub degenerate: bool,
}

/// Uncentered covariance of the rows, `Σ̂(x_j, x_l) = (1/n) Σ_i X̂ᵢ(x_j) X̂ᵢ(x_l)`,
/// projected onto the positive semidefinite cone by clipping negative
/// eigenvalues at zero.
pub fn estimate_covariance(res: &ResidualMatrix) -> CovarianceEstimate {
    let x = res.values();
    let n = x.nrows() as f64;
    let degenerate = x.amax() == 0.0;
    let raw = x.transpose() * x / n;
    let sym = (&raw + raw.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let clipped = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| l.max(0.0)),
    );
    let projected =
        &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    // Recomposition is symmetric only up to rounding; average with the
    // transpose so the output is symmetric bit-for-bit.
    let matrix = (&projected + projected.transpose()) * 0.5;
    CovarianceEstimate { matrix, degenerate }
}

/// Empirical 1 − γ quantile of a path norm over simulated Gaussian paths
/// `G = L ξ`, with `L` from the eigendecomposition of `cov` (negative
/// eigenvalues clipped at zero) and `ξ` standard normal.
///
/// Draw `d` derives its randomness from `(seed, d)`, so the result does not
/// depend on how draws are scheduled. `delta` is the quadrature weight used
/// by [`PathNorm::L2Squared`]; it is ignored for the supremum norm.
pub fn gaussian_quantile(
    cov: &DMatrix<f64>,
    delta: f64,
    norm: PathNorm,
    gamma: f64,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    if cov.nrows() != cov.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}×{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    if draws < 100 {
        return Err(Error::TooFewDraws(draws));
    }

    let sym = (cov + cov.transpose()) * 0.5;
    let m = sym.nrows();
    let eig = sym.symmetric_eigen();
    let max_abs = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min_eig = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    if min_eig < -1e-8 * max_abs.max(1.0) {
        return Err(Error::NotPositiveSemidefinite(min_eig));
    }
    let scale = DVector::from_iterator(m, eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()));
    let factor = {
        let mut f = eig.eigenvectors.clone();
        for (j, mut col) in f.column_iter_mut().enumerate() {
            col *= scale[j];
        }
        f
    };

    let mut stats: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(d as u64);
            let xi = DVector::from_iterator(m, (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let path = &factor * xi;
            match norm {
                PathNorm::L2Squared => delta * path.iter().map(|v| v * v).sum::<f64>(),
                PathNorm::Sup => path.iter().fold(0.0f64, |a, v| a.max(v.abs())),
            }
        })
        .collect();
    stats.sort_unstable_by(f64::total_cmp);
    let k = (((1.0 - gamma) * draws as f64).ceil() as usize).clamp(1, draws);
    Ok(stats[k - 1])
}

/// Supremum of one Rademacher-symmetrized realization of the variance
/// process: signs ε are drawn from `seed`, the sign-averaged row
/// `g = (1/n) Σ_i ε_i X̂ᵢ` is formed on the residual grid, and the resolvent
/// (process 2) or the ridge solve through the adjoint (process 1) is applied
/// before taking the sup norm.
pub fn symmetrized_supremum(
    res: &ResidualMatrix,
    op: &DiscreteOperator,
    alpha: f64,
    seed: u64,
) -> Result<f64> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonpositiveAlpha(alpha));
    }
    let expected_grid = match res.process_index() {
        ProcessIndex::One => op.grid_w(),
        ProcessIndex::Two => op.grid_z(),
    };
    if res.grid() != expected_grid {
        return Err(Error::DimensionMismatch(
            "residual grid does not match the operator grid for this process".into(),
        ));
    }

    let n = res.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signs: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();

    let x = res.values();
    let values: Vec<f64> = (0..x.ncols())
        .map(|j| {
            (0..n).map(|i| signs[i] * x[(i, j)]).sum::<f64>() / n as f64
        })
        .collect();
    let g = GridFunction::new(res.grid().clone(), values)?;
    let image = match res.process_index() {
        ProcessIndex::One => op.tikhonov_solve(&g, alpha)?,
        ProcessIndex::Two => op.resolvent_apply(&g, alpha)?,
    };
    Ok(image.sup_norm())
}

/// Envelope estimate: the largest row norm, with rows first divided by the
/// recorded process scale so the envelope refers to the unscaled process.
pub fn envelope_estimate(res: &ResidualMatrix, norm: RowNorm) -> f64 {
    let x = res.values();
    let u_n = res.u_n();
    let delta = res.grid().delta();
    (0..x.nrows())
        .map(|i| {
            let row = x.row(i);
            match norm {
                RowNorm::Sup => row.iter().fold(0.0f64, |a, v| a.max((v / u_n).abs())),
                RowNorm::L2 => {
                    let s: f64 = row.iter().map(|v| (v / u_n) * (v / u_n)).sum();
                    (delta * s).sqrt()
                }
            }
        })
        .fold(0.0f64, f64::max)
}

/// Gaussian-method half-width for a given norm quantile `c`:
///
/// process 1: `(√c ‖T̂*‖₂,∞ + c₀) / (α √n)`
/// process 2: `(c (‖T̂*‖₂,∞/2 + √α) + c₀) / (α^{3/2} √n)`
pub fn gauss_half_width(
    process: ProcessIndex,
    c: f64,
    norm_2inf: f64,
    alpha: f64,
    n: usize,
    c0: f64,
) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    match process {
        ProcessIndex::One => (c.sqrt() * norm_2inf + c0) / (alpha * sqrt_n),
        ProcessIndex::Two => {
            (c * (norm_2inf / 2.0 + alpha.sqrt()) + c0) / (alpha.powf(1.5) * sqrt_n)
        }
    }
}

/// Concentration-method half-width from the symmetrized supremum and the
/// envelope estimate:
///
/// process 1: `2‖ν̂ᵉ‖∞ + (3 ‖T̂*‖₂,∞ F̂₁ √(2 log(2/γ)) + c₀) u_n / (α √n)`
/// process 2: `2‖ν̂ᵉ‖∞ + (3 (‖T̂*‖₂,∞/2 + √α) F̂₂ √(2 log(2/γ)) + c₀) / (α^{3/2} √n)`
#[allow(clippy::too_many_arguments)]
pub fn concentration_half_width(
    process: ProcessIndex,
    sym_supremum: f64,
    envelope: f64,
    norm_2inf: f64,
    alpha: f64,
    n: usize,
    gamma: f64,
    u_n: f64,
    c0: f64,
) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let tail = (2.0 * (2.0 / gamma).ln()).sqrt();
    match process {
        ProcessIndex::One => {
            2.0 * sym_supremum + (3.0 * norm_2inf * envelope * tail + c0) * u_n / (alpha * sqrt_n)
        }
        ProcessIndex::Two => {
            2.0 * sym_supremum
                + (3.0 * (norm_2inf / 2.0 + alpha.sqrt()) * envelope * tail + c0)
                    / (alpha.powf(1.5) * sqrt_n)
        }
    }
}

/// Build a uniform confidence band around a fitted estimate from its
/// residual process rows.
///
/// For the Gaussian method with process 1 the quantile is taken for the
/// squared Euclidean norm of the grid-sampled path (unit quadrature weight);
/// with process 2 it is the path supremum. The concentration method uses one
/// symmetrized realization seeded by the request plus the envelope estimate
/// at the row norm matching the process (L2 for process 1, sup for
/// process 2).
pub fn build_band(fit: &Fit, res: &ResidualMatrix, req: &BandRequest) -> Result<ConfidenceBand> {
    if !(req.gamma > 0.0 && req.gamma < 1.0) {
        return Err(Error::InvalidGamma(req.gamma));
    }
    if req.process != res.process_index() {
        return Err(Error::ProcessMismatch {
            requested: req.process,
            found: res.process_index(),
        });
    }
    let n = res.n();
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }

    let norm_2inf = fit.operator.norm_2inf();
    let mut diagnostics = BandDiagnostics {
        norm_2inf,
        envelope: None,
        sym_supremum: None,
        gauss_quantile: None,
        n,
        alpha: fit.alpha,
        h: fit.h,
    };

    let half_width = match req.method {
        BandMethod::Gauss => {
            let cov = estimate_covariance(res);
            let norm = match req.process {
                ProcessIndex::One => PathNorm::L2Squared,
                ProcessIndex::Two => PathNorm::Sup,
            };
            let c = gaussian_quantile(&cov.matrix, 1.0, norm, req.gamma, req.gauss_draws, req.seed)?;
            diagnostics.gauss_quantile = Some(c);
            gauss_half_width(req.process, c, norm_2inf, fit.alpha, n, req.c0)
        }
        BandMethod::Concentration => {
            let sym = symmetrized_supremum(res, &fit.operator, fit.alpha, req.seed)?;
            let row_norm = match req.process {
                ProcessIndex::One => RowNorm::L2,
                ProcessIndex::Two => RowNorm::Sup,
            };
            let env = envelope_estimate(res, row_norm);
            diagnostics.sym_supremum = Some(sym);
            diagnostics.envelope = Some(env);
            if env == 0.0 {
                return Err(Error::DegenerateResiduals);
            }
            concentration_half_width(
                req.process,
                sym,
                env,
                norm_2inf,
                fit.alpha,
                n,
                req.gamma,
                res.u_n(),
                req.c0,
            )
        }
    };

    if half_width <= 0.0 || !half_width.is_finite() {
        return Err(Error::DegenerateResiduals);
    }

    Ok(ConfidenceBand {
        estimate: fit.phi_hat.clone(),
        half_width,
        lower: fit.phi_hat.shifted(-half_width),
        upper: fit.phi_hat.shifted(half_width),
        request: req.clone(),
        diagnostics,
    })
}

/// Dvoretzky–Kiefer–Wolfowitz band around the empirical CDF evaluated on a
/// grid: `F_n(x) ± √(log(2/γ) / (2n))`.
pub fn dkw_band(sample: &[f64], gamma: f64, grid: &Grid) -> Result<EcdfBand> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sample"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    let n = sample.len();
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let values: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| sorted.partition_point(|&s| s <= x) as f64 / n as f64)
        .collect();
    let estimate = GridFunction::new(grid.clone(), values)?;
    let half_width = ((2.0 / gamma).ln() / (2.0 * n as f64)).sqrt();
    Ok(EcdfBand {
        lower: estimate.shifted(-half_width),
        upper: estimate.shifted(half_width),
        estimate,
        half_width,
        gamma,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::model::{npiv_fit, npiv_residuals, NpivData};
    use nalgebra::DMatrix;

    fn toy_fit_and_res(process: ProcessIndex) -> (Fit, ResidualMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 60;
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.9..0.9)).collect();
        let w: Vec<f64> = z
            .iter()
            .map(|&zi| 0.6 * zi + 0.4 * rng.gen_range(-0.9..0.9f64))
            .collect();
        let y: Vec<f64> = z
            .iter()
            .map(|&zi| (-zi * zi / 0.8).exp() + 0.2 * rng.gen_range(-1.0..1.0f64))
            .collect();
        let data = NpivData::new(y, z, w).unwrap();
        let g = Grid::uniform(-1.0, 1.0, 20).unwrap();
        let fit = npiv_fit(&data, 0.15, 0.8, &g, &g, KernelSpec::Epanechnikov).unwrap();
        let res = npiv_residuals(&fit, process, KernelSpec::Epanechnikov).unwrap();
        (fit, res)
    }

    #[test]
    fn covariance_outer_product_cases() {
        // A single row gives its outer product.
        let g = Grid::uniform(0.0, 1.0, 3).unwrap();
        let row = DMatrix::from_row_slice(1, 3, &[1.0, -2.0, 0.5]);
        let res = ResidualMatrix::new(row.clone(), g.clone(), ProcessIndex::Two, 1.0).unwrap();
        let cov = estimate_covariance(&res);
        let want = row.transpose() * row;
        assert!((&cov.matrix - &want).abs().max() < 1e-12);

        // Alternating ±v rows average to v vᵀ.
        let v = [0.3, 1.2, -0.7];
        let mut x = DMatrix::zeros(6, 3);
        for i in 0..6 {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            for j in 0..3 {
                x[(i, j)] = s * v[j];
            }
        }
        let res = ResidualMatrix::new(x, g, ProcessIndex::Two, 1.0).unwrap();
        let cov = estimate_covariance(&res);
        for a in 0..3 {
            for b in 0..3 {
                assert!((cov.matrix[(a, b)] - v[a] * v[b]).abs() < 1e-12);
            }
        }
        assert!(!cov.degenerate);
    }

    #[test]
    fn covariance_is_symmetric_psd_and_flags_zero() {
        let (_, res) = toy_fit_and_res(ProcessIndex::One);
        let cov = estimate_covariance(&res);
        assert!((&cov.matrix - cov.matrix.transpose()).abs().max() == 0.0);
        let min_eig = cov
            .matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &v| a.min(v));
        assert!(min_eig >= -1e-12);

        let g = Grid::uniform(0.0, 1.0, 4).unwrap();
        let zero = ResidualMatrix::new(DMatrix::zeros(3, 4), g, ProcessIndex::Two, 1.0).unwrap();
        let cov0 = estimate_covariance(&zero);
        assert!(cov0.degenerate);
        assert_eq!(cov0.matrix.abs().max(), 0.0);
    }

    #[test]
    fn gaussian_quantile_zero_covariance() {
        let cov = DMatrix::zeros(5, 5);
        for norm in [PathNorm::L2Squared, PathNorm::Sup] {
            let q = gaussian_quantile(&cov, 0.2, norm, 0.05, 200, 1).unwrap();
            assert_eq!(q, 0.0);
        }
    }

    #[test]
    fn gaussian_quantile_is_deterministic_and_monotone_in_gamma() {
        let cov = DMatrix::identity(6, 6);
        let a = gaussian_quantile(&cov, 0.1, PathNorm::Sup, 0.05, 500, 9).unwrap();
        let b = gaussian_quantile(&cov, 0.1, PathNorm::Sup, 0.05, 500, 9).unwrap();
        assert_eq!(a, b);
        let tight = gaussian_quantile(&cov, 0.1, PathNorm::Sup, 0.01, 500, 9).unwrap();
        let loose = gaussian_quantile(&cov, 0.1, PathNorm::Sup, 0.10, 500, 9).unwrap();
        assert!(tight >= a && a >= loose);
    }

    #[test]
    fn gaussian_quantile_input_checks() {
        let cov = DMatrix::identity(3, 3);
        assert!(matches!(
            gaussian_quantile(&cov, 1.0, PathNorm::Sup, 0.05, 50, 0),
            Err(Error::TooFewDraws(50))
        ));
        assert!(matches!(
            gaussian_quantile(&cov, 1.0, PathNorm::Sup, 1.5, 200, 0),
            Err(Error::InvalidGamma(_))
        ));
        let indef = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, -0.5, 2.0]));
        assert!(matches!(
            gaussian_quantile(&indef, 1.0, PathNorm::Sup, 0.05, 200, 0),
            Err(Error::NotPositiveSemidefinite(_))
        ));
    }

    #[test]
    fn symmetrized_supremum_zero_rows() {
        let (fit, res) = toy_fit_and_res(ProcessIndex::Two);
        let zero = ResidualMatrix::new(
            DMatrix::zeros(res.n(), res.grid().len()),
            res.grid().clone(),
            ProcessIndex::Two,
            1.0,
        )
        .unwrap();
        let s = symmetrized_supremum(&zero, &fit.operator, fit.alpha, 3).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn symmetrized_supremum_single_row_matches_direct_image() {
        // With one observation the statistic is the resolvent image of ±X̂₁,
        // and the sign cancels under the sup norm.
        let (fit, res) = toy_fit_and_res(ProcessIndex::Two);
        let first = DMatrix::from_fn(1, res.grid().len(), |_, j| res.values()[(0, j)]);
        let single =
            ResidualMatrix::new(first.clone(), res.grid().clone(), ProcessIndex::Two, 1.0).unwrap();
        let s = symmetrized_supremum(&single, &fit.operator, fit.alpha, 0).unwrap();
        let g = GridFunction::new(
            res.grid().clone(),
            first.row(0).iter().copied().collect::<Vec<f64>>(),
        )
        .unwrap();
        let want = fit.operator.resolvent_apply(&g, fit.alpha).unwrap().sup_norm();
        assert!((s - want).abs() < 1e-12);
    }

    #[test]
    fn envelope_cases() {
        let g = Grid::uniform(0.0, 1.0, 4).unwrap();
        let zero = ResidualMatrix::new(DMatrix::zeros(3, 4), g.clone(), ProcessIndex::Two, 1.0)
            .unwrap();
        assert_eq!(envelope_estimate(&zero, RowNorm::Sup), 0.0);

        let mut x = DMatrix::zeros(2, 4);
        for j in 0..4 {
            x[(1, j)] = 2.0;
        }
        let res = ResidualMatrix::new(x.clone(), g.clone(), ProcessIndex::Two, 1.0).unwrap();
        assert_eq!(envelope_estimate(&res, RowNorm::Sup), 2.0);
        assert!((envelope_estimate(&res, RowNorm::L2) - 2.0).abs() < 1e-12);

        // Scaling rows by u_n with u_n recorded leaves the envelope unchanged.
        let scaled = ResidualMatrix::new(x * 10.0, g, ProcessIndex::One, 10.0).unwrap();
        assert!((envelope_estimate(&scaled, RowNorm::L2) - 2.0).abs() < 1e-12);
        assert!((envelope_estimate(&scaled, RowNorm::Sup) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn half_width_formula_arithmetic() {
        // Gaussian, process 1: c = 4, norm = 1, α = 0.1, n = 100.
        let q = gauss_half_width(ProcessIndex::One, 4.0, 1.0, 0.1, 100, 0.0);
        assert!((q - 2.0).abs() < 1e-12);
        // Concentration, process 1 with the worked constants.
        let q = concentration_half_width(
            ProcessIndex::One,
            0.05,
            0.5,
            1.0,
            0.1,
            100,
            0.05,
            1.0,
            0.0,
        );
        assert!((q - 4.174305).abs() < 1e-4, "q = {q}");
    }

    #[test]
    fn band_geometry_and_method_diagnostics() {
        let (fit, res) = toy_fit_and_res(ProcessIndex::One);
        for method in [BandMethod::Gauss, BandMethod::Concentration] {
            let req = BandRequest {
                method,
                ..BandRequest::new(method, ProcessIndex::One)
            };
            let band = build_band(&fit, &res, &req).unwrap();
            assert!(band.half_width > 0.0);
            for k in 0..band.estimate.grid().len() {
                let gap = band.upper.value(k) - band.lower.value(k);
                assert!((gap - 2.0 * band.half_width).abs() < 1e-12);
                let mid = 0.5 * (band.upper.value(k) + band.lower.value(k));
                assert!((mid - band.estimate.value(k)).abs() < 1e-12);
            }
            match method {
                BandMethod::Gauss => assert!(band.diagnostics.gauss_quantile.is_some()),
                BandMethod::Concentration => {
                    assert!(band.diagnostics.envelope.is_some());
                    assert!(band.diagnostics.sym_supremum.is_some());
                }
            }
        }
    }

    #[test]
    fn band_half_width_monotone_in_gamma() {
        for process in [ProcessIndex::One, ProcessIndex::Two] {
            let (fit, res) = toy_fit_and_res(process);
            for method in [BandMethod::Gauss, BandMethod::Concentration] {
                let width = |gamma: f64| {
                    let req = BandRequest {
                        gamma,
                        seed: 5,
                        ..BandRequest::new(method, process)
                    };
                    build_band(&fit, &res, &req).unwrap().half_width
                };
                let w1 = width(0.01);
                let w5 = width(0.05);
                let w10 = width(0.10);
                assert!(w1 >= w5 && w5 >= w10, "{method:?}/{process:?}: {w1} {w5} {w10}");
            }
        }
    }

    #[test]
    fn band_rejects_degenerate_and_mismatched_input() {
        let (fit, res) = toy_fit_and_res(ProcessIndex::Two);
        let zero = ResidualMatrix::new(
            DMatrix::zeros(res.n(), res.grid().len()),
            res.grid().clone(),
            ProcessIndex::Two,
            1.0,
        )
        .unwrap();
        let req = BandRequest::new(BandMethod::Concentration, ProcessIndex::Two);
        assert!(matches!(
            build_band(&fit, &zero, &req),
            Err(Error::DegenerateResiduals)
        ));
        let req_wrong = BandRequest::new(BandMethod::Gauss, ProcessIndex::One);
        assert!(matches!(
            build_band(&fit, &res, &req_wrong),
            Err(Error::ProcessMismatch { .. })
        ));
        let req_bad_gamma = BandRequest {
            gamma: 0.0,
            ..BandRequest::new(BandMethod::Gauss, ProcessIndex::Two)
        };
        assert!(matches!(
            build_band(&fit, &res, &req_bad_gamma),
            Err(Error::InvalidGamma(_))
        ));
    }

    #[test]
    fn dkw_half_width_values() {
        let g = Grid::uniform(0.0, 1.0, 10).unwrap();
        let sample: Vec<f64> = (0..5000).map(|i| i as f64 / 5000.0).collect();
        let band = dkw_band(&sample, 0.05, &g).unwrap();
        assert!((band.half_width - 0.019207).abs() < 1e-6);

        let two = dkw_band(&[0.1, 0.9], 0.05, &g).unwrap();
        assert!((two.half_width - 0.9603).abs() < 1e-4);

        // γ = 2/e makes log(2/γ) = 1.
        let gamma = 2.0 / std::f64::consts::E;
        let band = dkw_band(&sample, gamma, &g).unwrap();
        assert!((band.half_width - (1.0 / 10000.0f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dkw_ecdf_values() {
        let g = Grid::uniform(0.0, 1.0, 4).unwrap(); // 0.125, 0.375, 0.625, 0.875
        let band = dkw_band(&[0.2, 0.4, 0.6, 0.8], 0.1, &g).unwrap();
        assert_eq!(band.estimate.values(), &[0.0, 0.25, 0.75, 1.0]);
        assert!(matches!(dkw_band(&[], 0.1, &g), Err(Error::EmptySample)));
        assert!(matches!(
            dkw_band(&[0.1], 1.0, &g),
            Err(Error::InvalidGamma(_))
        ));
    }
}
