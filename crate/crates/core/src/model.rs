//! The three ill-posed models: instrumental regression with kernel-estimated
//! operator, functional linear/IV regression with sample-moment operator, and
//! density deconvolution with a known operator. Each fit produces the
//! Tikhonov-regularized estimate plus the residual process rows that drive
//! inference.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::inference::ProcessIndex;
use crate::kernel::{kde_joint, kernel_numerator, KernelSpec};
use crate::operator::DiscreteOperator;

/// Observations (Yᵢ, Zᵢ, Wᵢ) for instrumental regression of Y on Z with
/// instrument W.
#[derive(Debug, Clone)]
pub struct NpivData {
    y: Vec<f64>,
    z: Vec<f64>,
    w: Vec<f64>,
}

impl NpivData {
    pub fn new(y: Vec<f64>, z: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if y.len() != z.len() {
            return Err(Error::SampleLengthMismatch(y.len(), z.len()));
        }
        if y.len() != w.len() {
            return Err(Error::SampleLengthMismatch(y.len(), w.len()));
        }
        if y.len() < 2 {
            return Err(Error::TooFewObservations(y.len()));
        }
        if y.iter().chain(&z).chain(&w).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("observations"));
        }
        Ok(NpivData { y, z, w })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }
}

/// Functional regression sample: scalar responses with regressor and
/// instrument curves pre-sampled on uniform grids (row i = observation i).
#[derive(Debug, Clone)]
pub struct FunRegData {
    y: Vec<f64>,
    z_curves: DMatrix<f64>,
    w_curves: DMatrix<f64>,
    grid_t: Grid,
    grid_s: Grid,
}

impl FunRegData {
    pub fn new(
        y: Vec<f64>,
        z_curves: DMatrix<f64>,
        w_curves: DMatrix<f64>,
        grid_t: Grid,
        grid_s: Grid,
    ) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        if z_curves.nrows() != n || w_curves.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} responses but {} regressor rows and {} instrument rows",
                n,
                z_curves.nrows(),
                w_curves.nrows()
            )));
        }
        if z_curves.ncols() != grid_t.len() || w_curves.ncols() != grid_s.len() {
            return Err(Error::DimensionMismatch(
                "curve columns do not match their grids".into(),
            ));
        }
        if y.iter().any(|v| !v.is_finite())
            || z_curves.iter().any(|v| !v.is_finite())
            || w_curves.iter().any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("functional sample"));
        }
        Ok(FunRegData { y, z_curves, w_curves, grid_t, grid_s })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z_curves(&self) -> &DMatrix<f64> {
        &self.z_curves
    }

    pub fn w_curves(&self) -> &DMatrix<f64> {
        &self.w_curves
    }

    pub fn grid_t(&self) -> &Grid {
        &self.grid_t
    }

    pub fn grid_s(&self) -> &Grid {
        &self.grid_s
    }
}

/// Known density of the additive measurement error in the deconvolution
/// model.
#[derive(Debug, Clone)]
pub enum NoiseDensity {
    /// `f(u) = 0.75 (1 − (u/s)²) / s` on `[−s, s]`.
    Epanechnikov { scale: f64 },
    /// Tabulated density with linear interpolation between knots and zero
    /// outside `[u.first, u.last]`.
    Tabulated { u: Vec<f64>, f: Vec<f64> },
}

impl NoiseDensity {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            NoiseDensity::Epanechnikov { scale } => {
                let v = x / scale;
                if v.abs() <= 1.0 {
                    0.75 * (1.0 - v * v) / scale
                } else {
                    0.0
                }
            }
            NoiseDensity::Tabulated { u, f } => {
                if x < u[0] || x > u[u.len() - 1] {
                    return 0.0;
                }
                let hi = u.partition_point(|&p| p < x).min(u.len() - 1).max(1);
                let lo = hi - 1;
                if u[hi] == u[lo] {
                    return f[lo];
                }
                let t = (x - u[lo]) / (u[hi] - u[lo]);
                f[lo] + t * (f[hi] - f[lo])
            }
        }
    }

    /// Support interval of the density.
    pub fn support(&self) -> (f64, f64) {
        match self {
            NoiseDensity::Epanechnikov { scale } => (-scale, *scale),
            NoiseDensity::Tabulated { u, .. } => (u[0], u[u.len() - 1]),
        }
    }

    /// Nonnegativity and unit mass (within 2%, by the trapezoid rule for
    /// tabulated densities).
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseDensity::Epanechnikov { scale } => {
                if *scale <= 0.0 || !scale.is_finite() {
                    return Err(Error::InvalidNoiseDensity(format!(
                        "scale must be positive, got {scale}"
                    )));
                }
            }
            NoiseDensity::Tabulated { u, f } => {
                if u.len() < 2 || u.len() != f.len() {
                    return Err(Error::InvalidNoiseDensity(
                        "need at least two (u, f) knots of equal length".into(),
                    ));
                }
                if u.windows(2).any(|p| p[1] <= p[0]) {
                    return Err(Error::InvalidNoiseDensity(
                        "abscissae must be strictly increasing".into(),
                    ));
                }
                if u.iter().chain(f.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidNoiseDensity("non-finite knot".into()));
                }
                if f.iter().any(|&v| v < 0.0) {
                    return Err(Error::InvalidNoiseDensity("negative density value".into()));
                }
                let mass: f64 = u
                    .windows(2)
                    .zip(f.windows(2))
                    .map(|(uu, ff)| 0.5 * (ff[0] + ff[1]) * (uu[1] - uu[0]))
                    .sum();
                if (mass - 1.0).abs() > 0.02 {
                    return Err(Error::InvalidNoiseDensity(format!(
                        "mass {mass:.4} is not within 2% of 1"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Contaminated observations Yᵢ = Zᵢ + Uᵢ with known noise density.
#[derive(Debug, Clone)]
pub struct DeconvData {
    y: Vec<f64>,
    noise: NoiseDensity,
    grid_z: Grid,
}

impl DeconvData {
    pub fn new(y: Vec<f64>, noise: NoiseDensity, grid_z: Grid) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptySample);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("observations"));
        }
        noise.validate()?;
        Ok(DeconvData { y, noise, grid_z })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn noise(&self) -> &NoiseDensity {
        &self.noise
    }

    pub fn grid_z(&self) -> &Grid {
        &self.grid_z
    }
}

/// A fitted Tikhonov-regularized model.
#[derive(Debug, Clone)]
pub struct Fit {
    /// Regularized estimate on the domain grid.
    pub phi_hat: GridFunction,
    /// Estimated (or known) integral operator.
    pub operator: DiscreteOperator,
    /// Estimated right-hand side of the operator equation.
    pub r_hat: GridFunction,
    /// Plug-in residuals Ûᵢ = Yᵢ − φ̂(Zᵢ); absent for deconvolution.
    pub residuals_u: Option<Vec<f64>>,
    pub alpha: f64,
    /// Kernel bandwidth; absent for models estimated at the parametric rate.
    pub h: Option<f64>,
    /// Scale factor of the first residual process (h⁻¹ for kernel fits, 1
    /// otherwise).
    pub u_n: f64,
    /// Regressor observations retained after truncation (kernel fits only).
    pub z_obs: Vec<f64>,
    /// Instrument observations retained after truncation (kernel fits only).
    pub w_obs: Vec<f64>,
}

/// Row-per-observation evaluation of a residual process on a grid.
#[derive(Debug, Clone)]
pub struct ResidualMatrix {
    values: DMatrix<f64>, // n × m
    grid: Grid,
    process_index: ProcessIndex,
    u_n: f64,
}

impl ResidualMatrix {
    pub fn new(
        values: DMatrix<f64>,
        grid: Grid,
        process_index: ProcessIndex,
        u_n: f64,
    ) -> Result<Self> {
        if values.ncols() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} residual columns on a grid of {} points",
                values.ncols(),
                grid.len()
            )));
        }
        if values.nrows() == 0 {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("residual matrix"));
        }
        if u_n <= 0.0 || !u_n.is_finite() {
            return Err(Error::NonFinite("residual process scale"));
        }
        Ok(ResidualMatrix { values, grid, process_index, u_n })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn process_index(&self) -> ProcessIndex {
        self.process_index
    }

    pub fn u_n(&self) -> f64 {
        self.u_n
    }

    /// Number of observations (rows).
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// The across-observation mean row, as a function on the grid.
    pub fn mean_row(&self) -> GridFunction {
        let n = self.n() as f64;
        let values = (0..self.values.ncols())
            .map(|j| self.values.column(j).sum() / n)
            .collect();
        GridFunction::new(self.grid.clone(), values).expect("rows are finite")
    }
}

/// Fit the instrumental regression: kernel numerator, joint density, operator
/// discretization, and the ridge solve. Observations outside the grid box are
/// dropped before fitting.
pub fn npiv_fit(
    data: &NpivData,
    alpha: f64,
    h: f64,
    grid_z: &Grid,
    grid_w: &Grid,
    spec: KernelSpec,
) -> Result<Fit> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonpositiveAlpha(alpha));
    }
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::NonpositiveBandwidth(h));
    }

    let mut y = Vec::new();
    let mut z = Vec::new();
    let mut w = Vec::new();
    for i in 0..data.len() {
        if grid_z.contains(data.z[i]) && grid_w.contains(data.w[i]) {
            y.push(data.y[i]);
            z.push(data.z[i]);
            w.push(data.w[i]);
        }
    }
    let n = y.len();
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }
    if w.iter().all(|&wi| wi == w[0]) {
        return Err(Error::DegenerateSample(
            "all instrument values identical".into(),
        ));
    }

    let r_hat = kernel_numerator(&y, &w, h, grid_w, spec)?;
    let f_hat = kde_joint(&z, &w, h, grid_z, grid_w, spec)?;
    let operator = DiscreteOperator::from_kernel(&f_hat, grid_z.clone(), grid_w.clone())?;
    let phi_hat = operator.tikhonov_solve(&r_hat, alpha)?;
    let residuals: Vec<f64> = y
        .iter()
        .zip(&z)
        .map(|(&yi, &zi)| yi - phi_hat.interp(zi))
        .collect();

    Ok(Fit {
        phi_hat,
        operator,
        r_hat,
        residuals_u: Some(residuals),
        alpha,
        h: Some(h),
        u_n: 1.0 / h,
        z_obs: z,
        w_obs: w,
    })
}

/// Residual process rows for an instrumental-regression fit.
///
/// Process 1 lives on the instrument grid: `X̂₁ᵢ(w_j) = Ûᵢ h⁻¹ K((Wᵢ − w_j)/h)`.
/// Process 2 lives on the regressor grid: `X̂₂ᵢ(z_k) = f̂(z_k, Wᵢ) Ûᵢ`.
pub fn npiv_residuals(
    fit: &Fit,
    process_index: ProcessIndex,
    spec: KernelSpec,
) -> Result<ResidualMatrix> {
    let h = fit.h.ok_or(Error::MissingBandwidth)?;
    let u_hat = fit
        .residuals_u
        .as_ref()
        .ok_or(Error::MissingBandwidth)?;
    let n = u_hat.len();
    match process_index {
        ProcessIndex::One => {
            let grid_w = fit.operator.grid_w().clone();
            let values = DMatrix::from_fn(n, grid_w.len(), |i, j| {
                u_hat[i] / h * spec.eval((fit.w_obs[i] - grid_w.point(j)) / h)
            });
            ResidualMatrix::new(values, grid_w, ProcessIndex::One, 1.0 / h)
        }
        ProcessIndex::Two => {
            let grid_z = fit.operator.grid_z().clone();
            // f̂(z_k, Wᵢ) = (1/(n h²)) Σ_l K((Z_l − z_k)/h) K((W_l − Wᵢ)/h),
            // assembled as a pair of kernel-profile matrices.
            let a = DMatrix::from_fn(n, grid_z.len(), |l, k| {
                spec.eval((fit.z_obs[l] - grid_z.point(k)) / h)
            });
            let c = DMatrix::from_fn(n, n, |l, i| {
                spec.eval((fit.w_obs[l] - fit.w_obs[i]) / h)
            });
            let density_at_obs = c.transpose() * a / (n as f64 * h * h); // n × m_z
            let values = DMatrix::from_fn(n, grid_z.len(), |i, k| {
                u_hat[i] * density_at_obs[(i, k)]
            });
            ResidualMatrix::new(values, grid_z, ProcessIndex::Two, 1.0)
        }
    }
}

/// Fit the functional regression from sample moments: `r̂(s) = (1/n) Σ Yᵢ Wᵢ(s)`
/// and kernel `k̂(t, s) = (1/n) Σ Zᵢ(t) Wᵢ(s)`.
pub fn funreg_fit(data: &FunRegData, alpha: f64) -> Result<Fit> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonpositiveAlpha(alpha));
    }
    let n = data.len() as f64;
    let y = nalgebra::DVector::from_column_slice(data.y());
    let r_values = data.w_curves.transpose() * &y / n;
    let r_hat = GridFunction::new(data.grid_s.clone(), r_values.data.into())?;
    let k_hat = data.z_curves.transpose() * &data.w_curves / n; // m_t × m_s
    let operator =
        DiscreteOperator::from_kernel(&k_hat, data.grid_t.clone(), data.grid_s.clone())?;
    let phi_hat = operator.tikhonov_solve(&r_hat, alpha)?;

    // Ûᵢ = Yᵢ − Δ_t Σ_k φ̂(t_k) Zᵢ(t_k)
    let fitted = &data.z_curves * nalgebra::DVector::from_column_slice(phi_hat.values())
        * data.grid_t.delta();
    let residuals: Vec<f64> = data
        .y
        .iter()
        .zip(fitted.iter())
        .map(|(&yi, &fi)| yi - fi)
        .collect();

    Ok(Fit {
        phi_hat,
        operator,
        r_hat,
        residuals_u: Some(residuals),
        alpha,
        h: None,
        u_n: 1.0,
        z_obs: Vec::new(),
        w_obs: Vec::new(),
    })
}

/// Residual process rows for a functional-regression fit:
/// `X̂₁ᵢ(s_j) = Ûᵢ Wᵢ(s_j)` on the instrument grid.
pub fn funreg_residuals(fit: &Fit, data: &FunRegData) -> Result<ResidualMatrix> {
    let u_hat = fit.residuals_u.as_ref().ok_or(Error::MissingBandwidth)?;
    if u_hat.len() != data.len() {
        return Err(Error::SampleLengthMismatch(u_hat.len(), data.len()));
    }
    let values = DMatrix::from_fn(data.len(), data.grid_s.len(), |i, j| {
        u_hat[i] * data.w_curves[(i, j)]
    });
    ResidualMatrix::new(values, data.grid_s.clone(), ProcessIndex::One, 1.0)
}

/// Fit the deconvolution model. The operator is known from the noise density
/// (kernel `f(y − z)` on the grid pair), and the only estimated component is
/// `s(z) = (1/n) Σ f(Yᵢ − z)`, the empirical image of the data density under
/// the adjoint.
pub fn deconv_fit(data: &DeconvData, alpha: f64) -> Result<Fit> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonpositiveAlpha(alpha));
    }
    let grid = data.grid_z.clone();
    let kernel = DMatrix::from_fn(grid.len(), grid.len(), |k, j| {
        data.noise.eval(grid.point(j) - grid.point(k))
    });
    let operator = DiscreteOperator::from_kernel(&kernel, grid.clone(), grid.clone())?;

    let n = data.len() as f64;
    let s_values: Vec<f64> = grid
        .points()
        .iter()
        .map(|&z| data.y.iter().map(|&yi| data.noise.eval(yi - z)).sum::<f64>() / n)
        .collect();
    let r_hat = GridFunction::new(grid.clone(), s_values)?;
    let phi_hat = operator.resolvent_apply(&r_hat, alpha)?;

    Ok(Fit {
        phi_hat,
        operator,
        r_hat,
        residuals_u: None,
        alpha,
        h: None,
        u_n: 1.0,
        z_obs: Vec::new(),
        w_obs: Vec::new(),
    })
}

/// Residual process rows for deconvolution: `X̂₂ᵢ(z_k) = f(Yᵢ − z_k)`.
pub fn deconv_residuals(data: &DeconvData) -> Result<ResidualMatrix> {
    let grid = data.grid_z.clone();
    let values = DMatrix::from_fn(data.len(), grid.len(), |i, k| {
        data.noise.eval(data.y[i] - grid.point(k))
    });
    ResidualMatrix::new(values, grid, ProcessIndex::Two, 1.0)
}
