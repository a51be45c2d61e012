//! Smoothing kernels, the joint kernel density estimator, and the kernel
//! regression numerator.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Smoothing kernel family. Only the second-order Epanechnikov kernel is
/// shipped; the enum leaves room for others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelSpec {
    /// K(u) = 0.75 (1 − u²) on [−1, 1], zero outside.
    #[default]
    Epanechnikov,
}

impl KernelSpec {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            KernelSpec::Epanechnikov => {
                if u.abs() <= 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
        }
    }

    /// Half-width of the kernel support.
    pub fn support_radius(self) -> f64 {
        match self {
            KernelSpec::Epanechnikov => 1.0,
        }
    }
}

fn check_sample(sample: &[f64], other: &[f64], h: f64) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if sample.len() != other.len() {
        return Err(Error::SampleLengthMismatch(sample.len(), other.len()));
    }
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::NonpositiveBandwidth(h));
    }
    Ok(())
}

/// Joint product-kernel density estimate on a grid pair:
/// `f̂(z_k, w_j) = (1/(n h²)) Σ_i K((Z_i − z_k)/h) K((W_i − w_j)/h)`.
///
/// Rows index `grid_z`, columns index `grid_w`. The per-entry summation order
/// over observations is fixed, so the result does not depend on scheduling.
pub fn kde_joint(
    z_sample: &[f64],
    w_sample: &[f64],
    h: f64,
    grid_z: &Grid,
    grid_w: &Grid,
    spec: KernelSpec,
) -> Result<DMatrix<f64>> {
    check_sample(z_sample, w_sample, h)?;
    let n = z_sample.len();
    // Factorized form: entry (k, j) is the i-ordered dot product of the
    // kernel profiles in z and w.
    let a = DMatrix::from_fn(n, grid_z.len(), |i, k| {
        spec.eval((z_sample[i] - grid_z.point(k)) / h)
    });
    let b = DMatrix::from_fn(n, grid_w.len(), |i, j| {
        spec.eval((w_sample[i] - grid_w.point(j)) / h)
    });
    Ok(a.transpose() * b / (n as f64 * h * h))
}

/// Kernel regression numerator `r̂(w_j) = (1/(n h)) Σ_i Y_i K((W_i − w_j)/h)`.
pub fn kernel_numerator(
    y_sample: &[f64],
    w_sample: &[f64],
    h: f64,
    grid_w: &Grid,
    spec: KernelSpec,
) -> Result<GridFunction> {
    check_sample(y_sample, w_sample, h)?;
    let n = y_sample.len() as f64;
    let values: Vec<f64> = grid_w
        .points()
        .iter()
        .map(|&w| {
            let sum: f64 = y_sample
                .iter()
                .zip(w_sample)
                .map(|(&y, &wi)| y * spec.eval((wi - w) / h))
                .sum();
            sum / (n * h)
        })
        .collect();
    GridFunction::new(grid_w.clone(), values)
}
