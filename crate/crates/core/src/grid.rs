//! Evaluation grids, midpoint quadrature, and the norms used everywhere else.
//!
//! Functions are discretized on equidistant midpoint grids: `m` points
//! `a + (k − 1/2)Δ` with `Δ = (b − a)/m`, so every Riemann sum carries the
//! uniform weight `Δ` and no grid point sits on the interval boundary.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Equidistant midpoint grid on a compact interval `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    points: Vec<f64>,
    delta: f64,
}

impl Grid {
    /// Midpoint grid with `m` points on `[a, b]`.
    pub fn uniform(a: f64, b: f64, m: usize) -> Result<Self> {
        if a >= b || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidBounds { a, b });
        }
        if m < 2 {
            return Err(Error::InvalidGridSize(m));
        }
        let delta = (b - a) / m as f64;
        let points = (0..m).map(|k| a + (k as f64 + 0.5) * delta).collect();
        Ok(Grid { a, b, points, delta })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // m >= 2 by construction
    }

    /// Quadrature step Δ = (b − a)/m.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, k: usize) -> f64 {
        self.points[k]
    }

    /// True when `x` lies inside the closed interval `[a, b]`.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }
}

/// Real values of a function sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values on a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid function values"));
        }
        Ok(GridFunction { grid, values })
    }

    /// Sample `f` at every grid point, in grid order.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        GridFunction::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Discrete supremum norm `max_k |f(x_k)|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Riemann L2 norm `√(Δ Σ_k f(x_k)²)`.
    pub fn l2_norm(&self) -> f64 {
        let sum_sq: f64 = self.values.iter().map(|v| v * v).sum();
        (self.grid.delta() * sum_sq).sqrt()
    }

    /// Linear interpolation between neighbouring grid points, constant
    /// extrapolation beyond the first and last midpoints.
    pub fn interp(&self, x: f64) -> f64 {
        let pts = self.grid.points();
        let m = pts.len();
        if x <= pts[0] {
            return self.values[0];
        }
        if x >= pts[m - 1] {
            return self.values[m - 1];
        }
        // pts is strictly increasing; find the cell containing x.
        let hi = pts.partition_point(|&p| p < x);
        let lo = hi - 1;
        let t = (x - pts[lo]) / (pts[hi] - pts[lo]);
        self.values[lo] + t * (self.values[hi] - self.values[lo])
    }

    /// Pointwise shift by a constant.
    pub fn shifted(&self, c: f64) -> GridFunction {
        let values = self.values.iter().map(|v| v + c).collect();
        GridFunction { grid: self.grid.clone(), values }
    }
}

/// Mixed (2, ∞) norm of a kernel sampled on a grid pair:
/// `sup_z (∫ |k(z, w)|² dw)^{1/2}`, discretized with the midpoint rule over
/// `grid_w`. Rows of `kernel_values` index `z`, columns index `w`. For an
/// integral operator with kernel `k` this equals the operator norm of its
/// adjoint from L2 to the space of continuous functions.
pub fn mixed_norm_2inf(kernel_values: &DMatrix<f64>, grid_w: &Grid) -> Result<f64> {
    if kernel_values.ncols() != grid_w.len() {
        return Err(Error::DimensionMismatch(format!(
            "kernel has {} columns but grid_w has {} points",
            kernel_values.ncols(),
            grid_w.len()
        )));
    }
    let delta_w = grid_w.delta();
    let mut best = 0.0f64;
    for row in kernel_values.row_iter() {
        let sum_sq: f64 = row.iter().map(|v| v * v).sum();
        best = best.max((delta_w * sum_sq).sqrt());
    }
    Ok(best)
}
