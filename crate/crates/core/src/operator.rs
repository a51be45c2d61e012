//! Discrete integral operators and the Tikhonov-regularized solver.
//!
//! An integral operator `(Tφ)(w) = ∫ k(z, w) φ(z) dz` is discretized with
//! the midpoint rule as the matrix `K[j, k] = k(z_k, w_j) Δ_z`, so that
//! `(Tφ)(w_j) = Σ_k K[j, k] φ(z_k)`. The transpose then plays the role of
//! the adjoint.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Matrix form of an integral operator between two grids.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    matrix: DMatrix<f64>, // m_w × m_z, quadrature weight folded in
    grid_z: Grid,
    grid_w: Grid,
}

impl DiscreteOperator {
    /// Build the operator from kernel values sampled as `kernel[k, j] = k(z_k, w_j)`
    /// (rows index `grid_z`, columns index `grid_w`).
    pub fn from_kernel(kernel_values: &DMatrix<f64>, grid_z: Grid, grid_w: Grid) -> Result<Self> {
        if kernel_values.nrows() != grid_z.len() || kernel_values.ncols() != grid_w.len() {
            return Err(Error::DimensionMismatch(format!(
                "kernel is {}×{} but grids are {}×{}",
                kernel_values.nrows(),
                kernel_values.ncols(),
                grid_z.len(),
                grid_w.len()
            )));
        }
        if kernel_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel values"));
        }
        let matrix = kernel_values.transpose() * grid_z.delta();
        Ok(DiscreteOperator { matrix, grid_z, grid_w })
    }

    /// The `m_w × m_z` matrix with the quadrature weight folded in.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn grid_z(&self) -> &Grid {
        &self.grid_z
    }

    pub fn grid_w(&self) -> &Grid {
        &self.grid_w
    }

    pub fn delta_z(&self) -> f64 {
        self.grid_z.delta()
    }

    /// Apply the operator to a function on `grid_z`.
    pub fn apply(&self, phi: &GridFunction) -> Result<GridFunction> {
        self.check_on_grid_z(phi)?;
        let v = &self.matrix * DVector::from_column_slice(phi.values());
        GridFunction::new(self.grid_w.clone(), v.data.into())
    }

    /// Mixed (2, ∞) norm of the operator's kernel, i.e. the norm of the
    /// adjoint as a map from L2 into the continuous functions.
    pub fn norm_2inf(&self) -> f64 {
        let dz = self.grid_z.delta();
        let dw = self.grid_w.delta();
        let mut best = 0.0f64;
        for col in self.matrix.column_iter() {
            // column k holds k(z_k, ·) Δ_z
            let sum_sq: f64 = col.iter().map(|v| (v / dz) * (v / dz)).sum();
            best = best.max((dw * sum_sq).sqrt());
        }
        best
    }

    /// Solve the ridge normal equations `(αI + KᵀK) φ = Kᵀ r` by a Cholesky
    /// factorization of the symmetric positive definite system. The solution
    /// is the unique minimizer of `α‖φ‖² + ‖Kφ − r‖²`.
    pub fn tikhonov_solve(&self, r: &GridFunction, alpha: f64) -> Result<GridFunction> {
        self.check_alpha(alpha)?;
        self.check_on_grid_w(r)?;
        let m = self.grid_z.len();
        let gram = self.matrix.transpose() * &self.matrix + DMatrix::identity(m, m) * alpha;
        let rhs = self.matrix.transpose() * DVector::from_column_slice(r.values());
        let chol = Cholesky::new(gram).ok_or(Error::NonpositiveAlpha(alpha))?;
        let phi = chol.solve(&rhs);
        GridFunction::new(self.grid_z.clone(), phi.data.into())
    }

    /// Dual form of the same solution, `Kᵀ (αI + KKᵀ)⁻¹ r`. Kept as a second
    /// algebraic route for cross-checks.
    pub fn tikhonov_solve_dual(&self, r: &GridFunction, alpha: f64) -> Result<GridFunction> {
        self.check_alpha(alpha)?;
        self.check_on_grid_w(r)?;
        let mw = self.grid_w.len();
        let outer = &self.matrix * self.matrix.transpose() + DMatrix::identity(mw, mw) * alpha;
        let chol = Cholesky::new(outer).ok_or(Error::NonpositiveAlpha(alpha))?;
        let tmp = chol.solve(&DVector::from_column_slice(r.values()));
        let phi = self.matrix.transpose() * tmp;
        GridFunction::new(self.grid_z.clone(), phi.data.into())
    }

    /// Apply the resolvent `(αI + KᵀK)⁻¹` to a function on `grid_z`.
    pub fn resolvent_apply(&self, g: &GridFunction, alpha: f64) -> Result<GridFunction> {
        self.check_alpha(alpha)?;
        self.check_on_grid_z(g)?;
        let m = self.grid_z.len();
        let gram = self.matrix.transpose() * &self.matrix + DMatrix::identity(m, m) * alpha;
        let chol = Cholesky::new(gram).ok_or(Error::NonpositiveAlpha(alpha))?;
        let out = chol.solve(&DVector::from_column_slice(g.values()));
        GridFunction::new(self.grid_z.clone(), out.data.into())
    }

    fn check_alpha(&self, alpha: f64) -> Result<()> {
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(Error::NonpositiveAlpha(alpha));
        }
        Ok(())
    }

    fn check_on_grid_w(&self, f: &GridFunction) -> Result<()> {
        if f.grid() != &self.grid_w {
            return Err(Error::DimensionMismatch(
                "function does not live on the operator's image grid".into(),
            ));
        }
        Ok(())
    }

    fn check_on_grid_z(&self, f: &GridFunction) -> Result<()> {
        if f.grid() != &self.grid_z {
            return Err(Error::DimensionMismatch(
                "function does not live on the operator's domain grid".into(),
            ));
        }
        Ok(())
    }
}

/// Upper bound on the sup-norm of the resolvent `(αI + T*T)⁻¹` acting on
/// continuous functions: `(‖T*‖₂,∞ / 2 + √α) / α^{3/2}`.
pub fn resolvent_sup_bound(norm_2inf: f64, alpha: f64) -> Result<f64> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonpositiveAlpha(alpha));
    }
    Ok((norm_2inf / 2.0 + alpha.sqrt()) / alpha.powf(1.5))
}
