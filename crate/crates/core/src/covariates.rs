//! Covariate matrix `X` (n×d), its empirical covariance spectrum and the
//! projection `F = I − X(XᵀX)⁻¹Xᵀ` onto the complement of its column space.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Feature matrix; row `i` is `x_iᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateMatrix {
    x: DMatrix<f64>,
}

impl CovariateMatrix {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "covariate matrix must be non-empty, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("covariate entries must be finite".into()));
        }
        Ok(Self { x })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} columns, expected {d}",
                r.len()
            )));
        }
        Self::new(DMatrix::from_fn(rows.len(), d, |i, k| rows[i][k]))
    }

    /// Constant matrix, e.g. the all-ones intercept column.
    pub fn constant(n: usize, d: usize, value: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(n, d, value))
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.x[(i, k)]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.x.row(i).norm()
    }

    pub fn max_row_norm(&self) -> f64 {
        (0..self.n()).map(|i| self.row_norm(i)).fold(0.0, f64::max)
    }

    /// `θᵀx_i` for every row.
    pub fn linear_predictor(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.d() {
            return Err(Error::DimensionMismatch(format!(
                "theta has length {}, covariates have d = {}",
                theta.len(),
                self.d()
            )));
        }
        let t = DVector::from_column_slice(theta);
        Ok((&self.x * t).iter().copied().collect())
    }

    /// `Q = (1/n) XᵀX`.
    pub fn empirical_covariance(&self) -> DMatrix<f64> {
        self.x.transpose() * &self.x / self.n() as f64
    }
}

/// Extreme eigenvalues of `(1/n) XᵀX`.
pub fn covariance_spectrum(x: &CovariateMatrix) -> Result<(f64, f64)> {
    if x.n() < x.d() {
        return Err(Error::DimensionMismatch(format!(
            "need n >= d, got n = {} and d = {}",
            x.n(),
            x.d()
        )));
    }
    linalg::extreme_eigenvalues(&x.empirical_covariance())
}

/// Default conditioning tolerance `1e-10 · λ_max(Q)`.
pub fn default_cond_tol(x: &CovariateMatrix) -> Result<f64> {
    Ok(1e-10 * covariance_spectrum(x)?.1)
}

/// Applies `F` to vectors without materializing it.
#[derive(Debug, Clone)]
pub struct ColumnSpaceProjector<'a> {
    x: &'a CovariateMatrix,
    gram_inv: DMatrix<f64>,
}

impl<'a> ColumnSpaceProjector<'a> {
    pub fn new(x: &'a CovariateMatrix, cond_tol: f64) -> Result<Self> {
        if !(cond_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("cond_tol {cond_tol} must be positive")));
        }
        let (lambda_min, _) = covariance_spectrum(x)?;
        if lambda_min < cond_tol {
            return Err(Error::IllConditioned {
                lambda_min,
                tolerance: cond_tol,
            });
        }
        let gram = x.matrix().transpose() * x.matrix();
        let chol = nalgebra::Cholesky::new(gram).ok_or(Error::IllConditioned {
            lambda_min,
            tolerance: cond_tol,
        })?;
        Ok(Self {
            x,
            gram_inv: chol.inverse(),
        })
    }

    /// `F v = v − X (XᵀX)⁻¹ Xᵀ v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.x.n() {
            return Err(Error::DimensionMismatch(format!(
                "vector has length {}, expected n = {}",
                v.len(),
                self.x.n()
            )));
        }
        let v = DVector::from_column_slice(v);
        let coef = &self.gram_inv * (self.x.matrix().transpose() * &v);
        Ok((v - self.x.matrix() * coef).iter().copied().collect())
    }

    /// Row `i` of `F`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        let xi = self.x.matrix().row(i).transpose();
        let u = &self.gram_inv * xi;
        let mut r: Vec<f64> = (self.x.matrix() * u).iter().map(|v| -v).collect();
        r[i] += 1.0;
        r
    }

    /// `‖F‖∞` computed row by row in `O(n)` memory.
    pub fn inf_norm(&self) -> f64 {
        (0..self.x.n())
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn materialize(&self) -> ProjectionMatrix {
        let xm = self.x.matrix();
        let hat = xm * &self.gram_inv * xm.transpose();
        let n = self.x.n();
        let mut f = DMatrix::<f64>::identity(n, n) - hat;
        // exact symmetry
        for i in 0..n {
            for j in i + 1..n {
                let s = 0.5 * (f[(i, j)] + f[(j, i)]);
                f[(i, j)] = s;
                f[(j, i)] = s;
            }
        }
        let inf_norm = linalg::inf_norm(&f);
        ProjectionMatrix { f, inf_norm }
    }
}

/// Dense `F` together with `‖F‖∞`.
#[derive(Debug, Clone)]
pub struct ProjectionMatrix {
    f: DMatrix<f64>,
    inf_norm: f64,
}

impl ProjectionMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn inf_norm(&self) -> f64 {
        self.inf_norm
    }

    pub fn n(&self) -> usize {
        self.f.nrows()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (&self.f * DVector::from_column_slice(v)).iter().copied().collect()
    }
}

/// Build the dense projection matrix, failing if `λ_min(Q) < cond_tol`.
pub fn build_projection(x: &CovariateMatrix, cond_tol: f64) -> Result<ProjectionMatrix> {
    Ok(ColumnSpaceProjector::new(x, cond_tol)?.materialize())
}
