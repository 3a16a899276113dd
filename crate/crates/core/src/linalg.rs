//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Eigenvalues of a symmetric matrix, sorted ascending.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure);
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// `(λ_min, λ_max)` of a symmetric matrix.
pub fn extreme_eigenvalues(a: &DMatrix<f64>) -> Result<(f64, f64)> {
    let vals = symmetric_eigenvalues(a)?;
    match (vals.first(), vals.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(Error::DimensionMismatch("empty matrix has no eigenvalues".into())),
    }
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximum absolute column sum.
pub fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Overflow-safe `ln cosh z = |z| + ln((1 + e^{-2|z|}) / 2)`.
pub fn ln_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Overflow-safe `1 / cosh² z`.
pub fn sech2(z: f64) -> f64 {
    let e = (-2.0 * z.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Numerically stable `ln Σ exp(v_k)`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn push(&mut self, v: f64) {
        if v > self.max {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.sum += (v - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        self.max + self.sum.ln()
    }
}
