//! Log-pseudolikelihood
//! `LPL(θ,β) = (1/n) Σ_i [y_i z_i − ln cosh z_i] − ln 2`, `z_i = βf_i(y_{-i}) + θᵀx_i`,
//! with its gradient, negated Hessian and the curvature sandwich bounds.

use nalgebra::{DMatrix, DVector};

use crate::covariates::CovariateMatrix;
use crate::error::{Error, Result};
use crate::hypergraph::WeightedHypergraph;
use crate::linalg;
use crate::model::{self, ModelParameters, ParameterBox, SpinConfiguration};

/// Fields are clamped to this magnitude before `tanh`/`cosh`.
pub const FIELD_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LplEvaluation {
    pub value: f64,
    /// `(∂/∂θ_1, …, ∂/∂θ_d, ∂/∂β)`.
    pub gradient: Vec<f64>,
    pub neg_hessian_min_eig: Option<f64>,
}

impl LplEvaluation {
    pub fn gradient_norm(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// Outcome of checking `c·G ⪯ −H ⪯ G` with `G = (1/n)ΣX_iX_iᵀ`, `c = 1/cosh²(B+MΘ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichCheck {
    pub lhs_ok: bool,
    pub rhs_ok: bool,
    /// `λ_min(−H)`.
    pub lambda_min: f64,
    /// `λ_min(−H − cG)`.
    pub lhs_margin: f64,
    /// `λ_min(G + H)`.
    pub rhs_margin: f64,
}

/// PSD tolerance used by [`SandwichCheck`].
pub const PSD_TOLERANCE: f64 = -1e-9;

/// The LPL of a fixed sample. `f_i(y_{-i})` does not depend on `(θ, β)`, so
/// it is computed once at construction.
#[derive(Debug, Clone)]
pub struct PseudoLikelihood<'a> {
    x: &'a CovariateMatrix,
    spins: Vec<f64>,
    fields: Vec<f64>,
}

impl<'a> PseudoLikelihood<'a> {
    pub fn new(g: &WeightedHypergraph, x: &'a CovariateMatrix, y: &SpinConfiguration) -> Result<Self> {
        if x.n() != g.n() {
            return Err(Error::DimensionMismatch(format!(
                "covariates have {} rows, hypergraph has n = {}",
                x.n(),
                g.n()
            )));
        }
        let fields = model::local_fields(g, y)?;
        Ok(Self {
            x,
            spins: y.to_f64(),
            fields,
        })
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn d(&self) -> usize {
        self.x.d()
    }

    pub fn local_fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn spins(&self) -> &[f64] {
        &self.spins
    }

    fn check_dim(&self, p: &ModelParameters) -> Result<()> {
        if p.d() != self.d() {
            return Err(Error::DimensionMismatch(format!(
                "theta has length {}, covariates have d = {}",
                p.d(),
                self.d()
            )));
        }
        Ok(())
    }

    /// Clamped `z_i` for all vertices.
    fn total_fields(&self, p: &ModelParameters) -> Result<Vec<f64>> {
        self.check_dim(p)?;
        let lin = self.x.linear_predictor(&p.theta)?;
        Ok(lin
            .iter()
            .zip(&self.fields)
            .map(|(h, f)| (h + p.beta * f).clamp(-FIELD_CLAMP, FIELD_CLAMP))
            .collect())
    }

    pub fn value(&self, p: &ModelParameters) -> Result<f64> {
        let z = self.total_fields(p)?;
        let s: f64 = z
            .iter()
            .zip(&self.spins)
            .map(|(z, y)| y * z - linalg::ln_cosh(*z))
            .sum();
        Ok(s / self.n() as f64 - std::f64::consts::LN_2)
    }

    /// Value and gradient in a single pass.
    pub fn evaluate(&self, p: &ModelParameters) -> Result<LplEvaluation> {
        let z = self.total_fields(p)?;
        let d = self.d();
        let n = self.n() as f64;
        let mut value = 0.0;
        let mut grad = vec![0.0; d + 1];
        for (i, &zi) in z.iter().enumerate() {
            let y = self.spins[i];
            value += y * zi - linalg::ln_cosh(zi);
            let r = y - zi.tanh();
            for (k, g) in grad.iter_mut().take(d).enumerate() {
                *g += r * self.x.get(i, k);
            }
            grad[d] += r * self.fields[i];
        }
        grad.iter_mut().for_each(|g| *g /= n);
        Ok(LplEvaluation {
            value: value / n - std::f64::consts::LN_2,
            gradient: grad,
            neg_hessian_min_eig: None,
        })
    }

    pub fn evaluate_with_hessian(&self, p: &ModelParameters) -> Result<LplEvaluation> {
        let mut eval = self.evaluate(p)?;
        let (lo, _) = linalg::extreme_eigenvalues(&self.neg_hessian(p)?)?;
        eval.neg_hessian_min_eig = Some(lo);
        Ok(eval)
    }

    pub fn gradient(&self, p: &ModelParameters) -> Result<Vec<f64>> {
        Ok(self.evaluate(p)?.gradient)
    }

    /// `X_i = (x_iᵀ, f_i)ᵀ`.
    fn augmented_row(&self, i: usize) -> DVector<f64> {
        let d = self.d();
        DVector::from_fn(d + 1, |k, _| if k < d { self.x.get(i, k) } else { self.fields[i] })
    }

    fn weighted_gram(&self, weights: impl Iterator<Item = f64>) -> DMatrix<f64> {
        let d1 = self.d() + 1;
        let mut acc = DMatrix::<f64>::zeros(d1, d1);
        for (i, w) in weights.enumerate() {
            let xi = self.augmented_row(i);
            acc.syger(w, &xi, &xi, 1.0);
        }
        acc.fill_upper_triangle_with_lower_triangle();
        acc / self.n() as f64
    }

    /// `−H = (1/n) Σ_i X_iX_iᵀ / cosh²(z_i)`.
    pub fn neg_hessian(&self, p: &ModelParameters) -> Result<DMatrix<f64>> {
        let z = self.total_fields(p)?;
        Ok(self.weighted_gram(z.into_iter().map(linalg::sech2)))
    }

    /// `G = (1/n) Σ_i X_iX_iᵀ`.
    pub fn design_gram(&self) -> DMatrix<f64> {
        self.weighted_gram(std::iter::repeat_n(1.0, self.n()))
    }

    pub fn sandwich_check(&self, p: &ModelParameters, bounds: &ParameterBox) -> Result<SandwichCheck> {
        self.check_dim(p)?;
        if !bounds.contains(p, 1e-12) {
            return Err(Error::OutsideBox);
        }
        let h = self.neg_hessian(p)?;
        let g = self.design_gram();
        let c = linalg::sech2(bounds.field_bound());
        let (lambda_min, _) = linalg::extreme_eigenvalues(&h)?;
        let (lhs_margin, _) = linalg::extreme_eigenvalues(&(&h - &g * c))?;
        let (rhs_margin, _) = linalg::extreme_eigenvalues(&(&g - &h))?;
        Ok(SandwichCheck {
            lhs_ok: lhs_margin >= PSD_TOLERANCE,
            rhs_ok: rhs_margin >= PSD_TOLERANCE,
            lambda_min,
            lhs_margin,
            rhs_margin,
        })
    }
}

pub fn lpl(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    p: &ModelParameters,
    y: &SpinConfiguration,
) -> Result<f64> {
    PseudoLikelihood::new(g, x, y)?.value(p)
}

pub fn lpl_gradient(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    p: &ModelParameters,
    y: &SpinConfiguration,
) -> Result<Vec<f64>> {
    PseudoLikelihood::new(g, x, y)?.gradient(p)
}

pub fn lpl_neg_hessian(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    p: &ModelParameters,
    y: &SpinConfiguration,
) -> Result<DMatrix<f64>> {
    PseudoLikelihood::new(g, x, y)?.neg_hessian(p)
}

pub fn sandwich_check(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    p: &ModelParameters,
    y: &SpinConfiguration,
    bounds: &ParameterBox,
) -> Result<SandwichCheck> {
    PseudoLikelihood::new(g, x, y)?.sandwich_check(p, bounds)
}
