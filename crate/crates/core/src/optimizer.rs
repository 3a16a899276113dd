//! Projected gradient ascent on the log-pseudolikelihood over the box
//! `{|β| ≤ B, ‖θ‖₂ ≤ Θ}` with the fixed step `1/(M²+1)`.

use serde::{Deserialize, Serialize};

use crate::covariates::CovariateMatrix;
use crate::error::{Error, Result};
use crate::hypergraph::WeightedHypergraph;
use crate::model::{ModelParameters, ParameterBox, SpinConfiguration};
use crate::pseudolikelihood::PseudoLikelihood;

/// Euclidean projection onto the box: clamp `β`, radially shrink `θ`.
pub fn project_box(p: &ModelParameters, bounds: &ParameterBox) -> ModelParameters {
    let beta = p.beta.clamp(-bounds.big_b, bounds.big_b);
    let norm = p.theta_norm();
    // Points within rounding of the sphere stay put, so projection is idempotent.
    let theta = if norm > bounds.big_theta * (1.0 + 4.0 * f64::EPSILON) {
        let s = bounds.big_theta / norm;
        p.theta.iter().map(|t| t * s).collect()
    } else {
        p.theta.clone()
    };
    ModelParameters { theta, beta }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgdConfig {
    pub step_size: f64,
    pub grad_tol: f64,
    pub max_iters: usize,
    pub bounds: ParameterBox,
    pub record_trajectory: bool,
}

impl PgdConfig {
    /// Defaults for a problem of size `n`: step `1/(M²+1)`, tolerance `1/√n`,
    /// and an iteration cap of `max(1000, 10(M²+1) ln(n) / c)` with `c = 1`.
    pub fn new(bounds: ParameterBox, n: usize) -> Self {
        Self::with_cap_constant(bounds, n, 1.0)
    }

    pub fn with_cap_constant(bounds: ParameterBox, n: usize, c: f64) -> Self {
        let l = bounds.smoothness();
        let cap = (10.0 * l * (n.max(2) as f64).ln() / c).ceil() as usize;
        Self {
            step_size: 1.0 / l,
            grad_tol: 1.0 / (n.max(1) as f64).sqrt(),
            max_iters: cap.max(1000),
            bounds,
            record_trajectory: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        if !(self.step_size > 0.0) || !(self.grad_tol > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "step_size and grad_tol must be positive, max_iters at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `‖∇LPL‖₂ ≤ grad_tol`.
    GradientTolerance,
    /// The projected step moved less than `step_size · grad_tol`: the
    /// maximizer sits on the boundary of the box.
    BoundaryStationary,
    MaxIterations,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::GradientTolerance => "gradient_tolerance",
            StopReason::BoundaryStationary => "boundary_stationary",
            StopReason::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub lpl: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationReport {
    pub estimate: ModelParameters,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub final_lpl: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
    /// Every iterate `p_0, p_1, …` when the trajectory is recorded.
    pub iterates: Option<Vec<ModelParameters>>,
}

/// Run projected gradient ascent on an already-built objective.
pub fn maximize(
    objective: &PseudoLikelihood<'_>,
    cfg: &PgdConfig,
    init: &ModelParameters,
) -> Result<EstimationReport> {
    cfg.validate()?;
    if init.d() != objective.d() {
        return Err(Error::DimensionMismatch(format!(
            "initial theta has length {}, covariates have d = {}",
            init.d(),
            objective.d()
        )));
    }
    if !cfg.bounds.contains(init, 1e-12) {
        return Err(Error::OutsideBox);
    }
    let mut p = init.clone();
    let mut trajectory = cfg.record_trajectory.then(Vec::new);
    let mut iterates = cfg.record_trajectory.then(|| vec![p.clone()]);
    let mut iteration = 0;
    loop {
        let eval = objective.evaluate(&p)?;
        let grad_norm = eval.gradient_norm();
        if !grad_norm.is_finite() || !eval.value.is_finite() {
            return Err(Error::NonFinite { iteration });
        }
        if let Some(t) = trajectory.as_mut() {
            t.push(TrajectoryPoint {
                iteration,
                lpl: eval.value,
                grad_norm,
            });
        }
        let finish = |reason: StopReason, p: ModelParameters, trajectory, iterates| EstimationReport {
            estimate: p,
            iterations: iteration,
            final_grad_norm: grad_norm,
            final_lpl: eval.value,
            converged: reason == StopReason::GradientTolerance,
            stop_reason: reason,
            trajectory,
            iterates,
        };
        if grad_norm <= cfg.grad_tol {
            return Ok(finish(StopReason::GradientTolerance, p, trajectory, iterates));
        }
        if iteration >= cfg.max_iters {
            return Ok(finish(StopReason::MaxIterations, p, trajectory, iterates));
        }
        let stepped: Vec<f64> = p
            .to_vec()
            .iter()
            .zip(&eval.gradient)
            .map(|(v, g)| v + cfg.step_size * g)
            .collect();
        let next = project_box(&ModelParameters::from_slice(&stepped)?, &cfg.bounds);
        let moved = next.distance(&p) / cfg.step_size;
        if moved <= cfg.grad_tol {
            return Ok(finish(StopReason::BoundaryStationary, p, trajectory, iterates));
        }
        p = next;
        iteration += 1;
        if let Some(it) = iterates.as_mut() {
            it.push(p.clone());
        }
    }
}

/// Maximum pseudolikelihood estimate of `(θ, β)` from the single sample `y`.
pub fn estimate_mple(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    y: &SpinConfiguration,
    cfg: &PgdConfig,
    init: &ModelParameters,
) -> Result<EstimationReport> {
    let objective = PseudoLikelihood::new(g, x, y)?;
    maximize(&objective, cfg, init)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds() -> ParameterBox {
        ParameterBox::new(1.0, 2.0, 1.0).unwrap()
    }

    #[test]
    fn projection_examples() {
        let b = bounds();
        let p = ModelParameters::new(vec![0.1], 2.0).unwrap();
        assert_eq!(project_box(&p, &b).beta, 1.0);
        let p = ModelParameters::new(vec![3.2, 2.4], 0.0).unwrap();
        let q = project_box(&p, &b);
        assert!((q.theta[0] - 1.6).abs() < 1e-15 && (q.theta[1] - 1.2).abs() < 1e-15);
        let p = ModelParameters::new(vec![0.5, -0.5], -0.3).unwrap();
        assert_eq!(project_box(&p, &b), p);
        assert_eq!(project_box(&q, &b), q);
    }

    #[test]
    fn defaults() {
        let cfg = PgdConfig::new(ParameterBox::new(1.0, 1.0, 2.0).unwrap(), 400);
        assert!((cfg.step_size - 0.2).abs() < 1e-15);
        assert!((cfg.grad_tol - 0.05).abs() < 1e-15);
        assert_eq!(cfg.max_iters, 1000);
    }

    #[test]
    fn rejects_infeasible_init() {
        let g = WeightedHypergraph::empty(3, 2).unwrap();
        let x = CovariateMatrix::constant(3, 1, 1.0).unwrap();
        let y = SpinConfiguration::all(3, 1).unwrap();
        let cfg = PgdConfig::new(bounds(), 3);
        let init = ModelParameters::new(vec![0.0], 5.0).unwrap();
        assert!(matches!(estimate_mple(&g, &x, &y, &cfg, &init), Err(Error::OutsideBox)));
    }

    #[test]
    fn boundary_optimum_stops_stationary() {
        // all spins up with a constant covariate: the unconstrained optimum is at infinity
        let g = WeightedHypergraph::empty(4, 2).unwrap();
        let x = CovariateMatrix::constant(4, 1, 1.0).unwrap();
        let y = SpinConfiguration::all(4, 1).unwrap();
        let mut cfg = PgdConfig::new(bounds(), 4);
        cfg.grad_tol = 1e-6;
        let r = estimate_mple(&g, &x, &y, &cfg, &ModelParameters::zeros(1)).unwrap();
        assert_eq!(r.stop_reason, StopReason::BoundaryStationary);
        assert!(!r.converged);
        assert!((r.estimate.theta[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn max_iterations_flagged() {
        let g = WeightedHypergraph::empty(4, 2).unwrap();
        let x = CovariateMatrix::from_rows(&[vec![1.0], vec![-0.5], vec![0.3], vec![0.8]]).unwrap();
        let y = SpinConfiguration::new(vec![1, -1, -1, 1]).unwrap();
        let mut cfg = PgdConfig::new(bounds(), 4);
        cfg.grad_tol = 1e-14;
        cfg.max_iters = 3;
        let r = estimate_mple(&g, &x, &y, &cfg, &ModelParameters::zeros(1)).unwrap();
        assert_eq!(r.stop_reason, StopReason::MaxIterations);
        assert_eq!(r.iterations, 3);
        assert!(!r.converged);
    }
}
