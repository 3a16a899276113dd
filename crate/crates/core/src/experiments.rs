//! Synthetic instance generation and the parameter-recovery sweep:
//! generate → sample once → estimate → diagnose, over a grid of sizes and
//! trials, with a log-log fit of the median error against `n`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariates::{self, CovariateMatrix};
use crate::diagnostics::{self, AssumptionThresholds};
use crate::error::{Error, Result};
use crate::hypergraph::WeightedHypergraph;
use crate::model::{self, ModelParameters, ParameterBox, SpinConfiguration, DEFAULT_ENUMERATION_CAP};
use crate::optimizer::{self, PgdConfig};
use crate::sampler::{self, derive_seed, rng_from_seed, ChainRng, InitialState, SamplerChoice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Random `m`-sets from repeated shuffles, random signs.
    RandomUniformM,
    /// Disjoint `m`-blocks of negative weight plus a random pairwise matching.
    GroupBlocks,
    /// Random signed perfect matchings, `m = 2`.
    Pairwise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruthDraw {
    Fixed {
        theta: Vec<f64>,
        beta: f64,
    },
    /// `θ` uniform in the ball of radius `fraction·Θ`, `β` uniform in `[−fraction·B, fraction·B]`.
    UniformInBox {
        #[serde(default = "default_fraction")]
        fraction: f64,
    },
    /// Fixed `β`, `θ` drawn as in `UniformInBox`.
    FixedBeta {
        beta: f64,
        #[serde(default = "default_fraction")]
        fraction: f64,
    },
}

fn default_fraction() -> f64 {
    0.8
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    /// Shuffle rounds (random families) or matchings (pairwise).
    pub edges_per_vertex: usize,
    /// Multiplier on all weights before degree normalization; 0 gives no edges.
    pub weight_scale: f64,
    /// Block-edge weight for `group_blocks`.
    pub block_weight: f64,
    /// Pair-edge weight for `group_blocks`.
    pub pair_weight: f64,
    /// Required `λ_min((1/n)XᵀX)` when drawing covariates.
    pub covariate_floor: f64,
    /// Per-row standard deviation as a fraction of `M/√d`.
    pub covariate_scale: f64,
    pub max_retries: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            edges_per_vertex: 3,
            weight_scale: 1.0,
            block_weight: -1.0,
            pair_weight: 0.5,
            covariate_floor: 0.1,
            covariate_scale: 0.7,
            max_retries: 100,
        }
    }
}

fn default_slope_range() -> [f64; 2] {
    [-0.65, -0.35]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub family: Family,
    pub n_values: Vec<usize>,
    pub d: usize,
    pub m: usize,
    pub trials_per_n: usize,
    pub master_seed: u64,
    pub truth_box: ParameterBox,
    pub truth_draw: TruthDraw,
    pub sampler: SamplerChoice,
    #[serde(default)]
    pub generator: GeneratorParams,
    #[serde(default)]
    pub thresholds: AssumptionThresholds,
    #[serde(default = "default_slope_range")]
    pub slope_range: [f64; 2],
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_values.is_empty() || self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_values must be non-empty and strictly increasing".into());
        }
        if self.trials_per_n == 0 {
            return bad("trials_per_n must be at least 1".into());
        }
        if self.d == 0 || self.m < 2 {
            return bad(format!("need d >= 1 and m >= 2, got d = {}, m = {}", self.d, self.m));
        }
        if self.family == Family::Pairwise && self.m != 2 {
            return bad("the pairwise family requires m = 2".into());
        }
        if self.n_values[0] < self.m.max(self.d + 1) {
            return bad(format!("smallest n must be at least max(m, d + 1), got {}", self.n_values[0]));
        }
        self.truth_box.validate()?;
        match &self.truth_draw {
            TruthDraw::Fixed { theta, beta } => {
                let p = ModelParameters::new(theta.clone(), *beta)?;
                if p.d() != self.d || !self.truth_box.contains_strictly(&p) {
                    return bad("fixed truth must have length d and lie strictly inside the box".into());
                }
            }
            TruthDraw::UniformInBox { fraction } | TruthDraw::FixedBeta { fraction, .. } => {
                if !(*fraction > 0.0 && *fraction < 1.0) {
                    return bad(format!("fraction {fraction} must lie in (0, 1)"));
                }
            }
        }
        if let TruthDraw::FixedBeta { beta, .. } = self.truth_draw {
            if beta.abs() >= self.truth_box.big_b {
                return bad(format!("fixed beta {beta} must satisfy |beta| < B"));
            }
        }
        if self.sampler == SamplerChoice::Exact && *self.n_values.last().unwrap() > DEFAULT_ENUMERATION_CAP {
            return bad(format!("exact sampling needs n <= {DEFAULT_ENUMERATION_CAP}"));
        }
        if self.generator.edges_per_vertex == 0 || !(self.generator.weight_scale >= 0.0) {
            return bad("edges_per_vertex must be positive and weight_scale non-negative".into());
        }
        if !(self.slope_range[0] <= self.slope_range[1]) {
            return bad("slope_range must be [low, high] with low <= high".into());
        }
        Ok(())
    }

    /// Seed of cell `(n, trial)`; independent of which other cells exist.
    pub fn trial_seed(&self, n: usize, trial: usize) -> u64 {
        derive_seed(derive_seed(self.master_seed, n as u64), trial as u64)
    }
}

/// One generated problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: WeightedHypergraph,
    pub covariates: CovariateMatrix,
    pub truth: ModelParameters,
}

const STREAM_GRAPH: u64 = 0;
const STREAM_COVARIATES: u64 = 1;
const STREAM_TRUTH: u64 = 2;
const STREAM_SAMPLE: u64 = 3;

fn random_sign(rng: &mut ChainRng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Hypergraph for `family`, degree-normalized to cap 1. The top-edge mass
/// floor is enforced by resampling.
pub fn generate_hypergraph(
    family: Family,
    n: usize,
    m: usize,
    params: &GeneratorParams,
    mass_floor: f64,
    rng: &mut ChainRng,
) -> Result<WeightedHypergraph> {
    let mut last_reason = String::new();
    for _ in 0..params.max_retries.max(1) {
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut edges: Vec<(Vec<usize>, f64)> = Vec::new();
        let mut push = |mut e: Vec<usize>, w: f64, edges: &mut Vec<(Vec<usize>, f64)>| {
            e.sort_unstable();
            if seen.insert(e.clone()) {
                edges.push((e, w));
            }
        };
        let mut perm: Vec<usize> = (0..n).collect();
        match family {
            Family::RandomUniformM | Family::Pairwise => {
                let k = if family == Family::Pairwise { 2 } else { m };
                for _ in 0..params.edges_per_vertex {
                    perm.shuffle(rng);
                    for chunk in perm.chunks_exact(k) {
                        let w = random_sign(rng) * params.weight_scale;
                        push(chunk.to_vec(), w, &mut edges);
                    }
                }
            }
            Family::GroupBlocks => {
                perm.shuffle(rng);
                for chunk in perm.chunks_exact(m) {
                    push(chunk.to_vec(), params.block_weight * params.weight_scale, &mut edges);
                }
                perm.shuffle(rng);
                for chunk in perm.chunks_exact(2) {
                    push(chunk.to_vec(), params.pair_weight * params.weight_scale, &mut edges);
                }
            }
        }
        let g = WeightedHypergraph::new(n, m, edges)?.normalize_degrees(1.0)?;
        let ratio = g.top_mass() / n as f64;
        if params.weight_scale == 0.0 || ratio >= mass_floor {
            return Ok(g);
        }
        last_reason = format!("top-edge mass ratio {ratio} below floor {mass_floor}");
    }
    Err(Error::GenerationFailed {
        attempts: params.max_retries.max(1),
        reason: last_reason,
    })
}

/// Gaussian rows with per-coordinate scale `covariate_scale·M/√d`, clipped to
/// norm `M`, resampled until `λ_min((1/n)XᵀX) ≥ covariate_floor`.
pub fn generate_covariates(
    n: usize,
    d: usize,
    big_m: f64,
    params: &GeneratorParams,
    rng: &mut ChainRng,
) -> Result<CovariateMatrix> {
    let scale = params.covariate_scale * big_m / (d as f64).sqrt();
    let mut last = f64::NAN;
    for _ in 0..params.max_retries.max(1) {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let mut row: Vec<f64> = (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > big_m {
                    row.iter_mut().for_each(|v| *v *= big_m / norm);
                }
                row
            })
            .collect();
        let x = CovariateMatrix::from_rows(&rows)?;
        let (lambda_min, _) = covariates::covariance_spectrum(&x)?;
        if lambda_min >= params.covariate_floor {
            return Ok(x);
        }
        last = lambda_min;
    }
    Err(Error::GenerationFailed {
        attempts: params.max_retries.max(1),
        reason: format!("covariate lambda_min {last} below {}", params.covariate_floor),
    })
}

fn uniform_ball(d: usize, radius: f64, rng: &mut ChainRng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm > 0.0 {
            let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
            return v.into_iter().map(|t| t * r / norm).collect();
        }
    }
}

pub fn draw_truth(draw: &TruthDraw, d: usize, bounds: &ParameterBox, rng: &mut ChainRng) -> Result<ModelParameters> {
    match draw {
        TruthDraw::Fixed { theta, beta } => ModelParameters::new(theta.clone(), *beta),
        TruthDraw::UniformInBox { fraction } => {
            let theta = uniform_ball(d, fraction * bounds.big_theta, rng);
            let beta = rng.random_range(-1.0..=1.0) * fraction * bounds.big_b;
            ModelParameters::new(theta, beta)
        }
        TruthDraw::FixedBeta { beta, fraction } => {
            ModelParameters::new(uniform_ball(d, fraction * bounds.big_theta, rng), *beta)
        }
    }
}

/// Deterministic in `(spec, n, trial_seed)`.
pub fn generate_instance(spec: &ExperimentSpec, n: usize, trial_seed: u64) -> Result<Instance> {
    spec.validate()?;
    let mut rng = rng_from_seed(derive_seed(trial_seed, STREAM_GRAPH));
    let graph = generate_hypergraph(spec.family, n, spec.m, &spec.generator, spec.thresholds.mass_floor, &mut rng)?;
    let mut rng = rng_from_seed(derive_seed(trial_seed, STREAM_COVARIATES));
    let covariates = generate_covariates(n, spec.d, spec.truth_box.big_m, &spec.generator, &mut rng)?;
    let mut rng = rng_from_seed(derive_seed(trial_seed, STREAM_TRUTH));
    let truth = draw_truth(&spec.truth_draw, spec.d, &spec.truth_box, &mut rng)?;
    Ok(Instance {
        graph,
        covariates,
        truth,
    })
}

/// The single observed configuration for an instance.
pub fn draw_sample(inst: &Instance, choice: &SamplerChoice, seed: u64) -> Result<SpinConfiguration> {
    match choice {
        SamplerChoice::Exact => sampler::sample_exact(&inst.graph, &inst.covariates, &inst.truth, seed),
        SamplerChoice::Glauber(cfg) => {
            let cfg = sampler::ChainConfig { seed, ..*cfg };
            sampler::sample_glauber(&inst.graph, &inst.covariates, &inst.truth, &cfg, InitialState::Random)
        }
    }
}

/// One `(n, trial)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    /// `‖(θ̂,β̂) − (θ₀,β₀)‖₂`.
    pub error: Option<f64>,
    pub theta_error: Option<f64>,
    pub beta_error: Option<f64>,
    pub iterations: Option<usize>,
    pub final_grad_norm: Option<f64>,
    pub stop_reason: Option<String>,
    pub converged: Option<bool>,
    pub degree_ok: Option<bool>,
    pub mass_ok: Option<bool>,
    pub spectrum_ok: Option<bool>,
    pub row_norm_ok: Option<bool>,
    pub box_ok: Option<bool>,
    pub max_degree: Option<f64>,
    pub mass_ratio: Option<f64>,
    pub lambda_min_q: Option<f64>,
    pub f_inf_norm: Option<f64>,
    /// Row enters the slope fit: no failure and every hard assumption holds.
    pub included: bool,
    pub failure: Option<String>,
    #[serde(skip)]
    pub report: Vec<(String, String)>,
}

impl TrialRow {
    fn failed(n: usize, trial: usize, seed: u64, e: &Error) -> Self {
        Self {
            n,
            trial,
            seed,
            error: None,
            theta_error: None,
            beta_error: None,
            iterations: None,
            final_grad_norm: None,
            stop_reason: None,
            converged: None,
            degree_ok: None,
            mass_ok: None,
            spectrum_ok: None,
            row_norm_ok: None,
            box_ok: None,
            max_degree: None,
            mass_ratio: None,
            lambda_min_q: None,
            f_inf_norm: None,
            included: false,
            failure: Some(e.to_string()),
            report: vec![("failure".into(), e.to_string())],
        }
    }
}

/// Run one cell end to end.
pub fn run_trial(spec: &ExperimentSpec, n: usize, trial: usize) -> TrialRow {
    let seed = spec.trial_seed(n, trial);
    run_trial_inner(spec, n, trial, seed).unwrap_or_else(|e| TrialRow::failed(n, trial, seed, &e))
}

fn run_trial_inner(spec: &ExperimentSpec, n: usize, trial: usize, seed: u64) -> Result<TrialRow> {
    let inst = generate_instance(spec, n, seed)?;
    let y = draw_sample(&inst, &spec.sampler, derive_seed(seed, STREAM_SAMPLE))?;
    let cfg = PgdConfig::new(spec.truth_box, n);
    let est = optimizer::estimate_mple(&inst.graph, &inst.covariates, &y, &cfg, &ModelParameters::zeros(spec.d))?;
    let assumptions = diagnostics::validate_assumptions(
        &inst.graph,
        &inst.covariates,
        &spec.truth_box,
        Some(&inst.truth),
        &spec.thresholds,
    )?;
    let error = est.estimate.distance(&inst.truth);
    let theta_error = est
        .estimate
        .theta
        .iter()
        .zip(&inst.truth.theta)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let beta_error = (est.estimate.beta - inst.truth.beta).abs();
    let mut report = vec![
        ("n".to_string(), n.to_string()),
        ("trial".to_string(), trial.to_string()),
        ("seed".to_string(), seed.to_string()),
        ("sampler".to_string(), spec.sampler.describe()),
        ("truth_theta".to_string(), join(&inst.truth.theta)),
        ("truth_beta".to_string(), inst.truth.beta.to_string()),
        ("estimate_theta".to_string(), join(&est.estimate.theta)),
        ("estimate_beta".to_string(), est.estimate.beta.to_string()),
        ("error".to_string(), error.to_string()),
        ("iterations".to_string(), est.iterations.to_string()),
        ("stop_reason".to_string(), est.stop_reason.as_str().to_string()),
        ("final_grad_norm".to_string(), est.final_grad_norm.to_string()),
    ];
    report.extend(assumptions.key_values());
    Ok(TrialRow {
        n,
        trial,
        seed,
        error: Some(error),
        theta_error: Some(theta_error),
        beta_error: Some(beta_error),
        iterations: Some(est.iterations),
        final_grad_norm: Some(est.final_grad_norm),
        stop_reason: Some(est.stop_reason.as_str().to_string()),
        converged: Some(est.converged),
        degree_ok: Some(assumptions.degree_ok),
        mass_ok: Some(assumptions.mass_ok),
        spectrum_ok: Some(assumptions.spectrum_ok),
        row_norm_ok: Some(assumptions.row_norm_ok),
        box_ok: assumptions.box_ok,
        max_degree: Some(assumptions.max_degree),
        mass_ratio: Some(assumptions.mass_ratio),
        lambda_min_q: Some(assumptions.lambda_min_q),
        f_inf_norm: assumptions.f_inf_norm,
        included: assumptions.hard_ok(),
        failure: None,
        report,
    })
}

fn join(v: &[f64]) -> String {
    v.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeSummary {
    pub n: usize,
    pub trials: usize,
    pub included: usize,
    pub failures: usize,
    pub median_error: Option<f64>,
    pub median_iterations: Option<f64>,
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: ExperimentSpec,
    /// Sorted by `(n, trial)`.
    pub rows: Vec<TrialRow>,
    pub sizes: Vec<SizeSummary>,
    /// Least-squares slope of `ln(median error)` on `ln n`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Least-squares `c` in `median_iterations ≈ a + c ln n`.
    pub iteration_log_coefficient: Option<f64>,
}

impl SweepResult {
    pub fn slope_ok(&self) -> bool {
        self.slope
            .is_some_and(|s| s >= self.spec.slope_range[0] && s <= self.spec.slope_range[1])
    }

    /// Max iterations at the largest `n` do not exceed max iterations at the
    /// smallest `n` plus `c⁺ ln(n_max/n_min)` for the fitted coefficient.
    pub fn iterations_log_growth_ok(&self) -> Option<bool> {
        let first = self.sizes.first()?;
        let last = self.sizes.last()?;
        let c = self.iteration_log_coefficient?.max(0.0);
        let allowed = first.max_iterations? as f64 + c * (last.n as f64 / first.n as f64).ln();
        Some(last.max_iterations? as f64 <= allowed)
    }

    pub fn median_error_at(&self, n: usize) -> Option<f64> {
        self.sizes.iter().find(|s| s.n == n).and_then(|s| s.median_error)
    }

    pub fn summary_key_values(&self) -> Vec<(String, String)> {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
        let mut kv: Vec<(String, String)> = vec![
            ("family".into(), format!("{:?}", self.spec.family)),
            ("d".into(), self.spec.d.to_string()),
            ("m".into(), self.spec.m.to_string()),
            ("trials_per_n".into(), self.spec.trials_per_n.to_string()),
            ("master_seed".into(), self.spec.master_seed.to_string()),
            ("rng".into(), sampler::RNG_ALGORITHM.to_string()),
            ("sampler".into(), self.spec.sampler.describe()),
            (
                "sampler_note".into(),
                "Glauber burn-in adequacy at large n is not certified; exact sampling is used only up to the enumeration cap"
                    .into(),
            ),
            ("degree_cap".into(), self.spec.thresholds.degree_cap.to_string()),
            ("mass_floor".into(), self.spec.thresholds.mass_floor.to_string()),
            ("spectrum_floor".into(), self.spec.thresholds.spectrum_floor.to_string()),
        ];
        for s in &self.sizes {
            let p = format!("n{}", s.n);
            kv.push((format!("{p}.included"), format!("{}/{}", s.included, s.trials)));
            kv.push((format!("{p}.failures"), s.failures.to_string()));
            kv.push((format!("{p}.median_error"), opt(s.median_error)));
            kv.push((format!("{p}.median_iterations"), opt(s.median_iterations)));
            kv.push((
                format!("{p}.max_iterations"),
                s.max_iterations.map_or("none".into(), |v| v.to_string()),
            ));
        }
        kv.push(("slope".into(), opt(self.slope)));
        kv.push((
            "slope_range".into(),
            format!("[{}, {}]", self.spec.slope_range[0], self.spec.slope_range[1]),
        ));
        kv.push(("slope_ok".into(), self.slope_ok().to_string()));
        kv.push(("iteration_log_coefficient".into(), opt(self.iteration_log_coefficient)));
        kv.push((
            "iterations_log_growth_ok".into(),
            self.iterations_log_growth_ok().map_or("none".into(), |b| b.to_string()),
        ));
        kv
    }

    pub fn write_rows_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        for row in &self.rows {
            wtr.serialize(row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn format_summary(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.summary_key_values() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let k = values.len();
    Some(if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    })
}

/// Least-squares `(slope, intercept)` of `ys` on `xs`; `None` with fewer than two distinct `xs`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let k = xs.len() as f64;
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Run every `(n, trial)` cell in parallel. Failures are recorded per row.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let cells: Vec<(usize, usize)> = spec
        .n_values
        .iter()
        .flat_map(|&n| (0..spec.trials_per_n).map(move |t| (n, t)))
        .collect();
    let mut rows: Vec<TrialRow> = cells.par_iter().map(|&(n, t)| run_trial(spec, n, t)).collect();
    rows.sort_by_key(|r| (r.n, r.trial));

    let sizes: Vec<SizeSummary> = spec
        .n_values
        .iter()
        .map(|&n| {
            let at_n: Vec<&TrialRow> = rows.iter().filter(|r| r.n == n).collect();
            let mut errors: Vec<f64> = at_n.iter().filter(|r| r.included).filter_map(|r| r.error).collect();
            let mut iters: Vec<f64> = at_n
                .iter()
                .filter(|r| r.included)
                .filter_map(|r| r.iterations.map(|v| v as f64))
                .collect();
            SizeSummary {
                n,
                trials: at_n.len(),
                included: errors.len(),
                failures: at_n.iter().filter(|r| r.failure.is_some()).count(),
                median_error: median(&mut errors),
                median_iterations: median(&mut iters),
                max_iterations: at_n.iter().filter(|r| r.included).filter_map(|r| r.iterations).max(),
            }
        })
        .collect();

    let (lx, ly): (Vec<f64>, Vec<f64>) = sizes
        .iter()
        .filter_map(|s| s.median_error.filter(|e| *e > 0.0).map(|e| ((s.n as f64).ln(), e.ln())))
        .unzip();
    let fit = least_squares(&lx, &ly);
    let (ix, iy): (Vec<f64>, Vec<f64>) = sizes
        .iter()
        .filter_map(|s| s.median_iterations.map(|it| ((s.n as f64).ln(), it)))
        .unzip();
    let iteration_fit = least_squares(&ix, &iy);
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
        sizes,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        iteration_log_coefficient: iteration_fit.map(|f| f.0),
    })
}

fn grid(limit: f64, step: f64) -> Vec<f64> {
    let k = (limit / step + 1e-9).floor() as i64;
    (-k..=k).map(|i| i as f64 * step).collect()
}

/// Exact maximum-likelihood estimate by grid search over the box with spacing
/// `grid_step`. Ties go to the grid point of smallest norm, then to the first
/// in `(β, θ)` lexicographic order.
pub fn mle_oracle(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    y: &SpinConfiguration,
    bounds: &ParameterBox,
    grid_step: f64,
) -> Result<ModelParameters> {
    let n = g.n();
    let d = x.d();
    model::check_enumerable(n, DEFAULT_ENUMERATION_CAP)?;
    if d > 2 {
        return Err(Error::InvalidParameter(format!("mle_oracle supports d <= 2, got {d}")));
    }
    if x.n() != n || y.len() != n {
        return Err(Error::DimensionMismatch("covariates, sample and hypergraph disagree on n".into()));
    }
    if !(grid_step > 0.0) {
        return Err(Error::InvalidParameter("grid_step must be positive".into()));
    }
    // sufficient statistics (Σ x_i y_i, f(y)) of every configuration
    let mut stats: Vec<(Vec<f64>, f64)> = Vec::with_capacity(1 << n);
    let mut s = vec![0.0; d];
    let mut f = 0.0;
    model::gray_code_walk(g, |code, step, cfg| {
        match step {
            None => {
                for k in 0..d {
                    s[k] = (0..n).map(|i| x.get(i, k) * cfg.value(i)).sum();
                }
                f = model::f_value(g, cfg).expect("valid configuration");
            }
            Some((i, f_i)) => {
                let yi = cfg.value(i);
                for (k, sk) in s.iter_mut().enumerate() {
                    *sk += 2.0 * yi * x.get(i, k);
                }
                f += 2.0 * yi * f_i;
            }
        }
        debug_assert_eq!(code, cfg.to_bits());
        stats.push((s.clone(), f));
    });
    let obs_s: Vec<f64> = (0..d).map(|k| (0..n).map(|i| x.get(i, k) * y.value(i)).sum()).collect();
    let obs_f = model::f_value(g, y)?;

    let betas = grid(bounds.big_b, grid_step);
    let axis = grid(bounds.big_theta, grid_step);
    let thetas: Vec<Vec<f64>> = match d {
        1 => axis.iter().map(|&t| vec![t]).collect(),
        _ => axis
            .iter()
            .flat_map(|&a| axis.iter().map(move |&b| vec![a, b]))
            .filter(|t| (t[0] * t[0] + t[1] * t[1]).sqrt() <= bounds.big_theta + 1e-12)
            .collect(),
    };
    let best = betas
        .par_iter()
        .map(|&beta| {
            let mut best: Option<(f64, f64, ModelParameters)> = None;
            for theta in &thetas {
                let dot = |sv: &[f64]| sv.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
                let mut lse = crate::linalg::LogSumExp::default();
                for (sv, fv) in &stats {
                    lse.push(dot(sv) + beta * fv);
                }
                let value = dot(&obs_s) + beta * obs_f - lse.value();
                let p = ModelParameters {
                    theta: theta.clone(),
                    beta,
                };
                let norm = p.to_vec().iter().map(|v| v * v).sum::<f64>();
                if better(value, norm, best.as_ref().map(|b| (b.0, b.1))) {
                    best = Some((value, norm, p));
                }
            }
            best.expect("grid is non-empty")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| if better(b.0, b.1, Some((a.0, a.1))) { b } else { a })
        .expect("grid is non-empty");
    Ok(best.2)
}

fn better(value: f64, norm: f64, incumbent: Option<(f64, f64)>) -> bool {
    match incumbent {
        None => true,
        Some((v, nrm)) => value > v || (value == v && norm < nrm),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(family: Family, m: usize) -> ExperimentSpec {
        ExperimentSpec {
            family,
            n_values: vec![60, 120],
            d: 2,
            m,
            trials_per_n: 2,
            master_seed: 7,
            truth_box: ParameterBox::new(1.0, 1.0, 1.5).unwrap(),
            truth_draw: TruthDraw::UniformInBox { fraction: 0.8 },
            sampler: SamplerChoice::Glauber(sampler::ChainConfig {
                burn_in_sweeps: 20,
                ..Default::default()
            }),
            generator: GeneratorParams::default(),
            thresholds: AssumptionThresholds::default(),
            slope_range: default_slope_range(),
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let s = spec(Family::RandomUniformM, 3);
        let a = generate_instance(&s, 60, 11).unwrap();
        let b = generate_instance(&s, 60, 11).unwrap();
        assert_eq!(crate::io::format_hypergraph(&a.graph), crate::io::format_hypergraph(&b.graph));
        assert_eq!(a.covariates.matrix(), b.covariates.matrix());
        assert_eq!(a.truth, b.truth);
        let c = generate_instance(&s, 60, 12).unwrap();
        assert_ne!(a.truth, c.truth);
    }

    #[test]
    fn families_meet_construction_targets() {
        for (family, m) in [(Family::RandomUniformM, 3), (Family::GroupBlocks, 3), (Family::Pairwise, 2)] {
            let s = spec(family, m);
            let inst = generate_instance(&s, 60, 3).unwrap();
            assert!(inst.graph.max_degree() <= 1.0 + 1e-12);
            assert!(inst.graph.top_mass() / 60.0 >= s.thresholds.mass_floor);
            assert!(inst.covariates.max_row_norm() <= 1.5 + 1e-12);
            assert!(s.truth_box.contains_strictly(&inst.truth));
        }
    }

    #[test]
    fn spec_validation() {
        let mut s = spec(Family::Pairwise, 3);
        assert!(s.validate().is_err());
        s.m = 2;
        assert!(s.validate().is_ok());
        s.n_values = vec![100, 100];
        assert!(s.validate().is_err());
    }

    #[test]
    fn toml_spec_parses() {
        let text = r#"
            family = "random_uniform_m"
            n_values = [200, 400]
            d = 4
            m = 3
            trials_per_n = 5
            master_seed = 42
            truth_box = { big_b = 1.0, big_theta = 1.0, big_m = 2.0 }
            truth_draw = { kind = "uniform_in_box" }
            sampler = { kind = "glauber", seed = 0, burn_in_sweeps = 200 }
            [generator]
            edges_per_vertex = 3
        "#;
        let s = ExperimentSpec::from_toml(text).unwrap();
        assert_eq!(s.truth_draw, TruthDraw::UniformInBox { fraction: 0.8 });
        assert_eq!(s.slope_range, [-0.65, -0.35]);
        assert!(matches!(s.sampler, SamplerChoice::Glauber(c) if c.burn_in_sweeps == 200));
    }

    #[test]
    fn sweep_has_one_row_per_cell_and_is_reproducible() {
        let s = spec(Family::RandomUniformM, 3);
        let a = run_sweep(&s).unwrap();
        assert_eq!(a.rows.len(), 4);
        assert!(a.rows.iter().all(|r| r.failure.is_none()));
        let b = run_sweep(&s).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn median_and_fit() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        let (s, i) = least_squares(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((s - 2.0).abs() < 1e-12 && (i - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mle_oracle_zero_covariates_returns_zero_theta() {
        let g = WeightedHypergraph::new(4, 2, vec![(vec![0, 1], 0.5), (vec![2, 3], 0.5)]).unwrap();
        let x = CovariateMatrix::constant(4, 1, 0.0).unwrap();
        let y = SpinConfiguration::new(vec![1, 1, -1, -1]).unwrap();
        let b = ParameterBox::new(1.0, 1.0, 1.0).unwrap();
        let p = mle_oracle(&g, &x, &y, &b, 0.1).unwrap();
        assert_eq!(p.theta, vec![0.0]);
        assert!(p.beta > 0.0);
    }
}
