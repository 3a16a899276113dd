//! Assumption checks and the strong-concavity machinery: the reduction matrix
//! `A`, the greedy index selection `h`, the certified lower bound on
//! `Σ_i (FA)²_{i,h(i)}`, and Monte-Carlo / exact-enumeration checks of the
//! gradient variance bounds, the energy bound `‖Ff‖² ≥ c n` and the parity
//! inequality.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use crate::covariates::{self, ColumnSpaceProjector, CovariateMatrix};
use crate::error::{Error, Result};
use crate::hypergraph::WeightedHypergraph;
use crate::linalg;
use crate::model::{self, IsingModel, ModelParameters, ParameterBox, SpinConfiguration};
use crate::pseudolikelihood::PseudoLikelihood;
use crate::sampler::{self, SamplerChoice};

/// Thresholds for [`validate_assumptions`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AssumptionThresholds {
    /// Right-hand side of the bounded-degree condition.
    pub degree_cap: f64,
    /// Required `top_mass / n`.
    pub mass_floor: f64,
    /// Required `λ_min((1/n)XᵀX)`.
    pub spectrum_floor: f64,
    /// Warning threshold on `‖F‖∞`.
    pub f_norm_cap: f64,
    /// Skip `‖F‖∞` (an `O(n²d)` computation) above this size.
    pub f_norm_max_n: usize,
}

impl Default for AssumptionThresholds {
    fn default() -> Self {
        Self {
            degree_cap: 1.0,
            mass_floor: 0.01,
            spectrum_floor: 0.01,
            f_norm_cap: 1.0,
            f_norm_max_n: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub max_degree: f64,
    pub degree_cap: f64,
    pub degree_ok: bool,
    pub top_mass: f64,
    pub mass_ratio: f64,
    pub mass_floor: f64,
    pub mass_ok: bool,
    pub lambda_min_q: f64,
    pub lambda_max_q: f64,
    pub spectrum_floor: f64,
    pub spectrum_ok: bool,
    pub max_row_norm: f64,
    pub row_norm_ok: bool,
    pub f_inf_norm: Option<f64>,
    /// Warning only.
    pub f_norm_ok: bool,
    /// `None` when no ground truth was supplied.
    pub box_ok: Option<bool>,
}

impl AssumptionReport {
    /// All hard assumptions hold (`‖F‖∞` is advisory).
    pub fn hard_ok(&self) -> bool {
        self.degree_ok && self.mass_ok && self.spectrum_ok && self.row_norm_ok && self.box_ok.unwrap_or(true)
    }

    pub fn key_values(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("max_degree", self.max_degree.to_string()),
            ("degree_cap", self.degree_cap.to_string()),
            ("degree_ok", self.degree_ok.to_string()),
            ("top_mass", self.top_mass.to_string()),
            ("mass_ratio", self.mass_ratio.to_string()),
            ("mass_floor", self.mass_floor.to_string()),
            ("mass_ok", self.mass_ok.to_string()),
            ("lambda_min_q", self.lambda_min_q.to_string()),
            ("lambda_max_q", self.lambda_max_q.to_string()),
            ("spectrum_floor", self.spectrum_floor.to_string()),
            ("spectrum_ok", self.spectrum_ok.to_string()),
            ("max_row_norm", self.max_row_norm.to_string()),
            ("row_norm_ok", self.row_norm_ok.to_string()),
            (
                "f_inf_norm",
                self.f_inf_norm.map_or("not_computed".to_string(), |v| v.to_string()),
            ),
            ("f_norm_ok", self.f_norm_ok.to_string()),
        ];
        if let Some(b) = self.box_ok {
            kv.push(("box_ok", b.to_string()));
        }
        kv.push(("hard_assumptions_ok", self.hard_ok().to_string()));
        kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

/// Evaluate bounded degree, top-edge mass, covariate spectrum/row norms,
/// `‖F‖∞` and (optionally) strict interior membership of the truth.
/// Violations are reported through the booleans, never as errors.
pub fn validate_assumptions(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    bounds: &ParameterBox,
    truth: Option<&ModelParameters>,
    thresholds: &AssumptionThresholds,
) -> Result<AssumptionReport> {
    if x.n() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "covariates have {} rows, hypergraph has n = {}",
            x.n(),
            g.n()
        )));
    }
    if let Some(t) = truth {
        if t.d() != x.d() {
            return Err(Error::DimensionMismatch(format!(
                "truth theta has length {}, covariates have d = {}",
                t.d(),
                x.d()
            )));
        }
    }
    let n = g.n() as f64;
    let max_degree = g.max_degree();
    let top_mass = g.top_mass();
    let mass_ratio = top_mass / n;
    let (lambda_min_q, lambda_max_q) = covariates::covariance_spectrum(x)?;
    let max_row_norm = x.max_row_norm();
    let spectrum_ok = lambda_min_q >= thresholds.spectrum_floor && lambda_max_q <= bounds.big_m.powi(2) + 1e-9;
    let f_inf_norm = if g.n() <= thresholds.f_norm_max_n && lambda_min_q > 1e-10 * lambda_max_q {
        ColumnSpaceProjector::new(x, 1e-10 * lambda_max_q)
            .ok()
            .map(|p| p.inf_norm())
    } else {
        None
    };
    Ok(AssumptionReport {
        max_degree,
        degree_cap: thresholds.degree_cap,
        degree_ok: max_degree <= thresholds.degree_cap + 1e-12,
        top_mass,
        mass_ratio,
        mass_floor: thresholds.mass_floor,
        mass_ok: mass_ratio >= thresholds.mass_floor,
        lambda_min_q,
        lambda_max_q,
        spectrum_floor: thresholds.spectrum_floor,
        spectrum_ok,
        max_row_norm,
        row_norm_ok: max_row_norm <= bounds.big_m + 1e-12,
        f_inf_norm,
        f_norm_ok: f_inf_norm.is_some_and(|v| v <= thresholds.f_norm_cap + 1e-9),
        box_ok: truth.map(|t| bounds.contains_strictly(t)),
    })
}

/// The `n×n` reduction matrix: column `i` holds `w_{(z*, i, j)}` over `j` for
/// the `(m−2)`-tuple `z*` maximizing the column's ℓ2 norm.
#[derive(Debug, Clone)]
pub struct ReductionMatrix {
    pub a: DMatrix<f64>,
    /// Selected tuple per column; `None` when no top edge touches the vertex.
    pub chosen_tuples: Vec<Option<Vec<usize>>>,
    pub frobenius_sq: f64,
    pub inf_norm: f64,
    pub one_norm: f64,
}

/// Build the reduction matrix from the cardinality-`m` edges. Candidate tuples
/// are those realized by incident top edges; ties go to the lexicographically
/// smallest tuple.
pub fn build_reduction_matrix(g: &WeightedHypergraph) -> Result<ReductionMatrix> {
    let m = g.m();
    if g.top_edges().next().is_none() {
        return Err(Error::NoTopEdges { m });
    }
    let n = g.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut chosen_tuples = Vec::with_capacity(n);
    for i in 0..n {
        let mut candidates: BTreeMap<Vec<usize>, Vec<(usize, f64)>> = BTreeMap::new();
        for &id in g.incident_edges(i) {
            let e = g.edge(id);
            if e.len() != m {
                continue;
            }
            for &j in e.vertices().iter().filter(|&&j| j != i) {
                let z: Vec<usize> = e.vertices().iter().copied().filter(|&v| v != i && v != j).collect();
                candidates.entry(z).or_default().push((j, e.weight()));
            }
        }
        let mut best: Option<(&Vec<usize>, &Vec<(usize, f64)>, f64)> = None;
        for (z, entries) in &candidates {
            let norm_sq: f64 = entries.iter().map(|(_, w)| w * w).sum();
            if best.is_none_or(|(_, _, b)| norm_sq > b) {
                best = Some((z, entries, norm_sq));
            }
        }
        match best {
            Some((z, entries, _)) => {
                for &(j, w) in entries {
                    a[(j, i)] = w;
                }
                chosen_tuples.push(Some(z.clone()));
            }
            None => chosen_tuples.push(None),
        }
    }
    let frobenius_sq = a.iter().map(|v| v * v).sum();
    let inf_norm = linalg::inf_norm(&a);
    let one_norm = linalg::one_norm(&a);
    Ok(ReductionMatrix {
        a,
        chosen_tuples,
        frobenius_sq,
        inf_norm,
        one_norm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionMap {
    /// `h[i]` is the column matched to row `i`.
    pub h: Vec<usize>,
    pub selected_sq_sum: f64,
}

impl SelectionMap {
    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.h.len()];
        self.h.iter().all(|&j| j < seen.len() && !std::mem::replace(&mut seen[j], true))
    }
}

/// Greedy matching: repeatedly take the remaining row of largest ℓ2 norm,
/// match it to its largest-magnitude remaining column, then zero that row and
/// column. Ties go to the smallest index.
pub fn index_selection(w: &DMatrix<f64>) -> Result<SelectionMap> {
    let n = w.nrows();
    if w.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "index selection needs a square matrix, got {}x{}",
            n,
            w.ncols()
        )));
    }
    let mut row_active = vec![true; n];
    let mut col_active = vec![true; n];
    let mut row_sq: Vec<f64> = (0..n).map(|i| w.row(i).iter().map(|v| v * v).sum()).collect();
    let mut row_nnz: Vec<usize> = (0..n).map(|i| w.row(i).iter().filter(|v| **v != 0.0).count()).collect();
    let mut h = vec![usize::MAX; n];
    let mut selected_sq_sum = 0.0;
    for _ in 0..n {
        let mut it = None;
        for i in (0..n).filter(|&i| row_active[i]) {
            if it.is_none_or(|b: usize| row_sq[i] > row_sq[b]) {
                it = Some(i);
            }
        }
        let it = it.expect("an active row remains");
        let mut jt = None;
        for j in (0..n).filter(|&j| col_active[j]) {
            if jt.is_none_or(|b: usize| w[(it, j)].abs() > w[(it, b)].abs()) {
                jt = Some(j);
            }
        }
        let jt = jt.expect("an active column remains");
        h[it] = jt;
        selected_sq_sum += w[(it, jt)] * w[(it, jt)];
        row_active[it] = false;
        col_active[jt] = false;
        for r in (0..n).filter(|&r| row_active[r]) {
            let v = w[(r, jt)];
            if v != 0.0 {
                row_nnz[r] -= 1;
                row_sq[r] = if row_nnz[r] == 0 { 0.0 } else { (row_sq[r] - v * v).max(0.0) };
            }
        }
    }
    Ok(SelectionMap { h, selected_sq_sum })
}

/// `e^{−(B+MΘ)(m−1)} / 2^{m−1}`.
pub fn parity_factor(bounds: &ParameterBox, m: usize) -> f64 {
    let k = (m - 1) as f64;
    (-bounds.field_bound() * k).exp() / 2f64.powf(k)
}

/// Everything computed on the way to [`concavity_lower_bound`].
#[derive(Debug, Clone)]
pub struct ConcavityDiagnostics {
    pub reduction: ReductionMatrix,
    pub selection: SelectionMap,
    pub factor: f64,
    /// `factor · Σ_i (FA)²_{i,h(i)}`.
    pub lower_bound: f64,
    pub f_inf_norm: f64,
    pub fa_inf_norm: f64,
    pub fa_frobenius_sq: f64,
    /// `‖A‖²_F − d(m−1)²`.
    pub footnote_rhs: f64,
    pub footnote_ok: bool,
}

impl ConcavityDiagnostics {
    pub fn key_values(&self) -> Vec<(String, String)> {
        [
            ("a_frobenius_sq", self.reduction.frobenius_sq.to_string()),
            ("a_inf_norm", self.reduction.inf_norm.to_string()),
            ("a_one_norm", self.reduction.one_norm.to_string()),
            ("selection_is_bijection", self.selection.is_bijection().to_string()),
            ("selected_sq_sum", self.selection.selected_sq_sum.to_string()),
            ("parity_factor", self.factor.to_string()),
            ("concavity_lower_bound", self.lower_bound.to_string()),
            ("f_inf_norm", self.f_inf_norm.to_string()),
            ("fa_inf_norm", self.fa_inf_norm.to_string()),
            ("fa_frobenius_sq", self.fa_frobenius_sq.to_string()),
            ("fa_frobenius_floor", self.footnote_rhs.to_string()),
            ("fa_frobenius_floor_ok", self.footnote_ok.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

pub fn concavity_diagnostics(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    bounds: &ParameterBox,
    cond_tol: f64,
) -> Result<ConcavityDiagnostics> {
    if x.n() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "covariates have {} rows, hypergraph has n = {}",
            x.n(),
            g.n()
        )));
    }
    let projection = covariates::build_projection(x, cond_tol)?;
    let reduction = build_reduction_matrix(g)?;
    let fa = projection.matrix() * &reduction.a;
    let selection = index_selection(&fa)?;
    let factor = parity_factor(bounds, g.m());
    let fa_frobenius_sq: f64 = fa.iter().map(|v| v * v).sum();
    let footnote_rhs = reduction.frobenius_sq - (x.d() * (g.m() - 1).pow(2)) as f64;
    Ok(ConcavityDiagnostics {
        lower_bound: factor * selection.selected_sq_sum,
        f_inf_norm: projection.inf_norm(),
        fa_inf_norm: linalg::inf_norm(&fa),
        fa_frobenius_sq,
        footnote_ok: fa_frobenius_sq >= footnote_rhs - 1e-9,
        footnote_rhs,
        reduction,
        selection,
        factor,
    })
}

/// `e^{−(B+MΘ)(m−1)}/2^{m−1} · Σ_i (FA)²_{i,h(i)}` with `h = index_selection(FA)`.
pub fn concavity_lower_bound(g: &WeightedHypergraph, x: &CovariateMatrix, bounds: &ParameterBox) -> Result<f64> {
    let tol = covariates::default_cond_tol(x)?;
    Ok(concavity_diagnostics(g, x, bounds, tol)?.lower_bound)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceCheck {
    /// Monte-Carlo `E[(n ∂LPL/∂β)²]` at the truth.
    pub empirical_beta_var: f64,
    /// `(12+4B)(m−1)n`.
    pub bound_beta: f64,
    /// Monte-Carlo `E[Σ_k (n ∂LPL/∂θ_k)²]` at the truth.
    pub empirical_theta_var: f64,
    /// `(1+B)·4M²·(m−1)·d·n`.
    pub bound_theta: f64,
}

impl VarianceCheck {
    pub fn beta_ok(&self) -> bool {
        self.empirical_beta_var <= self.bound_beta
    }

    pub fn theta_ok(&self) -> bool {
        self.empirical_theta_var <= self.bound_theta
    }
}

/// Monte-Carlo second moments of the scaled gradient at the true parameters.
pub fn verify_gradient_variance(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    truth: &ModelParameters,
    bounds: &ParameterBox,
    sampler_choice: &SamplerChoice,
    trials: usize,
    seed: u64,
) -> Result<VarianceCheck> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let n = g.n() as f64;
    let d = x.d();
    let moments = sampler::sample_statistics(g, x, truth, sampler_choice, trials, seed, |y| {
        let grad = PseudoLikelihood::new(g, x, y)?.gradient(truth)?;
        let beta = (n * grad[d]).powi(2);
        let theta: f64 = grad[..d].iter().map(|v| (n * v).powi(2)).sum();
        Ok((beta, theta))
    })?;
    let t = trials as f64;
    let m1 = g.m().saturating_sub(1) as f64;
    let b = bounds.big_b;
    Ok(VarianceCheck {
        empirical_beta_var: moments.iter().map(|m| m.0).sum::<f64>() / t,
        bound_beta: (12.0 + 4.0 * b) * m1 * n,
        empirical_theta_var: moments.iter().map(|m| m.1).sum::<f64>() / t,
        bound_theta: (1.0 + b) * 4.0 * bounds.big_m.powi(2) * m1 * d as f64 * n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCheck {
    pub empirical_min_ff: f64,
    pub empirical_mean_ff: f64,
    /// Fraction of samples with `‖Ff‖² > threshold`.
    pub fraction_above: f64,
    /// The concavity lower bound, or 0 when the hypergraph has no top edge.
    pub threshold: f64,
    pub trials: usize,
}

/// Sample `y` and measure `‖F f(y)‖²` against [`concavity_lower_bound`].
#[allow(clippy::too_many_arguments)]
pub fn verify_energy_lower_bound(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    truth: &ModelParameters,
    bounds: &ParameterBox,
    sampler_choice: &SamplerChoice,
    trials: usize,
    seed: u64,
    cond_tol: f64,
) -> Result<EnergyCheck> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let threshold = match concavity_diagnostics(g, x, bounds, cond_tol) {
        Ok(c) => c.lower_bound,
        Err(Error::NoTopEdges { .. }) => 0.0,
        Err(e) => return Err(e),
    };
    let projector = ColumnSpaceProjector::new(x, cond_tol)?;
    let energies = sampler::sample_statistics(g, x, truth, sampler_choice, trials, seed, |y| {
        let f = model::local_fields(g, y)?;
        Ok(projector.apply(&f)?.iter().map(|v| v * v).sum::<f64>())
    })?;
    let above = energies.iter().filter(|&&e| e > threshold).count();
    Ok(EnergyCheck {
        empirical_min_ff: energies.iter().copied().fold(f64::INFINITY, f64::min),
        empirical_mean_ff: energies.iter().sum::<f64>() / trials as f64,
        fraction_above: above as f64 / trials as f64,
        threshold,
        trials,
    })
}

/// Result of an exhaustive conditional-expectation inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactInequalityCheck {
    /// Number of `(i, tuple)` combinations checked.
    pub checked: usize,
    pub violations: usize,
    /// Smallest `lhs − rhs` over all combinations.
    pub min_slack: f64,
    /// Smallest `lhs / rhs` over combinations with `rhs > 0`.
    pub min_ratio: f64,
}

struct ExactTable {
    n: usize,
    log_weights: Vec<f64>,
    /// `(Ff)_i²` per configuration, row-major `[code * n + i]`.
    ff_sq: Vec<f64>,
    projection: DMatrix<f64>,
}

impl ExactTable {
    fn build(
        g: &WeightedHypergraph,
        x: &CovariateMatrix,
        truth: &ModelParameters,
        cap: usize,
        cond_tol: f64,
    ) -> Result<Self> {
        let n = g.n();
        model::check_enumerable(n, cap)?;
        let projection = covariates::build_projection(x, cond_tol)?;
        let log_weights = IsingModel::new(g, x, truth)?.log_weight_table(cap)?;
        let mut ff_sq = vec![0.0; n << n];
        for code in 0..(1u64 << n) {
            let y = SpinConfiguration::from_bits(code, n);
            let f = model::local_fields(g, &y)?;
            let ff = projection.apply(&f);
            for i in 0..n {
                ff_sq[code as usize * n + i] = ff[i] * ff[i];
            }
        }
        Ok(Self {
            n,
            log_weights,
            ff_sq,
            projection: projection.matrix().clone(),
        })
    }

    /// For each `i`, the minimum over assignments of the spins outside `mask`
    /// of `E[(Ff)_i² | those spins]`.
    fn min_conditional(&self, mask: u64) -> Vec<f64> {
        let n = self.n;
        let mut mins = vec![f64::INFINITY; n];
        let subsets: Vec<u64> = {
            let mut v = vec![0u64];
            let mut s = mask;
            while s != 0 {
                v.push(s);
                s = (s - 1) & mask;
            }
            v
        };
        for base in (0..(1u64 << n)).filter(|c| c & mask == 0) {
            let lws: Vec<f64> = subsets.iter().map(|&s| self.log_weights[(base | s) as usize]).collect();
            let lse = linalg::log_sum_exp(&lws);
            let mut e = vec![0.0; n];
            for (&s, lw) in subsets.iter().zip(&lws) {
                let w = (lw - lse).exp();
                let code = (base | s) as usize;
                for (i, ei) in e.iter_mut().enumerate() {
                    *ei += w * self.ff_sq[code * n + i];
                }
            }
            for i in 0..n {
                mins[i] = mins[i].min(e[i]);
            }
        }
        mins
    }

    fn weighted_column(&self, i: usize, weights: &[(usize, f64)]) -> f64 {
        weights.iter().map(|&(j, w)| self.projection[(i, j)] * w).sum()
    }
}

fn top_edge_weight_map(g: &WeightedHypergraph) -> BTreeMap<Vec<usize>, f64> {
    g.top_edges().map(|e| (e.vertices().to_vec(), e.weight())).collect()
}

/// For a conditioning set `z` (sorted), the list of `(j, w_{z∪{j}})` over top edges.
fn completions(top: &BTreeMap<Vec<usize>, f64>, z: &[usize]) -> Vec<(usize, f64)> {
    top.iter()
        .filter(|(e, _)| z.iter().all(|v| e.binary_search(v).is_ok()))
        .filter_map(|(e, &w)| e.iter().find(|v| z.binary_search(v).is_err()).map(|&j| (j, w)))
        .collect()
}

fn record(check: &mut ExactInequalityCheck, lhs: f64, rhs: f64) {
    check.checked += 1;
    let slack = lhs - rhs;
    if slack < -1e-12 * rhs.abs().max(1.0) {
        check.violations += 1;
    }
    check.min_slack = check.min_slack.min(slack);
    if rhs > 0.0 {
        check.min_ratio = check.min_ratio.min(lhs / rhs);
    }
}

fn empty_check() -> ExactInequalityCheck {
    ExactInequalityCheck {
        checked: 0,
        violations: 0,
        min_slack: f64::INFINITY,
        min_ratio: f64::INFINITY,
    }
}

/// Exhaustive check of
/// `E[(Ff)_i² | y_{−z}] ≥ e^{−(B+MΘ)(m−1)}/2^{m−1} · (Σ_j F_ij w_{j,z})²`
/// for every vertex `i`, every `(m−1)`-subset `z` of a top edge and every
/// assignment of the spins outside `z`.
pub fn verify_parity_lemma(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    truth: &ModelParameters,
    bounds: &ParameterBox,
    cap: usize,
    cond_tol: f64,
) -> Result<ExactInequalityCheck> {
    let table = ExactTable::build(g, x, truth, cap, cond_tol)?;
    let factor = parity_factor(bounds, g.m());
    let top = top_edge_weight_map(g);
    let tuples: BTreeSet<Vec<usize>> = top
        .keys()
        .flat_map(|e| (0..e.len()).map(move |skip| e.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &v)| v).collect()))
        .collect();
    let mut check = empty_check();
    for z in &tuples {
        let mask = z.iter().fold(0u64, |acc, &v| acc | 1 << v);
        let lhs = table.min_conditional(mask);
        let weights = completions(&top, z);
        for (i, &l) in lhs.iter().enumerate() {
            let s = table.weighted_column(i, &weights);
            record(&mut check, l, factor * s * s);
        }
    }
    Ok(check)
}

/// Exhaustive check of the single-vertex version
/// `E[(Ff)_i² | y_{−v}] ≥ e^{−(B+MΘ)(m−1)}/2^{m−1} · (Σ_j F_ij w_{{v,z}∪{j}})²`
/// for every vertex `v` of a top edge and `(m−2)`-tuple `z` completing it.
pub fn verify_tower_corollary(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    truth: &ModelParameters,
    bounds: &ParameterBox,
    cap: usize,
    cond_tol: f64,
) -> Result<ExactInequalityCheck> {
    let table = ExactTable::build(g, x, truth, cap, cond_tol)?;
    let factor = parity_factor(bounds, g.m());
    let top = top_edge_weight_map(g);
    let mut by_vertex: BTreeMap<usize, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for e in top.keys() {
        for &skip in e {
            // conditioning tuple {v} ∪ z is e without one vertex
            let rest: Vec<usize> = e.iter().copied().filter(|&u| u != skip).collect();
            for &v in &rest {
                by_vertex.entry(v).or_default().insert(rest.clone());
            }
        }
    }
    let mut check = empty_check();
    for (v, tuples) in by_vertex {
        let lhs = table.min_conditional(1u64 << v);
        for z in tuples {
            let weights = completions(&top, &z);
            for (i, &l) in lhs.iter().enumerate() {
                let s = table.weighted_column(i, &weights);
                record(&mut check, l, factor * s * s);
            }
        }
    }
    Ok(check)
}
