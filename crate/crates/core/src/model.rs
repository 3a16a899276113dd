//! The hypergraph Ising measure
//! `Pr[y] ∝ exp(Σ_i (θᵀx_i) y_i + β f(y))` with `f(y) = Σ_e w_e Π_{v∈e} y_v`.

use rand::Rng;

use crate::covariates::CovariateMatrix;
use crate::error::{Error, Result};
use crate::hypergraph::WeightedHypergraph;
use crate::linalg::LogSumExp;

/// Largest `n` for which exact enumeration over `2^n` configurations is allowed.
pub const DEFAULT_ENUMERATION_CAP: usize = 22;

/// A configuration `y ∈ {-1,+1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(&s) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpin(s as i64));
        }
        Ok(Self(spins))
    }

    pub fn from_values(values: &[i64]) -> Result<Self> {
        values
            .iter()
            .map(|&v| match v {
                1 => Ok(1),
                -1 => Ok(-1),
                other => Err(Error::InvalidSpin(other)),
            })
            .collect::<Result<Vec<i8>>>()
            .map(Self)
    }

    pub fn all(n: usize, spin: i8) -> Result<Self> {
        Self::new(vec![spin; n])
    }

    /// Bit `i` of `code` set means `y_i = +1`.
    pub fn from_bits(code: u64, n: usize) -> Self {
        Self((0..n).map(|i| if code >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn to_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0u64, |acc, (i, _)| acc | 1 << i)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spin(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn value(&self, i: usize) -> f64 {
        self.0[i] as f64
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| s as f64).collect()
    }

    pub fn set(&mut self, i: usize, spin: i8) {
        debug_assert!(spin == 1 || spin == -1);
        self.0[i] = spin;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.flip(i);
        out
    }
}

/// `(θ, β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub theta: Vec<f64>,
    pub beta: f64,
}

impl ModelParameters {
    pub fn new(theta: Vec<f64>, beta: f64) -> Result<Self> {
        if !beta.is_finite() || theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        Ok(Self { theta, beta })
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            theta: vec![0.0; d],
            beta: 0.0,
        }
    }

    pub fn d(&self) -> usize {
        self.theta.len()
    }

    pub fn theta_norm(&self) -> f64 {
        self.theta.iter().map(|t| t * t).sum::<f64>().sqrt()
    }

    /// Flattened `(θ_1, …, θ_d, β)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.theta.clone();
        v.push(self.beta);
        v
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match v.split_last() {
            Some((&beta, theta)) => Self::new(theta.to_vec(), beta),
            None => Err(Error::DimensionMismatch("empty parameter vector".into())),
        }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.to_vec()
            .iter()
            .zip(other.to_vec())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Feasible region `{|β| ≤ B, ‖θ‖₂ ≤ Θ}` together with the feature bound `M`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParameterBox {
    pub big_b: f64,
    pub big_theta: f64,
    pub big_m: f64,
}

impl ParameterBox {
    pub fn new(big_b: f64, big_theta: f64, big_m: f64) -> Result<Self> {
        let b = Self {
            big_b,
            big_theta,
            big_m,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("B", self.big_b), ("Theta", self.big_theta), ("M", self.big_m)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive and finite")));
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: &ModelParameters, tol: f64) -> bool {
        p.beta.abs() <= self.big_b + tol && p.theta_norm() <= self.big_theta + tol
    }

    /// Strict interior membership, as required of the true parameters.
    pub fn contains_strictly(&self, p: &ModelParameters) -> bool {
        p.beta.abs() < self.big_b && p.theta_norm() < self.big_theta
    }

    /// `B + MΘ`, the largest local field magnitude under bounded degree.
    pub fn field_bound(&self) -> f64 {
        self.big_b + self.big_m * self.big_theta
    }

    /// Smoothness constant `M² + 1` of `-LPL`.
    pub fn smoothness(&self) -> f64 {
        self.big_m * self.big_m + 1.0
    }
}

fn check_len(g: &WeightedHypergraph, y: &SpinConfiguration) -> Result<()> {
    if y.len() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "configuration has length {}, hypergraph has n = {}",
            y.len(),
            g.n()
        )));
    }
    Ok(())
}

fn monomial(g: &WeightedHypergraph, y: &[i8], edge: usize) -> f64 {
    let e = g.edge(edge);
    let sign: i8 = e.vertices().iter().map(|&v| y[v]).product();
    e.weight() * sign as f64
}

/// `f(y) = Σ_e w_e Π_{v∈e} y_v`.
pub fn f_value(g: &WeightedHypergraph, y: &SpinConfiguration) -> Result<f64> {
    check_len(g, y)?;
    Ok((0..g.num_edges()).map(|e| monomial(g, y.as_slice(), e)).sum())
}

pub(crate) fn f_partial_unchecked(g: &WeightedHypergraph, y: &[i8], i: usize) -> f64 {
    g.incident_edges(i)
        .iter()
        .map(|&id| {
            let e = g.edge(id);
            let sign: i8 = e
                .vertices()
                .iter()
                .filter(|&&v| v != i)
                .map(|&v| y[v])
                .product();
            e.weight() * sign as f64
        })
        .sum()
}

/// `f_i(y_{-i}) = ∂f/∂y_i = Σ_{e∋i} w_e Π_{v∈e, v≠i} y_v`; independent of `y_i`.
pub fn f_partial(g: &WeightedHypergraph, y: &SpinConfiguration, i: usize) -> Result<f64> {
    check_len(g, y)?;
    g.check_vertex(i)?;
    Ok(f_partial_unchecked(g, y.as_slice(), i))
}

/// The vector `(f_1(y_{-1}), …, f_n(y_{-n}))`.
pub fn local_fields(g: &WeightedHypergraph, y: &SpinConfiguration) -> Result<Vec<f64>> {
    check_len(g, y)?;
    Ok((0..g.n())
        .map(|i| f_partial_unchecked(g, y.as_slice(), i))
        .collect())
}

/// Model bound to a hypergraph with the external fields `θᵀx_i` cached.
#[derive(Debug, Clone)]
pub struct IsingModel<'a> {
    graph: &'a WeightedHypergraph,
    external: Vec<f64>,
    beta: f64,
}

impl<'a> IsingModel<'a> {
    pub fn new(g: &'a WeightedHypergraph, x: &CovariateMatrix, p: &ModelParameters) -> Result<Self> {
        if x.n() != g.n() {
            return Err(Error::DimensionMismatch(format!(
                "covariates have {} rows, hypergraph has n = {}",
                x.n(),
                g.n()
            )));
        }
        Ok(Self {
            graph: g,
            external: x.linear_predictor(&p.theta)?,
            beta: p.beta,
        })
    }

    /// Model with explicitly supplied external fields `h_i`.
    pub fn with_fields(g: &'a WeightedHypergraph, external: Vec<f64>, beta: f64) -> Result<Self> {
        if external.len() != g.n() {
            return Err(Error::DimensionMismatch(format!(
                "{} external fields for n = {}",
                external.len(),
                g.n()
            )));
        }
        Ok(Self {
            graph: g,
            external,
            beta,
        })
    }

    pub fn graph(&self) -> &'a WeightedHypergraph {
        self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn external_fields(&self) -> &[f64] {
        &self.external
    }

    pub(crate) fn total_field_with(&self, i: usize, f_i: f64) -> f64 {
        self.external[i] + self.beta * f_i
    }

    /// `θᵀx_i + β f_i(y_{-i})`.
    pub fn total_field(&self, y: &SpinConfiguration, i: usize) -> Result<f64> {
        Ok(self.total_field_with(i, f_partial(self.graph, y, i)?))
    }

    /// `Pr[y_i = s | y_{-i}]`.
    pub fn conditional_prob(&self, y: &SpinConfiguration, i: usize, s: i8) -> Result<f64> {
        if s != 1 && s != -1 {
            return Err(Error::InvalidSpin(s as i64));
        }
        let z = self.total_field(y, i)?;
        Ok(logistic(2.0 * z * s as f64))
    }

    /// Unnormalized log-probability `Σ_i (θᵀx_i) y_i + β f(y)`.
    pub fn log_weight(&self, y: &SpinConfiguration) -> Result<f64> {
        let f = f_value(self.graph, y)?;
        let linear: f64 = self
            .external
            .iter()
            .zip(y.as_slice())
            .map(|(h, &s)| h * s as f64)
            .sum();
        Ok(linear + self.beta * f)
    }

    /// Exact `ln Z` by Gray-code enumeration.
    pub fn log_partition(&self, cap: usize) -> Result<f64> {
        check_enumerable(self.n(), cap)?;
        let mut acc = LogSumExp::default();
        self.for_each_log_weight(|_, lw| acc.push(lw));
        Ok(acc.value())
    }

    /// Visit every configuration (as a bit code) with its log-weight, in Gray-code order.
    pub fn for_each_log_weight(&self, mut visit: impl FnMut(u64, f64)) {
        let n = self.n();
        let start = SpinConfiguration::all(n, -1).expect("valid spins");
        let mut lw = self.log_weight(&start).expect("length matches");
        gray_code_walk(self.graph, |code, step, y| {
            if let Some((i, f_i)) = step {
                lw += 2.0 * y.value(i) * self.total_field_with(i, f_i);
            }
            visit(code, lw);
        });
    }

    /// Log-weights of all `2^n` configurations indexed by bit code.
    pub fn log_weight_table(&self, cap: usize) -> Result<Vec<f64>> {
        check_enumerable(self.n(), cap)?;
        let mut table = vec![0.0; 1usize << self.n()];
        self.for_each_log_weight(|code, lw| table[code as usize] = lw);
        Ok(table)
    }
}

pub(crate) fn check_enumerable(n: usize, cap: usize) -> Result<()> {
    if n > cap || n >= 63 {
        return Err(Error::TooLarge { n, cap });
    }
    Ok(())
}

/// Walk all `2^n` configurations starting from all `-1`, flipping one spin per step.
///
/// `visit(code, step, y)` receives the bit code of `y` and, for every step after
/// the first, the flipped vertex together with its `f_i`, which does not depend
/// on the flipped spin itself.
pub fn gray_code_walk(
    g: &WeightedHypergraph,
    mut visit: impl FnMut(u64, Option<(usize, f64)>, &SpinConfiguration),
) {
    let n = g.n();
    let mut y = SpinConfiguration::all(n, -1).expect("valid spins");
    let mut code = 0u64;
    visit(code, None, &y);
    for k in 1u64..(1u64 << n) {
        let i = k.trailing_zeros() as usize;
        let f_i = f_partial_unchecked(g, y.as_slice(), i);
        y.flip(i);
        code ^= 1 << i;
        visit(code, Some((i, f_i)), &y);
    }
}

pub fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `Pr[y_i = s | y_{-i}] = 1 / (1 + exp(-2(θᵀx_i + β f_i) s))`.
pub fn conditional_prob(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    p: &ModelParameters,
    y: &SpinConfiguration,
    i: usize,
    s: i8,
) -> Result<f64> {
    check_len(g, y)?;
    IsingModel::new(g, x, p)?.conditional_prob(y, i, s)
}

pub fn log_weight(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    p: &ModelParameters,
    y: &SpinConfiguration,
) -> Result<f64> {
    IsingModel::new(g, x, p)?.log_weight(y)
}

/// Exact `ln Z(θ, β)` with the default enumeration cap.
pub fn log_partition(g: &WeightedHypergraph, x: &CovariateMatrix, p: &ModelParameters) -> Result<f64> {
    IsingModel::new(g, x, p)?.log_partition(DEFAULT_ENUMERATION_CAP)
}
