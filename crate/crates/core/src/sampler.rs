//! Drawing the single observed configuration: exact inverse-CDF sampling over
//! the enumerated distribution for small `n`, Glauber dynamics otherwise.
//!
//! All randomness comes from [`ChainRng`] (ChaCha8) seeded with a 64-bit seed.
//! Independent streams are derived with [`derive_seed`] (SplitMix64 mixing of
//! parent seed and stream index), so adding chains never perturbs existing ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariates::CovariateMatrix;
use crate::error::{Error, Result};
use crate::hypergraph::WeightedHypergraph;
use crate::model::{self, IsingModel, ModelParameters, SpinConfiguration, DEFAULT_ENUMERATION_CAP};

pub type ChainRng = ChaCha8Rng;

/// Name recorded in experiment metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), seed_from_u64, SplitMix64 stream derivation";

pub fn rng_from_seed(seed: u64) -> ChainRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer applied to `parent ⊕ golden·(stream+1)`.
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    let mut z = parent ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScanOrder {
    Sequential,
    #[default]
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub seed: u64,
    /// One sweep is `n` single-site updates.
    pub burn_in_sweeps: usize,
    #[serde(default)]
    pub scan_order: ScanOrder,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            burn_in_sweeps: 200,
            scan_order: ScanOrder::Random,
        }
    }
}

/// Inverse-CDF sampler over the full enumerated distribution.
#[derive(Debug, Clone)]
pub struct ExactSampler {
    n: usize,
    log_partition: f64,
    cumulative: Vec<f64>,
}

impl ExactSampler {
    pub fn new(model: &IsingModel<'_>, cap: usize) -> Result<Self> {
        let table = model.log_weight_table(cap)?;
        let log_partition = crate::linalg::log_sum_exp(&table);
        let mut acc = 0.0;
        let cumulative = table
            .iter()
            .map(|lw| {
                acc += (lw - log_partition).exp();
                acc
            })
            .collect();
        Ok(Self {
            n: model.n(),
            log_partition,
            cumulative,
        })
    }

    pub fn from_parts(g: &WeightedHypergraph, x: &CovariateMatrix, p: &ModelParameters) -> Result<Self> {
        Self::new(&IsingModel::new(g, x, p)?, DEFAULT_ENUMERATION_CAP)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Exact probability of the configuration with bit code `code`.
    pub fn probability(&self, code: u64) -> f64 {
        let k = code as usize;
        let lo = if k == 0 { 0.0 } else { self.cumulative[k - 1] };
        self.cumulative[k] - lo
    }

    pub fn draw_code<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = *self.cumulative.last().expect("non-empty table");
        let u = rng.random::<f64>() * total;
        let k = self.cumulative.partition_point(|&c| c <= u);
        k.min(self.cumulative.len() - 1) as u64
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> SpinConfiguration {
        SpinConfiguration::from_bits(self.draw_code(rng), self.n)
    }
}

/// One exact draw from the model.
pub fn sample_exact(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    p: &ModelParameters,
    seed: u64,
) -> Result<SpinConfiguration> {
    let sampler = ExactSampler::from_parts(g, x, p)?;
    Ok(sampler.draw(&mut rng_from_seed(seed)))
}

/// How samples are produced when a procedure needs many of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerChoice {
    Exact,
    Glauber(ChainConfig),
}

impl SamplerChoice {
    /// Exact enumeration when `n` is within the cap, Glauber with `cfg` otherwise.
    pub fn auto(n: usize, cfg: ChainConfig) -> Self {
        if n <= DEFAULT_ENUMERATION_CAP {
            SamplerChoice::Exact
        } else {
            SamplerChoice::Glauber(cfg)
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SamplerChoice::Exact => "exact".to_string(),
            SamplerChoice::Glauber(c) => format!(
                "glauber(burn_in_sweeps={}, scan_order={:?})",
                c.burn_in_sweeps, c.scan_order
            ),
        }
    }
}

/// Draw `count` independent samples and map each through `stat`.
///
/// Exact draws share one ChaCha8 stream seeded with `seed`; Glauber draws use
/// one chain per sample seeded with `derive_seed(seed, k)`.
pub fn sample_statistics<T, F>(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    p: &ModelParameters,
    choice: &SamplerChoice,
    count: usize,
    seed: u64,
    stat: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&SpinConfiguration) -> Result<T> + Sync,
{
    match choice {
        SamplerChoice::Exact => {
            let sampler = ExactSampler::from_parts(g, x, p)?;
            let mut rng = rng_from_seed(seed);
            let draws: Vec<SpinConfiguration> = (0..count).map(|_| sampler.draw(&mut rng)).collect();
            draws.par_iter().map(&stat).collect()
        }
        SamplerChoice::Glauber(cfg) => {
            let model = IsingModel::new(g, x, p)?;
            (0..count as u64)
                .into_par_iter()
                .map(|k| {
                    let mut chain =
                        GlauberChain::new(model.clone(), InitialState::Random, derive_seed(seed, k))?;
                    chain.run(cfg.burn_in_sweeps, cfg.scan_order);
                    stat(chain.state())
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Random,
    Given(SpinConfiguration),
}

/// Single-site heat-bath chain with incrementally maintained local fields `f_i`.
#[derive(Debug, Clone)]
pub struct GlauberChain<'a> {
    model: IsingModel<'a>,
    y: SpinConfiguration,
    fields: Vec<f64>,
    rng: ChainRng,
    updates: u64,
}

impl<'a> GlauberChain<'a> {
    pub fn new(model: IsingModel<'a>, init: InitialState, seed: u64) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let y = match init {
            InitialState::Random => SpinConfiguration::random(model.n(), &mut rng),
            InitialState::Given(y) => y,
        };
        let fields = model::local_fields(model.graph(), &y)?;
        Ok(Self {
            model,
            y,
            fields,
            rng,
            updates: 0,
        })
    }

    pub fn state(&self) -> &SpinConfiguration {
        &self.y
    }

    pub fn into_state(self) -> SpinConfiguration {
        self.y
    }

    pub fn local_fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Resample `y_i` from its conditional law.
    pub fn update_site(&mut self, i: usize) {
        let z = self.model.total_field_with(i, self.fields[i]);
        let p_plus = model::logistic(2.0 * z);
        let new: i8 = if self.rng.random::<f64>() < p_plus { 1 } else { -1 };
        self.updates += 1;
        if new != self.y.spin(i) {
            self.y.set(i, new);
            let g = self.model.graph();
            for &id in g.incident_edges(i) {
                let e = g.edge(id);
                let sign: i8 = e.vertices().iter().map(|&v| self.y.spin(v)).product();
                let prod = e.weight() * sign as f64;
                for &j in e.vertices() {
                    if j != i {
                        // the edge's contribution to f_j changed sign
                        self.fields[j] += 2.0 * prod * self.y.value(j);
                    }
                }
            }
        }
    }

    pub fn sweep(&mut self, order: ScanOrder) {
        let n = self.model.n();
        match order {
            ScanOrder::Sequential => (0..n).for_each(|i| self.update_site(i)),
            ScanOrder::Random => {
                for _ in 0..n {
                    let i = self.rng.random_range(0..n);
                    self.update_site(i);
                }
            }
        }
    }

    pub fn run(&mut self, sweeps: usize, order: ScanOrder) {
        for _ in 0..sweeps {
            self.sweep(order);
        }
    }
}

/// State after `cfg.burn_in_sweeps` sweeps of Glauber dynamics.
pub fn sample_glauber(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    p: &ModelParameters,
    cfg: &ChainConfig,
    init: InitialState,
) -> Result<SpinConfiguration> {
    if let InitialState::Given(y) = &init {
        if y.len() != g.n() {
            return Err(Error::DimensionMismatch(format!(
                "initial state has length {}, hypergraph has n = {}",
                y.len(),
                g.n()
            )));
        }
    }
    let model = IsingModel::new(g, x, p)?;
    let mut chain = GlauberChain::new(model, init, cfg.seed)?;
    chain.run(cfg.burn_in_sweeps, cfg.scan_order);
    Ok(chain.into_state())
}

/// `chains` independent random-start chains; chain `k` uses `derive_seed(cfg.seed, k)`.
pub fn sample_glauber_chains(
    g: &WeightedHypergraph,
    x: &CovariateMatrix,
    p: &ModelParameters,
    cfg: &ChainConfig,
    chains: usize,
) -> Result<Vec<SpinConfiguration>> {
    let model = IsingModel::new(g, x, p)?;
    (0..chains as u64)
        .into_par_iter()
        .map(|k| {
            let mut chain = GlauberChain::new(model.clone(), InitialState::Random, derive_seed(cfg.seed, k))?;
            chain.run(cfg.burn_in_sweeps, cfg.scan_order);
            Ok(chain.into_state())
        })
        .collect()
}
