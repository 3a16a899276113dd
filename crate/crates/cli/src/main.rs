//! Command-line front end: generate instances, sample, estimate, diagnose and
//! run parameter-recovery sweeps.
//!
//! Exit codes: 0 on success, 1 when the run completed but its check failed
//! (estimation hit the iteration cap, a hard assumption failed, or the sweep
//! slope fell outside its range), 2 on usage or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperising::diagnostics::{self, AssumptionThresholds};
use hyperising::experiments::{self, ExperimentSpec, Family, GeneratorParams, TruthDraw};
use hyperising::optimizer::{self, StopReason};
use hyperising::sampler::{self, ChainConfig, ExactSampler, SamplerChoice, ScanOrder};
use hyperising::{covariates, io, model, CovariateMatrix, ModelParameters, ParameterBox, PgdConfig, WeightedHypergraph};

#[derive(Parser)]
#[command(name = "hyperising", version, about = "Hypergraph Ising models with covariate external fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic hypergraph, covariate matrix and true parameters.
    Generate(GenerateArgs),
    /// Draw samples from the model.
    Sample(SampleArgs),
    /// Maximum pseudolikelihood estimate from one sample.
    Estimate(EstimateArgs),
    /// Check modelling assumptions and report concavity bounds.
    Diagnose(DiagnoseArgs),
    /// Run a parameter-recovery sweep described by a TOML spec.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct ModelFiles {
    /// Hypergraph text file.
    #[arg(long)]
    graph: PathBuf,
    /// Covariate CSV, one row per vertex.
    #[arg(long)]
    covariates: PathBuf,
}

impl ModelFiles {
    fn load(&self) -> Result<(WeightedHypergraph, CovariateMatrix)> {
        let g = io::read_hypergraph(&self.graph).with_context(|| format!("reading {}", self.graph.display()))?;
        let x = io::read_covariates(&self.covariates, Some(g.n()))
            .with_context(|| format!("reading {}", self.covariates.display()))?;
        Ok((g, x))
    }
}

#[derive(Args)]
struct BoxArgs {
    /// Bound on |β|.
    #[arg(long = "B")]
    big_b: f64,
    /// Bound on ‖θ‖₂.
    #[arg(long = "Theta")]
    big_theta: f64,
    /// Bound on covariate row norms; defaults to the largest row norm.
    #[arg(long = "M")]
    big_m: Option<f64>,
}

impl BoxArgs {
    fn resolve(&self, x: &CovariateMatrix) -> Result<ParameterBox> {
        let m = self.big_m.unwrap_or_else(|| x.max_row_norm());
        Ok(ParameterBox::new(self.big_b, self.big_theta, m)?)
    }
}

#[derive(Args)]
struct ParamArgs {
    /// Parameter file with `theta = ...` and `beta = ...` lines.
    #[arg(long, conflicts_with_all = ["theta", "beta"])]
    params: Option<PathBuf>,
    /// θ as a comma- or space-separated list.
    #[arg(long, allow_hyphen_values = true, requires = "beta")]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "theta")]
    beta: Option<f64>,
}

impl ParamArgs {
    fn load(&self) -> Result<Option<ModelParameters>> {
        if let Some(path) = &self.params {
            return Ok(Some(
                io::read_parameters(path).with_context(|| format!("reading {}", path.display()))?,
            ));
        }
        match (&self.theta, self.beta) {
            (Some(t), Some(b)) => Ok(Some(ModelParameters::new(io::parse_f64_list(t)?, b)?)),
            _ => Ok(None),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    RandomUniformM,
    GroupBlocks,
    Pairwise,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::RandomUniformM => Family::RandomUniformM,
            FamilyArg::GroupBlocks => Family::GroupBlocks,
            FamilyArg::Pairwise => Family::Pairwise,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanArg {
    Sequential,
    Random,
}

impl From<ScanArg> for ScanOrder {
    fn from(s: ScanArg) -> Self {
        match s {
            ScanArg::Sequential => ScanOrder::Sequential,
            ScanArg::Random => ScanOrder::Random,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "random-uniform-m")]
    family: FamilyArg,
    #[arg(short, long)]
    n: usize,
    #[arg(short, long, default_value_t = 2)]
    d: usize,
    /// Largest edge cardinality.
    #[arg(short, long, default_value_t = 3)]
    m: usize,
    #[arg(long = "B", default_value_t = 1.0)]
    big_b: f64,
    #[arg(long = "Theta", default_value_t = 1.0)]
    big_theta: f64,
    #[arg(long = "M")]
    big_m: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for graph.txt, covariates.csv and truth.txt.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    files: ModelFiles,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Glauber sweeps before a chain's state is reported.
    #[arg(long, default_value_t = 200)]
    burn_in: usize,
    /// Number of independent samples, one chain each.
    #[arg(long, default_value_t = 1)]
    chains: usize,
    #[arg(long, value_enum, default_value = "random")]
    scan: ScanArg,
    /// Draw from the enumerated distribution instead of running Glauber dynamics.
    #[arg(long)]
    exact: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    files: ModelFiles,
    /// Sample file; the first configuration is used.
    #[arg(long)]
    sample: PathBuf,
    /// Read spins as 0/1 instead of -1/+1.
    #[arg(long)]
    zero_one: bool,
    #[command(flatten)]
    bounds: BoxArgs,
    /// Step size; defaults to 1/(M²+1).
    #[arg(long)]
    step: Option<f64>,
    /// Gradient-norm tolerance; defaults to 1/√n.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Write the per-iteration trajectory to this CSV file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    files: ModelFiles,
    #[command(flatten)]
    bounds: BoxArgs,
    /// True parameters, checked against the box when given.
    #[command(flatten)]
    truth: ParamArgs,
    /// Add reduction-matrix, index-selection and `FA` statistics.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    degree_cap: Option<f64>,
    #[arg(long)]
    mass_floor: Option<f64>,
    #[arg(long)]
    spectrum_floor: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment spec.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Sample(a) => sample(a),
        Command::Estimate(a) => estimate(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn generate(a: GenerateArgs) -> Result<bool> {
    let big_m = a.big_m.unwrap_or((a.d as f64).sqrt());
    let spec = ExperimentSpec {
        family: a.family.into(),
        n_values: vec![a.n],
        d: a.d,
        m: a.m,
        trials_per_n: 1,
        master_seed: a.seed,
        truth_box: ParameterBox::new(a.big_b, a.big_theta, big_m)?,
        truth_draw: TruthDraw::UniformInBox { fraction: 0.8 },
        sampler: SamplerChoice::Glauber(ChainConfig::default()),
        generator: GeneratorParams::default(),
        thresholds: AssumptionThresholds::default(),
        slope_range: [-0.65, -0.35],
    };
    let inst = experiments::generate_instance(&spec, a.n, spec.trial_seed(a.n, 0))?;
    fs::create_dir_all(&a.out)?;
    io::write_hypergraph(a.out.join("graph.txt"), &inst.graph)?;
    io::write_covariates(a.out.join("covariates.csv"), &inst.covariates)?;
    io::write_parameters(a.out.join("truth.txt"), &inst.truth)?;
    Ok(true)
}

fn sample(a: SampleArgs) -> Result<bool> {
    let (g, x) = a.files.load()?;
    let Some(p) = a.params.load()? else {
        bail!("parameters required: pass --params or --theta and --beta");
    };
    let samples = if a.exact {
        let exact = ExactSampler::from_parts(&g, &x, &p)?;
        (0..a.chains as u64)
            .map(|k| exact.draw(&mut sampler::rng_from_seed(sampler::derive_seed(a.seed, k))))
            .collect()
    } else {
        let cfg = ChainConfig {
            seed: a.seed,
            burn_in_sweeps: a.burn_in,
            scan_order: a.scan.into(),
        };
        sampler::sample_glauber_chains(&g, &x, &p, &cfg, a.chains)?
    };
    let text: String = samples.iter().map(|y| io::format_sample(y) + "\n").collect();
    emit(a.out.as_deref(), &text)?;
    Ok(true)
}

fn estimate(a: EstimateArgs) -> Result<bool> {
    let (g, x) = a.files.load()?;
    let y = io::read_sample(&a.sample, a.zero_one, g.n()).with_context(|| format!("reading {}", a.sample.display()))?;
    let bounds = a.bounds.resolve(&x)?;
    let mut cfg = PgdConfig::new(bounds, g.n());
    if let Some(s) = a.step {
        cfg.step_size = s;
    }
    if let Some(t) = a.tol {
        cfg.grad_tol = t;
    }
    if let Some(k) = a.max_iters {
        cfg.max_iters = k;
    }
    cfg.record_trajectory = a.trace.is_some();
    let report = optimizer::estimate_mple(&g, &x, &y, &cfg, &ModelParameters::zeros(x.d()))?;
    if let (Some(path), Some(traj)) = (&a.trace, &report.trajectory) {
        io::write_trajectory_csv(path, traj)?;
    }
    let join = |v: &[f64]| v.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
    let kv = [
        ("theta", join(&report.estimate.theta)),
        ("beta", report.estimate.beta.to_string()),
        ("iterations", report.iterations.to_string()),
        ("final_grad_norm", report.final_grad_norm.to_string()),
        ("final_lpl", report.final_lpl.to_string()),
        ("converged", report.converged.to_string()),
        ("stop_reason", report.stop_reason.as_str().to_string()),
        ("step_size", cfg.step_size.to_string()),
        ("grad_tol", cfg.grad_tol.to_string()),
        ("max_iters", cfg.max_iters.to_string()),
    ];
    emit(a.out.as_deref(), &io::format_key_values(&kv))?;
    Ok(report.stop_reason != StopReason::MaxIterations)
}

fn diagnose(a: DiagnoseArgs) -> Result<bool> {
    let (g, x) = a.files.load()?;
    let bounds = a.bounds.resolve(&x)?;
    let truth = a.truth.load()?;
    let mut thresholds = AssumptionThresholds::default();
    if let Some(v) = a.degree_cap {
        thresholds.degree_cap = v;
    }
    if let Some(v) = a.mass_floor {
        thresholds.mass_floor = v;
    }
    if let Some(v) = a.spectrum_floor {
        thresholds.spectrum_floor = v;
    }
    let report = diagnostics::validate_assumptions(&g, &x, &bounds, truth.as_ref(), &thresholds)?;
    let mut kv = report.key_values();
    kv.push(("field_bound".into(), bounds.field_bound().to_string()));
    kv.push(("smoothness".into(), bounds.smoothness().to_string()));
    if let Some(p) = &truth {
        if g.n() <= model::DEFAULT_ENUMERATION_CAP {
            kv.push(("log_partition".into(), model::log_partition(&g, &x, p)?.to_string()));
        }
    }
    if a.full {
        let tol = covariates::default_cond_tol(&x)?;
        let c = diagnostics::concavity_diagnostics(&g, &x, &bounds, tol)?;
        for (k, v) in c.key_values() {
            if !kv.iter().any(|(seen, _)| *seen == k) {
                kv.push((k, v));
            }
        }
    }
    emit(a.out.as_deref(), &io::format_key_values(&kv))?;
    Ok(report.hard_ok())
}

fn experiment(a: ExperimentArgs) -> Result<bool> {
    let spec = ExperimentSpec::read(&a.spec).with_context(|| format!("reading {}", a.spec.display()))?;
    let sweep = experiments::run_sweep(&spec)?;
    let trials = a.out.join("trials");
    fs::create_dir_all(&trials)?;
    sweep.write_rows_csv(a.out.join("rows.csv"))?;
    fs::write(a.out.join("summary.txt"), sweep.format_summary())?;
    for row in &sweep.rows {
        let mut kv = row.report.clone();
        if let Some(f) = &row.failure {
            kv.push(("failure".into(), f.clone()));
        }
        kv.push(("included".into(), row.included.to_string()));
        fs::write(trials.join(format!("n{}_t{}.txt", row.n, row.trial)), io::format_key_values(&kv))?;
    }
    eprint!("{}", sweep.format_summary());
    Ok(sweep.slope_ok())
}
