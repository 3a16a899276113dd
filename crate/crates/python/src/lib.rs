//! Python bindings. Parameters cross the boundary as `(theta: list[float],
//! beta: float)`, spin configurations as `list[int]` of ±1.

use hyperising::diagnostics::{self, AssumptionThresholds};
use hyperising::experiments::{self, ExperimentSpec};
use hyperising::optimizer;
use hyperising::pseudolikelihood;
use hyperising::sampler::{self, ChainConfig, ExactSampler, ScanOrder};
use hyperising::{
    covariates, io, model, CovariateMatrix, Error, ModelParameters, ParameterBox, PgdConfig, SpinConfiguration,
    WeightedHypergraph,
};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for hyperising::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn params(theta: Vec<f64>, beta: f64) -> PyResult<ModelParameters> {
    ModelParameters::new(theta, beta).py()
}

fn spins(y: Vec<i8>) -> PyResult<SpinConfiguration> {
    SpinConfiguration::new(y).py()
}

/// Key-value report as a dict, with booleans and numbers converted.
fn kv_dict<'py>(py: Python<'py>, pairs: &[(String, String)]) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (k, v) in pairs {
        match v.as_str() {
            "true" => d.set_item(k, true)?,
            "false" => d.set_item(k, false)?,
            _ => match v.parse::<f64>() {
                Ok(f) => d.set_item(k, f)?,
                Err(_) => d.set_item(k, v)?,
            },
        }
    }
    Ok(d)
}

/// Weighted hypergraph with edges of cardinality `2..=m`.
#[pyclass(name = "Hypergraph", frozen)]
struct PyHypergraph {
    inner: WeightedHypergraph,
}

#[pymethods]
impl PyHypergraph {
    #[new]
    fn new(n: usize, m: usize, edges: Vec<(Vec<usize>, f64)>) -> PyResult<Self> {
        Ok(Self {
            inner: WeightedHypergraph::new(n, m, edges).py()?,
        })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::read_hypergraph(path).py()?,
        })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::parse_hypergraph(text).py()?,
        })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        io::write_hypergraph(path, &self.inner).py()
    }

    fn to_text(&self) -> String {
        io::format_hypergraph(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    fn edges(&self) -> Vec<(Vec<usize>, f64)> {
        self.inner.edges().iter().map(|e| (e.vertices().to_vec(), e.weight())).collect()
    }

    fn degrees(&self) -> Vec<f64> {
        self.inner.degrees()
    }

    fn max_degree(&self) -> f64 {
        self.inner.max_degree()
    }

    fn top_mass(&self) -> f64 {
        self.inner.top_mass()
    }

    /// Rescale weights so the largest vertex degree is at most `cap`.
    fn normalize_degrees(&self, cap: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.normalize_degrees(cap).py()?,
        })
    }

    /// `f(y)`.
    fn f_value(&self, y: Vec<i8>) -> PyResult<f64> {
        model::f_value(&self.inner, &spins(y)?).py()
    }

    /// `f_i(y)` for every vertex.
    fn local_fields(&self, y: Vec<i8>) -> PyResult<Vec<f64>> {
        model::local_fields(&self.inner, &spins(y)?).py()
    }

    fn __repr__(&self) -> String {
        format!("Hypergraph(n={}, m={}, edges={})", self.inner.n(), self.inner.m(), self.inner.num_edges())
    }
}

/// Covariate matrix, one row per vertex.
#[pyclass(name = "Covariates", frozen)]
struct PyCovariates {
    inner: CovariateMatrix,
}

#[pymethods]
impl PyCovariates {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: CovariateMatrix::from_rows(&rows).py()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, n=None))]
    fn read(path: &str, n: Option<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: io::read_covariates(path, n).py()?,
        })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        io::write_covariates(path, &self.inner).py()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.inner.n()).map(|i| self.inner.row(i)).collect()
    }

    fn max_row_norm(&self) -> f64 {
        self.inner.max_row_norm()
    }

    /// Extreme eigenvalues `(λ_min, λ_max)` of `(1/n) XᵀX`.
    fn covariance_spectrum(&self) -> PyResult<(f64, f64)> {
        covariates::covariance_spectrum(&self.inner).py()
    }

    fn __repr__(&self) -> String {
        format!("Covariates(n={}, d={})", self.inner.n(), self.inner.d())
    }
}

/// Feasible set `|β| ≤ B, ‖θ‖₂ ≤ Θ` together with the covariate bound `M`.
#[pyclass(name = "ParameterBox", frozen)]
struct PyParameterBox {
    inner: ParameterBox,
}

#[pymethods]
impl PyParameterBox {
    #[new]
    fn new(big_b: f64, big_theta: f64, big_m: f64) -> PyResult<Self> {
        Ok(Self {
            inner: ParameterBox::new(big_b, big_theta, big_m).py()?,
        })
    }

    #[getter]
    fn big_b(&self) -> f64 {
        self.inner.big_b
    }

    #[getter]
    fn big_theta(&self) -> f64 {
        self.inner.big_theta
    }

    #[getter]
    fn big_m(&self) -> f64 {
        self.inner.big_m
    }

    /// `B + MΘ`.
    fn field_bound(&self) -> f64 {
        self.inner.field_bound()
    }

    /// `M² + 1`.
    fn smoothness(&self) -> f64 {
        self.inner.smoothness()
    }

    #[pyo3(signature = (theta, beta, tol=0.0))]
    fn contains(&self, theta: Vec<f64>, beta: f64, tol: f64) -> PyResult<bool> {
        Ok(self.inner.contains(&params(theta, beta)?, tol))
    }

    /// Euclidean projection onto the box.
    fn project(&self, theta: Vec<f64>, beta: f64) -> PyResult<(Vec<f64>, f64)> {
        let p = optimizer::project_box(&params(theta, beta)?, &self.inner);
        Ok((p.theta, p.beta))
    }

    fn __repr__(&self) -> String {
        format!(
            "ParameterBox(B={}, Theta={}, M={})",
            self.inner.big_b, self.inner.big_theta, self.inner.big_m
        )
    }
}

/// Independent Glauber chains, one per returned configuration.
#[pyfunction]
#[pyo3(signature = (g, x, theta, beta, seed=0, burn_in=200, chains=1, scan="random"))]
#[allow(clippy::too_many_arguments)]
fn sample_glauber(
    py: Python<'_>,
    g: &PyHypergraph,
    x: &PyCovariates,
    theta: Vec<f64>,
    beta: f64,
    seed: u64,
    burn_in: usize,
    chains: usize,
    scan: &str,
) -> PyResult<Vec<Vec<i8>>> {
    let scan_order = match scan {
        "random" => ScanOrder::Random,
        "sequential" => ScanOrder::Sequential,
        other => return Err(PyValueError::new_err(format!("unknown scan order `{other}`"))),
    };
    let p = params(theta, beta)?;
    let cfg = ChainConfig {
        seed,
        burn_in_sweeps: burn_in,
        scan_order,
    };
    let out = py.detach(|| sampler::sample_glauber_chains(&g.inner, &x.inner, &p, &cfg, chains)).py()?;
    Ok(out.into_iter().map(|y| y.as_slice().to_vec()).collect())
}

/// Exact draws from the enumerated distribution (small `n` only).
#[pyfunction]
#[pyo3(signature = (g, x, theta, beta, seed=0, count=1))]
fn sample_exact(
    g: &PyHypergraph,
    x: &PyCovariates,
    theta: Vec<f64>,
    beta: f64,
    seed: u64,
    count: usize,
) -> PyResult<Vec<Vec<i8>>> {
    let p = params(theta, beta)?;
    let exact = ExactSampler::from_parts(&g.inner, &x.inner, &p).py()?;
    let mut rng = sampler::rng_from_seed(seed);
    Ok((0..count).map(|_| exact.draw(&mut rng).as_slice().to_vec()).collect())
}

/// `log Z` by enumeration.
#[pyfunction]
fn log_partition(g: &PyHypergraph, x: &PyCovariates, theta: Vec<f64>, beta: f64) -> PyResult<f64> {
    model::log_partition(&g.inner, &x.inner, &params(theta, beta)?).py()
}

/// Log-pseudolikelihood per vertex.
#[pyfunction]
fn lpl(g: &PyHypergraph, x: &PyCovariates, y: Vec<i8>, theta: Vec<f64>, beta: f64) -> PyResult<f64> {
    pseudolikelihood::lpl(&g.inner, &x.inner, &params(theta, beta)?, &spins(y)?).py()
}

/// Gradient of the log-pseudolikelihood, `θ` coordinates then `β`.
#[pyfunction]
fn lpl_gradient(g: &PyHypergraph, x: &PyCovariates, y: Vec<i8>, theta: Vec<f64>, beta: f64) -> PyResult<Vec<f64>> {
    pseudolikelihood::lpl_gradient(&g.inner, &x.inner, &params(theta, beta)?, &spins(y)?).py()
}

/// Negative Hessian of the log-pseudolikelihood.
#[pyfunction]
fn lpl_neg_hessian(
    g: &PyHypergraph,
    x: &PyCovariates,
    y: Vec<i8>,
    theta: Vec<f64>,
    beta: f64,
) -> PyResult<Vec<Vec<f64>>> {
    let h = pseudolikelihood::lpl_neg_hessian(&g.inner, &x.inner, &params(theta, beta)?, &spins(y)?).py()?;
    Ok((0..h.nrows()).map(|i| h.row(i).iter().copied().collect()).collect())
}

/// Maximum pseudolikelihood estimate by projected gradient ascent from zero.
#[pyfunction]
#[pyo3(signature = (g, x, y, bounds, step=None, tol=None, max_iters=None, trace=false))]
#[allow(clippy::too_many_arguments)]
fn estimate<'py>(
    py: Python<'py>,
    g: &PyHypergraph,
    x: &PyCovariates,
    y: Vec<i8>,
    bounds: &PyParameterBox,
    step: Option<f64>,
    tol: Option<f64>,
    max_iters: Option<usize>,
    trace: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let y = spins(y)?;
    let mut cfg = PgdConfig::new(bounds.inner, g.inner.n());
    cfg.step_size = step.unwrap_or(cfg.step_size);
    cfg.grad_tol = tol.unwrap_or(cfg.grad_tol);
    cfg.max_iters = max_iters.unwrap_or(cfg.max_iters);
    cfg.record_trajectory = trace;
    let init = ModelParameters::zeros(x.inner.d());
    let r = py
        .detach(|| optimizer::estimate_mple(&g.inner, &x.inner, &y, &cfg, &init))
        .py()?;
    let d = PyDict::new(py);
    d.set_item("theta", r.estimate.theta)?;
    d.set_item("beta", r.estimate.beta)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("final_grad_norm", r.final_grad_norm)?;
    d.set_item("final_lpl", r.final_lpl)?;
    d.set_item("converged", r.converged)?;
    d.set_item("stop_reason", r.stop_reason.as_str())?;
    if let Some(t) = r.trajectory {
        let rows: Vec<(usize, f64, f64)> = t.iter().map(|p| (p.iteration, p.lpl, p.grad_norm)).collect();
        d.set_item("trajectory", rows)?;
    }
    Ok(d)
}

/// Assumption checks as a dict; `theta`/`beta` add the box check on the truth.
#[pyfunction]
#[pyo3(signature = (g, x, bounds, theta=None, beta=None))]
fn validate_assumptions<'py>(
    py: Python<'py>,
    g: &PyHypergraph,
    x: &PyCovariates,
    bounds: &PyParameterBox,
    theta: Option<Vec<f64>>,
    beta: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let truth = match (theta, beta) {
        (Some(t), Some(b)) => Some(params(t, b)?),
        (None, None) => None,
        _ => return Err(PyValueError::new_err("pass both theta and beta or neither")),
    };
    let r = diagnostics::validate_assumptions(
        &g.inner,
        &x.inner,
        &bounds.inner,
        truth.as_ref(),
        &AssumptionThresholds::default(),
    )
    .py()?;
    kv_dict(py, &r.key_values())
}

/// Reduction matrix, index selection and strong-concavity bound statistics.
#[pyfunction]
fn concavity_diagnostics<'py>(
    py: Python<'py>,
    g: &PyHypergraph,
    x: &PyCovariates,
    bounds: &PyParameterBox,
) -> PyResult<Bound<'py, PyDict>> {
    let tol = covariates::default_cond_tol(&x.inner).py()?;
    let c = diagnostics::concavity_diagnostics(&g.inner, &x.inner, &bounds.inner, tol).py()?;
    kv_dict(py, &c.key_values())
}

/// Grid-search maximum likelihood estimate by enumeration (`d ≤ 2`, small `n`).
#[pyfunction]
#[pyo3(signature = (g, x, y, bounds, grid_step=0.05))]
fn mle_oracle(
    g: &PyHypergraph,
    x: &PyCovariates,
    y: Vec<i8>,
    bounds: &PyParameterBox,
    grid_step: f64,
) -> PyResult<(Vec<f64>, f64)> {
    let p = experiments::mle_oracle(&g.inner, &x.inner, &spins(y)?, &bounds.inner, grid_step).py()?;
    Ok((p.theta, p.beta))
}

/// Run a sweep from a TOML spec. Returns `(summary, rows)`.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, spec_toml: &str) -> PyResult<(Bound<'py, PyDict>, Vec<Bound<'py, PyDict>>)> {
    let spec = ExperimentSpec::from_toml(spec_toml).py()?;
    let sweep = py.detach(|| experiments::run_sweep(&spec)).py()?;
    let summary = kv_dict(py, &sweep.summary_key_values())?;
    let rows = sweep
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("n", r.n)?;
            d.set_item("trial", r.trial)?;
            d.set_item("seed", r.seed)?;
            d.set_item("error", r.error)?;
            d.set_item("iterations", r.iterations)?;
            d.set_item("stop_reason", r.stop_reason.clone())?;
            d.set_item("included", r.included)?;
            d.set_item("failure", r.failure.clone())?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok((summary, rows))
}

#[pymodule]
fn pyhyperising(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHypergraph>()?;
    m.add_class::<PyCovariates>()?;
    m.add_class::<PyParameterBox>()?;
    m.add_function(wrap_pyfunction!(sample_glauber, m)?)?;
    m.add_function(wrap_pyfunction!(sample_exact, m)?)?;
    m.add_function(wrap_pyfunction!(log_partition, m)?)?;
    m.add_function(wrap_pyfunction!(lpl, m)?)?;
    m.add_function(wrap_pyfunction!(lpl_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(lpl_neg_hessian, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(validate_assumptions, m)?)?;
    m.add_function(wrap_pyfunction!(concavity_diagnostics, m)?)?;
    m.add_function(wrap_pyfunction!(mle_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
