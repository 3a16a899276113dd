//! Estimation of hypergraph Ising models with covariate-driven external
//! fields from a single sample.
//!
//! The model draws `y ∈ {-1,+1}^n` with probability proportional to
//! `exp(Σ_i (θᵀx_i) y_i + β f(y))`, where `f(y) = Σ_e w_e Π_{v∈e} y_v` is
//! the multilinear interaction polynomial of a weighted hypergraph whose edges
//! have between 2 and `m` vertices. Parameters `(θ, β)` are recovered by
//! maximizing the log-pseudolikelihood with projected gradient ascent over the
//! box `|β| ≤ B, ‖θ‖₂ ≤ Θ`.
//!
//! Module map:
//! - [`hypergraph`]: weighted hypergraph, incidence, degree statistics
//! - [`covariates`]: feature matrix, covariance spectrum, projection matrix `F`
//! - [`model`]: spins, parameters, `f`, local fields, conditionals, exact `log Z`
//! - [`sampler`]: exact enumeration sampler and Glauber dynamics
//! - [`pseudolikelihood`]: LPL, gradient, Hessian and the sandwich check
//! - [`optimizer`]: projected gradient ascent
//! - [`diagnostics`]: assumption checks and strong-concavity machinery
//! - [`experiments`]: synthetic instances, parameter-recovery sweeps, exact MLE oracle
//! - [`io`]: text formats for hypergraphs, covariates, samples and reports

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covariates;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod hypergraph;
pub mod io;
pub mod linalg;
pub mod model;
pub mod optimizer;
pub mod pseudolikelihood;
pub mod sampler;

pub use covariates::{CovariateMatrix, ProjectionMatrix};
pub use error::{Error, Result};
pub use hypergraph::{Edge, WeightedHypergraph};
pub use model::{ModelParameters, ParameterBox, SpinConfiguration};
pub use optimizer::{EstimationReport, PgdConfig};
pub use pseudolikelihood::LplEvaluation;
pub use sampler::{ChainConfig, ScanOrder};
