mod common;

use common::*;
use hyperising::diagnostics::{self, AssumptionThresholds};
use hyperising::experiments::{self, ExperimentSpec, Family, GeneratorParams, TruthDraw};
use hyperising::io;
use hyperising::optimizer::{self, PgdConfig};
use hyperising::sampler::{self, ChainConfig, SamplerChoice, ScanOrder};
use hyperising::{covariates, CovariateMatrix, ModelParameters, ParameterBox, SpinConfiguration, WeightedHypergraph};
use rand::Rng;

#[test]
fn independent_sites_after_one_sweep() {
    let x = CovariateMatrix::from_rows(&[vec![0.8], vec![-0.4], vec![0.1], vec![1.2], vec![-1.0]]).unwrap();
    let g = WeightedHypergraph::new(5, 2, vec![(vec![0, 1], 0.5), (vec![2, 3], -0.5)]).unwrap();
    let p = ModelParameters::new(vec![0.7], 0.0).unwrap();
    let chains = 100_000;
    let cfg = ChainConfig {
        seed: 17,
        burn_in_sweeps: 1,
        scan_order: ScanOrder::Sequential,
    };
    let states = sampler::sample_glauber_chains(&g, &x, &p, &cfg, chains).unwrap();
    for i in 0..5 {
        let mean = states.iter().map(|y| y.value(i)).sum::<f64>() / chains as f64;
        let expected = (0.7 * x.get(i, 0)).tanh();
        let sigma = ((1.0 - expected * expected) / chains as f64).sqrt();
        assert!((mean - expected).abs() <= 3.0 * sigma, "site {i}: {mean} vs {expected}");
    }
}

#[test]
fn glauber_is_reproducible() {
    let mut r = rng(5);
    let g = random_hypergraph(&mut r, 30, 3, 30);
    let x = random_covariates(&mut r, 30, 2);
    let p = ModelParameters::new(vec![0.3, -0.2], 0.4).unwrap();
    let cfg = ChainConfig {
        seed: 99,
        burn_in_sweeps: 50,
        scan_order: ScanOrder::Random,
    };
    let a = sampler::sample_glauber(&g, &x, &p, &cfg, sampler::InitialState::Random).unwrap();
    let b = sampler::sample_glauber(&g, &x, &p, &cfg, sampler::InitialState::Random).unwrap();
    assert_eq!(a, b);
}

#[test]
fn tower_corollary_matches_parity_lemma_for_pairs() {
    for seed in 0..20 {
        let mut r = rng(70 + seed);
        let n = r.random_range(4..=9);
        let g = random_hypergraph(&mut r, n, 2, n);
        let x = random_covariates(&mut r, n, 1);
        let b = box_for(&x, 1.0, 1.0);
        let truth = random_in_box(&mut r, 1, &b, 0.9);
        let tol = covariates::default_cond_tol(&x).unwrap();
        let tower = diagnostics::verify_tower_corollary(&g, &x, &truth, &b, 22, tol).unwrap();
        let parity = diagnostics::verify_parity_lemma(&g, &x, &truth, &b, 22, tol).unwrap();
        assert_eq!(tower.violations, 0);
        assert_eq!(parity.violations, 0);
    }
}

/// Same generator as the small exact-enumeration instances elsewhere.
fn small_instance(seed: u64) -> (WeightedHypergraph, CovariateMatrix, ModelParameters, ParameterBox) {
    let mut r = rng(8_000 + seed);
    let n = r.random_range(4..=10);
    let d = r.random_range(1..=2);
    let m = r.random_range(2..=4);
    let edges = r.random_range(2..=2 * n);
    let g = random_hypergraph(&mut r, n, m, edges);
    let x = random_covariates(&mut r, n, d);
    let bounds = box_for(&x, r.random_range(0.1..2.0), r.random_range(0.1..2.0));
    let truth = random_in_box(&mut r, d, &bounds, 0.95);
    (g, x, truth, bounds)
}

/// Conditioning on every spin but one is finer than the conditioning in
/// `verify_parity_lemma`, so the pointwise bound can fail for m ≥ 3.
#[test]
fn tower_corollary_can_fail_pointwise_for_triples() {
    let (g, x, truth, b) = small_instance(COUNTEREXAMPLE_SEED);
    assert!(g.m() >= 3);
    let tol = covariates::default_cond_tol(&x).unwrap();
    let tower = diagnostics::verify_tower_corollary(&g, &x, &truth, &b, 22, tol).unwrap();
    let parity = diagnostics::verify_parity_lemma(&g, &x, &truth, &b, 22, tol).unwrap();
    assert!(tower.violations > 0);
    assert_eq!(parity.violations, 0);
}

const COUNTEREXAMPLE_SEED: u64 = 13;

#[test]
fn footnote_frobenius_floor_on_generated_instances() {
    for (family, m) in [(Family::RandomUniformM, 3), (Family::GroupBlocks, 3), (Family::Pairwise, 2)] {
        let spec = spec(family, m, vec![100]);
        for trial in 0..3 {
            let inst = experiments::generate_instance(&spec, 100, spec.trial_seed(100, trial)).unwrap();
            let tol = covariates::default_cond_tol(&inst.covariates).unwrap();
            let c = diagnostics::concavity_diagnostics(&inst.graph, &inst.covariates, &spec.truth_box, tol).unwrap();
            assert!(c.footnote_ok, "{family:?}: {} < {}", c.fa_frobenius_sq, c.footnote_rhs);
            assert!(c.selection.is_bijection());
        }
    }
}

#[test]
fn reduction_frobenius_mass_does_not_degrade_with_n() {
    let spec = spec(Family::RandomUniformM, 3, vec![100, 200, 400, 800]);
    let ratio = |n: usize| {
        let inst = experiments::generate_instance(&spec, n, spec.trial_seed(n, 0)).unwrap();
        diagnostics::build_reduction_matrix(&inst.graph).unwrap().frobenius_sq / n as f64
    };
    let base = ratio(100);
    assert!(base > 0.0);
    for n in [200, 400, 800] {
        assert!(ratio(n) >= base / 2.0, "n = {n}");
    }
}

#[test]
fn concavity_bound_per_vertex_stays_positive() {
    let spec = spec(Family::RandomUniformM, 3, vec![100, 200, 400]);
    let per_vertex = |n: usize| {
        let inst = experiments::generate_instance(&spec, n, spec.trial_seed(n, 0)).unwrap();
        diagnostics::concavity_lower_bound(&inst.graph, &inst.covariates, &spec.truth_box).unwrap() / n as f64
    };
    let base = per_vertex(100);
    assert!(base > 0.0);
    for n in [200, 400] {
        assert!(per_vertex(n) >= base / 2.0, "n = {n}");
    }
}

#[test]
fn mle_oracle_grid_refinement_is_stable() {
    let mut r = rng(31);
    let g = random_hypergraph(&mut r, 8, 3, 8);
    let x = random_covariates(&mut r, 8, 1);
    let b = box_for(&x, 1.0, 1.0);
    let truth = random_in_box(&mut r, 1, &b, 0.5);
    let y = sampler::sample_exact(&g, &x, &truth, 3).unwrap();
    let coarse = experiments::mle_oracle(&g, &x, &y, &b, 0.1).unwrap();
    let fine = experiments::mle_oracle(&g, &x, &y, &b, 0.05).unwrap();
    for (a, c) in coarse.to_vec().iter().zip(fine.to_vec()) {
        assert!((a - c).abs() <= 0.1 + 1e-9);
    }
}

#[test]
fn pure_logistic_sweep_has_root_n_rate() {
    let mut spec = spec(Family::Pairwise, 2, vec![200, 800, 3200]);
    spec.generator.weight_scale = 0.0;
    spec.truth_draw = TruthDraw::FixedBeta {
        beta: 0.0,
        fraction: 0.8,
    };
    spec.thresholds.mass_floor = 0.0;
    spec.trials_per_n = 30;
    let sweep = experiments::run_sweep(&spec).unwrap();
    let slope = sweep.slope.unwrap();
    assert!((-0.65..=-0.35).contains(&slope), "slope {slope}");
    let med: Vec<f64> = sweep.sizes.iter().map(|s| s.median_error.unwrap()).collect();
    assert!(med.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn sweep_files_round_trip() {
    let spec = spec(Family::GroupBlocks, 3, vec![30, 60]);
    let sweep = experiments::run_sweep(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    sweep.write_rows_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + sweep.rows.len());
    let kv = io::parse_key_values(&sweep.format_summary()).unwrap();
    assert!(kv.iter().any(|(k, _)| k == "slope"));
}

#[test]
fn file_formats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(2);
    let g = random_hypergraph(&mut r, 12, 3, 10);
    let x = random_covariates(&mut r, 12, 3);
    let y = random_spins(&mut r, 12);
    let p = ModelParameters::new(vec![0.1, -0.2, 0.3], 0.4).unwrap();
    io::write_hypergraph(dir.path().join("g.txt"), &g).unwrap();
    io::write_covariates(dir.path().join("x.csv"), &x).unwrap();
    io::write_samples(dir.path().join("y.txt"), std::slice::from_ref(&y)).unwrap();
    io::write_parameters(dir.path().join("p.txt"), &p).unwrap();
    let g2 = io::read_hypergraph(dir.path().join("g.txt")).unwrap();
    assert_eq!(g2.edges(), g.edges());
    let x2 = io::read_covariates(dir.path().join("x.csv"), Some(12)).unwrap();
    assert_eq!(x2.matrix(), x.matrix());
    assert!(io::read_covariates(dir.path().join("x.csv"), Some(11)).is_err());
    assert_eq!(io::read_sample(dir.path().join("y.txt"), false, 12).unwrap(), y);
    assert_eq!(io::read_parameters(dir.path().join("p.txt")).unwrap(), p);
}

#[test]
fn estimate_recovers_truth_on_a_large_instance() {
    let spec = spec(Family::RandomUniformM, 3, vec![4000]);
    let inst = experiments::generate_instance(&spec, 4000, 123).unwrap();
    let y = experiments::draw_sample(&inst, &spec.sampler, 9).unwrap();
    let cfg = PgdConfig::new(spec.truth_box, 4000);
    let est = optimizer::estimate_mple(&inst.graph, &inst.covariates, &y, &cfg, &ModelParameters::zeros(2)).unwrap();
    assert!(est.converged);
    assert!(est.estimate.distance(&inst.truth) < 0.25, "{:?} vs {:?}", est.estimate, inst.truth);
}

#[test]
fn assumption_report_on_constant_covariates() {
    let x = CovariateMatrix::constant(4, 1, 1.0).unwrap();
    let g = WeightedHypergraph::new(4, 2, vec![(vec![0, 1], 0.5)]).unwrap();
    let r = diagnostics::validate_assumptions(
        &g,
        &x,
        &ParameterBox::new(1.0, 1.0, 1.0).unwrap(),
        None,
        &AssumptionThresholds::default(),
    )
    .unwrap();
    assert_eq!(r.lambda_min_q, 1.0);
    assert_eq!(r.f_inf_norm.map(|v| (v * 1e12).round() / 1e12), Some(1.5));
    assert!(!r.f_norm_ok);
    let y = SpinConfiguration::new(vec![1, -1, 1, 1]).unwrap();
    assert!(io::format_sample(&y).starts_with("1 -1"));
}

fn spec(family: Family, m: usize, n_values: Vec<usize>) -> ExperimentSpec {
    ExperimentSpec {
        family,
        n_values,
        d: 2,
        m,
        trials_per_n: 3,
        master_seed: 11,
        truth_box: ParameterBox::new(1.0, 1.0, 2f64.sqrt()).unwrap(),
        truth_draw: TruthDraw::UniformInBox { fraction: 0.8 },
        sampler: SamplerChoice::Glauber(ChainConfig::default()),
        generator: GeneratorParams::default(),
        thresholds: AssumptionThresholds::default(),
        slope_range: [-0.65, -0.35],
    }
}
