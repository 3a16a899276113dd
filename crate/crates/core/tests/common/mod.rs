#![allow(dead_code)]

use hyperising::{CovariateMatrix, ModelParameters, ParameterBox, SpinConfiguration, WeightedHypergraph};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random edges of cardinality `2..=m` (at least one of size `m`), signed
/// weights, then degree-normalized to 1.
pub fn random_hypergraph(rng: &mut ChaCha8Rng, n: usize, m: usize, edges: usize) -> WeightedHypergraph {
    let mut list: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut verts: Vec<usize> = (0..n).collect();
    for k in 0..edges.max(1) {
        let size = if k == 0 { m } else { rng.random_range(2..=m) };
        verts.shuffle(rng);
        let mut e = verts[..size].to_vec();
        e.sort_unstable();
        if list.iter().any(|(f, _)| *f == e) {
            continue;
        }
        let w = rng.random_range(0.1..1.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        list.push((e, w));
    }
    WeightedHypergraph::new(n, m, list)
        .unwrap()
        .normalize_degrees(1.0)
        .unwrap()
}

pub fn random_covariates(rng: &mut ChaCha8Rng, n: usize, d: usize) -> CovariateMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    CovariateMatrix::from_rows(&rows).unwrap()
}

pub fn random_spins(rng: &mut ChaCha8Rng, n: usize) -> SpinConfiguration {
    SpinConfiguration::random(n, rng)
}

/// A point of the box, at most `fraction` of the way to its boundary.
pub fn random_in_box(rng: &mut ChaCha8Rng, d: usize, b: &ParameterBox, fraction: f64) -> ModelParameters {
    let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt().max(1e-12);
    let r = rng.random_range(0.0..fraction) * b.big_theta;
    let theta = theta.into_iter().map(|t| t * r / norm).collect();
    let beta = rng.random_range(-fraction..fraction) * b.big_b;
    ModelParameters::new(theta, beta).unwrap()
}

/// Box with `M` equal to the largest covariate row norm.
pub fn box_for(x: &CovariateMatrix, big_b: f64, big_theta: f64) -> ParameterBox {
    ParameterBox::new(big_b, big_theta, x.max_row_norm()).unwrap()
}

/// `f(y) = Σ_e w_e Π_{v∈e} y_v` straight from the definition.
pub fn brute_f(g: &WeightedHypergraph, y: &[i8]) -> f64 {
    g.edges()
        .iter()
        .map(|e| e.weight() * e.vertices().iter().map(|&v| y[v] as f64).product::<f64>())
        .sum()
}

/// Unnormalized log-probability straight from the definition.
pub fn brute_log_weight(g: &WeightedHypergraph, x: &CovariateMatrix, p: &ModelParameters, y: &[i8]) -> f64 {
    let ext: f64 = (0..x.n())
        .map(|i| (0..x.d()).map(|k| p.theta[k] * x.get(i, k)).sum::<f64>() * y[i] as f64)
        .sum();
    ext + p.beta * brute_f(g, y)
}

/// Spins of the configuration with bit code `code` (bit set means +1).
pub fn spins_of(code: u64, n: usize) -> Vec<i8> {
    (0..n).map(|i| if code >> i & 1 == 1 { 1 } else { -1 }).collect()
}

/// Exact probabilities of all `2^n` configurations, by code.
pub fn brute_distribution(g: &WeightedHypergraph, x: &CovariateMatrix, p: &ModelParameters) -> Vec<f64> {
    let n = g.n();
    let lw: Vec<f64> = (0..1u64 << n)
        .map(|c| brute_log_weight(g, x, p, &spins_of(c, n)))
        .collect();
    let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lw.iter().map(|v| (v - max).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// Cyclic Jacobi eigenvalue iteration, ascending.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Greedy selection recomputed from scratch at every step on an explicitly
/// zeroed copy of the matrix.
pub fn naive_index_selection(w: &DMatrix<f64>) -> Vec<usize> {
    let n = w.nrows();
    let mut work = w.clone();
    let mut done_rows = vec![false; n];
    let mut h = vec![usize::MAX; n];
    for _ in 0..n {
        let norms: Vec<f64> = (0..n).map(|i| work.row(i).iter().map(|v| v * v).sum::<f64>()).collect();
        let mut best = None;
        for i in 0..n {
            if done_rows[i] {
                continue;
            }
            match best {
                None => best = Some(i),
                Some(b) if norms[i] > norms[b] => best = Some(i),
                _ => {}
            }
        }
        let i = best.unwrap();
        let used: Vec<bool> = (0..n).map(|j| h.contains(&j)).collect();
        let mut col = None;
        for j in 0..n {
            if used[j] {
                continue;
            }
            match col {
                None => col = Some(j),
                Some(b) if work[(i, j)].abs() > work[(i, b)].abs() => col = Some(j),
                _ => {}
            }
        }
        let j = col.unwrap();
        h[i] = j;
        done_rows[i] = true;
        for k in 0..n {
            work[(i, k)] = 0.0;
            work[(k, j)] = 0.0;
        }
    }
    h
}
