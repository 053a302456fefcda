//! Helpers shared by the integration tests.
#![allow(dead_code)]

use matchdecomp::engine::{run, DecompositionResult, EngineConfig, Termination};
use matchdecomp::graph::WeightedGraph;
use matchdecomp::instances::{generate_seeded, make_topology, Instance, TopologyKind};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random graph on at most `max_nodes` nodes with at most `max_edges`
/// edges, weights uniform in `[lo, hi]`.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, max_edges: usize, lo: f64, hi: f64) -> WeightedGraph {
    let n = rng.random_range(2..=max_nodes);
    let density = rng.random_range(0.2..=1.0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if edges.len() < max_edges && rng.random_bool(density) {
                edges.push((u, v, rng.random_range(lo..=hi)));
            }
        }
    }
    WeightedGraph::new(n, edges).unwrap()
}

/// Corpus member `k` of a topology, generated from seed `k`.
pub fn corpus(kind: TopologyKind, n: usize, count: usize) -> Vec<Instance> {
    let t = make_topology(kind, n, None).unwrap();
    (0..count).map(|k| generate_seeded(&t, k, k as u64).unwrap()).collect()
}

pub fn solve(inst: &Instance, cfg: &EngineConfig) -> DecompositionResult {
    run(&inst.demand, cfg).unwrap_or_else(|e| panic!("{}: {e}", inst.id))
}

pub fn errors(r: &DecompositionResult) -> Vec<f64> {
    r.decomposition.trace.iter().map(|p| p.error).collect()
}

/// Value of `trace` at iteration `k`, holding the final value afterwards.
pub fn at(trace: &[f64], k: usize) -> f64 {
    trace[k.min(trace.len() - 1)]
}

/// First iteration at which the sampled run `ext` has a larger error than
/// the plain run `plain`. A run that stopped holds its final error; a
/// converged sampled run has no later iterates to compare.
pub fn dominance_violation(ext: &DecompositionResult, plain: &DecompositionResult) -> Option<usize> {
    let (a, b) = (errors(ext), errors(plain));
    let horizon = if ext.terminated == Termination::Converged {
        a.len()
    } else {
        a.len().max(b.len())
    };
    (0..horizon).find(|&k| at(&a, k) > at(&b, k))
}

pub fn mean(xs: &[usize]) -> f64 {
    xs.iter().sum::<usize>() as f64 / xs.len() as f64
}

pub fn median(xs: &[usize]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_unstable();
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m] as f64
    } else {
        (v[m - 1] + v[m]) as f64 / 2.0
    }
}

/// QAOA state from explicit matrices: the full `2^N × 2^N` mixer built as
/// a Kronecker product, applied after a diagonal cost unitary whose entries
/// come from direct cost evaluation.
pub fn dense_qaoa_state(
    model: &matchdecomp::qubo::QuboModel,
    gamma: f64,
    beta: f64,
) -> Vec<num_complex::Complex64> {
    use matchdecomp::bits::Bitstring;
    use matchdecomp::qubo::qubo_cost;
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64;

    let nq = model.num_vars();
    let dim = 1usize << nq;
    let (c, s) = (beta.cos(), beta.sin());
    let x_rot = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, -s),
            Complex64::new(c, 0.0),
        ],
    );
    let mut mixer = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for _ in 0..nq {
        mixer = x_rot.kronecker(&mixer);
    }
    let amp = 1.0 / (dim as f64).sqrt();
    let phased = DVector::from_iterator(
        dim,
        (0..dim).map(|x| {
            let cost = qubo_cost(model, &Bitstring::from_index(x as u64, nq)).unwrap();
            Complex64::from_polar(amp, -gamma * cost)
        }),
    );
    (mixer * phased).iter().copied().collect()
}

/// Pearson goodness-of-fit p-value of observed counts against expected
/// probabilities. Cells with expected count below 5 are pooled.
pub fn chi_square_p_value(counts: &[u64], probabilities: &[f64]) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let total: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&o, &p) in counts.iter().zip(probabilities) {
        let e = p * total as f64;
        if e < 5.0 {
            pooled_obs += o as f64;
            pooled_exp += e;
        } else {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pooled_exp >= 5.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    } else {
        assert!(pooled_obs <= 5.0 + 10.0 * pooled_exp, "{pooled_obs} draws in cells expecting {pooled_exp}");
    }
    let dof = cells.saturating_sub(1).max(1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// Whether every edge with a neighbour weighs less than the effective
/// pair penalty. Under this condition dropping any conflicting bit lowers
/// the cost, so the QUBO minimum is attained on a matching.
pub fn penalty_dominates(model: &matchdecomp::qubo::QuboModel) -> bool {
    (0..model.num_vars()).all(|j| model.adjacency().of(j).is_empty() || model.weights()[j] < model.lambda_eff())
}

/// Exhaustive QUBO minimum (first minimizer in index order).
pub fn qubo_ground_state(model: &matchdecomp::qubo::QuboModel) -> (matchdecomp::bits::Bitstring, f64) {
    use matchdecomp::bits::Bitstring;
    let nq = model.num_vars();
    (0..1u64 << nq)
        .map(|x| {
            let b = Bitstring::from_index(x, nq);
            let c = matchdecomp::qubo::qubo_cost(model, &b).unwrap();
            (b, c)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}
