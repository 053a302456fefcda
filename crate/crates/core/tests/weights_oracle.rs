use matchdecomp::graph::{residual_norm_sq, DemandMatrix, Matching, WeightedGraph};
use matchdecomp::matching::enumerate_matchings;
use matchdecomp::weights::{
    solve_cardinality_ls, solve_simplex_ls, SolverConfig, SumConstraint, WeightProblem,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random substochastic target on `n` nodes plus `count` distinct matchings.
fn random_problem(seed: u64, n: usize, count: usize) -> (DemandMatrix, Vec<Matching>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    let complete = WeightedGraph::new(n, edges.iter().map(|&(u, v)| (u, v, 1.0))).unwrap();
    let mut all: Vec<Matching> = enumerate_matchings(&complete)
        .unwrap()
        .into_iter()
        .filter(|m| !m.is_empty())
        .collect();
    all.shuffle(&mut rng);
    let matchings: Vec<Matching> = all.into_iter().take(count).collect();

    // Target: a random subset of edges with weights scaled to be substochastic.
    let mut raw: Vec<(usize, usize, f64)> = edges
        .iter()
        .filter_map(|&(u, v)| {
            rng.random_bool(0.6).then(|| (u, v, rng.random_range(0.05..1.0)))
        })
        .collect();
    if raw.is_empty() {
        raw.push((0, 1, 0.5));
    }
    let mut row = vec![0.0; n];
    for &(u, v, w) in &raw {
        row[u] += w;
        row[v] += w;
    }
    let scale = row.iter().copied().fold(0.0, f64::max).max(1.0);
    let demand = DemandMatrix::new(
        WeightedGraph::new(n, raw.into_iter().map(|(u, v, w)| (u, v, w / scale))).unwrap(),
    )
    .unwrap();
    (demand, matchings)
}

fn objective(d: &DemandMatrix, ms: &[Matching], u: &[f64]) -> f64 {
    let entries: Vec<(Matching, f64)> = ms.iter().cloned().zip(u.iter().copied()).collect();
    residual_norm_sq(d, &entries)
}

/// Enumerates every face of the feasible polytope and solves the equality
/// constrained least-squares problem on it.
fn face_oracle(d: &DemandMatrix, ms: &[Matching], sum: SumConstraint) -> f64 {
    let mut ids = std::collections::BTreeMap::new();
    for (e, _) in d.graph().iter() {
        let k = ids.len();
        ids.insert(e, k);
    }
    for m in ms {
        for e in m.edges() {
            let k = ids.len();
            ids.entry(*e).or_insert(k);
        }
    }
    let rows = ids.len();
    let mut a = DMatrix::<f64>::zeros(rows, ms.len());
    for (j, m) in ms.iter().enumerate() {
        for e in m.edges() {
            a[(ids[e], j)] = 1.0;
        }
    }
    let mut dv = DVector::<f64>::zeros(rows);
    for (e, w) in d.graph().iter() {
        dv[ids[&e]] = w;
    }

    let k = ms.len();
    let mut best = if sum == SumConstraint::AtMostOne {
        objective(d, ms, &vec![0.0; k])
    } else {
        f64::INFINITY
    };
    for mask in 1u32..(1 << k) {
        let free: Vec<usize> = (0..k).filter(|&j| mask >> j & 1 == 1).collect();
        let af = DMatrix::from_fn(rows, free.len(), |r, c| a[(r, free[c])]);
        let mut candidates = Vec::new();
        if sum == SumConstraint::AtMostOne {
            candidates.push(af.clone().svd(true, true).solve(&dv, 1e-12).unwrap());
        }
        // Sum pinned to one: minimize ‖d − A_F u‖² subject to 1ᵀu = 1 via KKT.
        let f = free.len();
        let mut kkt = DMatrix::<f64>::zeros(f + 1, f + 1);
        kkt.view_mut((0, 0), (f, f)).copy_from(&(af.transpose() * &af));
        for i in 0..f {
            kkt[(i, f)] = 1.0;
            kkt[(f, i)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(f + 1);
        rhs.rows_mut(0, f).copy_from(&(af.transpose() * &dv));
        rhs[f] = 1.0;
        let sol = kkt.svd(true, true).solve(&rhs, 1e-12).unwrap();
        candidates.push(sol.rows(0, f).into_owned());

        for cand in candidates {
            let total: f64 = cand.iter().sum();
            if cand.iter().any(|&x| x < -1e-12) || total > 1.0 + 1e-12 {
                continue;
            }
            let mut u = vec![0.0; k];
            for (c, &j) in free.iter().enumerate() {
                u[j] = cand[c].max(0.0);
            }
            best = best.min(objective(d, ms, &u));
        }
    }
    best
}

#[test]
fn simplex_ls_matches_face_enumeration() {
    for seed in 0..300u64 {
        let n = 4 + (seed % 3) as usize;
        let count = 1 + (seed % 6) as usize;
        let (d, ms) = random_problem(seed, n, count);
        for sum in [SumConstraint::AtMostOne, SumConstraint::EqualOne] {
            let mut p = WeightProblem::new(&d, &ms);
            p.sum = sum;
            let s = solve_simplex_ls(&p).unwrap();
            let oracle = face_oracle(&d, &ms, sum);
            assert!(
                (s.objective - oracle).abs() <= 1e-8,
                "seed {seed} {sum:?}: {} vs {oracle}",
                s.objective
            );
            let total: f64 = s.weights.iter().sum();
            assert!(s.weights.iter().all(|&w| w >= 0.0));
            assert!(total <= 1.0 + 1e-9);
            if sum == SumConstraint::EqualOne {
                assert!((total - 1.0).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn cardinality_solution_is_exact_on_small_sets() {
    for seed in 0..60u64 {
        let (d, ms) = random_problem(1000 + seed, 6, 8);
        for m in 1..=4 {
            let mut p = WeightProblem::new(&d, &ms);
            p.max_support = Some(m);
            let s = solve_cardinality_ls(&p, &[], &SolverConfig::default()).unwrap();
            assert!(s.exact);
            assert!(s.support().len() <= m);
            // Oracle: best simplex solve over every support of size m.
            let mut best = objective(&d, &ms, &vec![0.0; ms.len()]);
            let k = ms.len();
            for mask in 1u32..(1 << k) {
                if mask.count_ones() as usize > m {
                    continue;
                }
                let sub: Vec<Matching> =
                    (0..k).filter(|&j| mask >> j & 1 == 1).map(|j| ms[j].clone()).collect();
                best = best.min(solve_simplex_ls(&WeightProblem::new(&d, &sub)).unwrap().objective);
            }
            assert!(s.objective <= best + 1e-12, "seed {seed} m {m}: {} vs {best}", s.objective);
            assert!(s.objective >= best - 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adding_matchings_never_hurts(seed in any::<u64>()) {
        let (d, ms) = random_problem(seed, 5, 6);
        let fewer = solve_simplex_ls(&WeightProblem::new(&d, &ms[..3])).unwrap();
        let more = solve_simplex_ls(&WeightProblem::new(&d, &ms)).unwrap();
        prop_assert!(more.objective <= fewer.objective + 1e-12);
    }

    #[test]
    fn cardinality_objective_falls_with_support(seed in any::<u64>()) {
        let (d, ms) = random_problem(seed, 5, 7);
        let mut last = f64::INFINITY;
        for m in 1..=7 {
            let mut p = WeightProblem::new(&d, &ms);
            p.max_support = Some(m);
            let s = solve_cardinality_ls(&p, &[], &SolverConfig::default()).unwrap();
            prop_assert!(s.objective <= last + 1e-12);
            last = s.objective;
        }
    }

    #[test]
    fn incumbent_dominance(seed in any::<u64>(), budget in 0u64..50) {
        let (d, ms) = random_problem(seed, 6, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let mut inc = vec![0.0; ms.len()];
        let picks: Vec<usize> = (0..3).map(|_| rng.random_range(0..ms.len())).collect();
        for &j in &picks {
            inc[j] = 0.2;
        }
        let mut p = WeightProblem::new(&d, &ms);
        p.max_support = Some(3);
        let cfg = SolverConfig { support_budget: budget, ..Default::default() };
        let s = solve_cardinality_ls(&p, std::slice::from_ref(&inc), &cfg).unwrap();
        prop_assert!(s.objective <= objective(&d, &ms, &inc));
    }
}
