mod common;

use matchdecomp::bits::Bitstring;
use matchdecomp::qaoa::{expectation, expectation_analytic, sample, simulate};
use matchdecomp::qubo::{build_qubo, qubo_cost, DEFAULT_PENALTY_FACTOR};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{chi_square_p_value, dense_qaoa_state, random_graph};

#[test]
fn statevector_matches_dense_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut checked = 0;
    while checked < 60 {
        let g = random_graph(&mut rng, 6, 8, 0.0, 1.0);
        if g.edge_count() == 0 {
            continue;
        }
        let model = build_qubo(&g, DEFAULT_PENALTY_FACTOR).unwrap();
        let gamma = rng.random_range(-3.0..3.0);
        let beta = rng.random_range(-3.0..3.0);
        let fast = simulate(&model, gamma, beta).unwrap();
        let dense = dense_qaoa_state(&model, gamma, beta);
        for (x, (a, b)) in fast.amplitudes().iter().zip(&dense).enumerate() {
            assert!((a - b).norm() <= 1e-10, "N={} state {x}: {a} vs {b}", model.num_vars());
        }
        checked += 1;
    }
}

#[test]
fn zero_angles_give_spectrum_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..40 {
        let g = random_graph(&mut rng, 7, 10, 0.0, 1.0);
        if g.edge_count() == 0 {
            continue;
        }
        let model = build_qubo(&g, DEFAULT_PENALTY_FACTOR).unwrap();
        let nq = model.num_vars();
        let brute: f64 = (0..1u64 << nq)
            .map(|x| qubo_cost(&model, &Bitstring::from_index(x, nq)).unwrap())
            .sum::<f64>()
            / (1u64 << nq) as f64;
        let e = expectation(&model, 0.0, 0.0).unwrap();
        assert!((e - brute).abs() <= 1e-12, "{e} vs {brute}");
    }
}

#[test]
fn analytic_expectation_matches_statevector() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..40 {
        let g = random_graph(&mut rng, 7, 12, -0.5, 1.0);
        let model = build_qubo(&g, DEFAULT_PENALTY_FACTOR).unwrap();
        let gamma = rng.random_range(-2.0..2.0);
        let beta = rng.random_range(-2.0..2.0);
        let a = expectation_analytic(&model, gamma, beta);
        let s = expectation(&model, gamma, beta).unwrap();
        assert!((a - s).abs() <= 1e-9 * (1.0 + s.abs()), "{a} vs {s}");
    }
}

#[test]
fn sampled_frequencies_fit_the_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut tested = 0;
    while tested < 4 {
        let g = random_graph(&mut rng, 5, 6, 0.1, 1.0);
        if g.edge_count() < 3 {
            continue;
        }
        let model = build_qubo(&g, DEFAULT_PENALTY_FACTOR).unwrap();
        let (gamma, beta) = (rng.random_range(0.2..2.0), rng.random_range(-1.5..-0.2));
        let state = simulate(&model, gamma, beta).unwrap();
        let shots = sample(&model, gamma, beta, 1_000_000, &mut rng).unwrap();
        let mut counts = vec![0u64; 1 << model.num_vars()];
        for b in &shots {
            counts[b.to_index().unwrap() as usize] += 1;
        }
        let p = chi_square_p_value(&counts, &state.probabilities());
        assert!(p > 1e-3, "goodness-of-fit p = {p}");
        tested += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_preserves_norm(seed in any::<u64>(), gamma in -6.0f64..6.0, beta in -6.0f64..6.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 6, 10, -1.0, 1.0);
        let model = build_qubo(&g, DEFAULT_PENALTY_FACTOR).unwrap();
        let s = simulate(&model, gamma, beta).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn expectation_lies_within_spectrum(seed in any::<u64>(), gamma in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 6, 10, -1.0, 1.0);
        let model = build_qubo(&g, DEFAULT_PENALTY_FACTOR).unwrap();
        let nq = model.num_vars();
        let costs: Vec<f64> = (0..1u64 << nq)
            .map(|x| qubo_cost(&model, &Bitstring::from_index(x, nq)).unwrap())
            .collect();
        let lo = costs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e = expectation(&model, gamma, beta).unwrap();
        prop_assert!(e >= lo - 1e-9 && e <= hi + 1e-9);
    }
}
