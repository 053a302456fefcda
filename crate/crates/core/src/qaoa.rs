//! Single-layer QAOA on the edge-qubit register.
//!
//! The cost Hamiltonian is diagonal, so the cost unitary is applied as one
//! phase per basis state. The mixer `exp(−iβX)` is applied qubit by qubit as
//! in-place 2×2 rotations on amplitude pairs. Qubit `j` is edge `j`, and bit
//! `j` of a basis index is the value of qubit `j`.

use std::f64::consts::PI;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::optimizer::{minimize, Evaluation, TrustRegionConfig};
use crate::qubo::QuboModel;

pub const DEFAULT_QUBIT_CAP: usize = 26;
pub const DEFAULT_SHOTS: usize = 10_000;
/// Largest register [`dump_probabilities`] will write out.
pub const DUMP_QUBIT_CAP: usize = 16;

/// Qubits handled inside one cache-sized block of amplitudes.
const BLOCK_QUBITS: usize = 12;

/// Bytes needed for the amplitude vector plus the cost spectrum.
pub fn memory_bytes(num_qubits: usize) -> u128 {
    (1u128 << num_qubits) * (16 + 8)
}

fn check_cap(num_qubits: usize, cap: usize) -> Result<()> {
    if num_qubits > cap || num_qubits >= 63 {
        return Err(Error::QubitCap {
            qubits: num_qubits,
            cap,
        });
    }
    Ok(())
}

/// Diagonal of the cost Hamiltonian: `c[x]` is the QUBO cost of basis state `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct CostSpectrum {
    num_qubits: usize,
    values: Vec<f64>,
}

impl CostSpectrum {
    pub fn new(model: &QuboModel, cap: usize) -> Result<Self> {
        let nq = model.num_vars();
        check_cap(nq, cap)?;
        let masks: Vec<u64> = (0..nq)
            .map(|j| model.adjacency().of(j).iter().fold(0u64, |m, &k| m | (1 << k)))
            .collect();
        let lambda2 = 2.0 * model.lambda();
        let mut values = vec![0.0f64; 1usize << nq];
        // Each state extends the state without its lowest set bit.
        for x in 1..values.len() {
            let j = x.trailing_zeros() as usize;
            let rest = x & (x - 1);
            let conflicts = (masks[j] & rest as u64).count_ones() as f64;
            values[x] = values[rest] + model.linear(j) + lambda2 * conflicts;
        }
        Ok(CostSpectrum {
            num_qubits: nq,
            values,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[derive(Clone, Debug)]
pub struct QaoaState {
    pub gamma: f64,
    pub beta: f64,
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QaoaState {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `Σ_x |ψ(x)|² c(x)`.
    pub fn expectation(&self, spectrum: &CostSpectrum) -> f64 {
        self.amplitudes
            .iter()
            .zip(spectrum.values())
            .map(|(a, c)| a.norm_sqr() * c)
            .sum()
    }
}

/// Prepares `exp(−iβΣX) exp(−iγC) |+⟩^N` for the model.
pub fn simulate(model: &QuboModel, gamma: f64, beta: f64) -> Result<QaoaState> {
    let spectrum = CostSpectrum::new(model, DEFAULT_QUBIT_CAP)?;
    Ok(simulate_spectrum(&spectrum, gamma, beta))
}

pub fn simulate_spectrum(spectrum: &CostSpectrum, gamma: f64, beta: f64) -> QaoaState {
    let nq = spectrum.num_qubits();
    let norm = (0.5f64).powf(nq as f64 / 2.0);
    let mut amplitudes: Vec<Complex64> = spectrum
        .values()
        .par_iter()
        .map(|&c| {
            let (s, co) = (gamma * c).sin_cos();
            Complex64::new(norm * co, -norm * s)
        })
        .collect();
    apply_mixer(&mut amplitudes, nq, beta);
    QaoaState {
        gamma,
        beta,
        num_qubits: nq,
        amplitudes,
    }
}

#[inline]
fn rotate_pairs(lo: &mut [Complex64], hi: &mut [Complex64], c: f64, s: f64) {
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        let (x, y) = (*a, *b);
        // [[c, −is], [−is, c]]
        *a = Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re);
        *b = Complex64::new(c * y.re + s * x.im, c * y.im - s * x.re);
    }
}

fn rotate_qubit(chunk: &mut [Complex64], q: usize, c: f64, s: f64) {
    let stride = 1usize << q;
    for pair in chunk.chunks_mut(2 * stride) {
        let (lo, hi) = pair.split_at_mut(stride);
        rotate_pairs(lo, hi, c, s);
    }
}

/// Applies `exp(−iβX)` to every qubit.
fn apply_mixer(amps: &mut [Complex64], nq: usize, beta: f64) {
    let (s, c) = beta.sin_cos();
    let low = nq.min(BLOCK_QUBITS);
    amps.par_chunks_mut(1 << low).for_each(|block| {
        for q in 0..low {
            rotate_qubit(block, q, c, s);
        }
    });
    for q in low..nq {
        let stride = 1usize << q;
        amps.par_chunks_mut(2 * stride).for_each(|pair| {
            let (lo, hi) = pair.split_at_mut(stride);
            lo.par_chunks_mut(1 << BLOCK_QUBITS)
                .zip(hi.par_chunks_mut(1 << BLOCK_QUBITS))
                .for_each(|(a, b)| rotate_pairs(a, b, c, s));
        });
    }
}

/// Expectation of the cost in the QAOA state, via the statevector.
pub fn expectation(model: &QuboModel, gamma: f64, beta: f64) -> Result<f64> {
    let spectrum = CostSpectrum::new(model, DEFAULT_QUBIT_CAP)?;
    Ok(simulate_spectrum(&spectrum, gamma, beta).expectation(&spectrum))
}

/// Expectation of the cost from the analytic single-layer formula for
/// Ising Hamiltonians. No statevector is built, so any register size works.
pub fn expectation_analytic(model: &QuboModel, gamma: f64, beta: f64) -> f64 {
    let (offset, h) = model.ising_fields();
    let adj = model.adjacency();
    let j_coupling = 0.5 * model.lambda();
    let c1 = (2.0 * gamma * j_coupling).cos();
    let c2 = (4.0 * gamma * j_coupling).cos();
    let s1 = (2.0 * gamma * j_coupling).sin();
    let (s2b, s4b) = ((2.0 * beta).sin(), (4.0 * beta).sin());
    let deg = |u: usize| adj.of(u).len() as i32;

    let mut total = offset;
    for u in 0..h.len() {
        total += h[u] * s2b * (2.0 * gamma * h[u]).sin() * c1.powi(deg(u));
    }
    for u in 0..h.len() {
        for &v in adj.of(u) {
            if v <= u {
                continue;
            }
            let common = count_common(adj.of(u), adj.of(v)) as i32;
            let (du, dv) = (deg(u) - 1, deg(v) - 1);
            let first = 0.5
                * s4b
                * s1
                * ((2.0 * gamma * h[u]).cos() * c1.powi(du) + (2.0 * gamma * h[v]).cos() * c1.powi(dv));
            let exclusive = du + dv - 2 * common;
            let minus = (2.0 * gamma * (h[u] - h[v])).cos() * c1.powi(exclusive);
            let plus = (2.0 * gamma * (h[u] + h[v])).cos() * c1.powi(exclusive) * c2.powi(common);
            let zz = first + 0.5 * s2b * s2b * (minus - plus);
            total += j_coupling * zz;
        }
    }
    total
}

fn count_common(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Order in which a fixed parameter pair is written.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamOrder {
    /// `(β, γ)`.
    #[default]
    BetaGamma,
    /// `(γ, β)`.
    GammaBeta,
}

/// Maps `(γ, β)` into `γ ∈ [0, 2π]`, `β ∈ [0, π)` without changing the
/// output distribution: `(−γ, −β)` yields the complex-conjugate state, and
/// `β` has period `π` up to a global phase. Reducing `γ` modulo `2π` is only
/// exact for integer cost spectra and is applied only when `|γ| > 2π`.
pub fn canonical_params(gamma: f64, beta: f64) -> (f64, f64) {
    let (mut g, mut b) = if gamma < 0.0 { (-gamma, -beta) } else { (gamma, beta) };
    if g > 2.0 * PI {
        g = g.rem_euclid(2.0 * PI);
    }
    b = b.rem_euclid(PI);
    (g, b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ParamMode {
    /// Run the trust-region search from `start = (γ, β)`.
    Optimize {
        start: [f64; 2],
        #[serde(default)]
        optimizer: TrustRegionConfig,
    },
    /// Use a fixed pair written in the given order.
    Fixed {
        values: [f64; 2],
        #[serde(default)]
        order: ParamOrder,
    },
}

impl Default for ParamMode {
    fn default() -> Self {
        ParamMode::Optimize {
            start: [0.5, -0.5],
            optimizer: TrustRegionConfig::default(),
        }
    }
}

impl ParamMode {
    /// The pair `(β, γ) = (−0.5, 0.5)`, kept fixed.
    pub fn fixed_default() -> Self {
        ParamMode::Fixed {
            values: [-0.5, 0.5],
            order: ParamOrder::BetaGamma,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSearch {
    pub gamma: f64,
    pub beta: f64,
    pub expectation: f64,
    pub trace: Vec<Evaluation>,
}

/// Chooses `(γ, β)` for `model` according to `mode`.
pub fn optimize_params(model: &QuboModel, mode: &ParamMode) -> ParamSearch {
    match mode {
        ParamMode::Fixed { values, order } => {
            let (gamma, beta) = match order {
                ParamOrder::BetaGamma => (values[1], values[0]),
                ParamOrder::GammaBeta => (values[0], values[1]),
            };
            let (gamma, beta) = canonical_params(gamma, beta);
            ParamSearch {
                gamma,
                beta,
                expectation: expectation_analytic(model, gamma, beta),
                trace: Vec::new(),
            }
        }
        ParamMode::Optimize { start, optimizer } => {
            let (g0, b0) = canonical_params(start[0], start[1]);
            let found = minimize(
                |p| expectation_analytic(model, p[0], p[1]),
                &[g0, b0],
                &[0.0, 0.0],
                &[2.0 * PI, PI],
                optimizer,
            );
            ParamSearch {
                gamma: found.point[0],
                beta: found.point[1],
                expectation: found.value,
                trace: found.trace,
            }
        }
    }
}

/// Draws `shots` basis states from `probabilities` by inverse CDF.
pub fn sample_distribution<R: Rng + ?Sized>(
    probabilities: &[f64],
    num_qubits: usize,
    shots: usize,
    rng: &mut R,
) -> Vec<Bitstring> {
    let total: f64 = probabilities.iter().sum();
    let mut draws: Vec<(f64, usize)> = (0..shots).map(|i| (rng.random::<f64>() * total, i)).collect();
    draws.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![0u64; shots];
    let mut cumulative = 0.0;
    let mut x = 0usize;
    let last = probabilities.len() - 1;
    // Rounding in the running sum must not push a draw onto trailing
    // zero-probability states.
    let last_nonzero = probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for (u, slot) in draws {
        while x < last && cumulative + probabilities[x] <= u {
            cumulative += probabilities[x];
            x += 1;
        }
        out[slot] = x.min(last_nonzero) as u64;
    }
    out.into_iter()
        .map(|index| Bitstring::from_index(index, num_qubits))
        .collect()
}

/// `shots` measurements of the QAOA state in the computational basis.
pub fn sample<R: Rng + ?Sized>(
    model: &QuboModel,
    gamma: f64,
    beta: f64,
    shots: usize,
    rng: &mut R,
) -> Result<Vec<Bitstring>> {
    let state = simulate(model, gamma, beta)?;
    Ok(sample_distribution(&state.probabilities(), state.num_qubits(), shots, rng))
}

/// Writes `bitstring<TAB>probability` lines for registers of at most
/// [`DUMP_QUBIT_CAP`] qubits.
pub fn dump_probabilities(state: &QaoaState, path: &Path) -> Result<()> {
    check_cap(state.num_qubits(), DUMP_QUBIT_CAP)?;
    let mut out = String::new();
    for (x, p) in state.probabilities().iter().enumerate() {
        out.push_str(&format!(
            "{}\t{:e}\n",
            Bitstring::from_index(x as u64, state.num_qubits()),
            p
        ));
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::six_node_example;
    use crate::graph::WeightedGraph;
    use crate::qubo::build_qubo;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path_model() -> QuboModel {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        build_qubo(&g, 0.2).unwrap()
    }

    #[test]
    fn identity_parameters_give_uniform_state() {
        let s = simulate(&path_model(), 0.0, 0.0).unwrap();
        for a in s.amplitudes() {
            assert!((a.re - 0.5).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn spectrum_matches_direct_cost() {
        let (demand, _) = six_node_example();
        let q = build_qubo(demand.graph(), 0.2).unwrap();
        let spec = CostSpectrum::new(&q, DEFAULT_QUBIT_CAP).unwrap();
        assert_eq!(spec.values()[0], 0.0);
        for (x, &c) in spec.values().iter().enumerate() {
            let direct = q.cost(&Bitstring::from_index(x as u64, 9)).unwrap();
            assert!((c - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_expectation_matches_statevector() {
        let (demand, _) = six_node_example();
        let q = build_qubo(demand.graph(), 0.2).unwrap();
        for &(g, b) in &[(0.5, 2.64), (1.3, 0.2), (4.0, 1.1), (0.0, 0.7), (2.2, 0.0)] {
            let sv = expectation(&q, g, b).unwrap();
            let an = expectation_analytic(&q, g, b);
            assert!((sv - an).abs() < 1e-12, "({g}, {b}): {sv} vs {an}");
        }
    }

    #[test]
    fn canonical_pair_is_equivalent() {
        let q = path_model();
        let (g, b) = canonical_params(-0.5, 0.5);
        assert!((g - 0.5).abs() < 1e-15 && (b - (PI - 0.5)).abs() < 1e-15);
        let raw = simulate(&q, -0.5, 0.5).unwrap().probabilities();
        let wrapped = simulate(&q, g, b).unwrap().probabilities();
        for (p, r) in raw.iter().zip(&wrapped) {
            assert!((p - r).abs() < 1e-14);
        }
    }

    #[test]
    fn fixed_mode_orders_agree() {
        let q = path_model();
        let a = optimize_params(&q, &ParamMode::fixed_default());
        let b = optimize_params(
            &q,
            &ParamMode::Fixed {
                values: [-0.5, 0.5],
                order: ParamOrder::GammaBeta,
            },
        );
        assert_eq!((a.gamma, a.beta), (b.gamma, b.beta));
        assert!(a.trace.is_empty());
    }

    #[test]
    fn optimizer_improves_on_start() {
        let q = path_model();
        let start = canonical_params(0.5, -0.5);
        let found = optimize_params(&q, &ParamMode::default());
        assert!(found.expectation <= expectation(&q, start.0, start.1).unwrap() + 1e-12);
        assert!((0.0..=2.0 * PI).contains(&found.gamma));
        assert!((0.0..=PI).contains(&found.beta));
    }

    #[test]
    fn cap_is_enforced() {
        let edges: Vec<_> = (0..27).map(|i| (i, i + 1, 0.5)).collect();
        let g = WeightedGraph::new(28, edges).unwrap();
        let q = build_qubo(&g, 0.2).unwrap();
        let err = simulate(&q, 0.1, 0.1).unwrap_err();
        assert!(matches!(err, Error::QubitCap { qubits: 27, cap: 26 }));
        assert!(err.to_string().contains("smaller instance"));
    }

    #[test]
    fn sampling_skips_zero_probability_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shots = sample_distribution(&[0.0, 0.5, 0.0, 0.5], 2, 1000, &mut rng);
        assert!(shots.iter().all(|x| matches!(x.to_index(), Some(1) | Some(3))));
    }

    #[test]
    fn dump_writes_one_line_per_state() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.tsv");
        dump_probabilities(&simulate(&path_model(), 0.3, 0.4).unwrap(), &path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("00\t"));
    }
}
