//! Matching samplers: fair random bits, simulated annealing on the QUBO,
//! and QAOA shots, followed by top-`d` selection of valid matchings.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::graph::{build_edge_indexing, matching_weight, Matching, WeightedGraph};
use crate::qaoa::{self, CostSpectrum, ParamMode, DEFAULT_QUBIT_CAP};
use crate::qubo::{build_qubo, QuboModel, DEFAULT_PENALTY_FACTOR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Random,
    Anneal,
    Qaoa,
}

impl Method {
    pub fn default_shots(self) -> usize {
        match self {
            Method::Random | Method::Qaoa => 10_000,
            Method::Anneal => 1_000,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Anneal => "anneal",
            Method::Qaoa => "qaoa",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Method::Random),
            "anneal" => Ok(Method::Anneal),
            "qaoa" => Ok(Method::Qaoa),
            other => Err(Error::Config(format!("unknown sampler method {other:?}"))),
        }
    }
}

/// Annealing settings; temperatures scale with the positive weight mass
/// of the graph being sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealConfig {
    /// Absolute start temperature; `None` means `Σ max(w, 0)`.
    pub initial_temperature: Option<f64>,
    /// Final temperature as a fraction of the start temperature.
    pub final_ratio: f64,
    pub sweeps: usize,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            initial_temperature: None,
            final_ratio: 1e-3,
            sweeps: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub t0: f64,
    pub t1: f64,
    pub sweeps: usize,
    pub factor: f64,
}

impl AnnealSchedule {
    pub fn new(t0: f64, t1: f64, sweeps: usize) -> Result<Self> {
        if !(t0 > t1 && t1 > 0.0 && t0.is_finite()) {
            return Err(Error::Config(format!(
                "anneal temperatures must satisfy T0 > T1 > 0, got T0={t0}, T1={t1}"
            )));
        }
        if sweeps == 0 {
            return Err(Error::Config("anneal needs at least one sweep".into()));
        }
        let factor = if sweeps == 1 {
            t1 / t0
        } else {
            (t1 / t0).powf(1.0 / (sweeps - 1) as f64)
        };
        Ok(AnnealSchedule {
            t0,
            t1,
            sweeps,
            factor,
        })
    }

    pub fn for_model(cfg: &AnnealConfig, model: &QuboModel) -> Result<Self> {
        let positive: f64 = model.weights().iter().map(|w| w.max(0.0)).sum();
        let t0 = cfg
            .initial_temperature
            .unwrap_or(if positive > 0.0 { positive } else { 1.0 });
        Self::new(t0, t0 * cfg.final_ratio, cfg.sweeps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QaoaConfig {
    pub params: ParamMode,
    pub qubit_cap: usize,
    /// Reserved; only one layer is supported.
    pub layers: usize,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        QaoaConfig {
            params: ParamMode::default(),
            qubit_cap: DEFAULT_QUBIT_CAP,
            layers: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub method: Method,
    /// Bitstrings drawn per call; `None` picks the method default.
    #[serde(default)]
    pub shots: Option<usize>,
    /// Matchings kept after selection.
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_penalty")]
    pub penalty_factor: f64,
    #[serde(default)]
    pub anneal: AnnealConfig,
    #[serde(default)]
    pub qaoa: QaoaConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_d() -> usize {
    5
}

fn default_penalty() -> f64 {
    DEFAULT_PENALTY_FACTOR
}

impl SamplerConfig {
    pub fn new(method: Method) -> Self {
        SamplerConfig {
            method,
            shots: None,
            d: default_d(),
            penalty_factor: DEFAULT_PENALTY_FACTOR,
            anneal: AnnealConfig::default(),
            qaoa: QaoaConfig::default(),
            seed: 0,
        }
    }

    pub fn shots(&self) -> usize {
        self.shots.unwrap_or_else(|| self.method.default_shots())
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("sampler must keep at least one matching (d >= 1)".into()));
        }
        if self.shots() < self.d {
            return Err(Error::Config(format!(
                "shot count {} is smaller than d = {}",
                self.shots(),
                self.d
            )));
        }
        if self.qaoa.layers != 1 {
            return Err(Error::Config(format!(
                "only single-layer QAOA is supported, got {} layers",
                self.qaoa.layers
            )));
        }
        Ok(())
    }
}

/// Diagnostics from one sampling call.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplerStats {
    pub shots: usize,
    pub valid_shots: usize,
    pub distinct_valid: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectation: Option<f64>,
}

/// Mixes a base seed with a stream index (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `cfg.shots()` bitstrings over the edge indexing of `graph`.
pub fn sample_bitstrings(cfg: &SamplerConfig, graph: &WeightedGraph) -> Result<Vec<Bitstring>> {
    sample_with_stats(cfg, graph).map(|(b, _)| b)
}

pub fn sample_with_stats(
    cfg: &SamplerConfig,
    graph: &WeightedGraph,
) -> Result<(Vec<Bitstring>, SamplerStats)> {
    cfg.validate()?;
    let shots = cfg.shots();
    let n = graph.edge_count();
    let mut stats = SamplerStats {
        shots,
        ..Default::default()
    };
    let bitstrings = match cfg.method {
        Method::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..shots).map(|_| random_bits(n, &mut rng)).collect()
        }
        Method::Anneal => {
            let model = build_qubo(graph, cfg.penalty_factor)?;
            let schedule = AnnealSchedule::for_model(&cfg.anneal, &model)?;
            (0..shots as u64)
                .into_par_iter()
                .map(|run| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, run));
                    anneal_run(&model, &schedule, &mut rng)
                })
                .collect()
        }
        Method::Qaoa => {
            let model = build_qubo(graph, cfg.penalty_factor)?;
            let spectrum = CostSpectrum::new(&model, cfg.qaoa.qubit_cap)?;
            let params = qaoa::optimize_params(&model, &cfg.qaoa.params);
            let state = qaoa::simulate_spectrum(&spectrum, params.gamma, params.beta);
            stats.gamma = Some(params.gamma);
            stats.beta = Some(params.beta);
            stats.expectation = Some(state.expectation(&spectrum));
            drop(spectrum);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            qaoa::sample_distribution(&state.probabilities(), n, shots, &mut rng)
        }
    };
    let model_for_check = crate::qubo::EdgeAdjacency::new(graph);
    let mut distinct = BTreeSet::new();
    for x in &bitstrings {
        let valid = !x
            .iter_ones()
            .any(|j| model_for_check.of(j).iter().any(|&k| x.get(k)));
        if valid {
            stats.valid_shots += 1;
            distinct.insert(x.clone());
        }
    }
    stats.distinct_valid = distinct.len();
    Ok((bitstrings, stats))
}

fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Bitstring {
    let mut x = Bitstring::zeros(n);
    let mut word = 0u64;
    for j in 0..n {
        if j % 64 == 0 {
            word = rng.random();
        }
        if (word >> (j % 64)) & 1 == 1 {
            x.set(j, true);
        }
    }
    x
}

/// One Metropolis chain from the all-zeros state; returns the lowest-cost
/// configuration visited.
pub fn anneal_run<R: Rng + ?Sized>(model: &QuboModel, schedule: &AnnealSchedule, rng: &mut R) -> Bitstring {
    let n = model.num_vars();
    let mut x = Bitstring::zeros(n);
    let mut best = x.clone();
    if n == 0 {
        return best;
    }
    let mut cost = 0.0;
    let mut best_cost = 0.0;
    let mut t = schedule.t0;
    for _ in 0..schedule.sweeps {
        for _ in 0..n {
            let j = rng.random_range(0..n);
            let delta = model.flip_delta(&x, j);
            if delta <= 0.0 || rng.random::<f64>() < (-delta / t).exp() {
                x.flip(j);
                cost += delta;
                if cost < best_cost {
                    best_cost = cost;
                    best.clone_from(&x);
                }
            }
        }
        t *= schedule.factor;
    }
    best
}

/// Keeps valid, distinct matchings and returns the `d` heaviest, ties going
/// to the lexicographically smaller edge-index set.
pub fn select_top_d(bitstrings: &[Bitstring], graph: &WeightedGraph, d: usize) -> Result<Vec<Matching>> {
    let idx = build_edge_indexing(graph);
    let mut distinct: BTreeSet<Vec<usize>> = BTreeSet::new();
    for x in bitstrings {
        if x.len() != idx.len() {
            return Err(Error::LengthMismatch {
                expected: idx.len(),
                got: x.len(),
            });
        }
        if Matching::from_bitstring(x, &idx)?.is_some() {
            distinct.insert(x.iter_ones().collect());
        }
    }
    let mut ranked: Vec<(f64, Vec<usize>, Matching)> = distinct
        .into_iter()
        .map(|ones| {
            let m = Matching::new(ones.iter().map(|&j| idx.edge(j))).expect("validated above");
            (matching_weight(&m, graph), ones, m)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    Ok(ranked.into_iter().take(d).map(|(_, _, m)| m).collect())
}
