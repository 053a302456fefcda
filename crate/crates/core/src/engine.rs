//! Fully-corrective Frank-Wolfe over matchings, extended with sampled
//! candidate matchings.
//!
//! Each iteration adds the Frank-Wolfe matching of a plain fully-corrective
//! run (tracked alongside in `fw`) plus up to `d` sampled matchings of the
//! current residual, then re-fits weights using at most `k + 1` matchings.
//! With `d = 0` the loop is plain fully-corrective Frank-Wolfe.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{combine, Decomposition, DemandMatrix, Matching, PhaseTimings, TracePoint, WeightedGraph};
use crate::matching::max_weight_matching;
use crate::samplers::{derive_seed, sample_with_stats, select_top_d, Method, SamplerConfig, SamplerStats};
use crate::weights::{
    solve_cardinality_ls, solve_simplex_ls, SolverConfig, WeightProblem, NONZERO_THRESHOLD,
};

pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Sampled matchings per iteration; zero disables sampling.
    #[serde(default)]
    pub d: usize,
    /// Iteration cap; `None` means `4·n`.
    #[serde(default)]
    pub max_iterations: Option<usize>,
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Base seed; iteration `k` samples with `derive_seed(seed, k)`.
    #[serde(default)]
    pub seed: u64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl EngineConfig {
    /// Plain fully-corrective Frank-Wolfe.
    pub fn fcfw() -> Self {
        EngineConfig {
            epsilon: DEFAULT_EPSILON,
            d: 0,
            max_iterations: None,
            sampler: SamplerConfig::new(Method::Random),
            solver: SolverConfig::default(),
            seed: 0,
        }
    }

    /// Sampling-extended run with `d` samples per iteration.
    pub fn extended(method: Method, d: usize) -> Self {
        let mut sampler = SamplerConfig::new(method);
        sampler.d = d;
        EngineConfig {
            d,
            sampler,
            ..Self::fcfw()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.d > 0 {
            let mut s = self.sampler.clone();
            s.d = self.d;
            s.validate()?;
        }
        Ok(())
    }

    pub fn iteration_cap(&self, n: usize) -> usize {
        self.max_iterations.unwrap_or(4 * n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    IterationCap,
    Stalled,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::IterationCap => "iteration-cap",
            Termination::Stalled => "stalled",
        }
    }
}

/// Telemetry for one iteration `k` (the state after it is `X_{k+1}`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub error: f64,
    pub length: usize,
    /// Size of the accumulated candidate set.
    pub candidates: usize,
    pub added: Vec<Matching>,
    /// Frank-Wolfe matching of this iteration, if non-empty.
    pub fw_matching: Option<Matching>,
    /// Whether the support-limited weight fit was solved to optimality.
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler_seed: Option<u64>,
}

/// The loop state between iterations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EngineState {
    /// Accumulated candidates.
    pub matchings: Vec<Matching>,
    /// Weights aligned with `matchings`.
    pub weights: Vec<f64>,
    /// Matchings of the parallel plain Frank-Wolfe run.
    pub fw: Vec<Matching>,
    /// Fully-corrective weights over `fw`.
    pub alpha_fw: Vec<f64>,
    pub k: usize,
}

impl EngineState {
    pub fn entries(&self) -> Vec<(Matching, f64)> {
        self.matchings
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(m, &w)| (m.clone(), w))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_id: Option<String>,
    pub config: EngineConfig,
    pub iteration_cap: usize,
    /// Sampler name, or `"fcfw"` when sampling is off.
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub decomposition: Decomposition,
    pub terminated: Termination,
    pub error: f64,
    pub records: Vec<IterationRecord>,
    pub provenance: Provenance,
}

/// Target restricted to its own support with the given combination
/// subtracted. Edges outside the support can only carry non-positive
/// residual, so no useful matching needs them.
fn residual_on_support(target: &DemandMatrix, entries: &[(Matching, f64)]) -> WeightedGraph {
    let x = combine(entries);
    let g = target.graph();
    let weights = g
        .iter()
        .map(|(e, w)| w - x.get(&e).copied().unwrap_or(0.0))
        .collect();
    g.with_weights(weights).expect("same edge count")
}

fn dedupe(list: &mut Vec<Matching>) {
    let mut seen = BTreeSet::new();
    list.retain(|m| seen.insert(m.clone()));
}

/// Output of one matching-subroutine call.
#[derive(Clone, Debug, Default)]
pub struct SubroutineOutput {
    /// Matchings not yet in the candidate set; the Frank-Wolfe matching first.
    pub new: Vec<Matching>,
    pub fw_matching: Option<Matching>,
    pub sampler: Option<SamplerStats>,
    pub sampler_seed: Option<u64>,
    pub sampling_time: Duration,
    pub fw_time: Duration,
}

/// One call of the matching subroutine: sample from the residual, advance
/// the plain Frank-Wolfe run by one matching, prune, and return what is new.
pub fn matching_subroutine(
    target: &DemandMatrix,
    state: &mut EngineState,
    cfg: &EngineConfig,
) -> Result<SubroutineOutput> {
    let mut out = SubroutineOutput::default();

    let mut sampled = Vec::new();
    if cfg.d > 0 && target.graph().edge_count() > 0 {
        let clock = Instant::now();
        let residual = residual_on_support(target, &state.entries());
        let mut sampler = cfg.sampler.clone();
        sampler.d = cfg.d;
        sampler.seed = derive_seed(cfg.seed, state.k as u64);
        let (bits, stats) = sample_with_stats(&sampler, &residual)?;
        sampled = select_top_d(&bits, &residual, cfg.d)?;
        sampled.retain(|m| !m.is_empty());
        out.sampler = Some(stats);
        out.sampler_seed = Some(sampler.seed);
        out.sampling_time = clock.elapsed();
    }

    let clock = Instant::now();
    let fw_entries: Vec<(Matching, f64)> = state
        .fw
        .iter()
        .cloned()
        .zip(state.alpha_fw.iter().copied())
        .collect();
    let fw_residual = residual_on_support(target, &fw_entries);
    let fw_matching = max_weight_matching(&fw_residual).matching;
    if !fw_matching.is_empty() {
        state.fw.push(fw_matching.clone());
        out.fw_matching = Some(fw_matching);
    }
    dedupe(&mut state.fw);
    if state.fw.len() != state.alpha_fw.len() {
        let problem = WeightProblem {
            sum: cfg.solver.sum,
            ..WeightProblem::new(target, &state.fw)
        };
        state.alpha_fw = solve_simplex_ls(&problem)?.weights;
    }
    out.fw_time = clock.elapsed();

    dedupe(&mut sampled);
    let fw_set: BTreeSet<&Matching> = state.fw.iter().collect();
    sampled.retain(|m| !fw_set.contains(m));
    let known: BTreeSet<&Matching> = state.matchings.iter().collect();
    out.new = state
        .fw
        .iter()
        .chain(&sampled)
        .filter(|m| !known.contains(m))
        .cloned()
        .collect();
    Ok(out)
}

/// Runs the loop until the error reaches `epsilon`, the iteration cap is
/// hit, or an iteration brings neither new matchings nor improvement.
pub fn run(target: &DemandMatrix, cfg: &EngineConfig) -> Result<DecompositionResult> {
    run_with_id(target, cfg, None)
}

pub fn run_with_id(
    target: &DemandMatrix,
    cfg: &EngineConfig,
    instance_id: Option<&str>,
) -> Result<DecompositionResult> {
    cfg.validate()?;
    let started = Instant::now();
    let n = target.n();
    let scale = if n == 0 { 1.0 } else { (n * n) as f64 };
    let cap = cfg.iteration_cap(n);

    let mut state = EngineState::default();
    let mut timings = PhaseTimings::default();
    let mut records = Vec::new();
    let mut error = target.frobenius_sq() / scale;
    let mut trace = vec![TracePoint {
        iteration: 0,
        length: 0,
        error,
    }];

    let terminated = loop {
        if error <= cfg.epsilon {
            break Termination::Converged;
        }
        if state.k >= cap {
            break Termination::IterationCap;
        }
        let fw_before = state.fw.len();
        let sub = matching_subroutine(target, &mut state, cfg)?;
        timings.sampling += sub.sampling_time.as_secs_f64();
        timings.max_weight_matching += sub.fw_time.as_secs_f64();

        let clock = Instant::now();
        state.matchings.extend(sub.new.iter().cloned());
        state.weights.resize(state.matchings.len(), 0.0);
        let mut fit = None;
        if !state.matchings.is_empty() {
            let position = |m: &Matching| state.matchings.iter().position(|x| x == m).expect("fw ⊆ candidates");
            let mut fw_incumbent = vec![0.0; state.matchings.len()];
            for (m, &a) in state.fw.iter().zip(&state.alpha_fw) {
                fw_incumbent[position(m)] = a;
            }
            let problem = WeightProblem {
                sum: cfg.solver.sum,
                max_support: Some(state.k + 1),
                ..WeightProblem::new(target, &state.matchings)
            };
            let solution = solve_cardinality_ls(&problem, &[state.weights.clone(), fw_incumbent], &cfg.solver)?;
            state.weights = solution.weights.clone();
            fit = Some(solution);
        }
        timings.weights += clock.elapsed().as_secs_f64();

        let previous = error;
        let exact = fit.as_ref().is_none_or(|s| s.exact);
        error = match &fit {
            Some(s) => s.objective / scale,
            None => error,
        };
        let length = state.weights.iter().filter(|&&w| w > NONZERO_THRESHOLD).count();
        state.k += 1;
        trace.push(TracePoint {
            iteration: state.k,
            length,
            error,
        });
        records.push(IterationRecord {
            k: state.k - 1,
            error,
            length,
            candidates: state.matchings.len(),
            added: sub.new.clone(),
            fw_matching: sub.fw_matching,
            exact,
            sampler: sub.sampler,
            sampler_seed: sub.sampler_seed,
        });

        let stuck = sub.new.is_empty()
            && state.fw.len() == fw_before
            && error >= previous
            && state.k >= state.matchings.len();
        if stuck && error > cfg.epsilon {
            break Termination::Stalled;
        }
    };

    timings.total = started.elapsed().as_secs_f64();
    let mut decomposition = Decomposition::new(state.entries());
    decomposition.trace = trace;
    decomposition.timings = timings;
    Ok(DecompositionResult {
        decomposition,
        terminated,
        error,
        records,
        provenance: Provenance {
            instance_id: instance_id.map(str::to_string),
            config: cfg.clone(),
            iteration_cap: cap,
            method: if cfg.d == 0 {
                "fcfw".to_string()
            } else {
                cfg.sampler.method.name().to_string()
            },
        },
    })
}

/// Shared edge counts between matchings; the diagonal holds each
/// matching's size.
pub fn overlap_matrix(matchings: &[Matching]) -> Vec<Vec<usize>> {
    matchings
        .iter()
        .map(|a| matchings.iter().map(|b| a.overlap(b)).collect())
        .collect()
}

/// Weight of each decomposition matching under the original target.
pub fn weight_distribution(decomposition: &Decomposition, graph: &WeightedGraph) -> Vec<f64> {
    decomposition
        .matchings()
        .map(|m| crate::graph::matching_weight(m, graph))
        .collect()
}
