//! Benchmark reports and plot-ready data derived from stored run results.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::{overlap_matrix, weight_distribution, DecompositionResult, Termination};
use crate::instances::Instance;
use crate::qubo::EdgeAdjacency;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableCounts {
    pub iteration: usize,
    pub decision: usize,
    pub binary: usize,
    pub continuous: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientInfo {
    /// Linear QUBO terms (one per edge of the target).
    pub linear_terms: usize,
    /// Unordered conflicting edge pairs.
    pub quadratic_terms: usize,
    pub penalty_factor: Option<f64>,
    /// Target entries lie in this range.
    pub value_range: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunCounts {
    pub runs: usize,
    pub feasible: usize,
    pub successful: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hardware {
    pub os: String,
    pub arch: String,
    pub logical_cpus: usize,
}

impl Hardware {
    pub fn current() -> Self {
        Hardware {
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Runtimes {
    pub total_seconds: f64,
    /// Classical work: maximum-weight matchings and weight fits.
    pub cpu_seconds: f64,
    pub sampler_seconds: f64,
}

/// Performance record of one run, in the shape of common optimization
/// benchmarking checklists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub problem: String,
    pub method: String,
    pub submitter: String,
    pub date: String,
    pub reference: String,
    /// Decomposition length of the final iterate.
    pub best_objective: usize,
    pub final_error: f64,
    pub optimality_bound: Option<f64>,
    pub modeling_approach: String,
    pub variables: Vec<VariableCounts>,
    pub coefficients: CoefficientInfo,
    pub workflow: String,
    pub algorithm_type: String,
    pub run_counts: RunCounts,
    pub success_threshold: f64,
    pub terminated: Termination,
    pub hardware: Hardware,
    pub runtimes: Runtimes,
}

/// Builds the report for one finished run.
pub fn bench_report(
    instance: &Instance,
    label: &str,
    result: &DecompositionResult,
    submitter: &str,
    date: &str,
) -> BenchReport {
    let cfg = &result.provenance.config;
    let graph = instance.demand.graph();
    let sampled = cfg.d > 0;
    let binary = if sampled { graph.edge_count() } else { 0 };
    let variables = result
        .records
        .iter()
        .map(|r| VariableCounts {
            iteration: r.k,
            decision: binary + r.candidates,
            binary,
            continuous: r.candidates,
        })
        .collect();
    let weights = graph.weights();
    let value_range = if weights.is_empty() {
        [0.0, 0.0]
    } else {
        [
            weights.iter().copied().fold(f64::INFINITY, f64::min),
            weights.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ]
    };
    let modeling_approach = if sampled {
        format!(
            "Frank-Wolfe over matchings with {} matchings per iteration sampled from a penalized binary model \
             (one binary variable per edge); weights refit by support-limited least squares",
            cfg.d
        )
    } else {
        "Fully-corrective Frank-Wolfe over matchings with exact maximum-weight matching; weights refit by \
         simplex-constrained least squares"
            .into()
    };
    let timings = &result.decomposition.timings;
    let converged = result.terminated == Termination::Converged;
    BenchReport {
        schema_version: REPORT_SCHEMA_VERSION,
        problem: instance.id.clone(),
        method: label.to_string(),
        submitter: submitter.to_string(),
        date: date.to_string(),
        reference: format!("matchdecomp {}", env!("CARGO_PKG_VERSION")),
        best_objective: result.decomposition.length(),
        final_error: result.error,
        optimality_bound: None,
        modeling_approach,
        variables,
        coefficients: CoefficientInfo {
            linear_terms: graph.edge_count(),
            quadratic_terms: EdgeAdjacency::new(graph).pair_count(),
            penalty_factor: sampled.then_some(cfg.sampler.penalty_factor),
            value_range,
        },
        workflow: if sampled {
            format!(
                "per iteration: {} sampling on the residual, maximum-weight matching, weight refit",
                cfg.sampler.method.name()
            )
        } else {
            "per iteration: maximum-weight matching on the residual, weight refit".into()
        },
        algorithm_type: "stochastic".into(),
        run_counts: RunCounts {
            runs: 1,
            feasible: 1,
            successful: usize::from(converged && result.error <= cfg.epsilon),
        },
        success_threshold: cfg.epsilon,
        terminated: result.terminated,
        hardware: Hardware::current(),
        runtimes: Runtimes {
            total_seconds: timings.total,
            cpu_seconds: timings.max_weight_matching + timings.weights,
            sampler_seconds: timings.sampling,
        },
    }
}

/// Header of the error-versus-length data file.
pub const TRACE_HEADER: &str = "topology,n,id,method,iteration,length,error";

/// Rows `topology,n,id,method,iteration,length,error`, one per trace point.
pub fn trace_rows(instance: &Instance, label: &str, result: &DecompositionResult) -> String {
    let t = &instance.topology;
    let mut out = String::new();
    for p in &result.decomposition.trace {
        let _ = writeln!(
            out,
            "{},{},{},{label},{},{},{:e}",
            t.kind(),
            t.n(),
            instance.id,
            p.iteration,
            p.length,
            p.error
        );
    }
    out
}

pub const WEIGHTS_HEADER: &str = "topology,n,id,method,entry,matching_weight,alpha";

/// Rows with each final matching's weight under the target and its
/// coefficient.
pub fn weight_rows(instance: &Instance, label: &str, result: &DecompositionResult) -> String {
    let t = &instance.topology;
    let sums = weight_distribution(&result.decomposition, instance.demand.graph());
    let mut out = String::new();
    for (i, (w, (_, alpha))) in sums.iter().zip(&result.decomposition.entries).enumerate() {
        let _ = writeln!(out, "{},{},{},{label},{i},{w},{alpha}", t.kind(), t.n(), instance.id);
    }
    out
}

/// The overlap matrix of the final matchings, one line per row.
pub fn overlap_text(result: &DecompositionResult) -> String {
    let matchings: Vec<_> = result.decomposition.matchings().cloned().collect();
    let mut out = String::new();
    for row in overlap_matrix(&matchings) {
        let line: Vec<String> = row.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}
