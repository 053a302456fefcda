//! Benchmark harness behind the command-line tool: corpus generation,
//! method sweeps, reports and table comparison.
//!
//! Output layout under the profile's output directory:
//!
//! ```text
//! instances/<id>.instance
//! results/<id>__<method>.json
//! summary.csv
//! reports/<id>__<method>.report.json
//! plots/error_vs_length.csv
//! plots/weights.csv
//! plots/overlap/<id>__<method>.csv
//! ```

pub mod profile;
pub mod report;
pub mod summary;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{run_with_id, DecompositionResult, Termination};
use crate::error::{Error, Result};
use crate::instances::{content_hash, generate_instance_with, instance_to_string, load_instance, Instance};
use crate::samplers::derive_seed;

pub use profile::{MethodSpec, Overrides, PlannedInstance, Profile};
pub use report::BenchReport;
pub use summary::{compare, CompareTolerance, DiffRow, SummaryTable};

pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// Paths inside an output directory.
#[derive(Clone, Debug)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn instance(&self, id: &str) -> PathBuf {
        self.root.join("instances").join(format!("{id}.instance"))
    }

    pub fn result(&self, id: &str, label: &str) -> PathBuf {
        self.root.join("results").join(format!("{id}__{label}.json"))
    }

    pub fn report(&self, id: &str, label: &str) -> PathBuf {
        self.root.join("reports").join(format!("{id}__{label}.report.json"))
    }

    pub fn overlap(&self, id: &str, label: &str) -> PathBuf {
        self.root.join("plots").join("overlap").join(format!("{id}__{label}.csv"))
    }

    pub fn summary(&self) -> PathBuf {
        self.root.join("summary.csv")
    }

    pub fn plots(&self) -> PathBuf {
        self.root.join("plots")
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Stored outcome of one (instance, method) run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunFile {
    pub schema_version: u32,
    pub instance_id: String,
    pub instance_sha256: String,
    pub method: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<DecompositionResult>,
}

impl RunFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let origin = path.display().to_string();
        let raw: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: origin.clone(),
            message: e.to_string(),
        })?;
        let version = raw.get("schema_version").and_then(|v| v.as_u64());
        if version != Some(RESULT_SCHEMA_VERSION as u64) {
            return Err(Error::Schema {
                path: origin,
                found: raw.get("schema_version").map_or("none".into(), |v| v.to_string()),
                supported: RESULT_SCHEMA_VERSION,
            });
        }
        serde_json::from_value(raw).map_err(|e| Error::Parse {
            path: origin,
            message: e.to_string(),
        })
    }
}

/// Seed of one run, independent of scheduling order.
pub fn run_seed(base: u64, instance_id: &str, label: &str) -> u64 {
    let digest = Sha256::digest(format!("{instance_id}\u{0}{label}").as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    derive_seed(base, u64::from_le_bytes(bytes))
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j);
    }
    b.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

fn build_instance(profile: &Profile, slot: &PlannedInstance) -> Result<Instance> {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(slot.seed);
    let mut inst = generate_instance_with(&slot.topology, slot.id.clone(), profile.corpus.keep_probability, &mut rng)?;
    if let Some(g) = inst.generator.as_mut() {
        g.seed = Some(slot.seed);
    }
    Ok(inst)
}

/// Writes every corpus instance. Existing files are overwritten with the
/// same bytes, so repeated calls are idempotent.
pub fn cmd_generate(profile: &Profile) -> Result<Vec<PathBuf>> {
    let layout = Layout::new(&profile.output);
    let plan = profile.plan()?;
    let pool = pool(profile.jobs)?;
    pool.install(|| {
        plan.par_iter()
            .map(|slot| {
                let inst = build_instance(profile, slot)?;
                let path = layout.instance(&slot.id);
                write(&path, &instance_to_string(&inst))?;
                Ok(path)
            })
            .collect()
    })
}

/// Loads an instance of the corpus, generating it first if absent.
fn ensure_instance(profile: &Profile, layout: &Layout, slot: &PlannedInstance) -> Result<Instance> {
    let path = layout.instance(&slot.id);
    if !path.exists() {
        let inst = build_instance(profile, slot)?;
        write(&path, &instance_to_string(&inst))?;
    }
    load_instance(&path)
}

/// Outcome of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub table: SummaryTable,
    pub failures: Vec<(String, String, String)>,
    pub summary_path: PathBuf,
}

/// Runs every method on every instance and writes the results and the
/// summary table.
pub fn cmd_run(profile: &Profile) -> Result<RunSummary> {
    let layout = Layout::new(&profile.output);
    let plan = profile.plan()?;
    let pool = pool(profile.jobs)?;
    let instances: Vec<Instance> = plan
        .iter()
        .map(|slot| ensure_instance(profile, &layout, slot))
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..profile.methods.len()).map(move |j| (i, j)))
        .collect();
    let outcomes: Vec<Result<RunFile>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, j)| {
                let inst = &instances[i];
                let method = &profile.methods[j];
                let seed = run_seed(profile.seed, &inst.id, &method.label);
                let cfg = method.engine_config(&profile.engine, seed);
                let (result, failure) = match run_with_id(&inst.demand, &cfg, Some(&inst.id)) {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                let file = RunFile {
                    schema_version: RESULT_SCHEMA_VERSION,
                    instance_id: inst.id.clone(),
                    instance_sha256: content_hash(inst),
                    method: method.label.clone(),
                    seed,
                    failure,
                    result,
                };
                let text = serde_json::to_string_pretty(&file).expect("result serializes") + "\n";
                write(&layout.result(&inst.id, &method.label), &text)?;
                Ok(file)
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(instances.len());
    let mut failures = Vec::new();
    let mut outcomes = outcomes.into_iter();
    for (slot, inst) in plan.iter().zip(&instances) {
        let mut cells = Vec::with_capacity(profile.methods.len());
        for method in &profile.methods {
            let file = outcomes.next().expect("one outcome per job")?;
            cells.push(match (&file.result, &file.failure) {
                (Some(r), _) => summary::Cell::Done {
                    length: r.decomposition.length(),
                    error: r.error,
                    reached: r.terminated == Termination::Converged && r.error <= profile.engine.epsilon,
                },
                (None, message) => {
                    failures.push((inst.id.clone(), method.label.clone(), message.clone().unwrap_or_default()));
                    summary::Cell::Failed
                }
            });
        }
        rows.push(summary::SummaryRow {
            topology: slot.topology.kind().name().to_string(),
            n: slot.topology.n(),
            index: slot.index,
            cells,
        });
    }
    let table = SummaryTable {
        methods: profile.methods.iter().map(|m| m.label.clone()).collect(),
        rows,
    };
    let summary_path = layout.summary();
    write(&summary_path, &table.to_csv())?;
    Ok(RunSummary {
        table,
        failures,
        summary_path,
    })
}

/// Reads the stored results of a profile and writes reports and plot data.
/// A missing result file is an error naming that file; failed runs are
/// skipped.
pub fn cmd_report(profile: &Profile) -> Result<Vec<BenchReport>> {
    let layout = Layout::new(&profile.output);
    let plan = profile.plan()?;
    let date = chrono::Utc::now().format("%Y-%m-%d").to_string();
    let mut reports = Vec::new();
    let mut trace = format!("{}\n", report::TRACE_HEADER);
    let mut weights = format!("{}\n", report::WEIGHTS_HEADER);
    for slot in &plan {
        let inst_path = layout.instance(&slot.id);
        let inst = load_instance(&inst_path)?;
        for method in &profile.methods {
            let path = layout.result(&slot.id, &method.label);
            if !path.exists() {
                return Err(Error::Io {
                    path: path.display().to_string(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "result file not found; run first"),
                });
            }
            let file = RunFile::load(&path)?;
            if file.instance_sha256 != content_hash(&inst) {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    message: format!("instance hash does not match {}", inst_path.display()),
                });
            }
            let Some(result) = file.result else { continue };
            let r = report::bench_report(&inst, &method.label, &result, &profile.submitter, &date);
            let text = serde_json::to_string_pretty(&r).expect("report serializes") + "\n";
            write(&layout.report(&slot.id, &method.label), &text)?;
            trace += &report::trace_rows(&inst, &method.label, &result);
            weights += &report::weight_rows(&inst, &method.label, &result);
            write(&layout.overlap(&slot.id, &method.label), &report::overlap_text(&result))?;
            reports.push(r);
        }
    }
    write(&layout.plots().join("error_vs_length.csv"), &trace)?;
    write(&layout.plots().join("weights.csv"), &weights)?;
    Ok(reports)
}

/// Compares two summary files.
pub fn cmd_compare(before: &Path, after: &Path, tol: &CompareTolerance) -> Result<Vec<DiffRow>> {
    let a = SummaryTable::load(before)?;
    let b = SummaryTable::load(after)?;
    Ok(compare(&a, &b, tol))
}
