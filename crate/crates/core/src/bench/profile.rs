//! Experiment profiles: which corpus to build, which methods to run on it,
//! and with which engine settings. Profiles are TOML documents.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{EngineConfig, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::instances::{make_topology, Topology, TopologyKind, TopologyParams, DEFAULT_KEEP_PROBABILITY};
use crate::qaoa::{ParamMode, ParamOrder};
use crate::samplers::{Method, SamplerConfig};
use crate::weights::SolverConfig;

pub const PROFILE_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    /// Output directory; relative paths resolve against the working directory.
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Worker threads; `None` uses every available core.
    #[serde(default)]
    pub jobs: Option<usize>,
    /// Base seed for engine runs.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_submitter")]
    pub submitter: String,
    pub corpus: CorpusSpec,
    #[serde(default)]
    pub engine: EngineSettings,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    /// Instance `k` of every topology is generated from seed `base_seed + k`.
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_keep_probability")]
    pub keep_probability: f64,
    pub topologies: Vec<CorpusEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub kind: TopologyKind,
    pub sizes: Vec<usize>,
    /// Overrides the corpus-wide instance count.
    #[serde(default)]
    pub instances: Option<usize>,
    /// Heavy-hex lattice size; both or neither.
    #[serde(default)]
    pub rows: Option<usize>,
    #[serde(default)]
    pub cols: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSettings {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            epsilon: DEFAULT_EPSILON,
            max_iterations: None,
            solver: SolverConfig::default(),
        }
    }
}

/// One column of the summary table. Without a sampler the method is plain
/// fully-corrective Frank-Wolfe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub label: String,
    #[serde(default)]
    pub sampler: Option<SamplerConfig>,
}

impl MethodSpec {
    pub fn fcfw() -> Self {
        MethodSpec {
            label: "MW".into(),
            sampler: None,
        }
    }

    pub fn sampled(method: Method) -> Self {
        let label = match method {
            Method::Random => "Rand",
            Method::Qaoa => "QAOA",
            Method::Anneal => "SA",
        };
        MethodSpec {
            label: label.into(),
            sampler: Some(SamplerConfig::new(method)),
        }
    }

    /// `fcfw` or the sampler name.
    pub fn kind_name(&self) -> &'static str {
        self.sampler.as_ref().map_or("fcfw", |s| s.method.name())
    }

    pub fn engine_config(&self, settings: &EngineSettings, seed: u64) -> EngineConfig {
        let (d, sampler) = match &self.sampler {
            Some(s) => (s.d, s.clone()),
            None => (0, SamplerConfig::new(Method::Random)),
        };
        EngineConfig {
            epsilon: settings.epsilon,
            d,
            max_iterations: settings.max_iterations,
            sampler,
            solver: settings.solver.clone(),
            seed,
        }
    }
}

fn default_output() -> PathBuf {
    PathBuf::from("bench-out")
}

fn default_submitter() -> String {
    "matchdecomp".into()
}

fn default_instances() -> usize {
    10
}

fn default_keep_probability() -> f64 {
    DEFAULT_KEEP_PROBABILITY
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

pub fn default_methods() -> Vec<MethodSpec> {
    vec![
        MethodSpec::fcfw(),
        MethodSpec::sampled(Method::Random),
        MethodSpec::sampled(Method::Qaoa),
        MethodSpec::sampled(Method::Anneal),
    ]
}

/// A topology instance slot of the corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannedInstance {
    pub topology: Topology,
    pub index: usize,
    pub seed: u64,
    pub id: String,
}

/// Command-line values that take precedence over the profile.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub method: Option<String>,
    pub epsilon: Option<f64>,
    pub d: Option<usize>,
    pub shots: Option<usize>,
    /// `(γ, β)`.
    pub fixed_params: Option<(f64, f64)>,
}

impl Profile {
    /// Complete graphs on 6 to 9 nodes, ten instances each, all four methods.
    pub fn default_profile() -> Self {
        Profile {
            schema_version: PROFILE_SCHEMA_VERSION,
            name: "complete".into(),
            output: default_output(),
            jobs: None,
            seed: 0,
            submitter: default_submitter(),
            corpus: CorpusSpec {
                base_seed: 0,
                instances: default_instances(),
                keep_probability: DEFAULT_KEEP_PROBABILITY,
                topologies: vec![CorpusEntry {
                    kind: TopologyKind::Complete,
                    sizes: vec![6, 7, 8, 9],
                    instances: None,
                    rows: None,
                    cols: None,
                }],
            },
            engine: EngineSettings::default(),
            methods: default_methods(),
        }
    }

    pub fn from_toml(text: &str, origin: &str) -> Result<Self> {
        let parse = |message: String| Error::Parse {
            path: origin.to_string(),
            message,
        };
        let table: toml::Table = toml::from_str(text).map_err(|e| parse(e.to_string()))?;
        match table.get("schema_version") {
            Some(toml::Value::Integer(v)) if *v == PROFILE_SCHEMA_VERSION as i64 => {}
            Some(other) => {
                return Err(Error::Schema {
                    path: origin.to_string(),
                    found: other.to_string(),
                    supported: PROFILE_SCHEMA_VERSION,
                })
            }
            None => return Err(parse("missing field `schema_version`".into())),
        }
        let profile: Profile = toml::from_str(text).map_err(|e| parse(e.to_string()))?;
        profile.validate().map_err(|e| parse(e.to_string()))?;
        Ok(profile)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("profile serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if !(self.engine.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.engine.epsilon
            )));
        }
        let p = self.corpus.keep_probability;
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Config(format!("keep_probability must lie in (0, 1], got {p}")));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("profile lists no methods".into()));
        }
        let mut labels: Vec<&str> = self.methods.iter().map(|m| m.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("method label {:?} appears twice", w[0])));
        }
        for m in &self.methods {
            if m.label.is_empty() || m.label.contains([',', '/', '\\']) {
                return Err(Error::Config(format!(
                    "method label {:?} must be non-empty without ',', '/' or '\\'",
                    m.label
                )));
            }
            if let Some(s) = &m.sampler {
                s.validate().map_err(|e| Error::Config(format!("method {}: {e}", m.label)))?;
            }
        }
        self.plan().map(|_| ())
    }

    /// Every instance slot, ordered by topology kind, size and index.
    pub fn plan(&self) -> Result<Vec<PlannedInstance>> {
        let mut out = Vec::new();
        for entry in &self.corpus.topologies {
            let params = match (entry.rows, entry.cols) {
                (None, None) => None,
                (Some(rows), Some(cols)) if entry.kind == TopologyKind::HeavyHex => {
                    Some(TopologyParams::HeavyHex { rows, cols })
                }
                _ => {
                    return Err(Error::Config(format!(
                        "rows and cols apply to heavy-hex entries and must be given together ({} entry)",
                        entry.kind
                    )))
                }
            };
            for &n in &entry.sizes {
                let topology = make_topology(entry.kind, n, params)?;
                for index in 0..entry.instances.unwrap_or(self.corpus.instances) {
                    out.push(PlannedInstance {
                        id: crate::instances::instance_id(entry.kind, n, index),
                        seed: self.corpus.base_seed.wrapping_add(index as u64),
                        topology: topology.clone(),
                        index,
                    });
                }
            }
        }
        out.sort_by(|a, b| {
            (a.topology.kind(), a.topology.n(), a.index).cmp(&(b.topology.kind(), b.topology.n(), b.index))
        });
        if let Some(w) = out.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Config(format!("instance {} is listed twice", w[0].id)));
        }
        Ok(out)
    }

    /// Applies command-line overrides and re-validates.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(out) = &o.out {
            self.output = out.clone();
        }
        if o.jobs.is_some() {
            self.jobs = o.jobs;
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(eps) = o.epsilon {
            self.engine.epsilon = eps;
        }
        if let Some(name) = &o.method {
            let wanted = name.to_ascii_lowercase();
            self.methods.retain(|m| {
                m.label.to_ascii_lowercase() == wanted || m.kind_name() == wanted
            });
            if self.methods.is_empty() {
                return Err(Error::Config(format!("no method in the profile matches {name:?}")));
            }
        }
        for m in &mut self.methods {
            let Some(s) = m.sampler.as_mut() else { continue };
            if let Some(d) = o.d {
                s.d = d;
            }
            if let Some(shots) = o.shots {
                s.shots = Some(shots);
            }
            if let (Some((g, b)), Method::Qaoa) = (o.fixed_params, s.method) {
                s.qaoa.params = ParamMode::Fixed {
                    values: [g, b],
                    order: ParamOrder::GammaBeta,
                };
            }
        }
        if o.d == Some(0) {
            // Sampling disabled: every sampled method collapses to plain FCFW.
            self.methods.retain(|m| m.sampler.is_none());
            if self.methods.is_empty() {
                self.methods.push(MethodSpec::fcfw());
            }
        }
        self.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_profile_round_trips() {
        let p = Profile::default_profile();
        let text = p.to_toml();
        assert_eq!(Profile::from_toml(&text, "x").unwrap(), p);
        assert_eq!(p.plan().unwrap().len(), 40);
    }

    #[test]
    fn minimal_profile() {
        let text = r#"
            schema_version = 1
            [corpus]
            instances = 3
            [[corpus.topologies]]
            kind = "heavy-hex"
            sizes = [50]
        "#;
        let p = Profile::from_toml(text, "p.toml").unwrap();
        assert_eq!(p.methods.len(), 4);
        let plan = p.plan().unwrap();
        assert_eq!(plan.len(), 3);
        assert_eq!(plan[2].id, "heavy-hex_n50_id2");
    }

    #[test]
    fn unknown_major_version_is_rejected() {
        let err = Profile::from_toml("schema_version = 2\n[corpus]\ntopologies = []\n", "p.toml").unwrap_err();
        assert!(matches!(err, Error::Schema { .. }));
    }

    #[test]
    fn zero_d_override_keeps_only_fcfw() {
        let mut p = Profile::default_profile();
        p.apply(&Overrides {
            d: Some(0),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(p.methods, vec![MethodSpec::fcfw()]);
    }

    #[test]
    fn fixed_params_override() {
        let mut p = Profile::default_profile();
        p.apply(&Overrides {
            method: Some("qaoa".into()),
            fixed_params: Some((0.5, -0.5)),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(p.methods.len(), 1);
        let s = p.methods[0].sampler.as_ref().unwrap();
        assert_eq!(
            s.qaoa.params,
            ParamMode::Fixed {
                values: [0.5, -0.5],
                order: ParamOrder::GammaBeta
            }
        );
    }
}
