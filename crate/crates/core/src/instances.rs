//! Demand-matrix instances over complete, bipartite and heavy-hex
//! topologies, with a JSON file format for corpora.
//!
//! A generated instance is a random convex combination of `n` random
//! matchings of its topology, so an exact decomposition of length at most
//! `n` always exists. The generator data is kept next to the demand matrix.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{combine, DemandMatrix, Edge, Matching, WeightedGraph};

pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

/// Keep probability used for corpus matchings.
pub const DEFAULT_KEEP_PROBABILITY: f64 = 1.0;

/// Recorded in every generated instance so corpora can be reproduced.
pub fn matching_procedure(p: f64) -> String {
    format!("random edge permutation; each compatible edge kept with probability {p}")
}
pub const WEIGHT_PROCEDURE: &str = "normalized standard exponential draws";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    Complete,
    Bipartite,
    HeavyHex,
}

impl TopologyKind {
    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::Complete => "complete",
            TopologyKind::Bipartite => "bipartite",
            TopologyKind::HeavyHex => "heavy-hex",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(TopologyKind::Complete),
            "bipartite" => Ok(TopologyKind::Bipartite),
            "heavy-hex" | "heavyhex" | "heavy_hex" => Ok(TopologyKind::HeavyHex),
            other => Err(Error::InvalidTopology(format!("unknown topology kind {other:?}"))),
        }
    }
}

/// Kind-specific parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TopologyParams {
    /// Part sizes of a complete bipartite graph.
    Bipartite { left: usize, right: usize },
    /// Lattice size before truncation to the first `n` nodes.
    HeavyHex { rows: usize, cols: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TopologySpec", into = "TopologySpec")]
pub struct Topology {
    kind: TopologyKind,
    n: usize,
    params: Option<TopologyParams>,
    edges: Vec<Edge>,
}

/// Serialized form: the edge list is rebuilt from the parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct TopologySpec {
    kind: TopologyKind,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<TopologyParams>,
}

impl TryFrom<TopologySpec> for Topology {
    type Error = Error;

    fn try_from(spec: TopologySpec) -> Result<Self> {
        make_topology(spec.kind, spec.n, spec.params)
    }
}

impl From<Topology> for TopologySpec {
    fn from(t: Topology) -> Self {
        TopologySpec {
            kind: t.kind,
            n: t.n,
            params: t.params,
        }
    }
}

impl Topology {
    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> Option<TopologyParams> {
        self.params
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Unit-weight graph on the topology's edges.
    pub fn graph(&self) -> WeightedGraph {
        WeightedGraph::new(self.n, self.edges.iter().map(|e| (e.u, e.v, 1.0)))
            .expect("topology edges are valid")
    }
}

/// Builds a topology. `params` may be omitted to take the defaults
/// (equal parts, or the smallest square heavy-hex lattice holding `n` nodes).
pub fn make_topology(kind: TopologyKind, n: usize, params: Option<TopologyParams>) -> Result<Topology> {
    if n < 2 {
        return Err(Error::InvalidTopology(format!("need at least 2 nodes, got {n}")));
    }
    let (params, mut edges) = match kind {
        TopologyKind::Complete => {
            if let Some(p) = params {
                return Err(Error::InvalidTopology(format!(
                    "complete graphs take no parameters, got {p:?}"
                )));
            }
            let mut edges = Vec::with_capacity(n * (n - 1) / 2);
            for u in 0..n {
                for v in u + 1..n {
                    edges.push(Edge::new(u, v));
                }
            }
            (None, edges)
        }
        TopologyKind::Bipartite => {
            let (left, right) = match params {
                None if n % 2 == 0 => (n / 2, n / 2),
                None => {
                    return Err(Error::InvalidTopology(format!(
                        "bipartite topology needs an even node count, got {n}"
                    )))
                }
                Some(TopologyParams::Bipartite { left, right }) => (left, right),
                Some(p) => {
                    return Err(Error::InvalidTopology(format!(
                        "bipartite topology got parameters {p:?}"
                    )))
                }
            };
            if left + right != n || left == 0 || right == 0 {
                return Err(Error::InvalidTopology(format!(
                    "part sizes {left} + {right} do not split {n} nodes"
                )));
            }
            let mut edges = Vec::with_capacity(left * right);
            for u in 0..left {
                for v in left..n {
                    edges.push(Edge::new(u, v));
                }
            }
            (Some(TopologyParams::Bipartite { left, right }), edges)
        }
        TopologyKind::HeavyHex => {
            let (rows, cols) = match params {
                None => default_heavy_hex_size(n),
                Some(TopologyParams::HeavyHex { rows, cols }) => (rows, cols),
                Some(p) => {
                    return Err(Error::InvalidTopology(format!(
                        "heavy-hex topology got parameters {p:?}"
                    )))
                }
            };
            let lattice = heavy_hex_lattice(rows, cols)?;
            if lattice.len() < n {
                return Err(Error::InvalidTopology(format!(
                    "heavy-hex lattice with {rows} rows and {cols} columns has {} nodes, fewer than {n}",
                    lattice.len()
                )));
            }
            (Some(TopologyParams::HeavyHex { rows, cols }), bfs_prefix(&lattice, n))
        }
    };
    edges.sort_unstable();
    Ok(Topology { kind, n, params, edges })
}

/// Node count of the heavy-hex lattice with the given size.
pub fn heavy_hex_node_count(rows: usize, cols: usize) -> usize {
    rows * (4 * cols + 3) + rows.saturating_sub(1) * (cols + 1)
}

fn default_heavy_hex_size(n: usize) -> (usize, usize) {
    let mut s = 1;
    while heavy_hex_node_count(s, s) < n {
        s += 1;
    }
    (s, s)
}

/// Adjacency lists of the heavy-hex lattice.
///
/// The lattice has `rows` horizontal lines of `4·cols + 3` nodes. Between
/// consecutive lines sit `cols + 1` bridge nodes of degree two, attached at
/// line positions `0, 4, 8, …` below even lines and `2, 6, 10, …` below odd
/// lines, so every line node has degree at most three.
pub fn heavy_hex_lattice(rows: usize, cols: usize) -> Result<Vec<Vec<usize>>> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidTopology(format!(
            "heavy-hex lattice needs positive size, got {rows} rows and {cols} columns"
        )));
    }
    let width = 4 * cols + 3;
    let total = heavy_hex_node_count(rows, cols);
    let mut adj = vec![Vec::new(); total];
    let mut link = |a: usize, b: usize| {
        adj[a].push(b);
        adj[b].push(a);
    };
    let line = |r: usize, p: usize| r * width + p;
    for r in 0..rows {
        for p in 0..width - 1 {
            link(line(r, p), line(r, p + 1));
        }
    }
    let mut next = rows * width;
    for r in 0..rows - 1 {
        let offset = if r % 2 == 0 { 0 } else { 2 };
        for b in 0..=cols {
            let p = offset + 4 * b;
            link(line(r, p), next);
            link(next, line(r + 1, p));
            next += 1;
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    Ok(adj)
}

/// Edges induced by the first `n` nodes reached by breadth-first search from
/// node 0, relabeled in visiting order.
fn bfs_prefix(adj: &[Vec<usize>], n: usize) -> Vec<Edge> {
    let mut label = vec![usize::MAX; adj.len()];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([0]);
    label[0] = 0;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        if order.len() == n {
            break;
        }
        for &w in &adj[v] {
            if label[w] == usize::MAX {
                label[w] = usize::MAX - 1;
                queue.push_back(w);
            }
        }
    }
    for (i, &v) in order.iter().enumerate() {
        label[v] = i;
    }
    let mut edges = Vec::new();
    for &v in &order {
        for &w in &adj[v] {
            if label[w] < n && label[v] < label[w] {
                edges.push(Edge::new(label[v], label[w]));
            }
        }
    }
    edges
}

/// Random matching of the topology: shuffle the edges, then keep each edge
/// that is compatible with those already kept with probability 1/2.
pub fn sample_random_matching<R: Rng + ?Sized>(topology: &Topology, rng: &mut R) -> Matching {
    sample_matching_with(topology, 0.5, rng)
}

/// As [`sample_random_matching`] with keep probability `p`. With `p = 1`
/// the result is a uniformly shuffled greedy maximal matching.
pub fn sample_matching_with<R: Rng + ?Sized>(topology: &Topology, p: f64, rng: &mut R) -> Matching {
    let mut order = topology.edges.clone();
    order.shuffle(rng);
    let mut used = vec![false; topology.n];
    let mut kept = Vec::new();
    for e in order {
        if used[e.u] || used[e.v] {
            continue;
        }
        if p >= 1.0 || rng.random_bool(p) {
            used[e.u] = true;
            used[e.v] = true;
            kept.push(e);
        }
    }
    Matching::new(kept).expect("kept edges are disjoint")
}

/// Matchings and weights that produced an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub matching_procedure: String,
    #[serde(default)]
    pub weight_procedure: String,
    pub matchings: Vec<Matching>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub id: String,
    pub topology: Topology,
    pub demand: DemandMatrix,
    pub generator: Option<Generator>,
}

impl Instance {
    /// The generator's matchings and weights as decomposition entries.
    pub fn generator_entries(&self) -> Option<Vec<(Matching, f64)>> {
        self.generator.as_ref().map(|g| {
            g.matchings
                .iter()
                .cloned()
                .zip(g.weights.iter().copied())
                .collect()
        })
    }
}

/// `D* = Σ α_i M_i` restricted to its support.
pub fn demand_from(n: usize, entries: &[(Matching, f64)]) -> Result<DemandMatrix> {
    let combined = combine(entries);
    let graph = WeightedGraph::new(
        n,
        combined
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .map(|(e, w)| (e.u, e.v, w.min(1.0))),
    )?;
    DemandMatrix::new(graph)
}

/// Draws `n` matchings and uniform simplex weights and combines them.
pub fn generate_instance<R: Rng + ?Sized>(
    topology: &Topology,
    id: impl Into<String>,
    rng: &mut R,
) -> Result<Instance> {
    generate_instance_with(topology, id, DEFAULT_KEEP_PROBABILITY, rng)
}

/// As [`generate_instance`] with matchings drawn by
/// [`sample_matching_with`] at keep probability `p`.
pub fn generate_instance_with<R: Rng + ?Sized>(
    topology: &Topology,
    id: impl Into<String>,
    p: f64,
    rng: &mut R,
) -> Result<Instance> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Config(format!("keep probability must lie in (0, 1], got {p}")));
    }
    let n = topology.n;
    let matchings: Vec<Matching> = (0..n).map(|_| sample_matching_with(topology, p, rng)).collect();
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    let weights: Vec<f64> = draws.iter().map(|x| x / total).collect();
    let entries: Vec<(Matching, f64)> = matchings.iter().cloned().zip(weights.iter().copied()).collect();
    Ok(Instance {
        id: id.into(),
        topology: topology.clone(),
        demand: demand_from(n, &entries)?,
        generator: Some(Generator {
            seed: None,
            matching_procedure: matching_procedure(p),
            weight_procedure: WEIGHT_PROCEDURE.to_string(),
            matchings,
            weights,
        }),
    })
}

/// Conventional instance id, also the file stem.
pub fn instance_id(kind: TopologyKind, n: usize, k: usize) -> String {
    format!("{}_n{n}_id{k}", kind.name())
}

/// Generates corpus member `k` of a topology from a ChaCha8 stream seeded
/// with `seed`.
pub fn generate_seeded(topology: &Topology, k: usize, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = generate_instance(topology, instance_id(topology.kind, topology.n, k), &mut rng)?;
    if let Some(g) = inst.generator.as_mut() {
        g.seed = Some(seed);
    }
    Ok(inst)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    schema_version: u32,
    id: String,
    topology: Topology,
    edges: Vec<Edge>,
    weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<Generator>,
}

/// Serializes an instance as pretty JSON. Floats use the shortest
/// representation that parses back to the same bits.
pub fn instance_to_string(instance: &Instance) -> String {
    let file = InstanceFile {
        schema_version: INSTANCE_SCHEMA_VERSION,
        id: instance.id.clone(),
        topology: instance.topology.clone(),
        edges: instance.demand.graph().edges().to_vec(),
        weights: instance.demand.graph().weights().to_vec(),
        generator: instance.generator.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
    s.push('\n');
    s
}

pub fn save_instance(instance: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, instance_to_string(instance)).map_err(|e| Error::io(path, e))
}

/// Parses an instance document; `origin` names the source in errors.
pub fn instance_from_str(text: &str, origin: &str) -> Result<Instance> {
    let parse = |message: String| Error::Parse {
        path: origin.to_string(),
        message,
    };
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| parse(e.to_string()))?;
    match raw.get("schema_version") {
        Some(serde_json::Value::Number(v)) if v.as_u64() == Some(INSTANCE_SCHEMA_VERSION as u64) => {}
        Some(other) => {
            return Err(Error::Schema {
                path: origin.to_string(),
                found: other.to_string(),
                supported: INSTANCE_SCHEMA_VERSION,
            })
        }
        None => return Err(parse("missing field `schema_version`".into())),
    }
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| parse(e.to_string()))?;
    if file.edges.len() != file.weights.len() {
        return Err(parse(format!(
            "field `weights` has {} entries for {} edges",
            file.weights.len(),
            file.edges.len()
        )));
    }
    let n = file.topology.n();
    let allowed: BTreeSet<Edge> = file.topology.edges().iter().copied().collect();
    if let Some(e) = file.edges.iter().find(|e| !allowed.contains(e)) {
        return Err(parse(format!(
            "field `edges`: ({}, {}) is not an edge of the {} topology",
            e.u, e.v, file.topology.kind
        )));
    }
    let graph = WeightedGraph::new(n, file.edges.iter().zip(&file.weights).map(|(e, &w)| (e.u, e.v, w)))
        .map_err(|e| parse(format!("field `edges`: {e}")))?;
    let demand = DemandMatrix::new(graph).map_err(|e| parse(format!("field `weights`: {e}")))?;
    if let Some(g) = &file.generator {
        if g.matchings.len() != g.weights.len() {
            return Err(parse(format!(
                "field `generator`: {} matchings but {} weights",
                g.matchings.len(),
                g.weights.len()
            )));
        }
        if let Some(m) = g.matchings.iter().find(|m| m.edges().iter().any(|e| !allowed.contains(e))) {
            return Err(parse(format!(
                "field `generator.matchings`: {m:?} leaves the topology"
            )));
        }
    }
    Ok(Instance {
        id: file.id,
        topology: file.topology,
        demand,
        generator: file.generator,
    })
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    instance_from_str(&text, &path.display().to_string())
}

/// Hex SHA-256 of the serialized instance.
pub fn content_hash(instance: &Instance) -> String {
    let digest = Sha256::digest(instance_to_string(instance).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts() {
        let c = make_topology(TopologyKind::Complete, 6, None).unwrap();
        assert_eq!(c.edges().len(), 15);
        let b = make_topology(TopologyKind::Bipartite, 6, None).unwrap();
        assert_eq!(b.edges().len(), 9);
        assert!(b.edges().iter().all(|e| e.u < 3 && e.v >= 3));
        assert!(make_topology(TopologyKind::Bipartite, 5, None).is_err());
        assert!(make_topology(TopologyKind::Complete, 1, None).is_err());
    }

    #[test]
    fn heavy_hex_lattice_shape() {
        let adj = heavy_hex_lattice(3, 3).unwrap();
        assert_eq!(adj.len(), 53);
        assert!(adj.iter().all(|a| a.len() <= 3));
        let edges: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;
        // 3 lines of 14 edges plus 2 bands of 4 bridges with 2 edges each.
        assert_eq!(edges, 3 * 14 + 2 * 4 * 2);
    }

    #[test]
    fn heavy_hex_fifty_nodes() {
        let t = make_topology(TopologyKind::HeavyHex, 50, None).unwrap();
        assert_eq!(t.params(), Some(TopologyParams::HeavyHex { rows: 3, cols: 3 }));
        let g = t.graph();
        assert_eq!(g.node_count(), 50);
        assert!(g.max_degree() <= 3);
        assert!(g.is_connected());
    }

    #[test]
    fn heavy_hex_too_small() {
        let p = TopologyParams::HeavyHex { rows: 1, cols: 1 };
        assert!(make_topology(TopologyKind::HeavyHex, 8, Some(p)).is_err());
    }

    #[test]
    fn single_edge_instance_has_unit_weight() {
        let t = make_topology(TopologyKind::Complete, 2, None).unwrap();
        let inst = generate_seeded(&t, 0, 3).unwrap();
        let g = inst.generator.as_ref().unwrap();
        assert_eq!(g.matchings.len(), 2);
        assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn topology_serializes_without_edges() {
        let t = make_topology(TopologyKind::HeavyHex, 20, None).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert!(!s.contains("edges"));
        let back: Topology = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }
}
