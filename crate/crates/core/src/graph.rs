//! Weighted graphs, matchings, decompositions and the approximation error.
//!
//! Graphs are kept as sorted edge lists: an undirected edge `(u, v)` is stored
//! once with `u < v` and stands for both symmetric matrix entries. The
//! position of an edge in the sorted list is its index everywhere else in the
//! crate (QUBO variable, qubit, bit of a sampled bitstring).

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::error::{Error, Result};

/// Slack allowed on node sums of a demand matrix.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Undirected edge with canonical endpoint order `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

impl Edge {
    /// Builds the canonical form of `{a, b}`. Self-loops are representable
    /// here and rejected by the graph and matching constructors.
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn shares_node(&self, other: &Edge) -> bool {
        self.u == other.u || self.u == other.v || self.v == other.u || self.v == other.v
    }
}

impl From<[usize; 2]> for Edge {
    fn from(e: [usize; 2]) -> Self {
        Edge::new(e[0], e[1])
    }
}

impl From<Edge> for [usize; 2] {
    fn from(e: Edge) -> Self {
        [e.u, e.v]
    }
}

/// Undirected graph with real edge weights.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    weights: Vec<f64>,
    lookup: HashMap<Edge, usize>,
    incident: Vec<Vec<usize>>,
}

impl PartialEq for WeightedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges && self.weights == other.weights
    }
}

impl WeightedGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut list: Vec<(Edge, f64)> = Vec::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) references a node outside 0..{n}"
                )));
            }
            if !w.is_finite() {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) has weight {w}")));
            }
            list.push((Edge::new(a, b), w));
        }
        list.sort_by(|x, y| x.0.cmp(&y.0));
        if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                pair[0].0.u, pair[0].0.v
            )));
        }
        let (edges, weights): (Vec<Edge>, Vec<f64>) = list.into_iter().unzip();
        Ok(Self::from_sorted(n, edges, weights))
    }

    fn from_sorted(n: usize, edges: Vec<Edge>, weights: Vec<f64>) -> Self {
        let mut incident = vec![Vec::new(); n];
        let mut lookup = HashMap::with_capacity(edges.len());
        for (j, e) in edges.iter().enumerate() {
            incident[e.u].push(j);
            incident[e.v].push(j);
            lookup.insert(*e, j);
        }
        WeightedGraph {
            n,
            edges,
            weights,
            lookup,
            incident,
        }
    }

    /// Same edge set, new weights (aligned with the edge order).
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} edges",
                weights.len(),
                self.edges.len()
            )));
        }
        Ok(Self::from_sorted(self.n, self.edges.clone(), weights))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.edges.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn edge_id(&self, e: Edge) -> Option<usize> {
        self.lookup.get(&e).copied()
    }

    /// Weight of the symmetric entry `(a, b)`; `None` when there is no edge.
    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.edge_id(Edge::new(a, b)).map(|j| self.weights[j])
    }

    /// Edge ids incident to `node`, in increasing order.
    pub fn incident(&self, node: usize) -> &[usize] {
        &self.incident[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.incident[node].len()
    }

    pub fn max_degree(&self) -> usize {
        self.incident.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Sum of the weights incident to `node` (the row sum of the matrix).
    pub fn node_sum(&self, node: usize) -> f64 {
        self.incident[node].iter().map(|&j| self.weights[j]).sum()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &j in &self.incident[x] {
                let e = self.edges[j];
                let y = if e.u == x { e.v } else { e.u };
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == self.n
    }
}

/// Symmetric doubly substochastic matrix held as a weighted graph.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandMatrix {
    graph: WeightedGraph,
}

impl DemandMatrix {
    pub fn new(graph: WeightedGraph) -> Result<Self> {
        for (e, w) in graph.iter() {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InvalidDemand(format!(
                    "entry ({}, {}) = {w} is outside [0, 1]",
                    e.u, e.v
                )));
            }
        }
        for node in 0..graph.node_count() {
            let s = graph.node_sum(node);
            if s > 1.0 + ROW_SUM_TOLERANCE {
                return Err(Error::InvalidDemand(format!(
                    "row sum of node {node} is {s}, which exceeds 1"
                )));
            }
        }
        Ok(DemandMatrix { graph })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.node_count()
    }

    /// Squared Frobenius norm of the full symmetric matrix.
    pub fn frobenius_sq(&self) -> f64 {
        2.0 * self.graph.weights().iter().map(|w| w * w).sum::<f64>()
    }
}

/// Deterministic edge ↔ index map (lexicographic edge order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeIndexing {
    edges: Vec<Edge>,
    index: HashMap<Edge, usize>,
}

impl EdgeIndexing {
    pub fn new(graph: &WeightedGraph) -> Self {
        Self::from_edges(graph.edges().iter().copied())
    }

    pub fn from_edges(edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        edges.sort();
        edges.dedup();
        let index = edges.iter().enumerate().map(|(j, e)| (*e, j)).collect();
        EdgeIndexing { edges, index }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge(&self, j: usize) -> Edge {
        self.edges[j]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn index_of(&self, e: Edge) -> Option<usize> {
        self.index.get(&e).copied()
    }
}

/// Builds the lexicographic indexing of a graph's edges.
pub fn build_edge_indexing(graph: &WeightedGraph) -> EdgeIndexing {
    EdgeIndexing::new(graph)
}

/// Edges selected by `x` (bit `j` selects edge `j`).
pub fn bitstring_to_subgraph(x: &Bitstring, idx: &EdgeIndexing) -> Result<Vec<Edge>> {
    if x.len() != idx.len() {
        return Err(Error::LengthMismatch {
            expected: idx.len(),
            got: x.len(),
        });
    }
    Ok(x.iter_ones().map(|j| idx.edge(j)).collect())
}

/// Inverse of [`bitstring_to_subgraph`]; fails on edges the indexing lacks.
pub fn subgraph_to_bitstring(edges: &[Edge], idx: &EdgeIndexing) -> Result<Bitstring> {
    let mut x = Bitstring::zeros(idx.len());
    for e in edges {
        let j = idx.index_of(*e).ok_or_else(|| {
            Error::DimensionMismatch(format!("edge ({}, {}) is not in the indexing", e.u, e.v))
        })?;
        x.set(j, true);
    }
    Ok(x)
}

/// True iff no node is covered twice. The empty set is a matching.
pub fn is_matching(edges: &[Edge]) -> bool {
    let mut seen = std::collections::HashSet::with_capacity(2 * edges.len());
    edges
        .iter()
        .all(|e| e.u != e.v && seen.insert(e.u) && seen.insert(e.v))
}

/// A set of node-disjoint edges, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Edge>", into = "Vec<Edge>")]
pub struct Matching {
    edges: Vec<Edge>,
}

impl Matching {
    pub fn new(edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        edges.sort();
        if !is_matching(&edges) {
            return Err(Error::InvalidMatching(format!(
                "edges {:?} share a node",
                edges.iter().map(|e| (e.u, e.v)).collect::<Vec<_>>()
            )));
        }
        Ok(Matching { edges })
    }

    pub fn empty() -> Self {
        Matching { edges: Vec::new() }
    }

    /// Matching selected by a bitstring, or `None` if the bits violate the
    /// matching constraint.
    pub fn from_bitstring(x: &Bitstring, idx: &EdgeIndexing) -> Result<Option<Self>> {
        let edges = bitstring_to_subgraph(x, idx)?;
        Ok(Matching::new(edges).ok())
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.edges.binary_search(e).is_ok()
    }

    /// Number of edges shared with `other`.
    pub fn overlap(&self, other: &Matching) -> usize {
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < self.edges.len() && j < other.edges.len() {
            match self.edges[i].cmp(&other.edges[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    pub fn to_bitstring(&self, idx: &EdgeIndexing) -> Result<Bitstring> {
        subgraph_to_bitstring(&self.edges, idx)
    }

    /// Largest node id touched, if any.
    pub fn max_node(&self) -> Option<usize> {
        self.edges.iter().map(|e| e.v).max()
    }
}

impl TryFrom<Vec<Edge>> for Matching {
    type Error = Error;

    fn try_from(edges: Vec<Edge>) -> Result<Self> {
        Matching::new(edges)
    }
}

impl From<Matching> for Vec<Edge> {
    fn from(m: Matching) -> Self {
        m.edges
    }
}

/// Sum of the graph weights over the matching's edges; missing edges count 0.
pub fn matching_weight(m: &Matching, graph: &WeightedGraph) -> f64 {
    m.edges()
        .iter()
        .map(|e| graph.edge_id(*e).map_or(0.0, |j| graph.weights()[j]))
        .sum()
}

/// One row of the error trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub length: usize,
    pub error: f64,
}

/// Wall-clock seconds spent in each phase of a decomposition run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub sampling: f64,
    pub max_weight_matching: f64,
    pub weights: f64,
    pub total: f64,
}

/// Weighted list of matchings approximating a demand matrix.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub entries: Vec<(Matching, f64)>,
    #[serde(default)]
    pub trace: Vec<TracePoint>,
    #[serde(default)]
    pub timings: PhaseTimings,
}

impl Decomposition {
    pub fn new(entries: Vec<(Matching, f64)>) -> Self {
        Decomposition {
            entries,
            ..Default::default()
        }
    }

    /// Number of matchings with strictly positive weight.
    pub fn length(&self) -> usize {
        self.entries.iter().filter(|(_, a)| *a > 0.0).count()
    }

    pub fn weight_sum(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a).sum()
    }

    pub fn matchings(&self) -> impl Iterator<Item = &Matching> {
        self.entries.iter().map(|(m, _)| m)
    }

    /// Entries of `Σ α M` keyed by edge, in edge order.
    pub fn combined(&self) -> BTreeMap<Edge, f64> {
        combine(&self.entries)
    }
}

/// `Σ α M` keyed by edge. Entries are accumulated in matching order with
/// zero weights skipped, so the result does not depend on list order.
pub fn combine(entries: &[(Matching, f64)]) -> BTreeMap<Edge, f64> {
    let mut sorted: Vec<&(Matching, f64)> = entries.iter().filter(|(_, a)| *a != 0.0).collect();
    sorted.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut x = BTreeMap::new();
    for (m, a) in sorted {
        for e in m.edges() {
            *x.entry(*e).or_insert(0.0) += a;
        }
    }
    x
}

/// `‖D* − Σ α M‖²_F` over the full symmetric matrix.
pub fn residual_norm_sq(target: &DemandMatrix, entries: &[(Matching, f64)]) -> f64 {
    let mut diff = combine(entries);
    for value in diff.values_mut() {
        *value = -*value;
    }
    for (e, w) in target.graph().iter() {
        *diff.entry(e).or_insert(0.0) += w;
    }
    2.0 * diff.values().map(|d| d * d).sum::<f64>()
}

fn check_nodes(target: &DemandMatrix, decomp: &Decomposition) -> Result<()> {
    let n = target.n();
    for m in decomp.matchings() {
        if let Some(max) = m.max_node() {
            if max >= n {
                return Err(Error::DimensionMismatch(format!(
                    "matching touches node {max} but the demand matrix has {n} nodes"
                )));
            }
        }
    }
    Ok(())
}

/// `(1/n²)·‖D* − Σ α M‖²_F` over the full symmetric matrix.
pub fn approximation_error(target: &DemandMatrix, decomp: &Decomposition) -> Result<f64> {
    check_nodes(target, decomp)?;
    let n = target.n();
    if n == 0 {
        return Ok(0.0);
    }
    Ok(residual_norm_sq(target, &decomp.entries) / (n * n) as f64)
}

/// `D* − Σ α M` on the union of both edge supports (entries may be negative).
pub fn residual_graph(target: &DemandMatrix, decomp: &Decomposition) -> Result<WeightedGraph> {
    check_nodes(target, decomp)?;
    let mut diff: BTreeMap<Edge, f64> = target.graph().iter().collect();
    for (e, x) in decomp.combined() {
        *diff.entry(e).or_insert(0.0) -= x;
    }
    WeightedGraph::new(target.n(), diff.into_iter().map(|(e, w)| (e.u, e.v, w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::six_node_example;

    fn triangle() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 0.1), (1, 2, 0.2), (2, 0, 0.3)]).unwrap()
    }

    #[test]
    fn indexing_is_lexicographic() {
        let idx = build_edge_indexing(&triangle());
        assert_eq!(idx.edges(), &[Edge::new(0, 1), Edge::new(0, 2), Edge::new(1, 2)]);
        assert_eq!(idx.index_of(Edge::new(2, 1)), Some(2));
        let empty = WeightedGraph::new(4, []).unwrap();
        assert_eq!(build_edge_indexing(&empty).len(), 0);
        let (demand, _) = six_node_example();
        assert_eq!(build_edge_indexing(demand.graph()).len(), 9);
    }

    #[test]
    fn graph_rejects_malformed_edges() {
        assert!(WeightedGraph::new(3, [(1, 1, 0.5)]).is_err());
        assert!(WeightedGraph::new(3, [(0, 3, 0.5)]).is_err());
        assert!(WeightedGraph::new(3, [(0, 1, 0.5), (1, 0, 0.2)]).is_err());
        assert!(WeightedGraph::new(3, [(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn bitstring_mapping() {
        let g = WeightedGraph::new(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap();
        let idx = build_edge_indexing(&g);
        let x: Bitstring = "0101".parse().unwrap();
        assert_eq!(
            bitstring_to_subgraph(&x, &idx).unwrap(),
            vec![Edge::new(1, 2), Edge::new(3, 4)]
        );
        assert!(bitstring_to_subgraph(&Bitstring::zeros(4), &idx).unwrap().is_empty());
        assert!(matches!(
            bitstring_to_subgraph(&Bitstring::zeros(3), &idx),
            Err(Error::LengthMismatch { expected: 4, got: 3 })
        ));

        let t = triangle();
        let tidx = build_edge_indexing(&t);
        let all = bitstring_to_subgraph(&Bitstring::ones(3), &tidx).unwrap();
        assert_eq!(all.len(), 3);
        assert!(!is_matching(&all));
    }

    #[test]
    fn matching_predicate() {
        assert!(is_matching(&[Edge::new(0, 1), Edge::new(2, 3)]));
        assert!(!is_matching(&[Edge::new(0, 1), Edge::new(1, 2)]));
        assert!(is_matching(&[]));
        assert!(Matching::new([Edge::new(0, 1), Edge::new(1, 2)]).is_err());
    }

    #[test]
    fn demand_validation_names_the_node() {
        let g = WeightedGraph::new(3, [(0, 1, 0.7), (1, 2, 0.6)]).unwrap();
        let err = DemandMatrix::new(g).unwrap_err().to_string();
        assert!(err.contains("node 1"), "{err}");
        let g = WeightedGraph::new(2, [(0, 1, 1.5)]).unwrap();
        assert!(DemandMatrix::new(g).is_err());
    }

    #[test]
    fn error_of_worked_example() {
        let (demand, entries) = six_node_example();
        let exact = Decomposition::new(entries);
        assert!(approximation_error(&demand, &exact).unwrap() <= 1e-15);

        // Entry-by-entry sum of squares over the printed matrix, both triangles.
        let printed = [0.4, 0.6, 0.1, 0.3, 0.4, 0.2, 0.2, 0.7, 0.1];
        let expected = 2.0 * printed.iter().map(|x: &f64| x * x).sum::<f64>() / 36.0;
        let empty = approximation_error(&demand, &Decomposition::default()).unwrap();
        assert!((empty - expected).abs() < 1e-15);
    }

    #[test]
    fn error_is_permutation_invariant() {
        let (demand, mut entries) = six_node_example();
        entries[0].1 = 0.05;
        let a = approximation_error(&demand, &Decomposition::new(entries.clone())).unwrap();
        entries.reverse();
        let b = approximation_error(&demand, &Decomposition::new(entries)).unwrap();
        assert!((a - b).abs() < 1e-18);
        assert!(a > 0.0);
    }

    #[test]
    fn error_rejects_foreign_nodes() {
        let (demand, _) = six_node_example();
        let m = Matching::new([Edge::new(0, 9)]).unwrap();
        assert!(approximation_error(&demand, &Decomposition::new(vec![(m, 0.1)])).is_err());
    }

    #[test]
    fn residuals() {
        let (demand, entries) = six_node_example();
        let r = residual_graph(&demand, &Decomposition::default()).unwrap();
        assert_eq!(&r, demand.graph());

        let r = residual_graph(&demand, &Decomposition::new(entries)).unwrap();
        assert!(r.weights().iter().all(|w| w.abs() <= 1e-12));

        let single = Matching::new([Edge::new(0, 3)]).unwrap();
        let r = residual_graph(&demand, &Decomposition::new(vec![(single, 1.0)])).unwrap();
        assert!((r.weight(0, 3).unwrap() + 0.6).abs() < 1e-15);
        assert_eq!(r.weight(3, 0), r.weight(0, 3));
    }

    #[test]
    fn matching_weights() {
        let (demand, _) = six_node_example();
        let g = demand.graph();
        assert_eq!(matching_weight(&Matching::empty(), g), 0.0);
        // (1,5), (3,6), (2,4) in one-based labels.
        let m = Matching::new([Edge::new(0, 4), Edge::new(2, 5), Edge::new(1, 3)]).unwrap();
        assert!((matching_weight(&m, g) - 1.6).abs() < 1e-15);

        let single = Matching::new([Edge::new(0, 3)]).unwrap();
        let r = residual_graph(&demand, &Decomposition::new(vec![(single.clone(), 1.0)])).unwrap();
        assert!(matching_weight(&single, &r) < 0.0);
        // Edges missing from the graph contribute nothing.
        let off = Matching::new([Edge::new(0, 1)]).unwrap();
        assert_eq!(matching_weight(&off, g), 0.0);
    }

    #[test]
    fn overlap_counts_shared_edges() {
        let a = Matching::new([Edge::new(0, 1), Edge::new(2, 3)]).unwrap();
        let b = Matching::new([Edge::new(0, 1), Edge::new(2, 4)]).unwrap();
        assert_eq!(a.overlap(&b), 1);
        assert_eq!(a.overlap(&a), 2);
    }
}
