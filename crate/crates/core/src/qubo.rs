//! Penalized binary objective over edge variables.
//!
//! `C(x) = −Σ_j w_j x_j + λ Σ_j Σ_{k∈Γ(j)} x_j x_k` where `Γ(j)` lists the
//! edges sharing a node with edge `j`. The double sum visits every unordered
//! conflicting pair twice, so one violation costs `2λ`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

pub const DEFAULT_PENALTY_FACTOR: f64 = 0.2;

/// `Γ(j)` for every edge index `j`, each list sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeAdjacency {
    neighbors: Vec<Vec<usize>>,
}

impl EdgeAdjacency {
    pub fn new(graph: &WeightedGraph) -> Self {
        let mut neighbors = vec![Vec::new(); graph.edge_count()];
        for node in 0..graph.node_count() {
            let inc = graph.incident(node);
            for (a, &j) in inc.iter().enumerate() {
                for &k in &inc[a + 1..] {
                    neighbors[j].push(k);
                    neighbors[k].push(j);
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        EdgeAdjacency { neighbors }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn of(&self, j: usize) -> &[usize] {
        &self.neighbors[j]
    }

    /// Number of unordered adjacent pairs.
    pub fn pair_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuboModel {
    weights: Vec<f64>,
    lambda: f64,
    penalty_factor: f64,
    adjacency: EdgeAdjacency,
}

/// Builds the model with `λ = penalty_factor · Σ_j max(w_j, 0)`.
pub fn build_qubo(graph: &WeightedGraph, penalty_factor: f64) -> Result<QuboModel> {
    if !(penalty_factor > 0.0 && penalty_factor.is_finite()) {
        return Err(Error::Config(format!(
            "penalty factor must be positive, got {penalty_factor}"
        )));
    }
    let positive: f64 = graph.weights().iter().map(|w| w.max(0.0)).sum();
    Ok(QuboModel {
        weights: graph.weights().to_vec(),
        lambda: penalty_factor * positive,
        penalty_factor,
        adjacency: EdgeAdjacency::new(graph),
    })
}

impl QuboModel {
    /// Number of binary variables (one per edge).
    pub fn num_vars(&self) -> usize {
        self.weights.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Cost of one violating pair, as the double sum counts it.
    pub fn lambda_eff(&self) -> f64 {
        2.0 * self.lambda
    }

    pub fn penalty_factor(&self) -> f64 {
        self.penalty_factor
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn adjacency(&self) -> &EdgeAdjacency {
        &self.adjacency
    }

    /// Coefficient of `x_j`.
    pub fn linear(&self, j: usize) -> f64 {
        -self.weights[j]
    }

    /// Ordered pairs `(j, k)` with `k ∈ Γ(j)`, each carrying `λ`.
    pub fn quadratic(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency
            .neighbors
            .iter()
            .enumerate()
            .flat_map(move |(j, ks)| ks.iter().map(move |&k| (j, k, self.lambda)))
    }

    fn check_len(&self, x: &Bitstring) -> Result<()> {
        if x.len() != self.num_vars() {
            return Err(Error::LengthMismatch {
                expected: self.num_vars(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn cost(&self, x: &Bitstring) -> Result<f64> {
        self.check_len(x)?;
        let linear: f64 = x.iter_ones().map(|j| self.linear(j)).sum();
        let conflicts: usize = x
            .iter_ones()
            .map(|j| self.adjacency.of(j).iter().filter(|&&k| x.get(k)).count())
            .sum();
        Ok(linear + self.lambda * conflicts as f64)
    }

    pub fn violates(&self, x: &Bitstring) -> Result<bool> {
        self.check_len(x)?;
        Ok(x
            .iter_ones()
            .any(|j| self.adjacency.of(j).iter().any(|&k| x.get(k))))
    }

    /// Cost change from flipping bit `j` of `x`.
    pub fn flip_delta(&self, x: &Bitstring, j: usize) -> f64 {
        let set = self.adjacency.of(j).iter().filter(|&&k| x.get(k)).count();
        let gain = -self.weights[j] + 2.0 * self.lambda * set as f64;
        if x.get(j) {
            -gain
        } else {
            gain
        }
    }

    /// Ising form over spins `z_j = 1 − 2 x_j`:
    /// `C = offset + Σ h_j z_j + Σ_{j<k} J z_j z_k` with `J = λ/2` on every
    /// adjacent pair. Returns `(offset, h)`.
    pub fn ising_fields(&self) -> (f64, Vec<f64>) {
        let half = 0.5 * self.lambda;
        let h = (0..self.num_vars())
            .map(|j| 0.5 * self.weights[j] - half * self.adjacency.of(j).len() as f64)
            .collect();
        let offset = -0.5 * self.weights.iter().sum::<f64>() + half * self.adjacency.pair_count() as f64;
        (offset, h)
    }

    /// Plain-text coefficient list: linear terms as `j j value`, then every
    /// ordered quadratic pair as `j k value`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# qubo variables={} lambda={:e}", self.num_vars(), self.lambda);
        for j in 0..self.num_vars() {
            let _ = writeln!(out, "{j} {j} {:e}", self.linear(j));
        }
        for (j, k, v) in self.quadratic() {
            let _ = writeln!(out, "{j} {k} {v:e}");
        }
        out
    }

    pub fn export(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.to_text().as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}

/// Free-function form of [`QuboModel::cost`].
pub fn qubo_cost(model: &QuboModel, x: &Bitstring) -> Result<f64> {
    model.cost(x)
}

/// Free-function form of [`QuboModel::violates`].
pub fn violates(model: &QuboModel, x: &Bitstring) -> Result<bool> {
    model.violates(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::six_node_example;
    use crate::graph::{build_edge_indexing, matching_weight};

    fn path2(w0: f64, w1: f64) -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, w0), (1, 2, w1)]).unwrap()
    }

    #[test]
    fn path_model() {
        let q = build_qubo(&path2(1.0, 1.0), 0.2).unwrap();
        assert!((q.lambda() - 0.4).abs() < 1e-15);
        assert_eq!((q.linear(0), q.linear(1)), (-1.0, -1.0));
        let pairs: Vec<_> = q.quadratic().map(|(j, k, _)| (j, k)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
        let both: Bitstring = "11".parse().unwrap();
        assert!((q.cost(&both).unwrap() - (-1.2)).abs() < 1e-15);
        assert_eq!(q.cost(&Bitstring::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn single_edge_has_no_quadratic_terms() {
        let g = WeightedGraph::new(2, [(0, 1, 0.3)]).unwrap();
        assert_eq!(build_qubo(&g, 0.2).unwrap().quadratic().count(), 0);
    }

    #[test]
    fn six_node_lambda() {
        let (demand, entries) = six_node_example();
        let q = build_qubo(demand.graph(), DEFAULT_PENALTY_FACTOR).unwrap();
        assert!((q.lambda() - 0.6).abs() < 1e-15);
        let idx = build_edge_indexing(demand.graph());
        for (m, _) in entries {
            let x = m.to_bitstring(&idx).unwrap();
            assert!(!q.violates(&x).unwrap());
            assert_eq!(q.cost(&x).unwrap(), -matching_weight(&m, demand.graph()));
        }
    }

    #[test]
    fn violation_and_length_checks() {
        let g = WeightedGraph::new(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap();
        let q = build_qubo(&g, 0.2).unwrap();
        assert!(!q.violates(&"0101".parse().unwrap()).unwrap());
        assert!(q.violates(&"0110".parse().unwrap()).unwrap());
        assert!(q.cost(&Bitstring::zeros(3)).is_err());
    }

    #[test]
    fn flip_delta_matches_cost_difference() {
        let (demand, _) = six_node_example();
        let q = build_qubo(demand.graph(), 0.2).unwrap();
        let mut x: Bitstring = "101100010".parse().unwrap();
        for j in 0..9 {
            let before = q.cost(&x).unwrap();
            let delta = q.flip_delta(&x, j);
            x.flip(j);
            assert!((q.cost(&x).unwrap() - before - delta).abs() < 1e-12);
        }
    }

    #[test]
    fn ising_form_reproduces_cost() {
        let (demand, _) = six_node_example();
        let q = build_qubo(demand.graph(), 0.2).unwrap();
        let (offset, h) = q.ising_fields();
        for index in 0..(1u64 << 9) {
            let x = Bitstring::from_index(index, 9);
            let z = |j: usize| if x.get(j) { -1.0 } else { 1.0 };
            let mut c = offset;
            for j in 0..9 {
                c += h[j] * z(j);
                for &k in q.adjacency().of(j) {
                    if k > j {
                        c += 0.5 * q.lambda() * z(j) * z(k);
                    }
                }
            }
            assert!((c - q.cost(&x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_positive_factor() {
        assert!(build_qubo(&path2(1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn text_export_lists_every_term() {
        let q = build_qubo(&path2(1.0, 0.5), 0.2).unwrap();
        let text = q.to_text();
        assert_eq!(text.lines().count(), 1 + 2 + 2);
        assert!(text.contains("1 1 -5e-1"));
    }
}
