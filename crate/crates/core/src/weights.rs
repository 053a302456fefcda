//! Weight recomputation for a set of matchings.
//!
//! Both problems minimize `‖D* − Σ u_i M_i‖²_F` over `u ≥ 0` with the sum of
//! weights capped at one (or pinned to one). Writing `A` for the 0/1
//! edge-by-matching incidence matrix and `d` for the demand entries, the
//! objective is `2‖d − A u‖²`, so the quadratic program works with
//! `H = AᵀA` (pairwise edge overlaps) and `c = Aᵀd`.
//!
//! The cardinality-limited variant additionally allows at most `m` positive
//! weights. It is solved by branch-and-bound when the number of supports is
//! within budget, and otherwise by greedy forward selection followed by one
//! round of pairwise swaps. Caller-supplied incumbents are always
//! considered, so the result is never worse than any of them.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{residual_norm_sq, DemandMatrix, Edge, Matching};

/// A weight at or below this value counts as zero.
pub const NONZERO_THRESHOLD: f64 = 1e-9;
pub const DEFAULT_SUPPORT_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumConstraint {
    /// `Σ u ≤ 1`.
    #[default]
    AtMostOne,
    /// `Σ u = 1`.
    EqualOne,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub sum: SumConstraint,
    /// Largest number of candidate supports for which the exact search runs.
    pub support_budget: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            sum: SumConstraint::AtMostOne,
            support_budget: DEFAULT_SUPPORT_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WeightProblem<'a> {
    pub target: &'a DemandMatrix,
    pub matchings: &'a [Matching],
    pub sum: SumConstraint,
    pub max_support: Option<usize>,
}

impl<'a> WeightProblem<'a> {
    pub fn new(target: &'a DemandMatrix, matchings: &'a [Matching]) -> Self {
        WeightProblem {
            target,
            matchings,
            sum: SumConstraint::AtMostOne,
            max_support: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSolution {
    pub weights: Vec<f64>,
    /// `‖D* − Σ u_i M_i‖²_F`.
    pub objective: f64,
    pub exact: bool,
}

impl WeightSolution {
    pub fn support(&self) -> Vec<usize> {
        support_of(&self.weights)
    }
}

fn support_of(weights: &[f64]) -> Vec<usize> {
    (0..weights.len())
        .filter(|&i| weights[i] > NONZERO_THRESHOLD)
        .collect()
}

/// Quadratic form of the weight problem over the full matching list.
struct Gram<'a> {
    target: &'a DemandMatrix,
    matchings: &'a [Matching],
    h: DMatrix<f64>,
    c: DVector<f64>,
    sum: SumConstraint,
}

impl<'a> Gram<'a> {
    fn new(problem: &WeightProblem<'a>) -> Result<Self> {
        let n = problem.target.n();
        let mut edge_ids: BTreeMap<Edge, usize> = BTreeMap::new();
        for (e, _) in problem.target.graph().iter() {
            let next = edge_ids.len();
            edge_ids.entry(e).or_insert(next);
        }
        let mut columns: Vec<Vec<usize>> = Vec::with_capacity(problem.matchings.len());
        for m in problem.matchings {
            if m.max_node().is_some_and(|v| v >= n) {
                return Err(Error::DimensionMismatch(format!(
                    "matching touches node {} but the demand matrix has {n} nodes",
                    m.max_node().unwrap_or(0)
                )));
            }
            let mut col = Vec::with_capacity(m.len());
            for e in m.edges() {
                let next = edge_ids.len();
                col.push(*edge_ids.entry(*e).or_insert(next));
            }
            col.sort_unstable();
            columns.push(col);
        }
        let mut d = vec![0.0; edge_ids.len()];
        for (e, w) in problem.target.graph().iter() {
            d[edge_ids[&e]] = w;
        }
        let k = columns.len();
        let mut h = DMatrix::zeros(k, k);
        let mut c = DVector::zeros(k);
        for i in 0..k {
            c[i] = columns[i].iter().map(|&e| d[e]).sum();
            for j in i..k {
                let overlap = count_common(&columns[i], &columns[j]) as f64;
                h[(i, j)] = overlap;
                h[(j, i)] = overlap;
            }
        }
        Ok(Gram {
            target: problem.target,
            matchings: problem.matchings,
            h,
            c,
            sum: problem.sum,
        })
    }

    fn len(&self) -> usize {
        self.c.len()
    }

    /// Exact objective of a weight vector aligned with the full list.
    fn objective(&self, weights: &[f64]) -> f64 {
        let entries: Vec<(Matching, f64)> = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(i, &w)| (self.matchings[i].clone(), w))
            .collect();
        residual_norm_sq(self.target, &entries)
    }

    /// Optimal weights restricted to `vars`; returns a full-length vector.
    /// Weights at or below the nonzero threshold are removed and the
    /// remaining support re-solved, so every returned weight is either zero
    /// or above the threshold.
    fn solve_on(&self, vars: &[usize]) -> (Vec<f64>, f64) {
        let mut vars = vars.to_vec();
        loop {
            let sub_h = DMatrix::from_fn(vars.len(), vars.len(), |a, b| self.h[(vars[a], vars[b])]);
            let sub_c = DVector::from_fn(vars.len(), |a, _| self.c[vars[a]]);
            let u = simplex_qp(&sub_h, &sub_c, self.sum);
            let tiny = (0..vars.len()).any(|a| u[a] > 0.0 && u[a] <= NONZERO_THRESHOLD);
            if tiny && self.sum == SumConstraint::AtMostOne {
                vars = (0..vars.len())
                    .filter(|&a| u[a] > NONZERO_THRESHOLD)
                    .map(|a| vars[a])
                    .collect();
                continue;
            }
            let mut full = vec![0.0; self.len()];
            for (a, &v) in vars.iter().enumerate() {
                if u[a] > NONZERO_THRESHOLD || self.sum == SumConstraint::EqualOne {
                    full[v] = u[a];
                }
            }
            let obj = self.objective(&full);
            return (full, obj);
        }
    }
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

/// Relative ridge added to `H` so every subproblem is strictly convex.
/// Its effect on the optimal objective is far below the solver tolerance.
const RIDGE: f64 = 1e-13;

/// Minimizes `½uᵀHu − cᵀu` over `u ≥ 0` with `Σu ≤ 1` or `Σu = 1` by a
/// primal active-set method.
pub(crate) fn simplex_qp(h: &DMatrix<f64>, c: &DVector<f64>, sum: SumConstraint) -> DVector<f64> {
    let k = c.len();
    let mut u = DVector::<f64>::zeros(k);
    if k == 0 {
        return u;
    }
    let scale = h.diagonal().amax().max(1.0);
    let mut hr = h.clone();
    for i in 0..k {
        hr[(i, i)] += RIDGE * scale;
    }
    let tol = 1e-12 * scale.max(c.amax());

    let mut free = vec![false; k];
    let mut sum_active = false;
    if sum == SumConstraint::EqualOne {
        // Start from the best vertex of the simplex.
        let best = (0..k)
            .min_by(|&a, &b| {
                let fa = 0.5 * hr[(a, a)] - c[a];
                let fb = 0.5 * hr[(b, b)] - c[b];
                fa.total_cmp(&fb)
            })
            .expect("nonempty");
        u[best] = 1.0;
        free[best] = true;
        sum_active = true;
    }

    let max_iter = 20 * k + 100;
    for _ in 0..max_iter {
        let f_idx: Vec<usize> = (0..k).filter(|&i| free[i]).collect();
        let (target, nu) = solve_face(&hr, c, &f_idx, sum_active);

        let mut alpha = 1.0;
        let mut blocking: Option<Option<usize>> = None;
        for (a, &i) in f_idx.iter().enumerate() {
            let p = target[a] - u[i];
            if p < 0.0 {
                let ratio = u[i] / -p;
                if ratio < alpha {
                    alpha = ratio;
                    blocking = Some(Some(i));
                }
            }
        }
        if !sum_active && sum == SumConstraint::AtMostOne {
            let step_sum: f64 = f_idx.iter().enumerate().map(|(a, &i)| target[a] - u[i]).sum();
            if step_sum > 0.0 {
                let room = (1.0 - u.sum()).max(0.0);
                let ratio = room / step_sum;
                if ratio < alpha {
                    alpha = ratio;
                    blocking = Some(None);
                }
            }
        }
        for (a, &i) in f_idx.iter().enumerate() {
            u[i] += alpha * (target[a] - u[i]);
        }
        match blocking {
            Some(Some(i)) => {
                u[i] = 0.0;
                free[i] = false;
                continue;
            }
            Some(None) => {
                sum_active = true;
                continue;
            }
            None => {}
        }

        // At the minimizer of the current face: check multipliers.
        let g = &hr * &u - c;
        let nu = if sum_active { nu } else { 0.0 };
        let mut worst = -tol;
        let mut release: Option<Option<usize>> = None;
        for i in 0..k {
            if !free[i] {
                let lambda = g[i] + nu;
                if lambda < worst {
                    worst = lambda;
                    release = Some(Some(i));
                }
            }
        }
        if sum_active && sum == SumConstraint::AtMostOne && nu < worst {
            release = Some(None);
        }
        match release {
            None => break,
            Some(Some(i)) => free[i] = true,
            Some(None) => sum_active = false,
        }
    }
    for x in u.iter_mut() {
        *x = x.max(0.0);
    }
    polish(h, c, u, &free, sum_active)
}

/// Re-solves the final face without the ridge when that face is
/// nonsingular, keeping whichever point has the lower objective.
fn polish(h: &DMatrix<f64>, c: &DVector<f64>, u: DVector<f64>, free: &[bool], sum_active: bool) -> DVector<f64> {
    let f_idx: Vec<usize> = (0..u.len()).filter(|&i| free[i] && u[i] > 0.0).collect();
    if f_idx.is_empty() {
        return u;
    }
    let hf = DMatrix::from_fn(f_idx.len(), f_idx.len(), |a, b| h[(f_idx[a], f_idx[b])]);
    if hf.clone().cholesky().is_none() {
        return u;
    }
    let (x, _) = solve_face(h, c, &f_idx, sum_active);
    if x.iter().any(|v| !v.is_finite() || *v < 0.0) || x.sum() > 1.0 + 1e-15 {
        return u;
    }
    let mut exact = DVector::zeros(u.len());
    for (a, &i) in f_idx.iter().enumerate() {
        exact[i] = x[a];
    }
    let q = |v: &DVector<f64>| 0.5 * v.dot(&(h * v)) - c.dot(v);
    if q(&exact) <= q(&u) {
        exact
    } else {
        u
    }
}

/// Minimizer of the quadratic on the face where only `f_idx` may be
/// nonzero, optionally with `Σ u = 1`. Returns the free values and the
/// multiplier of the sum constraint.
fn solve_face(h: &DMatrix<f64>, c: &DVector<f64>, f_idx: &[usize], sum_active: bool) -> (DVector<f64>, f64) {
    let f = f_idx.len();
    if f == 0 {
        return (DVector::zeros(0), 0.0);
    }
    let hf = DMatrix::from_fn(f, f, |a, b| h[(f_idx[a], f_idx[b])]);
    let cf = DVector::from_fn(f, |a, _| c[f_idx[a]]);
    if !sum_active {
        if let Some(chol) = hf.clone().cholesky() {
            return (chol.solve(&cf), 0.0);
        }
        let x = hf.svd(true, true).solve(&cf, 1e-14).expect("svd solve");
        return (x, 0.0);
    }
    let mut kkt = DMatrix::zeros(f + 1, f + 1);
    kkt.view_mut((0, 0), (f, f)).copy_from(&hf);
    for a in 0..f {
        kkt[(a, f)] = 1.0;
        kkt[(f, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(f + 1);
    rhs.rows_mut(0, f).copy_from(&cf);
    rhs[f] = 1.0;
    let sol = match kkt.clone().lu().solve(&rhs) {
        Some(s) if s.iter().all(|x| x.is_finite()) => s,
        _ => kkt.svd(true, true).solve(&rhs, 1e-14).expect("svd solve"),
    };
    (sol.rows(0, f).into_owned(), sol[f])
}

/// Optimal weights over all matchings (convex, solved globally).
pub fn solve_simplex_ls(problem: &WeightProblem) -> Result<WeightSolution> {
    if problem.matchings.is_empty() {
        return Err(Error::Config("weight problem needs at least one matching".into()));
    }
    let gram = Gram::new(problem)?;
    let all: Vec<usize> = (0..gram.len()).collect();
    let (weights, objective) = gram.solve_on(&all);
    Ok(WeightSolution {
        weights,
        objective,
        exact: true,
    })
}

/// Best weights using at most `m` positive entries.
///
/// `incumbents` are weight vectors aligned with `problem.matchings`; any
/// that is feasible bounds the result from above.
pub fn solve_cardinality_ls(
    problem: &WeightProblem,
    incumbents: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<WeightSolution> {
    let m = problem
        .max_support
        .ok_or_else(|| Error::Config("cardinality solve needs a support bound".into()))?;
    if m == 0 {
        return Err(Error::Config("support bound must be at least 1".into()));
    }
    if problem.matchings.is_empty() {
        return Err(Error::Config("weight problem needs at least one matching".into()));
    }
    let gram = Gram::new(problem)?;
    let k = gram.len();
    let mut best = Best::new(&gram);
    if m >= k {
        let all: Vec<usize> = (0..k).collect();
        let (weights, objective) = gram.solve_on(&all);
        best.offer(weights, objective);
    }
    for inc in incumbents {
        if inc.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "incumbent has {} weights for {k} matchings",
                inc.len()
            )));
        }
        let support = support_of(inc);
        let total: f64 = inc.iter().sum();
        let feasible = support.len() <= m
            && inc.iter().all(|&w| w >= 0.0)
            && total <= 1.0 + 1e-9
            && (problem.sum == SumConstraint::AtMostOne || (total - 1.0).abs() <= 1e-9);
        if !feasible {
            continue;
        }
        let given: Vec<f64> = inc
            .iter()
            .map(|&w| if w > NONZERO_THRESHOLD { w } else { 0.0 })
            .collect();
        let obj = gram.objective(&given);
        best.offer(given, obj);
        if !support.is_empty() {
            let (w, obj) = gram.solve_on(&support);
            best.offer(w, obj);
        }
    }
    if m >= k {
        let (weights, objective) = best.take();
        return Ok(WeightSolution {
            weights,
            objective,
            exact: true,
        });
    }

    greedy_forward(&gram, m, &mut best);
    swap_round(&gram, &mut best);

    let exact = if binomial_at_most(k, m, cfg.support_budget) {
        let mut search = Search {
            gram: &gram,
            m,
            nodes: 0,
            budget: cfg.support_budget,
            aborted: false,
        };
        let all: Vec<usize> = (0..k).collect();
        search.branch(&mut Vec::new(), &all, &mut best);
        !search.aborted
    } else {
        false
    };

    let (weights, objective) = best.take();
    Ok(WeightSolution {
        weights,
        objective,
        exact,
    })
}

/// Incumbent tracker; ties go to the lexicographically smaller support.
struct Best {
    weights: Vec<f64>,
    objective: f64,
}

impl Best {
    fn new(gram: &Gram) -> Self {
        let zeros = vec![0.0; gram.len()];
        let objective = gram.objective(&zeros);
        let mut best = Best {
            weights: zeros,
            objective,
        };
        if gram.sum == SumConstraint::EqualOne {
            best.objective = f64::INFINITY;
        }
        best
    }

    fn offer(&mut self, weights: Vec<f64>, objective: f64) -> bool {
        let better = objective < self.objective
            || (objective == self.objective && support_of(&weights) < support_of(&self.weights));
        if better {
            self.weights = weights;
            self.objective = objective;
        }
        better
    }

    fn take(self) -> (Vec<f64>, f64) {
        (self.weights, self.objective)
    }
}

fn greedy_forward(gram: &Gram, m: usize, best: &mut Best) {
    let k = gram.len();
    let mut chosen: Vec<usize> = Vec::new();
    let mut current = f64::INFINITY;
    while chosen.len() < m {
        let mut step: Option<(f64, Vec<f64>)> = None;
        for j in 0..k {
            if chosen.contains(&j) {
                continue;
            }
            let mut vars = chosen.clone();
            vars.push(j);
            vars.sort_unstable();
            let (w, obj) = gram.solve_on(&vars);
            if step.as_ref().is_none_or(|(o, _)| obj < *o) {
                step = Some((obj, w));
            }
        }
        let Some((obj, w)) = step else { break };
        if obj >= current {
            break;
        }
        current = obj;
        chosen = support_of(&w);
        best.offer(w, obj);
        if chosen.is_empty() {
            break;
        }
    }
}

fn swap_round(gram: &Gram, best: &mut Best) {
    let k = gram.len();
    let mut support = support_of(&best.weights);
    let mut i = 0;
    while i < support.len() {
        let mut improved = false;
        for j in 0..k {
            if support.contains(&j) {
                continue;
            }
            let mut vars: Vec<usize> = support.iter().copied().filter(|&s| s != support[i]).collect();
            vars.push(j);
            vars.sort_unstable();
            let (w, obj) = gram.solve_on(&vars);
            if obj < best.objective && best.offer(w, obj) {
                support = support_of(&best.weights);
                improved = true;
                break;
            }
        }
        if !improved {
            i += 1;
        }
    }
}

fn binomial_at_most(n: usize, k: usize, limit: u64) -> bool {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > limit as u128 {
            return false;
        }
    }
    true
}

struct Search<'g, 'a> {
    gram: &'g Gram<'a>,
    m: usize,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl Search<'_, '_> {
    /// Depth-first branch-and-bound. The relaxation without the support
    /// bound over `included ∪ open` gives the lower bound at each node.
    fn branch(&mut self, included: &mut Vec<usize>, open: &[usize], best: &mut Best) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        let mut vars: Vec<usize> = included.iter().chain(open).copied().collect();
        vars.sort_unstable();
        let (w, lower) = self.gram.solve_on(&vars);
        if lower >= best.objective * (1.0 - 1e-12) {
            return;
        }
        let support = support_of(&w);
        if support.len() <= self.m {
            best.offer(w, lower);
            return;
        }
        let pick = open
            .iter()
            .copied()
            .filter(|&j| w[j] > NONZERO_THRESHOLD)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]).then(b.cmp(&a)))
            .expect("support exceeds the bound, so an open variable is positive");
        let rest: Vec<usize> = open.iter().copied().filter(|&j| j != pick).collect();

        included.push(pick);
        if included.len() == self.m {
            self.branch(included, &[], best);
        } else {
            self.branch(included, &rest, best);
        }
        included.pop();
        self.branch(included, &rest, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::six_node_example;
    use crate::graph::WeightedGraph;

    fn demand_from(n: usize, entries: &[(Matching, f64)]) -> DemandMatrix {
        let x = crate::graph::combine(entries);
        DemandMatrix::new(WeightedGraph::new(n, x.into_iter().map(|(e, w)| (e.u, e.v, w))).unwrap())
            .unwrap()
    }

    fn m(pairs: &[(usize, usize)]) -> Matching {
        Matching::new(pairs.iter().map(|&(u, v)| Edge::new(u, v))).unwrap()
    }

    #[test]
    fn single_matching_half_weight() {
        let mm = m(&[(0, 1), (2, 3)]);
        let d = demand_from(4, &[(mm.clone(), 0.5)]);
        let s = solve_simplex_ls(&WeightProblem::new(&d, &[mm])).unwrap();
        assert!((s.weights[0] - 0.5).abs() < 1e-12);
        assert!(s.objective < 1e-24);
    }

    #[test]
    fn six_node_generator_weights() {
        let (d, entries) = six_node_example();
        let ms: Vec<Matching> = entries.iter().map(|(m, _)| m.clone()).collect();
        let s = solve_simplex_ls(&WeightProblem::new(&d, &ms)).unwrap();
        for (w, (_, expected)) in s.weights.iter().zip(&entries) {
            assert!((w - expected).abs() < 1e-10, "{w} vs {expected}");
        }
        assert!(s.objective < 1e-20);

        let mut p = WeightProblem::new(&d, &ms);
        p.max_support = Some(4);
        let c = solve_cardinality_ls(&p, &[], &SolverConfig::default()).unwrap();
        assert!(c.objective < 1e-20);
        assert!(c.exact);
    }

    #[test]
    fn orthogonal_target_gives_zero_weights() {
        let d = demand_from(4, &[(m(&[(0, 1)]), 0.3)]);
        let s = solve_simplex_ls(&WeightProblem::new(&d, &[m(&[(2, 3)])])).unwrap();
        assert_eq!(s.weights, vec![0.0]);
        assert!((s.objective - 2.0 * 0.09).abs() < 1e-15);
    }

    #[test]
    fn cardinality_one_picks_largest_projection() {
        let m1 = m(&[(0, 1), (2, 3)]);
        let m2 = m(&[(1, 2)]);
        let m3 = m(&[(0, 1)]);
        let d = demand_from(4, &[(m1.clone(), 0.5), (m2.clone(), 0.5)]);
        let ms = vec![m1, m2, m3];
        let mut p = WeightProblem::new(&d, &ms);
        p.max_support = Some(1);
        let s = solve_cardinality_ls(&p, &[], &SolverConfig::default()).unwrap();
        assert_eq!(s.support(), vec![0]);
        assert!(s.objective > 0.0);
        assert!(s.exact);
        // Hand enumeration of the three single supports.
        let singles: Vec<f64> = (0..3)
            .map(|i| {
                let sub = [ms[i].clone()];
                solve_simplex_ls(&WeightProblem::new(&d, &sub)).unwrap().objective
            })
            .collect();
        let min = singles.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((s.objective - min).abs() < 1e-15);
    }

    #[test]
    fn equality_mode_sums_to_one() {
        let (d, entries) = six_node_example();
        let ms: Vec<Matching> = entries.iter().map(|(m, _)| m.clone()).take(2).collect();
        let mut p = WeightProblem::new(&d, &ms);
        p.sum = SumConstraint::EqualOne;
        let s = solve_simplex_ls(&p).unwrap();
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(s.weights.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn incumbent_is_never_beaten_by_worse_answer() {
        let (d, entries) = six_node_example();
        let ms: Vec<Matching> = entries.iter().map(|(m, _)| m.clone()).collect();
        let mut p = WeightProblem::new(&d, &ms);
        p.max_support = Some(3);
        let inc = vec![0.0, 0.2, 0.3, 0.4];
        let inc_obj = residual_norm_sq(
            &d,
            &ms.iter().cloned().zip(inc.iter().copied()).collect::<Vec<_>>(),
        );
        let cfg = SolverConfig {
            support_budget: 0,
            ..Default::default()
        };
        let s = solve_cardinality_ls(&p, &[inc], &cfg).unwrap();
        assert!(s.objective <= inc_obj);
        assert!(!s.exact);
        assert!(s.support().len() <= 3);
    }
}
