//! Maximum-weight matching on general graphs and a brute-force enumerator.
//!
//! The solver is Edmonds' blossom algorithm in the primal-dual form with
//! O(n³) bookkeeping (blossom trees, per-blossom best edges). It runs on
//! integers: weights are scaled by a power of two and rounded, so every
//! comparison inside the algorithm and in the tie-break is exact.

use crate::error::{Error, Result};
use crate::graph::{matching_weight, Edge, Matching, WeightedGraph};

/// Default edge cap for [`enumerate_matchings`].
pub const ENUMERATION_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct MatchingSolution {
    pub matching: Matching,
    pub weight: f64,
}

/// Maximum-weight matching of `graph`.
///
/// Edges of non-positive weight never appear in the result. Among optimal
/// matchings the one whose sorted edge-index sequence is lexicographically
/// smallest is returned.
pub fn max_weight_matching(graph: &WeightedGraph) -> MatchingSolution {
    let quantized = quantize(graph.weights());
    let candidates: Vec<(usize, usize, usize, i128)> = graph
        .edges()
        .iter()
        .zip(&quantized)
        .enumerate()
        .filter(|(_, (_, &q))| q > 0)
        .map(|(j, (e, &q))| (j, e.u, e.v, q))
        .collect();

    let n = graph.node_count();
    let best = blossom_value(n, candidates.iter().map(|&(_, u, v, q)| (u, v, q)));

    let mut used = vec![false; n];
    let mut chosen: Vec<usize> = Vec::new();
    let mut taken: i128 = 0;
    for &(j, u, v, q) in &candidates {
        if taken == best {
            break;
        }
        if used[u] || used[v] {
            continue;
        }
        used[u] = true;
        used[v] = true;
        let rest = blossom_value(
            n,
            candidates
                .iter()
                .filter(|&&(_, a, b, _)| !used[a] && !used[b])
                .map(|&(_, a, b, w)| (a, b, w)),
        );
        if taken + q + rest == best {
            chosen.push(j);
            taken += q;
        } else {
            used[u] = false;
            used[v] = false;
        }
    }

    let matching = Matching::new(chosen.iter().map(|&j| graph.edges()[j]))
        .expect("blossom output is a matching");
    let weight = matching_weight(&matching, graph);
    MatchingSolution { matching, weight }
}

/// Scales weights by a common power of two so the largest magnitude sits
/// just below 2^62, then rounds. Power-of-two scaling is exact in binary
/// floating point, so only bits far below the largest weight are lost.
fn quantize(weights: &[f64]) -> Vec<i128> {
    let max = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if max == 0.0 {
        return vec![0; weights.len()];
    }
    let exponent = 61 - max.log2().ceil() as i32;
    let scale = 2f64.powi(exponent);
    weights.iter().map(|w| (w * scale).round() as i128).collect()
}

/// Value of a maximum-weight matching over integer edge weights.
fn blossom_value(n: usize, edges: impl Iterator<Item = (usize, usize, i128)>) -> i128 {
    let edges: Vec<(usize, usize, i128)> = edges.collect();
    if edges.is_empty() {
        return 0;
    }
    let mate = Blossom::new(n, &edges).solve();
    edges
        .iter()
        .filter(|&&(u, v, _)| mate[u] == Some(v))
        .map(|&(_, _, w)| w)
        .sum()
}

/// Mate of every node in a maximum-weight matching.
///
/// Endpoint `p` refers to edge `p / 2`; it is the node `edges[p/2].0` when
/// `p` is even and `edges[p/2].1` when odd. Blossom ids live in `n..2n`.
struct Blossom<'a> {
    nv: usize,
    edges: &'a [(usize, usize, i128)],
    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    mate: Vec<Option<usize>>,
    label: Vec<u8>,
    labelend: Vec<Option<usize>>,
    inblossom: Vec<usize>,
    blossomparent: Vec<Option<usize>>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<Option<usize>>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<Option<usize>>,
    blossombestedges: Vec<Option<Vec<usize>>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<i128>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

/// Python-style index into a cyclic child list.
fn cyc(j: isize, len: usize) -> usize {
    j.rem_euclid(len as isize) as usize
}

impl<'a> Blossom<'a> {
    fn new(nv: usize, edges: &'a [(usize, usize, i128)]) -> Self {
        // Doubling keeps every dual variable integral.
        let maxweight = edges.iter().map(|e| 2 * e.2).max().unwrap_or(0).max(0);
        let mut endpoint = Vec::with_capacity(2 * edges.len());
        let mut neighbend = vec![Vec::new(); nv];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            endpoint.push(i);
            endpoint.push(j);
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }
        let mut dualvar = vec![maxweight; nv];
        dualvar.extend(std::iter::repeat_n(0, nv));
        Blossom {
            nv,
            edges,
            endpoint,
            neighbend,
            mate: vec![None; nv],
            label: vec![0; 2 * nv],
            labelend: vec![None; 2 * nv],
            inblossom: (0..nv).collect(),
            blossomparent: vec![None; 2 * nv],
            blossomchilds: vec![Vec::new(); 2 * nv],
            blossombase: (0..nv).map(Some).chain(std::iter::repeat_n(None, nv)).collect(),
            blossomendps: vec![Vec::new(); 2 * nv],
            bestedge: vec![None; 2 * nv],
            blossombestedges: vec![None; 2 * nv],
            unusedblossoms: (nv..2 * nv).collect(),
            dualvar,
            allowedge: vec![false; edges.len()],
            queue: Vec::new(),
        }
    }

    fn slack(&self, k: usize) -> i128 {
        let (i, j, w) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 4 * w
    }

    fn leaves(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![b];
        while let Some(t) = stack.pop() {
            if t < self.nv {
                out.push(t);
            } else {
                stack.extend(self.blossomchilds[t].iter().rev());
            }
        }
        out
    }

    fn assign_label(&mut self, w: usize, t: u8, p: Option<usize>) {
        let b = self.inblossom[w];
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = None;
        self.bestedge[b] = None;
        if t == 1 {
            let leaves = self.leaves(b);
            self.queue.extend(leaves);
        } else if t == 2 {
            let base = self.blossombase[b].expect("labelled blossom has a base");
            let m = self.mate[base].expect("T-blossom base is matched");
            self.assign_label(self.endpoint[m], 1, Some(m ^ 1));
        }
    }

    fn scan_blossom(&mut self, v: usize, w: usize) -> Option<usize> {
        let mut path = Vec::new();
        let mut base = None;
        let (mut v, mut w) = (Some(v), Some(w));
        while let Some(cur) = v {
            let b = self.inblossom[cur];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            path.push(b);
            self.label[b] = 5;
            match self.labelend[b] {
                None => v = None,
                Some(le) => {
                    let t = self.endpoint[le];
                    let bt = self.inblossom[t];
                    let le2 = self.labelend[bt].expect("T-blossom has a label end");
                    v = Some(self.endpoint[le2]);
                }
            }
            if w.is_some() {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    fn add_blossom(&mut self, base: usize, k: usize) {
        let (v, w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("blossom slot available");
        self.blossombase[b] = Some(base);
        self.blossomparent[b] = None;
        self.blossomparent[bb] = Some(b);
        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = Some(b);
            path.push(bv);
            let le = self.labelend[bv].expect("blossom path edge");
            endps.push(le);
            bv = self.inblossom[self.endpoint[le]];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = Some(b);
            path.push(bw);
            let le = self.labelend[bw].expect("blossom path edge");
            endps.push(le ^ 1);
            bw = self.inblossom[self.endpoint[le]];
        }
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0;
        for leaf in self.leaves_of_path(&path) {
            if self.label[self.inblossom[leaf]] == 2 {
                self.queue.push(leaf);
            }
            self.inblossom[leaf] = b;
        }

        let mut bestedgeto: Vec<Option<usize>> = vec![None; 2 * self.nv];
        for &sub in &path {
            let lists: Vec<Vec<usize>> = match self.blossombestedges[sub].take() {
                Some(list) => vec![list],
                None => self
                    .leaves(sub)
                    .into_iter()
                    .map(|leaf| self.neighbend[leaf].iter().map(|p| p / 2).collect())
                    .collect(),
            };
            for list in lists {
                for kk in list {
                    let (i, j, _) = self.edges[kk];
                    let far = if self.inblossom[j] == b { i } else { j };
                    let bj = self.inblossom[far];
                    if bj != b
                        && self.label[bj] == 1
                        && bestedgeto[bj].is_none_or(|cur| self.slack(kk) < self.slack(cur))
                    {
                        bestedgeto[bj] = Some(kk);
                    }
                }
            }
            self.bestedge[sub] = None;
        }
        let best: Vec<usize> = bestedgeto.into_iter().flatten().collect();
        let mut top = None;
        for &kk in &best {
            if top.is_none_or(|cur| self.slack(kk) < self.slack(cur)) {
                top = Some(kk);
            }
        }
        self.blossombestedges[b] = Some(best);
        self.bestedge[b] = top;
        self.blossomchilds[b] = path;
        self.blossomendps[b] = endps;
    }

    fn leaves_of_path(&self, path: &[usize]) -> Vec<usize> {
        path.iter().flat_map(|&s| self.leaves(s)).collect()
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let childs = self.blossomchilds[b].clone();
        for &s in &childs {
            self.blossomparent[s] = None;
            if s < self.nv {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                for leaf in self.leaves(s) {
                    self.inblossom[leaf] = s;
                }
            }
        }
        if !endstage && self.label[b] == 2 {
            let len = childs.len();
            let endps = self.blossomendps[b].clone();
            let lb = self.labelend[b].expect("T-blossom has a label end");
            let entrychild = self.inblossom[self.endpoint[lb ^ 1]];
            let mut j = childs.iter().position(|&c| c == entrychild).expect("entry child") as isize;
            let (jstep, endptrick): (isize, usize) = if j & 1 == 1 {
                j -= len as isize;
                (1, 0)
            } else {
                (-1, 1)
            };
            let mut p = lb;
            while j != 0 {
                let q = endps[cyc(j - endptrick as isize, len)];
                self.label[self.endpoint[p ^ 1]] = 0;
                self.label[self.endpoint[q ^ endptrick ^ 1]] = 0;
                self.assign_label(self.endpoint[p ^ 1], 2, Some(p));
                self.allowedge[q / 2] = true;
                j += jstep;
                p = endps[cyc(j - endptrick as isize, len)] ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = childs[cyc(j, len)];
            let ep = self.endpoint[p ^ 1];
            self.label[ep] = 2;
            self.label[bv] = 2;
            self.labelend[ep] = Some(p);
            self.labelend[bv] = Some(p);
            self.bestedge[bv] = None;
            j += jstep;
            while childs[cyc(j, len)] != entrychild {
                let bv = childs[cyc(j, len)];
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let found = self.leaves(bv).into_iter().find(|&v| self.label[v] != 0);
                if let Some(v) = found {
                    self.label[v] = 0;
                    let base = self.blossombase[bv].expect("sub-blossom base");
                    let m = self.mate[base].expect("sub-blossom base is matched");
                    self.label[self.endpoint[m]] = 0;
                    self.assign_label(v, 2, self.labelend[v]);
                }
                j += jstep;
            }
        }
        self.label[b] = 0;
        self.labelend[b] = None;
        self.blossomchilds[b] = Vec::new();
        self.blossomendps[b] = Vec::new();
        self.blossombase[b] = None;
        self.blossombestedges[b] = None;
        self.bestedge[b] = None;
        self.unusedblossoms.push(b);
    }

    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != Some(b) {
            t = self.blossomparent[t].expect("node lies inside the blossom");
        }
        if t >= self.nv {
            self.augment_blossom(t, v);
        }
        let len = self.blossomchilds[b].len();
        let i = self.blossomchilds[b].iter().position(|&c| c == t).expect("child") ;
        let mut j = i as isize;
        let (jstep, endptrick): (isize, usize) = if i & 1 == 1 {
            j -= len as isize;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t1 = self.blossomchilds[b][cyc(j, len)];
            let p = self.blossomendps[b][cyc(j - endptrick as isize, len)] ^ endptrick;
            if t1 >= self.nv {
                self.augment_blossom(t1, self.endpoint[p]);
            }
            j += jstep;
            let t2 = self.blossomchilds[b][cyc(j, len)];
            if t2 >= self.nv {
                self.augment_blossom(t2, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = Some(p ^ 1);
            self.mate[self.endpoint[p ^ 1]] = Some(p);
        }
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        let first = self.blossomchilds[b][0];
        self.blossombase[b] = self.blossombase[first];
    }

    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                if bs >= self.nv {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = Some(p);
                let Some(le) = self.labelend[bs] else { break };
                let t = self.endpoint[le];
                let bt = self.inblossom[t];
                let lt = self.labelend[bt].expect("T-blossom has a label end");
                s = self.endpoint[lt];
                let j = self.endpoint[lt ^ 1];
                if bt >= self.nv {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = Some(lt);
                p = lt ^ 1;
            }
        }
    }

    fn solve(mut self) -> Vec<Option<usize>> {
        let nv = self.nv;
        for _ in 0..nv {
            self.label.iter_mut().for_each(|l| *l = 0);
            self.bestedge.iter_mut().for_each(|e| *e = None);
            for slot in &mut self.blossombestedges[nv..] {
                *slot = None;
            }
            self.allowedge.iter_mut().for_each(|a| *a = false);
            self.queue.clear();
            for v in 0..nv {
                if self.mate[v].is_none() && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, None);
                }
            }

            let mut augmented = false;
            loop {
                while !augmented {
                    let Some(v) = self.queue.pop() else { break };
                    for idx in 0..self.neighbend[v].len() {
                        let p = self.neighbend[v][idx];
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = 0;
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= 0 {
                                self.allowedge[k] = true;
                            }
                        }
                        let bw = self.inblossom[w];
                        if self.allowedge[k] {
                            if self.label[bw] == 0 {
                                self.assign_label(w, 2, Some(p ^ 1));
                            } else if self.label[bw] == 1 {
                                match self.scan_blossom(v, w) {
                                    Some(base) => self.add_blossom(base, k),
                                    None => {
                                        self.augment_matching(k);
                                        augmented = true;
                                        break;
                                    }
                                }
                            } else if self.label[w] == 0 {
                                self.label[w] = 2;
                                self.labelend[w] = Some(p ^ 1);
                            }
                        } else if self.label[bw] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b].is_none_or(|cur| kslack < self.slack(cur)) {
                                self.bestedge[b] = Some(k);
                            }
                        } else if self.label[w] == 0
                            && self.bestedge[w].is_none_or(|cur| kslack < self.slack(cur))
                        {
                            self.bestedge[w] = Some(k);
                        }
                    }
                }
                if augmented {
                    break;
                }

                // Dual update.
                let mut deltatype = 1;
                let mut delta = *self.dualvar[..nv].iter().min().expect("nonempty");
                let mut deltaedge = None;
                let mut deltablossom = None;
                for v in 0..nv {
                    if self.label[self.inblossom[v]] == 0 {
                        if let Some(e) = self.bestedge[v] {
                            let d = self.slack(e);
                            if d < delta {
                                delta = d;
                                deltatype = 2;
                                deltaedge = Some(e);
                            }
                        }
                    }
                }
                for b in 0..2 * nv {
                    if self.blossomparent[b].is_none() && self.label[b] == 1 {
                        if let Some(e) = self.bestedge[b] {
                            let d = self.slack(e) / 2;
                            if d < delta {
                                delta = d;
                                deltatype = 3;
                                deltaedge = Some(e);
                            }
                        }
                    }
                }
                for b in nv..2 * nv {
                    if self.blossombase[b].is_some()
                        && self.blossomparent[b].is_none()
                        && self.label[b] == 2
                        && self.dualvar[b] < delta
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = Some(b);
                    }
                }
                for v in 0..nv {
                    match self.label[self.inblossom[v]] {
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in nv..2 * nv {
                    if self.blossombase[b].is_some() && self.blossomparent[b].is_none() {
                        match self.label[b] {
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => {}
                        }
                    }
                }
                match deltatype {
                    1 => break,
                    2 => {
                        let e = deltaedge.expect("delta edge");
                        self.allowedge[e] = true;
                        let (mut i, j, _) = self.edges[e];
                        if self.label[self.inblossom[i]] == 0 {
                            i = j;
                        }
                        self.queue.push(i);
                    }
                    3 => {
                        let e = deltaedge.expect("delta edge");
                        self.allowedge[e] = true;
                        self.queue.push(self.edges[e].0);
                    }
                    _ => self.expand_blossom(deltablossom.expect("delta blossom"), false),
                }
            }
            if !augmented {
                break;
            }
            for b in nv..2 * nv {
                if self.blossomparent[b].is_none()
                    && self.blossombase[b].is_some()
                    && self.label[b] == 1
                    && self.dualvar[b] == 0
                {
                    self.expand_blossom(b, true);
                }
            }
        }
        self.mate
            .iter()
            .map(|m| m.map(|p| self.endpoint[p]))
            .collect()
    }
}

/// Every matching of `graph`, the empty one included, in a fixed order.
pub fn enumerate_matchings(graph: &WeightedGraph) -> Result<Vec<Matching>> {
    enumerate_matchings_with_cap(graph, ENUMERATION_CAP)
}

pub fn enumerate_matchings_with_cap(graph: &WeightedGraph, cap: usize) -> Result<Vec<Matching>> {
    let m = graph.edge_count();
    if m > cap {
        return Err(Error::EnumerationCap { edges: m, cap });
    }
    let edges = graph.edges();
    let mut out = Vec::new();
    let mut used = vec![false; graph.node_count()];
    let mut current: Vec<Edge> = Vec::new();
    extend(edges, 0, &mut used, &mut current, &mut out);
    Ok(out)
}

fn extend(
    edges: &[Edge],
    start: usize,
    used: &mut [bool],
    current: &mut Vec<Edge>,
    out: &mut Vec<Matching>,
) {
    out.push(Matching::new(current.iter().copied()).expect("disjoint by construction"));
    for j in start..edges.len() {
        let e = edges[j];
        if used[e.u] || used[e.v] {
            continue;
        }
        used[e.u] = true;
        used[e.v] = true;
        current.push(e);
        extend(edges, j + 1, used, current, out);
        current.pop();
        used[e.u] = false;
        used[e.v] = false;
    }
}
