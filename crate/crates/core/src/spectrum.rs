//! Low-degree Fourier coefficients of the block-model likelihood ratio.
//!
//! With `p = d/n`, the `p`-biased characters `χ_α(G) = ∏_{e∈α}(x_e − p)/√(p(1−p))`
//! are orthonormal under `G(n,p)`, and the coefficient of the likelihood
//! ratio on `χ_α` is `μ̂(α) = E_SBM χ_α`. Labels are hard (`α_Dir = 0`):
//! given labels, `E[x_ab − p] = εp(1{σ_a = σ_b} − 1/k)` and edges are
//! independent, so `μ̂(α)` is a finite label sum.

use std::collections::BTreeSet;

use crate::error::{invalid, Error, Result};
use crate::model::{Graph, SbmParams};

/// A small simple graph on vertices `0..vertices`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShapeGraph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl ShapeGraph {
    /// Edges are stored as `(min, max)` pairs, sorted.
    pub fn new(edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return invalid(format!("self-loop at {a}"));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return invalid(format!("repeated edge ({a},{b})"));
            }
        }
        let vertices = set.iter().map(|&(_, b)| b + 1).max().unwrap_or(0);
        Ok(ShapeGraph {
            vertices,
            edges: set.into_iter().collect(),
        })
    }

    pub fn empty() -> Self {
        ShapeGraph {
            vertices: 0,
            edges: Vec::new(),
        }
    }

    pub fn cycle(t: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..t).map(|i| (i, (i + 1) % t)).collect();
        ShapeGraph::new(&edges).expect("cycle of length at least 3")
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertices touched by some edge.
    pub fn active_vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `V(α)`: number of vertices touched by some edge.
    pub fn vertex_count(&self) -> usize {
        self.active_vertices().len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn has_degree_one(&self) -> bool {
        self.degrees().contains(&1)
    }

    /// `C(α)`: connected components among touched vertices.
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let active = self.active_vertices();
        let mut roots: Vec<usize> = active.iter().map(|&v| find(&mut parent, v)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// Relabels touched vertices to `0..V` in increasing order.
    pub fn compacted(&self) -> ShapeGraph {
        let active = self.active_vertices();
        let mut pos = vec![0; self.vertices];
        for (i, &v) in active.iter().enumerate() {
            pos[v] = i;
        }
        let edges: Vec<(usize, usize)> =
            self.edges.iter().map(|&(a, b)| (pos[a], pos[b])).collect();
        ShapeGraph::new(&edges).expect("relabeling keeps the graph simple")
    }

    /// Disjoint union, placing `other` after the vertices of `self`.
    pub fn disjoint_union(&self, other: &ShapeGraph) -> ShapeGraph {
        let off = self.vertices;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(a, b)| (a + off, b + off)));
        ShapeGraph::new(&edges).expect("disjoint union is simple")
    }
}

/// `χ_α(G)` with vertex labels of `alpha` read as vertices of `graph`.
pub fn biased_character(graph: &Graph, alpha: &ShapeGraph, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("need 0 < p < 1, got {p}"));
    }
    if alpha.vertices > graph.n() {
        return Err(Error::Dimension(
            "shape uses vertices outside the graph".into(),
        ));
    }
    let s = (p * (1.0 - p)).sqrt();
    Ok(alpha
        .edges
        .iter()
        .map(|&(a, b)| {
            if graph.has_edge(a, b) {
                (1.0 - p) / s
            } else {
                -p / s
            }
        })
        .product())
}

/// Largest number of label assignments summed by [`mu_hat`].
pub const LABEL_SUM_LIMIT: f64 = 1e7;

fn check_hard(params: &SbmParams) -> Result<()> {
    params.validate()?;
    if params.alpha != 0.0 {
        return invalid("Fourier coefficients are computed for hard labels (alpha = 0)");
    }
    Ok(())
}

/// `Σ_σ ∏_{ab∈α} (k·1{σ_a=σ_b} − 1)` over all labelings of the touched vertices, exactly.
fn label_sum(alpha: &ShapeGraph, k: usize) -> Result<i128> {
    let a = alpha.compacted();
    let v = a.vertices;
    if (k as f64).powi(v as i32) > LABEL_SUM_LIMIT {
        return Err(Error::Guard(format!(
            "{k}^{v} labelings exceed the enumeration limit"
        )));
    }
    let same = k as i128 - 1;
    let mut labels = vec![0usize; v];
    let mut total: i128 = 0;
    loop {
        let mut prod: i128 = 1;
        for &(x, y) in &a.edges {
            prod *= if labels[x] == labels[y] { same } else { -1 };
        }
        total += prod;
        let mut pos = 0;
        loop {
            if pos == v {
                return Ok(total);
            }
            labels[pos] += 1;
            if labels[pos] < k {
                break;
            }
            labels[pos] = 0;
            pos += 1;
        }
    }
}

/// Per-edge factor `εp/√(p(1−p))`.
fn edge_factor(params: &SbmParams) -> f64 {
    let p = params.p();
    params.eps * p / (p * (1.0 - p)).sqrt()
}

/// Exact `μ̂(α) = E_SBM χ_α` by summing over hard-label assignments.
pub fn mu_hat(alpha: &ShapeGraph, params: &SbmParams) -> Result<f64> {
    check_hard(params)?;
    let s = label_sum(alpha, params.k)?;
    if s == 0 {
        return Ok(0.0);
    }
    let k = params.k as f64;
    let e = alpha.edge_count() as i32;
    let v = alpha.vertex_count() as i32;
    Ok((edge_factor(params) / k).powi(e) * s as f64 / k.powi(v))
}

/// Closed form of `μ̂` on a `t`-cycle: `β^t (k−1)/k^t`, `β = εp/√(p(1−p))`.
pub fn mu_hat_cycle(t: usize, params: &SbmParams) -> f64 {
    let k = params.k as f64;
    (edge_factor(params) / k).powi(t as i32) * (k - 1.0)
}

/// Largest number of edge subsets visited by [`low_degree_mass_by_size`].
pub const SUBSET_LIMIT: f64 = 1e7;

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Σ_{|α| = s} μ̂(α)²` for `s = 0..=max_deg`, over all edge subsets of the
/// complete graph on `params.n` vertices.
pub fn low_degree_mass_by_size(params: &SbmParams, max_deg: usize) -> Result<Vec<f64>> {
    check_hard(params)?;
    let n = params.n;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let m = pairs.len();
    let max_deg = max_deg.min(m);
    let count: f64 = (0..=max_deg).map(|s| binomial(m, s)).sum();
    if count > SUBSET_LIMIT {
        return Err(Error::Guard(format!(
            "{count:.0} edge subsets exceed the enumeration limit"
        )));
    }
    let mut mass = vec![0.0; max_deg + 1];
    mass[0] = 1.0;
    let mut chosen: Vec<usize> = Vec::with_capacity(max_deg);
    fn rec(
        start: usize,
        pairs: &[(usize, usize)],
        chosen: &mut Vec<usize>,
        max_deg: usize,
        params: &SbmParams,
        mass: &mut [f64],
    ) -> Result<()> {
        for e in start..pairs.len() {
            chosen.push(e);
            let edges: Vec<(usize, usize)> = chosen.iter().map(|&i| pairs[i]).collect();
            let mu = mu_hat(&ShapeGraph::new(&edges)?, params)?;
            mass[chosen.len()] += mu * mu;
            if chosen.len() < max_deg {
                rec(e + 1, pairs, chosen, max_deg, params, mass)?;
            }
            chosen.pop();
        }
        Ok(())
    }
    if max_deg > 0 {
        rec(0, &pairs, &mut chosen, max_deg, params, &mut mass)?;
    }
    Ok(mass)
}

/// `‖μ^{≤max_deg}‖² = Σ_{|α| ≤ max_deg} μ̂(α)²` by exhaustive enumeration.
pub fn low_degree_norm_bruteforce(params: &SbmParams, max_deg: usize) -> Result<f64> {
    Ok(low_degree_mass_by_size(params, max_deg)?.iter().sum())
}

/// Contribution of all `t`-cycles of the complete graph to `‖μ^{≤ℓ}‖²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleTerm {
    pub t: usize,
    /// `(n)_t/(2t) · μ̂(C_t)²`.
    pub term: f64,
    /// Sum of terms up to and including `t`.
    pub cumulative: f64,
    /// `(t+1)·term_{t+1} / (t·term_t)`, the geometric growth factor of cycle
    /// mass at this length; `NaN` for the last length or a vanishing term.
    pub ratio: f64,
}

/// Cycle contributions for lengths `3..=max_len`.
pub fn cycle_sum_contribution(params: &SbmParams, max_len: usize) -> Result<Vec<CycleTerm>> {
    check_hard(params)?;
    if max_len < 3 {
        return invalid("cycles have length at least 3");
    }
    let n = params.n;
    let mut out: Vec<CycleTerm> = Vec::new();
    let mut cumulative = 0.0;
    for t in 3..=max_len.min(n) {
        // log of the number of t-cycles, (n)_t / (2t).
        let log_count: f64 =
            (0..t).map(|i| ((n - i) as f64).ln()).sum::<f64>() - ((2 * t) as f64).ln();
        let mu = mu_hat_cycle(t, params);
        let term = if mu == 0.0 {
            0.0
        } else {
            (log_count + 2.0 * mu.abs().ln()).exp()
        };
        cumulative += term;
        out.push(CycleTerm {
            t,
            term,
            cumulative,
            ratio: f64::NAN,
        });
    }
    for i in 0..out.len().saturating_sub(1) {
        let (a, b) = (out[i], out[i + 1]);
        if a.term > 0.0 {
            out[i].ratio = (b.t as f64 * b.term) / (a.t as f64 * a.term);
        }
    }
    Ok(out)
}

fn canonical_connected(g: &ShapeGraph) -> ShapeGraph {
    let g = g.compacted();
    let v = g.vertices;
    let mut perm: Vec<usize> = (0..v).collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    loop {
        let mut e: Vec<(usize, usize)> = g
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (perm[a], perm[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        e.sort_unstable();
        if best.as_ref().is_none_or(|b| e < *b) {
            best = Some(e);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    ShapeGraph::new(&best.unwrap_or_default()).expect("permuted graph is simple")
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Connected graphs with between 1 and `max_edges` edges, one per isomorphism class.
pub fn connected_shapes(max_edges: usize) -> Vec<ShapeGraph> {
    let mut all: Vec<ShapeGraph> = Vec::new();
    if max_edges == 0 {
        return all;
    }
    let mut level: BTreeSet<ShapeGraph> = BTreeSet::new();
    level.insert(ShapeGraph::new(&[(0, 1)]).expect("single edge"));
    for _ in 1..max_edges {
        let mut next = BTreeSet::new();
        for g in &level {
            let v = g.vertices;
            for a in 0..v {
                for b in a + 1..=v {
                    if g.edges.binary_search(&(a, b)).is_ok() {
                        continue;
                    }
                    let mut e = g.edges.clone();
                    e.push((a, b));
                    next.insert(canonical_connected(&ShapeGraph::new(&e).expect("new edge")));
                }
            }
        }
        all.extend(level);
        level = next;
    }
    all.extend(level);
    all
}

/// Every graph without isolated vertices with between 1 and `max_edges`
/// edges, up to isomorphism, built as multisets of connected shapes.
pub fn all_shapes(max_edges: usize) -> Vec<ShapeGraph> {
    let parts = connected_shapes(max_edges);
    let mut out = Vec::new();
    fn rec(
        parts: &[ShapeGraph],
        start: usize,
        cur: &ShapeGraph,
        budget: usize,
        out: &mut Vec<ShapeGraph>,
    ) {
        for i in start..parts.len() {
            let e = parts[i].edge_count();
            if e > budget {
                continue;
            }
            let g = cur.disjoint_union(&parts[i]);
            out.push(g.clone());
            rec(parts, i, &g, budget - e, out);
        }
    }
    rec(&parts, 0, &ShapeGraph::empty(), max_edges, &mut out);
    out
}

/// Number of vertex permutations of `g` (on its touched vertices) mapping edges to edges.
pub fn automorphism_count(g: &ShapeGraph) -> u64 {
    let g = g.compacted();
    let v = g.vertices;
    let mut adj = vec![vec![false; v]; v];
    for &(a, b) in &g.edges {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    let deg = g.degrees();
    fn rec(
        pos: usize,
        map: &mut Vec<usize>,
        used: &mut [bool],
        adj: &[Vec<bool>],
        deg: &[usize],
    ) -> u64 {
        let v = adj.len();
        if pos == v {
            return 1;
        }
        let mut total = 0;
        for t in 0..v {
            if used[t] || deg[t] != deg[pos] {
                continue;
            }
            if (0..pos).any(|q| adj[pos][q] != adj[t][map[q]]) {
                continue;
            }
            used[t] = true;
            map.push(t);
            total += rec(pos + 1, map, used, adj, deg);
            map.pop();
            used[t] = false;
        }
        total
    }
    rec(
        0,
        &mut Vec::with_capacity(v),
        &mut vec![false; v],
        &adj,
        &deg,
    )
}

/// Same quantity as [`low_degree_mass_by_size`], summed over isomorphism
/// classes: a shape on `v` vertices has `(n)_v / |Aut|` copies in `K_n`, all
/// with the same coefficient.
pub fn low_degree_mass_by_shapes(params: &SbmParams, max_deg: usize) -> Result<Vec<f64>> {
    check_hard(params)?;
    let n = params.n;
    let mut mass = vec![0.0; max_deg + 1];
    mass[0] = 1.0;
    for shape in all_shapes(max_deg) {
        let v = shape.vertex_count();
        if v > n {
            continue;
        }
        let copies =
            (0..v).map(|i| (n - i) as f64).product::<f64>() / automorphism_count(&shape) as f64;
        let mu = mu_hat(&shape, params)?;
        mass[shape.edge_count()] += copies * mu * mu;
    }
    Ok(mass)
}
