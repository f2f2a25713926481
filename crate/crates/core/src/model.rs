//! Random models, label containers and the correlation metric.

use std::collections::HashMap;
use std::collections::HashSet;
use std::sync::{Mutex, OnceLock};

use faer::Mat;
use rand::Rng as _;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::rng::Rng;

/// Parameters of the mixed-membership block model.
///
/// A pair `{i,j}` is an edge with probability `(1 + (⟨σ_i,σ_j⟩ − 1/k)ε)·d/n`,
/// with labels drawn from the symmetric Dirichlet with per-coordinate
/// parameter `α/k`. At `α = 0` labels are uniform basis vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SbmParams {
    pub n: usize,
    pub d: f64,
    pub eps: f64,
    pub k: usize,
    pub alpha: f64,
}

impl SbmParams {
    pub fn new(n: usize, d: f64, eps: f64, k: usize, alpha: f64) -> Result<Self> {
        let p = SbmParams {
            n,
            d,
            eps,
            k,
            alpha,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return invalid("k must be at least 1");
        }
        if self.n < 2 {
            return invalid("n must be at least 2");
        }
        if !(self.d > 0.0 && self.d.is_finite()) || self.d >= self.n as f64 {
            return invalid(format!("need 0 < d < n, got d = {}", self.d));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return invalid("eps must be a finite nonnegative number");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return invalid("alpha must be a finite nonnegative number");
        }
        let k = self.k as f64;
        let lo = (1.0 - self.eps / k) * self.p();
        let hi = (1.0 + (1.0 - 1.0 / k) * self.eps) * self.p();
        if lo < 0.0 || hi > 1.0 {
            return invalid(format!(
                "edge probabilities leave [0,1]: range [{lo}, {hi}]"
            ));
        }
        Ok(())
    }

    /// Base edge density d/n.
    pub fn p(&self) -> f64 {
        self.d / self.n as f64
    }

    /// `δ = 1 − k²(α+1)²/(ε²d)`.
    pub fn delta(&self) -> f64 {
        let k = self.k as f64;
        1.0 - (k * (self.alpha + 1.0)).powi(2) / (self.eps * self.eps * self.d)
    }

    /// Signal-to-threshold ratio `ε²d / (k²(α+1)²)`.
    pub fn snr(&self) -> f64 {
        let k = self.k as f64;
        self.eps * self.eps * self.d / (k * (self.alpha + 1.0)).powi(2)
    }

    pub fn edge_probability(&self, si: &[f64], sj: &[f64]) -> f64 {
        let ip: f64 = linalg::dot(si, sj);
        ((1.0 + (ip - 1.0 / self.k as f64) * self.eps) * self.p()).clamp(0.0, 1.0)
    }

    /// `1/(k(α+1))`, the covariance scale of centered labels.
    pub fn c2(&self) -> f64 {
        1.0 / (self.k as f64 * (self.alpha + 1.0))
    }

    /// Shift `1/(k√(α+1))` turning `v_s` into `w_s`.
    pub fn shift(&self) -> f64 {
        1.0 / (self.k as f64 * (self.alpha + 1.0).sqrt())
    }

    /// `E‖v_s‖²` over `m` vertices.
    pub fn expected_v_norm2(&self, m: usize) -> f64 {
        let k = self.k as f64;
        m as f64 * (k - 1.0) / (k * k * (self.alpha + 1.0))
    }

    /// `E‖w_s‖²` over `m` vertices.
    pub fn expected_w_norm2(&self, m: usize) -> f64 {
        m as f64 / (self.k as f64 * (self.alpha + 1.0))
    }

    /// Same model restricted to `m` of the vertices: edge density stays d/n.
    pub fn restricted(&self, m: usize) -> SbmParams {
        SbmParams {
            n: m,
            d: self.d * m as f64 / self.n as f64,
            ..*self
        }
    }

    /// Collision-probability parameter `t = (α+1)k/(k+α)`; the best achievable
    /// correlation is `1/t − 1/k`.
    pub fn collision_t(&self) -> f64 {
        let k = self.k as f64;
        (self.alpha + 1.0) * k / (k + self.alpha)
    }
}

/// Two-community model: edge probability `(1 + ε y_i y_j)·d/n` with uniform
/// `y ∈ {±1}ⁿ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoParams {
    pub n: usize,
    pub d: f64,
    pub eps: f64,
}

impl TwoParams {
    pub fn new(n: usize, d: f64, eps: f64) -> Result<Self> {
        let p = TwoParams { n, d, eps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eps) {
            return invalid("two-community eps must lie in [0,1]");
        }
        self.to_sbm().validate()
    }

    /// The equivalent mixed-membership parameters (`k = 2`, `α = 0`, bias `2ε`).
    pub fn to_sbm(&self) -> SbmParams {
        SbmParams {
            n: self.n,
            d: self.d,
            eps: 2.0 * self.eps,
            k: 2,
            alpha: 0.0,
        }
    }

    pub fn p(&self) -> f64 {
        self.d / self.n as f64
    }

    /// `δ = 1 − 1/(ε²d)`.
    pub fn delta(&self) -> f64 {
        1.0 - 1.0 / (self.eps * self.eps * self.d)
    }

    pub fn snr(&self) -> f64 {
        self.eps * self.eps * self.d
    }
}

/// Simple undirected graph with adjacency lists and constant-time edge queries.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<u32>>,
    edges: Vec<(u32, u32)>,
    set: HashSet<u64>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            adj: vec![Vec::new(); n],
            edges: Vec::new(),
            set: HashSet::new(),
        }
    }

    fn key(u: usize, v: usize) -> u64 {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        ((a as u64) << 32) | b as u64
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return invalid(format!("edge ({u},{v}) out of range for n = {}", self.n));
        }
        if u == v {
            return invalid(format!("self-loop at {u}"));
        }
        if !self.set.insert(Self::key(u, v)) {
            return invalid(format!("duplicate edge ({u},{v})"));
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.edges.push((a as u32, b as u32));
        self.adj[u].push(v as u32);
        self.adj[v].push(u as u32);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.set.contains(&Self::key(u, v))
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Edges as `(u, v)` with `u < v`, in insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(a, b)| (a as usize, b as usize))
    }

    /// Subgraph induced on `vertices`, relabeled `0..vertices.len()` in order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut pos = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            pos[v] = i;
        }
        let mut g = Graph::new(vertices.len());
        for (u, v) in self.edges() {
            if pos[u] != usize::MAX && pos[v] != usize::MAX {
                g.add_edge(pos[u], pos[v])
                    .expect("induced edges are simple");
            }
        }
        g
    }

    pub fn adjacency(&self) -> Mat<f64> {
        let mut a = Mat::zeros(self.n, self.n);
        for (u, v) in self.edges() {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }
}

/// Rows of k-dimensional probability vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelMatrix {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl LabelMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, |r| r.len());
        if k == 0 {
            return invalid("label rows must be nonempty");
        }
        let mut data = Vec::with_capacity(n * k);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {k}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        let m = LabelMatrix { n, k, data };
        m.check()?;
        Ok(m)
    }

    pub fn from_hard(labels: &[usize], k: usize) -> Self {
        let n = labels.len();
        let mut data = vec![0.0; n * k];
        for (i, &l) in labels.iter().enumerate() {
            data[i * k + l] = 1.0;
        }
        LabelMatrix { n, k, data }
    }

    pub fn uniform(n: usize, k: usize) -> Self {
        LabelMatrix {
            n,
            k,
            data: vec![1.0 / k as f64; n * k],
        }
    }

    pub(crate) fn from_raw(n: usize, k: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * k);
        LabelMatrix { n, k, data }
    }

    /// Checks the simplex constraints to 1e−9.
    pub fn check(&self) -> Result<()> {
        for i in 0..self.n {
            let r = self.row(i);
            if r.iter().any(|&x| x.is_nan() || x < -1e-9) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return invalid(format!("row {i} is not a probability vector"));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.k)
    }

    /// Index of each row's largest entry.
    pub fn argmax(&self) -> Vec<usize> {
        self.rows()
            .map(|r| {
                let mut best = 0;
                for (s, &x) in r.iter().enumerate() {
                    if x > r[best] {
                        best = s;
                    }
                }
                best
            })
            .collect()
    }

    /// Applies a coordinate permutation: column `s` of the result is column `perm[s]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.n {
            for s in 0..self.k {
                data[i * self.k + s] = self.data[i * self.k + perm[s]];
            }
        }
        LabelMatrix {
            n: self.n,
            k: self.k,
            data,
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.k);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        LabelMatrix {
            n: idx.len(),
            k: self.k,
            data,
        }
    }
}

/// Symmetric Dirichlet sample with per-coordinate parameter `α/k`; `α = 0`
/// gives a uniformly random basis vector.
pub fn sample_dirichlet(k: usize, alpha: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    if k == 0 {
        return invalid("k must be at least 1");
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return invalid("alpha must be a finite nonnegative number");
    }
    if k == 1 {
        return Ok(vec![1.0]);
    }
    if alpha == 0.0 {
        let mut e = vec![0.0; k];
        e[rng.random_range(0..k)] = 1.0;
        return Ok(e);
    }
    let a = alpha / k as f64;
    // log Gamma(a) = log Gamma(a+1) + log(U)/a keeps tiny shapes from underflowing.
    let g = Gamma::new(a + 1.0, 1.0).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let logs: Vec<f64> = (0..k)
        .map(|_| {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            g.sample(rng).max(f64::MIN_POSITIVE).ln() + u.ln() / a
        })
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut x: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    Ok(x)
}

pub fn sample_labels(n: usize, k: usize, alpha: f64, rng: &mut Rng) -> Result<LabelMatrix> {
    let mut data = Vec::with_capacity(n * k);
    for _ in 0..n {
        data.extend(sample_dirichlet(k, alpha, rng)?);
    }
    Ok(LabelMatrix { n, k, data })
}

/// Draws a graph given labels, each pair independently.
pub fn sample_graph_given(
    params: &SbmParams,
    labels: &LabelMatrix,
    rng: &mut Rng,
) -> Result<Graph> {
    params.validate()?;
    if labels.n() != params.n || labels.k() != params.k {
        return Err(Error::Dimension("labels do not match parameters".into()));
    }
    let n = params.n;
    let mut g = Graph::new(n);
    for i in 0..n {
        let si = labels.row(i);
        for j in i + 1..n {
            let p = params.edge_probability(si, labels.row(j));
            if rng.random::<f64>() < p {
                g.add_edge(i, j)?;
            }
        }
    }
    Ok(g)
}

pub fn sample_mixed_membership(params: &SbmParams, rng: &mut Rng) -> Result<(Graph, LabelMatrix)> {
    params.validate()?;
    let labels = sample_labels(params.n, params.k, params.alpha, rng)?;
    let g = sample_graph_given(params, &labels, rng)?;
    Ok((g, labels))
}

/// Two-community sample; `y` holds the ±1 community signs.
pub fn sample_two_communities(params: &TwoParams, rng: &mut Rng) -> Result<(Graph, Vec<f64>)> {
    params.validate()?;
    let y: Vec<f64> = (0..params.n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let g = sample_two_given(params, &y, rng)?;
    Ok((g, y))
}

pub fn sample_two_given(params: &TwoParams, y: &[f64], rng: &mut Rng) -> Result<Graph> {
    let n = params.n;
    let p = params.p();
    let mut g = Graph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p * (1.0 + params.eps * y[i] * y[j]) {
                g.add_edge(i, j)?;
            }
        }
    }
    Ok(g)
}

pub fn signs_to_labels(y: &[f64]) -> LabelMatrix {
    let hard: Vec<usize> = y.iter().map(|&s| if s >= 0.0 { 0 } else { 1 }).collect();
    LabelMatrix::from_hard(&hard, 2)
}

/// `A = λvvᵀ + W` with `W_ij ~ N(0, 1/n)` symmetric and `v ~ N(0, Id/n)`.
#[derive(Clone, Debug)]
pub struct WignerInstance {
    pub a: Mat<f64>,
    pub v: Vec<f64>,
    pub lambda: f64,
}

pub fn sample_spiked_wigner(n: usize, lambda: f64, rng: &mut Rng) -> Result<WignerInstance> {
    if n < 2 {
        return invalid("n must be at least 2");
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return invalid("lambda must be finite and nonnegative");
    }
    let s = 1.0 / (n as f64).sqrt();
    let v: Vec<f64> = (0..n)
        .map(|_| s * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut a = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let w = s * rng.sample::<f64, _>(StandardNormal);
            a[(i, j)] = w + lambda * v[i] * v[j];
            a[(j, i)] = a[(i, j)];
        }
    }
    Ok(WignerInstance { a, v, lambda })
}

/// Maximum-profit assignment on a square `k×k` profit matrix (row-major).
/// Returns `perm` with row `s` matched to column `perm[s]`, and the total profit.
pub fn max_assignment(profit: &[f64], k: usize) -> (Vec<usize>, f64) {
    // Shortest augmenting paths with potentials on cost = −profit.
    let inf = f64::INFINITY;
    let cost = |i: usize, j: usize| -profit[(i - 1) * k + (j - 1)];
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut p = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; k];
    for j in 1..=k {
        if p[j] > 0 {
            perm[p[j] - 1] = j - 1;
        }
    }
    let total = (0..k).map(|s| profit[s * k + perm[s]]).sum();
    (perm, total)
}

/// `max_π (1/n) Σ_i ⟨σ_i, Πτ_i⟩ − 1/k` over coordinate permutations.
pub fn corr(sigma: &LabelMatrix, tau: &LabelMatrix) -> Result<f64> {
    if sigma.n() != tau.n() || sigma.k() != tau.k() {
        return Err(Error::Dimension(format!(
            "sigma is {}x{}, tau is {}x{}",
            sigma.n(),
            sigma.k(),
            tau.n(),
            tau.k()
        )));
    }
    let (n, k) = (sigma.n(), sigma.k());
    if n == 0 {
        return invalid("empty labelings");
    }
    let mut b = vec![0.0; k * k];
    for i in 0..n {
        let (s, t) = (sigma.row(i), tau.row(i));
        for a in 0..k {
            if s[a] == 0.0 {
                continue;
            }
            for c in 0..k {
                b[a * k + c] += s[a] * t[c];
            }
        }
    }
    b.iter_mut().for_each(|x| *x /= n as f64);
    let (_, total) = max_assignment(&b, k);
    Ok(total - 1.0 / k as f64)
}

/// Centered community vectors `v_s(i) = σ_i(s) − 1/k` and shifted `w_s = v_s + 1/(k√(α+1))`.
#[derive(Clone, Debug)]
pub struct CommunityVectors {
    pub v: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
}

pub fn community_vectors(labels: &LabelMatrix, alpha: f64) -> CommunityVectors {
    let (n, k) = (labels.n(), labels.k());
    let shift = 1.0 / (k as f64 * (alpha + 1.0).sqrt());
    let mut v = vec![vec![0.0; n]; k];
    let mut w = vec![vec![0.0; n]; k];
    for i in 0..n {
        let r = labels.row(i);
        for s in 0..k {
            v[s][i] = r[s] - 1.0 / k as f64;
            w[s][i] = v[s][i] + shift;
        }
    }
    CommunityVectors { v, w }
}

impl CommunityVectors {
    /// `M^{-1/2} w_s` for `M = Σ_s w_s w_sᵀ` (pseudo-inverse square root on the span),
    /// computed through the k×k Gram matrix.
    pub fn whitened_w(&self) -> Result<Vec<Vec<f64>>> {
        let k = self.w.len();
        let gram = Mat::from_fn(k, k, |a, b| linalg::dot(&self.w[a], &self.w[b]));
        let (vals, vecs) = linalg::sym_eigen(&gram)?;
        let top = vals.iter().cloned().fold(0.0f64, f64::max);
        let inv_sqrt = linalg::spectral_map(&vals, &vecs, |l| {
            if l > 1e-12 * top {
                1.0 / l.sqrt()
            } else {
                0.0
            }
        });
        let n = self.w.first().map_or(0, |x| x.len());
        Ok((0..k)
            .map(|s| {
                let mut out = vec![0.0; n];
                for t in 0..k {
                    let c = inv_sqrt[(t, s)];
                    out.iter_mut()
                        .zip(&self.w[t])
                        .for_each(|(o, x)| *o += c * x);
                }
                out
            })
            .collect())
    }
}

/// `E ∏_j σ(idx_j)` for σ from the symmetric Dirichlet with per-coordinate parameter `α/k`.
pub fn dirichlet_raw_moment(k: usize, alpha: f64, idx: &[usize]) -> f64 {
    let mut counts: HashMap<usize, u32> = HashMap::new();
    for &i in idx {
        *counts.entry(i).or_insert(0) += 1;
    }
    let total: u32 = counts.values().sum();
    if total == 0 {
        return 1.0;
    }
    if alpha == 0.0 {
        return if counts.len() == 1 {
            1.0 / k as f64
        } else {
            0.0
        };
    }
    let b = alpha / k as f64;
    let mut l = ln_gamma(alpha) - ln_gamma(alpha + total as f64);
    for &c in counts.values() {
        l += ln_gamma(b + c as f64) - ln_gamma(b);
    }
    l.exp()
}

/// `E ∏_j (σ(idx_j) − 1/k)`.
pub fn dirichlet_central_moment(k: usize, alpha: f64, idx: &[usize]) -> f64 {
    let m = idx.len();
    let c = -1.0 / k as f64;
    let mut s = 0.0;
    for mask in 0u32..(1 << m) {
        let chosen: Vec<usize> = (0..m)
            .filter(|j| mask >> j & 1 == 1)
            .map(|j| idx[j])
            .collect();
        s += c.powi((m - chosen.len()) as i32) * dirichlet_raw_moment(k, alpha, &chosen);
    }
    s
}

/// Moment constants of centered labels restricted to zero-sum directions:
/// for `u` with `Σ u_s = 0`,
/// `E⟨σ̃,u⟩² = c2 Σu_s²`, `E⟨σ̃,u⟩³ = c3 Σu_s³`,
/// `E⟨σ̃,u⟩⁴ = c4 Σu_s⁴ + 3 c22 (Σu_s²)²`.
///
/// For `k ≤ 3` the two quartic invariants coincide up to a factor on the
/// zero-sum space, so `c22 = 0` and `c4` carries the whole quartic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentConstants {
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c22: f64,
}

fn quartic_form(k: usize, alpha: f64, u: &[f64]) -> f64 {
    let mut s = 0.0;
    for a in 0..k {
        for b in a..k {
            for c in b..k {
                for d in c..k {
                    let idx = [a, b, c, d];
                    let mult = multiplicity(&idx) as f64;
                    s +=
                        mult * dirichlet_central_moment(k, alpha, &idx) * u[a] * u[b] * u[c] * u[d];
                }
            }
        }
    }
    s
}

fn multiplicity(idx: &[usize]) -> u64 {
    let mut counts: HashMap<usize, u64> = HashMap::new();
    for &i in idx {
        *counts.entry(i).or_insert(0) += 1;
    }
    let f = |m: u64| (1..=m).product::<u64>();
    f(idx.len() as u64) / counts.values().map(|&c| f(c)).product::<u64>()
}

pub fn moment_constants(k: usize, alpha: f64) -> MomentConstants {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), MomentConstants>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (k, alpha.to_bits());
    if let Some(c) = cache.lock().unwrap().get(&key) {
        return *c;
    }
    let c = compute_moment_constants(k, alpha);
    cache.lock().unwrap().insert(key, c);
    c
}

fn compute_moment_constants(k: usize, alpha: f64) -> MomentConstants {
    let c2 = 1.0 / (k as f64 * (alpha + 1.0));
    if k < 2 {
        return MomentConstants {
            c2,
            c3: 0.0,
            c4: 0.0,
            c22: 0.0,
        };
    }
    let c3 = if k >= 3 {
        dirichlet_central_moment(k, alpha, &[0, 0, 0])
            - 3.0 * dirichlet_central_moment(k, alpha, &[0, 0, 1])
            + 2.0 * dirichlet_central_moment(k, alpha, &[0, 1, 2])
    } else {
        // Σ u_s³ vanishes identically for zero-sum u when k = 2.
        dirichlet_central_moment(k, alpha, &[0, 0, 0])
            - 3.0 * dirichlet_central_moment(k, alpha, &[0, 0, 1])
    };
    let mut u1 = vec![0.0; k];
    u1[0] = 1.0;
    u1[1] = -1.0;
    let f1 = quartic_form(k, alpha, &u1);
    let (p4a, p2a) = (2.0, 2.0);
    if k <= 3 {
        return MomentConstants {
            c2,
            c3,
            c4: f1 / p4a,
            c22: 0.0,
        };
    }
    let mut u2 = vec![0.0; k];
    u2[..3].fill(1.0);
    u2[3] = -3.0;
    let f2 = quartic_form(k, alpha, &u2);
    let (p4b, p2b) = (84.0, 12.0);
    // f = c4·p4 + 3·c22·p2².
    let det = p4a * 3.0 * p2b * p2b - p4b * 3.0 * p2a * p2a;
    let c4 = (f1 * 3.0 * p2b * p2b - f2 * 3.0 * p2a * p2a) / det;
    let c22 = (p4a * f2 - p4b * f1) / det;
    MomentConstants { c2, c3, c4, c22 }
}
