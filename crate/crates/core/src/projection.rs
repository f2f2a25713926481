//! Minimum-norm points of intersections of convex sets (Dykstra's method).
//!
//! Points are flat `f64` vectors. Symmetric `n×n` matrices are stored
//! column-major, so the Euclidean norm of the vector is the Frobenius norm.

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg;

/// A closed convex set with an exact Euclidean projection.
pub trait ConvexSet: Send + Sync {
    fn project(&self, x: &mut [f64]);

    /// Euclidean distance from `x` to the set.
    fn distance(&self, x: &[f64]) -> f64 {
        let mut y = x.to_vec();
        self.project(&mut y);
        dist(x, &y)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn mat_to_vec(m: &Mat<f64>) -> Vec<f64> {
    let (r, c) = (m.nrows(), m.ncols());
    let mut v = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            v.push(m[(i, j)]);
        }
    }
    v
}

pub fn vec_to_mat(v: &[f64], n: usize) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| v[j * n + i])
}

/// Nearest positive semidefinite matrix: negative eigenvalues clipped to zero.
pub fn project_psd(s: &Mat<f64>) -> Result<Mat<f64>> {
    let (vals, vecs) = linalg::sym_eigen(s)?;
    Ok(linalg::spectral_map(&vals, &vecs, |l| l.max(0.0)))
}

/// Nearest matrix with operator norm at most `radius`: eigenvalues clipped into `[−radius, radius]`.
pub fn project_opnorm_ball(s: &Mat<f64>, radius: f64) -> Result<Mat<f64>> {
    let (vals, vecs) = linalg::sym_eigen(s)?;
    if vals.iter().all(|l| l.abs() <= radius) {
        return Ok(s.clone());
    }
    // Rebuild as S − U diag(λ − clip(λ)) Uᵀ, touching only the clipped directions.
    let excess = linalg::spectral_map(&vals, &vecs, |l| l - l.clamp(-radius, radius));
    Ok(s - &excess)
}

fn psd_in_place(x: &mut [f64], n: usize, offset: usize, size: usize) {
    let sub = Mat::from_fn(size, size, |i, j| {
        0.5 * (x[(offset + j) * n + offset + i] + x[(offset + i) * n + offset + j])
    });
    if let Ok(p) = project_psd(&sub) {
        write_block(x, n, offset, size, &p);
    }
}

fn write_block(x: &mut [f64], n: usize, offset: usize, size: usize, m: &Mat<f64>) {
    for j in 0..size {
        for i in 0..size {
            x[(offset + j) * n + offset + i] = m[(i, j)];
        }
    }
}

/// Cone of PSD `n×n` matrices.
pub struct PsdCone {
    pub n: usize,
}

impl ConvexSet for PsdCone {
    fn project(&self, x: &mut [f64]) {
        psd_in_place(x, self.n, 0, self.n);
    }
}

/// Matrices whose principal block `offset..offset+size` has operator norm at most `radius`.
pub struct OpNormBlock {
    pub n: usize,
    pub offset: usize,
    pub size: usize,
    pub radius: f64,
}

impl ConvexSet for OpNormBlock {
    fn project(&self, x: &mut [f64]) {
        let (n, o, s) = (self.n, self.offset, self.size);
        let sub = Mat::from_fn(s, s, |i, j| {
            0.5 * (x[(o + j) * n + o + i] + x[(o + i) * n + o + j])
        });
        if let Ok(p) = project_opnorm_ball(&sub, self.radius) {
            write_block(x, n, o, s, &p);
        }
    }
}

/// Operator-norm ball on whole `n×n` matrices.
pub fn op_norm_ball(n: usize, radius: f64) -> OpNormBlock {
    OpNormBlock {
        n,
        offset: 0,
        size: n,
        radius,
    }
}

/// Matrices with the prescribed diagonal.
pub struct DiagEquals {
    pub n: usize,
    pub values: Vec<f64>,
}

impl ConvexSet for DiagEquals {
    fn project(&self, x: &mut [f64]) {
        for i in 0..self.n {
            x[i * self.n + i] = self.values[i];
        }
    }
}

/// `{x : ⟨a, x⟩ ≥ b}`.
pub struct Halfspace {
    pub a: Vec<f64>,
    pub b: f64,
    norm2: f64,
}

impl Halfspace {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        let norm2 = a.iter().map(|v| v * v).sum();
        Halfspace { a, b, norm2 }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.a, x)
    }
}

impl ConvexSet for Halfspace {
    fn project(&self, x: &mut [f64]) {
        let v = self.value(x);
        if v < self.b && self.norm2 > 0.0 {
            let t = (self.b - v) / self.norm2;
            x.iter_mut().zip(&self.a).for_each(|(xi, ai)| *xi += t * ai);
        }
    }

    fn distance(&self, x: &[f64]) -> f64 {
        let v = self.value(x);
        if v >= self.b {
            0.0
        } else if self.norm2 > 0.0 {
            (self.b - v) / self.norm2.sqrt()
        } else {
            f64::INFINITY
        }
    }
}

/// Euclidean ball of the given radius around the origin, optionally on a coordinate subset.
pub struct FrobeniusBall {
    pub radius: f64,
    pub coords: Option<Vec<usize>>,
}

impl ConvexSet for FrobeniusBall {
    fn project(&self, x: &mut [f64]) {
        match &self.coords {
            None => {
                let nr = linalg::norm(x);
                if nr > self.radius {
                    x.iter_mut().for_each(|v| *v *= self.radius / nr);
                }
            }
            Some(idx) => {
                let nr = idx.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt();
                if nr > self.radius {
                    idx.iter().for_each(|&i| x[i] *= self.radius / nr);
                }
            }
        }
    }
}

/// Coordinates forced to zero.
pub struct ZeroCoords {
    pub idx: Vec<usize>,
}

impl ConvexSet for ZeroCoords {
    fn project(&self, x: &mut [f64]) {
        self.idx.iter().for_each(|&i| x[i] = 0.0);
    }
}

/// Box `{x : lo_i ≤ x_i ≤ hi_i}`.
pub struct BoxSet {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ConvexSet for BoxSet {
    fn project(&self, x: &mut [f64]) {
        for i in 0..x.len() {
            x[i] = x[i].clamp(self.lo[i], self.hi[i]);
        }
    }
}

/// Euclidean projection of `y` onto the probability simplex scaled to total `mass`.
pub fn project_simplex(y: &mut [f64], mass: f64) {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - mass) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    y.iter_mut().for_each(|v| *v = (*v - theta).max(0.0));
}

/// `n×k` row-major matrices whose rows lie in the simplex translated by `offset·1`.
pub struct SimplexRows {
    pub n: usize,
    pub k: usize,
    pub offset: f64,
}

impl ConvexSet for SimplexRows {
    fn project(&self, x: &mut [f64]) {
        for row in x.chunks_mut(self.k).take(self.n) {
            row.iter_mut().for_each(|v| *v -= self.offset);
            project_simplex(row, 1.0);
            row.iter_mut().for_each(|v| *v += self.offset);
        }
    }
}

/// General affine set `{x : Ax = b}` with `A` of full row rank.
pub struct AffineSet {
    rows: Vec<Vec<f64>>,
    b: Vec<f64>,
    gram_inv: Mat<f64>,
}

impl AffineSet {
    pub fn new(rows: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let m = rows.len();
        if b.len() != m {
            return Err(Error::Dimension(
                "affine rows and right-hand side differ".into(),
            ));
        }
        let gram = Mat::from_fn(m, m, |i, j| linalg::dot(&rows[i], &rows[j]));
        let (vals, vecs) = linalg::sym_eigen(&gram)?;
        let top = vals.iter().cloned().fold(0.0f64, f64::max);
        let gram_inv =
            linalg::spectral_map(
                &vals,
                &vecs,
                |l| if l > 1e-12 * top { 1.0 / l } else { 0.0 },
            );
        Ok(AffineSet { rows, b, gram_inv })
    }
}

impl ConvexSet for AffineSet {
    fn project(&self, x: &mut [f64]) {
        let m = self.rows.len();
        let r: Vec<f64> = (0..m)
            .map(|i| linalg::dot(&self.rows[i], x) - self.b[i])
            .collect();
        for i in 0..m {
            let c: f64 = (0..m).map(|j| self.gram_inv[(i, j)] * r[j]).sum();
            x.iter_mut()
                .zip(&self.rows[i])
                .for_each(|(xi, a)| *xi -= c * a);
        }
    }
}

/// Intersection of sets whose projections commute, e.g. constraints acting on
/// disjoint coordinates. Projecting through them in order is the exact
/// projection onto the intersection; the caller is responsible for that property.
pub struct Commuting(pub Vec<Box<dyn ConvexSet>>);

impl ConvexSet for Commuting {
    fn project(&self, x: &mut [f64]) {
        for s in &self.0 {
            s.project(x);
        }
    }
}

#[derive(Clone, Debug)]
pub struct DykstraOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Sweeps between (costly) residual evaluations.
    pub check_every: usize,
}

impl Default for DykstraOptions {
    fn default() -> Self {
        DykstraOptions {
            tol: 1e-7,
            max_iter: 5000,
            check_every: 10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProjectionResult {
    pub point: Vec<f64>,
    pub iterations: usize,
    /// Largest distance from the point to any of the sets, relative to `max(1, ‖point‖)`.
    pub residual: f64,
    pub converged: bool,
}

fn residual(x: &[f64], sets: &[Box<dyn ConvexSet>]) -> f64 {
    let scale = linalg::norm(x).max(1.0);
    sets.iter().map(|s| s.distance(x)).fold(0.0f64, f64::max) / scale
}

/// Dykstra's cyclic projections started at `start`; converges to the Euclidean
/// projection of `start` onto the intersection. Always returns the last iterate.
pub fn dykstra(
    start: &[f64],
    sets: &[Box<dyn ConvexSet>],
    opts: &DykstraOptions,
) -> ProjectionResult {
    let dim = start.len();
    let mut x = start.to_vec();
    let mut incr = vec![vec![0.0; dim]; sets.len()];
    let mut y = vec![0.0; dim];
    let mut prev = x.clone();
    let mut res = f64::INFINITY;
    let check = opts.check_every.max(1);
    for it in 1..=opts.max_iter {
        prev.copy_from_slice(&x);
        for (s, p) in sets.iter().zip(incr.iter_mut()) {
            for i in 0..dim {
                y[i] = x[i] + p[i];
            }
            x.copy_from_slice(&y);
            s.project(&mut x);
            for i in 0..dim {
                p[i] = y[i] - x[i];
            }
        }
        if it % check == 0 || it == opts.max_iter {
            let change = dist(&x, &prev) / linalg::norm(&x).max(1.0);
            if change <= opts.tol {
                res = residual(&x, sets);
                if res <= opts.tol {
                    return ProjectionResult {
                        point: x,
                        iterations: it,
                        residual: res,
                        converged: true,
                    };
                }
            } else if it == opts.max_iter {
                res = residual(&x, sets);
            }
        }
    }
    ProjectionResult {
        point: x,
        iterations: opts.max_iter,
        residual: res,
        converged: false,
    }
}

/// Minimum-norm point of the intersection of `sets`.
///
/// Fails with [`Error::Infeasible`] when the iterates stop moving while still
/// violating a constraint, and with [`Error::NoConvergence`] when the budget
/// runs out.
pub fn min_norm_in_intersection(
    dim: usize,
    sets: &[Box<dyn ConvexSet>],
    tol: f64,
    max_iter: usize,
) -> Result<ProjectionResult> {
    project_onto_intersection(&vec![0.0; dim], sets, tol, max_iter)
}

/// Euclidean projection of `start` onto the intersection of `sets`.
pub fn project_onto_intersection(
    start: &[f64],
    sets: &[Box<dyn ConvexSet>],
    tol: f64,
    max_iter: usize,
) -> Result<ProjectionResult> {
    let opts = DykstraOptions {
        tol,
        max_iter,
        ..Default::default()
    };
    let r = dykstra(start, sets, &opts);
    if r.converged {
        return Ok(r);
    }
    let res = if r.residual.is_finite() {
        r.residual
    } else {
        residual(&r.point, sets)
    };
    // Dykstra iterates on an empty intersection keep a constant violation
    // instead of shrinking it; a large leftover residual signals that case.
    if res > tol.sqrt().max(1e-3) {
        Err(Error::Infeasible {
            residual: res,
            iterations: r.iterations,
        })
    } else {
        Err(Error::NoConvergence {
            residual: res,
            iterations: r.iterations,
        })
    }
}

#[derive(Clone, Debug)]
pub struct UnitDiagOptions {
    pub tol: f64,
    /// Dual iterations after the warm start, one eigendecomposition each.
    pub max_iter: usize,
}

impl Default for UnitDiagOptions {
    fn default() -> Self {
        UnitDiagOptions {
            tol: 1e-4,
            max_iter: 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct UnitDiagResult {
    pub y: Mat<f64>,
    pub iterations: usize,
    /// `max(‖diag Y − 1‖/√n, (b − ⟨Q,Y⟩)₊ / max(1, b))`.
    pub residual: f64,
    pub converged: bool,
}

/// Primal point `Π_PSD(Diag μ + λQ)` summarized by its diagonal and `⟨Q, Y⟩`.
struct DualEval {
    diag: Vec<f64>,
    corr: f64,
    vals: Vec<f64>,
    vecs: Mat<f64>,
}

fn dual_eval(q: &Mat<f64>, mu: &[f64], lambda: f64) -> Result<DualEval> {
    let n = q.nrows();
    let x = Mat::from_fn(n, n, |i, j| {
        lambda * q[(i, j)] + if i == j { mu[i] } else { 0.0 }
    });
    let (vals, vecs) = linalg::sym_eigen(&x)?;
    let mut diag = vec![0.0; n];
    let mut xy = 0.0;
    for (j, &l) in vals.iter().enumerate() {
        if l > 0.0 {
            xy += l * l;
            for (i, d) in diag.iter_mut().enumerate() {
                *d += l * vecs[(i, j)] * vecs[(i, j)];
            }
        }
    }
    // ⟨X, Y⟩ = Σ λ_j (λ_j)₊ splits into the diagonal part and λ⟨Q, Y⟩.
    let corr = if lambda > 0.0 {
        (xy - mu.iter().zip(&diag).map(|(m, d)| m * d).sum::<f64>()) / lambda
    } else {
        let y = linalg::spectral_map(&vals, &vecs, |l| l.max(0.0));
        linalg::inner(q, &y)
    };
    Ok(DualEval {
        diag,
        corr,
        vals,
        vecs,
    })
}

/// Best `(μ̄, λ)` with `μ = μ̄·1`: only the spectrum of `Q` is needed.
fn constant_diagonal_start(qvals: &[f64], n: usize, b: f64) -> (f64, f64) {
    let trace = |mu: f64, lam: f64| qvals.iter().map(|&q| (mu + lam * q).max(0.0)).sum::<f64>();
    // μ̄ with tr Π_PSD(μ̄I + λQ) = n, by bisection (the trace is increasing in μ̄).
    let mu_for = |lam: f64| {
        let (mut lo, mut hi) = (
            -lam * qvals.iter().cloned().fold(0.0f64, f64::max) - 1.0,
            1.0 + lam * qvals.iter().map(|q| q.abs()).fold(0.0f64, f64::max),
        );
        while trace(hi, lam) < n as f64 {
            hi *= 2.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if trace(mid, lam) < n as f64 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let corr = |lam: f64| {
        let mu = mu_for(lam);
        qvals
            .iter()
            .map(|&q| q * (mu + lam * q).max(0.0))
            .sum::<f64>()
    };
    if corr(0.0) >= b {
        return (mu_for(0.0), 0.0);
    }
    let mut hi = 1.0;
    while corr(hi) < b && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if corr(mid) < b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (mu_for(hi), hi)
}

/// Minimum-Frobenius-norm `Y ⪰ 0` with unit diagonal and `⟨Q, Y⟩ ≥ b`.
///
/// Solved through its dual `max Σμ_i + λb − ½‖Π_PSD(Diag μ + λQ)‖²` over
/// `λ ≥ 0` by accelerated gradient ascent, each step one eigendecomposition.
/// The start is the best dual point with constant `μ`, found from the spectrum
/// of `Q` alone. The returned `Y` is the primal point of the last iterate.
/// Fails with [`Error::Infeasible`] if `b > n·λ_max(Q)`, which no unit-diagonal
/// PSD matrix can reach.
pub fn min_norm_unit_diag_psd(
    q: &Mat<f64>,
    b: f64,
    opts: &UnitDiagOptions,
) -> Result<UnitDiagResult> {
    let n = q.nrows();
    if q.ncols() != n || n == 0 {
        return Err(Error::Dimension("Q must be square and nonempty".into()));
    }
    let mut qs = q.clone();
    linalg::symmetrize(&mut qs);
    let (qvals, _) = linalg::sym_eigen(&qs)?;
    let qmax = qvals[n - 1];
    if b > n as f64 * qmax * (1.0 + 1e-12) {
        return Err(Error::Infeasible {
            residual: b - n as f64 * qmax,
            iterations: 0,
        });
    }
    let (mu0, lam0) = constant_diagonal_start(&qvals, n, b);
    let qn2 = linalg::frob(&qs).powi(2);
    let zero_diag = (0..n).all(|i| qs[(i, i)] == 0.0);
    // Lipschitz constant of the dual gradient.
    let lip = if zero_diag { qn2.max(1.0) } else { 1.0 + qn2 };
    let step = 1.0 / lip;

    let residual_of = |e: &DualEval| {
        let dres = (e.diag.iter().map(|d| (d - 1.0).powi(2)).sum::<f64>() / n as f64).sqrt();
        dres.max((b - e.corr).max(0.0) / b.abs().max(1.0))
    };
    let mut mu = vec![mu0; n];
    let mut lam = lam0;
    let (mut mu_prev, mut lam_prev) = (mu.clone(), lam);
    let mut t = 1.0f64;
    let mut ymu = mu.clone();
    let mut ylam = lam;
    let mut eval = dual_eval(&qs, &ymu, ylam)?;
    let mut iterations = 0;
    let mut res = residual_of(&eval);
    while res > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        for i in 0..n {
            mu[i] = ymu[i] + step * (1.0 - eval.diag[i]);
        }
        lam = (ylam + step * (b - eval.corr)).max(0.0);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for i in 0..n {
            ymu[i] = mu[i] + beta * (mu[i] - mu_prev[i]);
        }
        ylam = (lam + beta * (lam - lam_prev)).max(0.0);
        mu_prev.copy_from_slice(&mu);
        lam_prev = lam;
        t = t_next;
        eval = dual_eval(&qs, &ymu, ylam)?;
        res = residual_of(&eval);
    }
    let y = linalg::spectral_map(&eval.vals, &eval.vecs, |l| l.max(0.0));
    Ok(UnitDiagResult {
        y,
        iterations,
        residual: res,
        converged: res <= opts.tol,
    })
}
