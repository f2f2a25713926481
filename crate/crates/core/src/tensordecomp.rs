//! Orthogonal 4-tensor decomposition from weak correlation, through
//! Frobenius-minimal degree-4 pseudoexpectations, and lifting of 3-tensors to
//! 4-tensors.
//!
//! A degree-4 pseudoexpectation in `r` variables is stored as its values on
//! monomials of degree at most 4. Its moment matrix is indexed by the basis
//! `1, x_i, x_i², √2·x_i x_j (i < j)`; with this scaling the quadratic block is
//! the restriction of `pE xxᵀ ⊗ xxᵀ` to symmetric matrices, so its Frobenius
//! and operator norms are those of the `r²×r²` matrix. Programs are solved
//! with Dykstra's method on the space of symmetric moment matrices.

use std::sync::Arc;

use faer::Mat;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::projection::{
    self, ConvexSet, DykstraOptions, FrobeniusBall, Halfspace, OpNormBlock, PsdCone,
};
use crate::rng::Rng;
use crate::rounding;
use crate::tensor::{Tensor3, Tensor4};

/// Largest dimension accepted by the degree-4 solvers.
pub const MAX_DIM: usize = 24;

fn check_dim(n: usize) -> Result<()> {
    if n > MAX_DIM {
        return Err(Error::Guard(format!(
            "degree-4 programs need n ≤ {MAX_DIM}, got {n}"
        )));
    }
    if n == 0 {
        return invalid("dimension must be positive");
    }
    Ok(())
}

/// Monomials of degree ≤ 4 in `r` variables and the layout of the moment matrix.
#[derive(Debug)]
struct MomentBasis {
    r: usize,
    monomials: Vec<Vec<u8>>,
    lookup: Vec<u32>,
    /// Moment-matrix basis: monomial of degree ≤ 2 and its scale.
    rows: Vec<(Vec<u8>, f64)>,
    /// Per entry of the column-major `D×D` matrix: monomial id and scale.
    entry_mon: Vec<u32>,
    entry_scale: Vec<f64>,
    /// `Σ scale²` over the entries of each monomial.
    weight: Vec<f64>,
}

impl MomentBasis {
    fn new(r: usize) -> Self {
        let base = r + 1;
        let mut monomials = Vec::new();
        let mut cur = Vec::new();
        fn gen(r: usize, start: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            out.push(cur.clone());
            if cur.len() == 4 {
                return;
            }
            for i in start..r {
                cur.push(i as u8);
                gen(r, i, cur, out);
                cur.pop();
            }
        }
        gen(r, 0, &mut cur, &mut monomials);
        let mut lookup = vec![u32::MAX; base.pow(4)];
        for (id, m) in monomials.iter().enumerate() {
            lookup[Self::key_of(base, m)] = id as u32;
        }
        let mut rows: Vec<(Vec<u8>, f64)> = vec![(vec![], 1.0)];
        rows.extend((0..r).map(|i| (vec![i as u8], 1.0)));
        for i in 0..r {
            for j in i..r {
                rows.push((
                    vec![i as u8, j as u8],
                    if i == j {
                        1.0
                    } else {
                        std::f64::consts::SQRT_2
                    },
                ));
            }
        }
        let d = rows.len();
        let mut b = MomentBasis {
            r,
            monomials,
            lookup,
            rows,
            entry_mon: Vec::with_capacity(d * d),
            entry_scale: Vec::with_capacity(d * d),
            weight: Vec::new(),
        };
        b.weight = vec![0.0; b.monomials.len()];
        for c in 0..d {
            for row in 0..d {
                let mut m = b.rows[row].0.clone();
                m.extend_from_slice(&b.rows[c].0);
                let id = b.id(&m);
                let s = b.rows[row].1 * b.rows[c].1;
                b.entry_mon.push(id as u32);
                b.entry_scale.push(s);
                b.weight[id] += s * s;
            }
        }
        b
    }

    fn key_of(base: usize, sorted: &[u8]) -> usize {
        sorted.iter().fold(0, |k, &i| k * base + i as usize + 1)
    }

    fn id(&self, idx: &[u8]) -> usize {
        let mut s = idx.to_vec();
        s.sort_unstable();
        self.lookup[Self::key_of(self.r + 1, &s)] as usize
    }

    fn id_of(&self, idx: &[usize]) -> usize {
        let v: Vec<u8> = idx.iter().map(|&i| i as u8).collect();
        self.id(&v)
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn quad_offset(&self) -> usize {
        1 + self.r
    }

    fn quad_size(&self) -> usize {
        self.r * (self.r + 1) / 2
    }

    /// Least-squares monomial values of a moment-matrix point.
    fn average(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.monomials.len()];
        for (e, &v) in x.iter().enumerate() {
            y[self.entry_mon[e] as usize] += self.entry_scale[e] * v;
        }
        y.iter_mut().zip(&self.weight).for_each(|(v, w)| *v /= w);
        y
    }

    fn expand(&self, y: &[f64], x: &mut [f64]) {
        for (e, v) in x.iter_mut().enumerate() {
            *v = self.entry_scale[e] * y[self.entry_mon[e] as usize];
        }
    }

    fn moment_matrix(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim() * self.dim()];
        self.expand(y, &mut x);
        x
    }

    /// Linear equalities `y_∅ = 1` and `pE[(‖x‖² − 1)·q] = 0` for every basis monomial `q`.
    fn sphere_constraints(&self) -> Vec<(Vec<(usize, f64)>, f64)> {
        let mut rows = vec![(vec![(self.id(&[]), 1.0)], 1.0)];
        for (q, _) in &self.rows {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(self.r + 1);
            for i in 0..self.r {
                let mut m = q.clone();
                m.extend_from_slice(&[i as u8, i as u8]);
                row.push((self.id(&m), 1.0));
            }
            row.push((self.id(q), -1.0));
            rows.push((row, 0.0));
        }
        rows
    }
}

/// Moment matrices of pseudoexpectations satisfying a list of linear
/// equalities on the monomial values. Projection is exact in the Frobenius
/// metric of the moment matrix.
struct MomentAffine {
    basis: Arc<MomentBasis>,
    /// Constraint rows in the coordinates `z_μ = √w_μ · y_μ`.
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    gram_pinv: Mat<f64>,
}

impl MomentAffine {
    fn new(basis: Arc<MomentBasis>, constraints: Vec<(Vec<(usize, f64)>, f64)>) -> Result<Self> {
        let rows: Vec<Vec<(usize, f64)>> = constraints
            .iter()
            .map(|(r, _)| {
                r.iter()
                    .map(|&(id, c)| (id, c / basis.weight[id].sqrt()))
                    .collect()
            })
            .collect();
        let rhs: Vec<f64> = constraints.iter().map(|(_, b)| *b).collect();
        let k = rows.len();
        let nm = basis.monomials.len();
        let mut dense = vec![0.0; nm];
        let mut gram = Mat::<f64>::zeros(k, k);
        for a in 0..k {
            for &(id, c) in &rows[a] {
                dense[id] += c;
            }
            for b in a..k {
                let v: f64 = rows[b].iter().map(|&(id, c)| c * dense[id]).sum();
                gram[(a, b)] = v;
                gram[(b, a)] = v;
            }
            for &(id, _) in &rows[a] {
                dense[id] = 0.0;
            }
        }
        let (vals, vecs) = linalg::sym_eigen(&gram)?;
        let top = vals.iter().cloned().fold(0.0f64, f64::max);
        let gram_pinv =
            linalg::spectral_map(
                &vals,
                &vecs,
                |l| if l > 1e-10 * top { 1.0 / l } else { 0.0 },
            );
        Ok(MomentAffine {
            basis,
            rows,
            rhs,
            gram_pinv,
        })
    }

    fn project_monomials(&self, y: &mut [f64]) {
        let b = &self.basis;
        let mut z: Vec<f64> = y.iter().zip(&b.weight).map(|(v, w)| v * w.sqrt()).collect();
        let k = self.rows.len();
        let res: Vec<f64> = (0..k)
            .map(|a| self.rows[a].iter().map(|&(id, c)| c * z[id]).sum::<f64>() - self.rhs[a])
            .collect();
        for a in 0..k {
            let lam: f64 = (0..k).map(|c| self.gram_pinv[(a, c)] * res[c]).sum();
            if lam != 0.0 {
                for &(id, c) in &self.rows[a] {
                    z[id] -= lam * c;
                }
            }
        }
        for (v, (zi, w)) in y.iter_mut().zip(z.iter().zip(&b.weight)) {
            *v = zi / w.sqrt();
        }
    }
}

impl ConvexSet for MomentAffine {
    fn project(&self, x: &mut [f64]) {
        let mut y = self.basis.average(x);
        self.project_monomials(&mut y);
        self.basis.expand(&y, x);
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-6,
            max_iter: 4000,
        }
    }
}

/// Degree-4 pseudoexpectation on the span of an orthonormal basis of `ℝⁿ`
/// (all of `ℝⁿ` unless constrained orthogonal to some vectors).
#[derive(Clone, Debug)]
pub struct PseudoExpectation4 {
    n: usize,
    basis: Arc<MomentBasis>,
    /// Working coordinates: `x = Σ_p z_p u_p`; `None` means the standard basis.
    frame: Option<Vec<Vec<f64>>>,
    moments: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl PseudoExpectation4 {
    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Dimension of the working space.
    pub fn working_dim(&self) -> usize {
        self.basis.r
    }

    /// `pE` of a monomial in working coordinates.
    pub fn moment(&self, idx: &[usize]) -> f64 {
        self.moments[self.basis.id_of(idx)]
    }

    /// Moment matrix in the scaled working basis.
    pub fn moment_matrix(&self) -> Mat<f64> {
        let d = self.basis.dim();
        projection::vec_to_mat(&self.basis.moment_matrix(&self.moments), d)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::sym_eigen(&self.moment_matrix())?.0[0])
    }

    /// Rows map working coordinates to ambient: `amb[a] = Σ_p u_p[a]·work[p]`.
    fn to_ambient_rows(&self) -> Option<Vec<Vec<f64>>> {
        self.frame.as_ref().map(|f| {
            (0..self.n)
                .map(|a| f.iter().map(|u| u[a]).collect())
                .collect()
        })
    }

    fn work_tensor4(&self) -> Tensor4 {
        let r = self.basis.r;
        let mut t = Tensor4::zeros(r);
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    for l in 0..r {
                        let id = t.idx(i, j, k, l);
                        t.data[id] = self.moment(&[i, j, k, l]);
                    }
                }
            }
        }
        t
    }

    /// `pE xxᵀ`.
    pub fn second_moment(&self) -> Mat<f64> {
        let r = self.basis.r;
        let w = Mat::from_fn(r, r, |i, j| self.moment(&[i, j]));
        self.matrix_to_ambient(&w)
    }

    /// `pE x^{⊗3}`.
    pub fn third_moment(&self) -> Tensor3 {
        let r = self.basis.r;
        let mut t = Tensor3::zeros(r);
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    t.set(i, j, k, self.moment(&[i, j, k]));
                }
            }
        }
        match self.to_ambient_rows() {
            Some(rows) => t
                .project(&rows)
                .expect("frame rows match working dimension"),
            None => t,
        }
    }

    /// `pE x^{⊗4}`.
    pub fn fourth_moment(&self) -> Tensor4 {
        let t = self.work_tensor4();
        match self.to_ambient_rows() {
            Some(rows) => t
                .project(&rows)
                .expect("frame rows match working dimension"),
            None => t,
        }
    }

    /// `pE xxᵀ ⊗ xxᵀ` as an `n²×n²` matrix.
    pub fn quad_matrix(&self) -> Mat<f64> {
        let t = self.fourth_moment();
        let n = self.n;
        Mat::from_fn(n * n, n * n, |a, b| t.data[a * n * n + b])
    }

    fn matrix_to_ambient(&self, w: &Mat<f64>) -> Mat<f64> {
        match &self.frame {
            None => w.clone(),
            Some(f) => {
                let r = f.len();
                let u = Mat::from_fn(self.n, r, |a, p| f[p][a]);
                let mut m = &u * w * u.transpose();
                linalg::symmetrize(&mut m);
                m
            }
        }
    }

    /// `pE ⟨g,x⟩² xxᵀ`.
    pub fn contract(&self, g: &[f64]) -> Mat<f64> {
        let r = self.basis.r;
        let gw: Vec<f64> = match &self.frame {
            None => g.to_vec(),
            Some(f) => f.iter().map(|u| linalg::dot(u, g)).collect(),
        };
        let mut w = Mat::<f64>::zeros(r, r);
        for k in 0..r {
            for l in k..r {
                let mut s = 0.0;
                for i in 0..r {
                    for j in 0..r {
                        s += gw[i] * gw[j] * self.moment(&[i, j, k, l]);
                    }
                }
                w[(k, l)] = s;
                w[(l, k)] = s;
            }
        }
        self.matrix_to_ambient(&w)
    }
}

/// Orthonormal basis of the orthogonal complement of orthonormal `vs`.
fn complement(n: usize, vs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    for (a, u) in vs.iter().enumerate() {
        if u.len() != n {
            return Err(Error::Dimension("deflation vector length".into()));
        }
        for (b, w) in vs.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            if (linalg::dot(u, w) - target).abs() > 1e-6 {
                return invalid("deflation vectors must be orthonormal");
            }
        }
    }
    let mut all: Vec<Vec<f64>> = vs.to_vec();
    let mut out = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        if linalg::orthogonalize(&mut e, &all) > 1e-6 {
            linalg::normalize(&mut e);
            all.push(e.clone());
            out.push(e);
        }
    }
    Ok(out)
}

fn run_program(
    basis: &Arc<MomentBasis>,
    start: &[f64],
    mut sets: Vec<Box<dyn ConvexSet>>,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, usize, f64)> {
    let affine = MomentAffine::new(basis.clone(), basis.sphere_constraints())?;
    sets.push(Box::new(PsdCone { n: basis.dim() }));
    // Consistency comes last so the returned point is an exact pseudomoment vector.
    sets.push(Box::new(affine));
    let dopts = DykstraOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        check_every: 10,
    };
    let r = projection::dykstra(start, &sets, &dopts);
    if !r.converged && r.residual > opts.tol.sqrt().max(1e-3) {
        return Err(Error::Infeasible {
            residual: r.residual,
            iterations: r.iterations,
        });
    }
    Ok((basis.average(&r.point), r.iterations, r.residual))
}

/// Halfspace `⟨pE x^{⊗4}, B⟩ ≥ level` on the quadratic block of moment matrices.
fn fourth_moment_halfspace(basis: &MomentBasis, b: &Tensor4, level: f64) -> Halfspace {
    let d = basis.dim();
    let (o, q) = (basis.quad_offset(), basis.quad_size());
    let mut a = vec![0.0; d * d];
    for c in o..o + q {
        for row in o..o + q {
            let e = c * d + row;
            let mut idx: Vec<usize> = basis.rows[row].0.iter().map(|&i| i as usize).collect();
            idx.extend(basis.rows[c].0.iter().map(|&i| i as usize));
            a[e] = basis.entry_scale[e] * b.get(idx[0], idx[1], idx[2], idx[3]);
        }
    }
    Halfspace::new(a, level)
}

/// Entries of the moment matrix holding third moments, with the weight that
/// turns a symmetric 3-tensor `T` into `⟨pE x^{⊗3}, T⟩`.
fn third_moment_entries(basis: &MomentBasis, t: &Tensor3) -> Vec<(usize, f64)> {
    let d = basis.dim();
    let (o, q) = (basis.quad_offset(), basis.quad_size());
    let mut out = Vec::new();
    for i in 0..basis.r {
        let xi = 1 + i;
        for c in o..o + q {
            let jk = &basis.rows[c].0;
            let v = basis.rows[c].1 * t.get(i, jk[0] as usize, jk[1] as usize) / 2.0;
            out.push((c * d + xi, v));
            out.push((xi * d + c, v));
        }
    }
    out
}

fn quad_block_coords(basis: &MomentBasis) -> Vec<usize> {
    let d = basis.dim();
    let (o, q) = (basis.quad_offset(), basis.quad_size());
    (o..o + q)
        .flat_map(|c| (o..o + q).map(move |row| c * d + row))
        .collect()
}

/// Degree-4 pseudoexpectation on the unit sphere, orthogonal to `deflation`,
/// of (approximately) minimal moment-matrix norm subject to
/// `⟨pE x^{⊗4}, B⟩ ≥ (δ/2)·‖B‖/√m'` and `‖pE xxᵀ‖, ‖pE xxᵀ⊗xxᵀ‖ ≤ 1/m'`.
///
/// Here `B` is restricted to the complement of the deflation vectors and
/// `m' = m − |deflation|`, clamped to `[1, n − |deflation|]`, is the number of
/// components left there.
pub fn solve_pseudoexpectation(
    b: &Tensor4,
    m: usize,
    delta: f64,
    deflation: &[Vec<f64>],
    opts: &SolveOptions,
) -> Result<PseudoExpectation4> {
    let n = b.n;
    check_dim(n)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return invalid(format!("delta must lie in (0, 1], got {delta}"));
    }
    if m == 0 {
        return invalid("m must be at least 1");
    }
    let (frame, bw) = if deflation.is_empty() {
        (None, b.symmetrized())
    } else {
        let comp = complement(n, deflation)?;
        if comp.is_empty() {
            return invalid("deflation vectors span the whole space");
        }
        let bw = b.project(&comp)?.symmetrized();
        (Some(comp), bw)
    };
    let r = bw.n;
    let m_eff = m.saturating_sub(deflation.len()).clamp(1, r);
    let bnorm = bw.norm();
    if bnorm == 0.0 {
        return Err(Error::Infeasible {
            residual: f64::INFINITY,
            iterations: 0,
        });
    }
    let basis = Arc::new(MomentBasis::new(r));
    let d = basis.dim();
    let radius = 1.0 / m_eff as f64;
    let sets: Vec<Box<dyn ConvexSet>> = vec![
        Box::new(fourth_moment_halfspace(
            &basis,
            &bw,
            0.5 * delta * bnorm / (m_eff as f64).sqrt(),
        )),
        Box::new(OpNormBlock {
            n: d,
            offset: 1,
            size: r,
            radius,
        }),
        Box::new(OpNormBlock {
            n: d,
            offset: basis.quad_offset(),
            size: basis.quad_size(),
            radius,
        }),
    ];
    let (moments, iterations, residual) = run_program(&basis, &vec![0.0; d * d], sets, opts)?;
    Ok(PseudoExpectation4 {
        n,
        basis,
        frame,
        moments,
        iterations,
        residual,
    })
}

/// `pE ⟨g,x⟩² xxᵀ` for a fresh standard Gaussian `g`.
pub fn gaussian_contract(pe: &PseudoExpectation4, rng: &mut Rng) -> Mat<f64> {
    pe.contract(&linalg::gaussian_vec(pe.dim(), rng))
}

#[derive(Clone, Debug)]
pub struct DecompositionConfig {
    /// Correlation between the input and the planted tensor.
    pub delta: f64,
    /// Number of components.
    pub m: usize,
    /// Rounds; `None` means `m`.
    pub rounds: Option<usize>,
    /// Contractions drawn per round.
    pub contractions: usize,
    /// Dimension of the leading eigenspace sampled from each contraction.
    pub top_dim: usize,
    pub solve: SolveOptions,
}

impl DecompositionConfig {
    pub fn new(delta: f64, m: usize) -> Self {
        DecompositionConfig {
            delta,
            m,
            rounds: None,
            contractions: 50,
            top_dim: 1,
            solve: SolveOptions::default(),
        }
    }
}

/// Candidate filter: `true` accepts a unit vector.
pub type Oracle<'a> = &'a dyn Fn(&[f64]) -> bool;

/// Orthonormal `b_1..b_m` aimed at the components of `B`.
///
/// Each round solves [`solve_pseudoexpectation`] against the vectors kept so
/// far, draws Gaussian contractions and samples a unit vector from the leading
/// eigenspace of each. With an oracle, the first accepted candidate is kept;
/// without one, the candidate maximizing `B(v,v,v,v)`. Rounds with no
/// accepted candidate keep nothing; the output is padded with random
/// orthonormal vectors.
pub fn decompose(
    b: &Tensor4,
    config: &DecompositionConfig,
    oracle: Option<Oracle>,
    rng: &mut Rng,
) -> Result<Vec<Vec<f64>>> {
    let n = b.n;
    check_dim(n)?;
    let m = config.m;
    if m == 0 || m > n {
        return invalid(format!("need 1 ≤ m ≤ n, got m = {m}, n = {n}"));
    }
    if config.contractions == 0 || config.top_dim == 0 {
        return invalid("contractions and top_dim must be positive");
    }
    let rounds = config.rounds.unwrap_or(m);
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for _ in 0..rounds {
        if kept.len() >= m {
            break;
        }
        let pe = match solve_pseudoexpectation(b, m, config.delta, &kept, &config.solve) {
            Ok(pe) => pe,
            Err(Error::Infeasible { .. }) => break,
            Err(e) => return Err(e),
        };
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..config.contractions {
            let mm = gaussian_contract(&pe, rng);
            let mut v = rounding::spectral_round(&mm, config.top_dim.min(n - kept.len()), rng)?;
            if linalg::orthogonalize(&mut v, &kept) < 1e-8 {
                continue;
            }
            linalg::normalize(&mut v);
            match oracle {
                Some(o) => {
                    if o(&v) {
                        best = Some((0.0, v));
                        break;
                    }
                }
                None => {
                    let score = b.eval(&v);
                    if best.as_ref().is_none_or(|(s, _)| score > *s) {
                        best = Some((score, v));
                    }
                }
            }
        }
        if let Some((_, v)) = best {
            kept.push(v);
        }
    }
    linalg::pad_orthonormal(&mut kept, n, m, rng);
    Ok(kept)
}

#[derive(Clone, Debug)]
pub struct LiftOptions {
    /// At or above this correlation the input is projected directly instead of
    /// being used as a correlation constraint.
    pub large_delta: f64,
    pub solve: SolveOptions,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            large_delta: 0.95,
            solve: SolveOptions::default(),
        }
    }
}

/// Lifts a 3-tensor correlated with `Σ a_i^{⊗3}` (orthonormal `a_i`) to a
/// 4-tensor correlated with `Σ a_i^{⊗4}`: `m·pE x^{⊗4}` for a degree-4
/// pseudoexpectation on the sphere of minimal norm with
/// `⟨pE x^{⊗3}, B⟩ ≥ δ‖B‖/√m` and `‖pE x^{⊗4}‖ ≤ 1/√m`.
///
/// For `δ ≥ opts.large_delta` the correlation constraint is dropped and the
/// point with third moments `B/(‖B‖√m)` is projected onto the constraint set.
pub fn lift_3_to_4(b3: &Tensor3, m: usize, delta: f64, opts: &LiftOptions) -> Result<Tensor4> {
    let n = b3.n;
    check_dim(n)?;
    if m == 0 {
        return invalid("m must be at least 1");
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return invalid(format!("delta must lie in (0, 1], got {delta}"));
    }
    let bs = b3.symmetrized();
    let bnorm = bs.norm();
    if bnorm == 0.0 {
        return Err(Error::Infeasible {
            residual: f64::INFINITY,
            iterations: 0,
        });
    }
    let basis = Arc::new(MomentBasis::new(n));
    let d = basis.dim();
    let sqrt_m = (m as f64).sqrt();
    let mut sets: Vec<Box<dyn ConvexSet>> = vec![Box::new(FrobeniusBall {
        radius: 1.0 / sqrt_m,
        coords: Some(quad_block_coords(&basis)),
    })];
    let mut start = vec![0.0; d * d];
    if delta >= opts.large_delta {
        let mut target = bs.clone();
        target.scale(1.0 / (bnorm * sqrt_m));
        for (e, _) in third_moment_entries(&basis, &target) {
            let mon = &basis.monomials[basis.entry_mon[e] as usize];
            start[e] = basis.entry_scale[e]
                * target.get(mon[0] as usize, mon[1] as usize, mon[2] as usize);
        }
    } else {
        let mut a = vec![0.0; d * d];
        for (e, v) in third_moment_entries(&basis, &bs) {
            a[e] = v;
        }
        sets.insert(0, Box::new(Halfspace::new(a, delta * bnorm / sqrt_m)));
    }
    let (moments, iterations, residual) = run_program(&basis, &start, sets, &opts.solve)?;
    let pe = PseudoExpectation4 {
        n,
        basis,
        frame: None,
        moments,
        iterations,
        residual,
    };
    let mut t = pe.fourth_moment();
    t.scale(m as f64);
    Ok(t)
}
