//! Small dense linear-algebra helpers on top of `faer`.

use faer::{Mat, Side};
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Eigenvalues in nondecreasing order and the matching eigenvectors as columns.
pub fn sym_eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigen)?;
    let vals: Vec<f64> = (0..m.nrows()).map(|i| e.S()[i]).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen);
    }
    Ok((vals, e.U().to_owned()))
}

/// Rebuilds `U diag(f(λ)) Uᵀ`.
pub fn spectral_map(vals: &[f64], vecs: &Mat<f64>, f: impl Fn(f64) -> f64) -> Mat<f64> {
    let n = vecs.nrows();
    let mut keep = Vec::with_capacity(vals.len());
    for (j, &v) in vals.iter().enumerate() {
        let s = f(v);
        if s != 0.0 {
            keep.push((j, s));
        }
    }
    let r = keep.len();
    let mut left = Mat::<f64>::zeros(n, r);
    let mut right = Mat::<f64>::zeros(n, r);
    for (c, &(j, s)) in keep.iter().enumerate() {
        for i in 0..n {
            left[(i, c)] = vecs[(i, j)] * s;
            right[(i, c)] = vecs[(i, j)];
        }
    }
    let mut out = &left * right.transpose();
    symmetrize(&mut out);
    out
}

pub fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

pub fn inner(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * b[(i, j)];
        }
    }
    s
}

pub fn frob(a: &Mat<f64>) -> f64 {
    inner(a, a).sqrt()
}

pub fn op_norm_sym(a: &Mat<f64>) -> Result<f64> {
    let (vals, _) = sym_eigen(a)?;
    Ok(vals.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: &mut [f64]) -> f64 {
    let s = norm(a);
    if s > 0.0 {
        a.iter_mut().for_each(|x| *x /= s);
    }
    s
}

pub fn gaussian_vec(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

pub fn random_unit(n: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let mut g = gaussian_vec(n, rng);
        if normalize(&mut g) > 1e-12 {
            return g;
        }
    }
}

pub fn column(m: &Mat<f64>, j: usize) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

pub fn outer(a: &[f64], b: &[f64]) -> Mat<f64> {
    Mat::from_fn(a.len(), b.len(), |i, j| a[i] * b[j])
}

/// Removes from `x` its components along the orthonormal `basis`, returning
/// the remaining norm.
pub fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(x, b);
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi -= c * bi);
        }
    }
    norm(x)
}

/// Extends `basis` with random directions until it holds `m` orthonormal vectors.
pub fn pad_orthonormal(basis: &mut Vec<Vec<f64>>, n: usize, m: usize, rng: &mut Rng) {
    while basis.len() < m.min(n) {
        let mut g = gaussian_vec(n, rng);
        let r = orthogonalize(&mut g, basis);
        if r > 1e-6 {
            normalize(&mut g);
            basis.push(g);
        }
    }
}
