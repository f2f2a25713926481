//! Turning correlated matrices and vectors into labelings.

use faer::Mat;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::model::{LabelMatrix, SbmParams};
use crate::projection::{self, ConvexSet, DykstraOptions, Halfspace, SimplexRows};
use crate::rng::Rng;

/// Most negative eigenvalue tolerated in a covariance matrix.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Gaussian sampler for a fixed covariance `Y`, through its spectral square root.
pub struct GaussianSampler {
    factor: Mat<f64>,
}

impl GaussianSampler {
    pub fn new(y: &Mat<f64>) -> Result<Self> {
        let n = y.nrows();
        if y.ncols() != n {
            return Err(Error::Dimension("covariance must be square".into()));
        }
        let (vals, vecs) = linalg::sym_eigen(y)?;
        if let Some(&low) = vals.first() {
            if low < -PSD_TOLERANCE {
                return invalid(format!("covariance has eigenvalue {low:.3e}"));
            }
        }
        let keep: Vec<usize> = (0..n).filter(|&j| vals[j] > 0.0).collect();
        let factor = Mat::from_fn(n, keep.len(), |i, c| {
            vecs[(i, keep[c])] * vals[keep[c]].sqrt()
        });
        Ok(GaussianSampler { factor })
    }

    /// Builds the sampler from a factor `F` with `Y = F Fᵀ`.
    pub fn from_factor(factor: Mat<f64>) -> Self {
        GaussianSampler { factor }
    }

    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        let (n, r) = (self.factor.nrows(), self.factor.ncols());
        let z: Vec<f64> = (0..r)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        (0..n)
            .map(|i| (0..r).map(|c| self.factor[(i, c)] * z[c]).sum())
            .collect()
    }

    /// Signs of one Gaussian draw; `sign(0) = +1`.
    pub fn round(&self, rng: &mut Rng) -> Vec<f64> {
        self.sample(rng)
            .into_iter()
            .map(|g| if g < 0.0 { -1.0 } else { 1.0 })
            .collect()
    }
}

/// Signs of a centered Gaussian vector with covariance `Y` (PSD, unit diagonal).
pub fn hyperplane_round(y: &Mat<f64>, rng: &mut Rng) -> Result<Vec<f64>> {
    for i in 0..y.nrows().min(y.ncols()) {
        if (y[(i, i)] - 1.0).abs() > 1e-6 {
            return invalid(format!("diagonal entry {i} is {}, expected 1", y[(i, i)]));
        }
    }
    Ok(GaussianSampler::new(y)?.round(rng))
}

/// Uniformly random unit vector in the span of the `top_r` leading eigenvectors of `p`.
pub fn spectral_round(p: &Mat<f64>, top_r: usize, rng: &mut Rng) -> Result<Vec<f64>> {
    if top_r == 0 {
        return invalid("top_r must be at least 1");
    }
    let n = p.nrows();
    let (_, vecs) = linalg::sym_eigen(p)?;
    let r = top_r.min(n);
    let coef = linalg::gaussian_vec(r, rng);
    let mut x = vec![0.0; n];
    for (c, g) in coef.iter().enumerate() {
        let j = n - 1 - c;
        x.iter_mut()
            .enumerate()
            .for_each(|(i, xi)| *xi += g * vecs[(i, j)]);
    }
    if linalg::normalize(&mut x) == 0.0 {
        return Err(Error::Eigen);
    }
    Ok(x)
}

/// `−x` when `s3 < 0`, otherwise `x`.
pub fn fix_sign(x: &[f64], s3: f64) -> Vec<f64> {
    if s3 < 0.0 {
        x.iter().map(|v| -v).collect()
    } else {
        x.to_vec()
    }
}

/// How the matrix of column estimates is mapped onto shifted label rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CleanupMode {
    /// Euclidean projection of the rescaled estimates.
    Nearest,
    /// Minimum-norm point keeping correlation `delta·‖X‖·‖W‖` with the estimates `X`,
    /// where `‖W‖` is the expected norm of the shifted community matrix.
    MinNorm { delta: f64 },
}

#[derive(Clone, Debug)]
pub struct Cleanup {
    pub labels: LabelMatrix,
    /// `⟨X, Y⟩` for the rescaled estimates `X` and the projected matrix `Y`.
    pub achieved: f64,
    /// True when the projection failed and uniform labels were returned.
    pub fallback: bool,
}

/// Converts up to `k` column estimates of the shifted community vectors into
/// probability vectors.
///
/// The estimates form an `n×k` matrix (missing columns are zero), each column
/// rescaled to the expected norm of `w_s`. It is projected onto matrices whose
/// rows are probability vectors shifted by `c − 1/k`, `c = 1/(k√(α+1))`; the
/// labels are the rows shifted back.
pub fn cleanup_to_simplex(
    xs: &[Vec<f64>],
    params: &SbmParams,
    mode: CleanupMode,
) -> Result<Cleanup> {
    let k = params.k;
    let Some(n) = xs.first().map(|x| x.len()) else {
        return invalid("no vectors to clean up");
    };
    if xs.len() > k || xs.iter().any(|x| x.len() != n) {
        return Err(Error::Dimension(format!(
            "expected at most {k} vectors of length {n}"
        )));
    }
    let w2 = params.expected_w_norm2(n);
    let mut flat = vec![0.0; n * k];
    for (t, x) in xs.iter().enumerate() {
        let s = linalg::norm(x);
        if s == 0.0 {
            continue;
        }
        let scale = w2.sqrt() / s;
        for i in 0..n {
            flat[i * k + t] = x[i] * scale;
        }
    }
    let offset = params.shift() - 1.0 / k as f64;
    let rows = SimplexRows { n, k, offset };
    let fallback = || Cleanup {
        labels: LabelMatrix::uniform(n, k),
        achieved: 0.0,
        fallback: true,
    };
    let y = match mode {
        CleanupMode::Nearest => {
            let mut y = flat.clone();
            rows.project(&mut y);
            y
        }
        CleanupMode::MinNorm { delta } => {
            let b = delta * linalg::norm(&flat) * (k as f64 * w2).sqrt();
            if b > max_inner(&flat, k, offset) {
                return Ok(fallback());
            }
            let sets: Vec<Box<dyn ConvexSet>> =
                vec![Box::new(rows), Box::new(Halfspace::new(flat.clone(), b))];
            let opts = DykstraOptions {
                tol: 1e-8,
                max_iter: 20_000,
                check_every: 10,
            };
            let r = projection::dykstra(&vec![0.0; n * k], &sets, &opts);
            if !r.converged && r.residual > 1e-5 {
                return Ok(fallback());
            }
            r.point
        }
    };
    let achieved = linalg::dot(&flat, &y);
    let mut tau: Vec<f64> = y.iter().map(|v| (v - offset).max(0.0)).collect();
    for row in tau.chunks_mut(k) {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|v| *v /= s);
        } else {
            row.fill(1.0 / k as f64);
        }
    }
    let labels = LabelMatrix::from_raw(n, k, tau);
    labels.check()?;
    Ok(Cleanup {
        labels,
        achieved,
        fallback: false,
    })
}

/// Largest `⟨X, Y⟩` over matrices with rows in the shifted simplex.
fn max_inner(flat: &[f64], k: usize, offset: f64) -> f64 {
    flat.chunks(k)
        .map(|row| {
            row.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + offset * row.iter().sum::<f64>()
        })
        .sum()
}
