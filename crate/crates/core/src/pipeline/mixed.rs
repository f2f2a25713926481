use faer::Mat;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::model::{Graph, LabelMatrix, SbmParams};
use crate::rng::Rng;
use crate::rounding::{self, CleanupMode};
use crate::sawpoly::{
    build_w_tensor_in_basis, saw_matrix_estimate, saw_scale, star_scale, star_tensor_sketch,
    CenteredEdges,
};
use crate::tensordecomp::{self, DecompositionConfig, LiftOptions, SolveOptions};
use crate::xvalid::{self, HoldoutSplit};

#[derive(Clone, Debug)]
pub struct MatrixKnobs {
    pub ell: usize,
    /// Palette size; `None` means `ell + 2`.
    pub palette: Option<usize>,
    pub colorings: usize,
    /// Eigenvectors spanned by the output; `None` means `⌈(k/δ)²⌉`.
    pub top_r: Option<usize>,
}

impl Default for MatrixKnobs {
    fn default() -> Self {
        MatrixKnobs {
            ell: 5,
            palette: None,
            colorings: 4,
            top_r: None,
        }
    }
}

impl MatrixKnobs {
    pub fn palette(&self) -> usize {
        self.palette.unwrap_or(self.ell + 2)
    }

    pub fn top_r(&self, params: &SbmParams) -> usize {
        let n = params.n;
        let r = self.top_r.unwrap_or_else(|| {
            let delta = params.delta();
            if delta <= 0.0 {
                n
            } else {
                ((params.k as f64 / delta).powi(2).ceil() as usize).min(n)
            }
        });
        r.clamp(1, n)
    }
}

#[derive(Clone, Debug)]
pub struct MatrixResult {
    /// Unit vector on the graph's vertices.
    pub x: Vec<f64>,
    /// Path-polynomial estimate rescaled to be conditionally unbiased for `Σ_s v_s v_sᵀ` off the diagonal.
    pub estimate: Mat<f64>,
    pub top_r: usize,
}

/// Estimate of `Σ_s v_s v_sᵀ` from length-`ell` self-avoiding walks.
pub fn estimate_second_moment(
    graph: &Graph,
    params: &SbmParams,
    knobs: &MatrixKnobs,
    rng: &mut Rng,
) -> Result<Mat<f64>> {
    check_graph(graph, params)?;
    if params.eps == 0.0 {
        return invalid("eps = 0 carries no signal to rescale");
    }
    let p = saw_matrix_estimate(
        &CenteredEdges::new(graph, params.p()),
        knobs.ell,
        knobs.palette(),
        knobs.colorings,
        rng,
    )?;
    Ok(p * faer::Scale(1.0 / saw_scale(params, knobs.ell)))
}

/// Random unit vector in the leading eigenspace of the second-moment estimate.
pub fn recover_matrix_mm(
    graph: &Graph,
    params: &SbmParams,
    knobs: &MatrixKnobs,
    rng: &mut Rng,
) -> Result<MatrixResult> {
    let estimate = estimate_second_moment(graph, params, knobs, rng)?;
    let top_r = knobs.top_r(params);
    let x = rounding::spectral_round(&estimate, top_r, rng)?;
    Ok(MatrixResult { x, estimate, top_r })
}

fn check_graph(graph: &Graph, params: &SbmParams) -> Result<()> {
    params.validate()?;
    if graph.n() != params.n {
        return invalid(format!(
            "graph has {} vertices, parameters say {}",
            graph.n(),
            params.n
        ));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Tiny,
    Small,
    Large,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Tiny => "tiny",
            Branch::Small => "small",
            Branch::Large => "large",
        }
    }
}

#[derive(Clone, Debug)]
pub struct MixedKnobs {
    /// Holdout fraction.
    pub eta: f64,
    /// δ at or above `1 − c` takes the large branch.
    pub large_cutoff: f64,
    /// δ at or below `k^{−1/C}` takes the tiny branch.
    pub tiny_exponent: f64,
    /// Gate: a direction passes when its fourth-moment statistic reaches
    /// `theta` times the value at an exact community direction.
    pub theta: f64,
    pub matrix: MatrixKnobs,
    /// Spectral dimension in the tiny branch; `None` means `k − 1`.
    pub tiny_top_r: Option<usize>,
    pub star_ell: usize,
    /// Star palette; `None` means `3·star_ell + 2`.
    pub star_palette: Option<usize>,
    pub star_colorings: usize,
    /// Reduced dimension of the tensor stage; `None` means `min(24, 4k)`.
    pub sketch_dim: Option<usize>,
    /// Correlation handed to lifting and decomposition; `None` means δ clamped to `[0.05, 1]`.
    pub tensor_delta: Option<f64>,
    pub contractions: usize,
    pub top_dim: usize,
    pub solve: SolveOptions,
    pub cleanup: CleanupMode,
    /// Forces a branch instead of choosing by δ.
    pub branch: Option<Branch>,
}

impl Default for MixedKnobs {
    fn default() -> Self {
        MixedKnobs {
            eta: 0.2,
            large_cutoff: 0.1,
            tiny_exponent: 6.0,
            theta: 0.25,
            matrix: MatrixKnobs::default(),
            tiny_top_r: None,
            star_ell: 2,
            star_palette: None,
            star_colorings: 4,
            sketch_dim: None,
            tensor_delta: None,
            contractions: 50,
            top_dim: 1,
            solve: SolveOptions {
                tol: 1e-5,
                max_iter: 3000,
            },
            cleanup: CleanupMode::Nearest,
            branch: None,
        }
    }
}

impl MixedKnobs {
    pub fn branch_for(&self, params: &SbmParams) -> Branch {
        if let Some(b) = self.branch {
            return b;
        }
        let delta = params.delta();
        if delta >= 1.0 - self.large_cutoff {
            Branch::Large
        } else if delta > (params.k as f64).powf(-1.0 / self.tiny_exponent) {
            Branch::Small
        } else {
            Branch::Tiny
        }
    }
}

#[derive(Clone, Debug)]
pub struct MixedResult {
    pub labels: LabelMatrix,
    pub branch: Branch,
    /// Why uniform labels were returned, if they were.
    pub fallback: Option<String>,
    /// Fourth-moment statistic of each candidate direction that reached the gate.
    pub gate_values: Vec<f64>,
}

/// `Σ_s ⟨v_s, x⟩⁴/‖v_s‖⁴` at `x = v_1/‖v_1‖` when the `v_s` have pairwise
/// correlation `−1/(k−1)`.
pub fn reference_s4(k: usize) -> f64 {
    if k < 2 {
        return 1.0;
    }
    1.0 + 1.0 / ((k - 1) as f64).powi(3)
}

/// Holdout-validated mixed-membership recovery: the tiny branch gates a single
/// spectral direction; the small and large branches decompose a lifted star
/// tensor in a reduced basis. Stage failures give uniform labels.
pub fn recover_mixed_membership(
    graph: &Graph,
    params: &SbmParams,
    knobs: &MixedKnobs,
    rng: &mut Rng,
) -> Result<MixedResult> {
    check_graph(graph, params)?;
    let (n, k) = (params.n, params.k);
    if k < 2 {
        return invalid("need at least two communities");
    }
    let delta = params.delta();
    if delta > 0.0 {
        let k2 = (k as f64 * (params.alpha + 1.0)).powi(2);
        let kept = 1.0 - k2 / (params.eps * params.eps * params.d * (1.0 - knobs.eta));
        if kept < delta * delta {
            return invalid(format!(
                "holdout fraction {} leaves signal {kept:.4} below δ² = {:.4}",
                knobs.eta,
                delta * delta
            ));
        }
    }
    let branch = knobs.branch_for(params);
    let (split, sub_graph) = xvalid::holdout_split(graph, knobs.eta, rng)?;
    let sub = params.restricted(split.rest.len());
    let outcome = match branch {
        Branch::Tiny => tiny(&split, &sub_graph, params, &sub, knobs, rng),
        Branch::Small | Branch::Large => {
            tensor_route(&split, &sub_graph, params, &sub, knobs, branch, rng)
        }
    };
    match outcome {
        Ok((Ok(cols), gate_values)) => {
            let cleaned = rounding::cleanup_to_simplex(&cols, params, knobs.cleanup)?;
            let fallback = cleaned
                .fallback
                .then(|| "cleanup projection failed".to_string());
            Ok(MixedResult {
                labels: cleaned.labels,
                branch,
                fallback,
                gate_values,
            })
        }
        Ok((Err(reason), gate_values)) => Ok(MixedResult {
            labels: LabelMatrix::uniform(n, k),
            branch,
            fallback: Some(reason),
            gate_values,
        }),
        Err(e @ (Error::Infeasible { .. } | Error::NoConvergence { .. } | Error::Eigen)) => {
            Ok(MixedResult {
                labels: LabelMatrix::uniform(n, k),
                branch,
                fallback: Some(e.to_string()),
                gate_values: Vec::new(),
            })
        }
        Err(e) => Err(e),
    }
}

/// Column estimates padded to all `n` vertices, or the reason for giving up.
type Stage = Result<(std::result::Result<Vec<Vec<f64>>, String>, Vec<f64>)>;

fn pad(split: &HoldoutSplit, x: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (&v, &xi) in split.rest.iter().zip(x) {
        out[v] = xi;
    }
    out
}

fn tiny(
    split: &HoldoutSplit,
    g: &Graph,
    params: &SbmParams,
    sub: &SbmParams,
    knobs: &MixedKnobs,
    rng: &mut Rng,
) -> Stage {
    let k = params.k;
    let mk = MatrixKnobs {
        top_r: Some(knobs.tiny_top_r.unwrap_or(k - 1).max(1)),
        ..knobs.matrix.clone()
    };
    let x = recover_matrix_mm(g, sub, &mk, rng)?.x;
    let est = xvalid::estimate_moments(split, &x, params)?;
    if est.s4() < knobs.theta * reference_s4(k) {
        return Ok((
            Err(format!(
                "fourth-moment gate rejected the direction (s4 = {:.4})",
                est.s4()
            )),
            vec![est.s4()],
        ));
    }
    let x = rounding::fix_sign(&x, est.s3());
    // x estimates v_s/‖v_s‖; w_s = v_s + c·1 is what the cleanup expects.
    let vn = sub.expected_v_norm2(sub.n).sqrt();
    let c = params.shift();
    let w: Vec<f64> = x.iter().map(|xi| vn * xi + c).collect();
    Ok((Ok(vec![pad(split, &w, params.n)]), vec![est.s4()]))
}

/// Orthonormal basis: the normalized all-ones vector, then leading eigenvectors of `m`.
fn sketch_basis(m: &Mat<f64>, r: usize) -> Result<Vec<Vec<f64>>> {
    let n = m.nrows();
    let mut basis = vec![vec![1.0 / (n as f64).sqrt(); n]];
    let (_, vecs) = linalg::sym_eigen(m)?;
    for j in (0..n).rev() {
        if basis.len() >= r {
            break;
        }
        let mut u = linalg::column(&vecs, j);
        if linalg::orthogonalize(&mut u, &basis) > 1e-6 {
            linalg::normalize(&mut u);
            basis.push(u);
        }
    }
    Ok(basis)
}

fn combine(basis: &[Vec<f64>], coef: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; basis[0].len()];
    for (b, c) in basis.iter().zip(coef) {
        out.iter_mut().zip(b).for_each(|(o, x)| *o += c * x);
    }
    out
}

fn tensor_route(
    split: &HoldoutSplit,
    g: &Graph,
    params: &SbmParams,
    sub: &SbmParams,
    knobs: &MixedKnobs,
    branch: Branch,
    rng: &mut Rng,
) -> Stage {
    let (k, m) = (params.k, sub.n);
    let r = knobs
        .sketch_dim
        .unwrap_or((4 * k).min(tensordecomp::MAX_DIM));
    if r > tensordecomp::MAX_DIM {
        return Err(Error::Guard(format!(
            "sketch dimension {r} exceeds {}",
            tensordecomp::MAX_DIM
        )));
    }
    if r < k || r > m {
        return invalid(format!(
            "sketch dimension {r} must lie in [k, |Ā|] = [{k}, {m}]"
        ));
    }
    let mhat = estimate_second_moment(g, sub, &knobs.matrix, rng)?;
    let basis = sketch_basis(&mhat, r)?;
    let ell = knobs.star_ell;
    let palette = knobs.star_palette.unwrap_or(3 * ell + 2);
    let mut star = star_tensor_sketch(
        &CenteredEdges::new(g, sub.p()),
        ell,
        palette,
        knobs.star_colorings,
        &basis,
        rng,
    )?;
    star.scale(1.0 / star_scale(sub, ell));
    let pair = Mat::from_fn(r, r, |a, b| {
        let mut s = 0.0;
        for i in 0..m {
            let row: f64 = (0..m).map(|j| mhat[(i, j)] * basis[b][j]).sum();
            s += basis[a][i] * row;
        }
        s
    });
    let one: Vec<f64> = basis.iter().map(|b| b.iter().sum()).collect();
    let b3 = build_w_tensor_in_basis(&star, &pair, &one, params.shift(), k)?;
    let tdelta = knobs
        .tensor_delta
        .unwrap_or_else(|| params.delta().clamp(0.05, 1.0));
    let lift = LiftOptions {
        solve: knobs.solve.clone(),
        ..LiftOptions::default()
    };
    let t4 = tensordecomp::lift_3_to_4(&b3, k, tdelta, &lift)?;

    let threshold = knobs.theta;
    let passes = |x: &[f64]| {
        xvalid::estimate_moments(split, x, params)
            .map(|e| e.s4_w() >= threshold)
            .unwrap_or(false)
    };
    let oracle = |v: &[f64]| passes(&combine(&basis, v));
    let config = DecompositionConfig {
        delta: tdelta,
        m: k,
        rounds: None,
        contractions: knobs.contractions,
        top_dim: knobs.top_dim,
        solve: knobs.solve.clone(),
    };
    let use_oracle = branch == Branch::Small;
    let found = tensordecomp::decompose(
        &t4,
        &config,
        if use_oracle { Some(&oracle) } else { None },
        rng,
    )?;

    let mut cols = Vec::with_capacity(k);
    let mut gate_values = Vec::with_capacity(k);
    for v in &found {
        let x = combine(&basis, v);
        let est = xvalid::estimate_moments(split, &x, params)?;
        gate_values.push(est.s4_w());
        let x = if est.s4_w() < threshold {
            linalg::random_unit(m, rng)
        } else {
            rounding::fix_sign(&x, est.s3_w())
        };
        cols.push(pad(split, &x, params.n));
    }
    Ok((Ok(cols), gate_values))
}
