use faer::Mat;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::model::{Graph, TwoParams};
use crate::projection::{self, UnitDiagOptions};
use crate::rng::Rng;
use crate::rounding;
use crate::sawpoly::{saw_matrix_estimate, CenteredEdges};

#[derive(Clone, Debug)]
pub struct TwoKnobs {
    /// Walk length.
    pub ell: usize,
    /// Palette size; `None` means `ell + 2`.
    pub palette: Option<usize>,
    pub colorings: usize,
    /// Correlation demanded of the projected matrix: `⟨P/‖P‖, Y⟩ ≥ δ′·n`.
    /// `None` means `max(0.2, 0.85·δ⁸)`.
    pub delta_prime: Option<f64>,
    pub tol: f64,
    /// Dual iterations of the projection; each costs one `n×n` eigendecomposition.
    pub max_iter: usize,
    /// Largest projection residual accepted before falling back to random signs.
    pub max_residual: f64,
}

impl Default for TwoKnobs {
    fn default() -> Self {
        TwoKnobs {
            ell: 5,
            palette: None,
            colorings: 4,
            delta_prime: None,
            tol: 1e-3,
            max_iter: 40,
            max_residual: 1.0,
        }
    }
}

impl TwoKnobs {
    pub fn palette(&self) -> usize {
        self.palette.unwrap_or(self.ell + 2)
    }

    pub fn delta_prime(&self, params: &TwoParams) -> f64 {
        self.delta_prime
            .unwrap_or_else(|| (0.85 * params.delta().max(0.0).powi(8)).max(0.2))
    }
}

#[derive(Clone, Debug)]
pub struct TwoResult {
    /// `±1` labels.
    pub labels: Vec<f64>,
    /// Projection could not reach the correlation halfspace; labels are random.
    pub fallback: bool,
    pub iterations: usize,
    pub residual: f64,
}

fn random_signs(n: usize, rng: &mut Rng) -> Vec<f64> {
    use rand::Rng as _;
    (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// Self-avoiding-walk estimate of `yyᵀ`, projected to the unit-diagonal PSD
/// matrices correlated with it, then rounded by a random hyperplane.
pub fn recover_two_communities(
    graph: &Graph,
    params: &TwoParams,
    knobs: &TwoKnobs,
    rng: &mut Rng,
) -> Result<TwoResult> {
    params.validate()?;
    let n = graph.n();
    if n != params.n {
        return invalid(format!(
            "graph has {n} vertices, parameters say {}",
            params.n
        ));
    }
    let delta_prime = knobs.delta_prime(params);
    if !(delta_prime > 0.0 && delta_prime <= 1.0) {
        return invalid("delta_prime must lie in (0, 1]");
    }
    let p = saw_matrix_estimate(
        &CenteredEdges::new(graph, params.p()),
        knobs.ell,
        knobs.palette(),
        knobs.colorings,
        rng,
    )?;
    let norm = linalg::frob(&p);
    if norm == 0.0 {
        return Ok(TwoResult {
            labels: random_signs(n, rng),
            fallback: true,
            iterations: 0,
            residual: f64::NAN,
        });
    }
    let q = &p * faer::Scale(1.0 / norm);
    let opts = UnitDiagOptions {
        tol: knobs.tol,
        max_iter: knobs.max_iter,
    };
    let r = match projection::min_norm_unit_diag_psd(&q, delta_prime * n as f64, &opts) {
        Ok(r) if r.residual <= knobs.max_residual => r,
        Ok(r) => {
            return Ok(TwoResult {
                labels: random_signs(n, rng),
                fallback: true,
                iterations: r.iterations,
                residual: r.residual,
            })
        }
        Err(Error::Infeasible { residual, .. }) => {
            return Ok(TwoResult {
                labels: random_signs(n, rng),
                fallback: true,
                iterations: 0,
                residual,
            })
        }
        Err(e) => return Err(e),
    };
    let y = unit_diagonal(&r.y);
    let labels = rounding::hyperplane_round(&y, rng)?;
    Ok(TwoResult {
        labels,
        fallback: false,
        iterations: r.iterations,
        residual: r.residual,
    })
}

/// `D^{-1/2} Y D^{-1/2}` for the PSD iterate `Y`, with zero diagonal entries replaced by 1.
fn unit_diagonal(y: &Mat<f64>) -> Mat<f64> {
    let n = y.nrows();
    let s: Vec<f64> = (0..n)
        .map(|i| {
            if y[(i, i)] > 0.0 {
                1.0 / y[(i, i)].sqrt()
            } else {
                0.0
            }
        })
        .collect();
    Mat::from_fn(
        n,
        n,
        |i, j| if i == j { 1.0 } else { y[(i, j)] * s[i] * s[j] },
    )
}
