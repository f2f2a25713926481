use faer::Mat;

use crate::error::{invalid, Result};
use crate::linalg;
use crate::model::{sample_spiked_wigner, WignerInstance};
use crate::rng::Rng;
use crate::sawpoly::{saw_matrix_estimate, DenseWeights};

#[derive(Clone, Debug)]
pub struct WignerKnobs {
    /// Palette size; `None` means `ell + 2`.
    pub palette: Option<usize>,
    pub colorings: usize,
}

impl Default for WignerKnobs {
    fn default() -> Self {
        WignerKnobs {
            palette: None,
            colorings: 16,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WignerReport {
    /// Path polynomial of the instance, scaled so its off-diagonal mean is `v_i v_j`
    /// (unscaled when `λ = 0`).
    pub estimate: Mat<f64>,
    /// `⟨f(A), vvᵀ⟩ / (‖f(A)‖_F ‖vvᵀ‖_F)`.
    pub correlation: f64,
    pub instance: WignerInstance,
}

/// Samples `A = λvvᵀ + W` and estimates `vvᵀ` by length-`ell` self-avoiding walks in `A`.
pub fn wigner_demo(
    n: usize,
    lambda: f64,
    ell: usize,
    knobs: &WignerKnobs,
    rng: &mut Rng,
) -> Result<WignerReport> {
    if ell == 0 {
        return invalid("walk length must be at least 1");
    }
    let instance = sample_spiked_wigner(n, lambda, rng)?;
    let palette = knobs.palette.unwrap_or(ell + 2);
    let mut estimate = saw_matrix_estimate(
        &DenseWeights::new(&instance.a),
        ell,
        palette,
        knobs.colorings,
        rng,
    )?;
    if lambda > 0.0 {
        // Each interior vertex contributes E v_u² = 1/n, and there are (n−2)_{ℓ−1} walks per pair.
        let walks: f64 = (0..ell - 1)
            .map(|i| (n - 2 - i) as f64 / n as f64)
            .product();
        estimate *= faer::Scale(1.0 / (lambda.powi(ell as i32) * walks));
    }
    let vv = linalg::outer(&instance.v, &instance.v);
    let denom = linalg::frob(&estimate) * linalg::frob(&vv);
    let correlation = if denom > 0.0 {
        linalg::inner(&estimate, &vv) / denom
    } else {
        0.0
    };
    Ok(WignerReport {
        estimate,
        correlation,
        instance,
    })
}
