//! Holdout estimates of community-vector moments along a direction.
//!
//! A random holdout set `A` is removed from the graph. For a direction `x` on
//! the remaining vertices `Ā`, each holdout vertex `a` sees the centered
//! edge weights `y_i = G_ai − d/n` to `Ā`; distinct-index products of
//! `y_i x_i` are unbiased, given the labels, for powers of
//! `εd/n · ⟨σ̃_a, u⟩` with `u_s = ⟨v_s, x⟩`. Averaging over `a` and dividing
//! out the label moment constants estimates `Σ_s u_s^m`.

use rand::seq::SliceRandom;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::model::{moment_constants, Graph, SbmParams};
use crate::pipeline::par_map_range;
use crate::rng::Rng;

/// Partition of the vertices into a holdout set and the rest, with the
/// bipartite edges between them.
#[derive(Clone, Debug)]
pub struct HoldoutSplit {
    /// Holdout vertices `A`, ascending.
    pub holdout: Vec<usize>,
    /// Remaining vertices `Ā`, ascending; vertex `i` of the induced graph is `rest[i]`.
    pub rest: Vec<usize>,
    /// For each holdout vertex, its neighbors in `Ā` as indices into `rest`.
    cross: Vec<Vec<u32>>,
    internal: usize,
}

impl HoldoutSplit {
    pub fn cross_neighbors(&self, a: usize) -> &[u32] {
        &self.cross[a]
    }

    pub fn bipartite_edges(&self) -> usize {
        self.cross.iter().map(Vec::len).sum()
    }

    /// Edges with both ends in the holdout set.
    pub fn holdout_internal_edges(&self) -> usize {
        self.internal
    }
}

/// Uniformly random holdout of `⌈ηn⌉` vertices, `0 < η < 1/2`. Returns the
/// split and the graph induced on the remaining vertices.
pub fn holdout_split(graph: &Graph, eta: f64, rng: &mut Rng) -> Result<(HoldoutSplit, Graph)> {
    if !(eta > 0.0 && eta < 0.5) {
        return invalid(format!("holdout fraction must lie in (0, 1/2), got {eta}"));
    }
    let n = graph.n();
    let size = (eta * n as f64).ceil() as usize;
    if size == 0 || n - size < 2 {
        return invalid(format!(
            "holdout of {size} out of {n} vertices is degenerate"
        ));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut holdout = perm[..size].to_vec();
    let mut rest = perm[size..].to_vec();
    holdout.sort_unstable();
    rest.sort_unstable();
    let mut pos = vec![u32::MAX; n];
    for (i, &v) in rest.iter().enumerate() {
        pos[v] = i as u32;
    }
    let cross: Vec<Vec<u32>> = holdout
        .iter()
        .map(|&a| {
            graph
                .neighbors(a)
                .iter()
                .map(|&b| pos[b as usize])
                .filter(|&p| p != u32::MAX)
                .collect()
        })
        .collect();
    let internal = graph
        .edges()
        .filter(|&(u, v)| pos[u] == u32::MAX && pos[v] == u32::MAX)
        .count();
    let induced = graph.induced(&rest);
    Ok((
        HoldoutSplit {
            holdout,
            rest,
            cross,
            internal,
        },
        induced,
    ))
}

/// Estimates of `Σ_s u_s^m` (`m = 2, 3, 4`) for `u_s = ⟨v_s, x⟩` with unit `x`,
/// together with the normalizations needed for the `v` and `w` statistics.
#[derive(Clone, Copy, Debug)]
pub struct MomentEstimates {
    pub sum2: f64,
    pub sum3: f64,
    pub sum4: f64,
    /// `c·⟨1, x⟩`, the offset between `⟨w_s, x⟩` and `⟨v_s, x⟩`.
    pub offset: f64,
    pub k: usize,
    pub v_norm2: f64,
    pub w_norm2: f64,
}

impl MomentEstimates {
    /// Estimate of `Σ_s ⟨v_s,x⟩³/‖v_s‖³`.
    pub fn s3(&self) -> f64 {
        self.sum3 / self.v_norm2.powf(1.5)
    }

    /// Estimate of `Σ_s ⟨v_s,x⟩⁴/‖v_s‖⁴`.
    pub fn s4(&self) -> f64 {
        self.sum4 / (self.v_norm2 * self.v_norm2)
    }

    /// Estimate of `Σ_s ⟨w_s,x⟩³/‖w_s‖³`.
    pub fn s3_w(&self) -> f64 {
        let b = self.offset;
        let k = self.k as f64;
        (self.sum3 + 3.0 * b * self.sum2 + k * b.powi(3)) / self.w_norm2.powf(1.5)
    }

    /// Estimate of `Σ_s ⟨w_s,x⟩⁴/‖w_s‖⁴`.
    pub fn s4_w(&self) -> f64 {
        let b = self.offset;
        let k = self.k as f64;
        (self.sum4 + 4.0 * b * self.sum3 + 6.0 * b * b * self.sum2 + k * b.powi(4))
            / (self.w_norm2 * self.w_norm2)
    }
}

/// Distinct-index sums for one holdout vertex from its weighted power sums.
fn distinct_sums(p1: f64, p2: f64, p3: f64, p4: f64) -> [f64; 3] {
    let pair = p1 * p1 - p2;
    let cubic = p1 * p1 * p1 - 3.0 * p1 * p2 + 2.0 * p3;
    let quartic = p1.powi(4) - 6.0 * p1 * p1 * p2 + 3.0 * p2 * p2 + 8.0 * p1 * p3 - 6.0 * p4;
    [pair, cubic, quartic]
}

/// Holdout moment estimates along `x` (a vector on `Ā`, normalized internally).
/// `params` describes the full graph the split was taken from.
pub fn estimate_moments(
    split: &HoldoutSplit,
    x: &[f64],
    params: &SbmParams,
) -> Result<MomentEstimates> {
    let m = split.rest.len();
    if x.len() != m {
        return Err(Error::Dimension(format!(
            "direction has length {}, expected {m}",
            x.len()
        )));
    }
    if split.holdout.is_empty() {
        return invalid("empty holdout set");
    }
    let mut x = x.to_vec();
    if linalg::normalize(&mut x) == 0.0 {
        return invalid("direction is zero");
    }
    let p = params.p();
    let q = 1.0 - p;
    let glob: [f64; 4] = std::array::from_fn(|e| x.iter().map(|v| v.powi(e as i32 + 1)).sum());
    let on_edge: [f64; 4] = std::array::from_fn(|e| q.powi(e as i32 + 1) - (-p).powi(e as i32 + 1));
    let off_edge: [f64; 4] = std::array::from_fn(|e| (-p).powi(e as i32 + 1));
    let per_vertex = par_map_range(0..split.holdout.len(), |a| {
        let mut s = [0.0; 4];
        for &i in split.cross_neighbors(a) {
            let xi = x[i as usize];
            let mut pw = xi;
            for e in 0..4 {
                s[e] += on_edge[e] * pw;
                pw *= xi;
            }
        }
        for e in 0..4 {
            s[e] += off_edge[e] * glob[e];
        }
        distinct_sums(s[0], s[1], s[2], s[3])
    });
    let mut mean = [0.0; 3];
    for v in &per_vertex {
        for e in 0..3 {
            mean[e] += v[e];
        }
    }
    let count = per_vertex.len() as f64;
    mean.iter_mut().for_each(|v| *v /= count);

    let c = moment_constants(params.k, params.alpha);
    let bias = params.eps * p;
    let sum2 = mean[0] / (bias * bias * c.c2);
    let sum3 = if c.c3 != 0.0 {
        mean[1] / (bias.powi(3) * c.c3)
    } else {
        0.0
    };
    let sum4 = if c.c4 != 0.0 {
        (mean[2] / bias.powi(4) - 3.0 * c.c22 * sum2 * sum2) / c.c4
    } else {
        0.0
    };
    let offset = params.shift() * x.iter().sum::<f64>();
    Ok(MomentEstimates {
        sum2,
        sum3,
        sum4,
        offset,
        k: params.k,
        v_norm2: params.expected_v_norm2(m),
        w_norm2: params.expected_w_norm2(m),
    })
}

pub fn s3(split: &HoldoutSplit, x: &[f64], params: &SbmParams) -> Result<f64> {
    Ok(estimate_moments(split, x, params)?.s3())
}

pub fn s4(split: &HoldoutSplit, x: &[f64], params: &SbmParams) -> Result<f64> {
    Ok(estimate_moments(split, x, params)?.s4())
}

pub fn s3_w(split: &HoldoutSplit, x: &[f64], params: &SbmParams) -> Result<f64> {
    Ok(estimate_moments(split, x, params)?.s3_w())
}

pub fn s4_w(split: &HoldoutSplit, x: &[f64], params: &SbmParams) -> Result<f64> {
    Ok(estimate_moments(split, x, params)?.s4_w())
}
