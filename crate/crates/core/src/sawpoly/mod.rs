//! Self-avoiding-walk matrix polynomials and long-armed star tensor
//! polynomials, evaluated by color coding.
//!
//! A coloring `c: [n] → [L]` keeps only the paths (stars) whose vertices get
//! distinct colors. Those are summed by a dynamic program over color sets and
//! reweighted by the inverse probability that a fixed vertex set is rainbow,
//! so averaging over random colorings is unbiased for the full sum.

mod brute;
mod star;
mod weights;

use std::collections::BTreeMap;
use std::ops::Range;

use faer::Mat;
use rand::Rng as _;

pub use brute::{saw_matrix_bruteforce, star_tensor_bruteforce, BRUTE_FORCE_LIMIT};
pub use star::{
    build_w_tensor, build_w_tensor_in_basis, star_tensor_estimate, star_tensor_eval,
    star_tensor_sketch, star_tensor_sketch_eval, FULL_STAR_LIMIT,
};
pub use weights::{BlockApply, CenteredEdges, DenseWeights, EdgeWeights, FnWeights};

use crate::error::{invalid, Error, Result};
use crate::model::{moment_constants, SbmParams};
use crate::rng::{self, Rng};

/// Largest palette accepted by the subset recursion.
pub const MAX_PALETTE: usize = 24;

/// Largest vertex count for which dense `n×n` estimates are formed.
pub const MAX_DENSE_N: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    pub palette: usize,
    pub colors: Vec<u8>,
}

impl Coloring {
    pub fn new(palette: usize, colors: Vec<u8>) -> Result<Self> {
        if palette == 0 || palette > MAX_PALETTE {
            return invalid(format!("palette size must be in 1..={MAX_PALETTE}"));
        }
        if colors.iter().any(|&c| c as usize >= palette) {
            return invalid("color outside palette");
        }
        Ok(Coloring { palette, colors })
    }

    pub fn random(n: usize, palette: usize, rng: &mut Rng) -> Self {
        Coloring {
            palette,
            colors: (0..n).map(|_| rng.random_range(0..palette) as u8).collect(),
        }
    }
}

/// Vertices reordered so each color class is a contiguous block.
pub struct ColorLayout {
    pub palette: usize,
    /// Layout position → vertex.
    pub order: Vec<usize>,
    /// Vertex → layout position.
    pub pos: Vec<usize>,
    /// Color of the vertex at each layout position.
    pub color_at: Vec<usize>,
    starts: Vec<usize>,
}

impl ColorLayout {
    pub fn new(coloring: &Coloring) -> Self {
        let n = coloring.colors.len();
        let l = coloring.palette;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| coloring.colors[v]);
        let mut pos = vec![0; n];
        for (r, &v) in order.iter().enumerate() {
            pos[v] = r;
        }
        let color_at: Vec<usize> = order.iter().map(|&v| coloring.colors[v] as usize).collect();
        let mut starts = vec![0; l + 1];
        for &c in &color_at {
            starts[c + 1] += 1;
        }
        for c in 0..l {
            starts[c + 1] += starts[c];
        }
        ColorLayout {
            palette: l,
            order,
            pos,
            color_at,
            starts,
        }
    }

    pub fn block(&self, c: usize) -> Range<usize> {
        self.starts[c]..self.starts[c + 1]
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }
}

/// Probability that `v` fixed vertices receive distinct colors from a uniform `L`-coloring.
pub fn rainbow_probability(palette: usize, v: usize) -> f64 {
    if v > palette {
        return 0.0;
    }
    (0..v)
        .map(|i| (palette - i) as f64 / palette as f64)
        .product()
}

/// Default palette `2V` for a shape with `V` vertices.
pub fn default_palette(vertices: usize) -> usize {
    (2 * vertices).min(MAX_PALETTE)
}

/// Default number of colorings, `⌈25 / rainbow probability⌉`.
pub fn default_colorings(palette: usize, vertices: usize) -> usize {
    (25.0 / rainbow_probability(palette, vertices)).ceil() as usize
}

pub(crate) type Tables = BTreeMap<u64, Vec<f64>>;

/// Extends every partial path by one vertex of a color not yet used.
pub(crate) fn extend<B: BlockApply>(
    op: &B,
    lay: &ColorLayout,
    width: usize,
    level: &Tables,
) -> Tables {
    let n = lay.n();
    let mut next: Tables = BTreeMap::new();
    let mut block = Vec::new();
    for (&mask, table) in level {
        for c in 0..lay.palette {
            if mask >> c & 1 == 1 || lay.block(c).is_empty() {
                continue;
            }
            let rows = lay.block(c);
            block.clear();
            block.resize(rows.len() * width, 0.0);
            op.apply(c, mask, table, width, &mut block);
            let t = next
                .entry(mask | 1 << c)
                .or_insert_with(|| vec![0.0; n * width]);
            t[rows.start * width..rows.end * width].copy_from_slice(&block);
        }
    }
    next
}

fn check_palette(palette: usize, vertices: usize) -> Result<()> {
    if palette > MAX_PALETTE {
        return Err(Error::Guard(format!(
            "palette {palette} exceeds {MAX_PALETTE}"
        )));
    }
    if palette < vertices {
        return invalid(format!(
            "palette {palette} is smaller than the {vertices} shape vertices"
        ));
    }
    Ok(())
}

/// Sum over colorful ℓ-paths between every pair of vertices, each weighted by
/// the product of its edge weights times the inverse rainbow probability of
/// its ℓ+1 vertices. Diagonal entries are zero.
pub fn colorful_path_eval<W: EdgeWeights>(
    w: &W,
    ell: usize,
    coloring: &Coloring,
) -> Result<Mat<f64>> {
    let n = w.n();
    if coloring.colors.len() != n {
        return Err(Error::Dimension("coloring length differs from n".into()));
    }
    if ell == 0 {
        return invalid("path length must be at least 1");
    }
    check_palette(coloring.palette, ell + 1)?;
    let lay = ColorLayout::new(coloring);
    let op = w.prepare(&lay);
    let norm = 1.0 / rainbow_probability(coloring.palette, ell + 1);
    let mut out = Mat::<f64>::zeros(n, n);
    let full = (1u64 << lay.palette) - 1;
    for c0 in 0..lay.palette {
        let src = lay.block(c0);
        let width = src.len();
        if width == 0 {
            continue;
        }
        let mut init = vec![0.0; n * width];
        for (j, r) in src.clone().enumerate() {
            init[r * width + j] = 1.0;
        }
        let mut level: Tables = BTreeMap::new();
        level.insert(1 << c0, init);
        for _ in 1..ell {
            level = extend(&op, &lay, width, &level);
        }
        // Last step: pool all partial paths that avoid the final color.
        let mut acc = vec![0.0; n * width];
        let mut block = Vec::new();
        for c in 0..lay.palette {
            let rows = lay.block(c);
            if c == c0 || rows.is_empty() {
                continue;
            }
            acc.iter_mut().for_each(|x| *x = 0.0);
            let mut any = false;
            for (&mask, t) in &level {
                if mask >> c & 1 == 0 {
                    acc.iter_mut().zip(t).for_each(|(a, x)| *a += x);
                    any = true;
                }
            }
            if !any {
                continue;
            }
            block.clear();
            block.resize(rows.len() * width, 0.0);
            op.apply(c, full & !(1 << c), &acc, width, &mut block);
            for (i, r) in rows.enumerate() {
                let v = lay.order[r];
                for (j, s) in src.clone().enumerate() {
                    out[(lay.order[s], v)] = norm * block[i * width + j];
                }
            }
        }
    }
    // Reversing a colorful path keeps it colorful, so the result is symmetric up to rounding.
    crate::linalg::symmetrize(&mut out);
    Ok(out)
}

/// Runs `f` on colorings `0..count` with derived streams and sums the results in index order.
pub(crate) fn sum_over_colorings<T, F, A>(count: usize, seed: u64, f: F, mut add: A) -> Result<()>
where
    T: Send,
    F: Fn(&mut Rng) -> Result<T> + Sync,
    A: FnMut(T),
{
    let batch = crate::pipeline::threads().max(1);
    let mut start = 0;
    while start < count {
        let end = (start + batch).min(count);
        let results =
            crate::pipeline::par_map_range(start..end, |i| f(&mut rng::stream(seed, i as u64)));
        for r in results {
            add(r?);
        }
        start = end;
    }
    Ok(())
}

/// Average of [`colorful_path_eval`] over `n_colorings` independent colorings.
pub fn saw_matrix_estimate<W: EdgeWeights>(
    w: &W,
    ell: usize,
    palette: usize,
    n_colorings: usize,
    rng: &mut Rng,
) -> Result<Mat<f64>> {
    if n_colorings == 0 {
        return invalid("need at least one coloring");
    }
    check_palette(palette, ell + 1)?;
    let n = w.n();
    if n > MAX_DENSE_N {
        return Err(Error::Guard(format!(
            "dense estimate needs n ≤ {MAX_DENSE_N}, got {n}"
        )));
    }
    let seed = rng::child_seed(rng);
    let mut total = Mat::<f64>::zeros(n, n);
    sum_over_colorings(
        n_colorings,
        seed,
        |r| colorful_path_eval(w, ell, &Coloring::random(n, palette, r)),
        |m| total += &m,
    )?;
    total *= faer::Scale(1.0 / n_colorings as f64);
    Ok(total)
}

fn falling(m: usize, r: usize) -> f64 {
    (0..r).map(|i| m.saturating_sub(i) as f64).product()
}

/// `E[P_ij | σ] / Σ_s v_s(i) v_s(j)` for the length-`ell` path polynomial with
/// centered edge weights on a block-model graph with `params.n` vertices.
pub fn saw_scale(params: &SbmParams, ell: usize) -> f64 {
    let bias = params.eps * params.p();
    bias.powi(ell as i32)
        * params.c2().powi(ell as i32 - 1)
        * falling(params.n.saturating_sub(2), ell - 1)
}

/// `E[P_ijk | σ] / Σ_s v_s(i) v_s(j) v_s(k)` for the star polynomial with
/// arms of length `ell`.
pub fn star_scale(params: &SbmParams, ell: usize) -> f64 {
    let bias = params.eps * params.p();
    let c3 = moment_constants(params.k, params.alpha).c3;
    bias.powi(3 * ell as i32)
        * params.c2().powi(3 * (ell as i32 - 1))
        * c3
        * falling(params.n.saturating_sub(3), 3 * ell - 2)
}
