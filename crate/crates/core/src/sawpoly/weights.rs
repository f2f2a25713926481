use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par};

use super::ColorLayout;
use crate::model::Graph;

/// Symmetric pair weights `p_ab` on the complete graph. Path and star
/// polynomials multiply these along their edges.
pub trait EdgeWeights: Sync {
    type Prepared<'a>: BlockApply
    where
        Self: 'a;

    fn n(&self) -> usize;

    /// Weight of the pair `{a, b}`, `a ≠ b`.
    fn weight(&self, a: usize, b: usize) -> f64;

    /// Operator view for one coloring.
    fn prepare<'a>(&'a self, layout: &'a ColorLayout) -> Self::Prepared<'a>;
}

/// Block products used by the color-coding recursion. Rows of `input` are
/// indexed by layout position and are zero outside the colors in `mask`.
pub trait BlockApply {
    /// For every vertex `v` of color `target` (the `r`-th in its block),
    /// `out[r, :] += Σ_u p_{vu} · input[u, :]` over vertices `u` whose color is in `mask`.
    /// `target` is never in `mask`.
    fn apply(&self, target: usize, mask: u64, input: &[f64], width: usize, out: &mut [f64]);
}

/// Centered adjacency weight `x_ab − p` of a sparse graph, with `p = d/n`
/// for block models. Non-edges are never materialized.
pub struct CenteredEdges<'g> {
    pub graph: &'g Graph,
    pub p: f64,
}

impl<'g> CenteredEdges<'g> {
    pub fn new(graph: &'g Graph, p: f64) -> Self {
        CenteredEdges { graph, p }
    }
}

pub struct PreparedEdges<'a> {
    layout: &'a ColorLayout,
    p: f64,
    nbr: Vec<Vec<u32>>,
}

impl<'g> EdgeWeights for CenteredEdges<'g> {
    type Prepared<'a>
        = PreparedEdges<'a>
    where
        Self: 'a;

    fn n(&self) -> usize {
        self.graph.n()
    }

    fn weight(&self, a: usize, b: usize) -> f64 {
        if self.graph.has_edge(a, b) {
            1.0 - self.p
        } else {
            -self.p
        }
    }

    fn prepare<'a>(&'a self, layout: &'a ColorLayout) -> PreparedEdges<'a> {
        let nbr = layout
            .order
            .iter()
            .map(|&v| {
                self.graph
                    .neighbors(v)
                    .iter()
                    .map(|&u| layout.pos[u as usize] as u32)
                    .collect()
            })
            .collect();
        PreparedEdges {
            layout,
            p: self.p,
            nbr,
        }
    }
}

impl BlockApply for PreparedEdges<'_> {
    fn apply(&self, target: usize, mask: u64, input: &[f64], width: usize, out: &mut [f64]) {
        let lay = self.layout;
        let mut colsum = vec![0.0; width];
        for c in 0..lay.palette {
            if mask >> c & 1 == 1 {
                for r in lay.block(c) {
                    colsum
                        .iter_mut()
                        .zip(&input[r * width..(r + 1) * width])
                        .for_each(|(s, x)| *s += x);
                }
            }
        }
        for (row, r) in lay.block(target).enumerate() {
            let o = &mut out[row * width..(row + 1) * width];
            for &u in &self.nbr[r] {
                let u = u as usize;
                if mask >> lay.color_at[u] & 1 == 1 {
                    o.iter_mut()
                        .zip(&input[u * width..(u + 1) * width])
                        .for_each(|(s, x)| *s += x);
                }
            }
            o.iter_mut()
                .zip(&colsum)
                .for_each(|(s, c)| *s -= self.p * c);
        }
    }
}

/// Off-diagonal entries of a dense symmetric matrix as pair weights.
pub struct DenseWeights<'m> {
    pub a: &'m Mat<f64>,
}

impl<'m> DenseWeights<'m> {
    pub fn new(a: &'m Mat<f64>) -> Self {
        DenseWeights { a }
    }
}

pub struct PreparedDense<'a> {
    layout: &'a ColorLayout,
    w: Mat<f64>,
}

impl<'m> EdgeWeights for DenseWeights<'m> {
    type Prepared<'a>
        = PreparedDense<'a>
    where
        Self: 'a;

    fn n(&self) -> usize {
        self.a.nrows()
    }

    fn weight(&self, a: usize, b: usize) -> f64 {
        self.a[(a, b)]
    }

    fn prepare<'a>(&'a self, layout: &'a ColorLayout) -> PreparedDense<'a> {
        let o = &layout.order;
        let w = Mat::from_fn(o.len(), o.len(), |r, s| {
            if r == s {
                0.0
            } else {
                self.a[(o[r], o[s])]
            }
        });
        PreparedDense { layout, w }
    }
}

impl BlockApply for PreparedDense<'_> {
    fn apply(&self, target: usize, mask: u64, input: &[f64], width: usize, out: &mut [f64]) {
        let lay = self.layout;
        let rows = lay.block(target);
        if rows.is_empty() {
            return;
        }
        let mut dst = MatMut::from_row_major_slice_mut(out, rows.len(), width);
        for c in 0..lay.palette {
            if mask >> c & 1 == 0 {
                continue;
            }
            let cols = lay.block(c);
            if cols.is_empty() {
                continue;
            }
            let lhs = self
                .w
                .as_ref()
                .submatrix(rows.start, cols.start, rows.len(), cols.len());
            let rhs = MatRef::from_row_major_slice(
                &input[cols.start * width..cols.end * width],
                cols.len(),
                width,
            );
            matmul(dst.as_mut(), Accum::Add, lhs, rhs, 1.0, Par::Seq);
        }
    }
}

/// Weights given by an arbitrary symmetric rule; block products evaluate it
/// pair by pair. Intended for small instances and tests.
pub struct FnWeights<F: Fn(usize, usize) -> f64 + Sync> {
    pub n: usize,
    pub f: F,
}

pub struct PreparedFn<'a, F: Fn(usize, usize) -> f64 + Sync> {
    layout: &'a ColorLayout,
    f: &'a F,
}

impl<F: Fn(usize, usize) -> f64 + Sync> EdgeWeights for FnWeights<F> {
    type Prepared<'a>
        = PreparedFn<'a, F>
    where
        Self: 'a;

    fn n(&self) -> usize {
        self.n
    }

    fn weight(&self, a: usize, b: usize) -> f64 {
        (self.f)(a, b)
    }

    fn prepare<'a>(&'a self, layout: &'a ColorLayout) -> PreparedFn<'a, F> {
        PreparedFn { layout, f: &self.f }
    }
}

impl<F: Fn(usize, usize) -> f64 + Sync> BlockApply for PreparedFn<'_, F> {
    fn apply(&self, target: usize, mask: u64, input: &[f64], width: usize, out: &mut [f64]) {
        let lay = self.layout;
        for (row, r) in lay.block(target).enumerate() {
            let v = lay.order[r];
            let o = &mut out[row * width..(row + 1) * width];
            for c in 0..lay.palette {
                if mask >> c & 1 == 0 {
                    continue;
                }
                for s in lay.block(c) {
                    let w = (self.f)(v, lay.order[s]);
                    if w != 0.0 {
                        o.iter_mut()
                            .zip(&input[s * width..(s + 1) * width])
                            .for_each(|(a, x)| *a += w * x);
                    }
                }
            }
        }
    }
}
