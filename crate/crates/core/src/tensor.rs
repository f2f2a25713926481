//! Dense order-3 and order-4 tensors over ℝⁿ with the Frobenius inner product.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    pub n: usize,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    pub n: usize,
    pub data: Vec<f64>,
}

macro_rules! common_ops {
    ($t:ty) => {
        impl $t {
            pub fn dim(&self) -> usize {
                self.n
            }

            pub fn inner(&self, other: &Self) -> f64 {
                self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
            }

            pub fn norm(&self) -> f64 {
                self.inner(self).sqrt()
            }

            pub fn scale(&mut self, s: f64) {
                self.data.iter_mut().for_each(|x| *x *= s);
            }

            pub fn add_scaled(&mut self, other: &Self, s: f64) {
                self.data
                    .iter_mut()
                    .zip(&other.data)
                    .for_each(|(a, b)| *a += s * b);
            }

            /// Normalized correlation ⟨a,b⟩/(‖a‖‖b‖), zero if either vanishes.
            pub fn correlation(&self, other: &Self) -> f64 {
                let d = self.norm() * other.norm();
                if d == 0.0 {
                    0.0
                } else {
                    self.inner(other) / d
                }
            }
        }
    };
}

common_ops!(Tensor3);
common_ops!(Tensor4);

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let id = self.idx(i, j, k);
        self.data[id] = v;
    }

    pub fn add_cube(&mut self, a: &[f64], w: f64) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let aij = w * a[i] * a[j];
                let base = (i * n + j) * n;
                for k in 0..n {
                    self.data[base + k] += aij * a[k];
                }
            }
        }
    }

    pub fn add_outer(&mut self, a: &[f64], b: &[f64], c: &[f64], w: f64) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let ab = w * a[i] * b[j];
                let base = (i * n + j) * n;
                for k in 0..n {
                    self.data[base + k] += ab * c[k];
                }
            }
        }
    }

    pub fn sum_of_cubes(vs: &[Vec<f64>]) -> Self {
        let n = vs.first().map_or(0, |v| v.len());
        let mut t = Tensor3::zeros(n);
        for v in vs {
            t.add_cube(v, 1.0);
        }
        t
    }

    /// Average over the six index permutations.
    pub fn symmetrized(&self) -> Self {
        let n = self.n;
        let mut out = Tensor3::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let s = self.get(i, j, k)
                        + self.get(i, k, j)
                        + self.get(j, i, k)
                        + self.get(j, k, i)
                        + self.get(k, i, j)
                        + self.get(k, j, i);
                    out.set(i, j, k, s / 6.0);
                }
            }
        }
        out
    }

    /// Multilinear change of coordinates `T(Uᵀ·, Uᵀ·, Uᵀ·)` where the columns of
    /// `u` (given as `r` vectors of length `n`) span the target space.
    pub fn project(&self, u: &[Vec<f64>]) -> Result<Self> {
        let r = u.len();
        if u.iter().any(|c| c.len() != self.n) {
            return Err(Error::Dimension("projection basis length".into()));
        }
        let n = self.n;
        // Contract one mode at a time: n³ → r·n² → r²·n → r³.
        let mut a = vec![0.0; r * n * n];
        for p in 0..r {
            for i in 0..n {
                let w = u[p][i];
                if w == 0.0 {
                    continue;
                }
                for jk in 0..n * n {
                    a[p * n * n + jk] += w * self.data[i * n * n + jk];
                }
            }
        }
        let mut b = vec![0.0; r * r * n];
        for p in 0..r {
            for q in 0..r {
                for j in 0..n {
                    let w = u[q][j];
                    for k in 0..n {
                        b[(p * r + q) * n + k] += w * a[p * n * n + j * n + k];
                    }
                }
            }
        }
        let mut out = Tensor3::zeros(r);
        for pq in 0..r * r {
            for s in 0..r {
                out.data[pq * r + s] = (0..n).map(|k| u[s][k] * b[pq * n + k]).sum();
            }
        }
        Ok(out)
    }

    /// `Σ_p T[p,·,·]` contracted with `x` in the first mode.
    pub fn contract_first(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for jk in 0..n * n {
                out[jk] += x[i] * self.data[i * n * n + jk];
            }
        }
        out
    }

    pub fn max_asymmetry(&self) -> f64 {
        let s = self.symmetrized();
        self.data
            .iter()
            .zip(&s.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    pub fn add_fourth(&mut self, a: &[f64], w: f64) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = w * a[i] * a[j] * a[k];
                    let base = ((i * n + j) * n + k) * n;
                    for l in 0..n {
                        self.data[base + l] += c * a[l];
                    }
                }
            }
        }
    }

    pub fn sum_of_fourths(vs: &[Vec<f64>]) -> Self {
        let n = vs.first().map_or(0, |v| v.len());
        let mut t = Tensor4::zeros(n);
        for v in vs {
            t.add_fourth(v, 1.0);
        }
        t
    }

    /// `T(u,u,u,u)`.
    pub fn eval(&self, u: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = u[i] * u[j] * u[k];
                    let base = ((i * n + j) * n + k) * n;
                    for l in 0..n {
                        s += c * u[l] * self.data[base + l];
                    }
                }
            }
        }
        s
    }

    /// Multilinear change of coordinates `T(Uᵀ·, Uᵀ·, Uᵀ·, Uᵀ·)`; see [`Tensor3::project`].
    pub fn project(&self, u: &[Vec<f64>]) -> Result<Self> {
        if u.iter().any(|c| c.len() != self.n) {
            return Err(Error::Dimension("projection basis length".into()));
        }
        let mut data = self.data.clone();
        let mut rest = self.n * self.n * self.n;
        for _ in 0..4 {
            data = rotate_contract(&data, self.n, rest, u);
            // The contracted mode of size n is now a trailing mode of size r.
            rest = rest / self.n.max(1) * u.len();
        }
        Ok(Tensor4 { n: u.len(), data })
    }

    /// Average over all 24 index permutations.
    pub fn symmetrized(&self) -> Self {
        let n = self.n;
        let perms = permutations4();
        let mut out = Tensor4::zeros(n);
        let mut ix = [0usize; 4];
        for i in 0..n {
            ix[0] = i;
            for j in 0..n {
                ix[1] = j;
                for k in 0..n {
                    ix[2] = k;
                    for l in 0..n {
                        ix[3] = l;
                        let s: f64 = perms
                            .iter()
                            .map(|p| self.get(ix[p[0]], ix[p[1]], ix[p[2]], ix[p[3]]))
                            .sum();
                        let id = out.idx(i, j, k, l);
                        out.data[id] = s / 24.0;
                    }
                }
            }
        }
        out
    }

    pub fn max_asymmetry(&self) -> f64 {
        let s = self.symmetrized();
        self.data
            .iter()
            .zip(&s.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Contracts the leading mode (size `n`) of a tensor of shape `n × rest`
/// with the rows `u`, placing the new mode last: output shape `rest × r`.
fn rotate_contract(data: &[f64], n: usize, rest: usize, u: &[Vec<f64>]) -> Vec<f64> {
    let r = u.len();
    let mut out = vec![0.0; rest * r];
    for i in 0..n {
        let slab = &data[i * rest..(i + 1) * rest];
        for (p, up) in u.iter().enumerate() {
            let w = up[i];
            if w == 0.0 {
                continue;
            }
            for (t, v) in slab.iter().enumerate() {
                out[t * r + p] += w * v;
            }
        }
    }
    out
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}
