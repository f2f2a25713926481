use std::collections::BTreeMap;

use faer::Mat;

use super::{
    check_palette, extend, rainbow_probability, sum_over_colorings, ColorLayout, Coloring,
    EdgeWeights, Tables,
};
use crate::error::{invalid, Error, Result};
use crate::model::SbmParams;
use crate::rng::{self, Rng};
use crate::tensor::Tensor3;

/// Largest `n` for which the full `n×n×n` star tensor is materialized.
pub const FULL_STAR_LIMIT: usize = 64;

/// Arm tables after `ell` steps: for every color set `S` of size `ell+1`,
/// entry `(v, p)` sums `basis_p(s)·∏ weights` over colorful paths from some
/// source `s` to `v` using exactly the colors `S`.
fn arm_tables<B: super::BlockApply>(
    op: &B,
    lay: &ColorLayout,
    ell: usize,
    basis: &[Vec<f64>],
) -> Tables {
    let n = lay.n();
    let r = basis.len();
    let mut level: Tables = BTreeMap::new();
    for c in 0..lay.palette {
        let rows = lay.block(c);
        if rows.is_empty() {
            continue;
        }
        let mut t = vec![0.0; n * r];
        for row in rows {
            let v = lay.order[row];
            for (p, b) in basis.iter().enumerate() {
                t[row * r + p] = b[v];
            }
        }
        level.insert(1 << c, t);
    }
    for _ in 0..ell {
        level = extend(op, lay, r, &level);
    }
    level
}

/// Colorful star sum for one coloring, contracted in each mode with the
/// vectors of `basis`: entry `(p,q,s)` is `Σ_{ijk} b_p(i) b_q(j) b_s(k) P_ijk`
/// with `P` the normalized colorful star tensor.
pub fn star_tensor_sketch_eval<W: EdgeWeights>(
    w: &W,
    ell: usize,
    coloring: &Coloring,
    basis: &[Vec<f64>],
) -> Result<Tensor3> {
    let n = w.n();
    if coloring.colors.len() != n {
        return Err(Error::Dimension("coloring length differs from n".into()));
    }
    if basis.iter().any(|b| b.len() != n) {
        return Err(Error::Dimension("basis vectors must have length n".into()));
    }
    if ell == 0 {
        return invalid("arm length must be at least 1");
    }
    let palette = coloring.palette;
    check_palette(palette, 3 * ell + 1)?;
    let r = basis.len();
    let lay = ColorLayout::new(coloring);
    let op = w.prepare(&lay);
    let arms = arm_tables(&op, &lay, ell, basis);

    let others = palette - 1;
    let lattice = 1usize << others;
    let all = lattice - 1;
    let mut out = Tensor3::zeros(r);
    let mut h = vec![0.0; lattice * r];
    let mut f: Vec<(usize, usize)> = Vec::new();
    let mut m = vec![0.0; r * r];
    for c in 0..palette {
        // Compressed color sets X = S \ {c} with S ∋ c.
        let compress = |mask: u64| -> usize {
            let low = (mask & ((1u64 << c) - 1)) as usize;
            let high = ((mask >> (c + 1)) as usize) << c;
            low | high
        };
        let sets: Vec<(usize, &Vec<f64>)> = arms
            .iter()
            .filter(|(&mask, _)| mask >> c & 1 == 1)
            .map(|(&mask, t)| (compress(mask), t))
            .collect();
        for row in lay.block(c) {
            f.clear();
            h.iter_mut().for_each(|x| *x = 0.0);
            for (idx, &(x, t)) in sets.iter().enumerate() {
                let fr = &t[row * r..(row + 1) * r];
                if fr.iter().any(|&v| v != 0.0) {
                    f.push((x, idx));
                    h[x * r..(x + 1) * r].copy_from_slice(fr);
                }
            }
            if f.len() < 3 {
                continue;
            }
            // Subset sums h(Z) = Σ_{X ⊆ Z} f(X).
            for b in 0..others {
                let bit = 1 << b;
                for z in 0..lattice {
                    if z & bit != 0 {
                        let (lo, hi) = h.split_at_mut(z * r);
                        let src = &lo[(z ^ bit) * r..(z ^ bit) * r + r];
                        hi[..r].iter_mut().zip(src).for_each(|(a, s)| *a += s);
                    }
                }
            }
            for &(x1, i1) in &f {
                m.iter_mut().for_each(|v| *v = 0.0);
                let mut any = false;
                for &(x2, i2) in &f {
                    if x1 & x2 != 0 {
                        continue;
                    }
                    let rest = all & !(x1 | x2);
                    let f2 = &sets[i2].1[row * r..(row + 1) * r];
                    let h3 = &h[rest * r..(rest + 1) * r];
                    for q in 0..r {
                        if f2[q] == 0.0 {
                            continue;
                        }
                        any = true;
                        let mq = &mut m[q * r..(q + 1) * r];
                        mq.iter_mut().zip(h3).for_each(|(a, b)| *a += f2[q] * b);
                    }
                }
                if !any {
                    continue;
                }
                let f1 = &sets[i1].1[row * r..(row + 1) * r];
                for p in 0..r {
                    if f1[p] == 0.0 {
                        continue;
                    }
                    let o = &mut out.data[p * r * r..(p + 1) * r * r];
                    o.iter_mut().zip(&m).for_each(|(a, b)| *a += f1[p] * b);
                }
            }
        }
    }
    let mut out = out.symmetrized();
    out.scale(1.0 / rainbow_probability(palette, 3 * ell + 1));
    Ok(out)
}

fn identity_basis(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect()
}

/// Colorful star tensor for one coloring, all triples. Entries with repeated
/// indices are zero.
pub fn star_tensor_eval<W: EdgeWeights>(w: &W, ell: usize, coloring: &Coloring) -> Result<Tensor3> {
    let n = w.n();
    if n > FULL_STAR_LIMIT {
        return Err(Error::Guard(format!(
            "full star tensor needs n ≤ {FULL_STAR_LIMIT}, got {n}"
        )));
    }
    star_tensor_sketch_eval(w, ell, coloring, &identity_basis(n))
}

/// Average of [`star_tensor_sketch_eval`] over independent colorings.
pub fn star_tensor_sketch<W: EdgeWeights>(
    w: &W,
    ell: usize,
    palette: usize,
    n_colorings: usize,
    basis: &[Vec<f64>],
    rng: &mut Rng,
) -> Result<Tensor3> {
    if n_colorings == 0 {
        return invalid("need at least one coloring");
    }
    check_palette(palette, 3 * ell + 1)?;
    let n = w.n();
    let seed = rng::child_seed(rng);
    let mut total = Tensor3::zeros(basis.len());
    sum_over_colorings(
        n_colorings,
        seed,
        |r| star_tensor_sketch_eval(w, ell, &Coloring::random(n, palette, r), basis),
        |t| total.add_scaled(&t, 1.0),
    )?;
    total.scale(1.0 / n_colorings as f64);
    Ok(total)
}

/// Color-coding estimate of the full star tensor.
pub fn star_tensor_estimate<W: EdgeWeights>(
    w: &W,
    ell: usize,
    palette: usize,
    n_colorings: usize,
    rng: &mut Rng,
) -> Result<Tensor3> {
    let n = w.n();
    if n > FULL_STAR_LIMIT {
        return Err(Error::Guard(format!(
            "full star tensor needs n ≤ {FULL_STAR_LIMIT}, got {n}"
        )));
    }
    star_tensor_sketch(w, ell, palette, n_colorings, &identity_basis(n), rng)
}

/// Combines estimates of `Σ_s v_s^{⊗3}` and `Σ_s v_s v_sᵀ` into an estimate
/// of `Σ_s w_s^{⊗3}`, using `w_s = v_s + c·1`, `c = 1/(k√(α+1))` and `Σ_s v_s = 0`.
pub fn build_w_tensor(
    star_est: &Tensor3,
    pair_est: &Mat<f64>,
    params: &SbmParams,
) -> Result<Tensor3> {
    let ones = vec![1.0; star_est.n];
    build_w_tensor_in_basis(star_est, pair_est, &ones, params.shift(), params.k)
}

/// Same combination with every mode expressed in some basis: `one` is the
/// all-ones vector in that basis.
pub fn build_w_tensor_in_basis(
    star_est: &Tensor3,
    pair_est: &Mat<f64>,
    one: &[f64],
    shift: f64,
    k: usize,
) -> Result<Tensor3> {
    let n = star_est.n;
    if pair_est.nrows() != n || pair_est.ncols() != n || one.len() != n {
        return Err(Error::Dimension(
            "star and pair estimates disagree in size".into(),
        ));
    }
    let mut out = star_est.clone();
    let c3 = k as f64 * shift.powi(3);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let pair = pair_est[(i, j)] * one[l]
                    + pair_est[(i, l)] * one[j]
                    + pair_est[(j, l)] * one[i];
                let id = out.idx(i, j, l);
                out.data[id] += shift * pair + c3 * one[i] * one[j] * one[l];
            }
        }
    }
    Ok(out)
}
