use super::EdgeWeights;
use crate::error::{invalid, Error, Result};

/// Enumeration budget for the exact brute-force sums.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

fn guard(n: usize, free: usize) -> Result<()> {
    let work = (n as f64).powi(free as i32);
    if work > BRUTE_FORCE_LIMIT {
        return Err(Error::Guard(format!(
            "n^{free} = {work:.3e} exceeds {BRUTE_FORCE_LIMIT:.0e}"
        )));
    }
    Ok(())
}

/// Exact sum over self-avoiding paths of length `ell` from `i` to `j` in the
/// complete graph of the product of edge weights.
pub fn saw_matrix_bruteforce<W: EdgeWeights>(w: &W, ell: usize, i: usize, j: usize) -> Result<f64> {
    let n = w.n();
    if ell == 0 {
        return invalid("path length must be at least 1");
    }
    if i >= n || j >= n {
        return invalid("endpoint out of range");
    }
    guard(n, ell - 1)?;
    if i == j {
        return Ok(0.0);
    }
    let mut used = vec![false; n];
    used[i] = true;
    used[j] = true;
    let mut total = 0.0;
    let mut buf = Vec::new();
    for_each_tuple(n, ell - 1, &mut used, &mut buf, &mut |t: &[usize]| {
        let mut prod = 1.0;
        let mut prev = i;
        for &m in t {
            prod *= w.weight(prev, m);
            prev = m;
        }
        total += prod * w.weight(prev, j);
    });
    Ok(total)
}

/// Enumerates the ordered tuples of distinct unused vertices of the given
/// length, calling `f` with each tuple.
fn for_each_tuple(
    n: usize,
    len: usize,
    used: &mut [bool],
    buf: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]),
) {
    if buf.len() == len {
        f(buf);
        return;
    }
    for m in 0..n {
        if used[m] {
            continue;
        }
        used[m] = true;
        buf.push(m);
        for_each_tuple(n, len, used, buf, f);
        buf.pop();
        used[m] = false;
    }
}

/// Exact sum over long-armed stars with terminals `i, j, k`: three
/// vertex-disjoint `ell`-edge paths from a common center. Zero unless the
/// terminals are distinct.
pub fn star_tensor_bruteforce<W: EdgeWeights>(
    w: &W,
    ell: usize,
    i: usize,
    j: usize,
    k: usize,
) -> Result<f64> {
    let n = w.n();
    if ell == 0 {
        return invalid("arm length must be at least 1");
    }
    if i >= n || j >= n || k >= n {
        return invalid("terminal out of range");
    }
    guard(n, 3 * ell - 2)?;
    if i == j || j == k || i == k {
        return Ok(0.0);
    }
    let mut used = vec![false; n];
    used[i] = true;
    used[j] = true;
    used[k] = true;
    let mut total = 0.0;
    let mut buf = Vec::new();
    // Tuple layout: center, then the interior vertices of each arm ordered from the center outwards.
    for_each_tuple(n, 3 * ell - 2, &mut used, &mut buf, &mut |t: &[usize]| {
        let center = t[0];
        let mut prod = 1.0;
        for (arm, &term) in [i, j, k].iter().enumerate() {
            let mut prev = center;
            for step in 0..ell - 1 {
                let next = t[1 + arm * (ell - 1) + step];
                prod *= w.weight(prev, next);
                prev = next;
            }
            prod *= w.weight(prev, term);
        }
        total += prod;
    });
    Ok(total)
}
