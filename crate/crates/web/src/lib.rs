//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every entry point returns a small JSON string so the page needs no glue
//! beyond what `wasm-bindgen` generates.

use lowdeg::model::{sample_two_communities, SbmParams, TwoParams};
use lowdeg::pipeline::{recover_two_communities, sign_overlap, wigner_demo, TwoKnobs, WignerKnobs};
use lowdeg::rng::seeded;
use lowdeg::spectrum::cycle_sum_contribution;
use wasm_bindgen::prelude::*;

fn fail(e: lowdeg::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "null".to_string()
    }
}

fn nums(xs: impl IntoIterator<Item = f64>) -> String {
    let parts: Vec<String> = xs.into_iter().map(num).collect();
    format!("[{}]", parts.join(","))
}

/// Samples a two-community graph and recovers the partition.
///
/// Returns `{"overlap", "fallback", "edges", "degrees", "labels", "truth"}`.
#[wasm_bindgen]
pub fn two_communities(n: usize, d: f64, eps: f64, seed: u64) -> Result<String, JsError> {
    two_communities_json(n, d, eps, seed).map_err(fail)
}

pub fn two_communities_json(n: usize, d: f64, eps: f64, seed: u64) -> lowdeg::Result<String> {
    let params = TwoParams::new(n, d, eps)?;
    let mut rng = seeded(seed);
    let (graph, truth) = sample_two_communities(&params, &mut rng)?;
    let res = recover_two_communities(&graph, &params, &TwoKnobs::default(), &mut rng)?;
    let degrees = (0..graph.n()).map(|v| graph.degree(v) as f64);
    Ok(format!(
        "{{\"overlap\":{},\"fallback\":{},\"edges\":{},\"delta\":{},\"degrees\":{},\"labels\":{},\"truth\":{}}}",
        num(sign_overlap(&res.labels, &truth)),
        res.fallback,
        graph.num_edges(),
        num(params.delta()),
        nums(degrees),
        nums(res.labels.iter().copied()),
        nums(truth.iter().copied()),
    ))
}

/// Spiked Wigner estimate by self-avoiding walks.
///
/// Returns `{"correlation", "n", "v", "estimate"}` with vertices sorted by `v`
/// and `estimate` the row-major `n × n` matrix in that order.
#[wasm_bindgen]
pub fn wigner(
    n: usize,
    lambda: f64,
    ell: usize,
    colorings: usize,
    seed: u64,
) -> Result<String, JsError> {
    wigner_json(n, lambda, ell, colorings, seed).map_err(fail)
}

pub fn wigner_json(
    n: usize,
    lambda: f64,
    ell: usize,
    colorings: usize,
    seed: u64,
) -> lowdeg::Result<String> {
    let knobs = WignerKnobs {
        palette: None,
        colorings,
    };
    let rep = wigner_demo(n, lambda, ell, &knobs, &mut seeded(seed))?;
    let v = &rep.instance.v;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let grid: Vec<f64> = order
        .iter()
        .flat_map(|&i| order.iter().map(move |&j| (i, j)))
        .map(|(i, j)| rep.estimate[(i, j)])
        .collect();
    Ok(format!(
        "{{\"correlation\":{},\"n\":{},\"v\":{},\"estimate\":{}}}",
        num(rep.correlation),
        n,
        nums(order.iter().map(|&i| v[i])),
        nums(grid),
    ))
}

/// Cycle contributions to the low-degree norm of a block model.
///
/// Returns `{"t": [...], "term": [...], "cumulative": [...], "ratio": [...]}`.
#[wasm_bindgen]
pub fn cycle_spectrum(
    n: usize,
    d: f64,
    eps: f64,
    k: usize,
    max_len: usize,
) -> Result<String, JsError> {
    cycle_spectrum_json(n, d, eps, k, max_len).map_err(fail)
}

pub fn cycle_spectrum_json(
    n: usize,
    d: f64,
    eps: f64,
    k: usize,
    max_len: usize,
) -> lowdeg::Result<String> {
    let params = SbmParams::new(n, d, eps, k, 0.0)?;
    let terms = cycle_sum_contribution(&params, max_len)?;
    Ok(format!(
        "{{\"delta\":{},\"t\":{},\"term\":{},\"cumulative\":{},\"ratio\":{}}}",
        num(params.delta()),
        nums(terms.iter().map(|c| c.t as f64)),
        nums(terms.iter().map(|c| c.term)),
        nums(terms.iter().map(|c| c.cumulative)),
        nums(terms.iter().map(|c| c.ratio)),
    ))
}
