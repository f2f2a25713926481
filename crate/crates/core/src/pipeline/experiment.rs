//! Parameter sweeps driven by a `key = value` configuration.
//!
//! Recognised keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `algorithm` | list of `two`, `mm`, `matrix`, `wigner` |
//! | `trials` | trials per grid point (default 1) |
//! | `seed` | base seed (default 0) |
//! | `n`, `d`, `eps`, `k`, `alpha`, `ell` | grid lists |
//! | `ks_ratio` | list of `ε²d` over its Kesten–Stigum value; replaces `eps` |
//! | `lambda` | grid list for `wigner`, reported in the `eps` column |
//! | `timing` | `false` leaves `runtime_ms` empty so output is reproducible |
//!
//! plus the knob keys read by [`two_knobs`], [`matrix_knobs`], [`mixed_knobs`]
//! and [`wigner_knobs`]. Any grid list given as an empty value yields no rows.

use std::io::Write;
use std::time::Instant;

use rand::Rng as _;

use super::{
    par_map_range, recover_matrix_mm, recover_mixed_membership, recover_two_communities,
    wigner_demo, Branch, MatrixKnobs, MixedKnobs, TwoKnobs, WignerKnobs,
};
use crate::error::{invalid, Error, Result};
use crate::io::Config;
use crate::linalg;
use crate::model::{self, community_vectors, LabelMatrix, SbmParams, TwoParams};
use crate::rng;
use crate::rounding::CleanupMode;

pub const COLUMNS: [&str; 14] = [
    "trial",
    "algorithm",
    "n",
    "d",
    "eps",
    "k",
    "alpha",
    "ell",
    "delta",
    "metric_name",
    "metric_value",
    "seed",
    "runtime_ms",
    "status",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Two,
    Mixed,
    Matrix,
    Wigner,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Two => "two",
            Algorithm::Mixed => "mm",
            Algorithm::Matrix => "matrix",
            Algorithm::Wigner => "wigner",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two" | "recover2" => Ok(Algorithm::Two),
            "mm" | "mixed" | "recover-mm" => Ok(Algorithm::Mixed),
            "matrix" | "recover-matrix" => Ok(Algorithm::Matrix),
            "wigner" => Ok(Algorithm::Wigner),
            _ => invalid(format!("unknown algorithm {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub trial: usize,
    pub algorithm: Algorithm,
    pub n: usize,
    pub d: Option<f64>,
    pub eps: f64,
    pub k: usize,
    pub alpha: f64,
    pub ell: usize,
    pub delta: Option<f64>,
    pub metric_name: String,
    pub metric_value: f64,
    pub seed: u64,
    pub runtime_ms: Option<f64>,
    pub status: String,
}

/// One grid point: everything but the trial index and seed.
#[derive(Clone, Debug)]
struct Point {
    algorithm: Algorithm,
    n: usize,
    d: f64,
    eps: f64,
    k: usize,
    alpha: f64,
    ell: usize,
}

fn list<T: std::str::FromStr + Clone>(cfg: &Config, key: &str, default: &[T]) -> Result<Vec<T>> {
    Ok(cfg.get_list(key)?.unwrap_or_else(|| default.to_vec()))
}

fn default_ell(a: Algorithm) -> usize {
    match a {
        Algorithm::Wigner => 6,
        _ => 5,
    }
}

fn grid(cfg: &Config) -> Result<Vec<Point>> {
    let algorithms: Vec<Algorithm> = list(cfg, "algorithm", &[Algorithm::Two])?;
    let ns: Vec<usize> = list(cfg, "n", &[1000])?;
    let ds: Vec<f64> = list(cfg, "d", &[5.0])?;
    let ks_ratio: Option<Vec<f64>> = cfg.get_list("ks_ratio")?;
    let epss: Vec<f64> = list(cfg, "eps", &[0.9])?;
    let lambdas: Vec<f64> = list(cfg, "lambda", &[1.5])?;
    let ks: Vec<usize> = list(cfg, "k", &[3])?;
    let alphas: Vec<f64> = list(cfg, "alpha", &[0.0])?;
    let ells: Option<Vec<usize>> = cfg.get_list("ell")?;
    let mut out = Vec::new();
    for &algorithm in &algorithms {
        let ells = ells.clone().unwrap_or_else(|| vec![default_ell(algorithm)]);
        let (ks, alphas) = match algorithm {
            Algorithm::Two | Algorithm::Wigner => (vec![2], vec![0.0]),
            _ => (ks.clone(), alphas.clone()),
        };
        let ds = if algorithm == Algorithm::Wigner {
            vec![f64::NAN]
        } else {
            ds.clone()
        };
        for &n in &ns {
            for &d in &ds {
                for &k in &ks {
                    for &alpha in &alphas {
                        let mut biases = Vec::new();
                        if algorithm == Algorithm::Wigner {
                            biases.extend(&lambdas);
                        } else if let Some(rs) = &ks_ratio {
                            let ks_value = if algorithm == Algorithm::Two {
                                1.0
                            } else {
                                (k as f64 * (alpha + 1.0)).powi(2)
                            };
                            biases.extend(rs.iter().map(|r| (r * ks_value / d).sqrt()));
                        } else {
                            biases.extend(&epss);
                        }
                        for &eps in &biases {
                            for &ell in &ells {
                                out.push(Point {
                                    algorithm,
                                    n,
                                    d,
                                    eps,
                                    k,
                                    alpha,
                                    ell,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn two_knobs(cfg: &Config) -> Result<TwoKnobs> {
    let d = TwoKnobs::default();
    Ok(TwoKnobs {
        ell: cfg.get_or("ell", d.ell)?,
        palette: cfg.get("palette")?.or(d.palette),
        colorings: cfg.get_or("colorings", d.colorings)?,
        delta_prime: cfg.get("delta_prime")?.or(d.delta_prime),
        tol: cfg.get_or("tol", d.tol)?,
        max_iter: cfg.get_or("max_iter", d.max_iter)?,
        max_residual: cfg.get_or("max_residual", d.max_residual)?,
    })
}

pub fn matrix_knobs(cfg: &Config) -> Result<MatrixKnobs> {
    let d = MatrixKnobs::default();
    Ok(MatrixKnobs {
        ell: cfg.get_or("ell", d.ell)?,
        palette: cfg.get("palette")?.or(d.palette),
        colorings: cfg.get_or("colorings", d.colorings)?,
        top_r: cfg.get("top_r")?.or(d.top_r),
    })
}

pub fn mixed_knobs(cfg: &Config) -> Result<MixedKnobs> {
    let d = MixedKnobs::default();
    let branch = match cfg.raw("branch") {
        None | Some("auto") => None,
        Some("tiny") => Some(Branch::Tiny),
        Some("small") => Some(Branch::Small),
        Some("large") => Some(Branch::Large),
        Some(b) => return invalid(format!("unknown branch {b:?}")),
    };
    let cleanup = match cfg.raw("cleanup") {
        None | Some("nearest") => CleanupMode::Nearest,
        Some("minnorm") => CleanupMode::MinNorm {
            delta: cfg.get_or("cleanup_delta", 0.1)?,
        },
        Some(c) => return invalid(format!("unknown cleanup mode {c:?}")),
    };
    let mut solve = d.solve.clone();
    solve.tol = cfg.get_or("solve_tol", solve.tol)?;
    solve.max_iter = cfg.get_or("solve_max_iter", solve.max_iter)?;
    Ok(MixedKnobs {
        eta: cfg.get_or("eta", d.eta)?,
        large_cutoff: cfg.get_or("large_cutoff", d.large_cutoff)?,
        tiny_exponent: cfg.get_or("tiny_exponent", d.tiny_exponent)?,
        theta: cfg.get_or("theta", d.theta)?,
        matrix: matrix_knobs(cfg)?,
        tiny_top_r: cfg.get("tiny_top_r")?.or(d.tiny_top_r),
        star_ell: cfg.get_or("star_ell", d.star_ell)?,
        star_palette: cfg.get("star_palette")?.or(d.star_palette),
        star_colorings: cfg.get_or("star_colorings", d.star_colorings)?,
        sketch_dim: cfg.get("sketch_dim")?.or(d.sketch_dim),
        tensor_delta: cfg.get("tensor_delta")?.or(d.tensor_delta),
        contractions: cfg.get_or("contractions", d.contractions)?,
        top_dim: cfg.get_or("top_dim", d.top_dim)?,
        solve,
        cleanup,
        branch,
    })
}

pub fn wigner_knobs(cfg: &Config) -> Result<WignerKnobs> {
    let d = WignerKnobs::default();
    Ok(WignerKnobs {
        palette: cfg.get("palette")?.or(d.palette),
        colorings: cfg.get_or("colorings", d.colorings)?,
    })
}

/// `(⟨ỹ, y⟩ / n)²`.
pub fn sign_overlap(estimate: &[f64], truth: &[f64]) -> f64 {
    let n = truth.len().max(1) as f64;
    (linalg::dot(estimate, truth) / n).powi(2)
}

/// `max_s ⟨x, v_s/‖v_s‖⟩² / ‖x‖²` over the centered community vectors.
pub fn best_community_overlap(x: &[f64], labels: &LabelMatrix, alpha: f64) -> f64 {
    let xn = linalg::dot(x, x);
    if xn == 0.0 {
        return 0.0;
    }
    community_vectors(labels, alpha)
        .v
        .iter()
        .map(|v| {
            let vn = linalg::dot(v, v);
            if vn == 0.0 {
                0.0
            } else {
                linalg::dot(x, v).powi(2) / (vn * xn)
            }
        })
        .fold(0.0, f64::max)
}

/// Metrics of one trial, or the failure message.
type Outcome = std::result::Result<(Vec<(&'static str, f64)>, String), Error>;

fn run_point(point: &Point, cfg: &Config, seed: u64) -> Outcome {
    let mut r = rng::seeded(seed);
    match point.algorithm {
        Algorithm::Two => {
            let params = TwoParams::new(point.n, point.d, point.eps)?;
            let knobs = TwoKnobs {
                ell: point.ell,
                ..two_knobs(cfg)?
            };
            let (graph, y) = model::sample_two_communities(&params, &mut r)?;
            let res = recover_two_communities(&graph, &params, &knobs, &mut r)?;
            let status = if res.fallback {
                "fallback:projection"
            } else {
                "ok"
            };
            Ok((
                vec![("overlap", sign_overlap(&res.labels, &y))],
                status.into(),
            ))
        }
        Algorithm::Matrix => {
            let params = SbmParams::new(point.n, point.d, point.eps, point.k, point.alpha)?;
            let knobs = MatrixKnobs {
                ell: point.ell,
                ..matrix_knobs(cfg)?
            };
            let (graph, labels) = model::sample_mixed_membership(&params, &mut r)?;
            let res = recover_matrix_mm(&graph, &params, &knobs, &mut r)?;
            Ok((
                vec![(
                    "best_overlap",
                    best_community_overlap(&res.x, &labels, point.alpha),
                )],
                "ok".into(),
            ))
        }
        Algorithm::Mixed => {
            let params = SbmParams::new(point.n, point.d, point.eps, point.k, point.alpha)?;
            let mut knobs = mixed_knobs(cfg)?;
            knobs.matrix.ell = point.ell;
            let (graph, labels) = model::sample_mixed_membership(&params, &mut r)?;
            let res = recover_mixed_membership(&graph, &params, &knobs, &mut r)?;
            let c = model::corr(&labels, &res.labels)?;
            let best = 1.0 / params.collision_t() - 1.0 / params.k as f64;
            let status = match &res.fallback {
                None => format!("ok:{}", res.branch.name()),
                Some(why) => format!("fallback:{}:{why}", res.branch.name()),
            };
            Ok((
                vec![
                    ("corr", c),
                    ("corr_ratio", if best > 0.0 { c / best } else { f64::NAN }),
                ],
                status,
            ))
        }
        Algorithm::Wigner => {
            let knobs = wigner_knobs(cfg)?;
            let rep = wigner_demo(point.n, point.eps, point.ell, &knobs, &mut r)?;
            Ok((vec![("correlation", rep.correlation)], "ok".into()))
        }
    }
}

fn point_delta(p: &Point) -> Option<f64> {
    match p.algorithm {
        Algorithm::Two => Some(
            TwoParams {
                n: p.n,
                d: p.d,
                eps: p.eps,
            }
            .delta(),
        ),
        Algorithm::Wigner => None,
        _ => Some(
            SbmParams {
                n: p.n,
                d: p.d,
                eps: p.eps,
                k: p.k,
                alpha: p.alpha,
            }
            .delta(),
        ),
    }
}

/// Runs every trial of the grid in `cfg`. Trial seeds depend only on the base
/// seed and the row position, so the result does not depend on the worker count.
pub fn run_experiment(cfg: &Config) -> Result<Vec<Row>> {
    let seed: u64 = cfg.get_or("seed", 0)?;
    let trials: usize = cfg.get_or("trials", 1)?;
    let timing: bool = cfg.get_or("timing", true)?;
    let points = grid(cfg)?;
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..trials).map(move |t| (p, t)))
        .collect();
    let results = par_map_range(0..jobs.len(), |j| {
        let (p, trial) = jobs[j];
        let point = &points[p];
        let trial_seed = rng::stream(seed, j as u64).random::<u64>();
        let start = Instant::now();
        let outcome = run_point(point, cfg, trial_seed);
        let runtime = timing.then(|| start.elapsed().as_secs_f64() * 1e3);
        let base = Row {
            trial,
            algorithm: point.algorithm,
            n: point.n,
            d: (point.algorithm != Algorithm::Wigner).then_some(point.d),
            eps: point.eps,
            k: point.k,
            alpha: point.alpha,
            ell: point.ell,
            delta: point_delta(point),
            metric_name: String::new(),
            metric_value: f64::NAN,
            seed: trial_seed,
            runtime_ms: runtime,
            status: String::new(),
        };
        match outcome {
            Ok((metrics, status)) => metrics
                .into_iter()
                .map(|(name, value)| Row {
                    metric_name: name.into(),
                    metric_value: value,
                    status: status.clone(),
                    ..base.clone()
                })
                .collect::<Vec<_>>(),
            Err(e) => vec![Row {
                metric_name: "none".into(),
                status: format!("error:{e}"),
                ..base
            }],
        }
    });
    Ok(results.into_iter().flatten().collect())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_rows(rows: &[Row], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let e = |e: csv::Error| Error::Parse(e.to_string());
    out.write_record(COLUMNS).map_err(e)?;
    for r in rows {
        out.write_record([
            r.trial.to_string(),
            r.algorithm.name().to_string(),
            r.n.to_string(),
            opt(r.d),
            r.eps.to_string(),
            r.k.to_string(),
            r.alpha.to_string(),
            r.ell.to_string(),
            opt(r.delta),
            r.metric_name.clone(),
            r.metric_value.to_string(),
            r.seed.to_string(),
            opt(r.runtime_ms),
            r.status.clone(),
        ])
        .map_err(e)?;
    }
    out.flush()?;
    Ok(())
}

/// Mean of `metric` per grid point, in grid order.
pub fn mean_by_point(rows: &[Row], metric: &str) -> Vec<f64> {
    let mut out: Vec<(String, f64, usize)> = Vec::new();
    for r in rows.iter().filter(|r| r.metric_name == metric) {
        let key = format!(
            "{}|{}|{:?}|{}|{}|{}|{}",
            r.algorithm.name(),
            r.n,
            r.d,
            r.eps,
            r.k,
            r.alpha,
            r.ell
        );
        match out.iter_mut().find(|(k, _, _)| *k == key) {
            Some(e) => {
                e.1 += r.metric_value;
                e.2 += 1;
            }
            None => out.push((key, r.metric_value, 1)),
        }
    }
    out.into_iter().map(|(_, s, c)| s / c as f64).collect()
}
