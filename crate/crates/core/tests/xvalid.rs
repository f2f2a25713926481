use lowdeg::model::{moment_constants, sample_mixed_membership, Graph, SbmParams};
use lowdeg::rng::seeded;
use lowdeg::xvalid::*;
use proptest::prelude::*;

/// Distinct-index sums by explicit enumeration, divided by the same constants.
fn naive_moments(graph: &Graph, split: &HoldoutSplit, x: &[f64], params: &SbmParams) -> [f64; 3] {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let x: Vec<f64> = x.iter().map(|v| v / norm).collect();
    let p = params.p();
    let m = split.rest.len();
    let mut acc = [0.0; 3];
    for &a in &split.holdout {
        let z: Vec<f64> = (0..m)
            .map(|i| ((graph.has_edge(a, split.rest[i]) as u8 as f64) - p) * x[i])
            .collect();
        for i in 0..m {
            for j in 0..m {
                if j == i {
                    continue;
                }
                acc[0] += z[i] * z[j];
                for l in 0..m {
                    if l == i || l == j {
                        continue;
                    }
                    acc[1] += z[i] * z[j] * z[l];
                    for t in 0..m {
                        if t != i && t != j && t != l {
                            acc[2] += z[i] * z[j] * z[l] * z[t];
                        }
                    }
                }
            }
        }
    }
    let h = split.holdout.len() as f64;
    acc.iter_mut().for_each(|v| *v /= h);
    let c = moment_constants(params.k, params.alpha);
    let b = params.eps * p;
    let sum2 = acc[0] / (b * b * c.c2);
    let sum3 = acc[1] / (b.powi(3) * c.c3);
    let sum4 = (acc[2] / b.powi(4) - 3.0 * c.c22 * sum2 * sum2) / c.c4;
    [sum2, sum3, sum4]
}

#[test]
fn power_sum_identities_match_explicit_enumeration() {
    for (seed, k, alpha) in [(1u64, 3usize, 0.0), (2, 4, 1.0), (3, 5, 0.5)] {
        let params = SbmParams::new(18, 6.0, 0.8, k, alpha).unwrap();
        let (g, _) = sample_mixed_membership(&params, &mut seeded(seed)).unwrap();
        let mut r = seeded(seed + 10);
        let (split, _) = holdout_split(&g, 0.3, &mut r).unwrap();
        let x = lowdeg::linalg::gaussian_vec(split.rest.len(), &mut r);
        let got = estimate_moments(&split, &x, &params).unwrap();
        let want = naive_moments(&g, &split, &x, &params);
        for (a, b) in [got.sum2, got.sum3, got.sum4].iter().zip(&want) {
            assert!(
                (a - b).abs() <= 1e-8 * b.abs().max(1.0),
                "k={k}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn shifted_statistics_expand_the_binomials() {
    let e = MomentEstimates {
        sum2: 0.7,
        sum3: -0.2,
        sum4: 0.4,
        offset: 0.3,
        k: 3,
        v_norm2: 2.0,
        w_norm2: 3.0,
    };
    // Σ_s (u_s + b)^m for a vector u with the given power sums and Σ u_s = 0.
    let b: f64 = 0.3;
    let w3 = -0.2 + 3.0 * b * 0.7 + 3.0 * b.powi(3);
    let w4 = 0.4 + 4.0 * b * -0.2 + 6.0 * b * b * 0.7 + 3.0 * b.powi(4);
    assert!((e.s3_w() - w3 / 3f64.powf(1.5)).abs() < 1e-12);
    assert!((e.s4_w() - w4 / 9.0).abs() < 1e-12);
    assert!((e.s3() + 0.2 / 2f64.powf(1.5)).abs() < 1e-12);
    assert!((e.s4() - 0.1).abs() < 1e-12);
}

proptest! {
    #[test]
    fn holdout_split_partitions_vertices_and_edges(seed in 0u64..2000, eta in 0.05f64..0.49) {
        let params = SbmParams::new(60, 8.0, 0.5, 3, 0.0).unwrap();
        let (g, _) = sample_mixed_membership(&params, &mut seeded(seed)).unwrap();
        let (split, induced) = holdout_split(&g, eta, &mut seeded(seed + 1)).unwrap();
        prop_assert_eq!(split.holdout.len(), (eta * 60.0).ceil() as usize);
        let mut all: Vec<usize> = split.holdout.iter().chain(&split.rest).cloned().collect();
        all.sort();
        prop_assert_eq!(all, (0..60).collect::<Vec<_>>());
        prop_assert_eq!(induced.n(), split.rest.len());
        prop_assert_eq!(split.bipartite_edges() + split.holdout_internal_edges() + induced.num_edges(), g.num_edges());
        for (a, &v) in split.holdout.iter().enumerate() {
            for &i in split.cross_neighbors(a) {
                prop_assert!(g.has_edge(v, split.rest[i as usize]));
            }
        }
    }
}

#[test]
fn invalid_inputs() {
    let g = Graph::new(20);
    let mut r = seeded(1);
    assert!(holdout_split(&g, 0.5, &mut r).is_err());
    assert!(holdout_split(&g, 0.0, &mut r).is_err());
    let params = SbmParams::new(20, 2.0, 0.5, 3, 0.0).unwrap();
    let (split, _) = holdout_split(&g, 0.2, &mut r).unwrap();
    assert!(estimate_moments(&split, &[1.0; 3], &params).is_err());
    assert!(estimate_moments(&split, &vec![0.0; split.rest.len()], &params).is_err());
}
