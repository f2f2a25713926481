use lowdeg::model::{Graph, SbmParams};
use lowdeg::spectrum::*;

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect()
}

fn graph_from_mask(n: usize, mask: u32) -> Graph {
    let e: Vec<(usize, usize)> = pairs(n)
        .into_iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, e)| e)
        .collect();
    Graph::from_edges(n, &e).unwrap()
}

fn shape_from_mask(n: usize, mask: u32) -> ShapeGraph {
    let e: Vec<(usize, usize)> = pairs(n)
        .into_iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, e)| e)
        .collect();
    ShapeGraph::new(&e).unwrap()
}

#[test]
fn biased_characters_are_orthonormal_under_the_null() {
    let n = 4;
    let m = pairs(n).len() as u32;
    let p: f64 = 0.3;
    let graphs: Vec<(f64, Graph)> = (0..1u32 << m)
        .map(|mask| {
            let e = mask.count_ones() as i32;
            (
                p.powi(e) * (1.0 - p).powi(m as i32 - e),
                graph_from_mask(n, mask),
            )
        })
        .collect();
    let shapes: Vec<ShapeGraph> = (0..1u32 << m)
        .map(|mask| shape_from_mask(n, mask))
        .collect();
    let chars: Vec<Vec<f64>> = shapes
        .iter()
        .map(|s| {
            graphs
                .iter()
                .map(|(_, g)| biased_character(g, s, p).unwrap())
                .collect()
        })
        .collect();
    for a in 0..shapes.len() {
        for b in a..shapes.len() {
            let ip: f64 = graphs
                .iter()
                .enumerate()
                .map(|(i, (w, _))| w * chars[a][i] * chars[b][i])
                .sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-10, "{a} {b}: {ip}");
        }
    }
}

/// `E_SBM χ_α` by summing over every labeling and every graph on `n` vertices.
fn mu_hat_by_enumeration(alpha: &ShapeGraph, params: &SbmParams) -> f64 {
    let (n, k) = (params.n, params.k);
    let p = params.p();
    let ps = pairs(n);
    let m = ps.len() as u32;
    let labelings = k.pow(n as u32);
    let mut total = 0.0;
    for code in 0..labelings {
        let sigma: Vec<usize> = (0..n).map(|i| code / k.pow(i as u32) % k).collect();
        let probs: Vec<f64> = ps
            .iter()
            .map(|&(a, b)| {
                p * (1.0 + params.eps * (((sigma[a] == sigma[b]) as u8 as f64) - 1.0 / k as f64))
            })
            .collect();
        for mask in 0..1u32 << m {
            let w: f64 = (0..m as usize)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        probs[i]
                    } else {
                        1.0 - probs[i]
                    }
                })
                .product();
            total += w * biased_character(&graph_from_mask(n, mask), alpha, p).unwrap();
        }
    }
    total / labelings as f64
}

#[test]
fn coefficients_match_full_enumeration() {
    let params = SbmParams::new(4, 1.5, 0.9, 3, 0.0).unwrap();
    for mask in [0b1u32, 0b11, 0b1001, 0b100101, 0b111111, 0b011110, 0b1011] {
        let alpha = shape_from_mask(4, mask);
        let got = mu_hat(&alpha, &params).unwrap();
        let want = mu_hat_by_enumeration(&alpha, &params);
        assert!((got - want).abs() < 1e-12, "mask {mask:b}: {got} vs {want}");
    }
}

#[test]
fn cycle_closed_form_matches_label_sum() {
    for k in [2usize, 3, 5] {
        let params = SbmParams::new(50, 3.0, 0.7, k, 0.0).unwrap();
        for t in 3..8 {
            let a = mu_hat(&ShapeGraph::cycle(t), &params).unwrap();
            let b = mu_hat_cycle(t, &params);
            assert!((a - b).abs() <= 1e-12 * b.abs(), "k={k} t={t}");
        }
    }
}

#[test]
fn cycle_terms_count_cycles_of_the_complete_graph() {
    let params = SbmParams::new(30, 3.0, 0.7, 2, 0.0).unwrap();
    let terms = cycle_sum_contribution(&params, 6).unwrap();
    let mut cum = 0.0;
    for w in terms.windows(2) {
        assert!(
            (w[0].ratio - (w[1].t as f64 * w[1].term) / (w[0].t as f64 * w[0].term)).abs() < 1e-12
        );
    }
    for c in &terms {
        let count: f64 = (0..c.t).map(|i| (30 - i) as f64).product::<f64>() / (2 * c.t) as f64;
        let want = count * mu_hat_cycle(c.t, &params).powi(2);
        assert!((c.term - want).abs() <= 1e-10 * want);
        cum += want;
        assert!((c.cumulative - cum).abs() <= 1e-10 * cum);
    }
    assert!(terms.last().unwrap().ratio.is_nan());
    assert!(cycle_sum_contribution(&params, 2).is_err());
}

#[test]
fn automorphism_counts_of_familiar_graphs() {
    let g = |e: &[(usize, usize)]| ShapeGraph::new(e).unwrap();
    assert_eq!(automorphism_count(&g(&[(0, 1)])), 2);
    assert_eq!(automorphism_count(&g(&[(0, 1), (1, 2)])), 2);
    assert_eq!(automorphism_count(&g(&[(0, 1), (0, 2), (0, 3)])), 6);
    assert_eq!(automorphism_count(&g(&[(0, 1), (2, 3)])), 8);
    assert_eq!(
        automorphism_count(&g(&[(0, 1), (1, 2), (0, 2), (3, 4)])),
        12
    );
    assert_eq!(automorphism_count(&shape_from_mask(4, 0b111111)), 24);
    for t in 3..8 {
        assert_eq!(automorphism_count(&ShapeGraph::cycle(t)), 2 * t as u64);
    }
    // Relabeling touched vertices does not matter.
    assert_eq!(automorphism_count(&g(&[(3, 7), (7, 9)])), 2);
}

#[test]
fn shape_enumeration_counts_isomorphism_classes() {
    // Connected graphs with e edges, e = 1..=6.
    let shapes = connected_shapes(6);
    let by_edges: Vec<usize> = (1..=6)
        .map(|e| shapes.iter().filter(|s| s.edge_count() == e).count())
        .collect();
    assert_eq!(by_edges, vec![1, 1, 3, 5, 12, 30]);
    // All graphs without isolated vertices with e edges, e = 1..=4.
    let all = all_shapes(4);
    let by_edges: Vec<usize> = (1..=4)
        .map(|e| all.iter().filter(|s| s.edge_count() == e).count())
        .collect();
    assert_eq!(by_edges, vec![1, 2, 5, 11]);
}

#[test]
fn mass_by_shapes_matches_subset_enumeration() {
    for (n, k, eps) in [(5usize, 2usize, 0.8), (6, 3, 1.2)] {
        let params = SbmParams::new(n, 2.0, eps, k, 0.0).unwrap();
        let a = low_degree_mass_by_size(&params, 4).unwrap();
        let b = low_degree_mass_by_shapes(&params, 4).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(
                (x - y).abs() <= 1e-12 * x.abs().max(1e-12),
                "n={n}: {x} vs {y}"
            );
        }
        assert!(
            (low_degree_norm_bruteforce(&params, 4).unwrap() - a.iter().sum::<f64>()).abs() < 1e-14
        );
    }
}

#[test]
fn shapes_with_a_leaf_have_zero_coefficient() {
    let params = SbmParams::new(20, 3.0, 0.9, 3, 0.0).unwrap();
    for s in all_shapes(5) {
        let mu = mu_hat(&s, &params).unwrap();
        if s.has_degree_one() {
            assert_eq!(mu, 0.0);
        }
    }
}

#[test]
fn guards_and_validation() {
    let params = SbmParams::new(200, 3.0, 0.9, 3, 0.0).unwrap();
    assert!(matches!(
        low_degree_mass_by_size(&params, 6),
        Err(lowdeg::Error::Guard(_))
    ));
    let soft = SbmParams::new(20, 3.0, 0.9, 3, 1.0).unwrap();
    assert!(mu_hat(&ShapeGraph::cycle(3), &soft).is_err());
    assert!(biased_character(&Graph::new(3), &ShapeGraph::cycle(3), 1.0).is_err());
    assert!(ShapeGraph::new(&[(1, 1)]).is_err());
    assert!(ShapeGraph::new(&[(0, 1), (1, 0)]).is_err());
}
