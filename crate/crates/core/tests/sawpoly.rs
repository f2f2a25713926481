#![allow(clippy::needless_range_loop)]

use lowdeg::model::{sample_mixed_membership, Graph, SbmParams};
use lowdeg::rng::seeded;
use lowdeg::sawpoly::*;
use rand::Rng as _;

fn random_weights(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = seeded(seed);
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..i {
            let x = r.random::<f64>() * 2.0 - 1.0;
            w[i][j] = x;
            w[j][i] = x;
        }
    }
    w
}

/// Independent enumerator: odometer over all interior tuples in [n]^(ℓ−1).
fn saw_odometer(w: &[Vec<f64>], ell: usize, i: usize, j: usize) -> f64 {
    let n = w.len();
    let m = ell - 1;
    let mut t = vec![0usize; m];
    let mut total = 0.0;
    loop {
        // Last position varies fastest, so tuples come in lexicographic order.
        let mut seq = vec![i];
        seq.extend_from_slice(&t);
        seq.push(j);
        let mut distinct = true;
        for a in 0..seq.len() {
            for b in 0..a {
                if seq[a] == seq[b] {
                    distinct = false;
                }
            }
        }
        if distinct {
            total += seq.windows(2).map(|e| w[e[0]][e[1]]).product::<f64>();
        }
        let mut p = m;
        loop {
            if p == 0 {
                return total;
            }
            p -= 1;
            t[p] += 1;
            if t[p] < n {
                break;
            }
            t[p] = 0;
        }
    }
}

/// Independent star enumerator: odometer over (center, arm interiors).
fn star_odometer(w: &[Vec<f64>], ell: usize, term: [usize; 3]) -> f64 {
    let n = w.len();
    let m = 3 * ell - 2;
    let mut t = vec![0usize; m];
    let mut total = 0.0;
    loop {
        let mut verts: Vec<usize> = t.clone();
        verts.extend_from_slice(&term);
        let mut distinct = true;
        for a in 0..verts.len() {
            for b in 0..a {
                if verts[a] == verts[b] {
                    distinct = false;
                }
            }
        }
        if distinct {
            let mut prod = 1.0;
            for arm in 0..3 {
                let mut path = vec![t[0]];
                path.extend_from_slice(&t[1 + arm * (ell - 1)..1 + (arm + 1) * (ell - 1)]);
                path.push(term[arm]);
                prod *= path.windows(2).map(|e| w[e[0]][e[1]]).product::<f64>();
            }
            total += prod;
        }
        let mut p = 0;
        loop {
            if p == m {
                return total;
            }
            t[p] += 1;
            if t[p] < n {
                break;
            }
            t[p] = 0;
            p += 1;
        }
    }
}

fn all_colorings(n: usize, palette: usize) -> impl Iterator<Item = Coloring> {
    let total = palette.pow(n as u32);
    (0..total).map(move |mut code| {
        let mut colors = vec![0u8; n];
        for c in colors.iter_mut() {
            *c = (code % palette) as u8;
            code /= palette;
        }
        Coloring::new(palette, colors).unwrap()
    })
}

#[test]
fn single_edge_path_is_the_weight() {
    let w = random_weights(5, 1);
    let f = FnWeights {
        n: 5,
        f: |a: usize, b: usize| w[a][b],
    };
    assert_eq!(saw_matrix_bruteforce(&f, 1, 1, 3).unwrap(), w[1][3]);
}

#[test]
fn length_two_path_on_three_vertices() {
    let w = random_weights(3, 2);
    let f = FnWeights {
        n: 3,
        f: |a: usize, b: usize| w[a][b],
    };
    assert_eq!(
        saw_matrix_bruteforce(&f, 2, 0, 2).unwrap(),
        w[0][1] * w[1][2]
    );
}

#[test]
fn brute_force_matches_odometer() {
    let w = random_weights(6, 3);
    let f = FnWeights {
        n: 6,
        f: |a: usize, b: usize| w[a][b],
    };
    for i in 0..6 {
        for j in 0..6 {
            let a = saw_matrix_bruteforce(&f, 3, i, j).unwrap();
            let b = if i == j {
                0.0
            } else {
                saw_odometer(&w, 3, i, j)
            };
            assert_eq!(a.to_bits(), b.to_bits(), "({i},{j})");
        }
    }
}

#[test]
fn star_brute_force_matches_odometer() {
    let w = random_weights(7, 4);
    let f = FnWeights {
        n: 7,
        f: |a: usize, b: usize| w[a][b],
    };
    for term in [[0, 1, 2], [3, 5, 6], [6, 0, 4]] {
        let a = star_tensor_bruteforce(&f, 2, term[0], term[1], term[2]).unwrap();
        let b = star_odometer(&w, 2, term);
        assert!(
            (a - b).abs() < 1e-12 * (1.0 + b.abs()),
            "{term:?}: {a} vs {b}"
        );
    }
}

#[test]
fn unit_star_on_four_vertices() {
    let w = random_weights(4, 5);
    let f = FnWeights {
        n: 4,
        f: |a: usize, b: usize| w[a][b],
    };
    let v = star_tensor_bruteforce(&f, 1, 0, 1, 2).unwrap();
    assert!((v - w[0][3] * w[1][3] * w[2][3]).abs() < 1e-15);
    let perm = star_tensor_bruteforce(&f, 1, 2, 0, 1).unwrap();
    assert!((v - perm).abs() < 1e-15);
}

#[test]
fn brute_force_guard() {
    let f = FnWeights {
        n: 200,
        f: |_: usize, _: usize| 1.0,
    };
    assert!(matches!(
        saw_matrix_bruteforce(&f, 5, 0, 1),
        Err(lowdeg::Error::Guard(_))
    ));
}

#[test]
fn complete_graph_path_count() {
    let f = FnWeights {
        n: 5,
        f: |_: usize, _: usize| 1.0,
    };
    let mut total = faer::Mat::<f64>::zeros(5, 5);
    let cols: Vec<_> = all_colorings(5, 3).collect();
    for c in &cols {
        total += colorful_path_eval(&f, 2, c).unwrap();
    }
    for i in 0..5 {
        for j in 0..5 {
            let want = if i == j { 0.0 } else { 3.0 };
            assert!((total[(i, j)] / cols.len() as f64 - want).abs() < 1e-9);
        }
    }
}

#[test]
fn exhaustive_coloring_average_is_exact_for_paths() {
    let n = 7;
    let w = random_weights(n, 6);
    let f = FnWeights {
        n,
        f: |a: usize, b: usize| w[a][b],
    };
    let mut total = faer::Mat::<f64>::zeros(n, n);
    let mut count = 0;
    for c in all_colorings(n, 4) {
        total += colorful_path_eval(&f, 3, &c).unwrap();
        count += 1;
    }
    for i in 0..n {
        for j in 0..n {
            let want = saw_matrix_bruteforce(&f, 3, i, j).unwrap();
            assert!(
                (total[(i, j)] / count as f64 - want).abs() < 1e-9,
                "({i},{j})"
            );
        }
    }
}

#[test]
fn exhaustive_coloring_average_is_exact_for_stars() {
    let n = 7;
    let w = random_weights(n, 7);
    let f = FnWeights {
        n,
        f: |a: usize, b: usize| w[a][b],
    };
    let mut total = lowdeg::tensor::Tensor3::zeros(n);
    let mut count = 0;
    for c in all_colorings(n, 4) {
        total.add_scaled(&star_tensor_eval(&f, 1, &c).unwrap(), 1.0);
        count += 1;
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let want = star_tensor_bruteforce(&f, 1, i, j, k).unwrap();
                assert!(
                    (total.get(i, j, k) / count as f64 - want).abs() < 1e-9,
                    "({i},{j},{k})"
                );
            }
        }
    }
}

#[test]
fn graph_and_dense_weights_agree() {
    let params = SbmParams::new(40, 6.0, 0.8, 3, 0.0).unwrap();
    let (g, _) = sample_mixed_membership(&params, &mut seeded(8)).unwrap();
    let p = params.p();
    let sparse = CenteredEdges::new(&g, p);
    let mut a = g.adjacency();
    for i in 0..40 {
        for j in 0..40 {
            a[(i, j)] -= p;
        }
    }
    let dense = DenseWeights::new(&a);
    let generic = FnWeights {
        n: 40,
        f: |u: usize, v: usize| sparse.weight(u, v),
    };
    let c = Coloring::random(40, 7, &mut seeded(9));
    let x = colorful_path_eval(&sparse, 4, &c).unwrap();
    let y = colorful_path_eval(&dense, 4, &c).unwrap();
    let z = colorful_path_eval(&generic, 4, &c).unwrap();
    for i in 0..40 {
        for j in 0..40 {
            assert!((x[(i, j)] - y[(i, j)]).abs() < 1e-9 * (1.0 + x[(i, j)].abs()));
            assert!((x[(i, j)] - z[(i, j)]).abs() < 1e-9 * (1.0 + x[(i, j)].abs()));
        }
    }
}

#[test]
fn zero_weights_give_zero_star() {
    let f = FnWeights {
        n: 8,
        f: |_: usize, _: usize| 0.0,
    };
    let c = Coloring::random(8, 7, &mut seeded(10));
    let t = star_tensor_eval(&f, 2, &c).unwrap();
    assert!(t.data.iter().all(|&x| x == 0.0));
}

#[test]
fn palette_too_small_is_rejected() {
    let g = Graph::new(10);
    let w = CenteredEdges::new(&g, 0.1);
    let c = Coloring::random(10, 3, &mut seeded(11));
    assert!(colorful_path_eval(&w, 3, &c).is_err());
    assert!(star_tensor_eval(&w, 1, &c).is_err());
}
