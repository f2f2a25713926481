use lowdeg::linalg;
use lowdeg::rng::seeded;
use lowdeg::tensor::{Tensor3, Tensor4};
use lowdeg::tensordecomp::*;
use proptest::prelude::*;

fn random_orthonormal(n: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut basis = Vec::new();
    linalg::pad_orthonormal(&mut basis, n, m, &mut seeded(seed));
    basis
}

fn matched(found: &[Vec<f64>], truth: &[Vec<f64>], threshold: f64) -> usize {
    truth
        .iter()
        .filter(|a| found.iter().any(|b| linalg::dot(a, b).abs() >= threshold))
        .count()
}

proptest! {
    #[test]
    fn tensor_evaluation_and_symmetrization(n in 2usize..5, seed in 0u64..2000) {
        let mut r = seeded(seed);
        let vs: Vec<Vec<f64>> = (0..3).map(|_| linalg::gaussian_vec(n, &mut r)).collect();
        let t = Tensor4::sum_of_fourths(&vs);
        let u = linalg::gaussian_vec(n, &mut r);
        let want: f64 = vs.iter().map(|v| linalg::dot(v, &u).powi(4)).sum();
        prop_assert!((t.eval(&u) - want).abs() <= 1e-9 * want.max(1.0));
        prop_assert!(t.max_asymmetry() < 1e-12);
        let s = t.symmetrized();
        prop_assert!(s.correlation(&t) > 1.0 - 1e-12);

        let c = Tensor3::sum_of_cubes(&vs);
        let mut a = Tensor3::zeros(n);
        a.add_outer(&vs[0], &vs[1], &vs[2], 1.0);
        prop_assert!(a.symmetrized().max_asymmetry() < 1e-12);
        prop_assert!(c.max_asymmetry() < 1e-12);
    }

    #[test]
    fn projection_onto_an_orthonormal_frame_keeps_components_inside_it(seed in 0u64..500) {
        let frame = random_orthonormal(4, 2, seed);
        let t = Tensor4::sum_of_fourths(&frame);
        let p = t.project(&frame).unwrap();
        prop_assert!((p.norm() - t.norm()).abs() < 1e-10);
    }
}

#[test]
fn pseudoexpectation_lies_on_the_sphere_and_is_psd() {
    let truth = random_orthonormal(4, 2, 1);
    let b = Tensor4::sum_of_fourths(&truth);
    let opts = SolveOptions {
        tol: 1e-7,
        max_iter: 20_000,
    };
    let pe = solve_pseudoexpectation(&b, 2, 0.8, &[], &opts).unwrap();
    assert!(pe.min_eigenvalue().unwrap() > -1e-5);
    let m2 = pe.second_moment();
    let trace: f64 = (0..4).map(|i| m2[(i, i)]).sum();
    assert!((trace - 1.0).abs() < 1e-5, "trace {trace}");
    // pE ⟨g,x⟩² xxᵀ equals the fourth moment contracted twice with g.
    let g = linalg::gaussian_vec(4, &mut seeded(2));
    let c = pe.contract(&g);
    let t = pe.fourth_moment();
    for i in 0..4 {
        for j in 0..4 {
            let mut want = 0.0;
            for a in 0..4 {
                for bb in 0..4 {
                    want += g[a] * g[bb] * t.get(a, bb, i, j);
                }
            }
            assert!((c[(i, j)] - want).abs() < 1e-9);
        }
    }
    // Correlation demanded of the fourth moment.
    let corr = t.inner(&b.symmetrized());
    assert!(
        corr >= 0.4 * b.norm() / 2f64.sqrt() * (1.0 - 1e-3),
        "{corr}"
    );
}

#[test]
fn deflated_pseudoexpectation_is_orthogonal_to_kept_vectors() {
    let truth = random_orthonormal(4, 3, 3);
    let b = Tensor4::sum_of_fourths(&truth);
    let pe = solve_pseudoexpectation(&b, 3, 0.8, &truth[..1], &SolveOptions::default()).unwrap();
    assert_eq!(pe.working_dim(), 3);
    let m2 = pe.second_moment();
    let q: f64 = (0..4)
        .map(|i| {
            (0..4)
                .map(|j| truth[0][i] * m2[(i, j)] * truth[0][j])
                .sum::<f64>()
        })
        .sum();
    assert!(q.abs() < 1e-8);
}

#[test]
fn decomposition_recovers_exact_orthogonal_components() {
    for seed in 0..3u64 {
        let truth = random_orthonormal(3, 2, 10 + seed);
        let b = Tensor4::sum_of_fourths(&truth);
        let config = DecompositionConfig::new(0.9, 2);
        let found = decompose(&b, &config, None, &mut seeded(20 + seed)).unwrap();
        assert_eq!(found.len(), 2);
        assert!((linalg::dot(&found[0], &found[1])).abs() < 1e-9);
        assert_eq!(matched(&found, &truth, 0.9), 2, "seed {seed}");
    }
}

#[test]
fn oracle_rejecting_everything_pads_with_orthonormal_vectors() {
    let truth = random_orthonormal(3, 2, 4);
    let b = Tensor4::sum_of_fourths(&truth);
    let mut config = DecompositionConfig::new(0.9, 2);
    config.contractions = 3;
    let reject = |_: &[f64]| false;
    let found = decompose(&b, &config, Some(&reject), &mut seeded(5)).unwrap();
    assert_eq!(found.len(), 2);
    for (i, u) in found.iter().enumerate() {
        assert!((linalg::norm(u) - 1.0).abs() < 1e-12);
        for v in &found[i + 1..] {
            assert!(linalg::dot(u, v).abs() < 1e-12);
        }
    }
}

#[test]
fn decomposition_validates_its_configuration() {
    let b = Tensor4::sum_of_fourths(&random_orthonormal(3, 2, 6));
    let mut r = seeded(7);
    assert!(decompose(&b, &DecompositionConfig::new(0.9, 0), None, &mut r).is_err());
    assert!(decompose(&b, &DecompositionConfig::new(0.9, 4), None, &mut r).is_err());
    let mut c = DecompositionConfig::new(0.9, 2);
    c.contractions = 0;
    assert!(decompose(&b, &c, None, &mut r).is_err());
    assert!(solve_pseudoexpectation(&b, 2, 0.0, &[], &SolveOptions::default()).is_err());
}

#[test]
fn lifting_an_exact_third_moment_gives_a_correlated_fourth_moment() {
    let truth = random_orthonormal(3, 2, 8);
    let b3 = Tensor3::sum_of_cubes(&truth);
    let want = Tensor4::sum_of_fourths(&truth);
    for delta in [0.9, 0.99] {
        let t = lift_3_to_4(&b3, 2, delta, &LiftOptions::default()).unwrap();
        let c = t.correlation(&want);
        assert!(c > 0.5, "delta {delta}: correlation {c}");
    }
    assert!(lift_3_to_4(&Tensor3::zeros(3), 2, 0.9, &LiftOptions::default()).is_err());
}
