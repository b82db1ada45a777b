//! Distance correlation against an independent brute-force oracle.

mod common;

use common::{brute_dcorr, brute_dcov2};
use dcscreen::dcorr::{
    distance_correlation, distance_covariance, double_center, marginal_sweep, pairwise_distances,
};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dcov2_via_kernel(u: &[f64], v: &[f64]) -> f64 {
    let a = double_center(&pairwise_distances(u).unwrap());
    let b = double_center(&pairwise_distances(v).unwrap());
    let d = distance_covariance(&a, &b).unwrap();
    d * d
}

#[test]
fn frozen_small_instances() {
    let cases: [(&[f64], &[f64], f64, f64); 4] = [
        (
            &[1.0, 2.0, 3.0, 4.0],
            &[1.0, 3.0, 2.0, 4.0],
            0.5625,
            0.8320502943378437,
        ),
        (&[0.0, 1.0, 2.0], &[2.0, 1.0, 0.0], 0.4938271604938272, 1.0),
        (
            &[1.0, 2.0, 4.0, 8.0, 16.0],
            &[1.0, 1.0, 2.0, 2.0, 3.0],
            2.24,
            0.9237441631814929,
        ),
        (
            &[0.5, -1.25, 3.75, 2.0],
            &[10.0, 10.0, 10.0, 11.0],
            0.1484375,
            0.5180269739931078,
        ),
    ];
    for (u, v, want_dcov2, want_dcorr) in cases {
        let got2 = dcov2_via_kernel(u, v);
        assert!(
            (got2 - want_dcov2).abs() <= 1e-12,
            "dcov2 {got2} vs {want_dcov2}"
        );
        let got = distance_correlation(u, v).unwrap();
        assert!(
            (got - want_dcorr).abs() <= 1e-12,
            "dcorr {got} vs {want_dcorr}"
        );
    }
}

#[test]
fn perfect_linear_association_is_one() {
    let u = [3.0, 1.0, 4.0, 1.5, 9.0, 2.0, 6.0];
    let v: Vec<f64> = u.iter().map(|x| -2.5 * x + 7.0).collect();
    let r = distance_correlation(&u, &v).unwrap();
    assert!((r - 1.0).abs() <= 1e-12, "{r}");
}

#[test]
fn five_hundred_random_instances_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for case in 0..500 {
        let n = rng.random_range(2..=8);
        let scale = 10.0f64.powi(rng.random_range(-2..=2));
        let mut u: Vec<f64> = (0..n)
            .map(|_| (rng.random::<f64>() - 0.5) * scale)
            .collect();
        let v: Vec<f64> = (0..n)
            .map(|_| (rng.random::<f64>() - 0.5) * scale)
            .collect();
        if case % 7 == 0 {
            u[0] = u[n - 1];
        }
        if case % 13 == 0 {
            u.iter_mut().for_each(|x| *x = 1.25);
        }
        let got2 = dcov2_via_kernel(&u, &v);
        let want2 = brute_dcov2(&u, &v);
        worst = worst.max((got2 - want2).abs());
        assert!(
            (got2 - want2).abs() <= 1e-12,
            "case {case}: dcov2 {got2} vs {want2}"
        );
        let got = distance_correlation(&u, &v).unwrap();
        let want = brute_dcorr(&u, &v);
        assert!(
            (got - want).abs() <= 1e-12,
            "case {case}: dcorr {got} vs {want}"
        );
    }
    assert!(worst <= 1e-12, "worst deviation {worst}");
}

#[test]
fn sweep_agrees_with_singles_on_random_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 40;
    let p = 12;
    let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0).collect();
    let x = Array2::from_shape_fn((n, p), |_| rng.random::<f64>() - 0.5);
    let utilities = marginal_sweep(&y, x.view()).unwrap();
    for j in 0..p {
        let col: Vec<f64> = x.column(j).to_vec();
        let single = distance_correlation(&y, &col).unwrap();
        assert_eq!(utilities[j].to_bits(), single.to_bits(), "column {j}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dcorr_lies_in_unit_interval(
        u in proptest::collection::vec(-100.0f64..100.0, 2..20),
        v in proptest::collection::vec(-100.0f64..100.0, 2..20),
    ) {
        let n = u.len().min(v.len());
        let r = distance_correlation(&u[..n], &v[..n]).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&r), "{r}");
    }

    #[test]
    fn dcorr_is_symmetric(
        u in proptest::collection::vec(-50.0f64..50.0, 3..12),
        v in proptest::collection::vec(-50.0f64..50.0, 3..12),
    ) {
        let n = u.len().min(v.len());
        let a = distance_correlation(&u[..n], &v[..n]).unwrap();
        let b = distance_correlation(&v[..n], &u[..n]).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn dcorr_ignores_affine_maps(
        u in proptest::collection::vec(-20.0f64..20.0, 3..12),
        v in proptest::collection::vec(-20.0f64..20.0, 3..12),
        scale in prop_oneof![(-4.0f64..-0.25), (0.25f64..4.0)],
        shift in -100.0f64..100.0,
    ) {
        let n = u.len().min(v.len());
        let moved: Vec<f64> = u[..n].iter().map(|x| scale * x + shift).collect();
        let a = distance_correlation(&u[..n], &v[..n]).unwrap();
        let b = distance_correlation(&moved, &v[..n]).unwrap();
        prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }

    #[test]
    fn constant_marginal_gives_zero(
        c in -10.0f64..10.0,
        v in proptest::collection::vec(-50.0f64..50.0, 2..12),
    ) {
        let u = vec![c; v.len()];
        let r = distance_correlation(&u, &v).unwrap();
        prop_assert_eq!(r, 0.0);
    }
}
