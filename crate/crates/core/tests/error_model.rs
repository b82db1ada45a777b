//! Oracle and consistency tests for the measurement-error covariance
//! estimators and block partitioning.

use dcscreen::error_model::{
    partition_sigma, sigma_from_repeats, sigma_from_validation, ErrorCovariance,
    RepeatedMeasurements, SigmaSource, ValidationPairs,
};
use ndarray::{array, Array2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Two subjects, one covariate: deviations (-1, 1) and (-2, 2) give
/// within-subject scatter 2 + 8 over 2 degrees of freedom.
#[test]
fn repeats_estimator_scalar_oracle() {
    let data = RepeatedMeasurements::new(
        vec!["a".into(), "a".into(), "b".into(), "b".into()],
        array![[0.0], [2.0], [1.0], [5.0]],
    )
    .unwrap();
    let sigma = sigma_from_repeats(&data).unwrap();
    assert!(close(sigma.matrix()[[0, 0]], 5.0, 1e-15));
    assert_eq!(sigma.source(), SigmaSource::Repeats);
    assert!(!sigma.was_projected());
}

/// Unbalanced replicate counts: subject a contributes [[2, 2], [2, 2]],
/// subject b (three replicates) contributes [[18, 0], [0, 0]], and the
/// divisor is (2 - 1) + (3 - 1) = 3.
#[test]
fn repeats_estimator_unbalanced_oracle() {
    let data = RepeatedMeasurements::new(
        vec!["a".into(), "a".into(), "b".into(), "b".into(), "b".into()],
        array![[0.0, 0.0], [2.0, 2.0], [0.0, 0.0], [3.0, 0.0], [6.0, 0.0]],
    )
    .unwrap();
    let sigma = sigma_from_repeats(&data).unwrap();
    let expect = array![[20.0 / 3.0, 2.0 / 3.0], [2.0 / 3.0, 2.0 / 3.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!(close(sigma.matrix()[[i, j]], expect[[i, j]], 1e-12));
        }
    }
}

/// Three validation residuals (1,0), (0,2), (-1,1): outer-product sum
/// [[2, -1], [-1, 5]] with divisor m - 1 = 2.
#[test]
fn validation_estimator_oracle() {
    let x_true = array![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]];
    let x_star = array![[1.0, 0.0], [1.0, 3.0], [1.0, 3.0]];
    let pairs = ValidationPairs::new(x_true, x_star).unwrap();
    let sigma = sigma_from_validation(&pairs).unwrap();
    let expect = array![[1.0, -0.5], [-0.5, 2.5]];
    for i in 0..2 {
        for j in 0..2 {
            assert!(close(sigma.matrix()[[i, j]], expect[[i, j]], 1e-12));
        }
    }
    assert_eq!(sigma.source(), SigmaSource::Validation);
}

fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |_| {
        let z: f64 = StandardNormal.sample(rng);
        scale * z
    })
}

/// Monte Carlo consistency on a diagonal target, small-scale version of
/// the estimator checks used by the acceptance gate.
#[test]
fn repeats_estimator_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (n, p, sd) = (600usize, 3usize, 0.15f64.sqrt());
    let mut ids = Vec::with_capacity(2 * n);
    let truth = normal_matrix(&mut rng, n, p, 1.0);
    let mut rows = Array2::zeros((2 * n, p));
    for i in 0..n {
        for r in 0..2 {
            ids.push(format!("s{i}"));
            for j in 0..p {
                let z: f64 = StandardNormal.sample(&mut rng);
                rows[[2 * i + r, j]] = truth[[i, j]] + sd * z;
            }
        }
    }
    let sigma = sigma_from_repeats(&RepeatedMeasurements::new(ids, rows).unwrap()).unwrap();
    for i in 0..p {
        for j in 0..p {
            let target = if i == j { 0.15 } else { 0.0 };
            assert!(
                close(sigma.matrix()[[i, j]], target, 0.05),
                "entry ({i}, {j}) = {} is off target {target}",
                sigma.matrix()[[i, j]]
            );
        }
    }
}

#[test]
fn validation_estimator_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (m, p, sd) = (2000usize, 3usize, 0.15f64.sqrt());
    let x_true = normal_matrix(&mut rng, m, p, 1.0);
    let noise = normal_matrix(&mut rng, m, p, sd);
    let x_star = &x_true + &noise;
    let sigma = sigma_from_validation(&ValidationPairs::new(x_true, x_star).unwrap()).unwrap();
    for i in 0..p {
        for j in 0..p {
            let target = if i == j { 0.15 } else { 0.0 };
            assert!(close(sigma.matrix()[[i, j]], target, 0.05));
        }
    }
}

/// An indefinite user-supplied matrix is projected onto the PSD cone by
/// eigenvalue truncation and flagged.
#[test]
fn indefinite_covariance_is_projected() {
    let m = array![[1.0, 2.0], [2.0, 1.0]];
    let sigma = ErrorCovariance::new(m, SigmaSource::Known).unwrap();
    assert!(sigma.was_projected());
    let fixed = sigma.matrix();
    assert!(close(fixed[[0, 0]], 1.5, 1e-10));
    assert!(close(fixed[[0, 1]], 1.5, 1e-10));
    assert!(close(fixed[[1, 1]], 1.5, 1e-10));
}

#[test]
fn asymmetric_covariance_is_rejected() {
    let m = array![[1.0, 0.5], [0.0, 1.0]];
    assert!(ErrorCovariance::new(m, SigmaSource::Known).is_err());
}

#[test]
fn single_replicate_everywhere_is_degenerate() {
    let data = RepeatedMeasurements::new(
        vec!["a".into(), "b".into()],
        array![[1.0], [2.0]],
    )
    .unwrap();
    assert!(sigma_from_repeats(&data).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Scattering the partition blocks reproduces the parent matrix
    /// entry for entry, for any active-index subset in any order.
    #[test]
    fn partition_roundtrips_through_scatter(
        seed in 0u64..1_000,
        p in 2usize..8,
        mask in prop::collection::vec(prop::bool::ANY, 8),
        reversed in prop::bool::ANY,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = normal_matrix(&mut rng, p, p, 1.0);
        let mut m = a.t().dot(&a);
        for i in 0..p {
            m[[i, i]] += 0.1;
        }
        let sigma = ErrorCovariance::new(m.clone(), SigmaSource::Known).unwrap();
        prop_assert!(!sigma.was_projected());

        let mut active: Vec<usize> = (0..p).filter(|i| mask[*i]).collect();
        if reversed {
            active.reverse();
        }
        let blocks = partition_sigma(&sigma, &active).unwrap();
        let back = blocks.scatter();
        for i in 0..p {
            for j in 0..p {
                prop_assert_eq!(back[[i, j]].to_bits(), sigma.matrix()[[i, j]].to_bits());
            }
        }
    }
}
