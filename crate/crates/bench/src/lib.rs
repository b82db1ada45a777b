//! Synthetic fixtures shared by the benchmark suite.

use dcscreen::error_model::{assumed_diagonal, ErrorCovariance};
use dcscreen::screening::{default_q, default_q1, CorrectionMode, ScreeningConfig, SelectionRule};
use dcscreen::survival::{impute_response, CensoredSample};
use ndarray::Array2;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// A ready-to-screen dataset: imputed response, surrogate design, and a
/// matching configuration.
pub struct Fixture {
    /// Imputed response values.
    pub imputed: Vec<f64>,
    /// Surrogate covariate matrix.
    pub x: Array2<f64>,
    /// Measurement-error covariance matching the surrogate.
    pub sigma: ErrorCovariance,
    /// Screen configuration sized for the dataset.
    pub config: ScreeningConfig,
}

/// Builds a censored dataset with three signal covariates and additive
/// measurement error of variance 0.15.
pub fn fixture(n: usize, p: usize, mode: CorrectionMode, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Array2<f64> = Array2::zeros((n, p));
    let mut time = Vec::with_capacity(n);
    let mut status = Vec::with_capacity(n);
    for i in 0..n {
        for j in 0..p {
            x[[i, j]] = StandardNormal.sample(&mut rng);
        }
        let e: f64 = StandardNormal.sample(&mut rng);
        let t = (0.8 * x[[i, 0]] - 0.6 * x[[i, 1]] + 0.5 * x[[i, 2]] + 0.3 * e).exp();
        let c: f64 = rng.random_range(0.0..4.0);
        if t <= c {
            time.push(t);
            status.push(1);
        } else {
            time.push(c);
            status.push(0);
        }
    }
    let noise = 0.15f64.sqrt();
    for v in x.iter_mut() {
        let eta: f64 = StandardNormal.sample(&mut rng);
        *v += noise * eta;
    }
    let sample = CensoredSample::new(time, status).unwrap();
    let imputed = impute_response(&sample).unwrap();
    let q = default_q(n, p);
    let config = ScreeningConfig {
        n,
        p,
        q,
        q1: default_q1(q),
        mode,
        rule: SelectionRule::TopQ,
        max_rounds: q.max(1),
    };
    Fixture {
        imputed,
        x,
        sigma: assumed_diagonal(p, 0.15).unwrap(),
        config,
    }
}

/// Builds a standalone censored sample for the imputation benchmarks.
pub fn censored_sample(n: usize, seed: u64) -> CensoredSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut time = Vec::with_capacity(n);
    let mut status = Vec::with_capacity(n);
    for _ in 0..n {
        let z: f64 = StandardNormal.sample(&mut rng);
        let t = (0.5 * z).exp();
        let c: f64 = rng.random_range(0.0..3.0);
        if t <= c {
            time.push(t);
            status.push(1);
        } else {
            time.push(c);
            status.push(0);
        }
    }
    CensoredSample::new(time, status).unwrap()
}
