//! Shared brute-force oracles for the integration tests.

/// Naive double-centered distance covariance squared, four explicit loops.
pub fn brute_dcov2(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let a = dist_matrix(u);
    let b = dist_matrix(v);
    let ac = center(&a, n);
    let bc = center(&b, n);
    let mut acc = 0.0;
    for k in 0..n {
        for l in 0..n {
            acc += ac[k][l] * bc[k][l];
        }
    }
    acc / (n * n) as f64
}

/// Naive distance correlation built on [`brute_dcov2`].
pub fn brute_dcorr(u: &[f64], v: &[f64]) -> f64 {
    let duv = brute_dcov2(u, v);
    let du = brute_dcov2(u, u);
    let dv = brute_dcov2(v, v);
    if du <= 0.0 || dv <= 0.0 {
        return 0.0;
    }
    (duv.max(0.0) / (du * dv).sqrt()).max(0.0).sqrt()
}

fn dist_matrix(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut d = vec![vec![0.0; n]; n];
    for k in 0..n {
        for l in 0..n {
            d[k][l] = (x[k] - x[l]).abs();
        }
    }
    d
}

fn center(d: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let nf = n as f64;
    let mut row = vec![0.0; n];
    let mut col = vec![0.0; n];
    let mut grand = 0.0;
    for k in 0..n {
        for l in 0..n {
            row[k] += d[k][l];
            col[l] += d[k][l];
            grand += d[k][l];
        }
    }
    let mut out = vec![vec![0.0; n]; n];
    for k in 0..n {
        for l in 0..n {
            out[k][l] = d[k][l] - row[k] / nf - col[l] / nf + grand / (nf * nf);
        }
    }
    out
}
