//! Distance correlation estimators and the marginal screening sweep.
//!
//! All statistics are the biased V-statistic versions built from
//! double-centered pairwise distance matrices, which keeps every
//! correlation inside [0, 1].

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Pairwise distance matrix: symmetric, hollow, nonnegative.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    d: Array2<f64>,
}

impl DistanceMatrix {
    /// Validates and wraps a precomputed distance matrix.
    pub fn new(d: Array2<f64>) -> Result<Self> {
        let n = d.nrows();
        if d.ncols() != n || n < 2 {
            return Err(Error::InvalidInput(format!(
                "distance matrix must be square with n >= 2, got {}x{}",
                d.nrows(),
                d.ncols()
            )));
        }
        for i in 0..n {
            if d[[i, i]] != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "distance matrix diagonal entry {} is {}, expected 0",
                    i,
                    d[[i, i]]
                )));
            }
            for j in 0..n {
                let v = d[[i, j]];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "distance matrix entry ({i}, {j}) is {v}, expected finite nonnegative"
                    )));
                }
                if v != d[[j, i]] {
                    return Err(Error::InvalidInput(format!(
                        "distance matrix is asymmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { d })
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    /// Raw matrix view.
    pub fn as_array(&self) -> &Array2<f64> {
        &self.d
    }
}

/// Double-centered distance matrix; rows and columns sum to zero.
#[derive(Debug, Clone)]
pub struct CenteredMatrix {
    a: Array2<f64>,
}

impl CenteredMatrix {
    /// Number of points.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Raw matrix view.
    pub fn as_array(&self) -> &Array2<f64> {
        &self.a
    }
}

fn check_sample(x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "sample needs n >= 2 observations, got {}",
            x.len()
        )));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "sample entry {} is not finite",
            i
        )));
    }
    Ok(())
}

/// Absolute-difference distance matrix of a scalar sample.
pub fn pairwise_distances(x: &[f64]) -> Result<DistanceMatrix> {
    check_sample(x)?;
    let n = x.len();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            d[[i, j]] = (x[i] - x[j]).abs();
        }
    }
    Ok(DistanceMatrix { d })
}

/// Euclidean distance matrix of an n x d point set.
pub fn pairwise_distances_rows(points: ArrayView2<f64>) -> Result<DistanceMatrix> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "point set needs n >= 2 rows, got {n}"
        )));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("point set has non-finite entries".into()));
    }
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..points.ncols() {
                let t = points[[i, k]] - points[[j, k]];
                s += t * t;
            }
            d[[i, j]] = s.sqrt();
        }
    }
    Ok(DistanceMatrix { d })
}

/// Double-centers a distance matrix: A_kl = a_kl - a_k. - a_.l + a_.. .
///
/// Row means, column means, and the grand mean use full-row sequential
/// accumulation so the result is reproducible bit for bit.
pub fn double_center(d: &DistanceMatrix) -> CenteredMatrix {
    let n = d.n();
    let nf = n as f64;
    let a = &d.d;
    let mut row_mean = vec![0.0f64; n];
    for k in 0..n {
        let mut s = 0.0;
        for l in 0..n {
            s += a[[k, l]];
        }
        row_mean[k] = s / nf;
    }
    let mut grand = 0.0;
    for rm in &row_mean {
        grand += *rm;
    }
    grand /= nf;
    let mut c = Array2::zeros((n, n));
    for k in 0..n {
        for l in 0..n {
            c[[k, l]] = a[[k, l]] - row_mean[k] - row_mean[l] + grand;
        }
    }
    CenteredMatrix { a: c }
}

/// Distance covariance dcov_n of two centered matrices.
///
/// Returns the square root of the mean elementwise product, clamped at
/// zero before the root.
pub fn distance_covariance(a: &CenteredMatrix, b: &CenteredMatrix) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::InvalidInput(format!(
            "centered matrices disagree on n: {} vs {}",
            a.n(),
            b.n()
        )));
    }
    let n = a.n();
    let mut s = 0.0;
    for k in 0..n {
        for l in 0..n {
            s += a.a[[k, l]] * b.a[[k, l]];
        }
    }
    let v = s / (n as f64 * n as f64);
    Ok(v.max(0.0).sqrt())
}

/// Response-side precomputation shared by a whole marginal sweep: the
/// centered distance matrix of the response and its distance variance.
#[derive(Debug, Clone)]
pub(crate) struct CenteredResponse {
    b: Array2<f64>,
    dvar2: f64,
    n: usize,
}

/// Per-column scratch buffers reused across a sweep.
struct Scratch {
    col: Vec<f64>,
    dist: Vec<f64>,
    row_sum: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            col: vec![0.0; n],
            dist: vec![0.0; n * (n - 1) / 2],
            row_sum: vec![0.0; n],
        }
    }
}

impl CenteredResponse {
    pub(crate) fn new(y: &[f64]) -> Result<Self> {
        check_sample(y)?;
        let d = pairwise_distances(y)?;
        let b = double_center(&d).a;
        let n = y.len();
        let mut this = Self { b, dvar2: 0.0, n };
        let mut scratch = Scratch::new(n);
        let (_, dvar2) = this.col_stats(y, &mut scratch);
        this.dvar2 = dvar2;
        Ok(this)
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    /// Fused kernel: dcov^2(x, response) and dvar^2(x) for one column.
    ///
    /// Accumulation order is fixed: the strict upper triangle in row-major
    /// order doubled at the end, then the diagonal, so any scheduling of
    /// columns over threads reproduces identical values.
    fn col_stats(&self, x: &[f64], s: &mut Scratch) -> (f64, f64) {
        let n = self.n;
        let nf = n as f64;
        s.row_sum.iter_mut().for_each(|v| *v = 0.0);
        let mut idx = 0;
        for k in 0..n {
            let xk = x[k];
            for l in (k + 1)..n {
                let d = (xk - x[l]).abs();
                s.dist[idx] = d;
                s.row_sum[k] += d;
                s.row_sum[l] += d;
                idx += 1;
            }
        }
        let mut total = 0.0;
        for v in &s.row_sum {
            total += *v;
        }
        let grand = total / (nf * nf);
        let inv_n = 1.0 / nf;
        let mut ab_off = 0.0;
        let mut aa_off = 0.0;
        idx = 0;
        for k in 0..n {
            let rk = s.row_sum[k] * inv_n;
            for l in (k + 1)..n {
                let t = s.dist[idx] - rk - s.row_sum[l] * inv_n + grand;
                ab_off += t * self.b[[k, l]];
                aa_off += t * t;
                idx += 1;
            }
        }
        let mut ab_diag = 0.0;
        let mut aa_diag = 0.0;
        for k in 0..n {
            let t = grand - 2.0 * (s.row_sum[k] * inv_n);
            ab_diag += t * self.b[[k, k]];
            aa_diag += t * t;
        }
        let n2 = nf * nf;
        let dcov2 = (2.0 * ab_off + ab_diag) / n2;
        let dvar2 = (2.0 * aa_off + aa_diag) / n2;
        (dcov2, dvar2)
    }

    fn corr_from_stats(&self, dcov2: f64, dvar2_x: f64) -> f64 {
        if dvar2_x <= 0.0 || self.dvar2 <= 0.0 {
            return 0.0;
        }
        let r2 = dcov2.max(0.0) / (dvar2_x * self.dvar2).sqrt();
        r2.sqrt().clamp(0.0, 1.0)
    }

    fn corr_for_column(&self, x: &[f64], s: &mut Scratch) -> f64 {
        let (dcov2, dvar2_x) = self.col_stats(x, s);
        self.corr_from_stats(dcov2, dvar2_x)
    }
}

/// Distance correlation of two scalar samples, in [0, 1].
///
/// Returns 0 when either sample has zero distance variance.
pub fn distance_correlation(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidInput(format!(
            "samples disagree on n: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    check_sample(v)?;
    let resp = CenteredResponse::new(u)?;
    let mut scratch = Scratch::new(u.len());
    Ok(resp.corr_for_column(v, &mut scratch))
}

/// Distance correlation of the response against every column of a matrix.
///
/// Element k equals `distance_correlation(response, column k)` exactly;
/// columns are screened concurrently but each column's accumulation is
/// self-contained, so the output does not depend on the worker count.
pub fn marginal_sweep(response: &[f64], columns: ArrayView2<f64>) -> Result<Vec<f64>> {
    if columns.nrows() != response.len() {
        return Err(Error::InvalidInput(format!(
            "column matrix has {} rows but the response has {}",
            columns.nrows(),
            response.len()
        )));
    }
    if columns.ncols() == 0 {
        return Err(Error::InvalidInput("column matrix has no columns".into()));
    }
    let resp = CenteredResponse::new(response)?;
    sweep_with(&resp, columns)
}

/// Sweep against a prebuilt response precomputation.
pub(crate) fn sweep_with(resp: &CenteredResponse, columns: ArrayView2<f64>) -> Result<Vec<f64>> {
    let n = resp.n();
    if columns.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "column matrix has {} rows but the response has {}",
            columns.nrows(),
            n
        )));
    }
    (0..columns.ncols())
        .into_par_iter()
        .map_init(
            || Scratch::new(n),
            |scratch, j| {
                for (i, slot) in scratch.col.iter_mut().enumerate() {
                    let v = columns[[i, j]];
                    if !v.is_finite() {
                        return Err(Error::InvalidInput(format!(
                            "column {j} entry {i} is not finite"
                        )));
                    }
                    *slot = v;
                }
                let col = std::mem::take(&mut scratch.col);
                let r = resp.corr_for_column(&col, scratch);
                scratch.col = col;
                Ok(r)
            },
        )
        .collect()
}
