//! Small dense factorization helpers shared by the error model and the
//! corrected-score solver.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};

pub(crate) fn to_na(a: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn to_nd(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Solves A X = B by LU with partial pivoting.
///
/// Returns the solution and a pivot-ratio condition estimate, or the
/// condition estimate alone when A is numerically singular.
pub(crate) fn solve_with_cond(
    a: ArrayView2<f64>,
    b: ArrayView2<f64>,
) -> std::result::Result<(Array2<f64>, f64), f64> {
    let lu = to_na(a).lu();
    let u = lu.u();
    let dim = u.nrows().min(u.ncols());
    let mut max_piv = 0.0f64;
    let mut min_piv = f64::INFINITY;
    for i in 0..dim {
        let p = u[(i, i)].abs();
        max_piv = max_piv.max(p);
        min_piv = min_piv.min(p);
    }
    let cond = if min_piv > 0.0 {
        max_piv / min_piv
    } else {
        f64::INFINITY
    };
    if !(min_piv > max_piv * 1e-13) {
        return Err(cond);
    }
    match lu.solve(&to_na(b)) {
        Some(x) => Ok((to_nd(&x), cond)),
        None => Err(cond),
    }
}

/// True when A + shift I admits a Cholesky factorization.
pub(crate) fn shifted_cholesky_ok(a: ArrayView2<f64>, shift: f64) -> bool {
    let mut m = to_na(a);
    for i in 0..m.nrows() {
        m[(i, i)] += shift;
    }
    m.cholesky().is_some()
}

/// Projects a symmetric matrix onto the PSD cone by clamping negative
/// eigenvalues at zero. Returns the repaired matrix and the smallest
/// original eigenvalue.
pub(crate) fn clamp_to_psd(a: ArrayView2<f64>) -> (Array2<f64>, f64) {
    let eig = to_na(a).symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let n = a.nrows();
    let q = &eig.eigenvectors;
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let lam = eig.eigenvalues[k].max(0.0);
        if lam == 0.0 {
            continue;
        }
        for i in 0..n {
            let qik = q[(i, k)] * lam;
            for j in 0..n {
                out[(i, j)] += qik * q[(j, k)];
            }
        }
    }
    let mut nd = to_nd(&out);
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (nd[[i, j]] + nd[[j, i]]);
            nd[[i, j]] = s;
            nd[[j, i]] = s;
        }
    }
    (nd, min_eig)
}

/// Factor L with L L' = A for a PSD matrix, via Cholesky when possible
/// and a symmetric eigendecomposition otherwise.
pub(crate) fn psd_factor(a: ArrayView2<f64>) -> Array2<f64> {
    let m = to_na(a);
    if let Some(chol) = m.clone().cholesky() {
        return to_nd(&chol.l());
    }
    let eig = m.symmetric_eigen();
    let n = a.nrows();
    let mut l = DMatrix::zeros(n, n);
    for k in 0..n {
        let s = eig.eigenvalues[k].max(0.0).sqrt();
        for i in 0..n {
            l[(i, k)] = eig.eigenvectors[(i, k)] * s;
        }
    }
    to_nd(&l)
}
