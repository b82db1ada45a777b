//! Measurement-error covariance: estimation from repeated measurements or
//! validation data, assumed-diagonal construction, and active-set
//! partitioning for the corrected score.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

const SYMMETRY_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-8;

/// Where an error covariance came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSource {
    /// Supplied directly by the caller.
    Known,
    /// Estimated from repeated measurements.
    Repeats,
    /// Estimated from validation pairs.
    Validation,
    /// Homoscedastic diagonal assumption.
    Assumed,
}

/// Validated p x p measurement-error covariance.
#[derive(Debug, Clone)]
pub struct ErrorCovariance {
    matrix: Array2<f64>,
    source: SigmaSource,
    projected: bool,
}

impl ErrorCovariance {
    /// Validates symmetry (within 1e-10, then symmetrized exactly) and
    /// positive semidefiniteness (smallest eigenvalue above -1e-8).
    /// A matrix that fails the PSD check is projected onto the PSD cone
    /// by eigenvalue truncation, with a warning.
    pub fn new(matrix: Array2<f64>, source: SigmaSource) -> Result<Self> {
        let p = matrix.nrows();
        if matrix.ncols() != p || p == 0 {
            return Err(Error::InvalidInput(format!(
                "error covariance must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "error covariance has non-finite entries".into(),
            ));
        }
        let mut m = matrix;
        for i in 0..p {
            for j in 0..i {
                let gap = (m[[i, j]] - m[[j, i]]).abs();
                if gap > SYMMETRY_TOL {
                    return Err(Error::InvalidInput(format!(
                        "error covariance asymmetric at ({i}, {j}): gap {gap:.3e}"
                    )));
                }
                let s = 0.5 * (m[[i, j]] + m[[j, i]]);
                m[[i, j]] = s;
                m[[j, i]] = s;
            }
        }
        let mut projected = false;
        if !linalg::shifted_cholesky_ok(m.view(), PSD_TOL) {
            let (fixed, min_eig) = linalg::clamp_to_psd(m.view());
            log::warn!(
                "error covariance has smallest eigenvalue {min_eig:.3e}; \
                 projected onto the PSD cone"
            );
            m = fixed;
            projected = true;
        }
        Ok(Self {
            matrix: m,
            source,
            projected,
        })
    }

    /// Zero covariance, the error-free case.
    pub fn zero(p: usize) -> Self {
        Self {
            matrix: Array2::zeros((p, p)),
            source: SigmaSource::Known,
            projected: false,
        }
    }

    /// Dimension p.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Covariance matrix.
    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Where the covariance came from.
    pub fn source(&self) -> SigmaSource {
        self.source
    }

    /// True when construction had to project onto the PSD cone.
    pub fn was_projected(&self) -> bool {
        self.projected
    }

    /// True when every entry is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|v| *v == 0.0)
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        self.matrix
            .indexed_iter()
            .all(|((i, j), v)| i == j || *v == 0.0)
    }
}

/// Homoscedastic diagonal covariance sigma2 * I.
pub fn assumed_diagonal(p: usize, sigma2: f64) -> Result<ErrorCovariance> {
    if !sigma2.is_finite() || sigma2 < 0.0 {
        return Err(Error::InvalidInput(format!(
            "sigma2 is {sigma2}, expected finite nonnegative"
        )));
    }
    if p == 0 {
        return Err(Error::InvalidInput("dimension p must be positive".into()));
    }
    let mut m = Array2::zeros((p, p));
    for i in 0..p {
        m[[i, i]] = sigma2;
    }
    Ok(ErrorCovariance {
        matrix: m,
        source: SigmaSource::Assumed,
        projected: false,
    })
}

/// Repeated surrogate measurements grouped by subject.
#[derive(Debug, Clone)]
pub struct RepeatedMeasurements {
    ids: Vec<String>,
    subject_of_row: Vec<usize>,
    rows: Array2<f64>,
}

impl RepeatedMeasurements {
    /// Groups rows by their subject id; subjects keep first-appearance
    /// order and replicates keep row order.
    pub fn new(row_ids: Vec<String>, rows: Array2<f64>) -> Result<Self> {
        if row_ids.len() != rows.nrows() {
            return Err(Error::InvalidInput(format!(
                "{} subject ids for {} rows",
                row_ids.len(),
                rows.nrows()
            )));
        }
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::InvalidInput("repeated measurements are empty".into()));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "repeated measurements have non-finite entries".into(),
            ));
        }
        let mut ids: Vec<String> = Vec::new();
        let mut subject_of_row = Vec::with_capacity(row_ids.len());
        for rid in &row_ids {
            let pos = match ids.iter().position(|s| s == rid) {
                Some(p) => p,
                None => {
                    ids.push(rid.clone());
                    ids.len() - 1
                }
            };
            subject_of_row.push(pos);
        }
        Ok(Self {
            ids,
            subject_of_row,
            rows,
        })
    }

    /// Number of distinct subjects.
    pub fn n_subjects(&self) -> usize {
        self.ids.len()
    }

    /// Covariate dimension.
    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    /// Subject ids in first-appearance order.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Replicate counts per subject.
    pub fn replicate_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.ids.len()];
        for s in &self.subject_of_row {
            counts[*s] += 1;
        }
        counts
    }

    /// Row indices belonging to one subject, in row order.
    pub fn rows_of(&self, subject: usize) -> Vec<usize> {
        (0..self.rows.nrows())
            .filter(|r| self.subject_of_row[*r] == subject)
            .collect()
    }

    /// All replicate rows.
    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    /// First replicate row of every subject, stacked in subject order.
    pub fn first_replicates(&self) -> Array2<f64> {
        let p = self.dim();
        let mut out = Array2::zeros((self.n_subjects(), p));
        let mut seen = vec![false; self.n_subjects()];
        for r in 0..self.rows.nrows() {
            let s = self.subject_of_row[r];
            if !seen[s] {
                seen[s] = true;
                for j in 0..p {
                    out[[s, j]] = self.rows[[r, j]];
                }
            }
        }
        out
    }
}

/// Paired true and surrogate observations from a validation study.
#[derive(Debug, Clone)]
pub struct ValidationPairs {
    x_true: Array2<f64>,
    x_star: Array2<f64>,
}

impl ValidationPairs {
    /// Validates matching shapes and finite entries.
    pub fn new(x_true: Array2<f64>, x_star: Array2<f64>) -> Result<Self> {
        if x_true.dim() != x_star.dim() {
            return Err(Error::InvalidInput(format!(
                "validation halves disagree on shape: {:?} vs {:?}",
                x_true.dim(),
                x_star.dim()
            )));
        }
        if x_true.nrows() == 0 || x_true.ncols() == 0 {
            return Err(Error::InvalidInput("validation data is empty".into()));
        }
        if x_true.iter().chain(x_star.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "validation data has non-finite entries".into(),
            ));
        }
        Ok(Self { x_true, x_star })
    }

    /// Number of validation pairs.
    pub fn len(&self) -> usize {
        self.x_true.nrows()
    }

    /// True when there are no pairs (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.x_true.nrows() == 0
    }

    /// Covariate dimension.
    pub fn dim(&self) -> usize {
        self.x_true.ncols()
    }

    /// True covariate rows.
    pub fn x_true(&self) -> &Array2<f64> {
        &self.x_true
    }

    /// Surrogate rows.
    pub fn x_star(&self) -> &Array2<f64> {
        &self.x_star
    }
}

fn accumulate_outer_upper(acc: &mut Array2<f64>, d: &[f64]) {
    let p = d.len();
    for i in 0..p {
        let di = d[i];
        for j in i..p {
            acc[[i, j]] += di * d[j];
        }
    }
}

fn mirror_lower(acc: &mut Array2<f64>) {
    let p = acc.nrows();
    for i in 0..p {
        for j in (i + 1)..p {
            acc[[j, i]] = acc[[i, j]];
        }
    }
}

/// Estimates Sigma_eps from within-subject replicate scatter:
/// sum of centered outer products over subjects and replicates, divided
/// by the total within-subject degrees of freedom sum(n_i - 1).
pub fn sigma_from_repeats(data: &RepeatedMeasurements) -> Result<ErrorCovariance> {
    let p = data.dim();
    let counts = data.replicate_counts();
    let dof: usize = counts.iter().map(|c| c - 1).sum();
    if dof == 0 {
        return Err(Error::Degenerate(
            "every subject has a single replicate; no within-subject scatter".into(),
        ));
    }
    let mut acc = Array2::zeros((p, p));
    let mut diff = vec![0.0f64; p];
    for s in 0..data.n_subjects() {
        let rows = data.rows_of(s);
        if rows.len() < 2 {
            continue;
        }
        let mut mean = vec![0.0f64; p];
        for r in &rows {
            for j in 0..p {
                mean[j] += data.rows()[[*r, j]];
            }
        }
        let inv = 1.0 / rows.len() as f64;
        for m in mean.iter_mut() {
            *m *= inv;
        }
        for r in &rows {
            for j in 0..p {
                diff[j] = data.rows()[[*r, j]] - mean[j];
            }
            accumulate_outer_upper(&mut acc, &diff);
        }
    }
    let scale = 1.0 / dof as f64;
    acc.mapv_inplace(|v| v * scale);
    mirror_lower(&mut acc);
    ErrorCovariance::new(acc, SigmaSource::Repeats)
}

/// Estimates Sigma_eps from validation residuals e_i = x*_i - x_i:
/// the average outer product with divisor m - 1.
pub fn sigma_from_validation(pairs: &ValidationPairs) -> Result<ErrorCovariance> {
    let m = pairs.len();
    if m < 2 {
        return Err(Error::Degenerate(format!(
            "validation needs at least 2 pairs, got {m}"
        )));
    }
    let p = pairs.dim();
    let mut acc = Array2::zeros((p, p));
    let mut e = vec![0.0f64; p];
    for i in 0..m {
        for j in 0..p {
            e[j] = pairs.x_star[[i, j]] - pairs.x_true[[i, j]];
        }
        accumulate_outer_upper(&mut acc, &e);
    }
    let scale = 1.0 / (m - 1) as f64;
    acc.mapv_inplace(|v| v * scale);
    mirror_lower(&mut acc);
    ErrorCovariance::new(acc, SigmaSource::Validation)
}

/// Active/inactive partition of an error covariance.
#[derive(Debug, Clone)]
pub struct SigmaBlocks {
    active: Vec<usize>,
    inactive: Vec<usize>,
    aa: Array2<f64>,
    ab: Array2<f64>,
    bb: Array2<f64>,
}

impl SigmaBlocks {
    /// Active indices, in the order the blocks were built with.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Inactive indices in ascending order.
    pub fn inactive(&self) -> &[usize] {
        &self.inactive
    }

    /// Active-by-active block.
    pub fn aa(&self) -> &Array2<f64> {
        &self.aa
    }

    /// Active-by-inactive block.
    pub fn ab(&self) -> &Array2<f64> {
        &self.ab
    }

    /// Inactive-by-inactive block.
    pub fn bb(&self) -> &Array2<f64> {
        &self.bb
    }

    /// Scatters the blocks back into a full p x p matrix.
    pub fn scatter(&self) -> Array2<f64> {
        let p = self.active.len() + self.inactive.len();
        let mut out = Array2::zeros((p, p));
        for (i, &gi) in self.active.iter().enumerate() {
            for (j, &gj) in self.active.iter().enumerate() {
                out[[gi, gj]] = self.aa[[i, j]];
            }
            for (j, &gj) in self.inactive.iter().enumerate() {
                out[[gi, gj]] = self.ab[[i, j]];
                out[[gj, gi]] = self.ab[[i, j]];
            }
        }
        for (i, &gi) in self.inactive.iter().enumerate() {
            for (j, &gj) in self.inactive.iter().enumerate() {
                out[[gi, gj]] = self.bb[[i, j]];
            }
        }
        out
    }
}

/// Splits an error covariance into blocks for an active-index set.
///
/// The active block order follows the given indices; the inactive block
/// runs over the ascending complement.
pub fn partition_sigma(sigma: &ErrorCovariance, active: &[usize]) -> Result<SigmaBlocks> {
    let p = sigma.dim();
    let mut seen = vec![false; p];
    for &a in active {
        if a >= p {
            return Err(Error::InvalidInput(format!(
                "active index {a} out of range for p = {p}"
            )));
        }
        if seen[a] {
            return Err(Error::InvalidInput(format!("active index {a} repeated")));
        }
        seen[a] = true;
    }
    let inactive: Vec<usize> = (0..p).filter(|i| !seen[*i]).collect();
    let m = sigma.matrix();
    let na = active.len();
    let nb = inactive.len();
    let mut aa = Array2::zeros((na, na));
    let mut ab = Array2::zeros((na, nb));
    let mut bb = Array2::zeros((nb, nb));
    for (i, &gi) in active.iter().enumerate() {
        for (j, &gj) in active.iter().enumerate() {
            aa[[i, j]] = m[[gi, gj]];
        }
        for (j, &gj) in inactive.iter().enumerate() {
            ab[[i, j]] = m[[gi, gj]];
        }
    }
    for (i, &gi) in inactive.iter().enumerate() {
        for (j, &gj) in inactive.iter().enumerate() {
            bb[[i, j]] = m[[gi, gj]];
        }
    }
    Ok(SigmaBlocks {
        active: active.to_vec(),
        inactive,
        aa,
        ab,
        bb,
    })
}
