//! CSV loading and writing for the command-line surface.
//!
//! Three schemas are supported. The main schema has `time` and `status`
//! columns plus named covariates and an optional `subject` column. The
//! repeats schema is `subject,replicate,<covariates...>`. The validation
//! schema holds the surrogate half first and the true half second, so the
//! covariate column count must be even. Floats are written with 17
//! significant digits so a write/load round trip is exact.

use std::fmt;
use std::fs::File;
use std::io::Write as _;
use std::path::Path;

use dcscreen::error_model::{RepeatedMeasurements, ValidationPairs};
use ndarray::Array2;

/// CLI-level failure, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation: exit code 2.
    Usage(String),
    /// Bad data or numeric failure: exit code 1.
    Data(String),
}

impl CliError {
    /// Process exit code for this error.
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<dcscreen::Error> for CliError {
    fn from(e: dcscreen::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Shorthand for CLI results.
pub type CliResult<T> = Result<T, CliError>;

/// A loaded main dataset: censored response plus named covariates.
///
/// A `subject` column is accepted and skipped; it carries no screening
/// information.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Covariate column names in file order.
    pub names: Vec<String>,
    /// Observed times.
    pub time: Vec<f64>,
    /// Event indicators, 1 event and 0 censored.
    pub status: Vec<u8>,
    /// Covariate matrix, one row per subject.
    pub x: Array2<f64>,
}

impl Dataset {
    /// Number of rows.
    pub fn n(&self) -> usize {
        self.time.len()
    }

    /// Number of covariates.
    pub fn p(&self) -> usize {
        self.names.len()
    }
}

/// Formats a float with 17 significant digits; parses back bitwise.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_float(field: &str, line: u64, column: &str) -> CliResult<f64> {
    let trimmed = field.trim();
    if trimmed.is_empty() {
        return Err(CliError::Data(format!(
            "missing value at row {line}, column `{column}`"
        )));
    }
    trimmed.parse::<f64>().map_err(|_| {
        CliError::Data(format!(
            "unreadable number {trimmed:?} at row {line}, column `{column}`"
        ))
    })
}

fn record_line(record: &csv::StringRecord, fallback: u64) -> u64 {
    record.position().map_or(fallback, |p| p.line())
}

/// Loads the main schema: `time,status,<covariates...>` plus optional `subject`.
pub fn load_main_csv(path: &Path) -> CliResult<Dataset> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let mut time_col = None;
    let mut status_col = None;
    let mut covariates: Vec<(usize, String)> = Vec::new();
    for (i, name) in headers.iter().enumerate() {
        match name {
            "time" => time_col = Some(i),
            "status" => status_col = Some(i),
            "subject" => {}
            other => covariates.push((i, other.to_string())),
        }
    }
    let time_col =
        time_col.ok_or_else(|| CliError::Data("main schema needs a `time` column".into()))?;
    let status_col =
        status_col.ok_or_else(|| CliError::Data("main schema needs a `status` column".into()))?;
    if covariates.is_empty() {
        return Err(CliError::Data(
            "main schema needs at least one covariate column".into(),
        ));
    }
    let mut time = Vec::new();
    let mut status = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = record_line(&record, idx as u64 + 2);
        let t = parse_float(record.get(time_col).unwrap_or(""), line, "time")?;
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Data(format!(
                "time must be positive and finite, got {t} at row {line}, column `time`"
            )));
        }
        let s = record.get(status_col).unwrap_or("").trim();
        let d = match s {
            "0" => 0u8,
            "1" => 1u8,
            other => {
                return Err(CliError::Data(format!(
                    "status must be 0 or 1, got {other:?} at row {line}, column `status`"
                )))
            }
        };
        time.push(t);
        status.push(d);
        for (col, name) in &covariates {
            let v = parse_float(record.get(*col).unwrap_or(""), line, name)?;
            if !v.is_finite() {
                return Err(CliError::Data(format!(
                    "covariate must be finite, got {v} at row {line}, column `{name}`"
                )));
            }
            values.push(v);
        }
    }
    let n = time.len();
    if n == 0 {
        return Err(CliError::Data("no data rows".into()));
    }
    let p = covariates.len();
    let x = Array2::from_shape_vec((n, p), values)
        .map_err(|e| CliError::Data(format!("shape error: {e}")))?;
    Ok(Dataset {
        names: covariates.into_iter().map(|(_, n)| n).collect(),
        time,
        status,
        x,
    })
}

/// Loads the repeats schema: `subject,replicate,<covariates...>`.
///
/// Rows are ordered by subject first appearance, then by replicate number.
/// Returns the measurements plus the covariate names.
pub fn load_repeats_csv(path: &Path) -> CliResult<(RepeatedMeasurements, Vec<String>)> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.len() < 3 || cols[0] != "subject" || cols[1] != "replicate" {
        return Err(CliError::Data(
            "repeats schema is `subject,replicate,<covariates...>`".into(),
        ));
    }
    let names: Vec<String> = cols[2..].iter().map(|s| s.to_string()).collect();
    let p = names.len();
    let mut rows: Vec<(String, u64, Vec<f64>)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = record_line(&record, idx as u64 + 2);
        let subject = record.get(0).unwrap_or("").trim().to_string();
        if subject.is_empty() {
            return Err(CliError::Data(format!(
                "missing value at row {line}, column `subject`"
            )));
        }
        let replicate: u64 = record
            .get(1)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| {
                CliError::Data(format!(
                    "replicate must be a nonnegative integer at row {line}, column `replicate`"
                ))
            })?;
        let mut vals = Vec::with_capacity(p);
        for (j, name) in names.iter().enumerate() {
            vals.push(parse_float(record.get(j + 2).unwrap_or(""), line, name)?);
        }
        rows.push((subject, replicate, vals));
    }
    if rows.is_empty() {
        return Err(CliError::Data("no data rows".into()));
    }
    let mut order: Vec<String> = Vec::new();
    for (s, _, _) in &rows {
        if !order.contains(s) {
            order.push(s.clone());
        }
    }
    rows.sort_by(|a, b| {
        let ia = order.iter().position(|s| s == &a.0).unwrap();
        let ib = order.iter().position(|s| s == &b.0).unwrap();
        ia.cmp(&ib).then(a.1.cmp(&b.1))
    });
    let mut ids = Vec::with_capacity(rows.len());
    let mut matrix = Array2::zeros((rows.len(), p));
    for (i, (s, _, vals)) in rows.iter().enumerate() {
        ids.push(s.clone());
        for (j, v) in vals.iter().enumerate() {
            matrix[[i, j]] = *v;
        }
    }
    let reps = RepeatedMeasurements::new(ids, matrix)?;
    for (subject, count) in order.iter().zip(reps.replicate_counts()) {
        if count < 2 {
            log::warn!("subject {subject} has a single replicate; it adds nothing to the estimate");
        }
    }
    Ok((reps, names))
}

/// Loads the validation schema: surrogate columns first, true columns second.
///
/// Returns the pairs plus the true-half covariate names.
pub fn load_validation_csv(path: &Path) -> CliResult<(ValidationPairs, Vec<String>)> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let total = headers.len();
    if total == 0 || total % 2 != 0 {
        return Err(CliError::Data(format!(
            "validation schema needs an even covariate column count, got {total}"
        )));
    }
    let p = total / 2;
    let names: Vec<String> = headers.iter().skip(p).map(|s| s.to_string()).collect();
    let mut star_vals: Vec<f64> = Vec::new();
    let mut true_vals: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = record_line(&record, idx as u64 + 2);
        for j in 0..total {
            let name: &str = headers.iter().nth(j).unwrap_or("");
            let v = parse_float(record.get(j).unwrap_or(""), line, name)?;
            if j < p {
                star_vals.push(v);
            } else {
                true_vals.push(v);
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(CliError::Data("no data rows".into()));
    }
    let x_star = Array2::from_shape_vec((n, p), star_vals)
        .map_err(|e| CliError::Data(format!("shape error: {e}")))?;
    let x_true = Array2::from_shape_vec((n, p), true_vals)
        .map_err(|e| CliError::Data(format!("shape error: {e}")))?;
    Ok((ValidationPairs::new(x_true, x_star)?, names))
}

/// Writes a covariance matrix with a covariate-name header row.
pub fn write_sigma_csv(path: &Path, names: &[String], sigma: &Array2<f64>) -> CliResult<()> {
    File::create(path)?.write_all(sigma_csv(names, sigma).as_bytes())?;
    Ok(())
}

/// Renders a covariance matrix as CSV text.
pub fn sigma_csv(names: &[String], sigma: &Array2<f64>) -> String {
    let mut out = names.join(",");
    out.push('\n');
    for i in 0..sigma.nrows() {
        for j in 0..sigma.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt17(sigma[[i, j]]));
        }
        out.push('\n');
    }
    out
}

/// Loads a covariance matrix written by [`write_sigma_csv`].
pub fn load_sigma_csv(path: &Path) -> CliResult<(Array2<f64>, Vec<String>)> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let names: Vec<String> = reader.headers()?.iter().map(|s| s.to_string()).collect();
    let p = names.len();
    let mut values: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = record_line(&record, idx as u64 + 2);
        if record.len() != p {
            return Err(CliError::Data(format!(
                "covariance row {line} has {} entries, expected {p}",
                record.len()
            )));
        }
        for (j, name) in names.iter().enumerate() {
            values.push(parse_float(record.get(j).unwrap_or(""), line, name)?);
        }
        rows += 1;
    }
    if rows != p {
        return Err(CliError::Data(format!(
            "covariance matrix must be square, got {rows} rows for {p} columns"
        )));
    }
    let m = Array2::from_shape_vec((p, p), values)
        .map_err(|e| CliError::Data(format!("shape error: {e}")))?;
    Ok((m, names))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_file(dir: &tempfile::TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    fn main_csv(ds: &Dataset) -> String {
        let mut out = String::from("time,status");
        for name in &ds.names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for i in 0..ds.n() {
            out.push_str(&fmt17(ds.time[i]));
            out.push(',');
            out.push_str(&ds.status[i].to_string());
            for j in 0..ds.p() {
                out.push(',');
                out.push_str(&fmt17(ds.x[[i, j]]));
            }
            out.push('\n');
        }
        out
    }

    #[test]
    fn minimal_two_row_file_parses() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "time,status,g1\n1.5,1,0.25\n2.5,0,-1.0\n");
        let ds = load_main_csv(&path).unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.p(), 1);
        assert_eq!(ds.names, vec!["g1".to_string()]);
        assert_eq!(ds.time, vec![1.5, 2.5]);
        assert_eq!(ds.status, vec![1, 0]);
        assert_eq!(ds.x[[1, 0]], -1.0);
    }

    #[test]
    fn subject_column_is_accepted_and_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "d.csv",
            "subject,time,status,g1,g2\ns1,1.0,1,0.5,0.25\ns2,2.0,0,1.5,0.125\n",
        );
        let ds = load_main_csv(&path).unwrap();
        assert_eq!(ds.p(), 2);
        assert_eq!(ds.names, vec!["g1".to_string(), "g2".to_string()]);
    }

    #[test]
    fn bad_status_names_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let mut content = String::from("time,status,g1\n");
        for i in 0..5 {
            content.push_str(&format!("{}.0,1,0.0\n", i + 1));
        }
        content.push_str("6.0,2,0.0\n");
        let path = write_file(&dir, "d.csv", &content);
        let err = load_main_csv(&path).unwrap_err().to_string();
        assert!(err.contains("row 7"), "{err}");
        assert!(err.contains("`status`"), "{err}");
    }

    #[test]
    fn nonpositive_time_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "time,status,g1\n0.0,1,0.5\n");
        let err = load_main_csv(&path).unwrap_err().to_string();
        assert!(err.contains("`time`"), "{err}");
    }

    #[test]
    fn missing_covariate_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "time,status,g1,g2\n1.0,1,0.5,\n");
        let err = load_main_csv(&path).unwrap_err().to_string();
        assert!(err.contains("missing value"), "{err}");
        assert!(err.contains("`g2`"), "{err}");
    }

    #[test]
    fn main_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let ds = Dataset {
            names: vec!["a".into(), "b".into()],
            time: vec![0.1, 1.0 / 3.0, 7.25e-300],
            status: vec![1, 0, 1],
            x: Array2::from_shape_vec(
                (3, 2),
                vec![
                    std::f64::consts::PI,
                    -1.0 / 7.0,
                    1e17 + 1.0,
                    -0.0,
                    2.0f64.powi(-1040),
                    123456.789012345678,
                ],
            )
            .unwrap(),
        };
        let path = write_file(&dir, "d.csv", &main_csv(&ds));
        let back = load_main_csv(&path).unwrap();
        assert_eq!(back.names, ds.names);
        for i in 0..3 {
            assert_eq!(back.time[i].to_bits(), ds.time[i].to_bits());
            for j in 0..2 {
                assert_eq!(back.x[[i, j]].to_bits(), ds.x[[i, j]].to_bits());
            }
        }
    }

    #[test]
    fn repeats_loader_groups_and_orders() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "r.csv",
            "subject,replicate,g1\nb,2,4.0\na,1,1.0\nb,1,3.0\na,2,2.0\n",
        );
        let (reps, names) = load_repeats_csv(&path).unwrap();
        assert_eq!(names, vec!["g1".to_string()]);
        assert_eq!(reps.n_subjects(), 2);
        assert_eq!(reps.ids(), &["b", "a"]);
        assert_eq!(reps.replicate_counts(), vec![2, 2]);
        let col: Vec<f64> = reps.rows().column(0).to_vec();
        assert_eq!(col, vec![3.0, 4.0, 1.0, 2.0]);
    }

    #[test]
    fn repeats_needs_schema_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "r.csv", "id,rep,g1\na,1,1.0\n");
        assert!(load_repeats_csv(&path).is_err());
    }

    #[test]
    fn validation_odd_width_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "v.csv", "a_star,b_star,a\n1.0,2.0,3.0\n");
        let err = load_validation_csv(&path).unwrap_err().to_string();
        assert!(err.contains("even"), "{err}");
    }

    #[test]
    fn validation_loader_splits_halves() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "v.csv",
            "g1_star,g2_star,g1,g2\n1.0,2.0,3.0,4.0\n5.0,6.0,7.0,8.0\n",
        );
        let (pairs, names) = load_validation_csv(&path).unwrap();
        assert_eq!(names, vec!["g1".to_string(), "g2".to_string()]);
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs.x_star()[[0, 0]], 1.0);
        assert_eq!(pairs.x_true()[[0, 0]], 3.0);
        assert_eq!(pairs.x_true()[[1, 1]], 8.0);
    }

    #[test]
    fn sigma_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let names = vec!["a".to_string(), "b".to_string()];
        let sigma =
            Array2::from_shape_vec((2, 2), vec![0.15, 1.0 / 3.0, 1.0 / 3.0, 0.2]).unwrap();
        let path = dir.path().join("s.csv");
        write_sigma_csv(&path, &names, &sigma).unwrap();
        let (back, back_names) = load_sigma_csv(&path).unwrap();
        assert_eq!(back_names, names);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(back[[i, j]].to_bits(), sigma[[i, j]].to_bits());
            }
        }
    }

    #[test]
    fn sigma_must_be_square() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "s.csv", "a,b\n1.0,0.0\n");
        assert!(load_sigma_csv(&path).is_err());
    }
}
