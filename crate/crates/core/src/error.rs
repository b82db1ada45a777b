use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the estimators and the simulation driver.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input failed validation: dimensions, finiteness, or parameter ranges.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A quantity required by an estimator is degenerate for this sample.
    #[error("degenerate data: {0}")]
    Degenerate(String),
    /// Normal equations are singular or numerically rank deficient.
    #[error("rank-deficient normal equations (condition estimate {cond:.3e})")]
    RankDeficient {
        /// Crude condition estimate from the pivot ratio of the failed factorization.
        cond: f64,
    },
    /// Corrected normal equations stayed singular after the ridge retry.
    #[error(
        "corrected-score system degenerate (condition estimate {cond:.3e}); \
         reduce the active set, increase n, or check the error-covariance scale"
    )]
    CorrectedDegenerate {
        /// Condition estimate of the ridge-adjusted system that still failed.
        cond: f64,
    },
    /// Censoring calibration could not bracket or reach the target rate.
    #[error("censoring calibration failed: {0}")]
    Calibration(String),
    /// An error raised inside one simulation replication.
    #[error("replication {index}: {source}")]
    Replication {
        /// Zero-based replication index.
        index: usize,
        /// Underlying error.
        #[source]
        source: Box<Error>,
    },
}
