//! Simulation scenarios for studying screening under measurement error.
//!
//! The generator follows a fixed design: covariates share a common factor
//! through an equicorrelation parameter `rho`, the failure time depends on
//! covariates 1..3 positively and covariate 4 negatively, and censoring times
//! are uniform with an upper bound calibrated to hit a target censoring rate.
//! Every replicate runs the screening pipeline on both the true and the
//! error-contaminated covariates and the report aggregates selection
//! proportions per method.

use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Open01, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::dcorr::CenteredResponse;
use crate::error::{Error, Result};
use crate::error_model::{
    sigma_from_repeats, sigma_from_validation, ErrorCovariance, RepeatedMeasurements,
    ValidationPairs,
};
use crate::screening::{
    default_q, default_q1, select, CorrectionMode, ScreeningConfig, SelectionRule, StopReason,
};
use crate::survival::CensoredSample;

/// Number of pilot draws used when calibrating the censoring bound.
const CALIBRATION_PILOT: usize = 10_000;
/// Tolerance on the pilot censoring rate during bisection.
const CALIBRATION_TOL: f64 = 0.005;
/// Tolerance on the post-calibration check against the pilot sample.
const CALIBRATION_CHECK_TOL: f64 = 0.02;

/// Failure-time model linking covariates to the event time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Proportional hazards: extreme-value error on the log scale.
    Ph,
    /// Proportional odds: standard logistic error on the log scale.
    Po,
}

/// What the analyst knows about the measurement-error covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Knowledge {
    /// The true covariance is handed to the screen.
    Known,
    /// The covariance is estimated from repeated measurements per subject.
    Repeated {
        /// Replicates per subject.
        replicates: usize,
    },
    /// The covariance is estimated from an external validation sample.
    Validation {
        /// Validation sample size.
        m: usize,
    },
    /// Covariates are observed without error.
    ErrorFree,
}

/// Full description of one simulation scenario.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioConfig {
    /// Failure-time model.
    pub model: ModelKind,
    /// Equicorrelation parameter in (0, 1).
    pub rho: f64,
    /// Measurement-error variance per coordinate; `None` only for error-free runs.
    pub sigma_e2: Option<f64>,
    /// Source of the error covariance used by the corrected screen.
    pub knowledge: Knowledge,
    /// Subjects per replicate.
    pub n: usize,
    /// Covariates per subject.
    pub p: usize,
    /// Number of Monte Carlo replications.
    pub replications: usize,
    /// Master seed; streams are derived per replicate.
    pub seed: u64,
    /// Target censoring rate in (0, 1).
    pub censoring_target: f64,
    /// Override for the screening budget; defaults to `floor(n / ln n)`.
    pub q: Option<usize>,
    /// Override for the stage-one budget; defaults to `ceil(0.4 q)`.
    pub q1: Option<usize>,
}

impl ScenarioConfig {
    /// Desk-scale scenario: n = 300, p = 500, 100 replications.
    pub fn desk(model: ModelKind, rho: f64, sigma_e2: Option<f64>, knowledge: Knowledge) -> Self {
        Self {
            model,
            rho,
            sigma_e2,
            knowledge,
            n: 300,
            p: 500,
            replications: 100,
            seed: 1729,
            censoring_target: 0.2,
            q: None,
            q1: None,
        }
    }

    /// Paper-scale variant of the same scenario: n = 400, p = 2000, 1000 replications.
    pub fn paper_scale(mut self) -> Self {
        self.n = 400;
        self.p = 2000;
        self.replications = 1000;
        self
    }

    /// Screening budget after applying the default.
    pub fn resolved_q(&self) -> usize {
        self.q.unwrap_or_else(|| default_q(self.n, self.p))
    }

    /// Stage-one budget after applying the default.
    pub fn resolved_q1(&self) -> usize {
        self.q1.unwrap_or_else(|| default_q1(self.resolved_q()))
    }

    /// Checks parameter ranges and the knowledge/variance pairing.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput("need at least two subjects".into()));
        }
        if self.p < 4 {
            return Err(Error::InvalidInput(
                "the design needs at least four covariates".into(),
            ));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidInput(format!(
                "rho must lie in (0, 1), got {}",
                self.rho
            )));
        }
        if !(self.censoring_target > 0.0 && self.censoring_target < 1.0) {
            return Err(Error::InvalidInput(format!(
                "censoring target must lie in (0, 1), got {}",
                self.censoring_target
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidInput("need at least one replication".into()));
        }
        match (self.knowledge, self.sigma_e2) {
            (Knowledge::ErrorFree, Some(_)) => Err(Error::InvalidInput(
                "error-free runs must not set an error variance".into(),
            )),
            (Knowledge::ErrorFree, None) => Ok(()),
            (_, None) => Err(Error::InvalidInput(
                "this knowledge scenario needs an error variance".into(),
            )),
            (_, Some(s)) => {
                if !s.is_finite() || s < 0.0 {
                    Err(Error::InvalidInput(format!(
                        "error variance must be finite and nonnegative, got {s}"
                    )))
                } else {
                    match self.knowledge {
                        Knowledge::Repeated { replicates } if replicates < 2 => {
                            Err(Error::InvalidInput(
                                "repeated-measurement runs need at least two replicates".into(),
                            ))
                        }
                        Knowledge::Validation { m } if m < 2 => Err(Error::InvalidInput(
                            "validation runs need at least two pairs".into(),
                        )),
                        _ => Ok(()),
                    }
                }
            }
        }
    }
}

/// Draws an `n` by `p` covariate matrix with the equicorrelation design.
///
/// For each row a shared factor `w` is drawn first, then the idiosyncratic
/// terms in column order. Column 4 equals `w`; every other column is
/// `sqrt(rho) w + sqrt(1 - rho) z_k`.
pub fn gen_covariates<R: Rng>(n: usize, p: usize, rho: f64, rng: &mut R) -> Result<Array2<f64>> {
    if p < 4 {
        return Err(Error::InvalidInput(
            "the design needs at least four covariates".into(),
        ));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidInput(format!(
            "rho must lie in (0, 1), got {rho}"
        )));
    }
    let sr = rho.sqrt();
    let s1r = (1.0 - rho).sqrt();
    let mut x = Array2::zeros((n, p));
    for i in 0..n {
        let w: f64 = rng.sample(StandardNormal);
        for k in 0..p {
            x[[i, k]] = if k == 3 {
                w
            } else {
                let z: f64 = rng.sample(StandardNormal);
                sr * w + s1r * z
            };
        }
    }
    Ok(x)
}

/// Draws failure times for the rows of `x` under the given model.
///
/// The linear predictor is `x1 + x2 + x3 - 3 sqrt(rho) x4` and the failure
/// time is `exp(lp + eta)` with `eta` the model-specific error drawn per row.
pub fn gen_failure<R: Rng>(
    x: ArrayView2<f64>,
    model: ModelKind,
    rho: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if x.ncols() < 4 {
        return Err(Error::InvalidInput(
            "failure generation needs at least four covariates".into(),
        ));
    }
    let coef4 = -3.0 * rho.sqrt();
    let mut times = Vec::with_capacity(x.nrows());
    for row in x.rows() {
        let lp = row[0] + row[1] + row[2] + coef4 * row[3];
        let eta = match model {
            ModelKind::Ph => {
                let e: f64 = rng.sample(Exp1);
                e.ln()
            }
            ModelKind::Po => {
                let u: f64 = rng.sample(Open01);
                (u / (1.0 - u)).ln()
            }
        };
        times.push((lp + eta).exp());
    }
    Ok(times)
}

/// Calibrates the uniform censoring bound `tau_c` to hit `target`.
///
/// Uses a pilot sample of failure times from a four-covariate design. For
/// `C ~ U(0, tau)` the censoring probability given `T = t` is `min(t / tau, 1)`,
/// so the pilot rate is a monotone decreasing function of `tau` and bisection
/// applies. The bracket grows by doubling and halving from `tau = 1`.
pub fn calibrate_censoring<R: Rng>(
    model: ModelKind,
    rho: f64,
    target: f64,
    pilot: usize,
    rng: &mut R,
) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Calibration(format!(
            "target rate must lie in (0, 1), got {target}"
        )));
    }
    if pilot < 100 {
        return Err(Error::Calibration(
            "need at least 100 pilot draws".into(),
        ));
    }
    let x = gen_covariates(pilot, 4, rho, rng)?;
    let times = gen_failure(x.view(), model, rho, rng)?;
    let rate = |tau: f64| -> f64 {
        let mut acc = 0.0;
        for &t in &times {
            acc += (t / tau).min(1.0);
        }
        acc / times.len() as f64
    };
    let mut lo = 1.0;
    let mut hi = 1.0;
    let mut steps = 0;
    while rate(lo) <= target {
        lo *= 0.5;
        steps += 1;
        if steps > 100 {
            return Err(Error::Calibration(
                "could not bracket the target rate from below".into(),
            ));
        }
    }
    steps = 0;
    while rate(hi) >= target {
        hi *= 2.0;
        steps += 1;
        if steps > 100 {
            return Err(Error::Calibration(
                "could not bracket the target rate from above".into(),
            ));
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let r = rate(mid);
        if (r - target).abs() <= CALIBRATION_TOL {
            break;
        }
        if r > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let achieved = rate(mid);
    if (achieved - target).abs() > CALIBRATION_CHECK_TOL {
        return Err(Error::Calibration(format!(
            "calibrated rate {achieved:.4} missed target {target:.4}"
        )));
    }
    Ok(mid)
}

/// Adds measurement error drawn from `sigma` to every row of `x`.
///
/// A zero covariance returns the input unchanged. Diagonal covariances add
/// independent noise per coordinate; general covariances multiply a standard
/// normal vector by a factor of `sigma`. Draws happen row by row in index
/// order.
pub fn add_error<R: Rng>(
    x: ArrayView2<f64>,
    sigma: &ErrorCovariance,
    rng: &mut R,
) -> Result<Array2<f64>> {
    let p = x.ncols();
    if sigma.dim() != p {
        return Err(Error::InvalidInput(format!(
            "error covariance is {} by {} but the design has {} columns",
            sigma.dim(),
            sigma.dim(),
            p
        )));
    }
    if sigma.is_zero() {
        return Ok(x.to_owned());
    }
    let mut out = x.to_owned();
    if sigma.is_diagonal() {
        let sd: Vec<f64> = (0..p).map(|j| sigma.matrix()[[j, j]].sqrt()).collect();
        for mut row in out.rows_mut() {
            for j in 0..p {
                if sd[j] > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    row[j] += sd[j] * z;
                }
            }
        }
        return Ok(out);
    }
    let factor = crate::linalg::psd_factor(sigma.matrix().view());
    let mut z = Array1::zeros(p);
    for mut row in out.rows_mut() {
        for j in 0..p {
            z[j] = rng.sample::<f64, _>(StandardNormal);
        }
        let e = factor.dot(&z);
        for j in 0..p {
            row[j] += e[j];
        }
    }
    Ok(out)
}

/// Draws `replicates` error-contaminated copies of each row of `x`.
///
/// Rows are stacked subject-major: subject `i` occupies rows
/// `i * replicates .. (i + 1) * replicates`. Subject ids are the one-based row
/// numbers formatted as strings.
pub fn gen_repeats<R: Rng>(
    x: ArrayView2<f64>,
    sigma: &ErrorCovariance,
    replicates: usize,
    rng: &mut R,
) -> Result<RepeatedMeasurements> {
    if replicates < 2 {
        return Err(Error::InvalidInput(
            "repeated measurements need at least two replicates per subject".into(),
        ));
    }
    let n = x.nrows();
    let p = x.ncols();
    let mut stacked = Array2::zeros((n * replicates, p));
    let mut ids = Vec::with_capacity(n * replicates);
    for i in 0..n {
        for r in 0..replicates {
            stacked.row_mut(i * replicates + r).assign(&x.row(i));
            ids.push(format!("{}", i + 1));
        }
    }
    let rows = add_error(stacked.view(), sigma, rng)?;
    RepeatedMeasurements::new(ids, rows)
}

/// Draws an external validation sample of `m` true/surrogate pairs.
pub fn gen_validation<R: Rng>(
    m: usize,
    p: usize,
    rho: f64,
    sigma: &ErrorCovariance,
    rng: &mut R,
) -> Result<ValidationPairs> {
    let truth = gen_covariates(m, p, rho, rng)?;
    let starred = add_error(truth.view(), sigma, rng)?;
    ValidationPairs::new(truth, starred)
}

/// Which screening stage a summary row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreenKind {
    /// One-shot marginal screen keeping the top q covariates.
    Fs,
    /// Iterated screen with regression-based improvement rounds.
    Ifs,
}

/// Which covariates and correction a summary row used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    /// Surrogate covariates, no correction.
    Naive,
    /// Surrogate covariates with the corrected score.
    Proposed,
    /// True covariates, no correction needed.
    TrueX,
}

/// Selection proportions for one method over all replications.
#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    /// Screening stage.
    pub screen: ScreenKind,
    /// Covariate source and correction.
    pub variant: VariantKind,
    /// Selection proportion of each of the first four covariates.
    pub ps: [f64; 4],
    /// Proportion of replications selecting all four simultaneously.
    pub pa: f64,
}

/// Side information aggregated over the replications.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    /// Mean observed censoring rate.
    pub mean_censoring_rate: f64,
    /// Share of replications whose true-covariate screen kept covariates 1..3.
    pub fs_true_contains_active: f64,
    /// Share of replications whose surrogate screen kept covariates 1..3.
    pub fs_surrogate_contains_active: f64,
    /// Whether the naive and proposed one-shot screens agreed in every replication.
    pub fs_variants_identical: bool,
    /// Number of replications whose iterated screen stopped on a degenerate step.
    pub degenerate_replicates: usize,
}

/// Aggregated outcome of a scenario run.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    /// Scenario that produced the report.
    pub scenario: ScenarioConfig,
    /// Screening budget used.
    pub q: usize,
    /// Stage-one budget used.
    pub q1: usize,
    /// Calibrated censoring bound.
    pub tau_c: f64,
    /// One row per method.
    pub rows: Vec<MethodSummary>,
    /// Aggregate side information.
    pub diagnostics: Diagnostics,
}

impl ExperimentReport {
    /// Renders the summary rows as a small CSV table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "model,rho,sigma_e2,knowledge,method,variant,ps_x1,ps_x2,ps_x3,ps_x4,pa\n",
        );
        let model = match self.scenario.model {
            ModelKind::Ph => "ph",
            ModelKind::Po => "po",
        };
        let knowledge = match self.scenario.knowledge {
            Knowledge::Known => "known".to_string(),
            Knowledge::Repeated { replicates } => format!("repeated{replicates}"),
            Knowledge::Validation { m } => format!("validation{m}"),
            Knowledge::ErrorFree => "error_free".to_string(),
        };
        let sigma = self
            .scenario
            .sigma_e2
            .map_or_else(|| "0".to_string(), |s| format!("{s}"));
        for row in &self.rows {
            let method = match row.screen {
                ScreenKind::Fs => "fs",
                ScreenKind::Ifs => "ifs",
            };
            let variant = match row.variant {
                VariantKind::Naive => "naive",
                VariantKind::Proposed => "proposed",
                VariantKind::TrueX => "true_x",
            };
            out.push_str(&format!(
                "{model},{},{sigma},{knowledge},{method},{variant},{},{},{},{},{}\n",
                self.scenario.rho, row.ps[0], row.ps[1], row.ps[2], row.ps[3], row.pa
            ));
        }
        out
    }
}

/// Selected index sets from one replication.
struct RepOutcome {
    fs_naive: Vec<usize>,
    fs_proposed: Vec<usize>,
    fs_true: Vec<usize>,
    ifs_naive: Vec<usize>,
    ifs_proposed: Vec<usize>,
    ifs_true: Vec<usize>,
    censored_frac: f64,
    degenerate: bool,
}

/// Runs a full scenario and aggregates selection proportions.
///
/// Replicate `r` draws from stream `r + 1` of the master seed; stream zero is
/// reserved for censoring calibration. Replicates run in parallel and are
/// collected in index order, so the report does not depend on the worker
/// count.
pub fn run_experiment(config: &ScenarioConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let q = config.resolved_q();
    let q1 = config.resolved_q1();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(0);
    let tau_c = calibrate_censoring(
        config.model,
        config.rho,
        config.censoring_target,
        CALIBRATION_PILOT,
        &mut rng,
    )?;
    let sigma_true = match config.sigma_e2 {
        Some(s) => crate::error_model::assumed_diagonal(config.p, s)?,
        None => ErrorCovariance::zero(config.p),
    };
    let outcomes: Vec<RepOutcome> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            run_replicate(config, q, q1, tau_c, &sigma_true, r).map_err(|e| Error::Replication {
                index: r,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let specs: [(ScreenKind, VariantKind, fn(&RepOutcome) -> &[usize]); 6] = [
        (ScreenKind::Fs, VariantKind::Naive, |o| &o.fs_naive),
        (ScreenKind::Fs, VariantKind::Proposed, |o| &o.fs_proposed),
        (ScreenKind::Fs, VariantKind::TrueX, |o| &o.fs_true),
        (ScreenKind::Ifs, VariantKind::Naive, |o| &o.ifs_naive),
        (ScreenKind::Ifs, VariantKind::Proposed, |o| &o.ifs_proposed),
        (ScreenKind::Ifs, VariantKind::TrueX, |o| &o.ifs_true),
    ];
    let mut rows = Vec::with_capacity(6);
    for (screen, variant, pick) in specs {
        let (ps, pa) = tally(&outcomes, pick);
        rows.push(MethodSummary {
            screen,
            variant,
            ps,
            pa,
        });
    }
    let nrep = outcomes.len() as f64;
    let contains_active = |set: &Vec<usize>| [0usize, 1, 2].iter().all(|j| set.contains(j));
    let diagnostics = Diagnostics {
        mean_censoring_rate: outcomes.iter().map(|o| o.censored_frac).sum::<f64>() / nrep,
        fs_true_contains_active: outcomes.iter().filter(|o| contains_active(&o.fs_true)).count()
            as f64
            / nrep,
        fs_surrogate_contains_active: outcomes
            .iter()
            .filter(|o| contains_active(&o.fs_proposed))
            .count() as f64
            / nrep,
        fs_variants_identical: outcomes.iter().all(|o| o.fs_naive == o.fs_proposed),
        degenerate_replicates: outcomes.iter().filter(|o| o.degenerate).count(),
    };
    Ok(ExperimentReport {
        scenario: config.clone(),
        q,
        q1,
        tau_c,
        rows,
        diagnostics,
    })
}

/// Selection proportions of the first four covariates plus the joint rate.
fn tally(outcomes: &[RepOutcome], pick: fn(&RepOutcome) -> &[usize]) -> ([f64; 4], f64) {
    let nrep = outcomes.len() as f64;
    let mut counts = [0usize; 4];
    let mut all = 0usize;
    for o in outcomes {
        let mut hit = [false; 4];
        for &j in pick(o) {
            if j < 4 {
                hit[j] = true;
            }
        }
        for k in 0..4 {
            if hit[k] {
                counts[k] += 1;
            }
        }
        if hit.iter().all(|&h| h) {
            all += 1;
        }
    }
    let ps = [
        counts[0] as f64 / nrep,
        counts[1] as f64 / nrep,
        counts[2] as f64 / nrep,
        counts[3] as f64 / nrep,
    ];
    (ps, all as f64 / nrep)
}

/// Generates, screens, and summarizes one replication.
fn run_replicate(
    config: &ScenarioConfig,
    q: usize,
    q1: usize,
    tau_c: f64,
    sigma_true: &ErrorCovariance,
    r: usize,
) -> Result<RepOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(r as u64 + 1);
    let n = config.n;
    let p = config.p;
    let x = gen_covariates(n, p, config.rho, &mut rng)?;
    let t = gen_failure(x.view(), config.model, config.rho, &mut rng)?;
    let mut time = Vec::with_capacity(n);
    let mut status = Vec::with_capacity(n);
    for &ti in &t {
        let c: f64 = rng.random_range(0.0..tau_c);
        if ti <= c {
            time.push(ti);
            status.push(1);
        } else {
            time.push(c);
            status.push(0);
        }
    }
    let censored_frac = status.iter().filter(|&&d| d == 0).count() as f64 / n as f64;
    let sample = CensoredSample::new(time, status)?;
    let imputed = crate::survival::impute_response(&sample)?;

    // Surrogates and the covariance handed to the corrected screen.
    let (x_star, sigma_used) = match config.knowledge {
        Knowledge::Known => (add_error(x.view(), sigma_true, &mut rng)?, sigma_true.clone()),
        Knowledge::Repeated { replicates } => {
            let reps = gen_repeats(x.view(), sigma_true, replicates, &mut rng)?;
            let sigma_hat = sigma_from_repeats(&reps)?;
            (reps.first_replicates(), sigma_hat)
        }
        Knowledge::Validation { m } => {
            let x_star = add_error(x.view(), sigma_true, &mut rng)?;
            let pairs = gen_validation(m, p, config.rho, sigma_true, &mut rng)?;
            (x_star, sigma_from_validation(&pairs)?)
        }
        Knowledge::ErrorFree => (x.clone(), ErrorCovariance::zero(p)),
    };
    let sigma_zero = ErrorCovariance::zero(p);

    let resp = CenteredResponse::new(&imputed)?;
    let fs_cfg = ScreeningConfig {
        n,
        p,
        q,
        q1: q,
        mode: CorrectionMode::Naive,
        rule: SelectionRule::TopQ,
        max_rounds: q,
    };
    let ifs_naive_cfg = ScreeningConfig {
        q1,
        ..fs_cfg.clone()
    };
    let ifs_corr_cfg = ScreeningConfig {
        mode: CorrectionMode::Corrected,
        ..ifs_naive_cfg.clone()
    };

    let util_star = crate::dcorr::sweep_with(&resp, x_star.view())?;
    let fs_set = select(&util_star, &fs_cfg)?.sorted_indices();
    let ifs_naive_res = crate::screening::continue_from_stage1(
        &resp,
        util_star.clone(),
        x_star.view(),
        &sigma_zero,
        &ifs_naive_cfg,
    )?;
    let ifs_corr_res = crate::screening::continue_from_stage1(
        &resp,
        util_star,
        x_star.view(),
        &sigma_used,
        &ifs_corr_cfg,
    )?;

    let (fs_true, ifs_true_res) = if matches!(config.knowledge, Knowledge::ErrorFree) {
        (fs_set.clone(), None)
    } else {
        let util_true = crate::dcorr::sweep_with(&resp, x.view())?;
        let fs_true = select(&util_true, &fs_cfg)?.sorted_indices();
        let res = crate::screening::continue_from_stage1(
            &resp,
            util_true,
            x.view(),
            &sigma_zero,
            &ifs_naive_cfg,
        )?;
        (fs_true, Some(res))
    };

    let degenerate = |reason: &StopReason| matches!(reason, StopReason::Degenerate(_));
    let mut any_degenerate =
        degenerate(&ifs_naive_res.reason) || degenerate(&ifs_corr_res.reason);
    let ifs_naive = ifs_naive_res.active.sorted_indices();
    let ifs_proposed = ifs_corr_res.active.sorted_indices();
    let ifs_true = match ifs_true_res {
        Some(res) => {
            any_degenerate = any_degenerate || degenerate(&res.reason);
            res.active.sorted_indices()
        }
        None => ifs_naive.clone(),
    };
    Ok(RepOutcome {
        fs_naive: fs_set.clone(),
        fs_proposed: fs_set,
        fs_true,
        ifs_naive,
        ifs_proposed,
        ifs_true,
        censored_frac,
        degenerate: any_degenerate,
    })
}
