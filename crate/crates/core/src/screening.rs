//! Marginal and iterated feature screening with the corrected-score
//! regression step for error-contaminated covariates.

use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use crate::dcorr::{sweep_with, CenteredResponse};
use crate::error::{Error, Result};
use crate::error_model::{partition_sigma, ErrorCovariance, SigmaBlocks};
use crate::linalg;

/// Whether the regression step corrects for measurement error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionMode {
    /// Plain least squares on the surrogates.
    Naive,
    /// Corrected score subtracting n * Sigma_eps blocks.
    Corrected,
}

/// How utilities turn into a selected set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum SelectionRule {
    /// Keep the q largest utilities.
    TopQ,
    /// Keep utilities at or above c * n^(-zeta).
    Threshold {
        /// Multiplier c > 0.
        c: f64,
        /// Rate exponent zeta in (0, 1/2).
        zeta: f64,
    },
}

impl SelectionRule {
    fn cutoff(&self, n: usize) -> Option<f64> {
        match self {
            SelectionRule::TopQ => None,
            SelectionRule::Threshold { c, zeta } => Some(c * (n as f64).powf(-zeta)),
        }
    }
}

/// Screening configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ScreeningConfig {
    /// Sample size.
    pub n: usize,
    /// Number of candidate covariates.
    pub p: usize,
    /// Final active-set size bound.
    pub q: usize,
    /// First-stage size for the iterated procedure.
    pub q1: usize,
    /// Regression correction mode.
    pub mode: CorrectionMode,
    /// Selection rule.
    pub rule: SelectionRule,
    /// Hard cap on iteration rounds.
    pub max_rounds: usize,
}

/// Default screening size floor(n / ln n), clamped into [1, p].
pub fn default_q(n: usize, p: usize) -> usize {
    let q = (n as f64 / (n as f64).ln()).floor() as usize;
    q.clamp(1, p)
}

/// Default first-stage size ceil(0.4 q).
pub fn default_q1(q: usize) -> usize {
    ((0.4 * q as f64).ceil() as usize).clamp(1, q)
}

impl ScreeningConfig {
    /// Defaults for a given sample: q = floor(n/ln n), q1 = ceil(0.4 q),
    /// corrected mode, top-q rule.
    pub fn for_sample(n: usize, p: usize) -> Self {
        let q = default_q(n, p);
        Self {
            n,
            p,
            q,
            q1: default_q1(q),
            mode: CorrectionMode::Corrected,
            rule: SelectionRule::TopQ,
            max_rounds: q,
        }
    }

    /// Checks internal consistency.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput(format!(
                "n = {} too small for screening",
                self.n
            )));
        }
        if self.q == 0 || self.q > self.p {
            return Err(Error::InvalidInput(format!(
                "q = {} must lie in [1, p = {}]",
                self.q, self.p
            )));
        }
        if self.q1 == 0 || self.q1 > self.q {
            return Err(Error::InvalidInput(format!(
                "q1 = {} must lie in [1, q = {}]",
                self.q1, self.q
            )));
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidInput("max_rounds must be positive".into()));
        }
        if let SelectionRule::Threshold { c, zeta } = self.rule {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "threshold multiplier c = {c} must be finite positive"
                )));
            }
            if !(zeta > 0.0 && zeta < 0.5) {
                return Err(Error::InvalidInput(format!(
                    "threshold exponent zeta = {zeta} must lie in (0, 1/2)"
                )));
            }
        }
        Ok(())
    }
}

/// One selected covariate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActiveEntry {
    /// Zero-based column index.
    pub index: usize,
    /// Utility at the moment of selection.
    pub utility: f64,
    /// Round of inclusion, starting at 1.
    pub round: usize,
}

/// Selected covariates in selection order: rounds ascending, utilities
/// descending inside a round, ties toward the smaller index.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ActiveSet {
    entries: Vec<ActiveEntry>,
}

impl ActiveSet {
    /// Entries in selection order.
    pub fn entries(&self) -> &[ActiveEntry] {
        &self.entries
    }

    /// Indices in selection order.
    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.index).collect()
    }

    /// Indices in ascending order.
    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut idx = self.indices();
        idx.sort_unstable();
        idx
    }

    /// Number of selected covariates.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True when nothing is selected.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when the index was selected.
    pub fn contains(&self, index: usize) -> bool {
        self.entries.iter().any(|e| e.index == index)
    }
}

/// Why iteration stopped.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "reason", content = "detail")]
pub enum StopReason {
    /// The active set reached q covariates.
    SizeReached,
    /// No candidate cleared the selection rule in a round.
    NoNewCovariates,
    /// The round cap was hit first.
    RoundLimit,
    /// A regression step degenerated; the set so far stands.
    Degenerate(String),
}

/// Per-round record of candidates, utilities, and additions.
#[derive(Debug, Clone)]
pub struct RoundTrace {
    /// Round number, starting at 1.
    pub round: usize,
    /// Candidate column indices screened this round.
    pub candidates: Vec<usize>,
    /// Utilities aligned with `candidates`.
    pub utilities: Vec<f64>,
    /// Regression coefficients used to residualize, absent in round 1.
    pub beta: Option<Array2<f64>>,
    /// Indices added this round.
    pub added: Vec<usize>,
}

/// Full screening output.
#[derive(Debug, Clone)]
pub struct ScreeningResult {
    /// Configuration the run used.
    pub config: ScreeningConfig,
    /// Selected covariates.
    pub active: ActiveSet,
    /// Per-round traces.
    pub rounds: Vec<RoundTrace>,
    /// Termination reason.
    pub reason: StopReason,
}

fn ranked_indices(utilities: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..utilities.len()).collect();
    idx.sort_by(|&a, &b| utilities[b].total_cmp(&utilities[a]).then(a.cmp(&b)));
    idx
}

/// Selects an active set from marginal utilities under the configured rule.
pub fn select(utilities: &[f64], config: &ScreeningConfig) -> Result<ActiveSet> {
    config.validate()?;
    if utilities.len() != config.p {
        return Err(Error::InvalidInput(format!(
            "{} utilities for p = {} covariates",
            utilities.len(),
            config.p
        )));
    }
    let picked = pick(utilities, config.q, config.rule.cutoff(config.n));
    Ok(ActiveSet {
        entries: picked
            .into_iter()
            .map(|j| ActiveEntry {
                index: j,
                utility: utilities[j],
                round: 1,
            })
            .collect(),
    })
}

fn pick(utilities: &[f64], budget: usize, cutoff: Option<f64>) -> Vec<usize> {
    ranked_indices(utilities)
        .into_iter()
        .filter(|&j| cutoff.map_or(true, |c| utilities[j] >= c))
        .take(budget)
        .collect()
}

fn gather_columns(x: ArrayView2<f64>, idx: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((x.nrows(), idx.len()), |(i, j)| x[[i, idx[j]]])
}

fn gram_pair(xi: ArrayView2<f64>, xic: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
    let xit = xi.t();
    (xit.dot(&xi), xit.dot(&xic))
}

fn check_regression_shapes(xi: ArrayView2<f64>, xic: ArrayView2<f64>) -> Result<()> {
    if xi.nrows() != xic.nrows() {
        return Err(Error::InvalidInput(format!(
            "design blocks disagree on n: {} vs {}",
            xi.nrows(),
            xic.nrows()
        )));
    }
    if xi.ncols() == 0 || xic.ncols() == 0 {
        return Err(Error::InvalidInput("regression blocks must be nonempty".into()));
    }
    Ok(())
}

/// Least-squares coefficients regressing every inactive column on the
/// active block: (X_I' X_I)^{-1} X_I' X_Ic.
pub fn naive_beta(xi: ArrayView2<f64>, xic: ArrayView2<f64>) -> Result<Array2<f64>> {
    check_regression_shapes(xi, xic)?;
    let (gram, rhs) = gram_pair(xi, xic);
    match linalg::solve_with_cond(gram.view(), rhs.view()) {
        Ok((beta, _)) => Ok(beta),
        Err(cond) => Err(Error::RankDeficient { cond }),
    }
}

/// Corrected-score coefficients
/// (X*_I' X*_I - n Sigma_II)^{-1} (X*_I' X*_Ic - n Sigma_IIc).
///
/// With all-zero Sigma blocks this reproduces `naive_beta` bit for bit
/// on the success path. A singular system is retried once with ridge
/// jitter 1e-8 * trace / q before erroring.
pub fn corrected_beta(
    xi: ArrayView2<f64>,
    xic: ArrayView2<f64>,
    blocks: &SigmaBlocks,
    n: usize,
) -> Result<Array2<f64>> {
    check_regression_shapes(xi, xic)?;
    let q = xi.ncols();
    if blocks.aa().dim() != (q, q) || blocks.ab().dim() != (q, xic.ncols()) {
        return Err(Error::InvalidInput(format!(
            "sigma blocks shaped {:?}/{:?} do not match design blocks {}x{}",
            blocks.aa().dim(),
            blocks.ab().dim(),
            q,
            xic.ncols()
        )));
    }
    let (gram, rhs) = gram_pair(xi, xic);
    let nf = n as f64;
    let mut lhs = gram;
    for i in 0..q {
        for j in 0..q {
            lhs[[i, j]] -= nf * blocks.aa()[[i, j]];
        }
    }
    let mut corrected_rhs = rhs;
    for i in 0..q {
        for j in 0..xic.ncols() {
            corrected_rhs[[i, j]] -= nf * blocks.ab()[[i, j]];
        }
    }
    match linalg::solve_with_cond(lhs.view(), corrected_rhs.view()) {
        Ok((beta, _)) => Ok(beta),
        Err(_) => {
            let trace: f64 = (0..q).map(|i| lhs[[i, i]]).sum();
            let mut lambda = 1e-8 * trace.abs() / q as f64;
            if lambda == 0.0 {
                lambda = 1e-8;
            }
            for i in 0..q {
                lhs[[i, i]] += lambda;
            }
            match linalg::solve_with_cond(lhs.view(), corrected_rhs.view()) {
                Ok((beta, _)) => Ok(beta),
                Err(cond) => Err(Error::CorrectedDegenerate { cond }),
            }
        }
    }
}

/// Residual block X_Ic - X_I beta.
pub fn residualize(
    xic: ArrayView2<f64>,
    xi: ArrayView2<f64>,
    beta: ArrayView2<f64>,
) -> Result<Array2<f64>> {
    check_regression_shapes(xi, xic)?;
    if beta.dim() != (xi.ncols(), xic.ncols()) {
        return Err(Error::InvalidInput(format!(
            "beta shaped {:?} does not match blocks {}x{}",
            beta.dim(),
            xi.ncols(),
            xic.ncols()
        )));
    }
    Ok(&xic - &xi.dot(&beta))
}

/// Iterated screening of an imputed response against surrogate columns.
///
/// Round 1 screens every column marginally and keeps q1. Each later
/// round regresses the inactive block on the active one (mode-dependent
/// coefficients), rescreens the residuals against the same response, and
/// adds up to q - |I| covariates, stopping at q covariates, when nothing
/// new clears the rule, at the round cap, or on a degenerate regression.
pub fn iterative_screen(
    imputed: &[f64],
    x: ArrayView2<f64>,
    sigma: &ErrorCovariance,
    config: &ScreeningConfig,
) -> Result<ScreeningResult> {
    config.validate()?;
    if x.nrows() != config.n || imputed.len() != config.n {
        return Err(Error::InvalidInput(format!(
            "data has {} rows, response {}, config n = {}",
            x.nrows(),
            imputed.len(),
            config.n
        )));
    }
    if x.ncols() != config.p {
        return Err(Error::InvalidInput(format!(
            "data has {} columns, config p = {}",
            x.ncols(),
            config.p
        )));
    }
    if sigma.dim() != config.p {
        return Err(Error::InvalidInput(format!(
            "sigma dimension {} does not match p = {}",
            sigma.dim(),
            config.p
        )));
    }
    let resp = CenteredResponse::new(imputed)?;
    let utilities = sweep_with(&resp, x)?;
    continue_from_stage1(&resp, utilities, x, sigma, config)
}

/// Continues iteration from precomputed round-1 utilities.
pub(crate) fn continue_from_stage1(
    resp: &CenteredResponse,
    stage1_utilities: Vec<f64>,
    x: ArrayView2<f64>,
    sigma: &ErrorCovariance,
    config: &ScreeningConfig,
) -> Result<ScreeningResult> {
    let cutoff = config.rule.cutoff(config.n);
    let first = pick(&stage1_utilities, config.q1, cutoff);
    let mut active = ActiveSet::default();
    for &j in &first {
        active.entries.push(ActiveEntry {
            index: j,
            utility: stage1_utilities[j],
            round: 1,
        });
    }
    let stage1_empty = first.is_empty();
    let mut rounds = vec![RoundTrace {
        round: 1,
        candidates: (0..config.p).collect(),
        utilities: stage1_utilities,
        beta: None,
        added: first,
    }];
    let mut reason = if stage1_empty {
        Some(StopReason::NoNewCovariates)
    } else {
        None
    };
    let mut round = 1;
    while reason.is_none() && active.len() < config.q && round < config.max_rounds {
        round += 1;
        let act = active.sorted_indices();
        let inact: Vec<usize> = {
            let mut mask = vec![true; config.p];
            for &a in &act {
                mask[a] = false;
            }
            (0..config.p).filter(|&j| mask[j]).collect()
        };
        if inact.is_empty() {
            reason = Some(StopReason::SizeReached);
            break;
        }
        let xi = gather_columns(x, &act);
        let xic = gather_columns(x, &inact);
        let beta = match config.mode {
            CorrectionMode::Naive => naive_beta(xi.view(), xic.view()),
            CorrectionMode::Corrected => {
                let blocks = partition_sigma(sigma, &act)?;
                corrected_beta(xi.view(), xic.view(), &blocks, config.n)
            }
        };
        let beta = match beta {
            Ok(b) => b,
            Err(e) => {
                reason = Some(StopReason::Degenerate(e.to_string()));
                break;
            }
        };
        let resid = residualize(xic.view(), xi.view(), beta.view())?;
        let utilities = sweep_with(resp, resid.view())?;
        let budget = config.q - active.len();
        let added_local: Vec<usize> = {
            let mut order: Vec<usize> = (0..inact.len()).collect();
            order.sort_by(|&a, &b| {
                utilities[b]
                    .total_cmp(&utilities[a])
                    .then(inact[a].cmp(&inact[b]))
            });
            order
                .into_iter()
                .filter(|&j| cutoff.map_or(true, |c| utilities[j] >= c))
                .take(budget)
                .collect()
        };
        let added: Vec<usize> = added_local.iter().map(|&j| inact[j]).collect();
        for &j in &added_local {
            active.entries.push(ActiveEntry {
                index: inact[j],
                utility: utilities[j],
                round,
            });
        }
        let empty = added.is_empty();
        rounds.push(RoundTrace {
            round,
            candidates: inact,
            utilities,
            beta: Some(beta),
            added,
        });
        if empty {
            reason = Some(StopReason::NoNewCovariates);
            break;
        }
    }
    let reason = reason.unwrap_or(if active.len() >= config.q {
        StopReason::SizeReached
    } else {
        StopReason::RoundLimit
    });
    Ok(ScreeningResult {
        config: config.clone(),
        active,
        rounds,
        reason,
    })
}
