//! Censoring-aware response machinery: Kaplan-Meier censoring survivor,
//! IPCW failure-time CDF, and conditional-mean imputation of censored
//! responses.

use crate::error::{Error, Result};

/// Right-censored sample: observed times and event indicators.
#[derive(Debug, Clone)]
pub struct CensoredSample {
    time: Vec<f64>,
    status: Vec<u8>,
}

impl CensoredSample {
    /// Validates times (finite, nonnegative) and statuses (0 or 1).
    pub fn new(time: Vec<f64>, status: Vec<u8>) -> Result<Self> {
        if time.len() != status.len() {
            return Err(Error::InvalidInput(format!(
                "time and status lengths differ: {} vs {}",
                time.len(),
                status.len()
            )));
        }
        if time.is_empty() {
            return Err(Error::InvalidInput("sample is empty".into()));
        }
        for (i, t) in time.iter().enumerate() {
            if !t.is_finite() || *t < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "time {} is {}, expected finite nonnegative",
                    i, t
                )));
            }
        }
        if let Some(i) = status.iter().position(|s| *s > 1) {
            return Err(Error::InvalidInput(format!(
                "status {} is {}, expected 0 or 1",
                i, status[i]
            )));
        }
        Ok(Self { time, status })
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.time.len()
    }

    /// True when the sample has no observations (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Observed times.
    pub fn times(&self) -> &[f64] {
        &self.time
    }

    /// Event indicators, 1 = event and 0 = censored.
    pub fn statuses(&self) -> &[u8] {
        &self.status
    }

    /// True when observation i is an event.
    pub fn is_event(&self, i: usize) -> bool {
        self.status[i] == 1
    }

    /// Count of events.
    pub fn n_events(&self) -> usize {
        self.status.iter().filter(|s| **s == 1).count()
    }

    /// Largest observed time.
    pub fn max_time(&self) -> f64 {
        self.time.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    fn sorted_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.time[a].total_cmp(&self.time[b]).then(a.cmp(&b)));
        idx
    }
}

/// Boundary convention of a piecewise-constant estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Left-continuous survivor: constant on (knot_j, knot_{j+1}], starts at 1.
    SurvivorLeftContinuous,
    /// Right-continuous CDF: constant on [knot_j, knot_{j+1}), starts at 0.
    CdfRightContinuous,
}

/// Piecewise-constant step function with sorted knots and [0, 1] values.
#[derive(Debug, Clone)]
pub struct StepFunction {
    kind: StepKind,
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    /// Validates knots (strictly increasing, finite) and values
    /// ([0, 1], monotone in the direction implied by the kind).
    pub fn new(kind: StepKind, knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "knot and value lengths differ: {} vs {}",
                knots.len(),
                values.len()
            )));
        }
        for w in knots.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidInput(
                    "knots must be strictly increasing".into(),
                ));
            }
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidInput("knots must be finite".into()));
        }
        let mut prev = match kind {
            StepKind::SurvivorLeftContinuous => 1.0,
            StepKind::CdfRightContinuous => 0.0,
        };
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 || *v > 1.0 {
                return Err(Error::InvalidInput(format!(
                    "step value {} is {}, expected inside [0, 1]",
                    i, v
                )));
            }
            let ok = match kind {
                StepKind::SurvivorLeftContinuous => *v <= prev,
                StepKind::CdfRightContinuous => *v >= prev,
            };
            if !ok {
                return Err(Error::InvalidInput(format!(
                    "step values violate monotonicity at knot {}",
                    i
                )));
            }
            prev = *v;
        }
        Ok(Self { kind, knots, values })
    }

    /// Value before the first knot.
    pub fn initial(&self) -> f64 {
        match self.kind {
            StepKind::SurvivorLeftContinuous => 1.0,
            StepKind::CdfRightContinuous => 0.0,
        }
    }

    /// Evaluates the step function at y under its boundary convention.
    pub fn value(&self, y: f64) -> f64 {
        let idx = match self.kind {
            StepKind::SurvivorLeftContinuous => self.knots.partition_point(|k| *k < y),
            StepKind::CdfRightContinuous => self.knots.partition_point(|k| *k <= y),
        };
        if idx == 0 {
            self.initial()
        } else {
            self.values[idx - 1]
        }
    }

    /// Knot locations.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Values on the intervals following each knot.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Boundary convention.
    pub fn kind(&self) -> StepKind {
        self.kind
    }

    /// Last strictly positive level, counting the initial value.
    pub fn last_positive_value(&self) -> f64 {
        let mut last = self.initial();
        for v in &self.values {
            if *v > 0.0 {
                last = *v;
            }
        }
        last
    }
}

/// Kaplan-Meier estimator of the censoring survivor G(y) = P(C >= y).
///
/// Censorings are the "events" here; the estimator is left-continuous, so
/// G(y) multiplies factors over censoring times strictly below y, with
/// risk sets counting observations at or above each time.
pub fn km_censoring_survivor(sample: &CensoredSample) -> StepFunction {
    let n = sample.len();
    let order = sample.sorted_indices();
    let mut knots = Vec::new();
    let mut values = Vec::new();
    let mut level = 1.0f64;
    let mut at_risk = n;
    let mut pos = 0;
    while pos < order.len() {
        let t = sample.time[order[pos]];
        let mut tied = 0usize;
        let mut censored = 0usize;
        while pos < order.len() && sample.time[order[pos]] == t {
            tied += 1;
            if !sample.is_event(order[pos]) {
                censored += 1;
            }
            pos += 1;
        }
        if censored > 0 {
            level *= 1.0 - censored as f64 / at_risk as f64;
            knots.push(t);
            values.push(level.clamp(0.0, 1.0));
        }
        at_risk -= tied;
    }
    StepFunction {
        kind: StepKind::SurvivorLeftContinuous,
        knots,
        values,
    }
}

/// IPCW estimator of the failure-time CDF.
///
/// Event observations are weighted by 1/G(Y_i); the running sum adds one
/// weighted term per event in time order (ties by original index), which
/// makes the estimator collapse to the plain ECDF bit for bit when no
/// observation is censored. Levels are clamped into [0, 1]. When
/// G(Y_i) = 0 the last strictly positive Kaplan-Meier level substitutes.
pub fn failure_cdf_ipcw(sample: &CensoredSample, g: &StepFunction) -> Result<StepFunction> {
    if g.kind() != StepKind::SurvivorLeftContinuous {
        return Err(Error::InvalidInput(
            "censoring estimator must be a left-continuous survivor".into(),
        ));
    }
    let n = sample.len() as f64;
    let fallback = g.last_positive_value();
    let order = sample.sorted_indices();
    let mut knots: Vec<f64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut cum = 0.0f64;
    for i in order {
        if !sample.is_event(i) {
            continue;
        }
        let t = sample.time[i];
        let mut gi = g.value(t);
        if gi <= 0.0 {
            gi = fallback;
        }
        cum += 1.0 / (n * gi);
        let level = cum.clamp(0.0, 1.0);
        if knots.last() == Some(&t) {
            *values.last_mut().expect("knot has a value") = level;
        } else {
            knots.push(t);
            values.push(level);
        }
    }
    StepFunction::new(StepKind::CdfRightContinuous, knots, values)
}

/// Conditional mean E(T | tau > T > y) under a step CDF, computed with
/// exact step quadrature:
/// ({tau - y F(y)} - integral_y^tau F) / (1 - F(y)).
pub fn conditional_mean_beyond(y: f64, f: &StepFunction, tau: f64) -> Result<f64> {
    if f.kind() != StepKind::CdfRightContinuous {
        return Err(Error::InvalidInput(
            "conditional mean needs a right-continuous CDF".into(),
        ));
    }
    if !y.is_finite() || !tau.is_finite() {
        return Err(Error::InvalidInput("y and tau must be finite".into()));
    }
    if y >= tau {
        return Err(Error::Degenerate(format!(
            "conditioning window is empty: y = {y} >= tau = {tau}"
        )));
    }
    let fy = f.value(y);
    if fy >= 1.0 {
        return Err(Error::Degenerate(format!(
            "no mass beyond y = {y}: F(y) = {fy}"
        )));
    }
    let mut integral = 0.0f64;
    let mut prev = y;
    let mut level = fy;
    let start = f.knots().partition_point(|k| *k <= y);
    for j in start..f.knots().len() {
        let k = f.knots()[j];
        if k >= tau {
            break;
        }
        integral += level * (k - prev);
        prev = k;
        level = f.values()[j];
    }
    integral += level * (tau - prev);
    let mean = ((tau - y * fy) - integral) / (1.0 - fy);
    Ok(mean.min(tau))
}

/// Imputes censored responses with tau fixed at the largest observed time.
pub fn impute_response(sample: &CensoredSample) -> Result<Vec<f64>> {
    impute_response_with_tau(sample, sample.max_time())
}

/// Imputes censored responses at a caller-chosen horizon tau.
///
/// Events pass through untouched. A censored time at or beyond tau, or
/// with no estimated mass remaining beyond it, imputes to tau; otherwise
/// the conditional mean over (y, tau] is used.
pub fn impute_response_with_tau(sample: &CensoredSample, tau: f64) -> Result<Vec<f64>> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "tau is {tau}, expected finite positive"
        )));
    }
    let g = km_censoring_survivor(sample);
    let f = failure_cdf_ipcw(sample, &g)?;
    let mut out = Vec::with_capacity(sample.len());
    for i in 0..sample.len() {
        let t = sample.time[i];
        if sample.is_event(i) {
            out.push(t);
        } else if t >= tau || f.value(t) >= 1.0 {
            out.push(tau);
        } else {
            out.push(conditional_mean_beyond(t, &f, tau)?);
        }
    }
    Ok(out)
}
