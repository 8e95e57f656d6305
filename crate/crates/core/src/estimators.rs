//! Drift estimators for `dX = -a X dt + dL` from discrete observations.
//!
//! All estimators share the denominator `S_T = sum_i X_{t_i}^2 (t_{i+1} - t_i)`;
//! they differ in which increments enter the numerator
//! `-sum_i X_{t_i} * dX_i`:
//!
//! * jump-filtered MLE keeps only increments with `|dX_i| <= v`,
//! * least squares keeps all of them,
//! * the oracle uses the true continuous-part increments `dX^c_i`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::levy::{jump_variance_rate, JumpFamily};
use crate::ou::{continuous_part_increments, OuModel, SimulatedPath};

/// Threshold exponent used for the published simulation tables.
pub const DEFAULT_BETA: f64 = 0.3;
/// Exponent that balances the two filtering error types for jump heights with
/// bounded density.
pub const BALANCED_BETA: f64 = 1.0 / 3.0;

/// A discretely observed series: values and the spacing of their times.
pub trait Observations {
    fn values(&self) -> &[f64];
    /// `t_{i+1} - t_i`.
    fn step(&self, i: usize) -> f64;
    /// Largest spacing, the `Delta_n` the threshold is built from.
    fn max_step(&self) -> f64;
}

impl Observations for SimulatedPath {
    fn values(&self) -> &[f64] {
        &self.x
    }

    #[inline]
    fn step(&self, _i: usize) -> f64 {
        self.grid.dt()
    }

    fn max_step(&self) -> f64 {
        self.grid.dt()
    }
}

/// Externally observed `(t, x)` series, possibly unevenly spaced.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedSeries {
    t: Vec<f64>,
    x: Vec<f64>,
}

impl ObservedSeries {
    pub fn new(t: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if t.len() != x.len() {
            return Err(Error::invalid(format!(
                "time and value columns differ in length ({} vs {})",
                t.len(),
                x.len()
            )));
        }
        if x.len() < 3 {
            return Err(Error::invalid(format!(
                "need at least 3 observations, got {}",
                x.len()
            )));
        }
        if let Some(i) = t.iter().chain(&x).position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at position {i}")));
        }
        if let Some(i) = t.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "times must be strictly increasing (row {} -> {})",
                i,
                i + 1
            )));
        }
        Ok(ObservedSeries { t, x })
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }
}

impl From<&SimulatedPath> for ObservedSeries {
    fn from(p: &SimulatedPath) -> Self {
        let t = (0..p.x.len()).map(|i| p.grid.time(i)).collect();
        ObservedSeries { t, x: p.x.clone() }
    }
}

impl Observations for ObservedSeries {
    fn values(&self) -> &[f64] {
        &self.x
    }

    #[inline]
    fn step(&self, i: usize) -> f64 {
        self.t[i + 1] - self.t[i]
    }

    fn max_step(&self) -> f64 {
        self.t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// Jump filter: which increments count as continuous.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FilterSpec {
    /// `v = Delta^beta`, `0 < beta < 1/2`.
    Exponent(f64),
    /// Fixed threshold `v > 0`.
    Absolute(f64),
    /// No filtering (`v = +inf`).
    Off,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec::Exponent(DEFAULT_BETA)
    }
}

impl FilterSpec {
    pub fn exponent(beta: f64) -> Result<Self> {
        let f = FilterSpec::Exponent(beta);
        f.validate()?;
        Ok(f)
    }

    pub fn absolute(v: f64) -> Result<Self> {
        let f = FilterSpec::Absolute(v);
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FilterSpec::Exponent(beta) if !(beta > 0.0 && beta < 0.5) => Err(Error::invalid(
                format!("beta must lie in the open interval (0, 0.5), got {beta}"),
            )),
            FilterSpec::Absolute(v) if !(v > 0.0) => Err(Error::invalid(format!(
                "threshold v must be positive, got {v}"
            ))),
            _ => Ok(()),
        }
    }

    /// Resolved cut-off for a grid with maximal spacing `max_step`.
    pub fn threshold(&self, max_step: f64) -> f64 {
        match *self {
            FilterSpec::Exponent(beta) => max_step.powf(beta),
            FilterSpec::Absolute(v) => v,
            FilterSpec::Off => f64::INFINITY,
        }
    }
}

/// Output of one drift estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateResult {
    pub a_hat: f64,
    /// Increments with `|dX_i| <= threshold`.
    pub kept: usize,
    /// Increments above the threshold ("jumps detected").
    pub filtered: usize,
    pub threshold: f64,
    /// `sum_i X_{t_i}^2 (t_{i+1} - t_i)`.
    pub s_t: f64,
}

/// Which estimator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    FilteredMle,
    OracleMle,
    Lse,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [
        EstimatorKind::FilteredMle,
        EstimatorKind::OracleMle,
        EstimatorKind::Lse,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::FilteredMle => "filtered_mle",
            EstimatorKind::OracleMle => "oracle_mle",
            EstimatorKind::Lse => "lse",
        }
    }

    /// Apply to a simulated path (the oracle needs the ground truth).
    pub fn estimate(&self, path: &SimulatedPath, filter: FilterSpec) -> Result<EstimateResult> {
        match self {
            EstimatorKind::FilteredMle => jump_filtered_mle(path, filter),
            EstimatorKind::OracleMle => oracle_discretized_mle(path),
            EstimatorKind::Lse => least_squares(path),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown estimator {s:?} (expected filtered_mle, oracle_mle or lse)"
                ))
            })
    }
}

fn denominator<O: Observations + ?Sized>(obs: &O) -> Result<f64> {
    let x = obs.values();
    if x.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 2 increments, got {}",
            x.len().saturating_sub(1)
        )));
    }
    let s_t: f64 = (0..x.len() - 1).map(|i| x[i] * x[i] * obs.step(i)).sum();
    if !(s_t > 0.0) {
        return Err(Error::DegeneratePath(format!(
            "sum of X^2 dt is {s_t}; the path is identically zero"
        )));
    }
    Ok(s_t)
}

fn ratio(numerator: f64, kept: usize, s_t: f64) -> f64 {
    if kept == 0 {
        0.0
    } else {
        -numerator / s_t
    }
}

/// Jump-filtered discretized maximum likelihood estimator
/// `-sum X_i dX_i 1{|dX_i| <= v} / sum X_i^2 dt_i`.
///
/// Ties `|dX_i| = v` are kept. If every increment is filtered the estimate
/// is 0.
pub fn jump_filtered_mle<O: Observations + ?Sized>(obs: &O, filter: FilterSpec) -> Result<EstimateResult> {
    filter.validate()?;
    let s_t = denominator(obs)?;
    let x = obs.values();
    let v = filter.threshold(obs.max_step());
    let mut num = 0.0;
    let mut kept = 0;
    for i in 0..x.len() - 1 {
        let dx = x[i + 1] - x[i];
        if dx.abs() <= v {
            num += x[i] * dx;
            kept += 1;
        }
    }
    let n = x.len() - 1;
    Ok(EstimateResult {
        a_hat: ratio(num, kept, s_t),
        kept,
        filtered: n - kept,
        threshold: v,
        s_t,
    })
}

/// Least squares estimator `-sum X_i dX_i / sum X_i^2 dt_i`, i.e. the
/// filtered estimator with the filter switched off.
pub fn least_squares<O: Observations + ?Sized>(obs: &O) -> Result<EstimateResult> {
    jump_filtered_mle(obs, FilterSpec::Off)
}

/// Discretized MLE computed from the true continuous-part increments.
pub fn oracle_discretized_mle(path: &SimulatedPath) -> Result<EstimateResult> {
    let s_t = denominator(path)?;
    let dxc = continuous_part_increments(path);
    let num: f64 = path.x.iter().zip(&dxc).map(|(x, d)| x * d).sum();
    let n = dxc.len();
    Ok(EstimateResult {
        a_hat: ratio(num, n, s_t),
        kept: n,
        filtered: 0,
        threshold: f64::INFINITY,
        s_t,
    })
}

/// `E[X_inf^2] = Var(L_1) / (2a) + (E[L_1] / a)^2`.
pub fn stationary_second_moment(model: &OuModel) -> f64 {
    let a = model.a();
    let levy = model.levy();
    let mean = levy.mean_rate() / a;
    levy.variance_rate() / (2.0 * a) + mean * mean
}

fn require_volatility(model: &OuModel) -> Result<f64> {
    let s = model.levy().sigma_w();
    if s > 0.0 {
        Ok(s * s)
    } else {
        Err(Error::UnsupportedModel(
            "asymptotic variance needs sigma_w > 0".into(),
        ))
    }
}

/// Asymptotic variance of `sqrt(T) (a_hat - a)` for the MLE:
/// `sigma_w^2 / E[X_inf^2]`.
pub fn asymptotic_variance_mle(model: &OuModel) -> Result<f64> {
    let s2 = require_volatility(model)?;
    Ok(s2 / stationary_second_moment(model))
}

/// Closed form of the MLE asymptotic variance for compound Poisson jumps,
/// `2 a sigma_w^2 / (sigma_w^2 + intensity * height_var)`.
pub fn asymptotic_variance_mle_compound_poisson(
    a: f64,
    sigma_w: f64,
    intensity: f64,
    height_var: f64,
) -> f64 {
    let s2 = sigma_w * sigma_w;
    2.0 * a * s2 / (s2 + intensity * height_var)
}

/// Asymptotic variance of the least squares estimator: the MLE variance plus
/// `\int x^2 mu(dx) / E[X_inf^2]`.
pub fn asymptotic_variance_lse(model: &OuModel) -> Result<f64> {
    let mle = asymptotic_variance_mle(model)?;
    Ok(mle + jump_variance_rate(model.levy()) / stationary_second_moment(model))
}

/// `sqrt(S_T) / sigma_w * (a_hat - a_true)`, asymptotically standard normal.
pub fn studentized_statistic(result: &EstimateResult, a_true: f64, sigma_w: f64) -> Result<f64> {
    if !(result.s_t > 0.0) {
        return Err(Error::DegeneratePath("S_T = 0".into()));
    }
    if !(sigma_w > 0.0) {
        return Err(Error::invalid(format!("sigma_w must be positive, got {sigma_w}")));
    }
    Ok(result.s_t.sqrt() / sigma_w * (result.a_hat - a_true))
}

/// Asymptotic confidence interval `a_hat -/+ z sigma_w / sqrt(S_T)`.
pub fn confidence_interval(result: &EstimateResult, sigma_w: f64, z: f64) -> (f64, f64) {
    let half = z * sigma_w / result.s_t.sqrt();
    (result.a_hat - half, result.a_hat + half)
}

/// Cross-tabulation of the filter decision against the true jump indicator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct JumpConfusion {
    /// Interval with jumps, increment kept.
    pub missed: usize,
    /// Jump-free interval, increment filtered.
    pub false_flags: usize,
    pub correct_keep: usize,
    pub correct_flag: usize,
}

impl JumpConfusion {
    pub fn misclassified(&self) -> usize {
        self.missed + self.false_flags
    }

    pub fn total(&self) -> usize {
        self.missed + self.false_flags + self.correct_keep + self.correct_flag
    }
}

/// Compare the filter decision with the true jump counts of a finite-activity path.
pub fn jump_detection_confusion(path: &SimulatedPath, filter: FilterSpec) -> Result<JumpConfusion> {
    filter.validate()?;
    let counts = path.jump_count.as_ref().ok_or_else(|| {
        Error::UnsupportedDiagnostic(
            "jump confusion needs true jump counts; infinite-activity paths have none".into(),
        )
    })?;
    let v = filter.threshold(path.max_step());
    let mut c = JumpConfusion::default();
    for (w, &k) in path.x.windows(2).zip(counts) {
        let kept = (w[1] - w[0]).abs() <= v;
        match (kept, k == 0) {
            (true, true) => c.correct_keep += 1,
            (true, false) => c.missed += 1,
            (false, true) => c.false_flags += 1,
            (false, false) => c.correct_flag += 1,
        }
    }
    Ok(c)
}

/// Expected number of jumps on `[0, horizon]` for a finite-activity driver.
pub fn expected_jumps(model: &OuModel, horizon: f64) -> Option<f64> {
    match model.levy().jumps() {
        JumpFamily::None => Some(0.0),
        JumpFamily::CompoundPoisson { intensity, .. } => Some(intensity * horizon),
        JumpFamily::Gamma { .. } => None,
    }
}
