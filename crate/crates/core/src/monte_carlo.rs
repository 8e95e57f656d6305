//! Seeded, parallel Monte Carlo campaigns.
//!
//! Replication `r` always draws from `RngStream::new(seed, r)`, and results
//! are reduced in replication order, so a campaign is bit-reproducible for
//! any number of worker threads.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimators::{
    asymptotic_variance_lse, asymptotic_variance_mle, studentized_statistic, EstimateResult,
    EstimatorKind, FilterSpec,
};
use crate::levy::{JumpFamily, LevyModel};
use crate::ou::{simulate_path, ObservationGrid, OuModel};
use crate::rng::RngStream;
use crate::stats::{ks_one_sample, mean_std, KS_CRITICAL_1PCT};

#[derive(Clone, Debug, PartialEq)]
pub struct McConfig {
    pub model: OuModel,
    pub grid: ObservationGrid,
    pub filter: FilterSpec,
    pub replications: u64,
    pub seed: u64,
    pub estimators: Vec<EstimatorKind>,
}

impl McConfig {
    pub fn new(model: OuModel, grid: ObservationGrid, replications: u64, seed: u64) -> Self {
        McConfig {
            model,
            grid,
            filter: FilterSpec::default(),
            replications,
            seed,
            estimators: vec![EstimatorKind::FilteredMle],
        }
    }

    pub fn with_filter(mut self, filter: FilterSpec) -> Self {
        self.filter = filter;
        self
    }

    pub fn with_estimators(mut self, estimators: &[EstimatorKind]) -> Self {
        self.estimators = estimators.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::invalid("replications must be >= 1"));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("estimator set must not be empty"));
        }
        self.filter.validate()
    }
}

/// Per-estimator statistics over all replications.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorSummary {
    pub kind: EstimatorKind,
    pub mean: f64,
    /// `N - 1` divisor; 0 for a single replication.
    pub std_dev: f64,
    pub avg_filtered: f64,
    pub estimates: Vec<f64>,
    /// `sqrt(T) (a_hat - a)`.
    pub standardized_errors: Vec<f64>,
    /// `sqrt(S_T) / sigma_w (a_hat - a)`; NaN when `sigma_w = 0`.
    pub studentized_errors: Vec<f64>,
    pub filtered: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McSummary {
    pub replications: u64,
    pub seed: u64,
    pub horizon: f64,
    pub estimators: Vec<EstimatorSummary>,
}

impl McSummary {
    pub fn get(&self, kind: EstimatorKind) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|s| s.kind == kind)
    }
}

/// Run `f(rng, r)` for `r = 0..replications` on independent streams, in
/// parallel, returning results in replication order.
pub fn replicate<T, F>(seed: u64, replications: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngStream, u64) -> T + Sync,
{
    (0..replications)
        .into_par_iter()
        .map(|r| f(&mut RngStream::new(seed, r), r))
        .collect()
}

/// Run `op` on a dedicated pool of `workers` threads (or the global pool).
pub fn with_workers<T: Send>(workers: Option<usize>, op: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .expect("thread pool")
            .install(op),
        None => op(),
    }
}

/// Simulate `replications` paths and apply every requested estimator.
pub fn run_campaign(config: &McConfig) -> Result<McSummary> {
    config.validate()?;
    let per_rep: Vec<Result<Vec<EstimateResult>>> =
        replicate(config.seed, config.replications, |rng, _| {
            let path = simulate_path(&config.model, &config.grid, rng);
            config
                .estimators
                .iter()
                .map(|k| k.estimate(&path, config.filter))
                .collect()
        });

    let mut results = Vec::with_capacity(per_rep.len());
    for (r, res) in per_rep.into_iter().enumerate() {
        results.push(res.map_err(|e| Error::Replication { index: r as u64, source: Box::new(e) })?);
    }

    let a = config.model.a();
    let sigma = config.model.levy().sigma_w();
    let root_t = config.grid.horizon().sqrt();
    let estimators = config
        .estimators
        .iter()
        .enumerate()
        .map(|(k, &kind)| {
            let col: Vec<&EstimateResult> = results.iter().map(|r| &r[k]).collect();
            let estimates: Vec<f64> = col.iter().map(|r| r.a_hat).collect();
            let filtered: Vec<usize> = col.iter().map(|r| r.filtered).collect();
            let (mean, std_dev) = mean_std(&estimates);
            EstimatorSummary {
                kind,
                mean,
                std_dev,
                avg_filtered: filtered.iter().sum::<usize>() as f64 / filtered.len() as f64,
                standardized_errors: estimates.iter().map(|e| root_t * (e - a)).collect(),
                studentized_errors: col
                    .iter()
                    .map(|r| studentized_statistic(r, a, sigma).unwrap_or(f64::NAN))
                    .collect(),
                estimates,
                filtered,
            }
        })
        .collect();

    Ok(McSummary {
        replications: config.replications,
        seed: config.seed,
        horizon: config.grid.horizon(),
        estimators,
    })
}

/// One row of the MLE-vs-LSE intensity sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub mean_mle: f64,
    pub std_mle: f64,
    pub mean_lse: f64,
    pub std_lse: f64,
    pub avar_mle: f64,
    pub avar_lse: f64,
}

/// Compare the filtered MLE and LSE over a range of jump intensities of a
/// compound Poisson base model. Intensity 0 removes the jumps.
pub fn sweep_intensity(base: &McConfig, intensities: &[f64]) -> Result<Vec<SweepRow>> {
    let levy = base.model.levy();
    let height_std = match levy.jumps() {
        JumpFamily::CompoundPoisson { height_std, .. } => height_std,
        other => {
            return Err(Error::UnsupportedModel(format!(
                "intensity sweep needs a compound_poisson base model, got {}",
                other.name()
            )))
        }
    };
    intensities
        .iter()
        .map(|&lambda| {
            let jumps = if lambda == 0.0 {
                JumpFamily::None
            } else {
                JumpFamily::CompoundPoisson { intensity: lambda, height_std }
            };
            let model = base.model.with_levy(LevyModel::new(levy.sigma_w(), jumps)?);
            let cfg = McConfig {
                model,
                estimators: vec![EstimatorKind::FilteredMle, EstimatorKind::Lse],
                ..base.clone()
            };
            let s = run_campaign(&cfg)?;
            let (mle, lse) = (&s.estimators[0], &s.estimators[1]);
            Ok(SweepRow {
                lambda,
                mean_mle: mle.mean,
                std_mle: mle.std_dev,
                mean_lse: lse.mean,
                std_lse: lse.std_dev,
                avar_mle: asymptotic_variance_mle(&model)?,
                avar_lse: asymptotic_variance_lse(&model)?,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalityCheck {
    pub ks_statistic: f64,
    pub critical_value: f64,
    pub pass: bool,
}

/// Minimum replications for the normality check.
pub const MIN_NORMALITY_REPLICATIONS: usize = 100;

/// KS test of errors against the fully specified `N(0, variance)` at the 1% level.
pub fn ks_normal_check(errors: &[f64], variance: f64) -> Result<NormalityCheck> {
    if errors.len() < MIN_NORMALITY_REPLICATIONS {
        return Err(Error::invalid(format!(
            "normality check needs at least {MIN_NORMALITY_REPLICATIONS} replications, got {}",
            errors.len()
        )));
    }
    let normal = Normal::new(0.0, variance.sqrt())
        .map_err(|e| Error::invalid(format!("bad target variance {variance}: {e}")))?;
    let d = ks_one_sample(errors, |x| normal.cdf(x));
    let crit = KS_CRITICAL_1PCT / (errors.len() as f64).sqrt();
    Ok(NormalityCheck { ks_statistic: d, critical_value: crit, pass: d < crit })
}

/// Test the standardized errors `sqrt(T)(a_hat - a)` against
/// `N(0, asymptotic_variance_mle(model))`.
pub fn normality_check(summary: &EstimatorSummary, model: &OuModel) -> Result<NormalityCheck> {
    ks_normal_check(&summary.standardized_errors, asymptotic_variance_mle(model)?)
}
