use serde::{Deserialize, Serialize};

use super::config::Aggregation;
use super::preset::{RunPlan, SweepParam};
use crate::engine::{run_trial, RequestRecord, SimConfig, SimError};
use crate::metrics::{cdf, reduction, CdfSeries, MetricsError, PercentileReport, TrialPercentiles};
use crate::runner::run_trials;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Results for one `(n_services, pool_size)` pair.
#[derive(Debug, Clone)]
pub struct ConditionResult {
    pub sweep_value: usize,
    pub n_services: usize,
    pub pool_size: usize,
    pub config: SimConfig,
    pub report: PercentileReport,
    /// Response-time CDF of trial 0.
    pub sample_cdf: CdfSeries,
    /// Every trial's records, in trial order; present only when requested.
    pub records: Option<Vec<Vec<RequestRecord>>>,
}

impl ConditionResult {
    pub fn label(&self) -> String {
        format!("svc{}-pool{}", self.n_services, self.pool_size)
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub plan: RunPlan,
    /// Ordered by sweep point, then pool size ascending; pool 0 first.
    pub conditions: Vec<ConditionResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub n_services: usize,
    pub pool_size: usize,
    pub p99_reduction: Option<f64>,
    pub reference_p99_reduction: f64,
    pub within_10pp: Option<bool>,
}

/// Fixed-point value as rendered in output files.
pub fn rendered(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// `reduction(baseline, treated)` on rendered means, or `None` for a zero baseline.
pub fn reduction_of_means(baseline: f64, treated: f64) -> Option<f64> {
    reduction(rendered(baseline), rendered(treated)).ok()
}

impl SweepResult {
    /// The pool-0 condition simulated at the same sweep point.
    pub fn baseline_for(&self, c: &ConditionResult) -> &ConditionResult {
        self.conditions
            .iter()
            .find(|b| b.n_services == c.n_services && b.pool_size == 0)
            .expect("every sweep point has a pool-0 condition")
    }

    pub fn calibration(&self) -> Vec<Calibration> {
        self.conditions
            .iter()
            .filter(|c| c.pool_size > 0)
            .map(|c| {
                let base = self.baseline_for(c);
                let r =
                    reduction_of_means(base.report.aggregate.p99.mean, c.report.aggregate.p99.mean);
                Calibration {
                    n_services: c.n_services,
                    pool_size: c.pool_size,
                    p99_reduction: r,
                    reference_p99_reduction: 0.85,
                    within_10pp: r.map(|r| (r - 0.85).abs() <= 0.10),
                }
            })
            .collect()
    }
}

fn responses(records: &[RequestRecord]) -> Vec<f64> {
    records.iter().map(RequestRecord::response_s).collect()
}

/// Report, trial-0 CDF, and (optionally) every trial's records.
pub type ConditionOutput = (PercentileReport, CdfSeries, Option<Vec<Vec<RequestRecord>>>);

/// Runs `config.trials` trials of one condition.
pub fn run_condition(
    config: &SimConfig,
    aggregation: Aggregation,
    keep_records: bool,
    jobs: Option<usize>,
) -> Result<ConditionOutput, SweepError> {
    let retain = keep_records || aggregation == Aggregation::Pooled;
    let outcomes = run_trials(config.trials, jobs, |trial| {
        let records = run_trial(config, trial)?;
        let samples = responses(&records);
        let percentiles = TrialPercentiles::from_samples(trial, &samples)?;
        let sample_cdf = if trial == 0 {
            Some(cdf(&samples)?)
        } else {
            None
        };
        Ok::<_, SweepError>((percentiles, sample_cdf, retain.then_some(records)))
    })?;

    let mut per_trial = Vec::with_capacity(outcomes.len());
    let mut sample_cdf = None;
    let mut kept = Vec::new();
    for (percentiles, c, records) in outcomes {
        per_trial.push(percentiles);
        if c.is_some() {
            sample_cdf = c;
        }
        if let Some(r) = records {
            kept.push(r);
        }
    }
    let report = match aggregation {
        Aggregation::PerTrial => PercentileReport::from_trials(per_trial)?,
        Aggregation::Pooled => {
            let all: Vec<f64> = kept.iter().flat_map(|r| responses(r)).collect();
            PercentileReport::pooled(config.trials, &all)?
        }
    };
    let sample_cdf = sample_cdf.ok_or(MetricsError::Empty)?;
    Ok((report, sample_cdf, keep_records.then_some(kept)))
}

/// Every sweep point under every pool size, including the pool-0 baseline.
pub fn run_sweep(
    plan: &RunPlan,
    keep_records: bool,
    jobs: Option<usize>,
) -> Result<SweepResult, SweepError> {
    let mut conditions = Vec::new();
    for &n_services in &plan.services {
        for &pool_size in &plan.pool_sizes {
            let config = plan.condition(n_services, pool_size);
            let (report, sample_cdf, records) =
                run_condition(&config, plan.aggregation, keep_records, jobs)?;
            let sweep_value = match plan.axis {
                SweepParam::PoolSize => pool_size,
                SweepParam::NServices => n_services,
            };
            conditions.push(ConditionResult {
                sweep_value,
                n_services,
                pool_size,
                config,
                report,
                sample_cdf,
                records,
            });
        }
    }
    Ok(SweepResult {
        plan: plan.clone(),
        conditions,
    })
}
