//! Response-time statistics: nearest-rank percentiles, empirical CDFs,
//! relative reductions, and mean / sample-std aggregation across trials.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no samples")]
    Empty,
    #[error("percentile {0} outside (0, 100]")]
    Quantile(f64),
    #[error("baseline must be > 0 (got {0})")]
    Baseline(f64),
}

/// Percentiles reported for every condition, with their column labels.
pub const REPORTED: [(Percentile, &str); 4] = [
    (Percentile::P50, "p50"),
    (Percentile::P95, "p95"),
    (Percentile::P99, "p99"),
    (Percentile::P995, "p99.5"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Percentile {
    P50,
    P95,
    P99,
    P995,
}

impl Percentile {
    pub fn q(self) -> f64 {
        match self {
            Percentile::P50 => 50.0,
            Percentile::P95 => 95.0,
            Percentile::P99 => 99.0,
            Percentile::P995 => 99.5,
        }
    }
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn rank_in_sorted(sorted: &[f64], q: f64) -> Result<f64, MetricsError> {
    if sorted.is_empty() {
        return Err(MetricsError::Empty);
    }
    if !(q > 0.0 && q <= 100.0) {
        return Err(MetricsError::Quantile(q));
    }
    let n = sorted.len();
    // q * n / 100 keeps integral ranks exact, e.g. q = 95, n = 100.
    let rank = ((q * n as f64) / 100.0).ceil() as usize;
    Ok(sorted[rank.clamp(1, n) - 1])
}

/// The sample at 1-based rank `ceil(q / 100 * n)` of the ascending order.
pub fn percentile_nearest_rank(samples: &[f64], q: f64) -> Result<f64, MetricsError> {
    rank_in_sorted(&sorted(samples), q)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfSeries {
    /// `(value, fraction of samples <= value)`, one point per distinct value.
    pub points: Vec<(f64, f64)>,
}

pub fn cdf(samples: &[f64]) -> Result<CdfSeries, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::Empty);
    }
    let v = sorted(samples);
    let n = v.len() as f64;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match points.last_mut() {
            Some(last) if last.0 == x => last.1 = frac,
            _ => points.push((x, frac)),
        }
    }
    if let Some(last) = points.last_mut() {
        last.1 = 1.0;
    }
    Ok(CdfSeries { points })
}

/// Relative improvement `(baseline - treated) / baseline`; negative when worse.
pub fn reduction(baseline: f64, treated: f64) -> Result<f64, MetricsError> {
    if baseline.is_nan() || baseline <= 0.0 {
        return Err(MetricsError::Baseline(baseline));
    }
    Ok((baseline - treated) / baseline)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); zero for a single value.
    pub std: f64,
}

pub fn aggregate(values: &[f64]) -> Result<Aggregate, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() == 1 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Ok(Aggregate { mean, std })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialPercentiles {
    pub trial_index: u64,
    pub p50: f64,
    pub p95: f64,
    pub p99: f64,
    pub p995: f64,
}

impl TrialPercentiles {
    pub fn from_samples(trial_index: u64, samples: &[f64]) -> Result<Self, MetricsError> {
        let v = sorted(samples);
        Ok(TrialPercentiles {
            trial_index,
            p50: rank_in_sorted(&v, 50.0)?,
            p95: rank_in_sorted(&v, 95.0)?,
            p99: rank_in_sorted(&v, 99.0)?,
            p995: rank_in_sorted(&v, 99.5)?,
        })
    }

    pub fn get(&self, p: Percentile) -> f64 {
        match p {
            Percentile::P50 => self.p50,
            Percentile::P95 => self.p95,
            Percentile::P99 => self.p99,
            Percentile::P995 => self.p995,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PercentileAggregate {
    pub p50: Aggregate,
    pub p95: Aggregate,
    pub p99: Aggregate,
    pub p995: Aggregate,
}

impl PercentileAggregate {
    pub fn get(&self, p: Percentile) -> Aggregate {
        match p {
            Percentile::P50 => self.p50,
            Percentile::P95 => self.p95,
            Percentile::P99 => self.p99,
            Percentile::P995 => self.p995,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercentileReport {
    pub per_trial: Vec<TrialPercentiles>,
    pub aggregate: PercentileAggregate,
    pub n_trials: usize,
}

impl PercentileReport {
    /// Percentiles per trial, then mean and std across trials.
    pub fn from_trials(per_trial: Vec<TrialPercentiles>) -> Result<Self, MetricsError> {
        let column = |p: Percentile| {
            let values: Vec<f64> = per_trial.iter().map(|t| t.get(p)).collect();
            aggregate(&values)
        };
        let aggregate = PercentileAggregate {
            p50: column(Percentile::P50)?,
            p95: column(Percentile::P95)?,
            p99: column(Percentile::P99)?,
            p995: column(Percentile::P995)?,
        };
        Ok(PercentileReport {
            n_trials: per_trial.len(),
            per_trial,
            aggregate,
        })
    }

    /// Percentiles of all trials' samples pooled together. The aggregate
    /// mean is the pooled percentile and its std is zero.
    pub fn pooled(n_trials: usize, samples: &[f64]) -> Result<Self, MetricsError> {
        let all = TrialPercentiles::from_samples(0, samples)?;
        let point = |v| Aggregate { mean: v, std: 0.0 };
        Ok(PercentileReport {
            per_trial: Vec::new(),
            aggregate: PercentileAggregate {
                p50: point(all.p50),
                p95: point(all.p95),
                p99: point(all.p99),
                p995: point(all.p995),
            },
            n_trials,
        })
    }
}
