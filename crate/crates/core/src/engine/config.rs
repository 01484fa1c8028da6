use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::time::SimTime;
use crate::workload::ArrivalModel;

/// Full parameterization of one simulated scenario. Durations are seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_services: usize,
    pub requests_per_service: usize,
    pub arrival: ArrivalModel,
    /// Application initialization paid by a cold start.
    pub cold_init_s: f64,
    /// Latency of moving a pre-warmed pod from the pool to a service.
    pub migration_s: f64,
    /// Per-request processing time on a ready instance.
    pub service_time_s: f64,
    /// Idle time after which a service scales to zero.
    pub cooldown_s: f64,
    pub pool_size: usize,
    pub replenish: bool,
    pub replenish_latency_s: f64,
    pub max_instances_per_service: usize,
    pub trials: usize,
    pub base_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_services: 5,
            requests_per_service: 1000,
            arrival: ArrivalModel::default(),
            cold_init_s: 7.0,
            migration_s: 2.0,
            service_time_s: 0.0,
            cooldown_s: 30.0,
            pool_size: 0,
            replenish: true,
            replenish_latency_s: 7.0,
            max_instances_per_service: 1,
            trials: 100,
            base_seed: 42,
        }
    }
}

/// Latencies converted to the simulation clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timing {
    pub cold_init: SimTime,
    pub migration: SimTime,
    pub service_time: SimTime,
    pub cooldown: SimTime,
    /// `None` when replenishment is disabled.
    pub replenish_latency: Option<SimTime>,
}

fn duration(field: &str, secs: f64) -> Result<SimTime, ConfigError> {
    SimTime::from_secs_f64(secs).ok_or_else(|| {
        ConfigError::invalid(
            field,
            format!("must be a finite duration >= 0 (got {secs})"),
        )
    })
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.timing().map(|_| ())
    }

    /// Validates the configuration and converts its durations.
    pub fn timing(&self) -> Result<Timing, ConfigError> {
        if self.n_services == 0 {
            return Err(ConfigError::invalid("n_services", "must be >= 1"));
        }
        if self.requests_per_service == 0 {
            return Err(ConfigError::invalid("requests_per_service", "must be >= 1"));
        }
        if self.trials == 0 {
            return Err(ConfigError::invalid("trials", "must be >= 1"));
        }
        if self.max_instances_per_service != 1 {
            return Err(ConfigError::invalid(
                "max_instances_per_service",
                "only single-instance services (= 1) are simulated",
            ));
        }
        self.arrival.validate()?;
        let replenish_latency = duration("replenish_latency_s", self.replenish_latency_s)?;
        Ok(Timing {
            cold_init: duration("cold_init_s", self.cold_init_s)?,
            migration: duration("migration_s", self.migration_s)?,
            service_time: duration("service_time_s", self.service_time_s)?,
            cooldown: duration("cooldown_s", self.cooldown_s)?,
            replenish_latency: self.replenish.then_some(replenish_latency),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_fields_by_name() {
        type Mutation = Box<dyn Fn(&mut SimConfig)>;
        let cases: Vec<(&str, Mutation)> = vec![
            ("n_services", Box::new(|c| c.n_services = 0)),
            (
                "requests_per_service",
                Box::new(|c| c.requests_per_service = 0),
            ),
            ("trials", Box::new(|c| c.trials = 0)),
            ("cold_init_s", Box::new(|c| c.cold_init_s = -1.0)),
            ("cooldown_s", Box::new(|c| c.cooldown_s = f64::INFINITY)),
            ("pareto_shape", Box::new(|c| c.arrival.shape = 0.0)),
            (
                "max_instances_per_service",
                Box::new(|c| c.max_instances_per_service = 2),
            ),
        ];
        for (field, mutate) in cases {
            let mut cfg = SimConfig::default();
            mutate(&mut cfg);
            match cfg.validate() {
                Err(ConfigError::Invalid { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{field}: expected invalid, got {other:?}"),
            }
        }
    }

    #[test]
    fn replenish_off_drops_latency() {
        let cfg = SimConfig {
            replenish: false,
            ..SimConfig::default()
        };
        assert_eq!(cfg.timing().unwrap().replenish_latency, None);
    }
}
