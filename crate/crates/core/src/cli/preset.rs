//! Named scenarios and resolution of layered configuration into a run plan.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::{Aggregation, ConfigPatch};
use crate::engine::SimConfig;
use crate::error::ConfigError;
use crate::workload::ArrivalModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Short,
    Long,
    Contention,
    Custom,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Short => "short",
            Scenario::Long => "long",
            Scenario::Contention => "contention",
            Scenario::Custom => "custom",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "short" => Ok(Scenario::Short),
            "long" => Ok(Scenario::Long),
            "contention" => Ok(Scenario::Contention),
            "custom" => Ok(Scenario::Custom),
            _ => Err(ConfigError::invalid(
                "scenario",
                "must be one of short, long, contention, custom",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    PoolSize,
    NServices,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::PoolSize => "pool_size",
            SweepParam::NServices => "n_services",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepAxis {
    pub parameter: SweepParam,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPreset {
    pub name: Scenario,
    pub overrides: ConfigPatch,
    pub sweep: Option<SweepAxis>,
}

/// Application-level latencies for the two application profiles.
const SHORT_APP: (f64, f64) = (7.0, 30.0);
const LONG_APP: (f64, f64) = (32.0, 60.0);

fn application(cold_init_s: f64, cooldown_s: f64) -> ConfigPatch {
    ConfigPatch {
        n_services: Some(vec![5]),
        requests_per_service: Some(1000),
        trials: Some(100),
        pareto_shape: Some(1.1),
        migration_s: Some(2.0),
        cold_init_s: Some(cold_init_s),
        cooldown_s: Some(cooldown_s),
        max_instances_per_service: Some(1),
        pool_size: Some(vec![0, 1]),
        ..ConfigPatch::default()
    }
}

impl ScenarioPreset {
    pub fn get(name: Scenario) -> Self {
        match name {
            Scenario::Short => ScenarioPreset {
                name,
                overrides: application(SHORT_APP.0, SHORT_APP.1),
                sweep: Some(SweepAxis {
                    parameter: SweepParam::PoolSize,
                    values: vec![0, 1],
                }),
            },
            Scenario::Long => ScenarioPreset {
                name,
                overrides: application(LONG_APP.0, LONG_APP.1),
                sweep: Some(SweepAxis {
                    parameter: SweepParam::PoolSize,
                    values: vec![0, 1],
                }),
            },
            Scenario::Contention => {
                let services: Vec<usize> = (1..=10).collect();
                ScenarioPreset {
                    name,
                    overrides: ConfigPatch {
                        n_services: Some(services.clone()),
                        pool_size: Some(vec![1]),
                        ..application(SHORT_APP.0, SHORT_APP.1)
                    },
                    sweep: Some(SweepAxis {
                        parameter: SweepParam::NServices,
                        values: services,
                    }),
                }
            }
            Scenario::Custom => ScenarioPreset {
                name,
                overrides: ConfigPatch::default(),
                sweep: None,
            },
        }
    }
}

/// Built-in defaults: the short application profile with pools 0 and 1.
pub fn defaults() -> ConfigPatch {
    let d = SimConfig::default();
    ConfigPatch {
        scenario: Some(Scenario::Custom),
        n_services: Some(vec![d.n_services]),
        requests_per_service: Some(d.requests_per_service),
        pareto_shape: Some(d.arrival.shape),
        pareto_scale: Some(d.arrival.scale),
        cold_init_s: Some(d.cold_init_s),
        migration_s: Some(d.migration_s),
        service_time_s: Some(d.service_time_s),
        cooldown_s: Some(d.cooldown_s),
        pool_size: Some(vec![0, 1]),
        replenish: Some(d.replenish),
        // Unset means "same as cold_init_s".
        replenish_latency_s: None,
        max_instances_per_service: Some(d.max_instances_per_service),
        trials: Some(d.trials),
        base_seed: Some(d.base_seed),
        aggregation: Some(Aggregation::PerTrial),
    }
}

/// Everything needed to execute a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub scenario: Scenario,
    /// Template for every condition; `n_services` and `pool_size` are
    /// overwritten per sweep point.
    pub base: SimConfig,
    pub axis: SweepParam,
    /// Distinct service counts, ascending.
    pub services: Vec<usize>,
    /// Distinct pool sizes, ascending, always starting with 0.
    pub pool_sizes: Vec<usize>,
    pub aggregation: Aggregation,
    /// The fully merged layers, enough to reproduce this plan.
    pub resolved: ConfigPatch,
}

impl RunPlan {
    /// Merges `defaults < preset < file < flags` and validates the result.
    pub fn resolve(file: Option<&ConfigPatch>, flags: &ConfigPatch) -> Result<Self, ConfigError> {
        let scenario = flags
            .scenario
            .or_else(|| file.and_then(|f| f.scenario))
            .unwrap_or(Scenario::Custom);
        let preset = ScenarioPreset::get(scenario);

        let mut merged = defaults();
        merged.merge(&preset.overrides);
        if let Some(file) = file {
            merged.merge(file);
        }
        merged.merge(flags);
        merged.scenario = Some(scenario);
        if merged.replenish_latency_s.is_none() {
            merged.replenish_latency_s = merged.cold_init_s;
        }
        Self::from_resolved(merged)
    }

    /// Builds a plan from a patch in which every field is set.
    pub fn from_resolved(resolved: ConfigPatch) -> Result<Self, ConfigError> {
        fn req<T: Clone>(v: &Option<T>, field: &str) -> Result<T, ConfigError> {
            v.clone()
                .ok_or_else(|| ConfigError::invalid(field, "missing from resolved configuration"))
        }
        let scenario = req(&resolved.scenario, "scenario")?;

        let mut services = req(&resolved.n_services, "n_services")?;
        if services.is_empty() {
            return Err(ConfigError::invalid("n_services", "list must not be empty"));
        }
        services.sort_unstable();
        services.dedup();

        let mut pool_sizes = req(&resolved.pool_size, "pool_size")?;
        if pool_sizes.is_empty() {
            return Err(ConfigError::invalid("pool_size", "list must not be empty"));
        }
        pool_sizes.push(0);
        pool_sizes.sort_unstable();
        pool_sizes.dedup();

        let axis = if scenario == Scenario::Contention || services.len() > 1 {
            SweepParam::NServices
        } else {
            SweepParam::PoolSize
        };

        let base = SimConfig {
            n_services: services[0],
            requests_per_service: req(&resolved.requests_per_service, "requests_per_service")?,
            arrival: ArrivalModel {
                shape: req(&resolved.pareto_shape, "pareto_shape")?,
                scale: req(&resolved.pareto_scale, "pareto_scale")?,
            },
            cold_init_s: req(&resolved.cold_init_s, "cold_init_s")?,
            migration_s: req(&resolved.migration_s, "migration_s")?,
            service_time_s: req(&resolved.service_time_s, "service_time_s")?,
            cooldown_s: req(&resolved.cooldown_s, "cooldown_s")?,
            pool_size: 0,
            replenish: req(&resolved.replenish, "replenish")?,
            replenish_latency_s: req(&resolved.replenish_latency_s, "replenish_latency_s")?,
            max_instances_per_service: req(
                &resolved.max_instances_per_service,
                "max_instances_per_service",
            )?,
            trials: req(&resolved.trials, "trials")?,
            base_seed: req(&resolved.base_seed, "base_seed")?,
        };
        base.validate()?;

        Ok(RunPlan {
            scenario,
            base,
            axis,
            services,
            pool_sizes,
            aggregation: req(&resolved.aggregation, "aggregation")?,
            resolved,
        })
    }

    /// The configuration simulated for one condition.
    pub fn condition(&self, n_services: usize, pool_size: usize) -> SimConfig {
        SimConfig {
            n_services,
            pool_size,
            ..self.base.clone()
        }
    }
}
