//! Flat key-value configuration documents and their layering.
//!
//! A configuration file is a single JSON object whose keys are listed in
//! [`VALID_KEYS`]. `n_services` and `pool_size` accept an integer or a list
//! of integers; `replenish` accepts a boolean or `"on"` / `"off"`.
//! Layers are merged as defaults < preset < file < command line.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::preset::Scenario;
use crate::error::ConfigError;

pub const VALID_KEYS: &[&str] = &[
    "scenario",
    "n_services",
    "requests_per_service",
    "pareto_shape",
    "pareto_scale",
    "cold_init_s",
    "migration_s",
    "service_time_s",
    "cooldown_s",
    "pool_size",
    "replenish",
    "replenish_latency_s",
    "max_instances_per_service",
    "trials",
    "base_seed",
    "aggregation",
];

/// How per-condition percentiles are formed across trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Percentiles per trial, averaged over trials.
    #[value(name = "per-trial")]
    PerTrial,
    /// Percentiles over all trials' requests pooled together.
    Pooled,
}

/// A partial configuration. `None` leaves the lower layer's value in place.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConfigPatch {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_services: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub requests_per_service: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pareto_shape: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pareto_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cold_init_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub migration_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub service_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cooldown_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pool_size: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replenish: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replenish_latency_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_instances_per_service: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregation: Option<Aggregation>,
}

macro_rules! overlay {
    ($self:ident, $top:ident; $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $self.$field = $top.$field.clone(); } )*
    };
}

impl ConfigPatch {
    /// Overlays every field that `top` sets.
    pub fn merge(&mut self, top: &ConfigPatch) {
        overlay!(self, top;
            scenario, n_services, requests_per_service, pareto_shape, pareto_scale,
            cold_init_s, migration_s, service_time_s, cooldown_s, pool_size,
            replenish, replenish_latency_s, max_instances_per_service, trials,
            base_seed, aggregation,
        );
    }

    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        match value {
            Value::Object(map) => Self::from_map(&map),
            _ => Err(ConfigError::Parse(
                "configuration must be a JSON object".into(),
            )),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| match e {
            ConfigError::Parse(msg) => ConfigError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_map(map: &Map<String, Value>) -> Result<Self, ConfigError> {
        let mut patch = ConfigPatch::default();
        for (key, value) in map {
            match key.as_str() {
                "scenario" => patch.scenario = Some(parse_scenario(value)?),
                "n_services" => patch.n_services = Some(counts(key, value)?),
                "requests_per_service" => patch.requests_per_service = Some(count(key, value)?),
                "pareto_shape" => patch.pareto_shape = Some(number(key, value)?),
                "pareto_scale" => patch.pareto_scale = Some(number(key, value)?),
                "cold_init_s" => patch.cold_init_s = Some(number(key, value)?),
                "migration_s" => patch.migration_s = Some(number(key, value)?),
                "service_time_s" => patch.service_time_s = Some(number(key, value)?),
                "cooldown_s" => patch.cooldown_s = Some(number(key, value)?),
                "pool_size" => patch.pool_size = Some(counts(key, value)?),
                "replenish" => patch.replenish = Some(switch(key, value)?),
                "replenish_latency_s" => patch.replenish_latency_s = Some(number(key, value)?),
                "max_instances_per_service" => {
                    patch.max_instances_per_service = Some(count(key, value)?)
                }
                "trials" => patch.trials = Some(count(key, value)?),
                "base_seed" => {
                    patch.base_seed = Some(value.as_u64().ok_or_else(|| {
                        ConfigError::invalid(key, "must be an unsigned 64-bit integer")
                    })?)
                }
                "aggregation" => {
                    patch.aggregation =
                        Some(serde_json::from_value(value.clone()).map_err(|_| {
                            ConfigError::invalid(key, "must be \"per_trial\" or \"pooled\"")
                        })?)
                }
                _ => {
                    return Err(ConfigError::UnknownKey {
                        key: key.clone(),
                        valid: VALID_KEYS.join(", "),
                    })
                }
            }
        }
        Ok(patch)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("configuration patch serializes")
    }
}

fn parse_scenario(value: &Value) -> Result<Scenario, ConfigError> {
    value.as_str().and_then(|s| s.parse().ok()).ok_or_else(|| {
        ConfigError::invalid("scenario", "must be one of short, long, contention, custom")
    })
}

fn number(key: &str, value: &Value) -> Result<f64, ConfigError> {
    value
        .as_f64()
        .ok_or_else(|| ConfigError::invalid(key, "must be a number"))
}

fn count(key: &str, value: &Value) -> Result<usize, ConfigError> {
    value
        .as_u64()
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| {
            ConfigError::invalid(key, format!("must be a non-negative integer (got {value})"))
        })
}

fn counts(key: &str, value: &Value) -> Result<Vec<usize>, ConfigError> {
    match value {
        Value::Array(items) => items.iter().map(|v| count(key, v)).collect(),
        single => Ok(vec![count(key, single)?]),
    }
}

fn switch(key: &str, value: &Value) -> Result<bool, ConfigError> {
    match value {
        Value::Bool(b) => Ok(*b),
        Value::String(s) if s == "on" => Ok(true),
        Value::String(s) if s == "off" => Ok(false),
        _ => Err(ConfigError::invalid(
            key,
            "must be true/false or \"on\"/\"off\"",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_key() {
        let patch = ConfigPatch::from_json_str(
            r#"{"scenario": "long", "n_services": [1, 2], "requests_per_service": 10,
                "pareto_shape": 1.5, "pareto_scale": 0.5, "cold_init_s": 32,
                "migration_s": 2.5, "service_time_s": 0.1, "cooldown_s": 60,
                "pool_size": 3, "replenish": "off", "replenish_latency_s": 4,
                "max_instances_per_service": 1, "trials": 7, "base_seed": 9,
                "aggregation": "pooled"}"#,
        )
        .unwrap();
        assert_eq!(patch.scenario, Some(Scenario::Long));
        assert_eq!(patch.n_services, Some(vec![1, 2]));
        assert_eq!(patch.pool_size, Some(vec![3]));
        assert_eq!(patch.replenish, Some(false));
        assert_eq!(patch.cold_init_s, Some(32.0));
        assert_eq!(patch.aggregation, Some(Aggregation::Pooled));
        let again = ConfigPatch::from_map(patch.to_json().as_object().unwrap()).unwrap();
        assert_eq!(again, patch);
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        let err = ConfigPatch::from_json_str(r#"{"pool": 1}"#).unwrap_err();
        match err {
            ConfigError::UnknownKey { key, valid } => {
                assert_eq!(key, "pool");
                assert!(valid.contains("pool_size") && valid.contains("cooldown_s"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_pool_size_names_the_field() {
        let err = ConfigPatch::from_json_str(r#"{"pool_size": -1}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "pool_size"));
    }

    #[test]
    fn later_layers_win() {
        let mut base = ConfigPatch {
            cold_init_s: Some(32.0),
            cooldown_s: Some(60.0),
            ..Default::default()
        };
        base.merge(&ConfigPatch {
            cold_init_s: Some(7.0),
            ..Default::default()
        });
        assert_eq!(base.cold_init_s, Some(7.0));
        assert_eq!(base.cooldown_s, Some(60.0));
    }

    #[test]
    fn rejects_non_objects() {
        assert!(matches!(
            ConfigPatch::from_json_str("[1]"),
            Err(ConfigError::Parse(_))
        ));
        assert!(matches!(
            ConfigPatch::from_json_str("{"),
            Err(ConfigError::Parse(_))
        ));
    }
}
