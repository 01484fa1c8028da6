use thiserror::Error;

/// A scenario or parameter set that violates a documented constraint.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {constraint}")]
    Invalid { field: String, constraint: String },

    #[error("unknown configuration key `{key}`; valid keys are: {valid}")]
    UnknownKey { key: String, valid: String },

    #[error("cannot parse configuration: {0}")]
    Parse(String),
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            constraint: constraint.into(),
        }
    }
}
