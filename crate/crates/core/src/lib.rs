//! Deterministic discrete-event simulation of scale-to-zero serverless
//! autoscaling with a shared pool of pre-warmed instances.
//!
//! * [`workload`] generates Pareto inter-arrival traces from seeded streams.
//! * [`engine`] runs one trial: instance lifecycles, the shared pool, and
//!   pool-first scale-up.
//! * [`metrics`] computes nearest-rank percentiles, CDFs, and reductions.
//! * [`runner`] fans trials out over worker threads.
//! * [`cli`] layers configuration, runs sweeps, and writes output files.

pub mod cli;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod runner;
pub mod time;
pub mod workload;

pub use engine::{run_trial, simulate, RequestRecord, SimConfig, StartKind};
pub use error::ConfigError;
pub use time::SimTime;
