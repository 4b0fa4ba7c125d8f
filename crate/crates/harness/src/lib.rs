//! Experiment driver for `ucya-core`: run configuration, Monte-Carlo sweeps
//! with CSV output, tensor dumps and complexity timing.

pub mod config;
pub mod dump;
pub mod experiment;
pub mod metrics;
pub mod probe;
