//! File formats, experiment specs, the batch runner and synthetic data for
//! [`ccsport_core`].

#![deny(rust_2018_idioms)]

pub mod config;
pub mod experiment;
pub mod formats;
pub mod plot;
pub mod synth;

pub use config::{validate_spec, ExperimentSpec, ValidatedSpec};
pub use experiment::{run_experiment, summarize, ExperimentReport, MetricRow};
