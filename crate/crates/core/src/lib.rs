//! Per-country food-security forecasting pipeline.
//!
//! Trains one regression model suite per country from heterogeneous panel
//! data, predicts food consumption scores, compares model families by mean
//! absolute error, and classifies each country's famine driver (natural,
//! economic or conflict) from random-forest feature importances.

pub mod categorize;
pub mod config;
pub mod evaluate;
pub mod ingest;
pub mod matrix;
pub mod models;
pub mod pipeline;
pub mod prepare;
pub mod report;
pub mod rng;
pub mod synth;

pub use config::RunConfig;
pub use pipeline::{run, PipelineError, RunOutput};
