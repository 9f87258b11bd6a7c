//! Experiment configuration, seeded multi-repetition execution, aggregation
//! and CSV emission.

mod config;
mod runner;

pub use config::{load_config, parse_config, ConfigError, ExperimentConfig};
pub use runner::{
    derive_rep_seed, run_experiment, AggregateRow, AggregateSeries, HarnessError, OUTPUT_DIR_ENV,
};
