//! Batch pipeline runner for the stacked liver-disease classifier: config
//! handling, stage orchestration with caching, canonical JSON reports and
//! the persisted model bundle.

pub mod bundle;
pub mod cache;
pub mod canonical;
pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod reports;

pub use config::PipelineConfig;
pub use error::{CliError, CliResult};
