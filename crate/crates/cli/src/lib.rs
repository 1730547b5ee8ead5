//! File formats, config loading and subcommands for the `pipeloc` tool.
//!
//! A simulation bundle is a directory of JSON-lines files (`log.jsonl`,
//! `labels.jsonl`, `truth.jsonl`, `blocks.jsonl`) plus the resolved
//! `config.toml` and a `manifest.json` holding the seed and config hash.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;

pub use commands::{batch, evaluate, localize, simulate, BatchSummary, Evaluation, SimulateSummary};
pub use config::{load_pipeline_config, load_sim_config, PipelineConfig};
pub use error::{CliError, Result};
