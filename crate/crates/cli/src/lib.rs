//! Harness library behind the `semot` binary: config parsing, classifier
//! models, run records, and the subcommand implementations. Everything is
//! exposed so integration tests can drive commands in-process.

pub mod commands;
pub mod config;
pub mod error;
pub mod model;
pub mod record;

pub use commands::{
    cmd_build_cost_matrix, cmd_compare, cmd_evaluate, cmd_gen_data, cmd_train, EvalOptions,
    TrainArgs,
};
pub use config::{synth_config_from_text, LossKind, TrainSettings};
pub use error::{CliError, CliResult};
pub use model::{accuracy, dataset_scores, scene_groups, Model, ModelSpec};
pub use record::{ClassRecall, ConfigSnapshot, RunRecord, StoredEval};
