use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use semot_cli::commands::{
    cmd_build_cost_matrix, cmd_compare, cmd_evaluate, cmd_gen_data, cmd_train, EvalOptions,
    TrainArgs,
};

/// Training and evaluation harness for the semantic optimal-transport loss.
#[derive(Parser)]
#[command(name = "semot", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a semantic cost matrix from a label list and word embeddings.
    BuildCostMatrix {
        /// Label file: one label per line (multi-word labels allowed).
        #[arg(long)]
        labels: PathBuf,
        /// Embedding dump: `token<TAB>c1 c2 ... cd` per line.
        #[arg(long)]
        embeddings: PathBuf,
        /// Background label name (defaults to auto-detecting "background").
        #[arg(long)]
        background: Option<String>,
        /// Build without any background label.
        #[arg(long, conflicts_with = "background")]
        no_background: bool,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier with the CE or OT loss and write a run record.
    Train {
        /// Training config file (flat key = value).
        #[arg(long)]
        config: PathBuf,
        /// Training dataset CSV (exclusive with --synth).
        #[arg(long, conflicts_with = "synth")]
        data: Option<PathBuf>,
        /// Held-out dataset CSV for the final evaluation (with --data).
        #[arg(long, requires = "data")]
        test_data: Option<PathBuf>,
        /// Synthetic-data config file; generates train and test splits.
        #[arg(long)]
        synth: Option<PathBuf>,
        /// Cost-matrix CSV (labels define the class order).
        #[arg(long)]
        cost: PathBuf,
        /// Overrides the config file's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// K values for the final evaluation.
        #[arg(long, value_delimiter = ',', default_values_t = vec![5, 15, 30])]
        k: Vec<usize>,
        /// Scene-group size for the final evaluation.
        #[arg(long, default_value_t = 30)]
        group_size: usize,
        /// Background label name (defaults to auto-detecting "background").
        #[arg(long)]
        background: Option<String>,
        /// Store wall-clock seconds in the record (breaks byte-identical
        /// reruns; timing always goes to stderr).
        #[arg(long)]
        record_timing: bool,
        /// Output run-record path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a recorded model on a dataset, one JSON+CSV report per K.
    Evaluate {
        /// Run-record path.
        #[arg(long)]
        record: PathBuf,
        /// Dataset CSV to evaluate on.
        #[arg(long)]
        data: PathBuf,
        /// K values to report.
        #[arg(long, value_delimiter = ',', default_values_t = vec![5, 15, 30])]
        k: Vec<usize>,
        /// Scene-group size.
        #[arg(long, default_value_t = 30)]
        group_size: usize,
        /// Output directory for the report files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two evaluated run records (deltas are B minus A).
    Compare {
        /// Run record A (the baseline).
        record_a: PathBuf,
        /// Run record B.
        record_b: PathBuf,
        /// Output comparison-CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic long-tailed dataset bundle.
    GenData {
        /// Synthetic-data config file (flat key = value); defaults apply
        /// when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config file's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests print to stdout and succeed; real
            // usage errors are validation failures.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::BuildCostMatrix {
            labels,
            embeddings,
            background,
            no_background,
            out,
        } => cmd_build_cost_matrix(labels, embeddings, background.as_deref(), *no_background, out),
        Command::Train {
            config,
            data,
            test_data,
            synth,
            cost,
            seed,
            k,
            group_size,
            background,
            record_timing,
            out,
        } => cmd_train(&TrainArgs {
            config,
            data: data.as_deref(),
            test_data: test_data.as_deref(),
            synth: synth.as_deref(),
            cost,
            out,
            seed: *seed,
            eval: EvalOptions {
                k_list: k.clone(),
                group_size: *group_size,
            },
            background: background.as_deref(),
            record_timing: *record_timing,
        }),
        Command::Evaluate {
            record,
            data,
            k,
            group_size,
            out,
        } => cmd_evaluate(
            record,
            data,
            &EvalOptions {
                k_list: k.clone(),
                group_size: *group_size,
            },
            out,
        ),
        Command::Compare {
            record_a,
            record_b,
            out,
        } => cmd_compare(record_a, record_b, out),
        Command::GenData { config, seed, out } => cmd_gen_data(config.as_deref(), *seed, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
