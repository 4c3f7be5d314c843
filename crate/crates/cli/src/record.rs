//! Run records: the serialized artifact of a training run. A record holds
//! the resolved configuration, per-epoch losses, final evaluations, and the
//! trained model, and reloads losslessly (f64 values round-trip exactly
//! through JSON's shortest-representation formatting).

use std::path::Path;

use semot::EvalReport;
use serde::{Deserialize, Serialize};

use crate::error::{read_file, write_file, CliError, CliResult};
use crate::model::Model;

/// The fully resolved training configuration, echoed into the record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub loss: String,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub model: String,
    pub seed: u64,
    pub sinkhorn_epsilon: f64,
    pub sinkhorn_iterations: usize,
    pub eval_k: Vec<usize>,
    pub eval_group_size: usize,
}

/// One class's recall within a stored evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRecall {
    pub class: usize,
    pub label: String,
    pub count: usize,
    pub recall: f64,
}

/// An `EvalReport` flattened for storage, ordered by ascending class index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredEval {
    pub k: usize,
    pub mean_recall: f64,
    pub counts: Vec<usize>,
    pub per_class: Vec<ClassRecall>,
}

impl StoredEval {
    pub fn from_report(report: &EvalReport, labels: &[String]) -> Self {
        let per_class = report
            .per_class
            .iter()
            .map(|(&class, &recall)| ClassRecall {
                class,
                label: labels[class].clone(),
                count: report.counts[class],
                recall,
            })
            .collect();
        Self {
            k: report.k,
            mean_recall: report.mean_recall,
            counts: report.counts.clone(),
            per_class,
        }
    }
}

/// Everything a training run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ConfigSnapshot,
    pub label_names: Vec<String>,
    /// Class excluded from mean recall, resolved at training time.
    pub background: Option<usize>,
    pub train_class_counts: Vec<usize>,
    /// Mean per-item training loss for each epoch (independent of the
    /// SUM/MEAN gradient reduction, so curves are comparable across runs).
    pub epoch_mean_losses: Vec<f64>,
    pub evaluations: Vec<StoredEval>,
    pub model: Model,
    /// Populated only with --record-timing: wall-clock varies between
    /// reruns and would break byte-identical outputs.
    pub wall_clock_seconds: Option<f64>,
}

impl RunRecord {
    pub fn to_json(&self) -> CliResult<String> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|err| CliError::Validation(format!("cannot serialize run record: {err}")))?;
        text.push('\n');
        Ok(text)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        write_file(path, &self.to_json()?)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read_file(path)?;
        serde_json::from_str(&text).map_err(|err| {
            CliError::Validation(format!("invalid run record {}: {err}", path.display()))
        })
    }
}
