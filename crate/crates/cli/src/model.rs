//! Classifier models: a linear softmax classifier (default) and a one-
//! hidden-layer tanh MLP. Both map feature vectors to unnormalized logits;
//! the loss modules own the softmax.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use rand_chacha::rand_core::RngCore;
use semot::{Dataset, Instance, ProbVector, SceneGroup};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Architecture named in a training config: `linear` or `mlp-1-hidden(W)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSpec {
    Linear,
    MlpOneHidden(usize),
}

impl FromStr for ModelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let lowered = s.trim().to_ascii_lowercase();
        if lowered == "linear" {
            return Ok(ModelSpec::Linear);
        }
        if let Some(inner) = lowered
            .strip_prefix("mlp-1-hidden(")
            .and_then(|rest| rest.strip_suffix(')'))
        {
            let width: usize = inner
                .trim()
                .parse()
                .map_err(|_| format!("invalid hidden width `{inner}` in model `{s}`"))?;
            if width == 0 {
                return Err(format!("hidden width must be ≥ 1 in model `{s}`"));
            }
            return Ok(ModelSpec::MlpOneHidden(width));
        }
        Err(format!(
            "unknown model `{s}` (expected linear or mlp-1-hidden(width))"
        ))
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Linear => f.write_str("linear"),
            ModelSpec::MlpOneHidden(width) => write!(f, "mlp-1-hidden({width})"),
        }
    }
}

/// Model parameters. Weight rows carry the bias as their last entry, so a
/// layer from p inputs to q outputs is stored as q rows of length p+1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Model {
    #[serde(rename = "linear")]
    Linear { weights: Vec<Vec<f64>> },
    #[serde(rename = "mlp-1-hidden")]
    MlpOneHidden {
        hidden: Vec<Vec<f64>>,
        output: Vec<Vec<f64>>,
    },
}

/// Draws uniformly from [−1/√fan_in, 1/√fan_in], the usual scale-preserving
/// dense-layer initialization.
fn init_layer(rows: usize, cols: usize, rng: &mut impl RngCore) -> Vec<Vec<f64>> {
    let bound = 1.0 / (cols as f64).sqrt();
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    let unit = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                    (2.0 * unit - 1.0) * bound
                })
                .collect()
        })
        .collect()
}

impl Model {
    /// Deterministic initialization: the linear model starts at zero (its
    /// training objective is convex), the MLP draws scaled uniform weights
    /// from the caller's seeded generator.
    pub fn init(spec: ModelSpec, feature_dim: usize, n_classes: usize, rng: &mut impl RngCore) -> Self {
        match spec {
            ModelSpec::Linear => Model::Linear {
                weights: vec![vec![0.0; feature_dim + 1]; n_classes],
            },
            ModelSpec::MlpOneHidden(width) => Model::MlpOneHidden {
                hidden: init_layer(width, feature_dim + 1, rng),
                output: init_layer(n_classes, width + 1, rng),
            },
        }
    }

    pub fn spec(&self) -> ModelSpec {
        match self {
            Model::Linear { .. } => ModelSpec::Linear,
            Model::MlpOneHidden { hidden, .. } => ModelSpec::MlpOneHidden(hidden.len()),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Model::Linear { weights } => weights.len(),
            Model::MlpOneHidden { output, .. } => output.len(),
        }
    }

    pub fn feature_dim(&self) -> usize {
        match self {
            Model::Linear { weights } => weights[0].len() - 1,
            Model::MlpOneHidden { hidden, .. } => hidden[0].len() - 1,
        }
    }

    fn hidden_activations(hidden: &[Vec<f64>], x: ArrayView1<f64>) -> Vec<f64> {
        hidden
            .iter()
            .map(|row| {
                let (bias, w) = row.split_last().unwrap();
                let z: f64 = w.iter().zip(x.iter()).map(|(wj, xj)| wj * xj).sum();
                (z + bias).tanh()
            })
            .collect()
    }

    pub fn logits(&self, x: ArrayView1<f64>) -> Vec<f64> {
        let affine = |rows: &[Vec<f64>], input: &dyn Fn(usize) -> f64| -> Vec<f64> {
            rows.iter()
                .map(|row| {
                    let (bias, w) = row.split_last().unwrap();
                    let z: f64 = w.iter().enumerate().map(|(j, wj)| wj * input(j)).sum();
                    z + bias
                })
                .collect()
        };
        match self {
            Model::Linear { weights } => affine(weights, &|j| x[j]),
            Model::MlpOneHidden { hidden, output } => {
                let h = Self::hidden_activations(hidden, x);
                affine(output, &|j| h[j])
            }
        }
    }

    /// Logits for the given dataset rows, one output row per index.
    pub fn batch_logits(&self, features: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
        let n = self.n_classes();
        let mut logits = Array2::zeros((rows.len(), n));
        for (k, &r) in rows.iter().enumerate() {
            let row = self.logits(features.row(r));
            for (i, value) in row.into_iter().enumerate() {
                logits[[k, i]] = value;
            }
        }
        logits
    }

    /// One batch-gradient-descent step: accumulates d(loss)/d(weights) from
    /// the per-logit gradient rows (already reduction-scaled) and applies
    /// `weights -= learning_rate * accumulated`.
    pub fn step(
        &mut self,
        features: &Array2<f64>,
        rows: &[usize],
        logit_grad: &Array2<f64>,
        learning_rate: f64,
    ) {
        match self {
            Model::Linear { weights } => {
                let d = weights[0].len() - 1;
                for (k, &r) in rows.iter().enumerate() {
                    let x = features.row(r);
                    for (i, row) in weights.iter_mut().enumerate() {
                        let g = logit_grad[[k, i]];
                        for j in 0..d {
                            row[j] -= learning_rate * g * x[j];
                        }
                        row[d] -= learning_rate * g;
                    }
                }
            }
            Model::MlpOneHidden { hidden, output } => {
                let width = hidden.len();
                let d = hidden[0].len() - 1;
                let n = output.len();
                let mut d_hidden = vec![vec![0.0; d + 1]; width];
                let mut d_output = vec![vec![0.0; width + 1]; n];
                for (k, &r) in rows.iter().enumerate() {
                    let x = features.row(r);
                    let h = Self::hidden_activations(hidden, x);
                    let mut back = vec![0.0; width];
                    for i in 0..n {
                        let g = logit_grad[[k, i]];
                        for j in 0..width {
                            d_output[i][j] += g * h[j];
                            back[j] += g * output[i][j];
                        }
                        d_output[i][width] += g;
                    }
                    for j in 0..width {
                        let dz = back[j] * (1.0 - h[j] * h[j]);
                        for c in 0..d {
                            d_hidden[j][c] += dz * x[c];
                        }
                        d_hidden[j][d] += dz;
                    }
                }
                for (row, grad) in output.iter_mut().zip(&d_output) {
                    for (w, g) in row.iter_mut().zip(grad) {
                        *w -= learning_rate * g;
                    }
                }
                for (row, grad) in hidden.iter_mut().zip(&d_hidden) {
                    for (w, g) in row.iter_mut().zip(grad) {
                        *w -= learning_rate * g;
                    }
                }
            }
        }
    }
}

/// Softmax class probabilities for every dataset row.
pub fn dataset_scores(model: &Model, data: &Dataset) -> CliResult<Array2<f64>> {
    if data.feature_dim() != model.feature_dim() {
        return Err(CliError::Validation(format!(
            "dataset feature dimension {} does not match the model's {}",
            data.feature_dim(),
            model.feature_dim()
        )));
    }
    let n = model.n_classes();
    let mut scores = Array2::zeros((data.len(), n));
    for r in 0..data.len() {
        let logits = model.logits(data.features.row(r));
        let probs = ProbVector::softmax(&logits);
        for (i, p) in probs.values().iter().enumerate() {
            scores[[r, i]] = *p;
        }
    }
    Ok(scores)
}

/// Splits the dataset into consecutive scene groups of `group_size` rows
/// (the last group may be smaller), with the global row index as the
/// instance id.
pub fn scene_groups(model: &Model, data: &Dataset, group_size: usize) -> CliResult<Vec<SceneGroup>> {
    if group_size == 0 {
        return Err(CliError::Validation("group size must be ≥ 1".into()));
    }
    if data.n_classes() > model.n_classes() {
        return Err(CliError::Validation(format!(
            "dataset has labels up to {} but the model scores {} classes",
            data.n_classes() - 1,
            model.n_classes()
        )));
    }
    let scores = dataset_scores(model, data)?;
    let mut groups = Vec::new();
    let mut current: Vec<Instance> = Vec::with_capacity(group_size);
    for r in 0..data.len() {
        current.push(Instance::new(
            r as u64,
            data.labels[r],
            scores.row(r).to_vec(),
        )?);
        if current.len() == group_size {
            groups.push(SceneGroup::new(std::mem::take(&mut current))?);
        }
    }
    if !current.is_empty() {
        groups.push(SceneGroup::new(current)?);
    }
    Ok(groups)
}

/// Fraction of rows whose argmax prediction (ties to the lowest index)
/// matches the label.
pub fn accuracy(model: &Model, data: &Dataset) -> CliResult<f64> {
    let scores = dataset_scores(model, data)?;
    let mut hits = 0usize;
    for r in 0..data.len() {
        let row = scores.row(r);
        let mut best = 0usize;
        for i in 1..row.len() {
            if row[i] > row[best] {
                best = i;
            }
        }
        if best == data.labels[r] {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}
