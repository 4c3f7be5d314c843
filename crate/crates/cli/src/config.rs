//! Flat key-value configuration files.
//!
//! Format: UTF-8 text, one `key = value` pair per line. Blank lines and
//! lines whose first non-space character is `#` are ignored. Unknown and
//! duplicate keys are errors, so typos fail loudly instead of silently
//! falling back to defaults.

use std::fmt;
use std::str::FromStr;

use semot::{SynthConfig, EPSILON_FLOOR};

use crate::error::{CliError, CliResult};
use crate::model::ModelSpec;

/// Parses the flat format into ordered (key, value) pairs, rejecting
/// duplicates. `source` names the file in error messages.
pub fn parse_key_values(text: &str, source: &str) -> CliResult<Vec<(String, String)>> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Validation(format!(
                "{source}:{}: expected `key = value`, got `{line}`",
                idx + 1
            ))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(CliError::Validation(format!(
                "{source}:{}: empty key",
                idx + 1
            )));
        }
        if pairs.iter().any(|(k, _)| *k == key) {
            return Err(CliError::Validation(format!(
                "{source}:{}: duplicate key `{key}`",
                idx + 1
            )));
        }
        pairs.push((key, value));
    }
    Ok(pairs)
}

fn parse_value<T: FromStr>(source: &str, key: &str, value: &str, what: &str) -> CliResult<T> {
    value.parse().map_err(|_| {
        CliError::Validation(format!(
            "{source}: key `{key}`: cannot parse `{value}` as {what}"
        ))
    })
}

/// The training loss named in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Ce,
    OtSum,
    OtMean,
}

impl LossKind {
    pub fn name(&self) -> &'static str {
        match self {
            LossKind::Ce => "ce",
            LossKind::OtSum => "ot-sum",
            LossKind::OtMean => "ot-mean",
        }
    }
}

impl FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ce" => Ok(LossKind::Ce),
            "ot-sum" => Ok(LossKind::OtSum),
            "ot-mean" => Ok(LossKind::OtMean),
            other => Err(format!(
                "unknown loss `{other}` (expected ce, ot-sum, or ot-mean)"
            )),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parsed training configuration. All fields except `loss` have defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub loss: LossKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub model: ModelSpec,
    pub seed: u64,
    pub sinkhorn_epsilon: f64,
    pub sinkhorn_iterations: usize,
}

impl TrainSettings {
    pub fn from_text(text: &str, source: &str) -> CliResult<Self> {
        let mut loss: Option<LossKind> = None;
        let mut settings = Self {
            loss: LossKind::Ce, // overwritten below; `loss` is required
            epochs: 30,
            batch_size: 64,
            learning_rate: 0.05,
            model: ModelSpec::Linear,
            seed: 0,
            sinkhorn_epsilon: 1.0,
            sinkhorn_iterations: 50,
        };
        for (key, value) in parse_key_values(text, source)? {
            match key.as_str() {
                "loss" => {
                    loss = Some(
                        value
                            .parse()
                            .map_err(|msg| CliError::Validation(format!("{source}: {msg}")))?,
                    );
                }
                "epochs" => settings.epochs = parse_value(source, &key, &value, "a count")?,
                "batch_size" => settings.batch_size = parse_value(source, &key, &value, "a count")?,
                "learning_rate" => {
                    settings.learning_rate = parse_value(source, &key, &value, "a real")?;
                }
                "model" => {
                    settings.model = value
                        .parse()
                        .map_err(|msg| CliError::Validation(format!("{source}: {msg}")))?;
                }
                "seed" => settings.seed = parse_value(source, &key, &value, "a 64-bit integer")?,
                "sinkhorn_epsilon" => {
                    settings.sinkhorn_epsilon = parse_value(source, &key, &value, "a real")?;
                }
                "sinkhorn_iterations" => {
                    settings.sinkhorn_iterations = parse_value(source, &key, &value, "a count")?;
                }
                other => {
                    return Err(CliError::Validation(format!(
                        "{source}: unknown key `{other}`"
                    )));
                }
            }
        }
        settings.loss = loss.ok_or_else(|| {
            CliError::Validation(format!(
                "{source}: missing required key `loss` (ce, ot-sum, or ot-mean)"
            ))
        })?;
        settings.validate(source)?;
        Ok(settings)
    }

    fn validate(&self, source: &str) -> CliResult<()> {
        if self.epochs == 0 {
            return Err(CliError::Validation(format!(
                "{source}: epochs must be ≥ 1"
            )));
        }
        if self.batch_size == 0 {
            return Err(CliError::Validation(format!(
                "{source}: batch_size must be ≥ 1"
            )));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(CliError::Validation(format!(
                "{source}: learning_rate must be a positive real, got {}",
                self.learning_rate
            )));
        }
        if !self.sinkhorn_epsilon.is_finite() || self.sinkhorn_epsilon < EPSILON_FLOOR {
            return Err(CliError::Validation(format!(
                "{source}: sinkhorn_epsilon must be ≥ {EPSILON_FLOOR}, got {}",
                self.sinkhorn_epsilon
            )));
        }
        if self.sinkhorn_iterations == 0 {
            return Err(CliError::Validation(format!(
                "{source}: sinkhorn_iterations must be ≥ 1"
            )));
        }
        Ok(())
    }
}

/// Parses a synthetic-data config file; keys default to `SynthConfig`'s
/// defaults (21 classes, Zipf 1.5, 20000/4000 samples, 5 clusters).
pub fn synth_config_from_text(text: &str, source: &str) -> CliResult<SynthConfig> {
    let mut config = SynthConfig::default();
    for (key, value) in parse_key_values(text, source)? {
        match key.as_str() {
            "n_classes" => config.n_classes = parse_value(source, &key, &value, "a count")?,
            "feature_dim" => config.feature_dim = parse_value(source, &key, &value, "a count")?,
            "zipf_exponent" => {
                config.zipf_exponent = parse_value(source, &key, &value, "a real")?;
            }
            "train_samples" => {
                config.train_samples = parse_value(source, &key, &value, "a count")?;
            }
            "test_samples" => config.test_samples = parse_value(source, &key, &value, "a count")?,
            "class_spread" => config.class_spread = parse_value(source, &key, &value, "a real")?,
            "similarity_groups" => {
                config.similarity_groups = parse_value(source, &key, &value, "a count")?;
            }
            "seed" => config.seed = parse_value(source, &key, &value, "a 64-bit integer")?,
            other => {
                return Err(CliError::Validation(format!(
                    "{source}: unknown key `{other}`"
                )));
            }
        }
    }
    config.validate()?;
    Ok(config)
}
