//! Synthetic long-tailed classification data with embedding-aligned class
//! structure.
//!
//! Class priors follow a Zipf law over rank (class 0 = background = rank 1,
//! the most frequent). Non-background classes are partitioned into
//! `similarity_groups` contiguous-rank blocks, so classes of similar
//! prevalence share a cluster — fine-grained variants of a common concept are
//! individually rare together, and the rarest block is a cluster of genuinely
//! rare siblings. Each class draws features from an isotropic Gaussian whose
//! mean sits near its cluster centroid, and the emitted embedding vector is
//! that mean's direction — classes that are confusable in feature space are
//! exactly the ones whose labels are cosine-close. That alignment is the
//! premise the OT loss needs: mistakes between similar classes are cheap,
//! mistakes across clusters are expensive. The background class keeps its own
//! single-class cluster; its cost row is the maximum-cost rule regardless of
//! its embedding.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::embed::{LabelEmbeddingTable, LabelSet};
use crate::error::{Error, Result};

/// Distance of every cluster centroid from the origin.
const CENTROID_NORM: f64 = 2.0;
/// Standard deviation of the isotropic per-class feature noise.
const FEATURE_NOISE_SIGMA: f64 = 0.65;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Total class count including the background class at index 0.
    pub n_classes: usize,
    pub feature_dim: usize,
    /// Zipf exponent s: class of rank r has prior ∝ r^(−s).
    pub zipf_exponent: f64,
    pub train_samples: usize,
    pub test_samples: usize,
    /// Distance of a class mean from its cluster centroid.
    pub class_spread: f64,
    /// Number of semantic clusters for the non-background classes.
    pub similarity_groups: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_classes: 21,
            feature_dim: 16,
            zipf_exponent: 1.5,
            train_samples: 20_000,
            test_samples: 4_000,
            class_spread: 0.8,
            similarity_groups: 5,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::InvalidConfig(format!(
                "n_classes must be ≥ 2, got {}",
                self.n_classes
            )));
        }
        if self.feature_dim == 0 {
            return Err(Error::InvalidConfig("feature_dim must be ≥ 1".into()));
        }
        if !self.zipf_exponent.is_finite() || self.zipf_exponent < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "zipf_exponent must be a nonnegative real, got {}",
                self.zipf_exponent
            )));
        }
        if self.train_samples < self.n_classes || self.test_samples < self.n_classes {
            return Err(Error::InvalidConfig(format!(
                "need at least n_classes={} samples per split, got {}/{}",
                self.n_classes, self.train_samples, self.test_samples
            )));
        }
        if !self.class_spread.is_finite() || self.class_spread <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "class_spread must be a positive real, got {}",
                self.class_spread
            )));
        }
        if self.similarity_groups == 0 || self.similarity_groups > self.n_classes - 1 {
            return Err(Error::InvalidConfig(format!(
                "similarity_groups must be in [1, n_classes-1], got {}",
                self.similarity_groups
            )));
        }
        Ok(())
    }
}

/// A labeled feature set with per-class counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub class_frequencies: Vec<usize>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows with {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        let mut class_frequencies = vec![0usize; n_classes];
        for &label in &labels {
            if label >= n_classes {
                return Err(Error::InvalidArgument(format!(
                    "label {label} out of range for {n_classes} classes"
                )));
            }
            class_frequencies[label] += 1;
        }
        Ok(Self {
            features,
            labels,
            class_frequencies,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_frequencies.len()
    }

    /// CSV with header `label,f1,…,fd`; floats use 17 significant digits so a
    /// round trip through text is exact in double precision.
    pub fn to_csv(&self) -> String {
        let d = self.feature_dim();
        let mut out = String::from("label");
        for j in 1..=d {
            out.push_str(&format!(",f{j}"));
        }
        out.push('\n');
        for (row, &label) in self.features.rows().into_iter().zip(&self.labels) {
            out.push_str(&label.to_string());
            for x in row {
                out.push_str(&format!(",{x:.16e}"));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the [`Dataset::to_csv`] format. `n_classes`, when given, fixes
    /// the frequency-table width (needed when tail classes may be absent);
    /// otherwise it is inferred as max label + 1.
    pub fn from_csv(text: &str, n_classes: Option<usize>) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::CsvParse {
            line: 1,
            message: "empty file".into(),
        })?;
        let columns: Vec<&str> = header.split(',').collect();
        if columns.first() != Some(&"label") || columns.len() < 2 {
            return Err(Error::CsvParse {
                line: 1,
                message: format!("expected header `label,f1,…,fd`, got `{header}`"),
            });
        }
        let d = columns.len() - 1;
        let mut labels = Vec::new();
        let mut values = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let label_text = parts.next().unwrap_or("");
            let label: usize = label_text.parse().map_err(|_| Error::CsvParse {
                line: line_no,
                message: format!("bad label `{label_text}`"),
            })?;
            labels.push(label);
            let mut count = 0;
            for part in parts {
                let x: f64 = part.parse().map_err(|_| Error::CsvParse {
                    line: line_no,
                    message: format!("bad feature value `{part}`"),
                })?;
                values.push(x);
                count += 1;
            }
            if count != d {
                return Err(Error::CsvParse {
                    line: line_no,
                    message: format!("expected {d} feature values, found {count}"),
                });
            }
        }
        if labels.is_empty() {
            return Err(Error::CsvParse {
                line: 1,
                message: "no data rows".into(),
            });
        }
        let n = labels.len();
        let features = Array2::from_shape_vec((n, d), values).expect("shape checked per row");
        let n_classes =
            n_classes.unwrap_or_else(|| labels.iter().copied().max().unwrap_or(0) + 1);
        Dataset::new(features, labels, n_classes)
    }
}

/// Normalized Zipf priors over ranks 1..=n: prior(rank r) ∝ r^(−exponent).
pub fn zipf_priors(n_classes: usize, exponent: f64) -> Vec<f64> {
    let raw: Vec<f64> = (1..=n_classes)
        .map(|r| (r as f64).powf(-exponent))
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Generates aligned (train, test, embeddings, labels) from the config.
/// Pure function of the config, including the seed.
pub fn generate(
    config: &SynthConfig,
) -> Result<(Dataset, Dataset, LabelEmbeddingTable, LabelSet)> {
    config.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let n = config.n_classes;
    let d = config.feature_dim;
    let priors = zipf_priors(n, config.zipf_exponent);

    // Cluster centroid directions: background first, then one per similarity
    // group. Orthogonalized while the dimension allows, so inter-cluster
    // separation does not depend on the luck of the seed.
    let centroid_dirs = orthogonalish_directions(config.similarity_groups + 1, d, &mut rng);

    // Class means: centroid * CENTROID_NORM plus a class_spread offset in a
    // random direction. Class 0 lives in the background cluster; classes ≥ 1
    // fill the groups in contiguous rank blocks (class i joins group
    // (i-1)*groups/(n-1)), so cluster mates have comparable priors.
    let mut means = Vec::with_capacity(n);
    for class in 0..n {
        let centroid = if class == 0 {
            &centroid_dirs[0]
        } else {
            &centroid_dirs[1 + (class - 1) * config.similarity_groups / (n - 1)]
        };
        let offset = random_unit_vector(d, &mut rng);
        let mean = centroid * CENTROID_NORM + offset * config.class_spread;
        means.push(mean);
    }

    let sample_split = |samples: usize, rng: &mut ChaCha20Rng| -> Result<Dataset> {
        let mut features = Array2::<f64>::zeros((samples, d));
        let mut labels = Vec::with_capacity(samples);
        for row in 0..samples {
            let label = sample_class(&priors, rng);
            labels.push(label);
            for col in 0..d {
                let noise: f64 = rng.sample(StandardNormal);
                features[[row, col]] = means[label][col] + FEATURE_NOISE_SIGMA * noise;
            }
        }
        Dataset::new(features, labels, n)
    };
    let train = sample_split(config.train_samples, &mut rng)?;
    let test = sample_split(config.test_samples, &mut rng)?;

    let names = class_names(n);
    let mut entries = Vec::with_capacity(n);
    for (name, mean) in names.iter().zip(&means) {
        let norm = mean.dot(mean).sqrt();
        let vector: Vec<f64> = mean.iter().map(|x| x / norm).collect();
        entries.push((name.clone(), vector));
    }
    let table = LabelEmbeddingTable::from_entries(entries)?;
    let labels = LabelSet::new(names, Some(0))?;
    Ok((train, test, table, labels))
}

/// Label names for the synthetic classes: `background`, `class01`, … .
pub fn class_names(n_classes: usize) -> Vec<String> {
    let width = (n_classes - 1).to_string().len();
    let mut names = vec!["background".to_string()];
    for i in 1..n_classes {
        names.push(format!("class{i:0width$}"));
    }
    names
}

fn sample_class(priors: &[f64], rng: &mut ChaCha20Rng) -> usize {
    let draw: f64 = rng.random();
    let mut cumulative = 0.0;
    for (class, &p) in priors.iter().enumerate() {
        cumulative += p;
        if draw < cumulative {
            return class;
        }
    }
    priors.len() - 1
}

fn random_unit_vector(d: usize, rng: &mut ChaCha20Rng) -> Array1<f64> {
    loop {
        let v = Array1::from_shape_fn(d, |_| rng.sample::<f64, _>(StandardNormal));
        let norm = v.dot(&v).sqrt();
        if norm > 1e-9 {
            return v / norm;
        }
    }
}

/// `count` unit vectors, mutually orthogonal while `count ≤ d` permits
/// (Gram–Schmidt); later ones fall back to plain random directions.
fn orthogonalish_directions(count: usize, d: usize, rng: &mut ChaCha20Rng) -> Vec<Array1<f64>> {
    let mut dirs: Vec<Array1<f64>> = Vec::with_capacity(count);
    while dirs.len() < count {
        let mut v = random_unit_vector(d, rng);
        if dirs.len() < d {
            for u in &dirs {
                let dot = v.dot(u);
                v = v - u * dot;
            }
            let norm = v.dot(&v).sqrt();
            if norm < 1e-6 {
                continue;
            }
            v /= norm;
        }
        dirs.push(v);
    }
    dirs
}
