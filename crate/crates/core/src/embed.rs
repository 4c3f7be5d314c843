//! Label embedding ingestion and lookup.
//!
//! The on-disk format is one record per line, `token<TAB>c1 c2 ... cd`,
//! the plain text layout used by published word-vector dumps. Tokens and
//! labels are lowercased and whitespace-normalized before any lookup.

use std::collections::BTreeMap;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Map from word token to a fixed-dimension real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelEmbeddingTable {
    dimension: usize,
    entries: BTreeMap<String, Vec<f64>>,
}

impl LabelEmbeddingTable {
    /// Builds a table from already-parsed `(token, vector)` pairs.
    pub fn from_entries(pairs: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let mut dimension = None;
        let mut entries = BTreeMap::new();
        for (line, (token, vector)) in pairs.into_iter().enumerate() {
            let line = line + 1;
            let token = normalize_token(&token).ok_or_else(|| Error::MalformedEmbeddingRecord {
                line,
                message: format!("`{token}` is not a single word token"),
            })?;
            let dim = *dimension.get_or_insert(vector.len());
            if vector.is_empty() || vector.len() != dim {
                return Err(Error::InconsistentEmbeddingDimension {
                    line,
                    expected: dim.max(1),
                    found: vector.len(),
                });
            }
            if vector.iter().map(|x| x * x).sum::<f64>() == 0.0 {
                return Err(Error::ZeroNormEmbedding { line, token });
            }
            if entries.insert(token.clone(), vector).is_some() {
                return Err(Error::DuplicateEmbeddingToken { line, token });
            }
        }
        match dimension {
            Some(dimension) => Ok(Self { dimension, entries }),
            None => Err(Error::EmptyEmbeddingStream),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Looks up a token after normalization.
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        let token = normalize_token(token)?;
        self.entries.get(&token).map(Vec::as_slice)
    }

    /// Tokens in lexicographic order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Serializes in the same `token<TAB>components` format accepted by [`load_embeddings`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (token, vector) in &self.entries {
            out.push_str(token);
            for (i, x) in vector.iter().enumerate() {
                out.push(if i == 0 { '\t' } else { ' ' });
                out.push_str(&format!("{x}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Parses an embedding stream. The dimension is inferred from the first record.
pub fn load_embeddings<R: BufRead>(reader: R) -> Result<LabelEmbeddingTable> {
    let mut pairs = Vec::new();
    let mut dimension: Option<usize> = None;
    let mut line_no = 0;
    for line in reader.lines() {
        line_no += 1;
        let line = line.map_err(|e| Error::MalformedEmbeddingRecord {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let (token, rest) = line
            .split_once('\t')
            .ok_or_else(|| Error::MalformedEmbeddingRecord {
                line: line_no,
                message: "expected `token<TAB>components`".into(),
            })?;
        let token = normalize_token(token).ok_or_else(|| Error::MalformedEmbeddingRecord {
            line: line_no,
            message: format!("`{token}` is not a single word token"),
        })?;
        let mut vector = Vec::new();
        for part in rest.split_whitespace() {
            let x: f64 = part.parse().map_err(|_| Error::MalformedEmbeddingRecord {
                line: line_no,
                message: format!("cannot parse component `{part}`"),
            })?;
            if !x.is_finite() {
                return Err(Error::MalformedEmbeddingRecord {
                    line: line_no,
                    message: format!("component `{part}` is not finite"),
                });
            }
            vector.push(x);
        }
        let dim = *dimension.get_or_insert(vector.len());
        if vector.is_empty() || vector.len() != dim {
            return Err(Error::InconsistentEmbeddingDimension {
                line: line_no,
                expected: dim.max(1),
                found: vector.len(),
            });
        }
        if vector.iter().map(|x| x * x).sum::<f64>() == 0.0 {
            return Err(Error::ZeroNormEmbedding {
                line: line_no,
                token,
            });
        }
        if pairs.iter().any(|(t, _)| *t == token) {
            return Err(Error::DuplicateEmbeddingToken {
                line: line_no,
                token,
            });
        }
        pairs.push((token, vector));
    }
    if pairs.is_empty() {
        return Err(Error::EmptyEmbeddingStream);
    }
    let dimension = dimension.unwrap();
    let entries = pairs.into_iter().collect();
    Ok(LabelEmbeddingTable { dimension, entries })
}

/// Ordered list of label names with an optional background entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    labels: Vec<String>,
    background_index: Option<usize>,
}

impl LabelSet {
    pub fn new(labels: Vec<String>, background_index: Option<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidLabelSet("no labels".into()));
        }
        let mut normalized = Vec::with_capacity(labels.len());
        for label in &labels {
            let norm = normalize_label(label);
            if norm.is_empty() {
                return Err(Error::InvalidLabelSet(format!("blank label `{label}`")));
            }
            if normalized.contains(&norm) {
                return Err(Error::InvalidLabelSet(format!("duplicate label `{norm}`")));
            }
            normalized.push(norm);
        }
        if let Some(idx) = background_index {
            if idx >= normalized.len() {
                return Err(Error::InvalidLabelSet(format!(
                    "background index {idx} out of range for {} labels",
                    normalized.len()
                )));
            }
        }
        Ok(Self {
            labels: normalized,
            background_index,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn background_index(&self) -> Option<usize> {
        self.background_index
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        let norm = normalize_label(label);
        self.labels.iter().position(|l| *l == norm)
    }
}

/// Vector for one label: the token's vector, or the componentwise mean
/// over the label's words for multi-word labels.
pub fn label_vector(label: &str, table: &LabelEmbeddingTable) -> Result<Vec<f64>> {
    let normalized = normalize_label(label);
    let tokens: Vec<&str> = normalized.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(Error::InvalidLabelSet(format!("blank label `{label}`")));
    }
    let mut mean = vec![0.0; table.dimension()];
    for token in &tokens {
        let vector = table.get(token).ok_or_else(|| Error::MissingToken {
            token: token.to_string(),
            label: normalized.clone(),
        })?;
        for (m, x) in mean.iter_mut().zip(vector) {
            *m += x;
        }
    }
    let count = tokens.len() as f64;
    for m in &mut mean {
        *m /= count;
    }
    Ok(mean)
}

fn normalize_token(token: &str) -> Option<String> {
    let trimmed = token.trim();
    if trimmed.is_empty() || trimmed.chars().any(char::is_whitespace) {
        return None;
    }
    Some(trimmed.to_lowercase())
}

fn normalize_label(label: &str) -> String {
    label
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}
