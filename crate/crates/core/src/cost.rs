//! Transport cost matrices, including the semantic cost built from label embeddings.

use ndarray::Array2;

use crate::embed::{label_vector, LabelEmbeddingTable, LabelSet};
use crate::error::{Error, Result};

/// Nonnegative matrix of per-unit transport costs, optionally with label names on each axis.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: Array2<f64>,
    row_labels: Option<Vec<String>>,
    col_labels: Option<Vec<String>>,
}

impl CostMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        for ((i, j), &c) in entries.indexed_iter() {
            if !c.is_finite() {
                return Err(Error::InvalidCost(format!("entry ({i},{j}) is not finite")));
            }
            if c < 0.0 {
                return Err(Error::InvalidCost(format!(
                    "entry ({i},{j}) is negative: {c}"
                )));
            }
        }
        Ok(Self {
            entries,
            row_labels: None,
            col_labels: None,
        })
    }

    pub fn with_labels(
        entries: Array2<f64>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self> {
        if row_labels.len() != entries.nrows() || col_labels.len() != entries.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but {} row labels and {} column labels were given",
                entries.nrows(),
                entries.ncols(),
                row_labels.len(),
                col_labels.len()
            )));
        }
        let mut matrix = Self::new(entries)?;
        matrix.row_labels = Some(row_labels);
        matrix.col_labels = Some(col_labels);
        Ok(matrix)
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            entries: Array2::zeros((n, m)),
            row_labels: None,
            col_labels: None,
        }
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[[i, j]]
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn col_labels(&self) -> Option<&[String]> {
        self.col_labels.as_deref()
    }

    /// Serializes to CSV: header row of column labels, one labelled row per matrix row.
    /// Entries carry 17 significant digits so a reload is bit-exact.
    pub fn to_csv(&self) -> Result<String> {
        let (rows, cols) = match (&self.row_labels, &self.col_labels) {
            (Some(r), Some(c)) => (r, c),
            _ => {
                return Err(Error::InvalidArgument(
                    "cost matrix has no labels; csv export needs them".into(),
                ))
            }
        };
        let mut out = String::new();
        for label in cols {
            out.push(',');
            out.push_str(&escape_csv(label));
        }
        out.push('\n');
        for (i, label) in rows.iter().enumerate() {
            out.push_str(&escape_csv(label));
            for j in 0..self.ncols() {
                out.push(',');
                out.push_str(&format!("{:.16e}", self.entries[[i, j]]));
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::CsvParse {
                line: 1,
                message: "empty file".into(),
            })?;
        let header_fields = split_csv_line(header, 1)?;
        if header_fields.len() < 2 || !header_fields[0].is_empty() {
            return Err(Error::CsvParse {
                line: 1,
                message: "expected an empty corner cell followed by column labels".into(),
            });
        }
        let col_labels: Vec<String> = header_fields[1..].to_vec();
        let m = col_labels.len();

        let mut row_labels = Vec::new();
        let mut data = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.is_empty() {
                continue;
            }
            let fields = split_csv_line(line, line_no)?;
            if fields.len() != m + 1 {
                return Err(Error::CsvParse {
                    line: line_no,
                    message: format!("expected {} fields, found {}", m + 1, fields.len()),
                });
            }
            row_labels.push(fields[0].clone());
            for field in &fields[1..] {
                let value: f64 = field.parse().map_err(|_| Error::CsvParse {
                    line: line_no,
                    message: format!("cannot parse `{field}` as a number"),
                })?;
                data.push(value);
            }
        }
        if row_labels.is_empty() {
            return Err(Error::CsvParse {
                line: 2,
                message: "no data rows".into(),
            });
        }
        let n = row_labels.len();
        let entries = Array2::from_shape_vec((n, m), data).expect("shape checked per row");
        Self::with_labels(entries, row_labels, col_labels)
    }
}

/// Builds the semantic cost matrix for a label set: `1 - cosine` between label
/// vectors, with the background row and column pinned to the maximum
/// non-background entry and a zero background diagonal.
pub fn build_cost_matrix(labels: &LabelSet, table: &LabelEmbeddingTable) -> Result<CostMatrix> {
    let n = labels.len();
    let background = labels.background_index();

    let mut vectors: Vec<Option<Vec<f64>>> = Vec::with_capacity(n);
    for (i, label) in labels.labels().iter().enumerate() {
        if Some(i) == background {
            vectors.push(None);
        } else {
            vectors.push(Some(label_vector(label, table)?));
        }
    }

    let mut entries = Array2::zeros((n, n));
    let mut max_entry = 0.0f64;
    for i in 0..n {
        let vi = match &vectors[i] {
            Some(v) => v,
            None => continue,
        };
        for j in 0..n {
            let vj = match &vectors[j] {
                Some(v) => v,
                None => continue,
            };
            let cost = if i == j { 0.0 } else { cosine_distance(vi, vj) };
            entries[[i, j]] = cost;
            max_entry = max_entry.max(cost);
        }
    }

    if let Some(bg) = background {
        for k in 0..n {
            entries[[bg, k]] = max_entry;
            entries[[k, bg]] = max_entry;
        }
        entries[[bg, bg]] = 0.0;
    }

    CostMatrix::with_labels(entries, labels.labels().to_vec(), labels.labels().to_vec())
}

/// `1 - cosine(u, v)`, clamped into [0, 2] against rounding.
fn cosine_distance(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (&x, &y) in u.iter().zip(v) {
        dot += x * y;
        nu += x * x;
        nv += y * y;
    }
    let cos = (dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0);
    1.0 - cos
}

fn escape_csv(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn split_csv_line(line: &str, line_no: usize) -> Result<Vec<String>> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut chars = line.chars().peekable();
    let mut in_quotes = false;
    while let Some(c) = chars.next() {
        if in_quotes {
            match c {
                '"' => {
                    if chars.peek() == Some(&'"') {
                        chars.next();
                        current.push('"');
                    } else {
                        in_quotes = false;
                    }
                }
                _ => current.push(c),
            }
        } else {
            match c {
                '"' => in_quotes = true,
                ',' => {
                    fields.push(std::mem::take(&mut current));
                }
                _ => current.push(c),
            }
        }
    }
    if in_quotes {
        return Err(Error::CsvParse {
            line: line_no,
            message: "unterminated quoted field".into(),
        });
    }
    fields.push(current);
    Ok(fields)
}
