//! Points on the probability simplex.

use ndarray::Array1;

use crate::error::{Error, Result};

/// Absolute tolerance on the mass sum at construction time.
const SUM_TOLERANCE: f64 = 1e-12;

/// A point on the probability simplex: nonnegative components summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    values: Array1<f64>,
}

impl ProbVector {
    /// Validates and wraps a raw mass vector.
    pub fn new(values: impl Into<Array1<f64>>) -> Result<Self> {
        let values = values.into();
        if values.is_empty() {
            return Err(Error::InvalidProbability("dimension must be >= 1".into()));
        }
        for (i, &x) in values.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::InvalidProbability(format!(
                    "component {i} is not finite: {x}"
                )));
            }
            if x < 0.0 {
                return Err(Error::InvalidProbability(format!(
                    "component {i} is negative: {x}"
                )));
            }
        }
        let sum: f64 = values.sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidProbability(format!(
                "components sum to {sum}, expected 1 within {SUM_TOLERANCE}"
            )));
        }
        Ok(Self { values })
    }

    /// Uniform distribution over `n` outcomes.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "uniform distribution needs at least one outcome");
        Self {
            values: Array1::from_elem(n, 1.0 / n as f64),
        }
    }

    /// All mass on outcome `index`.
    pub fn one_hot(n: usize, index: usize) -> Self {
        assert!(index < n, "one-hot index {index} out of range for n={n}");
        let mut values = Array1::zeros(n);
        values[index] = 1.0;
        Self { values }
    }

    /// Softmax of raw scores, computed with max-subtraction.
    pub fn softmax(logits: &[f64]) -> Self {
        assert!(!logits.is_empty(), "softmax of an empty score vector");
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Array1<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
        let sum = exps.sum();
        Self { values: exps / sum }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice().expect("contiguous by construction")
    }

    /// True if any component is exactly zero (routes callers to the log-domain solver).
    pub fn has_zero_mass(&self) -> bool {
        self.values.iter().any(|&x| x == 0.0)
    }

    /// True if every component equals 1/n within `tol`.
    pub fn is_uniform(&self, tol: f64) -> bool {
        let target = 1.0 / self.len() as f64;
        self.values.iter().all(|&x| (x - target).abs() <= tol)
    }
}
