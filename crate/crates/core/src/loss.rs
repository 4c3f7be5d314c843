//! Batch training losses: entropic OT transport cost and softmax
//! cross-entropy, each with the exact gradient and the two batch reductions.

use ndarray::Array2;

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::grad::transport_cost_and_gradient;
use crate::simplex::ProbVector;
use crate::sinkhorn::SinkhornConfig;

/// How per-item losses are aggregated over the batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    Sum,
    Mean,
}

impl Reduction {
    fn scale(&self, batch_size: usize) -> f64 {
        match self {
            Reduction::Sum => 1.0,
            Reduction::Mean => 1.0 / batch_size as f64,
        }
    }
}

/// A batch of unnormalized score rows with hard class targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    logits: Array2<f64>,
    targets: Vec<usize>,
}

impl Batch {
    pub fn new(logits: Array2<f64>, targets: Vec<usize>) -> Result<Self> {
        let (batch_size, n_classes) = logits.dim();
        if batch_size == 0 || n_classes == 0 {
            return Err(Error::InvalidArgument(
                "batch needs at least one item and one class".into(),
            ));
        }
        if targets.len() != batch_size {
            return Err(Error::DimensionMismatch(format!(
                "{} logit rows with {} targets",
                batch_size,
                targets.len()
            )));
        }
        if let Some(&bad) = targets.iter().find(|&&t| t >= n_classes) {
            return Err(Error::InvalidArgument(format!(
                "target index {bad} out of range for {n_classes} classes"
            )));
        }
        if logits.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite logit".into()));
        }
        Ok(Self { logits, targets })
    }

    pub fn len(&self) -> usize {
        self.logits.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_classes(&self) -> usize {
        self.logits.ncols()
    }

    pub fn logits(&self) -> &Array2<f64> {
        &self.logits
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }
}

/// A scalar loss with its exact gradient with respect to the batch logits.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub gradient: Array2<f64>,
}

/// Softmax cross-entropy −log softmax(logits)[target], reduced over the batch.
pub fn ce_loss(batch: &Batch, reduction: Reduction) -> Result<LossValue> {
    let b = batch.len();
    let n = batch.n_classes();
    let scale = reduction.scale(b);
    let mut value = 0.0;
    let mut gradient = Array2::<f64>::zeros((b, n));
    for k in 0..b {
        let row = batch.logits.row(k);
        let target = batch.targets[k];
        let max = row.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        let sum: f64 = row.iter().map(|&x| (x - max).exp()).sum();
        let lse = max + sum.ln();
        value += scale * (lse - row[target]);
        for i in 0..n {
            let p = (row[i] - lse).exp();
            gradient[[k, i]] = scale * (p - if i == target { 1.0 } else { 0.0 });
        }
    }
    Ok(LossValue { value, gradient })
}

/// Entropic OT loss: per item, the transport cost between softmax(logits) and
/// the one-hot target under the semantic cost matrix, differentiated through
/// the unrolled fixed-iteration solve.
pub fn ot_loss(
    batch: &Batch,
    cost: &CostMatrix,
    cfg: &SinkhornConfig,
    reduction: Reduction,
) -> Result<LossValue> {
    let b = batch.len();
    let n = batch.n_classes();
    if cost.nrows() != n || cost.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} cost matrix for {n}-class logits",
            cost.nrows(),
            cost.ncols()
        )));
    }
    let scale = reduction.scale(b);
    let mut value = 0.0;
    let mut gradient = Array2::<f64>::zeros((b, n));
    for k in 0..b {
        let row: Vec<f64> = batch.logits.row(k).to_vec();
        let target = ProbVector::one_hot(n, batch.targets[k]);
        let (item_value, item_gradient) = transport_cost_and_gradient(&row, &target, cost, cfg)?;
        value += scale * item_value;
        for i in 0..n {
            gradient[[k, i]] = scale * item_gradient[i];
        }
    }
    Ok(LossValue { value, gradient })
}

/// Closed-form cross-check for one-hot targets.
///
/// A one-hot column marginal forces the entire plan (column t equals the
/// predicted distribution), so the transport cost collapses to
/// Σ_i softmax(logits)_i C_{i,t}. Kept as an oracle, not a fast path: the
/// default [`ot_loss`] runs the solver it claims to run.
pub fn ot_loss_closed_form(
    batch: &Batch,
    cost: &CostMatrix,
    reduction: Reduction,
) -> Result<LossValue> {
    let b = batch.len();
    let n = batch.n_classes();
    if cost.nrows() != n || cost.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} cost matrix for {n}-class logits",
            cost.nrows(),
            cost.ncols()
        )));
    }
    let scale = reduction.scale(b);
    let mut value = 0.0;
    let mut gradient = Array2::<f64>::zeros((b, n));
    for k in 0..b {
        let row: Vec<f64> = batch.logits.row(k).to_vec();
        let a = ProbVector::softmax(&row);
        let t = batch.targets[k];
        let item_value: f64 = a
            .values()
            .iter()
            .enumerate()
            .map(|(i, &ai)| ai * cost.entries()[[i, t]])
            .sum();
        value += scale * item_value;
        for i in 0..n {
            let ai = a.values()[i];
            gradient[[k, i]] = scale * ai * (cost.entries()[[i, t]] - item_value);
        }
    }
    Ok(LossValue { value, gradient })
}
