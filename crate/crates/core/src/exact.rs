//! Exact Kantorovich optima for small instances, used as test oracles.
//!
//! Two instance families admit cheap exact solutions: square problems with
//! uniform marginals (the feasible polytope's vertices are permutation
//! matrices scaled by 1/n, so the optimum is a minimum over n! permutations)
//! and 2×2 problems (one degree of freedom; a linear objective attains its
//! minimum at an endpoint of the feasible segment).

use itertools::Itertools;

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::simplex::ProbVector;

const UNIFORMITY_TOLERANCE: f64 = 1e-12;
const MAX_PERMUTATION_SIZE: usize = 8;

/// Exact unregularized transport cost for the supported instance shapes.
pub fn exact_ot_bruteforce(a: &ProbVector, b: &ProbVector, cost: &CostMatrix) -> Result<f64> {
    if a.len() != cost.nrows() || b.len() != cost.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "marginals of lengths {} and {} against a {}x{} cost matrix",
            a.len(),
            b.len(),
            cost.nrows(),
            cost.ncols()
        )));
    }
    let n = a.len();
    let m = b.len();
    if n == m
        && n <= MAX_PERMUTATION_SIZE
        && a.is_uniform(UNIFORMITY_TOLERANCE)
        && b.is_uniform(UNIFORMITY_TOLERANCE)
    {
        return Ok(uniform_permutation_minimum(cost));
    }
    if n == 2 && m == 2 {
        return Ok(two_by_two_segment_minimum(a, b, cost));
    }
    Err(Error::UnsupportedInstance(format!(
        "{n}x{m} with non-uniform marginals; supported: uniform square n=m≤{MAX_PERMUTATION_SIZE}, or 2x2"
    )))
}

/// min over permutations σ of (1/n) Σ_i C_{i,σ(i)}.
fn uniform_permutation_minimum(cost: &CostMatrix) -> f64 {
    let n = cost.nrows();
    let c = cost.entries();
    let mut best = f64::INFINITY;
    for sigma in (0..n).permutations(n) {
        let total: f64 = sigma.iter().enumerate().map(|(i, &j)| c[[i, j]]).sum();
        best = best.min(total);
    }
    best / n as f64
}

/// Evaluate both endpoints of the one-parameter family
/// P = [[t, a1−t], [b1−t, 1−a1−b1+t]], t ∈ [max(0, a1+b1−1), min(a1, b1)].
fn two_by_two_segment_minimum(a: &ProbVector, b: &ProbVector, cost: &CostMatrix) -> f64 {
    let a1 = a.values()[0];
    let b1 = b.values()[0];
    let c = cost.entries();
    let lower = (a1 + b1 - 1.0).max(0.0);
    let upper = a1.min(b1);
    let objective = |t: f64| {
        c[[0, 0]] * t
            + c[[0, 1]] * (a1 - t)
            + c[[1, 0]] * (b1 - t)
            + c[[1, 1]] * (1.0 - a1 - b1 + t)
    };
    objective(lower).min(objective(upper))
}
