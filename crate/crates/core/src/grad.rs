//! Exact gradient of the transport cost through a fixed number of unrolled
//! log-domain Sinkhorn iterations.
//!
//! The differentiated composition is
//! `logits → a = softmax(logits) → T log-domain sweeps → plan → Σ C_ij P_ij`,
//! with `T = fixed_iteration_count`. The forward pass mirrors
//! [`crate::sinkhorn::sinkhorn_log`] operation for operation (including the
//! zero-mass column masking used by one-hot targets) and stores the potential
//! iterates; the backward pass replays them in reverse.
//!
//! `a` enters each sweep only through the additive term `ε log a_i`, so the
//! adjoint of `a` has the form `ā_i = ε u_i / a_i` with `u_i` the summed
//! adjoints of `f_i` across sweeps. Composing with the softmax Jacobian
//! cancels the division:
//! `dL/dlogit_i = ε (u_i − a_i Σ_k u_k)`,
//! which stays finite even when `a_i` underflows.

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::simplex::ProbVector;
use crate::sinkhorn::{SinkhornConfig, SinkhornMode, EPSILON_FLOOR};

/// d(transport_cost)/d(logits) for the unrolled fixed-iteration solve.
pub fn transport_cost_gradient(
    logits: &[f64],
    b: &ProbVector,
    cost: &CostMatrix,
    cfg: &SinkhornConfig,
) -> Result<Vec<f64>> {
    Ok(transport_cost_and_gradient(logits, b, cost, cfg)?.1)
}

/// Transport cost of the unrolled solve together with its gradient.
///
/// Training wants both numbers for every example; computing them in one pass
/// shares the forward iterates.
pub fn transport_cost_and_gradient(
    logits: &[f64],
    b: &ProbVector,
    cost: &CostMatrix,
    cfg: &SinkhornConfig,
) -> Result<(f64, Vec<f64>)> {
    cfg.validate()?;
    if cfg.mode != SinkhornMode::FixedIterations {
        return Err(Error::InvalidConfig(
            "transport_cost_gradient requires fixed-iterations mode; \
             a data-dependent iteration count is not differentiable"
                .into(),
        ));
    }
    if cfg.epsilon < EPSILON_FLOOR {
        return Err(Error::EpsilonTooSmall {
            epsilon: cfg.epsilon,
            floor: EPSILON_FLOOR,
        });
    }
    let n = logits.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty logit vector".into()));
    }
    if b.len() != n || cost.nrows() != n || cost.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "logits[{n}] with b[{}] and {}x{} cost matrix; all must share n",
            b.len(),
            cost.nrows(),
            cost.ncols()
        )));
    }

    let eps = cfg.epsilon;
    let sweeps = cfg.fixed_iteration_count;
    let a = ProbVector::softmax(logits);
    let a = a.values();
    let c = cost.entries();

    let rows: Vec<usize> = (0..n).filter(|&i| a[i] > 0.0).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| b.values()[j] > 0.0).collect();
    let nr = rows.len();
    let nc = cols.len();
    let log_a: Vec<f64> = rows.iter().map(|&i| a[i].ln()).collect();
    let log_b: Vec<f64> = cols.iter().map(|&j| b.values()[j].ln()).collect();

    // Forward: identical arithmetic to sinkhorn_log, but keeping every
    // iterate. f_hist[k] is f after sweep k+1; g_hist[k] is g after sweep k
    // (so g_hist[0] is the zero initialization).
    let mut f = vec![0.0; nr];
    let mut g = vec![0.0; nc];
    let mut f_hist: Vec<Vec<f64>> = Vec::with_capacity(sweeps);
    let mut g_hist: Vec<Vec<f64>> = Vec::with_capacity(sweeps + 1);
    g_hist.push(g.clone());
    let mut row_scratch = vec![0.0; nr];
    let mut col_scratch = vec![0.0; nc];
    for _ in 0..sweeps {
        for (r, &i) in rows.iter().enumerate() {
            let mut max_t = f64::NEG_INFINITY;
            for (s, &j) in cols.iter().enumerate() {
                let t = (g[s] - c[[i, j]]) / eps;
                col_scratch[s] = t;
                if t > max_t {
                    max_t = t;
                }
            }
            let mut sum = 0.0;
            for &t in &col_scratch[..nc] {
                sum += (t - max_t).exp();
            }
            f[r] = eps * log_a[r] - eps * (max_t + sum.ln());
        }
        f_hist.push(f.clone());
        for (s, &j) in cols.iter().enumerate() {
            let mut max_t = f64::NEG_INFINITY;
            for (r, &i) in rows.iter().enumerate() {
                let t = (f[r] - c[[i, j]]) / eps;
                row_scratch[r] = t;
                if t > max_t {
                    max_t = t;
                }
            }
            let mut sum = 0.0;
            for &t in &row_scratch[..nr] {
                sum += (t - max_t).exp();
            }
            g[s] = eps * log_b[s] - eps * (max_t + sum.ln());
        }
        g_hist.push(g.clone());
    }

    // Plan stage: cost value plus the adjoints of the final potentials,
    // dL/df_i = Σ_j C_ij P_ij / ε and dL/dg_j = Σ_i C_ij P_ij / ε.
    let mut cost_value = 0.0;
    let mut f_bar = vec![0.0; nr];
    let mut g_bar = vec![0.0; nc];
    for (r, &i) in rows.iter().enumerate() {
        for (s, &j) in cols.iter().enumerate() {
            let cij = c[[i, j]];
            let p = ((f[r] + g[s] - cij) / eps).exp();
            cost_value += cij * p;
            f_bar[r] += cij * p / eps;
            g_bar[s] += cij * p / eps;
        }
    }

    // Backward sweep over stored iterates. `u` accumulates the per-sweep f
    // adjoints feeding the ε·log a_i terms.
    let mut u = vec![0.0; nr];
    for k in (0..sweeps).rev() {
        let fk = &f_hist[k];
        // Through g^{k+1}_j = ε log b_j − ε LSE_r((f^{k+1}_r − C_rj)/ε):
        // ∂g_j/∂f_r = −softmax-weight of row r in column j.
        for (s, &j) in cols.iter().enumerate() {
            let mut max_t = f64::NEG_INFINITY;
            for (r, &i) in rows.iter().enumerate() {
                let t = (fk[r] - c[[i, j]]) / eps;
                row_scratch[r] = t;
                if t > max_t {
                    max_t = t;
                }
            }
            let mut denom = 0.0;
            for t in row_scratch[..nr].iter_mut() {
                *t = (*t - max_t).exp();
                denom += *t;
            }
            let gb = g_bar[s] / denom;
            for (r, &w) in row_scratch[..nr].iter().enumerate() {
                f_bar[r] -= gb * w;
            }
        }
        for (r, fb) in f_bar.iter().enumerate() {
            u[r] += fb;
        }
        if k > 0 {
            // Through f^{k+1}_r = ε log a_r − ε LSE_s((g^k_s − C_rs)/ε):
            // ∂f_r/∂g_s = −softmax-weight of column s in row r.
            let gk = &g_hist[k];
            g_bar.iter_mut().for_each(|x| *x = 0.0);
            for (r, &i) in rows.iter().enumerate() {
                let mut max_t = f64::NEG_INFINITY;
                for (s, &j) in cols.iter().enumerate() {
                    let t = (gk[s] - c[[i, j]]) / eps;
                    col_scratch[s] = t;
                    if t > max_t {
                        max_t = t;
                    }
                }
                let mut denom = 0.0;
                for t in col_scratch[..nc].iter_mut() {
                    *t = (*t - max_t).exp();
                    denom += *t;
                }
                let fb = f_bar[r] / denom;
                for (s, &z) in col_scratch[..nc].iter().enumerate() {
                    g_bar[s] -= fb * z;
                }
            }
            f_bar.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    // Softmax Jacobian: dL/dlogit_i = ε (u_i − a_i Σ_k u_k), with u_i = 0 on
    // rows whose softmax mass underflowed to zero.
    let mut u_full = vec![0.0; n];
    for (r, &i) in rows.iter().enumerate() {
        u_full[i] = u[r];
    }
    let total: f64 = u.iter().sum();
    let gradient = (0..n)
        .map(|i| eps * (u_full[i] - a[i] * total))
        .collect();
    Ok((cost_value, gradient))
}
