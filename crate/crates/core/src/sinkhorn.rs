//! Entropic optimal-transport solvers.
//!
//! Two parameterizations of the same matrix-scaling fixed point are provided:
//! [`sinkhorn`] works with the scaling vectors `u`, `v` directly and is the
//! fastest choice when `exp(-C/epsilon)` stays comfortably inside the double
//! range, while [`sinkhorn_log`] iterates the potentials `f = eps*log(u)`,
//! `g = eps*log(v)` with log-sum-exp reductions and therefore tolerates large
//! `C/epsilon` ratios and zero-mass marginal components.

use ndarray::{Array1, Array2, Axis};

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::simplex::ProbVector;

/// Smallest regularization factor the log-domain solver accepts.
pub const EPSILON_FLOOR: f64 = 1e-4;

/// Iteration policy for the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinkhornMode {
    /// Iterate until the L∞ change in the row potential drops to the
    /// configured tolerance, giving up after `max_iterations`.
    ToleranceDriven,
    /// Run exactly `fixed_iteration_count` iterations so the solve is a
    /// fixed-size computation graph that can be differentiated by unrolling.
    FixedIterations,
}

/// Solver parameters shared by both domains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornConfig {
    /// Entropic regularization factor (symbol epsilon).
    pub epsilon: f64,
    pub mode: SinkhornMode,
    /// Convergence threshold on the L∞ change in the row potential.
    pub tolerance: f64,
    /// Iteration cap in tolerance-driven mode.
    pub max_iterations: usize,
    /// Exact iteration count in fixed-iterations mode.
    pub fixed_iteration_count: usize,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            mode: SinkhornMode::ToleranceDriven,
            tolerance: 1e-9,
            max_iterations: 1000,
            fixed_iteration_count: 50,
        }
    }
}

impl SinkhornConfig {
    /// Tolerance-driven configuration with the given regularization.
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    /// Fixed-iteration configuration, as used for training-time gradients.
    pub fn fixed(epsilon: f64, iterations: usize) -> Self {
        Self {
            epsilon,
            mode: SinkhornMode::FixedIterations,
            fixed_iteration_count: iterations,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be a positive real, got {}",
                self.epsilon
            )));
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be a positive real, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be ≥ 1".into()));
        }
        if self.fixed_iteration_count == 0 {
            return Err(Error::InvalidConfig(
                "fixed_iteration_count must be ≥ 1".into(),
            ));
        }
        Ok(())
    }

    fn iteration_limit(&self) -> usize {
        match self.mode {
            SinkhornMode::ToleranceDriven => self.max_iterations,
            SinkhornMode::FixedIterations => self.fixed_iteration_count,
        }
    }
}

/// Output of a Sinkhorn solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornResult {
    /// Transport plan P (n×m, nonnegative).
    pub plan: Array2<f64>,
    /// u in the standard domain, f in the log domain.
    pub row_potential: Array1<f64>,
    /// v in the standard domain, g in the log domain.
    pub col_potential: Array1<f64>,
    /// Unregularized objective Σ_ij C_ij P_ij recomputed from the plan.
    pub transport_cost: f64,
    /// Completed full (row, column) update sweeps.
    pub iterations: usize,
    /// Whether the last L∞ change in the row potential was ≤ tolerance.
    pub converged: bool,
}

impl SinkhornResult {
    /// L∞ distance of the plan's marginals from the requested ones.
    pub fn max_marginal_error(&self, a: &ProbVector, b: &ProbVector) -> f64 {
        let row_sums = self.plan.sum_axis(Axis(1));
        let col_sums = self.plan.sum_axis(Axis(0));
        let mut err: f64 = 0.0;
        for (sum, mass) in row_sums.iter().zip(a.values()) {
            err = err.max((sum - mass).abs());
        }
        for (sum, mass) in col_sums.iter().zip(b.values()) {
            err = err.max((sum - mass).abs());
        }
        err
    }
}

fn check_dimensions(a: &ProbVector, b: &ProbVector, cost: &CostMatrix) -> Result<()> {
    if a.len() != cost.nrows() || b.len() != cost.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "marginals of lengths {} and {} against a {}x{} cost matrix",
            a.len(),
            b.len(),
            cost.nrows(),
            cost.ncols()
        )));
    }
    Ok(())
}

/// Standard-domain Sinkhorn iterations (Algorithm-1 style matrix scaling).
///
/// Requires strictly positive marginals; zero-mass components are supported
/// only by [`sinkhorn_log`]. Errors with [`Error::NonFiniteIntermediate`] when
/// `exp(-C/epsilon)` under/overflow corrupts a scaling vector.
pub fn sinkhorn(
    a: &ProbVector,
    b: &ProbVector,
    cost: &CostMatrix,
    cfg: &SinkhornConfig,
) -> Result<SinkhornResult> {
    cfg.validate()?;
    check_dimensions(a, b, cost)?;
    for (index, &mass) in a.values().iter().enumerate() {
        if mass <= 0.0 {
            return Err(Error::NonPositiveMass { index });
        }
    }
    for (index, &mass) in b.values().iter().enumerate() {
        if mass <= 0.0 {
            return Err(Error::NonPositiveMass { index });
        }
    }

    let eps = cfg.epsilon;
    let kernel = cost.entries().mapv(|c| (-c / eps).exp());
    let mut u = Array1::<f64>::ones(a.len());
    let mut v = Array1::<f64>::ones(b.len());
    let limit = cfg.iteration_limit();
    let mut iterations = 0;
    let mut converged = false;
    let mut last_delta = f64::INFINITY;

    for _ in 0..limit {
        let kv = kernel.dot(&v);
        let u_new = a.values() / &kv;
        let ktu = kernel.t().dot(&u_new);
        let v_new = b.values() / &ktu;
        if u_new.iter().chain(v_new.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteIntermediate);
        }
        last_delta = u_new
            .iter()
            .zip(u.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        u = u_new;
        v = v_new;
        iterations += 1;
        if cfg.mode == SinkhornMode::ToleranceDriven && last_delta <= cfg.tolerance {
            converged = true;
            break;
        }
    }
    if cfg.mode == SinkhornMode::FixedIterations {
        converged = last_delta <= cfg.tolerance;
    }

    let mut plan = Array2::<f64>::zeros((a.len(), b.len()));
    for i in 0..a.len() {
        for j in 0..b.len() {
            plan[[i, j]] = u[i] * kernel[[i, j]] * v[j];
        }
    }
    let transport_cost = transport_cost_of(&plan, cost);
    Ok(SinkhornResult {
        plan,
        row_potential: u,
        col_potential: v,
        transport_cost,
        iterations,
        converged,
    })
}

/// Log-domain Sinkhorn iterations on the potentials f, g.
///
/// Every reduction is a max-subtracted log-sum-exp restricted to the rows and
/// columns with positive mass, so no intermediate can overflow for finite C
/// and `epsilon ≥ EPSILON_FLOOR`. Zero-mass rows/columns keep the −∞-potential
/// semantics: they are excluded from all reductions and their plan entries are
/// exactly 0.
pub fn sinkhorn_log(
    a: &ProbVector,
    b: &ProbVector,
    cost: &CostMatrix,
    cfg: &SinkhornConfig,
) -> Result<SinkhornResult> {
    cfg.validate()?;
    check_dimensions(a, b, cost)?;
    if cfg.epsilon < EPSILON_FLOOR {
        return Err(Error::EpsilonTooSmall {
            epsilon: cfg.epsilon,
            floor: EPSILON_FLOOR,
        });
    }

    let eps = cfg.epsilon;
    let n = a.len();
    let m = b.len();
    let c = cost.entries();
    let active_rows: Vec<usize> = (0..n).filter(|&i| a.values()[i] > 0.0).collect();
    let active_cols: Vec<usize> = (0..m).filter(|&j| b.values()[j] > 0.0).collect();
    let log_a: Vec<f64> = active_rows.iter().map(|&i| a.values()[i].ln()).collect();
    let log_b: Vec<f64> = active_cols.iter().map(|&j| b.values()[j].ln()).collect();

    let mut f = Array1::from_elem(n, f64::NEG_INFINITY);
    let mut g = Array1::from_elem(m, f64::NEG_INFINITY);
    for &i in &active_rows {
        f[i] = 0.0;
    }
    for &j in &active_cols {
        g[j] = 0.0;
    }

    let limit = cfg.iteration_limit();
    let mut scratch = vec![0.0; active_rows.len().max(active_cols.len())];
    let mut iterations = 0;
    let mut converged = false;
    let mut last_delta = f64::INFINITY;

    for _ in 0..limit {
        let mut delta: f64 = 0.0;
        for (r, &i) in active_rows.iter().enumerate() {
            let mut max_t = f64::NEG_INFINITY;
            for (s, &j) in active_cols.iter().enumerate() {
                let t = (g[j] - c[[i, j]]) / eps;
                scratch[s] = t;
                if t > max_t {
                    max_t = t;
                }
            }
            let mut sum = 0.0;
            for &t in &scratch[..active_cols.len()] {
                sum += (t - max_t).exp();
            }
            let f_new = eps * log_a[r] - eps * (max_t + sum.ln());
            delta = delta.max((f_new - f[i]).abs());
            f[i] = f_new;
        }
        for (s, &j) in active_cols.iter().enumerate() {
            let mut max_t = f64::NEG_INFINITY;
            for (r, &i) in active_rows.iter().enumerate() {
                let t = (f[i] - c[[i, j]]) / eps;
                scratch[r] = t;
                if t > max_t {
                    max_t = t;
                }
            }
            let mut sum = 0.0;
            for &t in &scratch[..active_rows.len()] {
                sum += (t - max_t).exp();
            }
            g[j] = eps * log_b[s] - eps * (max_t + sum.ln());
        }
        last_delta = delta;
        iterations += 1;
        if cfg.mode == SinkhornMode::ToleranceDriven && last_delta <= cfg.tolerance {
            converged = true;
            break;
        }
    }
    if cfg.mode == SinkhornMode::FixedIterations {
        converged = last_delta <= cfg.tolerance;
    }

    let mut plan = Array2::<f64>::zeros((n, m));
    for &i in &active_rows {
        for &j in &active_cols {
            plan[[i, j]] = ((f[i] + g[j] - c[[i, j]]) / eps).exp();
        }
    }
    let transport_cost = transport_cost_of(&plan, cost);
    Ok(SinkhornResult {
        plan,
        row_potential: f,
        col_potential: g,
        transport_cost,
        iterations,
        converged,
    })
}

/// Σ_ij C_ij P_ij in a fixed row-major order.
fn transport_cost_of(plan: &Array2<f64>, cost: &CostMatrix) -> f64 {
    let c = cost.entries();
    let mut total = 0.0;
    for i in 0..plan.nrows() {
        for j in 0..plan.ncols() {
            total += c[[i, j]] * plan[[i, j]];
        }
    }
    total
}
