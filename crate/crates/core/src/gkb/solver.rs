//! nsCRAIG driver: runs the decomposition until a stopping test fires and
//! forms the explicit solution once, at the end.

use serde::{Deserialize, Serialize};

use super::state::{NsGkbState, Orthogonalization, SaddleOperators};
use crate::baselines::memory::{memory_estimate, SolverKind};
use crate::error::{Error, Result};
use crate::linalg::vector::{norm2, sub};
use crate::linalg::{factorize, SparseMatrixCSR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingCriterion {
    /// `beta_{k+1} |chi_k| / beta_1 <= tol`
    #[default]
    Residual,
    /// Relative delayed energy-norm estimate `<= tol^2`.
    ErrorEstimate,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub maxit: usize,
    pub criterion: StoppingCriterion,
    pub delay_d: usize,
    pub orthogonalization: Orthogonalization,
    /// Keep `V_k` and recompute the explicit residual every iteration.
    pub validate: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            maxit: 10_000,
            criterion: StoppingCriterion::Residual,
            delay_d: 5,
            orthogonalization: Orthogonalization::Mgs,
            validate: false,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.maxit < 1 {
            return Err(Error::InvalidConfig("maxit must be >= 1".into()));
        }
        if self.delay_d < 1 {
            return Err(Error::InvalidConfig("delay must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxitReached,
    Breakdown,
    /// A full GMRES restart cycle made no progress.
    Stagnated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub iterations: usize,
    /// Relative residual `||b - A^T u_k|| / ||b||` from the recursion, one
    /// entry per iteration.
    pub residual_history: Vec<f64>,
    /// Relative squared error estimate, one entry per iteration `k >= d`.
    pub error_estimate_history: Vec<f64>,
    /// Explicitly recomputed relative residual (validation mode only).
    pub explicit_residual_history: Option<Vec<f64>>,
    pub termination: Termination,
    pub breakdown_reason: Option<String>,
    /// Stored scalars, `m + n (iterations + 1)`.
    pub memory_estimate: usize,
    /// Some estimate came out with a negative sign and was replaced by its magnitude.
    pub negative_estimate_flag: bool,
}

/// Factorizes `M` and runs nsCRAIG on `[[M, A], [A^T, 0]] [u; p] = [0; b]`.
pub fn nscraig_solve(
    m: &SparseMatrixCSR,
    a: &SparseMatrixCSR,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let fact = factorize(m)?;
    let ops = SaddleOperators::new(m, a, &fact)?;
    nscraig_solve_with(&ops, b, cfg)
}

/// nsCRAIG over an existing factorization.
pub fn nscraig_solve_with(
    ops: &SaddleOperators<'_>,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.check()?;
    let mut state = NsGkbState::new(ops, b, cfg.orthogonalization, cfg.validate)?;
    let beta1 = state.beta1();

    let mut residual_history = Vec::new();
    let mut error_estimate_history = Vec::new();
    let mut explicit = cfg.validate.then(Vec::new);
    let mut breakdown_reason = None;

    let termination = loop {
        let k = state.k();
        let rel_res = state.relative_residual();
        residual_history.push(rel_res);
        let estimate = state.error_estimate(cfg.delay_d)?;
        if let Some(e) = estimate {
            error_estimate_history.push(e.relative);
        }
        if let Some(hist) = explicit.as_mut() {
            let (u_k, _) = state.recover_solution(ops)?;
            let r = sub(b, &ops.a.spmv_t(&u_k)?);
            hist.push(norm2(&r) / beta1);
        }

        let satisfied = match cfg.criterion {
            StoppingCriterion::Residual => rel_res <= cfg.tol,
            StoppingCriterion::ErrorEstimate => {
                estimate.is_some_and(|e| e.relative <= cfg.tol * cfg.tol)
            }
        };
        if satisfied {
            break Termination::Converged;
        }
        // Either beta_{k+1} vanished or k = n: the decomposition is complete
        // and u_k, p_k solve the system.
        if state.exhausted().is_some() {
            break Termination::Converged;
        }
        if k >= cfg.maxit {
            break Termination::MaxitReached;
        }
        if let Err(e) = state.step(ops) {
            match e {
                Error::Breakdown { .. } => {
                    breakdown_reason = Some(e.to_string());
                    break Termination::Breakdown;
                }
                other => return Err(other),
            }
        }
    };

    let (u, p) = state.recover_solution(ops)?;
    let iterations = state.k();
    Ok(SolveReport {
        u,
        p,
        iterations,
        residual_history,
        error_estimate_history,
        explicit_residual_history: explicit,
        termination,
        breakdown_reason,
        memory_estimate: memory_estimate(
            SolverKind::Gkb,
            iterations,
            ops.primal_dim(),
            ops.dual_dim(),
        ),
        negative_estimate_flag: state.negative_estimate_seen(),
    })
}
