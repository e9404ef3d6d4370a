//! Nonsymmetric generalized Golub-Kahan bidiagonalization and the nsCRAIG
//! solver built on it.

pub mod chi;
pub mod solver;
pub mod state;
pub mod validation;

pub use chi::GuardedScalar;
pub use solver::{
    nscraig_solve, nscraig_solve_with, SolveReport, SolverConfig, StoppingCriterion, Termination,
};
pub use state::{
    error_estimate, exact_error_energy_norm, gkb_init, gkb_step, recover_solution, residual_norm,
    ErrorEstimate, Exhaustion, NsGkbState, Orthogonalization, SaddleOperators, BREAKDOWN_TOL,
};
