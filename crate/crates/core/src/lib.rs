//! Nonsymmetric generalized Golub-Kahan (nsCRAIG) solver for saddle-point
//! systems `[[M, A], [A^T, 0]] [u; p] = [0; b]` with `M` nonsymmetric
//! positive definite, together with FOM and GMRES reference solvers and test
//! problem generators.

pub mod baselines;
pub mod error;
pub mod gkb;
pub mod linalg;
pub mod problems;
pub mod protocol;

pub use error::{Error, Result};
pub use gkb::{
    nscraig_solve, nscraig_solve_with, NsGkbState, Orthogonalization, SaddleOperators,
    SolveReport, SolverConfig, StoppingCriterion, Termination,
};
pub use linalg::{factorize, SparseFactorization, SparseMatrixCSR};
pub use problems::{build_problem, ProblemKind, ProblemSpec, SaddleSystem};
pub use protocol::{compare, Comparison, ComparisonRow};
