//! Reference solvers: FOM on the implicit Schur complement and
//! right block-preconditioned GMRES with a memory-matched restart.

pub mod fom;
pub mod givens;
pub mod gmres;
pub mod memory;
pub mod schur;

pub use fom::{fom_solve, Fom, FomReport};
pub use gmres::{gmres_solve, BlockPreconditionedSystem, GmresReport};
pub use memory::{compute_restart_kmax, memory_estimate, SolverKind};
pub use schur::{schur_apply, SchurOperator};
