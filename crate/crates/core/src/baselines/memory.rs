//! Stored-scalar memory models and the memory-matched GMRES restart length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Gkb,
    Gmres,
}

/// Stored scalars after `count` steps.
///
/// * `Gkb`: `m + n (count + 1)`. One length-`m` left vector plus `count`
///   right vectors and one length-`n` work vector.
/// * `Gmres`: `(m + n)(count + 1)` for a basis of `count + 1` block vectors,
///   where `count` is the restart length (or the iteration count when
///   unrestarted).
pub fn memory_estimate(kind: SolverKind, count: usize, m: usize, n: usize) -> usize {
    match kind {
        SolverKind::Gkb => m + n * (count + 1),
        SolverKind::Gmres => (m + n) * (count + 1),
    }
}

/// Largest restart length whose GMRES footprint fits in what nsCRAIG used
/// after `iter` steps: `floor(iter * n / (m + n))`.
pub fn compute_restart_kmax(iter: usize, m: usize, n: usize) -> Result<usize> {
    if m == 0 || n == 0 || iter == 0 {
        return Err(Error::InvalidConfig(format!(
            "restart budget needs iter, m, n >= 1 (got {iter}, {m}, {n})"
        )));
    }
    let kmax = iter * n / (m + n);
    if kmax == 0 {
        return Err(Error::NoRestartBudget);
    }
    Ok(kmax)
}
