//! Reduction of `[[M, A], [A^T, 0]] [w; p] = [b1; b2]` to a zero first block.
//!
//! With `w0 = M^{-1} b1` and `u = w - w0` the system becomes
//! `M u + A p = 0`, `A^T u = b2 - A^T w0`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::linalg::{factorize, SparseFactorization, SparseMatrixCSR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedRhs {
    /// Right-hand side of the reduced system.
    pub b: Vec<f64>,
    /// Shift recovering `w = u + w0`.
    pub w0: Vec<f64>,
    /// Set when the reduced right-hand side is exactly zero, so the reduced
    /// solution is trivial and Krylov solvers have nothing to do.
    pub trivial: bool,
}

pub fn reduce_general_form(
    m: &SparseMatrixCSR,
    a: &SparseMatrixCSR,
    b1: &[f64],
    b2: &[f64],
) -> Result<ReducedRhs> {
    let fact = factorize(m)?;
    reduce_general_form_with(&fact, a, b1, b2)
}

pub fn reduce_general_form_with(
    fact: &SparseFactorization,
    a: &SparseMatrixCSR,
    b1: &[f64],
    b2: &[f64],
) -> Result<ReducedRhs> {
    check_len("rows of A", fact.dim(), a.nrows())?;
    check_len("b1", a.nrows(), b1.len())?;
    check_len("b2", a.ncols(), b2.len())?;
    let w0 = if b1.iter().all(|&x| x == 0.0) {
        vec![0.0; b1.len()]
    } else {
        fact.apply_inverse(b1)?
    };
    let atw = a.spmv_t(&w0)?;
    let b: Vec<f64> = b2.iter().zip(&atw).map(|(x, y)| x - y).collect();
    let trivial = b.iter().all(|&x| x == 0.0);
    Ok(ReducedRhs { b, w0, trivial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gkb::{nscraig_solve, SolverConfig};
    use crate::problems::{gen_synthetic, ProblemSpec, SaddleSystem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_b1_passes_through() {
        let sys = gen_synthetic(&ProblemSpec::synthetic(20, 5, 1, 1.0)).unwrap();
        let red = reduce_general_form(&sys.m, &sys.a, &[0.0; 20], &sys.b).unwrap();
        assert_eq!(red.w0, vec![0.0; 20]);
        assert_eq!(red.b, sys.b);
        assert!(!red.trivial);
    }

    #[test]
    fn consistent_b2_is_trivial() {
        let m = SparseMatrixCSR::from_diagonal(&[2.0, 4.0, 8.0]);
        let a = SparseMatrixCSR::from_dense(&[vec![1.0], vec![2.0], vec![0.0]]);
        let b1 = [2.0, 4.0, 1.0];
        // M^{-1} b1 = [1, 1, 1/8], A^T of that = 3
        let red = reduce_general_form(&m, &a, &b1, &[3.0]).unwrap();
        assert!(red.trivial);
        assert_eq!(red.b, vec![0.0]);
    }

    #[test]
    fn round_trip_recovers_general_solution() {
        let base = gen_synthetic(&ProblemSpec::synthetic(30, 10, 7, 1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b1: Vec<f64> = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b2: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let red = reduce_general_form(&base.m, &base.a, &b1, &b2).unwrap();

        let cfg = SolverConfig {
            tol: 1e-14,
            ..SolverConfig::default()
        };
        let rep = nscraig_solve(&base.m, &base.a, &red.b, &cfg).unwrap();
        let w: Vec<f64> = rep.u.iter().zip(&red.w0).map(|(u, w)| u + w).collect();

        let general = SaddleSystem {
            b: b2.clone(),
            b1: Some(b1.clone()),
            ..base
        };
        let (r1, r2) = general.block_residuals(&w, &rep.p).unwrap();
        assert!(r1 <= 1e-9 && r2 <= 1e-9, "block residuals {r1:e}, {r2:e}");
    }

    #[test]
    fn dimension_errors() {
        let m = SparseMatrixCSR::identity(3);
        let a = SparseMatrixCSR::zeros(3, 1);
        assert!(reduce_general_form(&m, &a, &[0.0; 2], &[1.0]).is_err());
        assert!(reduce_general_form(&m, &a, &[0.0; 3], &[1.0, 2.0]).is_err());
    }
}
