//! Full Orthogonalization Method on the Schur complement.
//!
//! Arnoldi with modified Gram-Schmidt builds `S V_k = V_k H_k + h_{k+1,k}
//! v_{k+1} e_k^T`; the Galerkin iterate is `x_k = V_k H_k^{-1} (||r_0|| e_1)`.
//! `H_k` is reduced with the same Givens rotations GMRES would use: after
//! rotations `1..k-1` the `k x k` Hessenberg matrix is upper triangular with
//! the last diagonal entry not yet rotated, which is exactly the triangular
//! factor FOM needs.

use serde::{Deserialize, Serialize};

use super::givens::Givens;
use super::schur::SchurOperator;
use crate::error::{check_len, Error, Result};
use crate::gkb::Termination;
use crate::linalg::vector::{axpy, dot, norm2};

/// Arnoldi vectors with `h_{k+1,k} <= HAPPY_TOL * ||S v_k||` end the process.
const HAPPY_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct Fom<'a> {
    op: SchurOperator<'a>,
    beta: f64,
    basis: Vec<Vec<f64>>,
    /// Column `j` of the fully rotated triangular factor, `j + 1` entries.
    r_cols: Vec<Vec<f64>>,
    rotations: Vec<Givens>,
    /// Rotated `beta e_1`.
    g: Vec<f64>,
    y: Vec<f64>,
    residual: f64,
    exhausted: bool,
}

impl<'a> Fom<'a> {
    /// Starts Arnoldi from `rhs` (zero initial guess). No step is taken yet.
    pub fn new(op: SchurOperator<'a>, rhs: &[f64]) -> Result<Self> {
        check_len("FOM right-hand side", op.dim(), rhs.len())?;
        let beta = norm2(rhs);
        if beta == 0.0 {
            return Err(Error::ZeroRhs);
        }
        Ok(Self {
            op,
            beta,
            basis: vec![rhs.iter().map(|x| x / beta).collect()],
            r_cols: Vec::new(),
            rotations: Vec::new(),
            g: vec![beta],
            y: Vec::new(),
            residual: beta,
            exhausted: false,
        })
    }

    pub fn k(&self) -> usize {
        self.r_cols.len()
    }

    pub fn rhs_norm(&self) -> f64 {
        self.beta
    }

    /// `h_{k+1,k} |e_k^T y_k|`
    pub fn residual_norm(&self) -> f64 {
        self.residual
    }

    pub fn exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn step(&mut self) -> Result<()> {
        if self.exhausted {
            return Err(Error::FomBreakdown { step: self.k() });
        }
        let j = self.k();
        let mut w = self.op.apply(&self.basis[j])?;
        let w_norm = norm2(&w);
        let mut h = Vec::with_capacity(j + 2);
        for v in &self.basis {
            let c = dot(v, &w);
            axpy(-c, v, &mut w);
            h.push(c);
        }
        let h_next = norm2(&w);
        for (i, rot) in self.rotations.iter().enumerate() {
            let (a, b) = rot.apply(h[i], h[i + 1]);
            h[i] = a;
            h[i + 1] = b;
        }

        let rhat = h[j];
        if rhat == 0.0 || !rhat.is_finite() {
            return Err(Error::FomBreakdown { step: j + 1 });
        }
        // back substitution with the unrotated last diagonal
        let mut y = vec![0.0; j + 1];
        for i in (0..=j).rev() {
            let diag = if i == j { rhat } else { self.r_cols[i][i] };
            let mut s = self.g[i];
            for (l, yl) in y.iter().enumerate().skip(i + 1) {
                let entry = if l == j { h[i] } else { self.r_cols[l][i] };
                s -= entry * yl;
            }
            y[i] = s / diag;
        }
        self.residual = h_next * y[j].abs();
        self.y = y;

        let rot = Givens::new(rhat, h_next);
        h[j] = rot.r;
        let gj = self.g[j];
        self.g[j] = rot.c * gj;
        self.g.push(-rot.s * gj);
        self.rotations.push(rot);
        h.truncate(j + 1);
        self.r_cols.push(h);

        if h_next <= HAPPY_TOL * w_norm || j + 1 >= self.op.dim() {
            self.exhausted = true;
        } else {
            self.basis.push(w.iter().map(|x| x / h_next).collect());
        }
        Ok(())
    }

    /// Current iterate `x_k = V_k y_k`.
    pub fn solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.op.dim()];
        for (v, &c) in self.basis.iter().zip(&self.y) {
            axpy(c, v, &mut x);
        }
        x
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FomReport {
    pub p: Vec<f64>,
    pub iterations: usize,
    /// Relative residual norms, one per iteration.
    pub history: Vec<f64>,
    pub termination: Termination,
}

/// Runs FOM on `S p = rhs`. For the saddle system the caller passes
/// `rhs = -b`, so the returned `p` is the dual variable directly.
pub fn fom_solve(
    op: SchurOperator<'_>,
    rhs: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<FomReport> {
    let mut fom = Fom::new(op, rhs)?;
    let mut history = Vec::new();
    let termination = loop {
        fom.step()?;
        let rel = fom.residual_norm() / fom.rhs_norm();
        history.push(rel);
        if rel <= tol || fom.exhausted() {
            break Termination::Converged;
        }
        if fom.k() >= maxit {
            break Termination::MaxitReached;
        }
    };
    Ok(FomReport {
        p: fom.solution(),
        iterations: fom.k(),
        history,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{factorize, SparseMatrixCSR};

    #[test]
    fn identity_operator_one_step() {
        let i = SparseMatrixCSR::identity(3);
        let f = factorize(&i).unwrap();
        let op = SchurOperator::new(&i, &f).unwrap();
        let b = [1.0, 2.0, -1.0];
        let rhs: Vec<f64> = b.iter().map(|x| -x).collect();
        let rep = fom_solve(op, &rhs, 1e-12, 10).unwrap();
        assert_eq!(rep.iterations, 1);
        for (p, bi) in rep.p.iter().zip(&b) {
            assert!((p + bi).abs() < 1e-15);
        }
        assert!(rep.history[0] <= 1e-12);
    }

    #[test]
    fn matches_dense_solve_on_nonsymmetric_operator() {
        let m = SparseMatrixCSR::from_dense(&[
            vec![4.0, 1.0, 0.0, 0.0],
            vec![-1.0, 3.0, 0.5, 0.0],
            vec![0.0, -0.5, 5.0, 1.0],
            vec![0.0, 0.0, -1.0, 2.0],
        ]);
        let a = SparseMatrixCSR::from_dense(&[
            vec![1.0, 0.0, 0.0],
            vec![0.5, 1.0, 0.0],
            vec![0.0, 0.2, 1.0],
            vec![0.3, 0.0, 0.4],
        ]);
        let f = factorize(&m).unwrap();
        let op = SchurOperator::new(&a, &f).unwrap();
        let rhs = [1.0, -2.0, 0.5];
        let rep = fom_solve(op, &rhs, 1e-14, 10).unwrap();
        assert_eq!(rep.termination, Termination::Converged);
        let sp = op.apply(&rep.p).unwrap();
        for (x, y) in sp.iter().zip(&rhs) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(rep.iterations <= 3);
    }

    #[test]
    fn zero_rhs_rejected() {
        let i = SparseMatrixCSR::identity(2);
        let f = factorize(&i).unwrap();
        let op = SchurOperator::new(&i, &f).unwrap();
        assert!(matches!(Fom::new(op, &[0.0, 0.0]), Err(Error::ZeroRhs)));
    }
}
