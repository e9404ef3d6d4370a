//! Restarted GMRES on the right block-preconditioned saddle system
//!
//! ```text
//! [M  A] [M^{-1} 0] [u~]   [0]
//! [A^T 0] [0     I] [p~] = [b],     u = M^{-1} u~,  p = p~
//! ```
//!
//! The preconditioned operator maps `[u~; p~]` to `[u~ + A p~; A^T M^{-1} u~]`,
//! one `M^{-1}` application per iteration. With right preconditioning the
//! Givens-updated residual is the residual of the original system.

use serde::{Deserialize, Serialize};

use super::givens::Givens;
use super::memory::{memory_estimate, SolverKind};
use crate::error::{check_len, Error, Result};
use crate::gkb::Termination;
use crate::linalg::vector::{axpy, dot, norm2};
use crate::linalg::{SparseFactorization, SparseMatrixCSR};

const HAPPY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
pub struct BlockPreconditionedSystem<'a> {
    pub m: &'a SparseMatrixCSR,
    pub a: &'a SparseMatrixCSR,
    pub fact: &'a SparseFactorization,
    pub b: &'a [f64],
}

impl<'a> BlockPreconditionedSystem<'a> {
    pub fn new(
        m: &'a SparseMatrixCSR,
        a: &'a SparseMatrixCSR,
        fact: &'a SparseFactorization,
        b: &'a [f64],
    ) -> Result<Self> {
        check_len("rows of A", m.nrows(), a.nrows())?;
        check_len("factorization of M", m.nrows(), fact.dim())?;
        check_len("right-hand side b", a.ncols(), b.len())?;
        Ok(Self { m, a, fact, b })
    }

    pub fn primal_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn dual_dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn dim(&self) -> usize {
        self.primal_dim() + self.dual_dim()
    }

    /// `K P^{-1} x`, applying `M^{-1}` once.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.primal_dim();
        let (ut, pt) = x.split_at(m);
        let mut out = Vec::with_capacity(self.dim());
        let ap = self.a.spmv(pt)?;
        out.extend(ut.iter().zip(&ap).map(|(u, a)| u + a));
        let minv_u = self.fact.apply_inverse(ut)?;
        out.extend(self.a.spmv_t(&minv_u)?);
        Ok(out)
    }

    /// `[0; b]`
    pub fn rhs(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.primal_dim()];
        r.extend_from_slice(self.b);
        r
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmresReport {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub iterations: usize,
    /// Relative residual norms, one per iteration.
    pub history: Vec<f64>,
    pub termination: Termination,
    pub restart: Option<usize>,
    /// Most basis scalars held at once, counted while running.
    pub peak_basis_scalars: usize,
    /// Model footprint `(m + n)(k + 1)` with `k` the restart length, or the
    /// iteration count when unrestarted.
    pub memory_estimate: usize,
}

/// Right-preconditioned GMRES from a zero initial guess. `restart = None`
/// keeps the whole basis; `Some(k)` discards it every `k` iterations and
/// restarts from the current residual.
pub fn gmres_solve(
    sys: &BlockPreconditionedSystem<'_>,
    tol: f64,
    maxit: usize,
    restart: Option<usize>,
) -> Result<GmresReport> {
    if restart == Some(0) {
        return Err(Error::InvalidConfig("restart must be >= 1".into()));
    }
    if !(tol > 0.0) || maxit == 0 {
        return Err(Error::InvalidConfig("GMRES needs tol > 0 and maxit >= 1".into()));
    }
    let dim = sys.dim();
    let rhs = sys.rhs();
    let rhs_norm = norm2(&rhs);
    if rhs_norm == 0.0 {
        return Err(Error::ZeroRhs);
    }
    let cycle_len = restart.unwrap_or(usize::MAX);

    let mut x = vec![0.0; dim];
    let mut r = rhs.clone();
    let mut history = Vec::new();
    let mut peak_vectors = 0usize;
    let mut iterations = 0usize;
    let mut cycle_start_residual = rhs_norm;

    let termination = 'outer: loop {
        let beta = norm2(&r);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut r_cols: Vec<Vec<f64>> = Vec::new();
        let mut rotations: Vec<Givens> = Vec::new();
        let mut g = vec![beta];
        let mut done = None;

        while r_cols.len() < cycle_len {
            let j = r_cols.len();
            let mut w = sys.apply(&basis[j])?;
            let w_norm = norm2(&w);
            let mut h = Vec::with_capacity(j + 2);
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
                h.push(c);
            }
            let h_next = norm2(&w);
            for (i, rot) in rotations.iter().enumerate() {
                let (a, b) = rot.apply(h[i], h[i + 1]);
                h[i] = a;
                h[i + 1] = b;
            }
            let rot = Givens::new(h[j], h_next);
            h[j] = rot.r;
            let gj = g[j];
            g[j] = rot.c * gj;
            g.push(-rot.s * gj);
            rotations.push(rot);
            r_cols.push(h);
            iterations += 1;

            let rel = g[j + 1].abs() / rhs_norm;
            history.push(rel);
            let happy = h_next <= HAPPY_TOL * w_norm;
            if !happy {
                basis.push(w.iter().map(|v| v / h_next).collect());
            }
            peak_vectors = peak_vectors.max(basis.len());

            if rel <= tol || happy {
                done = Some(Termination::Converged);
                break;
            }
            if iterations >= maxit {
                done = Some(Termination::MaxitReached);
                break;
            }
        }

        // y = R^{-1} g, x += V y
        let k = r_cols.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for (l, yl) in y.iter().enumerate().skip(i + 1) {
                s -= r_cols[l][i] * yl;
            }
            y[i] = s / r_cols[i][i];
        }
        for (v, &c) in basis.iter().zip(&y) {
            axpy(c, v, &mut x);
        }

        if let Some(t) = done {
            break 'outer t;
        }
        let kx = sys.apply(&x)?;
        r = rhs.iter().zip(&kx).map(|(b, k)| b - k).collect();
        let res = g[k].abs();
        if res >= cycle_start_residual {
            break 'outer Termination::Stagnated;
        }
        cycle_start_residual = res;
    };

    let m = sys.primal_dim();
    let u = sys.fact.apply_inverse(&x[..m])?;
    let p = x[m..].to_vec();
    let model_k = restart.unwrap_or(iterations);
    Ok(GmresReport {
        u,
        p,
        iterations,
        history,
        termination,
        restart,
        peak_basis_scalars: peak_vectors * dim,
        memory_estimate: memory_estimate(SolverKind::Gmres, model_k, m, sys.dual_dim()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::factorize;

    #[test]
    fn identity_blocks() {
        let i = SparseMatrixCSR::identity(3);
        let f = factorize(&i).unwrap();
        let b = [1.0, -2.0, 0.5];
        let sys = BlockPreconditionedSystem::new(&i, &i, &f, &b).unwrap();
        let rep = gmres_solve(&sys, 1e-12, 50, None).unwrap();
        assert_eq!(rep.termination, Termination::Converged);
        for j in 0..3 {
            assert!((rep.u[j] - b[j]).abs() < 1e-10);
            assert!((rep.p[j] + b[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn restart_zero_rejected() {
        let i = SparseMatrixCSR::identity(2);
        let f = factorize(&i).unwrap();
        let b = [1.0, 1.0];
        let sys = BlockPreconditionedSystem::new(&i, &i, &f, &b).unwrap();
        assert!(matches!(
            gmres_solve(&sys, 1e-6, 10, Some(0)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn apply_uses_block_structure() {
        let m = SparseMatrixCSR::from_diagonal(&[2.0, 4.0]);
        let a = SparseMatrixCSR::from_dense(&[vec![1.0], vec![1.0]]);
        let f = factorize(&m).unwrap();
        let b = [1.0];
        let sys = BlockPreconditionedSystem::new(&m, &a, &f, &b).unwrap();
        // [u~ + A p~; A^T M^{-1} u~] at u~ = [2, 4], p~ = [1]
        assert_eq!(sys.apply(&[2.0, 4.0, 1.0]).unwrap(), vec![3.0, 5.0, 2.0]);
    }
}
