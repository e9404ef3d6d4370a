//! Dense diagnostics for the decomposition identities. These form `Q^T Q`,
//! `V^T M V` or the Schur complement explicitly and are meant for desk-scale
//! checks, never for production solves.

use super::state::NsGkbState;
use crate::error::Result;
use crate::linalg::dense::{frobenius, frobenius_diff, matmul, transpose};
use crate::linalg::vector::dot;
use crate::linalg::{SparseFactorization, SparseMatrixCSR};

/// `max_{i,j} |(Q_k^T Q_k - I)_{ij}|`
pub fn orthogonality_defect(state: &NsGkbState) -> f64 {
    let q = state.right_basis();
    let mut worst = 0.0f64;
    for i in 0..q.len() {
        for j in 0..=i {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(&q[i], &q[j]) - target).abs());
        }
    }
    worst
}

/// `V_k^T M V_k` from the retained left basis.
pub fn left_gram(state: &NsGkbState, m: &SparseMatrixCSR) -> Option<Result<Vec<Vec<f64>>>> {
    let v = state.left_basis()?;
    Some((|| {
        let mv: Vec<Vec<f64>> = v.iter().map(|x| m.spmv(x)).collect::<Result<_>>()?;
        Ok(v.iter()
            .map(|vi| mv.iter().map(|mvj| dot(vi, mvj)).collect())
            .collect())
    })())
}

/// `||B_k^T L_k^T - H_k||_F / ||H_k||_F` with `L_k = V_k^T M V_k` taken from
/// the retained left basis.
pub fn factor_identity_defect(state: &NsGkbState, m: &SparseMatrixCSR) -> Option<Result<f64>> {
    let gram = left_gram(state, m)?;
    Some(gram.map(|l| {
        let bt = transpose(&state.bidiagonal().to_dense());
        let lhs = matmul(&bt, &transpose(&l));
        let h = state.hessenberg().to_dense();
        frobenius_diff(&lhs, &h) / frobenius(&h)
    }))
}

/// Largest entry of `V_k^T M V_k` strictly above the diagonal.
pub fn left_gram_upper_defect(state: &NsGkbState, m: &SparseMatrixCSR) -> Option<Result<f64>> {
    let gram = left_gram(state, m)?;
    Some(gram.map(|l| {
        let mut worst = 0.0f64;
        for (i, row) in l.iter().enumerate() {
            for &v in &row[i + 1..] {
                worst = worst.max(v.abs());
            }
        }
        worst
    }))
}

/// Explicit Schur complement `S = A^T M^{-1} A`, one column per solve.
pub fn dense_schur(a: &SparseMatrixCSR, fact: &SparseFactorization) -> Result<Vec<Vec<f64>>> {
    let n = a.ncols();
    let mut cols = Vec::with_capacity(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = a.spmv_t(&fact.apply_inverse(&a.spmv(&e)?)?)?;
        e[j] = 0.0;
        cols.push(col);
    }
    Ok(transpose(&cols))
}

#[derive(Debug, Clone, Copy)]
pub struct SchurHessenbergCheck {
    /// Frobenius norm of `Q^T S Q` below its first subdiagonal.
    pub below_subdiag: f64,
    /// `||Q^T S Q - H_k B_k||_F`
    pub mismatch: f64,
    pub s_norm: f64,
}

/// Compares `Q_k^T S Q_k` with `H_k B_k`.
pub fn schur_hessenberg_check(state: &NsGkbState, s: &[Vec<f64>]) -> SchurHessenbergCheck {
    let q = state.right_basis();
    let sq: Vec<Vec<f64>> = q
        .iter()
        .map(|qj| s.iter().map(|row| dot(row, qj)).collect())
        .collect();
    let k = q.len();
    let qsq: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| dot(&q[i], &sq[j])).collect())
        .collect();
    let hb = matmul(&state.hessenberg().to_dense(), &state.bidiagonal().to_dense());
    let mut below = 0.0;
    for (i, row) in qsq.iter().enumerate() {
        for &v in row.iter().take(i.saturating_sub(1)) {
            below += v * v;
        }
    }
    SchurHessenbergCheck {
        below_subdiag: below.sqrt(),
        mismatch: frobenius_diff(&qsq, &hb),
        s_norm: frobenius(s),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SymmetryCheck {
    /// `max |L_k - I|` over the packed factor.
    pub l_minus_identity: f64,
    /// Largest `|H_{ij}|` with `j > i + 1`.
    pub above_superdiag: f64,
    /// `||H_k - B_k^T||_max`
    pub h_minus_bt: f64,
}

pub fn symmetry_check(state: &NsGkbState) -> SymmetryCheck {
    let l = state.unit_lower();
    let mut l_minus_identity = 0.0f64;
    for i in 0..l.dim() {
        for &v in l.row(i) {
            l_minus_identity = l_minus_identity.max(v.abs());
        }
    }
    let h = state.hessenberg().to_dense();
    let bt = transpose(&state.bidiagonal().to_dense());
    let mut above = 0.0f64;
    let mut diff = 0.0f64;
    for i in 0..h.len() {
        for j in 0..h.len() {
            if j > i + 1 {
                above = above.max(h[i][j].abs());
            }
            diff = diff.max((h[i][j] - bt[i][j]).abs());
        }
    }
    SymmetryCheck {
        l_minus_identity,
        above_superdiag: above,
        h_minus_bt: diff,
    }
}
