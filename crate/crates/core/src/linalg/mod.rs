//! Sparse and small structured kernels.

pub mod csr;
pub mod dense;
pub mod lu;
pub mod structured;
pub mod vector;

pub use csr::SparseMatrixCSR;
pub use lu::{factorize, SparseFactorization};
pub use structured::{
    solve_bidiag, solve_bidiag_transpose, solve_unit_lower_transpose, BidiagonalUpper,
    HessenbergColumns, UnitLowerTriangular,
};
pub use vector::{axpy, dot, m_inner, m_norm, norm2};

/// `y = M^{-1} x` for the nonsymmetric leading block.
pub fn apply_inverse(fact: &SparseFactorization, x: &[f64]) -> crate::Result<Vec<f64>> {
    fact.apply_inverse(x)
}

/// `y = A x`
pub fn spmv(a: &SparseMatrixCSR, x: &[f64]) -> crate::Result<Vec<f64>> {
    a.spmv(x)
}

/// `y = A^T x`
pub fn spmv_t(a: &SparseMatrixCSR, x: &[f64]) -> crate::Result<Vec<f64>> {
    a.spmv_t(x)
}
