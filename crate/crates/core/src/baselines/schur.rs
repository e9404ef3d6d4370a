use crate::error::{check_len, Result};
use crate::linalg::{SparseFactorization, SparseMatrixCSR};

/// Implicit Schur complement `S = A^T M^{-1} A`; `S` is never formed.
#[derive(Debug, Clone, Copy)]
pub struct SchurOperator<'a> {
    pub a: &'a SparseMatrixCSR,
    pub fact: &'a SparseFactorization,
}

impl<'a> SchurOperator<'a> {
    pub fn new(a: &'a SparseMatrixCSR, fact: &'a SparseFactorization) -> Result<Self> {
        check_len("factorization vs rows of A", a.nrows(), fact.dim())?;
        Ok(Self { a, fact })
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("schur_apply", self.dim(), x.len())?;
        self.a.spmv_t(&self.fact.apply_inverse(&self.a.spmv(x)?)?)
    }
}

pub fn schur_apply(op: &SchurOperator<'_>, x: &[f64]) -> Result<Vec<f64>> {
    op.apply(x)
}
