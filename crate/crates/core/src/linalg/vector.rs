//! Dense vector kernels and the M-weighted inner product.

use super::csr::SparseMatrixCSR;
use crate::error::{check_len, Error, Result};

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// Returns `x^T M y`.
pub fn m_inner(m: &SparseMatrixCSR, x: &[f64], y: &[f64]) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            nrows: m.nrows(),
            ncols: m.ncols(),
        });
    }
    check_len("m_inner x", m.nrows(), x.len())?;
    check_len("m_inner y", m.nrows(), y.len())?;
    let my = m.spmv(y)?;
    Ok(dot(x, &my))
}

/// `sqrt(x^T M x)`; fails when the quadratic form is negative.
pub fn m_norm(m: &SparseMatrixCSR, x: &[f64]) -> Result<f64> {
    let q = m_inner(m, x, x)?;
    if q < 0.0 {
        return Err(Error::NegativeQuadraticForm { value: q });
    }
    Ok(q.sqrt())
}
