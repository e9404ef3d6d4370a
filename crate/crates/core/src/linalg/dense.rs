//! Small dense helpers for validation paths (Hessenberg cross-checks, rank
//! estimates). Backed by nalgebra; never used inside the iteration loops.

use nalgebra::{DMatrix, DVector};

use super::csr::SparseMatrixCSR;

pub fn to_nalgebra(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j])
}

pub fn sparse_to_nalgebra(a: &SparseMatrixCSR) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplets() {
        out[(i, j)] = v;
    }
    out
}

/// Solves a square dense system with partial-pivot LU; `None` if singular.
pub fn solve(rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = to_nalgebra(rows);
    m.lu()
        .solve(&DVector::from_column_slice(rhs))
        .map(|x| x.iter().copied().collect())
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let inner = b.len();
    let ncols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..ncols)
                .map(|j| (0..inner).map(|l| row[l] * b[l][j]).sum())
                .collect()
        })
        .collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let ncols = a.first().map_or(0, Vec::len);
    (0..ncols)
        .map(|j| a.iter().map(|row| row[j]).collect())
        .collect()
}

pub fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

pub fn frobenius_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb))
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Singular values of a dense matrix, descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}
