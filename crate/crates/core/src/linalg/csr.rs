//! Compressed sparse row storage.
//!
//! Rows are stored contiguously: the entries of row `i` live in
//! `values[row_offsets[i]..row_offsets[i + 1]]` with matching column indices,
//! sorted strictly increasing inside each row.

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixCSR {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrixCSR {
    /// Builds a matrix from raw CSR arrays, checking every structural invariant.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidMatrix("row_offsets[0] != 0".into()));
        }
        if col_indices.len() != values.len() || row_offsets[nrows] != values.len() {
            return Err(Error::InvalidMatrix(
                "row_offsets[nrows], col_indices and values disagree on nnz".into(),
            ));
        }
        for i in 0..nrows {
            let (start, end) = (row_offsets[i], row_offsets[i + 1]);
            if end < start {
                return Err(Error::InvalidMatrix(format!(
                    "row_offsets decreases at row {i}"
                )));
            }
            let cols = &col_indices[start..end];
            for (k, &c) in cols.iter().enumerate() {
                if c >= ncols {
                    return Err(Error::InvalidMatrix(format!(
                        "column index {c} out of range in row {i}"
                    )));
                }
                if k > 0 && cols[k - 1] >= c {
                    return Err(Error::InvalidMatrix(format!(
                        "column indices not strictly increasing in row {i}"
                    )));
                }
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Assembles from `(row, col, value)` triplets. Repeated positions are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidMatrix(format!(
                    "triplet ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
        }
        sorted.sort_by_key(|t| (t.0, t.1));

        let mut row_offsets = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            col_indices.push(c);
            values.push(v);
            row_offsets[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Keeps only the nonzero entries of a row-major dense matrix.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for row in rows {
            assert_eq!(row.len(), ncols, "ragged dense input");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in out.iter_mut().enumerate() {
            for (c, v) in self.row(i) {
                row[c] = v;
            }
        }
        out
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates the stored `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// Triplets of every stored entry in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(c, v)| (i, c, v)))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for (c, v) in self.row(i) {
                let dst = next[c];
                col_indices[dst] = i;
                values[dst] = v;
                next[c] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    /// True when the stored pattern and values equal those of the transpose.
    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols && *self == self.transpose()
    }

    /// `y = A x`
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("spmv", self.ncols, x.len())?;
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` into a caller-provided buffer; lengths must already agree.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let range = self.row_offsets[i]..self.row_offsets[i + 1];
            *yi = self.col_indices[range.clone()]
                .iter()
                .zip(&self.values[range])
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    /// `y = A^T x`
    pub fn spmv_t(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("spmv_t", self.nrows, x.len())?;
        let mut y = vec![0.0; self.ncols];
        self.spmv_t_into(x, &mut y);
        Ok(y)
    }

    pub fn spmv_t_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (c, v) in self.row(i) {
                y[c] += v * xi;
            }
        }
    }

    /// Frobenius norm of the stored values.
    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_mul(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    #[test]
    fn spmv_identity() {
        let i3 = SparseMatrixCSR::identity(3);
        assert_eq!(i3.spmv(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn spmv_zero_matrix() {
        let z = SparseMatrixCSR::zeros(2, 2);
        assert_eq!(z.spmv(&[5.0, 7.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn spmv_small_dense_oracle() {
        let rows = vec![vec![2.0, 0.0], vec![1.0, 3.0]];
        let a = SparseMatrixCSR::from_dense(&rows);
        let x = [1.0, 1.0];
        assert_eq!(a.spmv(&x).unwrap(), dense_mul(&rows, &x));
        assert_eq!(a.spmv(&x).unwrap(), vec![2.0, 4.0]);
    }

    #[test]
    fn spmv_t_small_dense_oracle() {
        let a = SparseMatrixCSR::from_dense(&[vec![2.0, 0.0], vec![1.0, 3.0]]);
        assert_eq!(a.spmv_t(&[1.0, 1.0]).unwrap(), vec![3.0, 3.0]);
        let x = [4.0, -2.0, 0.5];
        assert_eq!(SparseMatrixCSR::identity(3).spmv_t(&x).unwrap(), x.to_vec());
    }

    #[test]
    fn spmv_dimension_mismatch() {
        let a = SparseMatrixCSR::zeros(2, 3);
        assert!(matches!(
            a.spmv(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(a.spmv_t(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn adjoint_identity_random_5x3() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let a = SparseMatrixCSR::from_dense(&rows);
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs: f64 = y.iter().zip(a.spmv(&x).unwrap()).map(|(a, b)| a * b).sum();
        let rhs: f64 = a.spmv_t(&y).unwrap().iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() <= 1e-14);
    }

    #[test]
    fn new_rejects_bad_structure() {
        assert!(SparseMatrixCSR::new(2, 2, vec![0, 1, 1], vec![3], vec![1.0]).is_err());
        assert!(SparseMatrixCSR::new(1, 3, vec![0, 2], vec![1, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrixCSR::new(2, 2, vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrixCSR::new(2, 2, vec![1, 1, 1], vec![0], vec![1.0]).is_err());
        assert!(SparseMatrixCSR::new(2, 2, vec![0, 1, 2], vec![1, 0], vec![1.0, 1.0]).is_ok());
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = SparseMatrixCSR::from_triplets(2, 2, &[(1, 0, 1.0), (0, 1, 2.0), (1, 0, 3.0)])
            .unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(1, 0), 4.0);
        assert_eq!(a.get(0, 1), 2.0);
        assert_eq!(a.get(0, 0), 0.0);
    }

    fn arb_matrix() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
        (1usize..8, 1usize..8).prop_flat_map(|(r, c)| {
            (
                prop::collection::vec(
                    prop::collection::vec(
                        prop_oneof![Just(0.0), -10.0f64..10.0],
                        c,
                    ),
                    r,
                ),
                prop::collection::vec(-10.0f64..10.0, c),
                prop::collection::vec(-10.0f64..10.0, r),
            )
        })
    }

    proptest! {
        #[test]
        fn adjoint_identity((rows, x, y) in arb_matrix()) {
            let a = SparseMatrixCSR::from_dense(&rows);
            let ax = a.spmv(&x).unwrap();
            let aty = a.spmv_t(&y).unwrap();
            let lhs: f64 = y.iter().zip(&ax).map(|(a, b)| a * b).sum();
            let rhs: f64 = aty.iter().zip(&x).map(|(a, b)| a * b).sum();
            let scale: f64 = 1.0 + y.iter().zip(&ax).map(|(a, b)| (a * b).abs()).sum::<f64>();
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
        }

        #[test]
        fn transpose_is_involution((rows, _x, _y) in arb_matrix()) {
            let a = SparseMatrixCSR::from_dense(&rows);
            prop_assert_eq!(a.transpose().transpose(), a.clone());
            let rebuilt = SparseMatrixCSR::new(
                a.nrows(), a.ncols(),
                a.row_offsets().to_vec(), a.col_indices().to_vec(), a.values().to_vec(),
            ).unwrap();
            prop_assert_eq!(rebuilt, a);
        }
    }
}
