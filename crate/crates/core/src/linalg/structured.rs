//! Packed small matrices produced by the bidiagonalization: the upper
//! bidiagonal `B_k`, the upper Hessenberg `H_k` and the unit lower triangular
//! `L_k`. Each grows by one row/column per iteration and is never stored as a
//! general dense matrix.

use crate::error::{check_len, Error, Result};

/// Upper bidiagonal matrix with diagonal `alphas` and superdiagonal `betas`.
///
/// `betas[i]` sits at position `(i, i + 1)`, so a `k x k` matrix stores
/// `k - 1` betas.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BidiagonalUpper {
    alphas: Vec<f64>,
    betas: Vec<f64>,
}

impl BidiagonalUpper {
    pub fn new(alphas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if !alphas.is_empty() && betas.len() + 1 != alphas.len() {
            return Err(Error::DimensionMismatch {
                context: "bidiagonal superdiagonal",
                expected: alphas.len().saturating_sub(1),
                found: betas.len(),
            });
        }
        Ok(Self { alphas, betas })
    }

    /// Grows `B_k` to `B_{k+1}`. `beta` is ignored for the first column.
    pub fn push(&mut self, beta: f64, alpha: f64) {
        if !self.alphas.is_empty() {
            self.betas.push(beta);
        }
        self.alphas.push(alpha);
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let k = self.dim();
        let mut out = vec![vec![0.0; k]; k];
        for i in 0..k {
            out[i][i] = self.alphas[i];
            if i + 1 < k {
                out[i][i + 1] = self.betas[i];
            }
        }
        out
    }

    fn check(&self, rhs: &[f64]) -> Result<()> {
        check_len("bidiagonal solve", self.dim(), rhs.len())?;
        if let Some(index) = self.alphas.iter().position(|&a| a == 0.0) {
            return Err(Error::ZeroDiagonal { index });
        }
        Ok(())
    }
}

/// Solves `B^T x = rhs` by forward substitution.
pub fn solve_bidiag_transpose(b: &BidiagonalUpper, rhs: &[f64]) -> Result<Vec<f64>> {
    b.check(rhs)?;
    let mut x = Vec::with_capacity(rhs.len());
    for (i, &r) in rhs.iter().enumerate() {
        let carry = if i == 0 { 0.0 } else { b.betas[i - 1] * x[i - 1] };
        x.push((r - carry) / b.alphas[i]);
    }
    Ok(x)
}

/// Solves `B x = rhs` by back substitution.
pub fn solve_bidiag(b: &BidiagonalUpper, rhs: &[f64]) -> Result<Vec<f64>> {
    b.check(rhs)?;
    let k = rhs.len();
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let carry = if i + 1 < k { b.betas[i] * x[i + 1] } else { 0.0 };
        x[i] = (rhs[i] - carry) / b.alphas[i];
    }
    Ok(x)
}

/// Upper Hessenberg matrix kept column by column.
///
/// Column `j` holds the `j + 1` entries on and above the diagonal; the
/// subdiagonal entry below column `j` is `subdiag[j]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HessenbergColumns {
    columns: Vec<Vec<f64>>,
    subdiag: Vec<f64>,
}

impl HessenbergColumns {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends column `j = dim()`, which must have exactly `j + 1` entries,
    /// together with the subdiagonal entry beneath it.
    pub fn push_column(&mut self, column: Vec<f64>, below: f64) -> Result<()> {
        check_len("hessenberg column", self.columns.len() + 1, column.len())?;
        self.columns.push(column);
        self.subdiag.push(below);
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn subdiag(&self) -> &[f64] {
        &self.subdiag
    }

    /// Leading `k x k` block as a dense row-major matrix.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let k = self.dim();
        let mut out = vec![vec![0.0; k]; k];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                out[i][j] = v;
            }
            if j + 1 < k {
                out[j + 1][j] = self.subdiag[j];
            }
        }
        out
    }
}

/// Unit lower triangular matrix; the strictly lower part is packed row-wise,
/// row `i` holding `i` entries starting at offset `i (i - 1) / 2`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UnitLowerTriangular {
    strict_lower: Vec<f64>,
    dim: usize,
}

impl UnitLowerTriangular {
    pub fn identity(dim: usize) -> Self {
        Self {
            strict_lower: vec![0.0; dim * dim.saturating_sub(1) / 2],
            dim,
        }
    }

    pub fn push_row(&mut self, strict: &[f64]) -> Result<()> {
        check_len("unit lower row", self.dim, strict.len())?;
        self.strict_lower.extend_from_slice(strict);
        self.dim += 1;
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Strictly lower part of row `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let start = i * i.saturating_sub(1) / 2;
        &self.strict_lower[start..start + i]
    }

    /// Entry `(i, j)` including the unit diagonal and the zero upper part.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Greater => self.row(i)[j],
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Runs `steps` rows of back substitution for `L^T x = rhs`, starting from
/// the last row, and returns those last `steps` entries of `x`.
pub fn solve_unit_lower_transpose(
    l: &UnitLowerTriangular,
    rhs: &[f64],
    steps: usize,
) -> Result<Vec<f64>> {
    check_len("unit lower transpose solve", l.dim(), rhs.len())?;
    if steps > l.dim() {
        return Err(Error::StepsExceedDim {
            steps,
            dim: l.dim(),
        });
    }
    let k = l.dim();
    let first = k - steps;
    let mut tail = vec![0.0; steps];
    for i in (first..k).rev() {
        let mut s = rhs[i];
        for j in i + 1..k {
            s -= l.row(j)[i] * tail[j - first];
        }
        tail[i - first] = s;
    }
    Ok(tail)
}
