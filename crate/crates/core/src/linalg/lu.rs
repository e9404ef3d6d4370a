//! Sparse LU factorization with row partial pivoting.
//!
//! Right-looking elimination on sparse rows. At step `k` the row holding the
//! largest remaining entry of column `k` becomes pivot row `k` of `U`; the
//! multipliers form column `k` of `L`. Fill stays inside the band for the
//! banded operators produced by the problem generators, so natural column
//! order is used.

use super::csr::SparseMatrixCSR;
use crate::error::{check_len, Error, Result};

type SparseRow = Vec<(usize, f64)>;

/// Factorization `P M = L U` of a square sparse matrix, computed once and
/// applied many times.
#[derive(Debug, Clone)]
pub struct SparseFactorization {
    m: usize,
    /// `perm[k]` is the original row chosen as pivot at step `k`.
    perm: Vec<usize>,
    /// Column `k` of `L` below the unit diagonal, indexed by original row.
    l_cols: Vec<SparseRow>,
    /// Row `k` of `U`; the first entry is the diagonal.
    u_rows: Vec<SparseRow>,
}

/// Pivots with magnitude at or below this fraction of the largest entry are
/// treated as zero.
const PIVOT_TOLERANCE: f64 = 1e-14;

/// Factorizes `M` once; reuse the handle for every `M^{-1} v` product.
pub fn factorize(m: &SparseMatrixCSR) -> Result<SparseFactorization> {
    SparseFactorization::new(m)
}

impl SparseFactorization {
    pub fn new(mat: &SparseMatrixCSR) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                nrows: mat.nrows(),
                ncols: mat.ncols(),
            });
        }
        let n = mat.nrows();
        let anorm = mat.values().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let threshold = PIVOT_TOLERANCE * anorm;

        let mut rows: Vec<SparseRow> = (0..n)
            .map(|i| mat.row(i).filter(|&(_, v)| v != 0.0).collect())
            .collect();
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, row) in rows.iter().enumerate() {
            for &(c, _) in row {
                col_rows[c].push(i);
            }
        }

        let mut pivoted = vec![false; n];
        let mut perm = Vec::with_capacity(n);
        let mut l_cols = Vec::with_capacity(n);
        let mut u_rows = Vec::with_capacity(n);

        for k in 0..n {
            let candidates: Vec<usize> = std::mem::take(&mut col_rows[k])
                .into_iter()
                .filter(|&r| !pivoted[r] && rows[r].first().is_some_and(|&(c, _)| c == k))
                .collect();
            let pivot_row = candidates
                .iter()
                .copied()
                .max_by(|&a, &b| rows[a][0].1.abs().total_cmp(&rows[b][0].1.abs()));
            let p = match pivot_row {
                Some(p) if rows[p][0].1.abs() > threshold => p,
                other => {
                    return Err(Error::SingularPivot {
                        row: k,
                        magnitude: other.map_or(0.0, |p| rows[p][0].1.abs()),
                    })
                }
            };
            pivoted[p] = true;
            let pivot_entries = std::mem::take(&mut rows[p]);
            let pivot = pivot_entries[0].1;

            let mut lcol = Vec::with_capacity(candidates.len().saturating_sub(1));
            for r in candidates.into_iter().filter(|&r| r != p) {
                let l = rows[r][0].1 / pivot;
                let merged = merge_update(&rows[r][1..], &pivot_entries[1..], l, |c| {
                    col_rows[c].push(r)
                });
                rows[r] = merged;
                lcol.push((r, l));
            }
            perm.push(p);
            l_cols.push(lcol);
            u_rows.push(pivot_entries);
        }

        Ok(Self {
            m: n,
            perm,
            l_cols,
            u_rows,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m
    }

    /// Number of stored entries in `L` (strict part) and `U`.
    pub fn fill(&self) -> (usize, usize) {
        (
            self.l_cols.iter().map(Vec::len).sum(),
            self.u_rows.iter().map(Vec::len).sum(),
        )
    }

    /// Returns `y` with `M y = x`.
    pub fn apply_inverse(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("apply_inverse", self.m, x.len())?;
        let mut y = vec![0.0; self.m];
        self.apply_inverse_into(x, &mut y);
        Ok(y)
    }

    /// Solves into `out`; lengths must already agree.
    pub fn apply_inverse_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.m);
        let mut work = x.to_vec();
        // forward: L w = P x, work is indexed by original row
        for k in 0..self.m {
            let wk = work[self.perm[k]];
            out[k] = wk;
            if wk != 0.0 {
                for &(r, l) in &self.l_cols[k] {
                    work[r] -= l * wk;
                }
            }
        }
        // backward: U y = w
        for k in (0..self.m).rev() {
            let row = &self.u_rows[k];
            let mut s = out[k];
            for &(c, v) in &row[1..] {
                s -= v * out[c];
            }
            out[k] = s / row[0].1;
        }
    }
}

/// Computes `target - l * pivot` for two sorted sparse rows. Columns that are
/// new in the result are reported through `on_fill`.
fn merge_update(
    target: &[(usize, f64)],
    pivot: &[(usize, f64)],
    l: f64,
    mut on_fill: impl FnMut(usize),
) -> SparseRow {
    let mut out = Vec::with_capacity(target.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < pivot.len() {
        match (target.get(i), pivot.get(j)) {
            (Some(&(ct, vt)), Some(&(cp, vp))) if ct == cp => {
                out.push((ct, vt - l * vp));
                i += 1;
                j += 1;
            }
            (Some(&(ct, vt)), Some(&(cp, _))) if ct < cp => {
                out.push((ct, vt));
                i += 1;
            }
            (Some(&(ct, vt)), None) => {
                out.push((ct, vt));
                i += 1;
            }
            (_, Some(&(cp, vp))) => {
                on_fill(cp);
                out.push((cp, -l * vp));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector::{norm2, sub};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dominant(n: usize, per_row: usize, seed: u64) -> SparseMatrixCSR {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trips = Vec::new();
        for i in 0..n {
            let mut rowsum = 0.0;
            for _ in 0..per_row {
                let j = rng.random_range(0..n);
                if j != i {
                    let v: f64 = rng.random_range(-1.0..1.0);
                    rowsum += v.abs();
                    trips.push((i, j, v));
                }
            }
            trips.push((i, i, rowsum + 1.0));
        }
        SparseMatrixCSR::from_triplets(n, n, &trips).unwrap()
    }

    #[test]
    fn identity_roundtrip() {
        let f = factorize(&SparseMatrixCSR::identity(4)).unwrap();
        let x = vec![1.0, -2.0, 3.5, 0.0];
        assert_eq!(f.apply_inverse(&x).unwrap(), x);
    }

    #[test]
    fn diagonal_case() {
        let f = factorize(&SparseMatrixCSR::from_diagonal(&[2.0, 4.0])).unwrap();
        assert_eq!(f.apply_inverse(&[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn random_nonsymmetric_50_residual() {
        let m = random_dominant(50, 5, 11);
        assert!(!m.is_symmetric());
        let f = factorize(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = f.apply_inverse(&x).unwrap();
        let r = sub(&m.spmv(&y).unwrap(), &x);
        assert!(norm2(&r) / norm2(&x) < 1e-12);
    }

    #[test]
    fn pivoting_required() {
        // zero leading entry forces a row swap
        let m = SparseMatrixCSR::from_dense(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ]);
        let f = factorize(&m).unwrap();
        let x = [1.0, 2.0, 3.0];
        let y = f.apply_inverse(&x).unwrap();
        let r = sub(&m.spmv(&y).unwrap(), &x);
        assert!(norm2(&r) < 1e-14);
    }

    #[test]
    fn singular_reports_pivot_row() {
        let m = SparseMatrixCSR::from_dense(&[
            vec![1.0, 2.0, 0.0],
            vec![2.0, 4.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        match factorize(&m) {
            Err(Error::SingularPivot { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected singular pivot, got {other:?}"),
        }
        let empty_col = SparseMatrixCSR::from_dense(&[vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert!(matches!(
            factorize(&empty_col),
            Err(Error::SingularPivot { row: 1, .. })
        ));
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(
            factorize(&SparseMatrixCSR::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn apply_inverse_dimension_mismatch() {
        let f = factorize(&SparseMatrixCSR::identity(3)).unwrap();
        assert!(f.apply_inverse(&[1.0]).is_err());
    }

    #[test]
    fn roundtrip_over_seeds() {
        for seed in 0..10 {
            let m = random_dominant(40, 4, seed);
            let f = factorize(&m).unwrap();
            let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
            let y = f.apply_inverse(&x).unwrap();
            let r = sub(&m.spmv(&y).unwrap(), &x);
            assert!(norm2(&r) <= 1e-10 * norm2(&x), "seed {seed}");
        }
    }
}
