//! Random sparse saddle systems with a nonsymmetric positive-definite leading
//! block and a full-column-rank coupling block.
//!
//! `M = D + s (K - K^T) / 2` where `D` is symmetric, strictly diagonally
//! dominant with positive diagonal (hence SPD) and `K` is random sparse. The
//! skew part drops out of `x^T M x`, so `M` is positive definite for every
//! skew scale `s`. Column `j` of `A` owns a dominant entry in a private row
//! and all other entries of `A` fall in the remaining `m - n` rows, so the
//! pivot rows form a nonsingular diagonal block.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{random_unit_vector, ProblemKind, ProblemSpec, SaddleSystem};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrixCSR;

const OFFDIAG_PER_ROW: usize = 3;
const SKEW_PER_ROW: usize = 3;
const COUPLING_FILL_PER_COL: usize = 2;

pub fn gen_synthetic(spec: &ProblemSpec) -> Result<SaddleSystem> {
    if spec.kind != ProblemKind::Synthetic {
        return Err(Error::InvalidProblem("expected a synthetic spec".into()));
    }
    spec.check()?;
    let (m, n) = (spec.m, spec.n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut trips = Vec::new();
    let mut row_abs = vec![0.0f64; m];
    for i in 0..m {
        for _ in 0..OFFDIAG_PER_ROW {
            let j = rng.random_range(0..m);
            if j == i {
                continue;
            }
            let v: f64 = 0.5 * rng.random_range(-1.0..1.0);
            trips.push((i, j, v));
            trips.push((j, i, v));
            row_abs[i] += v.abs();
            row_abs[j] += v.abs();
        }
    }
    for (i, s) in row_abs.iter().enumerate() {
        trips.push((i, i, s + 1.0 + rng.random_range(0.0..1.0)));
    }
    if spec.skew_scale != 0.0 {
        let half = 0.5 * spec.skew_scale;
        for i in 0..m {
            for _ in 0..SKEW_PER_ROW {
                let j = rng.random_range(0..m);
                if j == i {
                    continue;
                }
                let v = half * rng.random_range(-1.0..1.0);
                trips.push((i, j, v));
                trips.push((j, i, -v));
            }
        }
    }
    let mmat = SparseMatrixCSR::from_triplets(m, m, &trips)?;

    let mut rows: Vec<usize> = (0..m).collect();
    rows.shuffle(&mut rng);
    let (pivots, others) = rows.split_at(n);
    let mut a_trips = Vec::new();
    for (j, &r) in pivots.iter().enumerate() {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        a_trips.push((r, j, sign * (1.0 + rng.random_range(0.0..1.0))));
        for _ in 0..COUPLING_FILL_PER_COL {
            let r2 = others[rng.random_range(0..others.len())];
            a_trips.push((r2, j, 0.5 * rng.random_range(-1.0..1.0)));
        }
    }
    let amat = SparseMatrixCSR::from_triplets(m, n, &a_trips)?;
    let b = random_unit_vector(&mut rng, n);
    SaddleSystem::new(mmat, amat, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector::dot;

    #[test]
    fn deterministic_for_seed() {
        let spec = ProblemSpec::synthetic(40, 12, 9, 1.0);
        let a = gen_synthetic(&spec).unwrap();
        let b = gen_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        let c = gen_synthetic(&ProblemSpec::synthetic(40, 12, 10, 1.0)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_skew_is_symmetric() {
        let sys = gen_synthetic(&ProblemSpec::synthetic(50, 10, 3, 0.0)).unwrap();
        assert!(sys.m.is_symmetric());
        let sys = gen_synthetic(&ProblemSpec::synthetic(50, 10, 3, 1.0)).unwrap();
        assert!(!sys.m.is_symmetric());
    }

    #[test]
    fn sampled_quadratic_form_positive() {
        let sys = gen_synthetic(&ProblemSpec::synthetic(100, 30, 4, 2.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let min = (0..100)
            .map(|_| {
                let x = random_unit_vector(&mut rng, 100);
                dot(&x, &sys.m.spmv(&x).unwrap())
            })
            .fold(f64::INFINITY, f64::min);
        assert!(min > 0.0, "min x^T M x = {min}");
    }

    #[test]
    fn rejects_n_ge_m() {
        assert!(gen_synthetic(&ProblemSpec::synthetic(10, 10, 0, 1.0)).is_err());
        assert!(gen_synthetic(&ProblemSpec::synthetic(10, 0, 0, 1.0)).is_err());
    }

    #[test]
    fn rhs_is_unit() {
        let sys = gen_synthetic(&ProblemSpec::synthetic(30, 7, 2, 1.0)).unwrap();
        assert!((crate::linalg::norm2(&sys.b) - 1.0).abs() < 1e-14);
    }
}
