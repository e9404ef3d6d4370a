//! Structural checks on a saddle system: positivity of `x^T M x` on random
//! samples and the column rank of `A`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{random_unit_vector, SaddleSystem};
use crate::linalg::dense::{singular_values, sparse_to_nalgebra};
use crate::linalg::vector::{dot, norm2};
use crate::linalg::{factorize, SparseMatrixCSR};

/// Largest `n` for which singular values come from a dense SVD.
pub const DENSE_SVD_LIMIT: usize = 200;
/// `A` counts as full column rank when `sigma_min > RANK_RTOL * sigma_max`.
pub const RANK_RTOL: f64 = 1e-10;
const SAMPLE_SEED: u64 = 0x5eed;
const POWER_ITERS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularValueMethod {
    DenseSvd,
    PowerIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub samples: usize,
    /// Smallest `x^T M x` over the sampled unit vectors.
    pub min_quadratic_form: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub method: SingularValueMethod,
    pub rank_rtol: f64,
    /// `min_quadratic_form > 0`
    pub m_positive_definite: bool,
    /// `sigma_min > rank_rtol * sigma_max`
    pub a_full_column_rank: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.m_positive_definite && self.a_full_column_rank
    }
}

pub fn validate_system(sys: &SaddleSystem, samples: usize) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let m = sys.primal_dim();
    let min_quadratic_form = (0..samples)
        .map(|_| {
            let x = random_unit_vector(&mut rng, m);
            let mx = sys.m.spmv(&x).expect("square M");
            dot(&x, &mx)
        })
        .fold(f64::INFINITY, f64::min);

    let (sigma_min, sigma_max, method) = if sys.dual_dim() <= DENSE_SVD_LIMIT {
        let s = singular_values(&sparse_to_nalgebra(&sys.a));
        let smax = s.first().copied().unwrap_or(0.0);
        // a tall A has exactly n singular values
        let smin = if s.len() < sys.dual_dim() { 0.0 } else { *s.last().unwrap_or(&0.0) };
        (smin, smax, SingularValueMethod::DenseSvd)
    } else {
        let (smin, smax) = extreme_singular_values(&sys.a, &mut rng);
        (smin, smax, SingularValueMethod::PowerIteration)
    };

    ValidationReport {
        samples,
        min_quadratic_form,
        sigma_min,
        sigma_max,
        method,
        rank_rtol: RANK_RTOL,
        m_positive_definite: samples > 0 && min_quadratic_form > 0.0,
        a_full_column_rank: sigma_max > 0.0 && sigma_min > RANK_RTOL * sigma_max,
    }
}

/// `(sigma_min, sigma_max)` of `A` from power iteration on `A^T A` and on its
/// inverse. A singular `A^T A` reports `sigma_min = 0`.
fn extreme_singular_values(a: &SparseMatrixCSR, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let n = a.ncols();
    let ata = |x: &[f64]| a.spmv_t(&a.spmv(x).expect("dims")).expect("dims");
    let lam_max = power_iteration(ata, random_unit_vector(rng, n));
    let gram = normal_matrix(a);
    let lam_min = match factorize(&gram) {
        Ok(f) => {
            let inv = power_iteration(|x| f.apply_inverse(x).expect("dims"), random_unit_vector(rng, n));
            if inv > 0.0 {
                1.0 / inv
            } else {
                0.0
            }
        }
        Err(_) => 0.0,
    };
    (lam_min.max(0.0).sqrt(), lam_max.max(0.0).sqrt())
}

fn power_iteration(op: impl Fn(&[f64]) -> Vec<f64>, mut x: Vec<f64>) -> f64 {
    let mut lam = 0.0;
    for _ in 0..POWER_ITERS {
        let y = op(&x);
        let ny = norm2(&y);
        if ny == 0.0 {
            return 0.0;
        }
        let next = dot(&x, &y);
        x = y.into_iter().map(|v| v / ny).collect();
        if (next - lam).abs() <= 1e-12 * next.abs() {
            return next;
        }
        lam = next;
    }
    lam
}

/// Sparse `A^T A`.
fn normal_matrix(a: &SparseMatrixCSR) -> SparseMatrixCSR {
    let mut trips = Vec::new();
    for i in 0..a.nrows() {
        let row: Vec<(usize, f64)> = a.row(i).collect();
        for &(j, x) in &row {
            for &(k, y) in &row {
                trips.push((j, k, x * y));
            }
        }
    }
    SparseMatrixCSR::from_triplets(a.ncols(), a.ncols(), &trips).expect("indices in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_oseen_fd, gen_synthetic, ProblemSpec};

    #[test]
    fn identity_m_positive() {
        let m = SparseMatrixCSR::identity(5);
        let a = SparseMatrixCSR::from_dense(&[
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
        ]);
        let sys = SaddleSystem::new(m, a, vec![1.0, 0.0]).unwrap();
        let rep = validate_system(&sys, 50);
        assert!((rep.min_quadratic_form - 1.0).abs() < 1e-12);
        assert!(rep.passed());
        assert!((rep.sigma_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_column_fails_rank() {
        let m = SparseMatrixCSR::identity(4);
        let a = SparseMatrixCSR::from_dense(&[
            vec![1.0, 1.0, 0.0],
            vec![2.0, 2.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 3.0],
        ]);
        let sys = SaddleSystem::new(m, a, vec![1.0; 3]).unwrap();
        let rep = validate_system(&sys, 10);
        assert!(rep.m_positive_definite);
        assert!(!rep.a_full_column_rank);
        assert!(!rep.passed());
    }

    #[test]
    fn indefinite_m_detected() {
        let m = SparseMatrixCSR::from_diagonal(&[1.0, -1.0, 1.0]);
        let a = SparseMatrixCSR::from_dense(&[vec![1.0], vec![0.0], vec![0.0]]);
        let sys = SaddleSystem::new(m, a, vec![1.0]).unwrap();
        assert!(!validate_system(&sys, 200).m_positive_definite);
    }

    #[test]
    fn generated_systems_pass() {
        let sys = gen_synthetic(&ProblemSpec::synthetic(120, 40, 2, 1.5)).unwrap();
        assert!(validate_system(&sys, 100).passed());
        let sys = gen_oseen_fd(&ProblemSpec::oseen(8, 0.01, [1.0, 0.5], 1)).unwrap();
        let rep = validate_system(&sys, 100);
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn power_iteration_agrees_with_svd() {
        let sys = gen_synthetic(&ProblemSpec::synthetic(150, 45, 4, 1.0)).unwrap();
        let dense = validate_system(&sys, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (smin, smax) = extreme_singular_values(&sys.a, &mut rng);
        assert!((smax - dense.sigma_max).abs() <= 1e-6 * dense.sigma_max);
        assert!((smin - dense.sigma_min).abs() <= 1e-6 * dense.sigma_max);
    }

    #[test]
    fn large_dual_uses_power_iteration() {
        let sys = gen_synthetic(&ProblemSpec::synthetic(500, 210, 8, 1.0)).unwrap();
        let rep = validate_system(&sys, 20);
        assert_eq!(rep.method, SingularValueMethod::PowerIteration);
        assert!(rep.passed(), "{rep:?}");
    }
}
