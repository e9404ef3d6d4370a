//! Saddle-point test systems: generators, file I/O and structural checks.

pub mod general_form;
pub mod mtx;
pub mod oseen;
pub mod synthetic;
pub mod validate;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::SparseMatrixCSR;

pub use general_form::{reduce_general_form, reduce_general_form_with, ReducedRhs};
pub use mtx::{
    load_matrix_market, load_system, load_vector, parse_matrix_market, save_matrix_market,
    save_system, save_vector, MatrixMarketError,
};
pub use oseen::{gen_oseen_fd, oseen_dims};
pub use synthetic::gen_synthetic;
pub use validate::{validate_system, SingularValueMethod, ValidationReport};

/// `[[M, A], [A^T, 0]] [u; p] = [b1; b]` with `M` of size `m x m` and `A` of
/// size `m x n`. `b1` is absent for systems already in reduced form.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSystem {
    pub m: SparseMatrixCSR,
    pub a: SparseMatrixCSR,
    pub b: Vec<f64>,
    pub b1: Option<Vec<f64>>,
}

impl SaddleSystem {
    pub fn new(m: SparseMatrixCSR, a: SparseMatrixCSR, b: Vec<f64>) -> Result<Self> {
        let sys = Self { m, a, b, b1: None };
        sys.check()?;
        Ok(sys)
    }

    pub fn check(&self) -> Result<()> {
        if self.m.nrows() != self.m.ncols() {
            return Err(Error::NotSquare {
                nrows: self.m.nrows(),
                ncols: self.m.ncols(),
            });
        }
        check_len("rows of A", self.m.nrows(), self.a.nrows())?;
        check_len("b", self.a.ncols(), self.b.len())?;
        if let Some(b1) = &self.b1 {
            check_len("b1", self.m.nrows(), b1.len())?;
        }
        let (m, n) = (self.primal_dim(), self.dual_dim());
        if n == 0 || m < n {
            return Err(Error::InvalidProblem(format!(
                "need m >= n >= 1, got m = {m}, n = {n}"
            )));
        }
        Ok(())
    }

    pub fn primal_dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn dual_dim(&self) -> usize {
        self.a.ncols()
    }

    /// Block residual norms `(||M u + A p - b1||, ||A^T u - b||)`; `b1`
    /// defaults to zero.
    pub fn block_residuals(&self, u: &[f64], p: &[f64]) -> Result<(f64, f64)> {
        let mut r1 = self.m.spmv(u)?;
        let ap = self.a.spmv(p)?;
        for (i, r) in r1.iter_mut().enumerate() {
            *r += ap[i] - self.b1.as_ref().map_or(0.0, |b1| b1[i]);
        }
        let atu = self.a.spmv_t(u)?;
        let r2: f64 = atu
            .iter()
            .zip(&self.b)
            .map(|(x, y)| (y - x).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok((crate::linalg::norm2(&r1), r2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    #[default]
    Synthetic,
    OseenFd,
    File,
}

/// Everything needed to rebuild a test system deterministically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Primal size (synthetic only).
    pub m: usize,
    /// Dual size (synthetic only).
    pub n: usize,
    /// Coarse pressure intervals per side (Oseen only).
    pub grid: usize,
    pub seed: u64,
    pub nu: f64,
    pub wind: [f64; 2],
    pub skew_scale: f64,
    /// System directory (file only).
    pub path: Option<PathBuf>,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            kind: ProblemKind::Synthetic,
            m: 60,
            n: 20,
            grid: 12,
            seed: 1,
            nu: 0.01,
            wind: [1.0, 0.5],
            skew_scale: 1.0,
            path: None,
        }
    }
}

impl ProblemSpec {
    pub fn synthetic(m: usize, n: usize, seed: u64, skew_scale: f64) -> Self {
        Self {
            kind: ProblemKind::Synthetic,
            m,
            n,
            seed,
            skew_scale,
            ..Self::default()
        }
    }

    pub fn oseen(grid: usize, nu: f64, wind: [f64; 2], seed: u64) -> Self {
        Self {
            kind: ProblemKind::OseenFd,
            grid,
            nu,
            wind,
            seed,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        match self.kind {
            ProblemKind::Synthetic => {
                if self.n == 0 || self.n >= self.m {
                    return Err(Error::InvalidProblem(format!(
                        "synthetic systems need 1 <= n < m, got m = {}, n = {}",
                        self.m, self.n
                    )));
                }
                if !self.skew_scale.is_finite() {
                    return Err(Error::InvalidProblem("skew_scale must be finite".into()));
                }
            }
            ProblemKind::OseenFd => {
                if self.grid < 3 {
                    return Err(Error::InvalidProblem(format!(
                        "grid must be >= 3, got {}",
                        self.grid
                    )));
                }
                if !(self.nu > 0.0) || !self.nu.is_finite() {
                    return Err(Error::InvalidProblem(format!("nu must be > 0, got {}", self.nu)));
                }
                if !self.wind.iter().all(|w| w.is_finite()) {
                    return Err(Error::InvalidProblem("wind must be finite".into()));
                }
            }
            ProblemKind::File => {
                if self.path.is_none() {
                    return Err(Error::InvalidProblem("file problems need a path".into()));
                }
            }
        }
        Ok(())
    }
}

/// Builds (or loads) the system a spec describes.
pub fn build_problem(spec: &ProblemSpec) -> Result<SaddleSystem> {
    match spec.kind {
        ProblemKind::Synthetic => gen_synthetic(spec),
        ProblemKind::OseenFd => gen_oseen_fd(spec),
        ProblemKind::File => {
            spec.check()?;
            load_system(spec.path.as_ref().expect("checked")).map(|(sys, _)| sys)
        }
    }
}

pub(crate) fn random_unit_vector(rng: &mut impl rand::Rng, len: usize) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: Vec<f64> = (0..len).map(|_| StandardNormal.sample(rng)).collect();
        let nrm = crate::linalg::norm2(&v);
        if nrm > 0.0 {
            return v.into_iter().map(|x| x / nrm).collect();
        }
    }
}
