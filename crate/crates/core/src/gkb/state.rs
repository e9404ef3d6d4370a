//! The nonsymmetric generalized Golub-Kahan decomposition
//!
//! ```text
//! A Q_k   = M V_k B_k,                       V_k^T M V_k = L_k
//! A^T V_k = Q_k H_k + beta_{k+1} q_{k+1} e_k^T,  Q_k^T Q_k = I_k
//! ```
//!
//! built one column at a time. The right basis `Q_k` is kept in full and
//! orthogonalized with modified Gram-Schmidt; only the latest left vector
//! `v_k` is kept unless the left basis is retained for validation. `L_k` is
//! never formed from `V`: its rows come from `B_k^T L_k^T = H_k` by forward
//! substitution on each new Hessenberg column.
//!
//! A state is always "expanded": after construction and after every
//! [`NsGkbState::step`], column `k` of `H_k`, row `k` of `L_k` and the pending
//! `beta_{k+1}` are available, so stopping tests can run before the next
//! right vector is normalized.

use super::chi::GuardedScalar;
use crate::error::{check_len, Error, Result};
use crate::linalg::vector::{axpy, dot, norm2, scale};
use crate::linalg::{
    solve_bidiag, solve_unit_lower_transpose, BidiagonalUpper, HessenbergColumns,
    SparseFactorization, SparseMatrixCSR, UnitLowerTriangular,
};

/// `beta_{k+1} <= BREAKDOWN_TOL * beta_1` is treated as lucky breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-13;

/// Single-sweep mode repeats the sweep when it removed more than
/// `1 - REORTH_ETA` of the vector's norm (Daniel-Gragg-Kaufman-Stewart test).
pub const REORTH_ETA: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Read-only inputs shared by every iteration: `M`, `A` and the
/// factorization of `M`.
#[derive(Debug, Clone, Copy)]
pub struct SaddleOperators<'a> {
    pub m: &'a SparseMatrixCSR,
    pub a: &'a SparseMatrixCSR,
    pub fact: &'a SparseFactorization,
}

impl<'a> SaddleOperators<'a> {
    pub fn new(
        m: &'a SparseMatrixCSR,
        a: &'a SparseMatrixCSR,
        fact: &'a SparseFactorization,
    ) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                nrows: m.nrows(),
                ncols: m.ncols(),
            });
        }
        check_len("rows of A", m.nrows(), a.nrows())?;
        check_len("factorization of M", m.nrows(), fact.dim())?;
        Ok(Self { m, a, fact })
    }

    /// Size `m` of the primal block.
    pub fn primal_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Size `n` of the dual block.
    pub fn dual_dim(&self) -> usize {
        self.a.ncols()
    }

    /// `u = -M^{-1} A p`
    pub fn primal_from_dual(&self, p: &[f64]) -> Result<Vec<f64>> {
        let ap = self.a.spmv(p)?;
        let mut u = self.fact.apply_inverse(&ap)?;
        scale(-1.0, &mut u);
        Ok(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orthogonalization {
    /// One modified Gram-Schmidt sweep, repeated only when it cancels
    /// most of the vector.
    #[default]
    Mgs,
    /// Two sweeps (reorthogonalization).
    MgsTwice,
}

/// Why the decomposition cannot be extended further.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exhaustion {
    /// `beta_{k+1}` fell below the breakdown tolerance.
    Lucky,
    /// `k = n`: the right basis spans the whole dual space.
    FullBasis,
}

/// Energy-norm error estimate with delay `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    /// `|xi^2_{k-d}| = |sum_{i=k-d+1}^{k} chi_i zeta_i|`
    pub squared: f64,
    /// `|sum_{i=1}^{k} chi_i zeta_i|`, the squared M-norm of the current iterate.
    pub total: f64,
    /// `squared / total`
    pub relative: f64,
    /// Set when the signed tail sum (or the total) came out negative.
    pub negative: bool,
}

#[derive(Debug, Clone)]
pub struct NsGkbState {
    k: usize,
    beta1: f64,
    q: Vec<Vec<f64>>,
    v_latest: Vec<f64>,
    bidiag: BidiagonalUpper,
    hess: HessenbergColumns,
    l: UnitLowerTriangular,
    chi: Vec<GuardedScalar>,
    /// Orthogonalized but not yet normalized `g` for `q_{k+1}`.
    g_next: Vec<f64>,
    beta_next: f64,
    exhausted: Option<Exhaustion>,
    orthogonalization: Orthogonalization,
    retained_v: Option<Vec<Vec<f64>>>,
    unit_diag_defect: f64,
    negative_estimate_seen: bool,
    reorthogonalizations: usize,
}

/// Starts the decomposition from `b` and expands the first column.
pub fn gkb_init(
    ops: &SaddleOperators<'_>,
    b: &[f64],
    orthogonalization: Orthogonalization,
    retain_left_basis: bool,
) -> Result<NsGkbState> {
    NsGkbState::new(ops, b, orthogonalization, retain_left_basis)
}

/// Advances the decomposition from step `k` to `k + 1`.
pub fn gkb_step(state: &mut NsGkbState, ops: &SaddleOperators<'_>) -> Result<()> {
    state.step(ops)
}

/// `beta_{k+1} |chi_k|`, equal to `||b - A^T u_k||_2` in exact arithmetic.
pub fn residual_norm(state: &NsGkbState) -> f64 {
    state.residual_norm()
}

/// Delayed energy-norm error estimate; `None` while `k < d`.
pub fn error_estimate(state: &mut NsGkbState, d: usize) -> Result<Option<ErrorEstimate>> {
    state.error_estimate(d)
}

/// Explicit `(u_k, p_k)` for the current step.
pub fn recover_solution(
    state: &NsGkbState,
    ops: &SaddleOperators<'_>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    state.recover_solution(ops)
}

impl NsGkbState {
    pub fn new(
        ops: &SaddleOperators<'_>,
        b: &[f64],
        orthogonalization: Orthogonalization,
        retain_left_basis: bool,
    ) -> Result<Self> {
        check_len("right-hand side b", ops.dual_dim(), b.len())?;
        let beta1 = norm2(b);
        if beta1 == 0.0 {
            return Err(Error::ZeroRhs);
        }
        let q1: Vec<f64> = b.iter().map(|x| x / beta1).collect();
        let w = ops.fact.apply_inverse(&ops.a.spmv(&q1)?)?;
        let alpha1 = m_norm_or_breakdown(ops.m, &w, 1)?;
        let v1: Vec<f64> = w.iter().map(|x| x / alpha1).collect();

        let mut bidiag = BidiagonalUpper::default();
        bidiag.push(0.0, alpha1);
        let mut state = Self {
            k: 1,
            beta1,
            q: vec![q1],
            retained_v: retain_left_basis.then(|| vec![v1.clone()]),
            v_latest: v1,
            bidiag,
            hess: HessenbergColumns::new(),
            l: UnitLowerTriangular::default(),
            chi: vec![GuardedScalar::new(beta1 / alpha1)],
            g_next: Vec::new(),
            beta_next: 0.0,
            exhausted: None,
            orthogonalization,
            unit_diag_defect: 0.0,
            negative_estimate_seen: false,
            reorthogonalizations: 0,
        };
        state.expand(ops)?;
        Ok(state)
    }

    /// Computes column `k` of `H`, row `k` of `L` and `beta_{k+1}`.
    fn expand(&mut self, ops: &SaddleOperators<'_>) -> Result<()> {
        let k = self.k;
        let mut g = ops.a.spmv_t(&self.v_latest)?;
        let mut h = vec![0.0; k];
        let mut before = norm2(&g);
        for sweep in 0..2 {
            for (hi, qi) in h.iter_mut().zip(&self.q) {
                let c = dot(qi, &g);
                axpy(-c, qi, &mut g);
                *hi += c;
            }
            let after = norm2(&g);
            let again = match self.orthogonalization {
                Orthogonalization::Mgs => after < REORTH_ETA * before,
                Orthogonalization::MgsTwice => true,
            };
            if sweep == 1 || !again {
                break;
            }
            self.reorthogonalizations += 1;
            before = after;
        }
        let beta_next = norm2(&g);

        // B_k^T (row k of L)^T = column k of H
        let alphas = self.bidiag.alphas();
        let betas = self.bidiag.betas();
        let mut u = Vec::with_capacity(k);
        for i in 0..k {
            let carry = if i == 0 { 0.0 } else { betas[i - 1] * u[i - 1] };
            u.push((h[i] - carry) / alphas[i]);
        }
        let diag = u.pop().expect("k >= 1");
        self.unit_diag_defect = self.unit_diag_defect.max((diag - 1.0).abs());
        self.l.push_row(&u)?;
        self.hess.push_column(h, beta_next)?;

        self.exhausted = if beta_next <= BREAKDOWN_TOL * self.beta1 {
            Some(Exhaustion::Lucky)
        } else if k >= ops.dual_dim() {
            Some(Exhaustion::FullBasis)
        } else {
            None
        };
        self.g_next = g;
        self.beta_next = beta_next;
        Ok(())
    }

    /// Normalizes `q_{k+1}`, computes `v_{k+1}`, `alpha_{k+1}` and
    /// `chi_{k+1}`, then expands the next column.
    pub fn step(&mut self, ops: &SaddleOperators<'_>) -> Result<()> {
        if let Some(why) = self.exhausted {
            return Err(Error::Breakdown {
                step: self.k,
                reason: format!("decomposition already complete ({why:?})"),
            });
        }
        let beta = self.beta_next;
        let q_next: Vec<f64> = self.g_next.iter().map(|x| x / beta).collect();
        // M^{-1}(A q - beta M v) = M^{-1} A q - beta v
        let mut w = ops.fact.apply_inverse(&ops.a.spmv(&q_next)?)?;
        axpy(-beta, &self.v_latest, &mut w);
        let alpha = m_norm_or_breakdown(ops.m, &w, self.k + 1)?;
        scale(1.0 / alpha, &mut w);

        let chi_next = self.chi[self.k - 1].scaled(-beta / alpha);
        self.chi.push(chi_next);
        self.bidiag.push(beta, alpha);
        self.q.push(q_next);
        if let Some(v) = self.retained_v.as_mut() {
            v.push(w.clone());
        }
        self.v_latest = w;
        self.k += 1;
        self.expand(ops)
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    /// Pending `beta_{k+1}`.
    pub fn beta_next(&self) -> f64 {
        self.beta_next
    }

    pub fn exhausted(&self) -> Option<Exhaustion> {
        self.exhausted
    }

    pub fn right_basis(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn v_latest(&self) -> &[f64] {
        &self.v_latest
    }

    /// `V_k`, only when constructed with `retain_left_basis`.
    pub fn left_basis(&self) -> Option<&[Vec<f64>]> {
        self.retained_v.as_deref()
    }

    pub fn bidiagonal(&self) -> &BidiagonalUpper {
        &self.bidiag
    }

    pub fn hessenberg(&self) -> &HessenbergColumns {
        &self.hess
    }

    pub fn unit_lower(&self) -> &UnitLowerTriangular {
        &self.l
    }

    pub fn chi(&self) -> &[GuardedScalar] {
        &self.chi
    }

    pub fn chi_values(&self) -> Vec<f64> {
        self.chi.iter().map(|c| c.value()).collect()
    }

    /// Largest deviation of the recomputed diagonal of `L_k` from one.
    pub fn unit_diag_defect(&self) -> f64 {
        self.unit_diag_defect
    }

    pub fn negative_estimate_seen(&self) -> bool {
        self.negative_estimate_seen
    }

    /// Second sweeps performed so far.
    pub fn reorthogonalizations(&self) -> usize {
        self.reorthogonalizations
    }

    /// `beta_{k+1} |chi_k|`.
    pub fn residual_norm(&self) -> f64 {
        self.chi[self.k - 1].abs_times(self.beta_next)
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual_norm() / self.beta1
    }

    /// `z_k = L_k^{-T} chi`
    pub fn z(&self) -> Result<Vec<f64>> {
        solve_unit_lower_transpose(&self.l, &self.chi_values(), self.k)
    }

    pub fn error_estimate(&mut self, d: usize) -> Result<Option<ErrorEstimate>> {
        let est = self.peek_error_estimate(d)?;
        if est.is_some_and(|e| e.negative) {
            self.negative_estimate_seen = true;
        }
        Ok(est)
    }

    /// Same as [`Self::error_estimate`] without recording the sign flag.
    pub fn peek_error_estimate(&self, d: usize) -> Result<Option<ErrorEstimate>> {
        if d == 0 || self.k < d {
            return Ok(None);
        }
        let chi = self.chi_values();
        let z = self.z()?;
        let products: Vec<f64> = chi.iter().zip(&z).map(|(c, z)| c * z).collect();
        let tail: f64 = products[self.k - d..].iter().sum();
        let total: f64 = products.iter().sum();
        let negative = tail < 0.0 || total < 0.0;
        let (squared, total) = (tail.abs(), total.abs());
        Ok(Some(ErrorEstimate {
            squared,
            total,
            relative: if total > 0.0 { squared / total } else { 0.0 },
            negative,
        }))
    }

    /// `y_k = -B_k^{-1} L_k^{-T} chi`; the dual iterate is `p_k = Q_k y_k`.
    pub fn dual_coefficients(&self) -> Result<Vec<f64>> {
        let z = self.z()?;
        let mut y = solve_bidiag(&self.bidiag, &z)?;
        scale(-1.0, &mut y);
        Ok(y)
    }

    pub fn dual_iterate(&self) -> Result<Vec<f64>> {
        let y = self.dual_coefficients()?;
        Ok(combine(&self.q, &y))
    }

    /// `(u_k, p_k)` with `p_k = Q_k y_k` and `u_k = -M^{-1} A p_k`.
    pub fn recover_solution(&self, ops: &SaddleOperators<'_>) -> Result<(Vec<f64>, Vec<f64>)> {
        let p = self.dual_iterate()?;
        let u = ops.primal_from_dual(&p)?;
        Ok((u, p))
    }

    /// Dual iterate through the Schur Hessenberg route,
    /// `p_k = -Q_k (H_k B_k)^{-1} beta_1 e_1`, solved densely. Validation only.
    pub fn dual_iterate_hessenberg(&self) -> Result<Vec<f64>> {
        let hs = crate::linalg::dense::matmul(&self.hess.to_dense(), &self.bidiag.to_dense());
        let mut rhs = vec![0.0; self.k];
        rhs[0] = self.beta1;
        let y = crate::linalg::dense::solve(&hs, &rhs).ok_or(Error::Breakdown {
            step: self.k,
            reason: "singular Schur Hessenberg matrix".into(),
        })?;
        let mut p = combine(&self.q, &y);
        scale(-1.0, &mut p);
        Ok(p)
    }

    /// Primal iterate `u_k = V_k z_k` from the retained left basis.
    pub fn primal_iterate_from_left_basis(&self) -> Option<Result<Vec<f64>>> {
        let v = self.retained_v.as_ref()?;
        Some(self.z().map(|z| combine(v, &z)))
    }
}

/// Energy norm of the primal error at step `k`, read off a decomposition run
/// to completion: `sqrt(chi_tail^T L_tail^{-T} chi_tail)` over indices
/// `k+1..=K`. The trailing entries of `L_K^{-T} chi` are exactly
/// `L_tail^{-T} chi_tail`, so one back substitution suffices.
pub fn exact_error_energy_norm(full_state: &NsGkbState, k: usize) -> Result<f64> {
    let total = full_state.k();
    if k > total {
        return Err(Error::StepsExceedDim {
            steps: k,
            dim: total,
        });
    }
    let steps = total - k;
    let chi = full_state.chi_values();
    let tail = solve_unit_lower_transpose(full_state.unit_lower(), &chi, steps)?;
    let sq: f64 = chi[k..].iter().zip(&tail).map(|(c, z)| c * z).sum();
    if sq < 0.0 {
        return Err(Error::NegativeQuadraticForm { value: sq });
    }
    Ok(sq.sqrt())
}

fn combine(basis: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let len = basis.first().map_or(0, Vec::len);
    let mut out = vec![0.0; len];
    for (vec, &c) in basis.iter().zip(coeffs) {
        axpy(c, vec, &mut out);
    }
    out
}

fn m_norm_or_breakdown(m: &SparseMatrixCSR, w: &[f64], step: usize) -> Result<f64> {
    let mw = m.spmv(w)?;
    let q = dot(w, &mw);
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Breakdown {
            step,
            reason: format!("w^T M w = {q:e}; M is not positive definite on w or A q = 0"),
        });
    }
    Ok(q.sqrt())
}
