//! Side-by-side runs on one system: nsCRAIG, FOM on the Schur complement,
//! full GMRES and GMRES restarted at the memory-matched length.

use serde::{Deserialize, Serialize};

use crate::baselines::{
    compute_restart_kmax, fom_solve, gmres_solve, memory_estimate, BlockPreconditionedSystem,
    FomReport, GmresReport, SchurOperator, SolverKind,
};
use crate::error::Result;
use crate::gkb::{nscraig_solve_with, SaddleOperators, SolveReport, SolverConfig, Termination};
use crate::linalg::factorize;
use crate::problems::SaddleSystem;

/// Outcome of one baseline; failures are kept as their message.
pub type Outcome<T> = std::result::Result<T, String>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Comparison {
    pub m: usize,
    pub n: usize,
    pub nscraig: SolveReport,
    pub fom: Outcome<FomReport>,
    pub gmres: Outcome<GmresReport>,
    /// Restart length from the nsCRAIG iteration count, or why none exists.
    pub restart_kmax: Outcome<usize>,
    pub gmres_restarted: Outcome<GmresReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub solver: String,
    pub iterations: Option<usize>,
    pub termination: Option<Termination>,
    pub memory_estimate: Option<usize>,
    /// `memory_estimate / memory_estimate(nscraig)`
    pub memory_ratio: Option<f64>,
    pub error: Option<String>,
}

impl Comparison {
    pub fn rows(&self) -> Vec<ComparisonRow> {
        let base = self.nscraig.memory_estimate as f64;
        let row = |solver: &str, r: Outcome<(usize, Termination, usize)>| match r {
            Ok((it, t, mem)) => ComparisonRow {
                solver: solver.into(),
                iterations: Some(it),
                termination: Some(t),
                memory_estimate: Some(mem),
                memory_ratio: Some(mem as f64 / base),
                error: None,
            },
            Err(e) => ComparisonRow {
                solver: solver.into(),
                iterations: None,
                termination: None,
                memory_estimate: None,
                memory_ratio: None,
                error: Some(e),
            },
        };
        let gm = |g: &Outcome<GmresReport>| {
            g.as_ref()
                .map(|g| (g.iterations, g.termination, g.memory_estimate))
                .map_err(Clone::clone)
        };
        vec![
            row(
                "nscraig",
                Ok((
                    self.nscraig.iterations,
                    self.nscraig.termination,
                    self.nscraig.memory_estimate,
                )),
            ),
            row(
                "fom",
                self.fom
                    .as_ref()
                    .map(|f| (f.iterations, f.termination, self.fom_memory(f)))
                    .map_err(Clone::clone),
            ),
            row("gmres", gm(&self.gmres)),
            row("gmres_restarted", gm(&self.gmres_restarted)),
        ]
    }

    /// FOM on `S` keeps the same data as nsCRAIG: `n (k + 1)` basis scalars
    /// plus one primal work vector.
    fn fom_memory(&self, f: &FomReport) -> usize {
        memory_estimate(SolverKind::Gkb, f.iterations, self.m, self.n)
    }
}

/// Runs the four solvers with the tolerance and iteration cap of `cfg`. Only
/// an nsCRAIG failure (or a failed factorization of `M`) is an error.
pub fn compare(sys: &SaddleSystem, cfg: &SolverConfig) -> Result<Comparison> {
    sys.check()?;
    cfg.check()?;
    let fact = factorize(&sys.m)?;
    let ops = SaddleOperators::new(&sys.m, &sys.a, &fact)?;
    let (m, n) = (sys.primal_dim(), sys.dual_dim());

    let neg_b: Vec<f64> = sys.b.iter().map(|x| -x).collect();
    let (nscraig, fom, gmres) = std::thread::scope(|s| {
        let fom = s.spawn(|| {
            SchurOperator::new(&sys.a, &fact)
                .and_then(|op| fom_solve(op, &neg_b, cfg.tol, cfg.maxit))
                .map_err(|e| e.to_string())
        });
        let gmres = s.spawn(|| {
            BlockPreconditionedSystem::new(&sys.m, &sys.a, &fact, &sys.b)
                .and_then(|g| gmres_solve(&g, cfg.tol, cfg.maxit, None))
                .map_err(|e| e.to_string())
        });
        let nscraig = nscraig_solve_with(&ops, &sys.b, cfg);
        (
            nscraig,
            fom.join().expect("fom thread"),
            gmres.join().expect("gmres thread"),
        )
    });
    let nscraig = nscraig?;

    let restart_kmax = compute_restart_kmax(nscraig.iterations, m, n).map_err(|e| e.to_string());
    let gmres_restarted = match &restart_kmax {
        Ok(k) => BlockPreconditionedSystem::new(&sys.m, &sys.a, &fact, &sys.b)
            .and_then(|g| gmres_solve(&g, cfg.tol, cfg.maxit, Some(*k)))
            .map_err(|e| e.to_string()),
        Err(e) => Err(format!("not run: {e}")),
    };

    Ok(Comparison {
        m,
        n,
        nscraig,
        fom,
        gmres,
        restart_kmax,
        gmres_restarted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_synthetic, ProblemSpec};

    #[test]
    fn fom_and_nscraig_agree_on_iterations() {
        let sys = gen_synthetic(&ProblemSpec::synthetic(200, 20, 3, 1.0)).unwrap();
        let cmp = compare(&sys, &SolverConfig::default()).unwrap();
        let fom = cmp.fom.as_ref().unwrap();
        assert_eq!(fom.iterations, cmp.nscraig.iterations);
        let rows = cmp.rows();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].memory_ratio, Some(1.0));
    }

    #[test]
    fn restarted_not_faster_than_full() {
        let sys = gen_synthetic(&ProblemSpec::synthetic(200, 20, 5, 2.0)).unwrap();
        let cmp = compare(&sys, &SolverConfig::default()).unwrap();
        let full = cmp.gmres.as_ref().unwrap();
        if let Ok(restarted) = &cmp.gmres_restarted {
            assert!(restarted.iterations >= full.iterations);
        }
    }

    #[test]
    fn memory_ratio_is_model_quotient() {
        let sys = gen_synthetic(&ProblemSpec::synthetic(200, 20, 8, 1.0)).unwrap();
        let cmp = compare(&sys, &SolverConfig::default()).unwrap();
        let g = cmp.gmres.as_ref().unwrap();
        let rows = cmp.rows();
        let expect = g.memory_estimate as f64 / cmp.nscraig.memory_estimate as f64;
        assert_eq!(rows[2].memory_ratio, Some(expect));
    }
}
