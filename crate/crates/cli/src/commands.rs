use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use nscraig_core::baselines::{
    compute_restart_kmax, fom_solve, gmres_solve, memory_estimate, BlockPreconditionedSystem,
    SchurOperator, SolverKind,
};
use nscraig_core::linalg::norm2;
use nscraig_core::problems::{reduce_general_form_with, save_system, validate_system};
use nscraig_core::{
    build_problem, compare, factorize, nscraig_solve_with, ProblemKind, ProblemSpec,
    SaddleOperators, SaddleSystem, SolverConfig, SparseFactorization, Termination,
};

use crate::args::{CompareArgs, GenerateArgs, Restart, RunArgs, SolverArg};
use crate::output::{combined_csv, num, write_json, write_text, History};

/// A loaded system in the reduced form `[0; b]` the solvers accept. For a
/// general right-hand side `[b1; b2]` the primal solution is shifted back by
/// `w0 = M^-1 b1`.
struct Prepared {
    spec: ProblemSpec,
    digest: String,
    original: SaddleSystem,
    reduced: SaddleSystem,
    w0: Option<Vec<f64>>,
    trivial: bool,
    fact: SparseFactorization,
}

fn prepare(spec: ProblemSpec) -> Result<Prepared> {
    spec.check()?;
    let original = build_problem(&spec)?;
    let digest = digest(&spec)?;
    let fact = factorize(&original.m).context("factorizing M")?;
    let (reduced, w0, trivial) = match &original.b1 {
        None => (original.clone(), None, false),
        Some(b1) => {
            let r = reduce_general_form_with(&fact, &original.a, b1, &original.b)?;
            let sys = SaddleSystem::new(original.m.clone(), original.a.clone(), r.b)?;
            (sys, Some(r.w0), r.trivial)
        }
    };
    Ok(Prepared {
        spec,
        digest,
        original,
        reduced,
        w0,
        trivial,
        fact,
    })
}

/// SHA-256 over the spec, and for file problems over the system files too.
fn digest(spec: &ProblemSpec) -> Result<String> {
    let mut h = Sha256::new();
    let mut canonical = spec.clone();
    if spec.kind == ProblemKind::File {
        canonical.path = None;
    }
    h.update(serde_json::to_vec(&canonical)?);
    if let (ProblemKind::File, Some(dir)) = (spec.kind, &spec.path) {
        for name in ["M.mtx", "A.mtx", "b.mtx", "b1.mtx"] {
            let path = dir.join(name);
            if path.exists() {
                h.update(name.as_bytes());
                h.update(fs::read(&path).with_context(|| format!("reading {}", path.display()))?);
            }
        }
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct FinalResiduals {
    /// `||M u + A p - b1||`
    pub primal: f64,
    /// `||b - A^T u||`
    pub dual: f64,
    pub rhs_norm: f64,
    /// `dual / rhs_norm`
    pub dual_relative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub solver: SolverConfig,
    /// GMRES restart length, absent when unrestarted.
    pub restart: Option<usize>,
    /// nsCRAIG iteration count the automatic restart length came from.
    pub paired_nscraig_iterations: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub solver: String,
    pub problem_digest: String,
    pub problem: ProblemSpec,
    pub m: usize,
    pub n: usize,
    pub config: RunConfig,
    pub termination: Termination,
    pub iterations: usize,
    pub memory_estimate: usize,
    pub final_residuals: FinalResiduals,
    pub wall_time_s: f64,
    /// Native report of the solver that ran.
    pub report: serde_json::Value,
}

struct SolverRun {
    u: Vec<f64>,
    p: Vec<f64>,
    iterations: usize,
    termination: Termination,
    memory_estimate: usize,
    history: History,
    report: serde_json::Value,
}

fn run_solver(
    prep: &Prepared,
    solver: SolverArg,
    cfg: &SolverConfig,
    restart: Option<usize>,
) -> Result<SolverRun> {
    let sys = &prep.reduced;
    let (m, n) = (sys.primal_dim(), sys.dual_dim());
    match solver {
        SolverArg::Nscraig => {
            let ops = SaddleOperators::new(&sys.m, &sys.a, &prep.fact)?;
            let rep = nscraig_solve_with(&ops, &sys.b, cfg)?;
            let first_estimate = rep.iterations + 1 - rep.error_estimate_history.len();
            Ok(SolverRun {
                history: History {
                    rel_residual: rep.residual_history.clone(),
                    rel_residual_explicit: rep.explicit_residual_history.clone(),
                    error_estimate: Some((first_estimate, rep.error_estimate_history.clone())),
                },
                u: rep.u.clone(),
                p: rep.p.clone(),
                iterations: rep.iterations,
                termination: rep.termination,
                memory_estimate: rep.memory_estimate,
                report: serde_json::to_value(&rep)?,
            })
        }
        SolverArg::Fom => {
            let neg_b: Vec<f64> = sys.b.iter().map(|x| -x).collect();
            let op = SchurOperator::new(&sys.a, &prep.fact)?;
            let rep = fom_solve(op, &neg_b, cfg.tol, cfg.maxit)?;
            let ap = sys.a.spmv(&rep.p)?;
            let u: Vec<f64> = prep.fact.apply_inverse(&ap)?.into_iter().map(|x| -x).collect();
            Ok(SolverRun {
                history: History {
                    rel_residual: rep.history.clone(),
                    ..History::default()
                },
                u,
                p: rep.p.clone(),
                iterations: rep.iterations,
                termination: rep.termination,
                memory_estimate: memory_estimate(SolverKind::Gkb, rep.iterations, m, n),
                report: serde_json::to_value(&rep)?,
            })
        }
        SolverArg::Gmres => {
            let g = BlockPreconditionedSystem::new(&sys.m, &sys.a, &prep.fact, &sys.b)?;
            let rep = gmres_solve(&g, cfg.tol, cfg.maxit, restart)?;
            Ok(SolverRun {
                history: History {
                    rel_residual: rep.history.clone(),
                    ..History::default()
                },
                u: rep.u.clone(),
                p: rep.p.clone(),
                iterations: rep.iterations,
                termination: rep.termination,
                memory_estimate: rep.memory_estimate,
                report: serde_json::to_value(&rep)?,
            })
        }
    }
}

/// Solution of a system whose reduced right-hand side vanished.
fn trivial_run(prep: &Prepared) -> SolverRun {
    let (m, n) = (prep.reduced.primal_dim(), prep.reduced.dual_dim());
    SolverRun {
        u: vec![0.0; m],
        p: vec![0.0; n],
        iterations: 0,
        termination: Termination::Converged,
        memory_estimate: 0,
        history: History::default(),
        report: serde_json::json!({ "trivial": "reduced right-hand side is zero" }),
    }
}

fn final_residuals(prep: &Prepared, u: &[f64], p: &[f64]) -> Result<(Vec<f64>, FinalResiduals)> {
    let u_full: Vec<f64> = match &prep.w0 {
        Some(w0) => u.iter().zip(w0).map(|(a, b)| a + b).collect(),
        None => u.to_vec(),
    };
    let (primal, dual) = prep.original.block_residuals(&u_full, p)?;
    let rhs_norm = norm2(&prep.original.b);
    let dual_relative = if rhs_norm > 0.0 { dual / rhs_norm } else { dual };
    Ok((
        u_full,
        FinalResiduals {
            primal,
            dual,
            rhs_norm,
            dual_relative,
        },
    ))
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn cmd_run(args: &RunArgs) -> Result<Termination> {
    let prep = prepare(args.problem.spec())?;
    let cfg = args.solver_args.config();
    cfg.check()?;
    let (m, n) = (prep.reduced.primal_dim(), prep.reduced.dual_dim());

    let start = Instant::now();
    let mut paired = None;
    let restart = match args.restart {
        Restart::None => None,
        Restart::Fixed(k) => Some(k),
        Restart::Auto if prep.trivial => None,
        Restart::Auto => {
            let ops = SaddleOperators::new(&prep.reduced.m, &prep.reduced.a, &prep.fact)?;
            let rep = nscraig_solve_with(&ops, &prep.reduced.b, &cfg)?;
            paired = Some(rep.iterations);
            Some(
                compute_restart_kmax(rep.iterations, m, n)
                    .context("memory-matched restart length")?,
            )
        }
    };
    let run = if prep.trivial {
        trivial_run(&prep)
    } else {
        run_solver(&prep, args.solver, &cfg, restart)?
    };
    let wall_time_s = start.elapsed().as_secs_f64();
    let (_, final_residuals) = final_residuals(&prep, &run.u, &run.p)?;

    let record = RunRecord {
        solver: args.solver.id().into(),
        problem_digest: prep.digest.clone(),
        problem: prep.spec.clone(),
        m,
        n,
        config: RunConfig {
            solver: cfg,
            restart,
            paired_nscraig_iterations: paired,
        },
        termination: run.termination,
        iterations: run.iterations,
        memory_estimate: run.memory_estimate,
        final_residuals,
        wall_time_s,
        report: run.report,
    };
    debug_assert_eq!(run.history.rows(), record.iterations);

    create_out(&args.out)?;
    write_text(&args.out, "history.csv", &run.history.to_csv())?;
    write_json(&args.out, "summary.json", &record)?;

    println!(
        "{} on {}x{}: {:?} after {} iterations, memory {} scalars, ||b - A^T u|| / ||b|| = {}",
        record.solver,
        m,
        n,
        record.termination,
        record.iterations,
        record.memory_estimate,
        num(record.final_residuals.dual_relative),
    );
    Ok(record.termination)
}

#[derive(Debug, Serialize)]
struct CompareRecord<'a> {
    problem_digest: &'a str,
    problem: &'a ProblemSpec,
    config: &'a SolverConfig,
    rows: Vec<nscraig_core::ComparisonRow>,
    wall_time_s: f64,
    comparison: &'a nscraig_core::Comparison,
}

pub fn cmd_compare(args: &CompareArgs) -> Result<Termination> {
    let prep = prepare(args.problem.spec())?;
    if prep.trivial {
        bail!("reduced right-hand side is zero; nothing to compare");
    }
    let cfg = args.solver_args.config();
    let start = Instant::now();
    let cmp = compare(&prep.reduced, &cfg)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let rows = cmp.rows();

    let mut table = String::from("solver,iterations,termination,memory_estimate,memory_ratio,error\n");
    for r in &rows {
        let term = r
            .termination
            .map(|t| serde_json::to_value(t).unwrap().as_str().unwrap_or("").to_string())
            .unwrap_or_default();
        table.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.solver,
            r.iterations.map(|v| v.to_string()).unwrap_or_default(),
            term,
            r.memory_estimate.map(|v| v.to_string()).unwrap_or_default(),
            r.memory_ratio.map(num).unwrap_or_default(),
            r.error.as_deref().unwrap_or("").replace(',', ";"),
        ));
    }

    let mut histories: Vec<(&str, &[f64])> = vec![("nscraig", &cmp.nscraig.residual_history)];
    if let Ok(f) = &cmp.fom {
        histories.push(("fom", &f.history));
    }
    if let Ok(g) = &cmp.gmres {
        histories.push(("gmres", &g.history));
    }
    if let Ok(g) = &cmp.gmres_restarted {
        histories.push(("gmres_restarted", &g.history));
    }

    create_out(&args.out)?;
    write_text(&args.out, "comparison.csv", &table)?;
    write_text(&args.out, "histories.csv", &combined_csv(histories))?;
    write_json(
        &args.out,
        "comparison.json",
        &CompareRecord {
            problem_digest: &prep.digest,
            problem: &prep.spec,
            config: &cfg,
            rows: rows.clone(),
            wall_time_s,
            comparison: &cmp,
        },
    )?;

    println!("system {}x{}", cmp.m, cmp.n);
    match &cmp.restart_kmax {
        Ok(k) => println!("memory-matched restart length {k}"),
        Err(e) => println!("no memory-matched restart: {e}"),
    }
    println!("{:<16} {:>10} {:>14} {:>14} {:>10}", "solver", "iterations", "termination", "memory", "ratio");
    for r in &rows {
        match &r.error {
            None => println!(
                "{:<16} {:>10} {:>14} {:>14} {:>10.3}",
                r.solver,
                r.iterations.unwrap_or(0),
                format!("{:?}", r.termination.unwrap()),
                r.memory_estimate.unwrap_or(0),
                r.memory_ratio.unwrap_or(f64::NAN),
            ),
            Some(e) => println!("{:<16} failed: {e}", r.solver),
        }
    }
    Ok(cmp.nscraig.termination)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<bool> {
    let spec = args.problem.spec();
    if spec.kind == ProblemKind::File {
        bail!("generate needs --problem synthetic or --problem oseen");
    }
    let sys = build_problem(&spec)?;
    create_out(&args.out)?;
    save_system(&args.out, &sys, Some(&spec))?;
    let report = validate_system(&sys, args.samples);
    write_json(&args.out, "validation.json", &report)?;
    println!(
        "wrote {}x{} system to {}; min x^T M x = {}, sigma_min / sigma_max = {}",
        sys.primal_dim(),
        sys.dual_dim(),
        args.out.display(),
        num(report.min_quadratic_form),
        num(report.sigma_min / report.sigma_max),
    );
    Ok(report.passed())
}
