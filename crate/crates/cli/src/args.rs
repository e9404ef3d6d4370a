use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nscraig_core::{
    Orthogonalization, ProblemKind, ProblemSpec, SolverConfig, StoppingCriterion,
};

#[derive(Debug, Parser)]
#[command(name = "nscraig", version, about = "nsCRAIG saddle-point solver benchmark harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one system with one solver and write its history and summary.
    Run(RunArgs),
    /// Run nscraig, fom, gmres and memory-matched restarted gmres side by side.
    Compare(CompareArgs),
    /// Write a generated system as Matrix Market files.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    Synthetic,
    Oseen,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Nscraig,
    Fom,
    Gmres,
}

impl SolverArg {
    pub fn id(self) -> &'static str {
        match self {
            SolverArg::Nscraig => "nscraig",
            SolverArg::Fom => "fom",
            SolverArg::Gmres => "gmres",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StopArg {
    Residual,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restart {
    None,
    Auto,
    Fixed(usize),
}

fn parse_restart(s: &str) -> Result<Restart, String> {
    match s {
        "none" => Ok(Restart::None),
        "auto" => Ok(Restart::Auto),
        _ => match s.parse::<usize>() {
            Ok(0) => Err("restart length must be >= 1".into()),
            Ok(k) => Ok(Restart::Fixed(k)),
            Err(_) => Err(format!("expected none, auto or a positive integer, got {s:?}")),
        },
    }
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(format!("tolerance must be a finite number > 0, got {s}"))
    }
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be >= 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(format!("{e}")),
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a finite number, got {s}"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long, value_enum, default_value_t = ProblemArg::Synthetic)]
    pub problem: ProblemArg,
    /// Primal size (synthetic).
    #[arg(long, default_value_t = 60)]
    pub m: usize,
    /// Dual size (synthetic).
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Coarse pressure intervals per side (oseen).
    #[arg(long, default_value_t = 12)]
    pub grid: usize,
    /// Viscosity (oseen).
    #[arg(long, default_value_t = 0.01, value_parser = parse_finite)]
    pub nu: f64,
    #[arg(long = "wind-x", default_value_t = 1.0, value_parser = parse_finite)]
    pub wind_x: f64,
    #[arg(long = "wind-y", default_value_t = 0.5, value_parser = parse_finite)]
    pub wind_y: f64,
    /// Scale of the skew-symmetric part of M (synthetic).
    #[arg(long = "skew-scale", default_value_t = 1.0, value_parser = parse_finite)]
    pub skew_scale: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Directory holding M.mtx, A.mtx, b.mtx and optionally b1.mtx (file).
    #[arg(long)]
    pub path: Option<PathBuf>,
}

impl ProblemArgs {
    pub fn spec(&self) -> ProblemSpec {
        let kind = match self.problem {
            ProblemArg::Synthetic => ProblemKind::Synthetic,
            ProblemArg::Oseen => ProblemKind::OseenFd,
            ProblemArg::File => ProblemKind::File,
        };
        ProblemSpec {
            kind,
            m: self.m,
            n: self.n,
            grid: self.grid,
            seed: self.seed,
            nu: self.nu,
            wind: [self.wind_x, self.wind_y],
            skew_scale: self.skew_scale,
            path: self.path.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-3, value_parser = parse_tol)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000, value_parser = parse_positive)]
    pub maxit: usize,
    #[arg(long, value_enum, default_value_t = StopArg::Residual)]
    pub stop: StopArg,
    /// Delay of the energy-norm error estimate.
    #[arg(long, default_value_t = 5, value_parser = parse_positive)]
    pub delay: usize,
    /// Reorthogonalize every basis vector twice.
    #[arg(long = "mgs-twice")]
    pub mgs_twice: bool,
    /// Recompute the true residual every iteration (nscraig).
    #[arg(long)]
    pub validate: bool,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            maxit: self.maxit,
            criterion: match self.stop {
                StopArg::Residual => StoppingCriterion::Residual,
                StopArg::Error => StoppingCriterion::ErrorEstimate,
            },
            delay_d: self.delay,
            orthogonalization: if self.mgs_twice {
                Orthogonalization::MgsTwice
            } else {
                Orthogonalization::Mgs
            },
            validate: self.validate,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    #[arg(long, value_enum, default_value_t = SolverArg::Nscraig)]
    pub solver: SolverArg,
    /// GMRES restart: none, auto (memory-matched to a paired nscraig run) or a length.
    #[arg(long, default_value = "none", value_parser = parse_restart)]
    pub restart: Restart,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Number of random unit vectors used to sample x^T M x.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restart_values() {
        assert_eq!(parse_restart("none"), Ok(Restart::None));
        assert_eq!(parse_restart("auto"), Ok(Restart::Auto));
        assert_eq!(parse_restart("7"), Ok(Restart::Fixed(7)));
        assert!(parse_restart("0").is_err());
        assert!(parse_restart("-3").is_err());
        assert!(parse_restart("often").is_err());
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(parse_tol("0").is_err());
        assert!(parse_tol("-1e-3").is_err());
        assert!(parse_tol("nan").is_err());
        assert!(parse_tol("inf").is_err());
        assert_eq!(parse_tol("1e-6"), Ok(1e-6));
    }

    #[test]
    fn flags_map_to_spec() {
        let cli = Cli::try_parse_from([
            "nscraig", "run", "--problem", "oseen", "--grid", "6", "--nu", "0.1", "--wind-x",
            "0", "--wind-y", "2", "--seed", "9", "--stop", "error", "--delay", "3",
        ])
        .unwrap();
        let Command::Run(run) = cli.command else { panic!("not run") };
        let spec = run.problem.spec();
        assert_eq!(spec.kind, ProblemKind::OseenFd);
        assert_eq!((spec.grid, spec.seed), (6, 9));
        assert_eq!(spec.wind, [0.0, 2.0]);
        let cfg = run.solver_args.config();
        assert_eq!(cfg.criterion, StoppingCriterion::ErrorEstimate);
        assert_eq!(cfg.delay_d, 3);
        assert_eq!(cfg.orthogonalization, Orthogonalization::Mgs);
    }

    #[test]
    fn bad_flags_rejected() {
        for args in [
            &["nscraig", "run", "--tol", "0"][..],
            &["nscraig", "run", "--solver", "cg"],
            &["nscraig", "run", "--maxit", "0"],
            &["nscraig", "run", "--restart", "x"],
            &["nscraig", "generate"],
        ] {
            assert!(Cli::try_parse_from(args).is_err(), "{args:?}");
        }
    }
}
