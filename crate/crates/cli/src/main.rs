mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use nscraig_core::{Error, Termination};

use args::{Cli, Command, Restart, SolverArg};

const EXIT_OTHER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BREAKDOWN: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

fn termination_code(t: Termination) -> u8 {
    match t {
        Termination::Converged => 0,
        Termination::Breakdown => EXIT_BREAKDOWN,
        Termination::MaxitReached | Termination::Stagnated => EXIT_NOT_CONVERGED,
    }
}

fn error_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Breakdown { .. } | Error::FomBreakdown { .. }) => EXIT_BREAKDOWN,
        Some(Error::InvalidConfig(_) | Error::InvalidProblem(_)) => EXIT_USAGE,
        _ => EXIT_OTHER,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Run(run) = &cli.command {
        if run.restart != Restart::None && run.solver != SolverArg::Gmres {
            Cli::command()
                .error(ErrorKind::ArgumentConflict, "--restart only applies to --solver gmres")
                .exit();
        }
    }
    let result = match &cli.command {
        Command::Run(a) => commands::cmd_run(a).map(termination_code),
        Command::Compare(a) => commands::cmd_compare(a).map(termination_code),
        Command::Generate(a) => commands::cmd_generate(a).map(|ok| {
            if !ok {
                eprintln!("warning: system failed validation");
            }
            if ok { 0 } else { EXIT_OTHER }
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
