//! `nocollide` command-line front end.

mod args;
mod commands;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Global;

/// A problem with the invocation or its inputs rather than with the run.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Usage errors and rejected inputs exit with 2, other failures with 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<nocollide::Error>() {
            return match e {
                nocollide::Error::InvalidArgument(_)
                | nocollide::Error::Parse { .. }
                | nocollide::Error::Json(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let threads = match cli.threads {
        Some(t) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t as usize)
                .build_global()?;
            t as usize
        }
        None => rayon::current_num_threads(),
    };
    let g = Global {
        seed: cli.seed,
        threads,
        out_dir: cli.out_dir,
        format: cli.format,
    };
    match &cli.command {
        Command::Gen(a) => commands::gen(&g, a),
        Command::Distmat(a) => commands::distmat(&g, a),
        Command::Embed(a) => commands::embed(&g, a),
        Command::Experiment(a) => commands::experiment(&g, a),
        Command::Bench(a) => commands::bench(&g, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
