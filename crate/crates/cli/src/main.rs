use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use legendre_cli::commands::{self, CliError, Context};
use legendre_cli::ScenarioConfig;

#[derive(Parser)]
#[command(name = "legendre", version, about = "Evaluate, decompose and classify model Legendre distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance override `key=value`; repeatable.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    tol: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Values on the scenario grid (CSV plus JSON summary).
    Eval(Common),
    /// `α(Z) f + g` decomposition of an intersecting scenario.
    Decompose(Common),
    /// Corner Taylor table and membership verdict.
    Classify(Common),
    /// Classifications of the scenario and its multiples.
    Witness(Common),
    /// Transversal coordinate for a Legendrian/conormal pair.
    LemmaCheck(Common),
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let (name, common, f): (&str, Common, fn(&Context) -> Result<Vec<PathBuf>, CliError>) = match cli.command {
        Command::Eval(c) => ("eval", c, commands::cmd_eval),
        Command::Decompose(c) => ("decompose", c, commands::cmd_decompose),
        Command::Classify(c) => ("classify", c, commands::cmd_classify),
        Command::Witness(c) => ("witness", c, commands::cmd_witness),
        Command::LemmaCheck(c) => ("lemma-check", c, commands::cmd_lemma_check),
    };
    let mut config = ScenarioConfig::load(&common.config)?;
    for t in &common.tol {
        config.tolerances.set(t)?;
    }
    commands::ensure_dir(&common.out)?;
    let ctx = Context { config, out: common.out, seed: common.seed };
    let start = Instant::now();
    let res = f(&ctx);
    eprintln!("legendre {name}: {:.3}s", start.elapsed().as_secs_f64());
    res
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
