use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use djam::experiment::{commands, ExperimentConfig};

#[derive(Parser)]
#[command(name = "djam", about = "Field-estimation experiments for asynchronous gossip learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file (`key = value` lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write its CSV bundle.
    Gen(Common),
    /// Solve an instance with the oracle and write solution.csv.
    Solve(Common),
    /// Monte Carlo runs of DJAM.
    RunDjam(Common),
    /// Monte Carlo runs of the ADMM baseline.
    RunAdmm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rho: f64,
    },
    /// DJAM against ADMM for every rho in the config.
    Compare(Common),
}

fn load(common: &Common) -> djam::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> djam::Result<Vec<String>> {
    let with = |c: &Common, f: &dyn Fn(&ExperimentConfig, &Path) -> djam::Result<Vec<String>>| f(&load(c)?, &c.out);
    match &cli.command {
        Command::Gen(c) => with(c, &commands::gen),
        Command::Solve(c) => with(c, &commands::solve),
        Command::RunDjam(c) => with(c, &commands::run_djam),
        Command::RunAdmm { common, rho } => with(common, &|cfg, out| commands::run_admm(cfg, *rho, out)),
        Command::Compare(c) => with(c, &commands::compare),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(notes) => {
            for n in notes {
                eprintln!("{n}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
