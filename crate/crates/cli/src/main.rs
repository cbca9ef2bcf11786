use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod experiment;

use commands::Failure;

#[derive(Parser)]
#[command(name = "redblue", version, about = "Budgeted red-blue median: local search, exact oracles and gap instances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run p-swap local search on an instance.
    Solve(SolveArgs),
    /// Exact optimum by enumeration.
    Exact(ExactArgs),
    /// Check a solution for local optimality.
    Verify(VerifyArgs),
    /// Partition a pair of solutions into groups and blocks and check them.
    Decompose(DecomposeArgs),
    /// Write a locality-gap instance with its designated solutions.
    Gengap(GengapArgs),
    /// Run an experiment described by a JSON spec and write CSV.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum RuleArg {
    Best,
    First,
}

#[derive(Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = RuleArg::Best)]
    pub rule: RuleArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Starting solution; random when omitted.
    #[arg(long)]
    pub initial: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iters: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest number of solutions to enumerate.
    #[arg(long, default_value_t = redblue::exact::DEFAULT_CAP)]
    pub cap: u128,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, default_value_t = redblue::exact::DEFAULT_CAP)]
    pub cap: u128,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Local solution.
    #[arg(long)]
    pub s: PathBuf,
    /// Global solution.
    #[arg(long)]
    pub o: PathBuf,
    /// Duplicate facilities shared by both solutions instead of failing.
    #[arg(long)]
    pub disjointify: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GengapArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub ell: usize,
    /// Directory for instance.json, local.json, global.json and expected.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Also verify the instance and write report.json.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = redblue::exact::DEFAULT_CAP)]
    pub cap: u128,
}

#[derive(Args)]
pub struct ExperimentArgs {
    /// Experiment spec (JSON).
    pub spec: PathBuf,
    /// Overrides the output path in the spec.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Exact(a) => commands::exact(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Decompose(a) => commands::decompose(&a),
        Command::Gengap(a) => commands::gengap(&a),
        Command::Experiment(a) => experiment::run(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
