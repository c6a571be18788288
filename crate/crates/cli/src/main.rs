use clap::{Parser, Subcommand};

use umedian_cli::commands::{
    cmd_bench, cmd_estimate, cmd_gen, cmd_oracle, cmd_support, cmd_weights, BenchArgs,
    EstimateArgs, GenArgs, OracleArgs, SupportArgs, WeightsArgs,
};
use umedian_cli::{configure_threads, CliError};

/// Median distributions for locationally uncertain points: generate
/// instances, build approximate supports, attach exact or Monte-Carlo
/// weights, derive single-point estimates, and validate everything against
/// brute-force enumeration.
#[derive(Parser)]
#[command(name = "umedian", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance file.
    Gen(GenArgs),
    /// Build the approximate support of the median distribution.
    Support(SupportArgs),
    /// Attach weights to a support (exact, Monte-Carlo, or sampled).
    Weights(WeightsArgs),
    /// Single-point estimates and their stability bound.
    Estimate(EstimateArgs),
    /// Brute-force validation suites under the enumeration cap.
    Oracle(OracleArgs),
    /// Statistical experiments with report tables and plot-ready CSVs.
    Bench(BenchArgs),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Support(args) => cmd_support(args),
        Command::Weights(args) => cmd_weights(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn main() {
    configure_threads();
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {}", e);
        std::process::exit(e.exit_code());
    }
}
