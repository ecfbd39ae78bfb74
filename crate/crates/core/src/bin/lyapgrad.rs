use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lyapgrad_core::cli::{self, BenchArgs, GenerateArgs, SolveArgs, VerifyArgs};

/// Common quadratic Lyapunov functions by sequential gradient corrections.
#[derive(Parser)]
#[command(name = "lyapgrad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for P satisfying every Lyapunov inequality of a problem file.
    Solve(SolveArgs),
    /// Check a candidate P against a problem file.
    Verify(VerifyArgs),
    /// Write a random upper-triangular interval problem.
    Generate(GenerateArgs),
    /// Solve a batch of generated triangular interval families over their vertices.
    Bench(BenchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let result = match &cli.command {
        Command::Solve(args) => cli::cmd_solve(args),
        Command::Verify(args) => cli::cmd_verify(args, &mut stdout),
        Command::Generate(args) => cli::cmd_generate(args),
        Command::Bench(args) => cli::cmd_bench(args, &mut stdout),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::EXIT_INPUT_ERROR as u8)
        }
    }
}
