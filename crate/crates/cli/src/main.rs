use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use circle_euler_cli::{cmd_check_inverse, cmd_classify, cmd_residual, cmd_simulate};

/// Solver and metric classifier for the μ-b family of Euler equations on
/// the circle.
#[derive(Parser)]
#[command(name = "circle-euler", version)]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Only print errors and flags.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a JSON config.
    Simulate {
        config: PathBuf,
    },
    /// Classify the μ-b equation with parameter b.
    Classify {
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        /// Largest mode index scanned by the analysis.
        #[arg(long, default_value_t = 8)]
        max_k: usize,
        /// Number of trial modes for the residual check.
        #[arg(long, default_value_t = 3)]
        modes: usize,
    },
    /// Compare the integral and spectral inverses of L on random data.
    CheckInverse {
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Highest mode of the random data (default min(N/3, 32)).
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Print the velocity-identity residuals for A = L on one mode.
    Residual {
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        mode: i64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate { config } => cmd_simulate(&config, &cli.out, cli.quiet),
        Command::Classify { b, max_k, modes } => cmd_classify(b, max_k, modes, &cli.out, cli.quiet),
        Command::CheckInverse { n, seed, modes, trials } => cmd_check_inverse(n, seed, modes, trials, cli.quiet),
        Command::Residual { b, mode } => cmd_residual(b, mode, cli.quiet),
    };
    ExitCode::from(code as u8)
}
