use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hvrfif_cli::runner;
use hvrfif_cli::CliError;

/// Construct, certify, solve, sample and render hidden-variable recurrent
/// fractal interpolation systems.
#[derive(Parser)]
#[command(name = "hvrfif", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a configuration and write the contraction certificate.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Solve the fixed point and write the field CSV and solve report.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Sample the attractor with the chaos game and write the cloud CSV.
    Chaos {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the configured chaos seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve and render the visible component as a PGM image.
    Render {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the full verification suite; exits 2 on any failed check.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the verification and chaos seeds.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Materialize a built-in example and run solve + render on it.
    Example {
        /// Example name, e.g. `1d-config-1`; see the README for the list.
        name: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn init_thread_pool() {
    if let Ok(threads) = std::env::var("HVRFIF_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { config, out } => runner::run_with_config("validate", &config, &out, None),
        Command::Solve { config, out } => runner::run_with_config("solve", &config, &out, None),
        Command::Chaos { config, out, seed } => {
            runner::run_with_config("chaos", &config, &out, seed)
        }
        Command::Render { config, out } => runner::run_with_config("render", &config, &out, None),
        Command::Verify { config, out, seed } => {
            runner::run_with_config("verify", &config, &out, seed)
        }
        Command::Example { name, out } => runner::cmd_example(&name, &out),
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not failures
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
