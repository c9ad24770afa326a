use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use inr_cli::{compare_files, compare_table, run, CliError, RunOptions, EXIT_DIVERGED};

#[derive(Parser)]
#[command(name = "inr", version, about = "Fit and compare coordinate networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory, replacing `io.output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run this seed only.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rank the runs of two or more summaries and write compare.csv.
    Compare {
        #[arg(required = true, num_args = 2..)]
        summaries: Vec<PathBuf>,
        /// Directory for compare.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, out, seed } => {
            let report = run(&config, &RunOptions { out, seed })?;
            println!("wrote {}", report.output_dir.display());
            if report.summary.any_diverged() {
                eprintln!("training diverged; partial results kept");
                return Ok(EXIT_DIVERGED);
            }
            Ok(0)
        }
        Command::Compare { summaries, out } => {
            let rows = compare_files(&summaries, &out)?;
            print!("{}", compare_table(&rows));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
