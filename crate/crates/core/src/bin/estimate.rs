use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evtime::harness::{self, default_cache_dir, ExperimentConfig};
use evtime::problems::CATALOG;

#[derive(Parser)]
#[command(
    name = "estimate",
    version,
    about = "Event-time error estimates for 1D heat and shallow water problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mesh sweep and write tables, reports and traces.
    Run { config: PathBuf },
    /// Build (or load) the reference solution named by the config.
    Reference { config: PathBuf },
    /// Print the problem catalog.
    ListProblems,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> evtime::Result<ExitCode> {
    match command {
        Command::ListProblems => {
            for (name, description) in CATALOG {
                println!("{name:<18} {description}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Reference { config } => {
            let config = ExperimentConfig::from_file(&config)?;
            let cache_dir = default_cache_dir(&config);
            let (reference, status) = harness::reference(&config, &cache_dir)?;
            if let harness::CacheStatus::Rebuilt(note) = &status {
                eprintln!("warning: {note}");
            }
            harness::write_reference_crossings(&config.output, &reference)?;
            println!(
                "{:?} {}",
                status,
                cache_dir.join(reference.key.file_name()).display()
            );
            for (i, t) in reference.crossings.iter().enumerate() {
                println!("{} {t}", i + 1);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config } => {
            let config = ExperimentConfig::from_file(&config)?;
            let summary = harness::run(&config)?;
            for warning in &summary.warnings {
                eprintln!("warning: {warning}");
            }
            print!("{}", harness::table_md(&config, &summary.rows()));
            let failed = summary.failed();
            if failed > 0 {
                eprintln!(
                    "{failed} row(s) failed; see {}",
                    config.output.join("errors.csv").display()
                );
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
