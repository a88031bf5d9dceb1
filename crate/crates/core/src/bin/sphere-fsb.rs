use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sphere_fsb::cli;

#[derive(Parser)]
#[command(name = "sphere-fsb", about = "Forced symmetry breaking of rotating waves on the sphere")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full analysis and write report.json plus trajectory CSVs
    Run { config: PathBuf },
    /// Print the persistence integral on N interior colatitudes as CSV
    Melnikov {
        config: PathBuf,
        #[arg(long)]
        grid: usize,
    },
    /// Print the version
    Version,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = cli::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(cli::EXIT_CONFIG as u8);
    }
    match args.command {
        Command::Run { config } => {
            let r = cli::run_scenario(&config);
            if r.exit_code == cli::EXIT_CONFIG {
                eprintln!("error: {}", r.message);
            } else {
                println!("{}", r.message);
            }
            ExitCode::from(r.exit_code as u8)
        }
        Command::Melnikov { config, grid } => match cli::dump_melnikov(&config, grid) {
            Ok(table) => {
                print!("{table}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(cli::EXIT_CONFIG as u8)
            }
        },
        Command::Version => {
            println!("{}", cli::version_string());
            ExitCode::SUCCESS
        }
    }
}
