use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fpm_wetting::convergence::{run_convergence, DiffusionOptions};
use fpm_wetting::driver::{run, RunOptions};
use fpm_wetting::oracles::DiffusionExample;
use fpm_wetting::scenarios::builtin_scenarios;

#[derive(Parser)]
#[command(name = "fpm", version, about = "Meshfree two-phase flow with surface tension and contact angles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a configuration file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Simulated seconds between snapshots (overrides output.interval).
        #[arg(long)]
        snapshot_every: Option<f64>,
    },
    /// Elliptic-solver convergence study on a manufactured diffusion problem.
    Convergence {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        example: u8,
        /// Comma-separated interaction radii.
        #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [0.08, 0.04, 0.02])]
        h: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// List builtin scenarios.
    Scenarios,
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> fpm_wetting::Result<ExitCode> {
    match command {
        Command::Run {
            config,
            out,
            snapshot_every,
        } => {
            let config = fpm_wetting::parse_config(&config)?;
            for d in &config.defaults_applied {
                eprintln!("default: {d}");
            }
            let outcome = run(config, &out, &RunOptions { snapshot_every })?;
            println!("{}", outcome.summary);
            match outcome.error {
                None => Ok(ExitCode::SUCCESS),
                Some(e) => {
                    eprintln!("error: {e}");
                    eprintln!("partial output kept in {}", outcome.out_dir.display());
                    Ok(ExitCode::FAILURE)
                }
            }
        }
        Command::Convergence { example, h, out } => {
            let example = if example == 1 {
                DiffusionExample::One
            } else {
                DiffusionExample::Two
            };
            let table = run_convergence(example, &h, &DiffusionOptions::default());
            print!("{table}");
            std::fs::create_dir_all(&out)?;
            let path = out.join(format!("convergence_example{}.csv", example.number()));
            std::fs::write(&path, table.to_csv())?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Scenarios => {
            for c in builtin_scenarios() {
                println!(
                    "{:<26} theta {:>5} deg  h {:<7} t_end {} s",
                    c.name, c.physics.theta_s_deg, c.numerics.h, c.numerics.t_end
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
