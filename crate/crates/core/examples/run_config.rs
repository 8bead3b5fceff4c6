//! Drives a run from a configuration file and writes the output files.
//!
//! Same as `fpm run <config> --out <dir>`: snapshots (`snapshot_NNNNN.csv`),
//! the per-step diagnostics table and a run log.
//!
//! `cargo run --release --example run_config -- configs/drop_smoke.toml /tmp/drop`

use fpm_wetting::driver::{run, RunOptions};
use fpm_wetting::parse_config;

fn main() -> fpm_wetting::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let (Some(config), Some(out)) = (args.get(1), args.get(2)) else {
        eprintln!("usage: run_config <config.toml> <out_dir>");
        std::process::exit(2);
    };
    let config = parse_config(config)?;
    for d in &config.defaults_applied {
        println!("default: {d}");
    }
    let outcome = run(config, out, &RunOptions::default())?;
    println!("{}", outcome.summary);
    if let Some(e) = outcome.error {
        eprintln!("run stopped: {e}");
        std::process::exit(1);
    }
    Ok(())
}
