//! Convergence of the elliptic solver on both manufactured diffusion problems.
//!
//! `cargo run --release --example elliptic_convergence [spacing_ratio]`

use fpm_wetting::convergence::{run_convergence, DiffusionOptions};
use fpm_wetting::oracles::DiffusionExample;

fn main() {
    let mut options = DiffusionOptions::default();
    if let Some(r) = std::env::args().nth(1) {
        options.spacing_ratio = r.parse().expect("spacing ratio must be a number");
    }
    for example in [DiffusionExample::One, DiffusionExample::Two] {
        let start = std::time::Instant::now();
        let table = run_convergence(example, &[0.08, 0.04, 0.02], &options);
        print!("{table}");
        println!("({:.1} s)\n", start.elapsed().as_secs_f64());
    }
}
