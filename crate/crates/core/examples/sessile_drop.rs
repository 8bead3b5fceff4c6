//! Semicircular drop relaxing to its equilibrium cap on a wall.
//!
//! Prints the wetted length, height and pressure jump next to the
//! circular-cap and Laplace-law values.
//!
//! `cargo run --release --example sessile_drop [theta_deg] [h] [t_end]`
//! (defaults 150, 0.01, 5; about four minutes on one core)

use fpm_wetting::oracles::{cap_geometry, laplace_pressure};
use fpm_wetting::scenarios::{sessile_circular, viscous_dt, DROP_R0};
use fpm_wetting::Simulation;

fn main() -> fpm_wetting::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let arg = |k: usize, d: f64| args.get(k).map_or(d, |s| s.parse().expect("numeric argument"));
    let theta = arg(1, 150.0) as u32;
    let h = arg(2, 0.01);
    let mut c = sessile_circular(theta);
    c.numerics.h = h;
    c.numerics.dt = viscous_dt(h, c.gas.mu / c.gas.rho);
    c.numerics.t_end = arg(3, 5.0);

    let cap = cap_geometry(DROP_R0, c.physics.theta_s())?;
    let dp = laplace_pressure(c.physics.sigma, cap.r)?;
    println!("cap: L {:.4} H {:.4} R {:.4}, Laplace dp {:.4}", cap.l, cap.h, cap.r, dp);

    let mut sim = Simulation::new(c)?;
    println!(
        "{} particles, dt {:.1e}, {} steps",
        sim.cloud().len(),
        sim.config().numerics.dt,
        sim.steps_to_end()
    );
    println!("{:>6} {:>8} {:>8} {:>8} {:>10} {:>7}", "t", "L", "H", "dp", "ke", "sweeps");
    let every = (0.25 / sim.config().numerics.dt).round() as u64;
    sim.run(|s, r| {
        if r.step % every == 0 {
            let d = s.diagnostics();
            println!(
                "{:>6.2} {:>8.4} {:>8.4} {:>8.4} {:>10.3e} {:>7}",
                d.t,
                d.l,
                d.h,
                d.dp.unwrap_or(f64::NAN),
                d.kinetic_energy,
                r.solver_sweeps
            );
        }
        Ok(())
    })?;
    Ok(())
}
