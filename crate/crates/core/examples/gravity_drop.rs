//! Sessile drop at 130 degrees under gravity.
//!
//! Compares the time-averaged height with the capillary-dominated cap height
//! and the gravity-dominated pancake height for the chosen Eotvos number.
//!
//! `cargo run --release --example gravity_drop [eo] [h] [t_end]`
//! (defaults 12, 0.01, 6; the average starts at t = 4 s)

use fpm_wetting::oracles::gravity_asymptotics;
use fpm_wetting::scenarios::{gravity_drop, viscous_dt, DROP_R0};
use fpm_wetting::Simulation;

fn main() -> fpm_wetting::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let arg = |k: usize, d: f64| args.get(k).map_or(d, |s| s.parse().expect("numeric argument"));
    let eo = arg(1, 12.0);
    let h = arg(2, 0.01);
    let mut c = gravity_drop(eo);
    c.numerics.h = h;
    c.numerics.dt = viscous_dt(h, c.gas.mu / c.gas.rho);
    c.numerics.t_end = arg(3, 6.0);
    let g = -c.physics.gravity[1];
    let a = gravity_asymptotics(c.physics.sigma, c.liquid.rho, g, DROP_R0, c.physics.theta_s());
    println!("Eo {:.3}, g {:.4e}, H0 {:.4}, H_inf {:?}", a.eo, g, a.h0, a.h_inf);

    let mut sim = Simulation::new(c)?;
    let (mut sum, mut n) = (0.0, 0);
    let every = (0.5 / sim.config().numerics.dt).round() as u64;
    sim.run(|s, r| {
        let d = s.diagnostics();
        if r.t >= 4.0 {
            sum += d.h;
            n += 1;
        }
        if r.step % every == 0 {
            println!("t {:>5.2} H {:.4} L {:.4}", d.t, d.h, d.l);
        }
        Ok(())
    })?;
    if n > 0 {
        let h_avg = sum / n as f64;
        println!("mean H over t >= 4 s: {:.4} (H/H0 {:.3})", h_avg, h_avg / a.h0);
    }
    Ok(())
}
