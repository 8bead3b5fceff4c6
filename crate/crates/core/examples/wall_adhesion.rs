//! Water pool in a closed tank with a hydrophobic or hydrophilic wall.
//!
//! At 175 degrees the liquid pulls away from the walls; at 5 degrees it climbs
//! them. Prints the highest liquid particle and the closest approach of the
//! liquid to any wall particle.
//!
//! `cargo run --release --example wall_adhesion [theta_deg] [h] [t_end]`
//! (defaults 175, 0.008, 2.5)

use fpm_wetting::scenarios::wall_adhesion;
use fpm_wetting::{Phase, Simulation};

fn main() -> fpm_wetting::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let arg = |k: usize, d: f64| args.get(k).map_or(d, |s| s.parse().expect("numeric argument"));
    let theta = arg(1, 175.0) as u32;
    let mut c = wall_adhesion(theta);
    c.numerics.h = arg(2, 0.008);
    c.numerics.t_end = arg(3, 2.5);
    let mut sim = Simulation::new(c)?;
    println!("{} particles, {} steps", sim.cloud().len(), sim.steps_to_end());
    println!("{:>6} {:>10} {:>14}", "t", "max y", "wall distance");
    let every = (0.1 / sim.config().numerics.dt).round() as u64;
    sim.run(|s, r| {
        if r.step % every == 0 {
            let ps = s.cloud().particles();
            let walls: Vec<_> = ps.iter().filter(|p| p.is_wall()).map(|p| p.position).collect();
            let liquid = ps.iter().filter(|p| !p.is_wall() && p.phase() == Phase::Liquid);
            let (mut top, mut gap) = (f64::NEG_INFINITY, f64::INFINITY);
            for p in liquid {
                top = top.max(p.position.y);
                for w in &walls {
                    gap = gap.min((p.position - w).norm());
                }
            }
            println!("{:>6.2} {:>10.4} {:>14.4}", r.t, top, gap);
        }
        Ok(())
    })?;
    Ok(())
}
