//! Merging of near-coincident particles and refilling of voids.
//!
//! Punches a hole into a lattice and pushes two particles almost on top of
//! each other, then lets one management pass repair the cloud.
//!
//! `cargo run --release --example particle_management`

use fpm_wetting::management::manage_particles;
use fpm_wetting::scenarios::unit_square;
use fpm_wetting::{ParticleCloud, Vec2};

fn main() -> fpm_wetting::Result<()> {
    let c = unit_square(0.1);
    let seeded = ParticleCloud::seed(&c)?;
    let dx = seeded.dx0();
    let hole = Vec2::new(0.3, 0.3);
    let mut ps: Vec<_> = seeded
        .particles()
        .iter()
        .filter(|p| p.is_wall() || (p.position - hole).norm() > 2.0 * dx)
        .cloned()
        .collect();
    let i = ps
        .iter()
        .position(|p| !p.is_wall() && (p.position - Vec2::new(0.7, 0.7)).norm() < dx)
        .expect("lattice point near (0.7, 0.7)");
    let j = ps
        .iter()
        .position(|p| !p.is_wall() && (p.position - ps[i].position - Vec2::new(dx, 0.0)).norm() < 1e-9)
        .expect("right-hand neighbor");
    ps[j].position = ps[i].position + Vec2::new(0.05 * dx, 0.0);
    let mut cloud = ParticleCloud::new(ps, c.domain, seeded.h(), dx);
    println!("seeded {}, after damage {}", seeded.len(), cloud.len());
    let report = manage_particles(&mut cloud, &c)?;
    println!("added {}, removed {}, now {}", report.added, report.removed, cloud.len());
    let inside = cloud.particles().iter().filter(|p| (p.position - hole).norm() <= 2.0 * dx).count();
    println!("{inside} particles inside the former hole");
    Ok(())
}
