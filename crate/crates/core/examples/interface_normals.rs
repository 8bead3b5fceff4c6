//! Interface normals, curvature and the contact-angle correction.
//!
//! Seeds a liquid column against the left wall of the unit square, imposes a
//! few contact angles and prints the angle between the corrected normals and
//! the bottom wall. Then measures the curvature of a liquid disk.
//!
//! `cargo run --release --example interface_normals`

use fpm_wetting::config::PhaseRegion;
use fpm_wetting::interface::{apply_contact_angle, contact_wall_particles, curvature_and_delta, InterfaceField};
use fpm_wetting::ls::LsOperators;
use fpm_wetting::scenarios::unit_square;
use fpm_wetting::{ParticleCloud, Phase};

fn main() -> fpm_wetting::Result<()> {
    let mut c = unit_square(0.05);
    c.liquid_region = PhaseRegion::Rectangle {
        x_min: 0.0,
        x_max: 0.5,
        y_min: 0.0,
        y_max: 1.0,
    };
    let cloud = ParticleCloud::seed(&c)?;
    let list = cloud.neighbor_list()?;
    let ops = LsOperators::build(&cloud, &list)?;
    let base = InterfaceField::new(&cloud, &list, &ops, c.numerics.color_smoothing)?;
    let contact = contact_wall_particles(&cloud, &list);
    println!("{} particles, {} contact wall particles", cloud.len(), contact.len());
    for deg in [30.0f64, 90.0, 150.0] {
        let mut f = base.clone();
        let n = apply_contact_angle(&cloud, &list, &mut f, deg.to_radians(), c.numerics.beta)?;
        let angles: Vec<String> = contact
            .iter()
            .map(|&w| {
                let wall = cloud.particles()[w].wall_normal().expect("contact particles are walls");
                format!("{:.2}", f.normal[w].expect("corrected").dot(&wall).acos().to_degrees())
            })
            .collect();
        println!("theta_s {deg:>5}: {n} normals corrected, wall angles [{}]", angles.join(", "));
    }

    let r = 0.25;
    let mut c_disk = unit_square(0.04);
    // a semicircle centred away from the wall is a full disk
    c_disk.liquid_region = PhaseRegion::Semicircle {
        center: [0.5, 0.5],
        radius: r,
    };
    let cloud = ParticleCloud::seed(&c_disk)?;
    let list = cloud.neighbor_list()?;
    let ops = LsOperators::build(&cloud, &list)?;
    let mut f = InterfaceField::new(&cloud, &list, &ops, c_disk.numerics.color_smoothing)?;
    curvature_and_delta(&cloud, &list, &mut f);
    let (mut num, mut den) = (0.0, 0.0);
    for (i, p) in cloud.particles().iter().enumerate() {
        if !p.is_wall() && p.phase() == Phase::Liquid && f.delta_s[i] > 0.0 {
            num += f.kappa[i] * f.delta_s[i];
            den += f.delta_s[i];
        }
    }
    println!(
        "disk of radius {r}: weighted mean curvature {:.3} (exact {:.3})",
        num / den,
        1.0 / r
    );
    Ok(())
}
