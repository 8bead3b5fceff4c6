//! Least-squares derivatives on a jittered particle cloud.
//!
//! Fits the derivatives of `sin(2x) cos(3y)` at every particle and prints the
//! maximum gradient and Laplacian errors for a few interaction radii.
//!
//! `cargo run --release --example ls_derivatives`

use fpm_wetting::ls::LsOperators;
use fpm_wetting::scenarios::unit_square;
use fpm_wetting::ParticleCloud;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> fpm_wetting::Result<()> {
    let f = |x: f64, y: f64| (2.0 * x).sin() * (3.0 * y).cos();
    let grad = |x: f64, y: f64| (2.0 * (2.0 * x).cos() * (3.0 * y).cos(), -3.0 * (2.0 * x).sin() * (3.0 * y).sin());
    let lap = |x: f64, y: f64| -13.0 * f(x, y);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("{:>6} {:>7} {:>12} {:>12}", "h", "N", "grad err", "lap err");
    for h in [0.2, 0.1, 0.05] {
        let seeded = ParticleCloud::seed(&unit_square(h))?;
        let dx = seeded.dx0();
        let mut ps = seeded.particles().to_vec();
        for p in ps.iter_mut().filter(|p| !p.is_wall()) {
            p.position.x += 0.3 * dx * rng.gen_range(-1.0..1.0);
            p.position.y += 0.3 * dx * rng.gen_range(-1.0..1.0);
        }
        let cloud = ParticleCloud::new(ps, *seeded.domain(), h, dx);
        let list = cloud.neighbor_list()?;
        let ops = LsOperators::build(&cloud, &list)?;
        let values: Vec<f64> = cloud.particles().iter().map(|p| f(p.position.x, p.position.y)).collect();
        let (mut eg, mut el) = (0.0f64, 0.0f64);
        for (i, p) in cloud.particles().iter().enumerate() {
            let (x, y) = (p.position.x, p.position.y);
            let d = ops.derivatives(&values, i);
            let g = grad(x, y);
            eg = eg.max((d.ddx - g.0).abs().max((d.ddy - g.1).abs()));
            el = el.max((d.laplacian() - lap(x, y)).abs());
        }
        println!("{:>6} {:>7} {:>12.3e} {:>12.3e}", h, cloud.len(), eg, el);
    }
    Ok(())
}
