//! Drop-shape, pressure and energy diagnostics of a particle cloud.

use nalgebra::{Matrix3, Vector3};

use crate::cloud::ParticleCloud;
use crate::particle::Phase;
use crate::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    /// Wetted length along the bottom wall: chord at the wall of the circle
    /// fitted to the liquid interface, zero if that circle misses the wall.
    pub l: f64,
    /// Highest liquid particle above the bottom wall.
    pub h: f64,
    /// Mean liquid minus mean gas pressure; `None` unless both phases exist.
    pub dp: Option<f64>,
    /// `sum 1/2 rho |v|^2 dx0^2` over liquid particles (per unit depth).
    pub kinetic_energy: f64,
    pub n: usize,
    /// Distance between the leftmost and rightmost liquid particles.
    pub width: f64,
    /// Radius of the fitted interface circle.
    pub fitted_radius: Option<f64>,
}

/// Points halfway between interior liquid particles and their interior gas
/// neighbors closer than `1.5 dx0`.
pub fn interface_points(cloud: &ParticleCloud) -> Vec<Vec2> {
    let ps = cloud.particles();
    let reach = 1.5 * cloud.dx0();
    let mut out = Vec::new();
    for p in ps.iter().filter(|p| !p.is_wall() && p.phase() == Phase::Liquid) {
        // the index may be stale right after advection; fall back to a scan
        let near = match cloud.within(&p.position, reach) {
            Ok(v) => v,
            Err(_) => (0..ps.len()).filter(|&j| (ps[j].position - p.position).norm() <= reach).collect(),
        };
        for j in near {
            let q = &ps[j];
            if !q.is_wall() && q.phase() == Phase::Gas {
                out.push((p.position + q.position) * 0.5);
            }
        }
    }
    out
}

/// Algebraic least-squares circle through `points`: `(centre, radius)`.
pub fn fit_circle(points: &[Vec2]) -> Option<(Vec2, f64)> {
    if points.len() < 3 {
        return None;
    }
    // shift to the centroid for conditioning
    let c0 = points.iter().sum::<Vec2>() / points.len() as f64;
    let mut a = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for p in points {
        let d = p - c0;
        let row = Vector3::new(d.x, d.y, 1.0);
        let rhs = d.norm_squared();
        a += row * row.transpose();
        b += row * rhs;
    }
    let s = a.lu().solve(&b)?;
    let centre = Vec2::new(0.5 * s[0], 0.5 * s[1]);
    let r2 = s[2] + centre.norm_squared();
    (r2 > 0.0).then(|| (centre + c0, r2.sqrt()))
}

pub fn diagnostics(cloud: &ParticleCloud, t: f64) -> Diagnostics {
    let ps = cloud.particles();
    let y0 = cloud.domain().y_min;
    let area = cloud.dx0() * cloud.dx0();
    let (mut x_lo, mut x_hi, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut ke = 0.0;
    let mut sums = [(0.0, 0usize); 2];
    for p in ps.iter().filter(|p| !p.is_wall()) {
        let liquid = p.phase() == Phase::Liquid;
        let s = &mut sums[liquid as usize];
        s.0 += p.pressure;
        s.1 += 1;
        if liquid {
            x_lo = x_lo.min(p.position.x);
            x_hi = x_hi.max(p.position.x);
            y_hi = y_hi.max(p.position.y);
            ke += 0.5 * p.rho() * p.velocity.norm_squared() * area;
        }
    }
    let has_liquid = sums[1].1 > 0;
    let dp = (sums[0].1 > 0 && has_liquid).then(|| sums[1].0 / sums[1].1 as f64 - sums[0].0 / sums[0].1 as f64);
    let fit = fit_circle(&interface_points(cloud));
    let l = fit.map_or(0.0, |(c, r)| {
        let d = c.y - y0;
        if d.abs() < r {
            2.0 * (r * r - d * d).sqrt()
        } else {
            0.0
        }
    });
    Diagnostics {
        t,
        l,
        h: if has_liquid { y_hi - y0 } else { 0.0 },
        dp,
        kinetic_energy: ke,
        n: ps.len(),
        width: if has_liquid { x_hi - x_lo } else { 0.0 },
        fitted_radius: fit.map(|f| f.1),
    }
}
