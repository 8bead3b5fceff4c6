//! Smoothed color field, interface normals, wall contact-angle correction,
//! curvature and the continuum surface force.

use rayon::prelude::*;

use crate::cloud::{Neighbor, NeighborList, ParticleCloud, MIN_NEIGHBORS};
use crate::error::{Error, Result};
use crate::ls::{derivative_weights, shepard_smooth_with, LsOperators};
use crate::particle::{Particle, Phase};
use crate::Vec2;

/// Color jump between the two phases.
const COLOR_RANGE: f64 = 1.0;

/// Gradient magnitude above which a particle counts as lying on the interface.
pub fn interface_threshold(h: f64) -> f64 {
    0.01 * COLOR_RANGE / h
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceField {
    pub color_smooth: Vec<f64>,
    pub grad_c: Vec<Vec2>,
    /// Unit normal pointing into the liquid, `None` away from the interface.
    pub normal: Vec<Option<Vec2>>,
    pub kappa: Vec<f64>,
    pub delta_s: Vec<f64>,
    /// Particles whose normal was replaced by the contact-angle condition.
    pub corrected: Vec<bool>,
}

impl InterfaceField {
    /// Smoothed color, its gradient and the raw normals; curvature is left at zero.
    pub fn new(cloud: &ParticleCloud, list: &NeighborList, ops: &LsOperators, color_iterations: usize) -> Result<Self> {
        let color_smooth = smooth_color(cloud, list, color_iterations)?;
        let grad_c = ops.gradient_field(&color_smooth);
        let eps = interface_threshold(cloud.h());
        let normal = grad_c.iter().map(|g| interface_normal(g, eps)).collect();
        let delta_s = grad_c.iter().map(|g| g.norm()).collect();
        Ok(Self {
            color_smooth,
            normal,
            delta_s,
            kappa: vec![0.0; grad_c.len()],
            corrected: vec![false; grad_c.len()],
            grad_c,
        })
    }

    pub fn len(&self) -> usize {
        self.color_smooth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.color_smooth.is_empty()
    }
}

/// Shepard-smoothed color. Wall particles do not contribute (their phase
/// label is fixed at seeding) but receive the average of their neighbors.
pub fn smooth_color(cloud: &ParticleCloud, list: &NeighborList, iterations: usize) -> Result<Vec<f64>> {
    let color: Vec<f64> = cloud.particles().iter().map(Particle::color).collect();
    let source: Vec<bool> = cloud.particles().iter().map(|p| !p.is_wall()).collect();
    shepard_smooth_with(cloud, list, &color, iterations, Some(&source))
}

/// `grad_c / |grad_c|` when `|grad_c| > eps`.
pub fn interface_normal(grad_c: &Vec2, eps: f64) -> Option<Vec2> {
    let g = grad_c.norm();
    (g > eps).then(|| grad_c / g)
}

/// Wall particles whose interior neighbors include both phases.
pub fn contact_wall_particles(cloud: &ParticleCloud, list: &NeighborList) -> Vec<usize> {
    let ps = cloud.particles();
    (0..ps.len())
        .filter(|&i| ps[i].is_wall())
        .filter(|&i| {
            let mut seen = [false; 2];
            for n in list.of(i) {
                let p = &ps[n.j];
                if !p.is_wall() {
                    seen[(p.phase() == Phase::Liquid) as usize] = true;
                }
            }
            seen[0] && seen[1]
        })
        .collect()
}

/// Rotates the normals near the contact line so that `n_I . n = cos(theta_s)`,
/// where `n` is the outward wall normal. Affects contact wall particles and
/// every particle within `beta * h` of one; an affected particle uses the
/// normal of its nearest contact wall particle.
pub fn apply_contact_angle(
    cloud: &ParticleCloud,
    list: &NeighborList,
    iface: &mut InterfaceField,
    theta_s: f64,
    beta: f64,
) -> Result<usize> {
    if !(theta_s > 0.0 && theta_s < std::f64::consts::PI) {
        return Err(Error::Config(format!("contact angle {theta_s} rad outside (0, pi)")));
    }
    let ps = cloud.particles();
    let contact = contact_wall_particles(cloud, list);
    if contact.is_empty() {
        return Ok(0);
    }
    let radius = beta * cloud.h();
    // nearest contact wall particle for everything within the correction radius
    let mut nearest: Vec<Option<(f64, usize)>> = vec![None; ps.len()];
    for &w in &contact {
        nearest[w] = Some((0.0, w));
        for j in cloud.within(&ps[w].position, radius)? {
            let d = (ps[j].position - ps[w].position).norm();
            if nearest[j].is_none_or(|(best, _)| d < best) {
                nearest[j] = Some((d, w));
            }
        }
    }
    let (cos_t, sin_t) = (theta_s.cos(), theta_s.sin());
    let updates: Vec<(usize, Option<Vec2>)> = nearest
        .par_iter()
        .enumerate()
        .filter_map(|(i, near)| near.map(|(_, w)| (i, w)))
        .map(|(i, w)| {
            let n = ps[w].wall_normal().expect("contact particles are walls");
            let t = wall_tangent_toward_liquid(ps, list, iface, i, &n);
            (i, t.map(|t| n * cos_t + t * sin_t))
        })
        .collect();
    let mut count = 0;
    for (i, n_hat) in updates {
        if let Some(n_hat) = n_hat {
            iface.normal[i] = Some(n_hat);
            iface.corrected[i] = true;
            count += 1;
        }
    }
    Ok(count)
}

/// Unit wall tangent carrying the tangential part of the interface normal.
/// Falls back to the tangent pointing toward the liquid side of the stencil.
fn wall_tangent_toward_liquid(ps: &[Particle], list: &NeighborList, iface: &InterfaceField, i: usize, n: &Vec2) -> Option<Vec2> {
    let tangential = |v: Vec2| {
        let t = v - n * v.dot(n);
        let len = t.norm();
        (len > 1e-8 * v.norm().max(f64::MIN_POSITIVE)).then(|| t / len)
    };
    if let Some(t) = iface.normal[i].and_then(tangential) {
        return Some(t);
    }
    let mut toward = Vec2::zeros();
    for nb in list.of(i) {
        if !ps[nb.j].is_wall() {
            let dc = ps[nb.j].color() - iface.color_smooth[i];
            toward += Vec2::new(nb.dx, nb.dy) * (nb.w * dc);
        }
    }
    if toward.norm() > 0.0 {
        tangential(toward)
    } else {
        None
    }
}

/// Curvature `-div n_I` and delta function `|grad c~|`. The divergence is fitted
/// over the neighbors that have a normal; where fewer than five remain or the
/// fit is degenerate, the curvature is zero.
pub fn curvature_and_delta(cloud: &ParticleCloud, list: &NeighborList, iface: &mut InterfaceField) {
    let h = cloud.h();
    let ps = cloud.particles();
    let normal = &iface.normal;
    iface.kappa = (0..ps.len())
        .into_par_iter()
        .map(|i| {
            let Some(ni) = normal[i] else {
                return 0.0;
            };
            let stencil: Vec<Neighbor> = list.of(i).iter().filter(|n| normal[n.j].is_some()).copied().collect();
            if stencil.len() < MIN_NEIGHBORS {
                return 0.0;
            }
            let mut coeffs = Vec::with_capacity(stencil.len());
            if derivative_weights(&stencil, h, ps[i].id, &mut coeffs).is_err() {
                return 0.0;
            }
            let mut div = 0.0;
            for (n, c) in stencil.iter().zip(&coeffs) {
                let d = normal[n.j].expect("filtered") - ni;
                div += c[0] * d.x + c[1] * d.y;
            }
            -div
        })
        .collect();
    iface.delta_s = iface.grad_c.iter().map(|g| g.norm()).collect();
}

/// `sigma * kappa * n_I * delta_s` where a normal exists, zero elsewhere.
pub fn surface_tension_force(iface: &InterfaceField, sigma: f64) -> Result<Vec<Vec2>> {
    if !(sigma >= 0.0) {
        return Err(Error::Config(format!("surface tension {sigma} must be non-negative")));
    }
    Ok(iface
        .normal
        .iter()
        .zip(&iface.kappa)
        .zip(&iface.delta_s)
        .map(|((n, k), d)| match n {
            Some(n) if *d > 0.0 => n * (sigma * k * d),
            _ => Vec2::zeros(),
        })
        .collect())
}

/// Full interface evaluation for one step: color, normals, contact-angle
/// correction, curvature and force.
pub struct SurfaceTension {
    pub field: InterfaceField,
    pub force: Vec<Vec2>,
    pub corrected: usize,
}

pub fn evaluate(
    cloud: &ParticleCloud,
    list: &NeighborList,
    ops: &LsOperators,
    color_iterations: usize,
    theta_s: f64,
    beta: f64,
    sigma: f64,
) -> Result<SurfaceTension> {
    let mut field = InterfaceField::new(cloud, list, ops, color_iterations)?;
    let corrected = apply_contact_angle(cloud, list, &mut field, theta_s, beta)?;
    curvature_and_delta(cloud, list, &mut field);
    let force = surface_tension_force(&field, sigma)?;
    Ok(SurfaceTension { field, force, corrected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Material, PhaseRegion};
    use crate::scenarios::unit_square;

    fn two_phase(h: f64, region: PhaseRegion) -> ParticleCloud {
        let mut c = unit_square(h);
        c.liquid_region = region;
        c.gas = Material { rho: 1.0, mu: 1.0 };
        ParticleCloud::seed(&c).unwrap()
    }

    fn field(cloud: &ParticleCloud) -> (NeighborList, LsOperators, InterfaceField) {
        let list = cloud.neighbor_list().unwrap();
        let ops = LsOperators::build(cloud, &list).unwrap();
        let f = InterfaceField::new(cloud, &list, &ops, 3).unwrap();
        (list, ops, f)
    }

    #[test]
    fn single_phase_has_no_interface() {
        let cloud = two_phase(0.1, PhaseRegion::AllLiquid);
        let (list, _, mut f) = field(&cloud);
        assert!(f.color_smooth.iter().all(|&c| (c - 2.0).abs() < 1e-14));
        assert!(f.normal.iter().all(Option::is_none));
        curvature_and_delta(&cloud, &list, &mut f);
        assert!(surface_tension_force(&f, 0.07).unwrap().iter().all(|v| v.norm() < 1e-9));
    }

    #[test]
    fn planar_interface_normals_point_into_liquid() {
        let cloud = two_phase(0.08, PhaseRegion::HalfPlane { below_y: 0.5 });
        let (list, _, mut f) = field(&cloud);
        let mut checked = 0;
        for (i, p) in cloud.particles().iter().enumerate() {
            if let Some(n) = f.normal[i] {
                assert!((n.norm() - 1.0).abs() < 1e-12);
            }
            if !p.is_wall() && (p.position.y - 0.5).abs() < cloud.dx0() && (p.position.x - 0.5).abs() < 0.3 {
                let n = f.normal[i].unwrap();
                assert!(n.y < -0.99, "{n:?}");
                checked += 1;
            }
        }
        assert!(checked > 0);
        curvature_and_delta(&cloud, &list, &mut f);
        for (i, p) in cloud.particles().iter().enumerate() {
            if (p.position.y - 0.5).abs() < cloud.dx0() && (p.position.x - 0.5).abs() < 0.3 {
                assert!(f.kappa[i].abs() * cloud.h() <= 0.1, "{}", f.kappa[i]);
            }
        }
    }

    #[test]
    fn smoothed_color_is_monotone_across_a_planar_interface() {
        let cloud = two_phase(
            0.08,
            PhaseRegion::Rectangle {
                x_min: 0.0,
                x_max: 0.5,
                y_min: 0.0,
                y_max: 1.0,
            },
        );
        let (_, _, f) = field(&cloud);
        let row: Vec<(f64, f64)> = cloud
            .particles()
            .iter()
            .zip(&f.color_smooth)
            .filter(|(p, _)| (p.position.y - 0.5).abs() < 0.5 * cloud.dx0())
            .map(|(p, c)| (p.position.x, *c))
            .collect();
        assert!(row.len() > 10);
        assert!(row.windows(2).all(|w| w[0].0 < w[1].0 && w[1].1 <= w[0].1 + 1e-12));
        assert!(f.color_smooth.iter().all(|&c| (1.0..=2.0).contains(&c)));
    }

    #[test]
    fn contact_angle_sets_the_wall_dot_product() {
        let cloud = two_phase(
            0.08,
            PhaseRegion::Rectangle {
                x_min: 0.0,
                x_max: 0.5,
                y_min: 0.0,
                y_max: 1.0,
            },
        );
        let (list, _, f0) = field(&cloud);
        for deg in [5.0f64, 90.0, 150.0] {
            let theta = deg.to_radians();
            let mut f = f0.clone();
            let count = apply_contact_angle(&cloud, &list, &mut f, theta, 1.0).unwrap();
            assert!(count > 0);
            let contact = contact_wall_particles(&cloud, &list);
            assert!(!contact.is_empty());
            for &w in &contact {
                let n = cloud.particles()[w].wall_normal().unwrap();
                let dot = f.normal[w].unwrap().dot(&n);
                assert!((dot - theta.cos()).abs() < 1e-12, "{deg}: {dot}");
            }
        }
    }

    #[test]
    fn contact_angle_range_is_checked() {
        let cloud = two_phase(0.1, PhaseRegion::AllGas);
        let (list, _, mut f) = field(&cloud);
        assert!(matches!(
            apply_contact_angle(&cloud, &list, &mut f, 0.0, 1.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            apply_contact_angle(&cloud, &list, &mut f, 3.2, 1.0),
            Err(Error::Config(_))
        ));
        assert_eq!(apply_contact_angle(&cloud, &list, &mut f, 1.0, 1.0).unwrap(), 0);
        assert!(surface_tension_force(&f, -1.0).is_err());
    }

    #[test]
    fn disk_curvature_and_inward_force() {
        let r = 0.25;
        let cloud = two_phase(
            0.04,
            PhaseRegion::Semicircle {
                center: [0.5, 0.5],
                radius: r,
            },
        );
        let (list, _, mut f) = field(&cloud);
        curvature_and_delta(&cloud, &list, &mut f);
        let force = surface_tension_force(&f, 1.0).unwrap();
        let c = Vec2::new(0.5, 0.5);
        let mut kappa = Vec::new();
        for (i, p) in cloud.particles().iter().enumerate() {
            let d = p.position - c;
            if (d.norm() - r).abs() < 0.5 * cloud.dx0() {
                let radial = d / d.norm();
                assert!(f.normal[i].unwrap().dot(&-radial) > 0.98);
                assert!(force[i].normalize().dot(&-radial) > 0.9);
                kappa.push(f.kappa[i]);
            }
        }
        let mean = kappa.iter().sum::<f64>() / kappa.len() as f64;
        assert!((mean * r - 1.0).abs() < 0.15, "{mean}");
    }
}
