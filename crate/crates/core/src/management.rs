//! Particle management: merging near-coincident particles and filling voids.

use crate::cloud::ParticleCloud;
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::ls::interpolate_at;
use crate::particle::{Particle, Phase};
use crate::Vec2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ManagementReport {
    pub added: usize,
    pub removed: usize,
}

fn fields(ps: &[Particle]) -> [Vec<f64>; 3] {
    [
        ps.iter().map(|p| p.velocity.x).collect(),
        ps.iter().map(|p| p.velocity.y).collect(),
        ps.iter().map(|p| p.pressure).collect(),
    ]
}

fn spawn(
    cloud: &ParticleCloud,
    config: &ScenarioConfig,
    id: u64,
    at: Vec2,
    phase: Phase,
    exclude: &[usize],
    f: &[Vec<f64>; 3],
) -> Result<Particle> {
    let refs = [f[0].as_slice(), f[1].as_slice(), f[2].as_slice()];
    let v = interpolate_at(cloud, &at, exclude, &refs)?.ok_or(Error::UnfillableVoid { x: at.x, y: at.y })?;
    let mut p = Particle::interior(id, at, phase, config.material(phase));
    p.velocity = Vec2::new(v[0], v[1]);
    p.pressure = v[2];
    Ok(p)
}

/// Merges same-phase interior pairs closer than `merge_factor * dx0` into one
/// particle at the midpoint, then inserts a particle at the centre of every
/// `dx0` grid cell with no particle within `dx0` of that centre. New particles
/// get fresh ids, take the phase of the nearest interior particle, and have
/// velocity and pressure interpolated from the surrounding particles.
///
/// Expects a current spatial index; leaves the index current.
pub fn manage_particles(cloud: &mut ParticleCloud, config: &ScenarioConfig) -> Result<ManagementReport> {
    let mut report = ManagementReport::default();
    let dx0 = cloud.dx0();
    let d_merge = config.numerics.merge_factor * dx0;

    // merges
    let mut merged = vec![false; cloud.len()];
    let mut pairs = Vec::new();
    {
        let ps = cloud.particles();
        for i in 0..ps.len() {
            if merged[i] || ps[i].is_wall() {
                continue;
            }
            for j in cloud.within(&ps[i].position, d_merge)? {
                if j > i && !merged[j] && !ps[j].is_wall() && ps[j].phase() == ps[i].phase() {
                    merged[i] = true;
                    merged[j] = true;
                    pairs.push((i, j));
                    break;
                }
            }
        }
    }
    let mut new_particles = Vec::new();
    if !pairs.is_empty() {
        let f = fields(cloud.particles());
        for &(i, j) in &pairs {
            let (a, b) = (&cloud.particles()[i], &cloud.particles()[j]);
            let mid = (a.position + b.position) * 0.5;
            let phase = a.phase();
            let id = cloud.take_next_id();
            new_particles.push(spawn(cloud, config, id, mid, phase, &[i, j], &f)?);
        }
        report.removed = 2 * pairs.len();
        report.added = pairs.len();
        let mut kept: Vec<Particle> = cloud
            .particles()
            .iter()
            .zip(&merged)
            .filter(|(_, m)| !**m)
            .map(|(p, _)| p.clone())
            .collect();
        kept.append(&mut new_particles);
        cloud.replace_particles(kept);
        cloud.rebuild_index();
    }

    // voids
    let domain = *cloud.domain();
    let nx = (domain.width() / dx0).floor().max(1.0) as usize;
    let ny = (domain.height() / dx0).floor().max(1.0) as usize;
    let (sx, sy) = (domain.width() / nx as f64, domain.height() / ny as f64);
    let mut holes = Vec::new();
    for cy in 0..ny {
        for cx in 0..nx {
            let c = Vec2::new(domain.x_min + (cx as f64 + 0.5) * sx, domain.y_min + (cy as f64 + 0.5) * sy);
            if cloud.within(&c, dx0)?.is_empty() {
                holes.push(c);
            }
        }
    }
    if !holes.is_empty() {
        let f = fields(cloud.particles());
        let mut spawned = Vec::with_capacity(holes.len());
        for c in holes {
            let phase = nearest_interior_phase(cloud, &c)?.ok_or(Error::UnfillableVoid { x: c.x, y: c.y })?;
            let id = cloud.take_next_id();
            spawned.push(spawn(cloud, config, id, c, phase, &[], &f)?);
        }
        report.added += spawned.len();
        let mut all = cloud.particles().to_vec();
        all.append(&mut spawned);
        cloud.replace_particles(all);
        cloud.rebuild_index();
    }
    Ok(report)
}

fn nearest_interior_phase(cloud: &ParticleCloud, c: &Vec2) -> Result<Option<Phase>> {
    let ps = cloud.particles();
    Ok(cloud
        .within(c, 2.0 * cloud.h())?
        .into_iter()
        .filter(|&j| !ps[j].is_wall())
        .map(|j| ((ps[j].position - c).norm_squared(), j))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, j)| ps[j].phase()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::unit_square;

    fn config() -> ScenarioConfig {
        unit_square(0.1)
    }

    #[test]
    fn regular_lattice_is_left_alone() {
        let c = config();
        let mut cloud = ParticleCloud::seed(&c).unwrap();
        let before = cloud.len();
        assert_eq!(manage_particles(&mut cloud, &c).unwrap(), ManagementReport::default());
        assert_eq!(cloud.len(), before);
    }

    #[test]
    fn coincident_pair_is_merged_at_the_midpoint() {
        let c = config();
        let seeded = ParticleCloud::seed(&c).unwrap();
        let mut ps = seeded.particles().to_vec();
        for p in ps.iter_mut() {
            p.velocity = Vec2::new(1.0 + p.position.x, 2.0 * p.position.y);
        }
        let i = ps
            .iter()
            .position(|p| !p.is_wall() && (p.position - Vec2::new(0.5, 0.5)).norm() < 0.02)
            .unwrap();
        let mut twin = ps[i].clone();
        twin.id = 10_000;
        twin.position += Vec2::new(0.001, 0.0);
        let expected = ps[i].position + Vec2::new(0.0005, 0.0);
        ps.push(twin);
        let mut cloud = ParticleCloud::new(ps, c.domain, seeded.h(), seeded.dx0());
        let n = cloud.len();
        let r = manage_particles(&mut cloud, &c).unwrap();
        assert_eq!((r.added, r.removed), (1, 2));
        assert_eq!(cloud.len(), n - 1);
        let p = cloud.particles().last().unwrap();
        assert!(p.id > 10_000);
        assert!((p.position - expected).norm() < 1e-15);
        // linear velocity field is reproduced by the interpolation
        assert!((p.velocity - Vec2::new(1.0 + expected.x, 2.0 * expected.y)).norm() < 1e-10);
    }

    #[test]
    fn different_phases_never_merge() {
        let mut c = config();
        c.liquid_region = crate::config::PhaseRegion::HalfPlane { below_y: 0.5 };
        let seeded = ParticleCloud::seed(&c).unwrap();
        let mut ps = seeded.particles().to_vec();
        let i = ps.iter().position(|p| !p.is_wall() && p.phase() == Phase::Liquid).unwrap();
        let twin = Particle::interior(10_000, ps[i].position + Vec2::new(1e-4, 0.0), Phase::Gas, c.gas);
        ps.push(twin);
        let mut cloud = ParticleCloud::new(ps, c.domain, seeded.h(), seeded.dx0());
        let r = manage_particles(&mut cloud, &c).unwrap();
        assert_eq!(r.removed, 0);
    }

    #[test]
    fn hole_is_refilled() {
        let c = config();
        let seeded = ParticleCloud::seed(&c).unwrap();
        let dx = seeded.dx0();
        let centre = Vec2::new(0.5, 0.5);
        let ps: Vec<Particle> = seeded
            .particles()
            .iter()
            .filter(|p| (p.position.x - centre.x).abs() > 1.5 * dx || (p.position.y - centre.y).abs() > 1.5 * dx)
            .cloned()
            .collect();
        assert_eq!(ps.len(), seeded.len() - 9);
        let mut cloud = ParticleCloud::new(ps, c.domain, seeded.h(), dx);
        let r = manage_particles(&mut cloud, &c).unwrap();
        assert!(r.added >= 1);
        assert!(cloud
            .particles()
            .iter()
            .any(|p| (p.position.x - centre.x).abs() < 1.5 * dx && (p.position.y - centre.y).abs() < 1.5 * dx));
    }

    #[test]
    fn isolated_hole_is_unfillable() {
        let c = config();
        let seeded = ParticleCloud::seed(&c).unwrap();
        let ps: Vec<Particle> = seeded.particles().iter().take(3).cloned().collect();
        let mut cloud = ParticleCloud::new(ps, c.domain, seeded.h(), seeded.dx0());
        assert!(matches!(manage_particles(&mut cloud, &c), Err(Error::UnfillableVoid { .. })));
    }
}
