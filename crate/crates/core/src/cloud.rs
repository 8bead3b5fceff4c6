//! Particle storage, lattice seeding, the Gaussian weight and fixed-radius
//! neighbor search over a uniform hash grid with cells of side `h`.

use rayon::prelude::*;

use crate::config::{ScenarioConfig, DEFAULT_ALPHA};
use crate::error::{Error, Result};
use crate::geometry::{Rect, Vec2};
use crate::particle::{Particle, ParticleKind};

/// Minimum number of neighbors for a second-order least-squares stencil.
pub const MIN_NEIGHBORS: usize = 5;

/// Gaussian weight `exp(-alpha |xj - x|^2 / h^2)` with compact support `|xj - x| <= h`.
pub fn weight_with_alpha(xj: &Vec2, x: &Vec2, h: f64, alpha: f64) -> f64 {
    let r2 = (xj - x).norm_squared();
    if r2 <= h * h {
        (-alpha * r2 / (h * h)).exp()
    } else {
        0.0
    }
}

/// [`weight_with_alpha`] with the default `alpha = 6.25`.
pub fn weight(xj: &Vec2, x: &Vec2, h: f64) -> f64 {
    weight_with_alpha(xj, x, h, DEFAULT_ALPHA)
}

#[derive(Clone, Debug, Default)]
struct SpatialIndex {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    cell_start: Vec<usize>,
    entries: Vec<usize>,
    generation: Option<u64>,
}

impl SpatialIndex {
    fn build(positions: &[Vec2], domain: &Rect, cell: f64, generation: u64) -> Self {
        let nx = ((domain.width() / cell).floor() as usize + 1).max(1);
        let ny = ((domain.height() / cell).floor() as usize + 1).max(1);
        let mut index = SpatialIndex {
            origin: Vec2::new(domain.x_min, domain.y_min),
            cell,
            nx,
            ny,
            cell_start: vec![0; nx * ny + 1],
            entries: vec![0; positions.len()],
            generation: Some(generation),
        };
        let cells: Vec<usize> = positions.iter().map(|p| index.cell_id(p)).collect();
        for &c in &cells {
            index.cell_start[c + 1] += 1;
        }
        for c in 0..nx * ny {
            index.cell_start[c + 1] += index.cell_start[c];
        }
        let mut fill = index.cell_start.clone();
        for (i, &c) in cells.iter().enumerate() {
            index.entries[fill[c]] = i;
            fill[c] += 1;
        }
        index
    }

    fn cell_coords(&self, p: &Vec2) -> (isize, isize) {
        let cx = ((p.x - self.origin.x) / self.cell).floor() as isize;
        let cy = ((p.y - self.origin.y) / self.cell).floor() as isize;
        (cx.clamp(0, self.nx as isize - 1), cy.clamp(0, self.ny as isize - 1))
    }

    fn cell_id(&self, p: &Vec2) -> usize {
        let (cx, cy) = self.cell_coords(p);
        cy as usize * self.nx + cx as usize
    }

    /// Calls `f` for every particle in cells overlapping the disk of radius `r` around `p`.
    fn for_each_candidate(&self, p: &Vec2, r: f64, mut f: impl FnMut(usize)) {
        let reach = (r / self.cell).ceil() as isize;
        let (cx, cy) = self.cell_coords(p);
        let x0 = (cx - reach).max(0);
        let x1 = (cx + reach).min(self.nx as isize - 1);
        let y0 = (cy - reach).max(0);
        let y1 = (cy + reach).min(self.ny as isize - 1);
        for y in y0..=y1 {
            let row = y as usize * self.nx;
            for x in x0..=x1 {
                let c = row + x as usize;
                for &i in &self.entries[self.cell_start[c]..self.cell_start[c + 1]] {
                    f(i);
                }
            }
        }
    }
}

/// All particles, the interaction radius and the spatial index.
///
/// Particles are kept sorted by id, so particle indices and ids order identically.
#[derive(Clone, Debug)]
pub struct ParticleCloud {
    particles: Vec<Particle>,
    h: f64,
    dx0: f64,
    alpha: f64,
    domain: Rect,
    index: SpatialIndex,
    generation: u64,
    next_id: u64,
}

impl ParticleCloud {
    /// Builds a cloud from explicit particles and indexes it.
    pub fn new(mut particles: Vec<Particle>, domain: Rect, h: f64, dx0: f64) -> Self {
        particles.sort_by_key(|p| p.id);
        let next_id = particles.last().map_or(0, |p| p.id + 1);
        let mut cloud = Self {
            particles,
            h,
            dx0,
            alpha: DEFAULT_ALPHA,
            domain,
            index: SpatialIndex::default(),
            generation: 0,
            next_id,
        };
        cloud.rebuild_index();
        cloud
    }

    /// Seeds a regular lattice with spacing close to `h / spacing_ratio` and one
    /// layer of wall particles on the four domain walls.
    pub fn seed(config: &ScenarioConfig) -> Result<Self> {
        let d = config.domain;
        let h = config.numerics.h;
        if !(h > 0.0) {
            return Err(Error::Config(format!("interaction radius h = {h} must be positive")));
        }
        if !(d.width() >= 3.0 * h && d.height() >= 3.0 * h) {
            return Err(Error::Config(format!(
                "domain {} x {} is smaller than 3h = {} in some direction",
                d.width(),
                d.height(),
                3.0 * h
            )));
        }
        let target = h / config.numerics.spacing_ratio;
        let nx = ((d.width() / target).round() as usize).max(2);
        let ny = ((d.height() / target).round() as usize).max(2);
        let sx = d.width() / nx as f64;
        let sy = d.height() / ny as f64;

        let mut particles = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                let id = (j * (nx + 1) + i) as u64;
                let pos = Vec2::new(d.x_min + i as f64 * sx, d.y_min + j as f64 * sy);
                let phase = config.liquid_region.phase_at(&pos);
                let material = config.material(phase);
                let mut normal = Vec2::zeros();
                if i == 0 {
                    normal.x -= 1.0;
                }
                if i == nx {
                    normal.x += 1.0;
                }
                if j == 0 {
                    normal.y -= 1.0;
                }
                if j == ny {
                    normal.y += 1.0;
                }
                particles.push(if normal == Vec2::zeros() {
                    Particle::interior(id, pos, phase, material)
                } else {
                    Particle::wall(id, pos, normal, phase, material)
                });
            }
        }
        let mut cloud = Self::new(particles, d, h, (sx * sy).sqrt());
        cloud.alpha = config.numerics.alpha;
        Ok(cloud)
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    /// Mutable access; marks the spatial index stale.
    pub fn particles_mut(&mut self) -> &mut [Particle] {
        self.generation += 1;
        &mut self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Initial lattice spacing.
    pub fn dx0(&self) -> f64 {
        self.dx0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha;
    }

    pub fn domain(&self) -> &Rect {
        &self.domain
    }

    pub fn weight(&self, xj: &Vec2, x: &Vec2) -> f64 {
        weight_with_alpha(xj, x, self.h, self.alpha)
    }

    /// Index of the particle with the given id.
    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.particles.binary_search_by_key(&id, |p| p.id).ok()
    }

    pub fn is_index_current(&self) -> bool {
        self.index.generation == Some(self.generation)
    }

    pub fn rebuild_index(&mut self) {
        let positions: Vec<Vec2> = self.particles.iter().map(|p| p.position).collect();
        self.index = SpatialIndex::build(&positions, &self.domain, self.h, self.generation);
    }

    /// Indices `j != i` with `|x_j - x_i| <= h`, ascending.
    pub fn neighbors(&self, i: usize) -> Result<Vec<usize>> {
        let p = self.particles[i].position;
        let mut out = self.within(&p, self.h)?;
        out.retain(|&j| j != i);
        Ok(out)
    }

    /// Indices of all particles within `r` of an arbitrary point, ascending.
    pub fn within(&self, p: &Vec2, r: f64) -> Result<Vec<usize>> {
        if !self.is_index_current() {
            return Err(Error::StaleIndex);
        }
        let r2 = r * r;
        let mut out = Vec::new();
        self.index.for_each_candidate(p, r, |j| {
            if (self.particles[j].position - p).norm_squared() <= r2 {
                out.push(j);
            }
        });
        out.sort_unstable();
        Ok(out)
    }

    /// Neighbor lists of every particle with offsets and weights.
    pub fn neighbor_list(&self) -> Result<NeighborList> {
        if !self.is_index_current() {
            return Err(Error::StaleIndex);
        }
        let h2 = self.h * self.h;
        let per_particle: Vec<Vec<Neighbor>> = (0..self.particles.len())
            .into_par_iter()
            .map(|i| {
                let xi = self.particles[i].position;
                let mut list = Vec::with_capacity(32);
                self.index.for_each_candidate(&xi, self.h, |j| {
                    if j == i {
                        return;
                    }
                    let d = self.particles[j].position - xi;
                    let r2 = d.norm_squared();
                    if r2 <= h2 {
                        list.push(Neighbor {
                            j,
                            dx: d.x,
                            dy: d.y,
                            w: (-self.alpha * r2 / h2).exp(),
                        });
                    }
                });
                list.sort_unstable_by_key(|n| n.j);
                list
            })
            .collect();
        let mut offsets = Vec::with_capacity(per_particle.len() + 1);
        offsets.push(0);
        let mut entries = Vec::with_capacity(per_particle.iter().map(Vec::len).sum());
        for list in per_particle {
            entries.extend(list);
            offsets.push(entries.len());
        }
        Ok(NeighborList { offsets, entries })
    }

    pub(crate) fn take_next_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Replaces the particle set (used by particle management); the index becomes stale.
    pub(crate) fn replace_particles(&mut self, particles: Vec<Particle>) {
        debug_assert!(particles.windows(2).all(|w| w[0].id < w[1].id));
        self.particles = particles;
        self.generation += 1;
    }

    pub fn count_kind(&self, kind: ParticleKind) -> usize {
        self.particles.iter().filter(|p| p.kind() == kind).count()
    }
}

/// One entry of a neighbor list: index, offset `x_j - x_i` and weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub j: usize,
    pub dx: f64,
    pub dy: f64,
    pub w: f64,
}

/// Compressed neighbor lists for all particles of a cloud snapshot.
#[derive(Clone, Debug, Default)]
pub struct NeighborList {
    offsets: Vec<usize>,
    entries: Vec<Neighbor>,
}

impl NeighborList {
    pub fn of(&self, i: usize) -> &[Neighbor] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Start of particle `i`'s entries in the flattened pair arrays.
    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn total_pairs(&self) -> usize {
        self.entries.len()
    }
}
