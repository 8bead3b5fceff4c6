//! Weighted least-squares derivative approximation and Shepard smoothing.
//!
//! For a particle at `x` with neighbors `x_j`, the five unknowns
//! `(d/dx, d/dy, d2/dx2, d2/dxdy, d2/dy2)` minimize
//! `sum_j w_j (M_j a - (psi_j - psi(x)))^2` with monomial rows
//! `M_j = (dx, dy, dx^2/2, dx dy, dy^2/2)`. Offsets are scaled by `h` before the
//! normal matrix is formed so that its entries are all of order one.
//!
//! Because the fit is linear in the data, each particle's solution can be
//! stored as one coefficient 5-vector per neighbor; [`LsOperators`] does this
//! once per time step so that every derivative is a sparse dot product.

use nalgebra::{SMatrix, SVector};
use rayon::prelude::*;

use crate::cloud::{Neighbor, NeighborList, ParticleCloud, MIN_NEIGHBORS};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Largest accepted 1-norm condition number of a normal matrix.
pub const MAX_CONDITION: f64 = 1.0e12;

type Mat5 = SMatrix<f64, 5, 5>;
type Vec5 = SVector<f64, 5>;

/// First and second derivatives of a scalar field at one particle.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DerivativeApprox {
    pub ddx: f64,
    pub ddy: f64,
    pub d2dx2: f64,
    pub d2dxdy: f64,
    pub d2dy2: f64,
}

impl DerivativeApprox {
    fn from_array(a: [f64; 5]) -> Self {
        Self {
            ddx: a[0],
            ddy: a[1],
            d2dx2: a[2],
            d2dxdy: a[3],
            d2dy2: a[4],
        }
    }

    pub fn gradient(&self) -> Vec2 {
        Vec2::new(self.ddx, self.ddy)
    }

    pub fn laplacian(&self) -> f64 {
        self.d2dx2 + self.d2dy2
    }
}

/// The overdetermined Taylor system of one particle in physical units.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSystem {
    /// Rows `(dx, dy, dx^2/2, dx dy, dy^2/2)`.
    pub m: Vec<[f64; 5]>,
    pub w: Vec<f64>,
    /// `psi_j - psi(x)`.
    pub b: Vec<f64>,
}

impl TaylorSystem {
    /// Builds the system for particle `i` from the cloud's current neighbors.
    pub fn from_cloud(cloud: &ParticleCloud, field: &[f64], i: usize) -> Result<Self> {
        let xi = cloud.particles()[i].position;
        let mut sys = TaylorSystem {
            m: Vec::new(),
            w: Vec::new(),
            b: Vec::new(),
        };
        for j in cloud.neighbors(i)? {
            let d = cloud.particles()[j].position - xi;
            sys.m.push(monomials(d.x, d.y));
            sys.w.push(cloud.weight(&cloud.particles()[j].position, &xi));
            sys.b.push(field[j] - field[i]);
        }
        Ok(sys)
    }

    /// Solves the weighted normal equations. `h` only sets the internal scaling.
    pub fn solve(&self, id: u64, h: f64) -> Result<DerivativeApprox> {
        let nbrs: Vec<Neighbor> = self
            .m
            .iter()
            .zip(&self.w)
            .enumerate()
            .map(|(j, (m, &w))| Neighbor { j, dx: m[0], dy: m[1], w })
            .collect();
        let mut coeffs = Vec::with_capacity(nbrs.len());
        derivative_weights(&nbrs, h, id, &mut coeffs)?;
        let mut a = [0.0; 5];
        for (c, b) in coeffs.iter().zip(&self.b) {
            for k in 0..5 {
                a[k] += c[k] * b;
            }
        }
        Ok(DerivativeApprox::from_array(a))
    }
}

fn monomials(dx: f64, dy: f64) -> [f64; 5] {
    [dx, dy, 0.5 * dx * dx, dx * dy, 0.5 * dy * dy]
}

pub(crate) fn norm1<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    (0..N).map(|c| m.column(c).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Per-neighbor coefficient vectors `c_j` such that derivative `k` equals
/// `sum_j c_j[k] (psi_j - psi_i)`. Appends to `out`.
pub(crate) fn derivative_weights(nbrs: &[Neighbor], h: f64, id: u64, out: &mut Vec<[f64; 5]>) -> Result<()> {
    if nbrs.len() < MIN_NEIGHBORS {
        return Err(Error::InsufficientStencil {
            id,
            found: nbrs.len(),
            required: MIN_NEIGHBORS,
        });
    }
    let inv_h = 1.0 / h;
    let mut a = Mat5::zeros();
    for n in nbrs {
        let m = Vec5::from(monomials(n.dx * inv_h, n.dy * inv_h));
        for c in 0..5 {
            let wm = n.w * m[c];
            for r in c..5 {
                a[(r, c)] += wm * m[r];
            }
        }
    }
    for c in 0..5 {
        for r in 0..c {
            a[(r, c)] = a[(c, r)];
        }
    }
    let inv = a.try_inverse().ok_or(Error::DegenerateStencil {
        id,
        condition: f64::INFINITY,
    })?;
    let condition = norm1(&a) * norm1(&inv);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::DegenerateStencil { id, condition });
    }
    let scale = [inv_h, inv_h, inv_h * inv_h, inv_h * inv_h, inv_h * inv_h];
    for n in nbrs {
        let m = Vec5::from(monomials(n.dx * inv_h, n.dy * inv_h)) * n.w;
        let c = inv * m;
        out.push(std::array::from_fn(|k| c[k] * scale[k]));
    }
    Ok(())
}

/// Least-squares fit of the five derivatives of `field` at particle `i`.
pub fn fit_derivatives(cloud: &ParticleCloud, field: &[f64], i: usize) -> Result<DerivativeApprox> {
    TaylorSystem::from_cloud(cloud, field, i)?.solve(cloud.particles()[i].id, cloud.h())
}

pub fn gradient(cloud: &ParticleCloud, field: &[f64], i: usize) -> Result<Vec2> {
    Ok(fit_derivatives(cloud, field, i)?.gradient())
}

pub fn laplacian(cloud: &ParticleCloud, field: &[f64], i: usize) -> Result<f64> {
    Ok(fit_derivatives(cloud, field, i)?.laplacian())
}

pub fn divergence(cloud: &ParticleCloud, vfield: &[Vec2], i: usize) -> Result<f64> {
    let u: Vec<f64> = vfield.iter().map(|v| v.x).collect();
    let v: Vec<f64> = vfield.iter().map(|v| v.y).collect();
    Ok(fit_derivatives(cloud, &u, i)?.ddx + fit_derivatives(cloud, &v, i)?.ddy)
}

/// Precomputed derivative coefficients for every particle of a cloud snapshot.
#[derive(Clone, Debug)]
pub struct LsOperators {
    offsets: Vec<usize>,
    nbr: Vec<usize>,
    coeffs: Vec<[f64; 5]>,
}

impl LsOperators {
    /// Fails on the lowest-index particle whose stencil is too small or degenerate.
    pub fn build(cloud: &ParticleCloud, list: &NeighborList) -> Result<Self> {
        let h = cloud.h();
        let per: Vec<Result<Vec<[f64; 5]>>> = (0..list.len())
            .into_par_iter()
            .map(|i| {
                let mut c = Vec::with_capacity(list.of(i).len());
                derivative_weights(list.of(i), h, cloud.particles()[i].id, &mut c).map(|_| c)
            })
            .collect();
        let mut offsets = Vec::with_capacity(list.len() + 1);
        offsets.push(0);
        let mut nbr = Vec::with_capacity(list.total_pairs());
        let mut coeffs = Vec::with_capacity(list.total_pairs());
        for (i, c) in per.into_iter().enumerate() {
            coeffs.extend(c?);
            nbr.extend(list.of(i).iter().map(|n| n.j));
            offsets.push(nbr.len());
        }
        Ok(Self { offsets, nbr, coeffs })
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn derivatives(&self, field: &[f64], i: usize) -> DerivativeApprox {
        let mut a = [0.0; 5];
        let fi = field[i];
        for k in self.offsets[i]..self.offsets[i + 1] {
            let d = field[self.nbr[k]] - fi;
            let c = &self.coeffs[k];
            for (ak, ck) in a.iter_mut().zip(c) {
                *ak += ck * d;
            }
        }
        DerivativeApprox::from_array(a)
    }

    pub fn gradient(&self, field: &[f64], i: usize) -> Vec2 {
        let fi = field[i];
        let mut g = Vec2::zeros();
        for k in self.offsets[i]..self.offsets[i + 1] {
            let d = field[self.nbr[k]] - fi;
            g.x += self.coeffs[k][0] * d;
            g.y += self.coeffs[k][1] * d;
        }
        g
    }

    pub fn derivatives_field(&self, field: &[f64]) -> Vec<DerivativeApprox> {
        (0..self.len()).into_par_iter().map(|i| self.derivatives(field, i)).collect()
    }

    pub fn gradient_field(&self, field: &[f64]) -> Vec<Vec2> {
        (0..self.len()).into_par_iter().map(|i| self.gradient(field, i)).collect()
    }

    pub fn divergence(&self, v: &[Vec2], i: usize) -> f64 {
        let vi = v[i];
        let mut div = 0.0;
        for k in self.offsets[i]..self.offsets[i + 1] {
            let d = v[self.nbr[k]] - vi;
            div += self.coeffs[k][0] * d.x + self.coeffs[k][1] * d.y;
        }
        div
    }

    pub fn divergence_field(&self, v: &[Vec2]) -> Vec<f64> {
        (0..self.len()).into_par_iter().map(|i| self.divergence(v, i)).collect()
    }
}

/// Shepard smoothing over the cloud's neighbor lists, self included.
pub fn shepard_smooth(cloud: &ParticleCloud, field: &[f64], iterations: usize) -> Result<Vec<f64>> {
    let list = cloud.neighbor_list()?;
    shepard_smooth_with(cloud, &list, field, iterations, None)
}

/// Shepard smoothing where only particles with `source[j] == true` contribute.
/// Particles that are not sources still receive the average of their source
/// neighbors.
pub fn shepard_smooth_with(
    cloud: &ParticleCloud,
    list: &NeighborList,
    field: &[f64],
    iterations: usize,
    source: Option<&[bool]>,
) -> Result<Vec<f64>> {
    if iterations == 0 {
        return Err(Error::Config("Shepard smoothing needs at least one iteration".into()));
    }
    let is_source = |j: usize| source.is_none_or(|s| s[j]);
    let mut current = field.to_vec();
    for _ in 0..iterations {
        let next: Vec<Result<f64>> = (0..list.len())
            .into_par_iter()
            .map(|i| {
                let (mut num, mut den) = if is_source(i) { (current[i], 1.0) } else { (0.0, 0.0) };
                for n in list.of(i) {
                    if is_source(n.j) {
                        num += n.w * current[n.j];
                        den += n.w;
                    }
                }
                if den > 0.0 {
                    Ok(num / den)
                } else {
                    Err(Error::EmptyNeighborhood {
                        id: cloud.particles()[i].id,
                    })
                }
            })
            .collect();
        current = next.into_iter().collect::<Result<_>>()?;
    }
    Ok(current)
}

type Mat6 = SMatrix<f64, 6, 6>;
type Vec6 = SVector<f64, 6>;

/// Values of several fields at an arbitrary point, fitted by weighted least
/// squares with a constant term over the particles within `h` (excluding
/// `exclude`). Falls back to a Shepard average when the fit is not
/// well-posed. Returns `None` when no particle lies within `2h`.
pub fn interpolate_at(cloud: &ParticleCloud, point: &Vec2, exclude: &[usize], fields: &[&[f64]]) -> Result<Option<Vec<f64>>> {
    let h = cloud.h();
    let near: Vec<usize> = cloud.within(point, h)?.into_iter().filter(|j| !exclude.contains(j)).collect();
    if near.len() >= 6 {
        let mut a = Mat6::zeros();
        let mut rows = Vec::with_capacity(near.len());
        for &j in &near {
            let xj = cloud.particles()[j].position;
            let d = (xj - point) / h;
            let m = Vec6::new(1.0, d.x, d.y, 0.5 * d.x * d.x, d.x * d.y, 0.5 * d.y * d.y);
            let w = cloud.weight(&xj, point);
            a += m * m.transpose() * w;
            rows.push(m * w);
        }
        if let Some(inv) = a.try_inverse() {
            if norm1(&a) * norm1(&inv) <= MAX_CONDITION {
                let q: Vec<f64> = rows.iter().map(|r| (inv * r)[0]).collect();
                let values = fields.iter().map(|f| near.iter().zip(&q).map(|(&j, qj)| qj * f[j]).sum()).collect();
                return Ok(Some(values));
            }
        }
    }
    let wide: Vec<usize> = cloud.within(point, 2.0 * h)?.into_iter().filter(|j| !exclude.contains(j)).collect();
    if wide.is_empty() {
        return Ok(None);
    }
    let weights: Vec<f64> = wide
        .iter()
        .map(|&j| {
            let r2 = (cloud.particles()[j].position - point).norm_squared();
            (-cloud.alpha() * r2 / (4.0 * h * h)).exp()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(Some(
        fields
            .iter()
            .map(|f| wide.iter().zip(&weights).map(|(&j, w)| w * f[j]).sum::<f64>() / total)
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Material;
    use crate::geometry::Rect;
    use crate::particle::{Particle, Phase};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const M: Material = Material { rho: 1.0, mu: 1.0 };

    fn cloud(points: &[Vec2], h: f64) -> ParticleCloud {
        let ps = points
            .iter()
            .enumerate()
            .map(|(i, p)| Particle::interior(i as u64, *p, Phase::Liquid, M))
            .collect();
        ParticleCloud::new(ps, Rect::new(-10.0, 10.0, -10.0, 10.0), h, h / 3.0)
    }

    fn random_stencil(rng: &mut ChaCha8Rng, center: Vec2, h: f64, m: usize) -> Vec<Vec2> {
        let mut pts = vec![center];
        while pts.len() < m + 1 {
            let d = Vec2::new(rng.gen_range(-h..h), rng.gen_range(-h..h));
            if d.norm() < 0.95 * h && d.norm() > 0.05 * h {
                pts.push(center + d);
            }
        }
        pts
    }

    #[test]
    fn linear_and_quadratic_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = random_stencil(&mut rng, Vec2::new(0.3, 0.2), 0.1, 12);
        let c = cloud(&pts, 0.1);
        let lin: Vec<f64> = pts.iter().map(|p| 3.0 * p.x - 2.0 * p.y).collect();
        let d = fit_derivatives(&c, &lin, 0).unwrap();
        assert!((d.ddx - 3.0).abs() < 1e-9 && (d.ddy + 2.0).abs() < 1e-9);
        assert!(d.d2dx2.abs() < 1e-7 && d.d2dxdy.abs() < 1e-7 && d.d2dy2.abs() < 1e-7);
        let quad: Vec<f64> = pts.iter().map(|p| p.x * p.x + p.y * p.y).collect();
        assert!((laplacian(&c, &quad, 0).unwrap() - 4.0).abs() < 1e-8);
        let saddle: Vec<f64> = pts.iter().map(|p| p.x * p.x - p.y * p.y).collect();
        assert!(laplacian(&c, &saddle, 0).unwrap().abs() < 1e-8);
    }

    #[test]
    fn gradient_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = random_stencil(&mut rng, Vec2::new(1.0, 2.0), 0.2, 15);
        let c = cloud(&pts, 0.2);
        let f: Vec<f64> = pts.iter().map(|p| p.x * p.y).collect();
        let g = gradient(&c, &f, 0).unwrap();
        assert!((g - Vec2::new(2.0, 1.0)).norm() < 1e-9);
        let v: Vec<Vec2> = pts.iter().map(|p| Vec2::new(p.x, -p.y)).collect();
        assert!(divergence(&c, &v, 0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn too_few_neighbors() {
        let pts = [Vec2::zeros(), Vec2::new(0.01, 0.0), Vec2::new(0.0, 0.01)];
        let c = cloud(&pts, 0.1);
        let err = fit_derivatives(&c, &[0.0; 3], 0).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientStencil {
                id: 0,
                found: 2,
                required: 5
            }
        ));
    }

    #[test]
    fn collinear_stencil_is_degenerate() {
        let pts: Vec<Vec2> = (0..8).map(|k| Vec2::new(0.01 * k as f64, 0.0)).collect();
        let c = cloud(&pts, 0.1);
        let err = fit_derivatives(&c, &[0.0; 8], 3).unwrap_err();
        assert!(matches!(err, Error::DegenerateStencil { id: 3, .. }));
    }

    #[test]
    fn precomputed_operators_match_direct_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec2> = (0..400).map(|_| Vec2::new(rng.gen(), rng.gen())).collect();
        let c = cloud(&pts, 0.15);
        let ops = LsOperators::build(&c, &c.neighbor_list().unwrap()).unwrap();
        let f: Vec<f64> = pts.iter().map(|p| (3.0 * p.x).sin() * p.y).collect();
        for i in (0..pts.len()).step_by(37) {
            let a = fit_derivatives(&c, &f, i).unwrap();
            let b = ops.derivatives(&f, i);
            assert!((a.ddx - b.ddx).abs() < 1e-9 && (a.d2dy2 - b.d2dy2).abs() < 1e-6);
            assert!((ops.gradient(&f, i) - a.gradient()).norm() < 1e-9);
        }
    }

    #[test]
    fn shepard_hand_computed_mean() {
        let h = 0.1;
        let pts = [
            Vec2::zeros(),
            Vec2::new(0.05, 0.0),
            Vec2::new(0.0, 0.05),
            Vec2::new(-0.08, 0.0),
            Vec2::new(0.0, -0.1),
        ];
        let values = [1.0, 2.0, 3.0, 4.0, 5.0];
        let c = cloud(&pts, h);
        let out = shepard_smooth(&c, &values, 1).unwrap();
        let w = |r: f64| (-6.25f64 * r * r / (h * h)).exp();
        let (ws, fs) = ([1.0, w(0.05), w(0.05), w(0.08), w(0.1)], values);
        let expected = ws.iter().zip(fs).map(|(w, f)| w * f).sum::<f64>() / ws.iter().sum::<f64>();
        assert!((out[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn shepard_constant_and_step() {
        let h = 0.06;
        let mut pts = Vec::new();
        for j in 0..30 {
            for i in 0..30 {
                pts.push(Vec2::new(i as f64 * 0.02, j as f64 * 0.02));
            }
        }
        let c = cloud(&pts, h);
        let ones = vec![1.5; pts.len()];
        assert!(shepard_smooth(&c, &ones, 4).unwrap().iter().all(|v| (v - 1.5).abs() < 1e-14));
        let step: Vec<f64> = pts.iter().map(|p| if p.x < 0.3 { 1.0 } else { 2.0 }).collect();
        let s = shepard_smooth(&c, &step, 3).unwrap();
        for (p, v) in pts.iter().zip(&s) {
            let dist = (p.x - 0.29).abs().min((p.x - 0.3).abs());
            if dist <= h - 1e-12 {
                assert!(*v > 1.0 && *v < 2.0);
            } else if (p.x - 0.295).abs() > 3.0 * h + 0.01 {
                assert!(*v == 1.0 || *v == 2.0);
            }
        }
        assert!(shepard_smooth(&c, &step, 0).is_err());
    }

    #[test]
    fn shepard_mask_isolated_non_source_fails() {
        let pts = [Vec2::zeros(), Vec2::new(5.0, 5.0)];
        let c = cloud(&pts, 0.1);
        let list = c.neighbor_list().unwrap();
        let err = shepard_smooth_with(&c, &list, &[1.0, 2.0], 1, Some(&[false, true])).unwrap_err();
        assert!(matches!(err, Error::EmptyNeighborhood { id: 0 }));
    }

    #[test]
    fn interpolation_reproduces_quadratics() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<Vec2> = (0..300).map(|_| Vec2::new(rng.gen(), rng.gen())).collect();
        let c = cloud(&pts, 0.2);
        let f: Vec<f64> = pts.iter().map(|p| 1.0 + p.x - 2.0 * p.y * p.x + p.y * p.y).collect();
        let x = Vec2::new(0.5, 0.4);
        let v = interpolate_at(&c, &x, &[], &[&f]).unwrap().unwrap();
        assert!((v[0] - (1.0 + 0.5 - 0.4 + 0.16)).abs() < 1e-9);
        let far = Vec2::new(9.0, 9.0);
        assert!(interpolate_at(&c, &far, &[], &[&f]).unwrap().is_none());
    }
}
