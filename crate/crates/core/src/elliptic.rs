//! Constrained least-squares discretization of `B . grad(psi) + C lap(psi) = f`
//! and the Gauss-Seidel solver for the resulting sparse system.
//!
//! At particle `i` the six Taylor coefficients `a = (psi, psi_x, psi_y, psi_xx,
//! psi_xy, psi_yy)` are fitted to the neighbor values with Gaussian weights,
//! subject to one extra row: the PDE itself at interior particles, or
//! `n . grad(psi) = phi` at Neumann particles. The extra row has unit weight.
//! Since the fitted `psi_i = a_0` is linear in the neighbor values and in the
//! datum, each particle contributes the row
//! `psi_i - sum_j s_j psi_j = r_i`, with `s_j = w_j (q . m_j)` where `q` is the
//! first column of the inverse augmented normal matrix.
//!
//! The augmented matrix is `N + W c c^T`, so `q` is obtained from the
//! neighbor-only matrix `N` by a rank-one update. When `N` itself is singular
//! (very small or symmetric stencils) the augmented matrix is pseudo-inverted
//! and accepted only if `a_0` is still uniquely determined.

use nalgebra::{SMatrix, SVector};
use rayon::prelude::*;

use crate::cloud::{Neighbor, NeighborList, ParticleCloud};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::ls::{norm1, LsOperators, MAX_CONDITION};

type Mat6 = SMatrix<f64, 6, 6>;
type Vec6 = SVector<f64, 6>;

/// Minimum neighbors for an elliptic row; the constraint supplies one more equation.
pub const MIN_ELLIPTIC_NEIGHBORS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryCondition {
    Interior,
    Dirichlet(f64),
    /// `n . grad(psi) = value` with unit normal `normal`.
    Neumann {
        normal: Vec2,
        value: f64,
    },
}

/// Row `diag * psi_i + sum coeff_j psi_j = rhs`. Neighbor entries are particle indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRow {
    pub diag: f64,
    pub neighbor_coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl SparseRow {
    pub fn identity(rhs: f64) -> Self {
        Self {
            diag: 1.0,
            neighbor_coeffs: Vec::new(),
            rhs,
        }
    }

    /// `rhs - (diag psi_i + sum coeff_j psi_j)`.
    pub fn residual(&self, i: usize, psi: &[f64]) -> f64 {
        self.rhs - self.diag * psi[i] - self.neighbor_coeffs.iter().map(|&(j, c)| c * psi[j]).sum::<f64>()
    }
}

/// PDE coefficients at one particle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdeCoefficients {
    pub b: Vec2,
    pub c: f64,
    pub f: f64,
}

fn monomials(xi: f64, eta: f64) -> Vec6 {
    Vec6::new(1.0, xi, eta, 0.5 * xi * xi, xi * eta, 0.5 * eta * eta)
}

/// Builds a row from explicit neighbor offsets.
pub fn assemble_row_from(nbrs: &[Neighbor], h: f64, id: u64, pde: PdeCoefficients, bc: BoundaryCondition) -> Result<SparseRow> {
    // In scaled offsets (dx/h, dy/h) the constraint and its datum pick up
    // powers of h; the weight compensates so the constraint keeps unit weight
    // in physical units.
    let (c, weight, datum) = match bc {
        BoundaryCondition::Dirichlet(g) => return Ok(SparseRow::identity(g)),
        BoundaryCondition::Interior => (
            Vec6::new(0.0, pde.b.x * h, pde.b.y * h, pde.c, 0.0, pde.c),
            1.0 / (h * h * h * h),
            pde.f * h * h,
        ),
        BoundaryCondition::Neumann { normal, value } => (Vec6::new(0.0, normal.x, normal.y, 0.0, 0.0, 0.0), 1.0 / (h * h), value * h),
    };
    if nbrs.len() < MIN_ELLIPTIC_NEIGHBORS {
        return Err(Error::InsufficientStencil {
            id,
            found: nbrs.len(),
            required: MIN_ELLIPTIC_NEIGHBORS,
        });
    }
    let inv_h = 1.0 / h;
    let mut n = Mat6::zeros();
    for nb in nbrs {
        let m = monomials(nb.dx * inv_h, nb.dy * inv_h);
        for col in 0..6 {
            let wm = nb.w * m[col];
            for row in col..6 {
                n[(row, col)] += wm * m[row];
            }
        }
    }
    for col in 0..6 {
        for row in 0..col {
            n[(row, col)] = n[(col, row)];
        }
    }
    let q = first_column_augmented(&n, &c, weight, id)?;
    let mut coeffs = Vec::with_capacity(nbrs.len());
    for nb in nbrs {
        let s = nb.w * q.dot(&monomials(nb.dx * inv_h, nb.dy * inv_h));
        coeffs.push((nb.j, -s));
    }
    Ok(SparseRow {
        diag: 1.0,
        neighbor_coeffs: coeffs,
        rhs: weight * q.dot(&c) * datum,
    })
}

/// `(N + W c c^T)^{-1} e_0`, or the pseudo-inverse solution when it is unique in its first entry.
fn first_column_augmented(n: &Mat6, c: &Vec6, weight: f64, id: u64) -> Result<Vec6> {
    if let Some(chol) = n.cholesky() {
        let inv = chol.inverse();
        if norm1(n) * norm1(&inv) <= MAX_CONDITION {
            let u = inv.column(0).into_owned();
            let v = inv * c;
            let denom = 1.0 + weight * c.dot(&v);
            return Ok(u - v * (weight * c.dot(&u) / denom));
        }
    }
    let aug = n + c * c.transpose() * weight;
    let eig = aug.symmetric_eigen();
    let tol = 1e-10 * norm1(n).max(f64::MIN_POSITIVE);
    let mut q = Vec6::zeros();
    let mut smallest_kept = f64::INFINITY;
    for k in 0..6 {
        let z = eig.eigenvectors.column(k);
        let lambda = eig.eigenvalues[k];
        if lambda > tol {
            q += z * (z[0] / lambda);
            smallest_kept = smallest_kept.min(lambda);
        } else if z[0].abs() > 1e-8 {
            return Err(Error::DegenerateStencil {
                id,
                condition: f64::INFINITY,
            });
        }
    }
    let largest = eig.eigenvalues.max();
    if largest / smallest_kept > MAX_CONDITION * 1e4 {
        return Err(Error::DegenerateStencil {
            id,
            condition: largest / smallest_kept,
        });
    }
    Ok(q)
}

/// Assembles the row of particle `i` from the cloud's current neighbors.
pub fn assemble_row(cloud: &ParticleCloud, i: usize, b: Vec2, c: f64, f: f64, bc: BoundaryCondition) -> Result<SparseRow> {
    let xi = cloud.particles()[i].position;
    let nbrs: Vec<Neighbor> = cloud
        .neighbors(i)?
        .into_iter()
        .map(|j| {
            let xj = cloud.particles()[j].position;
            let d = xj - xi;
            Neighbor {
                j,
                dx: d.x,
                dy: d.y,
                w: cloud.weight(&xj, &xi),
            }
        })
        .collect();
    assemble_row_from(&nbrs, cloud.h(), cloud.particles()[i].id, PdeCoefficients { b, c, f }, bc)
}

/// Sparse system in compressed-row form with the current iterate.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    diag: Vec<f64>,
    rhs: Vec<f64>,
    pub unknowns: Vec<f64>,
}

impl LinearSystem {
    pub fn from_rows(rows: Vec<SparseRow>, unknowns: Vec<f64>) -> Self {
        assert_eq!(rows.len(), unknowns.len(), "one unknown per row");
        let mut s = LinearSystem {
            offsets: Vec::with_capacity(rows.len() + 1),
            unknowns,
            ..Default::default()
        };
        s.offsets.push(0);
        for row in rows {
            for (j, c) in row.neighbor_coeffs {
                assert!(j < s.unknowns.len(), "row references missing unknown {j}");
                s.cols.push(j as u32);
                s.vals.push(c);
            }
            s.offsets.push(s.cols.len());
            s.diag.push(row.diag);
            s.rhs.push(row.rhs);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn row(&self, i: usize) -> SparseRow {
        let r = self.offsets[i]..self.offsets[i + 1];
        SparseRow {
            diag: self.diag[i],
            neighbor_coeffs: self.cols[r.clone()]
                .iter()
                .map(|&j| j as usize)
                .zip(self.vals[r].iter().copied())
                .collect(),
            rhs: self.rhs[i],
        }
    }

    fn off_diagonal(&self, i: usize, psi: &[f64]) -> f64 {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()]
            .iter()
            .zip(&self.vals[r])
            .map(|(&j, &c)| c * psi[j as usize])
            .sum()
    }

    /// Per-row residual `rhs - L psi`.
    pub fn residual(&self, psi: &[f64]) -> Vec<f64> {
        (0..self.len())
            .into_par_iter()
            .map(|i| self.rhs[i] - self.diag[i] * psi[i] - self.off_diagonal(i, psi))
            .collect()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }
}

/// Outcome of an iterative solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub sweeps: usize,
    pub relative_change: f64,
    /// The iteration stopped on stagnation rather than on the tolerance.
    pub stagnated: bool,
}

fn converged(change: f64, size: f64, eps: f64) -> bool {
    change == 0.0 || change < eps * size
}

fn relative(change: f64, size: f64) -> f64 {
    if change == 0.0 {
        0.0
    } else {
        change / size
    }
}

/// In-place Gauss-Seidel sweeps in ascending row order until
/// `sum |psi_new - psi_old| / sum |psi_new| < eps`.
pub fn gauss_seidel(system: &mut LinearSystem, eps: f64, max_sweeps: usize) -> Result<SolveStats> {
    gauss_seidel_impl(system, eps, max_sweeps, false, None)
}

/// Gauss-Seidel for systems whose null space is the constants: the mean is
/// removed after every sweep so the iterate cannot drift along it.
pub fn gauss_seidel_zero_mean(system: &mut LinearSystem, eps: f64, max_sweeps: usize) -> Result<SolveStats> {
    gauss_seidel_impl(system, eps, max_sweeps, true, None)
}

/// Gauss-Seidel that also stops once the relative change has not reached a new
/// minimum for `window` sweeps, returning the iterate with the smallest change.
///
/// Meant for operators with a near-null mode of either sign, where plain
/// sweeping first settles and then slowly drifts along that mode.
pub fn gauss_seidel_until_stagnation(system: &mut LinearSystem, eps: f64, max_sweeps: usize, window: usize) -> Result<SolveStats> {
    gauss_seidel_impl(system, eps, max_sweeps, false, Some(window))
}

fn gauss_seidel_impl(system: &mut LinearSystem, eps: f64, max_sweeps: usize, zero_mean: bool, window: Option<usize>) -> Result<SolveStats> {
    let n = system.len();
    let mut previous = if zero_mean { system.unknowns.clone() } else { Vec::new() };
    let mut best = (
        f64::INFINITY,
        0,
        if window.is_some() { system.unknowns.clone() } else { Vec::new() },
    );
    for sweep in 1..=max_sweeps {
        let mut change = 0.0;
        let mut size = 0.0;
        for i in 0..n {
            let new = (system.rhs[i] - system.off_diagonal(i, &system.unknowns)) / system.diag[i];
            if !zero_mean {
                change += (new - system.unknowns[i]).abs();
                size += new.abs();
            }
            system.unknowns[i] = new;
        }
        if zero_mean {
            let mean = system.unknowns.iter().sum::<f64>() / n.max(1) as f64;
            for (u, p) in system.unknowns.iter_mut().zip(previous.iter_mut()) {
                *u -= mean;
                change += (*u - *p).abs();
                size += u.abs();
                *p = *u;
            }
        }
        let rel = relative(change, size);
        if converged(change, size, eps) {
            return Ok(SolveStats {
                sweeps: sweep,
                relative_change: rel,
                stagnated: false,
            });
        }
        if let Some(window) = window {
            if rel < best.0 {
                best.0 = rel;
                best.1 = sweep;
                best.2.copy_from_slice(&system.unknowns);
            } else if sweep - best.1 >= window {
                system.unknowns = best.2;
                return Ok(SolveStats {
                    sweeps: best.1,
                    relative_change: best.0,
                    stagnated: true,
                });
            }
        } else if rel < best.0 {
            best.0 = rel;
        }
    }
    Err(Error::NotConverged {
        sweeps: max_sweeps,
        relative_change: best.0,
    })
}

/// Jacobi iteration with the same stopping rule; rows are updated in parallel.
pub fn jacobi(system: &mut LinearSystem, eps: f64, max_sweeps: usize) -> Result<SolveStats> {
    let mut last = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        let old = &system.unknowns;
        let new: Vec<f64> = (0..system.len())
            .into_par_iter()
            .map(|i| (system.rhs[i] - system.off_diagonal(i, old)) / system.diag[i])
            .collect();
        let change: f64 = new.iter().zip(old).map(|(a, b)| (a - b).abs()).sum();
        let size: f64 = new.iter().map(|v| v.abs()).sum();
        system.unknowns = new;
        last = relative(change, size);
        if converged(change, size, eps) {
            return Ok(SolveStats {
                sweeps: sweep,
                relative_change: last,
                stagnated: false,
            });
        }
    }
    Err(Error::NotConverged {
        sweeps: max_sweeps,
        relative_change: last,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverMethod {
    #[default]
    GaussSeidel,
    Jacobi,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub eps: f64,
    pub max_sweeps: usize,
    pub method: SolverMethod,
    /// Gauss-Seidel only: stop on stagnation after this many sweeps without a
    /// new minimum of the relative change (see [`gauss_seidel_until_stagnation`]).
    pub stagnation_window: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            eps: crate::config::DEFAULT_EPS_SOLVER,
            max_sweeps: crate::config::DEFAULT_MAX_SWEEPS,
            method: SolverMethod::GaussSeidel,
            stagnation_window: None,
        }
    }
}

/// Assembles one row per particle in parallel; reports the lowest failing index.
pub fn assemble_system(
    cloud: &ParticleCloud,
    list: &NeighborList,
    row_data: impl Fn(usize) -> (PdeCoefficients, BoundaryCondition) + Sync,
    initial: Vec<f64>,
) -> Result<LinearSystem> {
    let h = cloud.h();
    let rows: Vec<Result<SparseRow>> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let (pde, bc) = row_data(i);
            assemble_row_from(list.of(i), h, cloud.particles()[i].id, pde, bc)
        })
        .collect();
    Ok(LinearSystem::from_rows(rows.into_iter().collect::<Result<_>>()?, initial))
}

/// Pressure field and solver statistics from one projection.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureSolution {
    pub pressure: Vec<f64>,
    pub stats: SolveStats,
}

/// Solves `lap p - (grad rho~ / rho~) . grad p = rho~ div(v*) / dt` with
/// `dp/dn = rho~ v* . n / dt` on wall particles (zero when the wall predictor
/// vanishes), warm-started from the stored pressures.
/// The returned field has zero mean.
pub fn solve_pressure_poisson(cloud: &ParticleCloud, v_star: &[Vec2], dt: f64, options: &SolverOptions) -> Result<PressureSolution> {
    let list = cloud.neighbor_list()?;
    let ops = LsOperators::build(cloud, &list)?;
    solve_pressure_poisson_with(cloud, &list, &ops, v_star, dt, options)
}

pub fn solve_pressure_poisson_with(
    cloud: &ParticleCloud,
    list: &NeighborList,
    ops: &LsOperators,
    v_star: &[Vec2],
    dt: f64,
    options: &SolverOptions,
) -> Result<PressureSolution> {
    let particles = cloud.particles();
    let rho: Vec<f64> = particles.iter().map(|p| p.rho_smooth).collect();
    let div = ops.divergence_field(v_star);
    let row_data = |i: usize| {
        let p = &particles[i];
        match p.wall_normal() {
            Some(normal) => (
                PdeCoefficients {
                    b: Vec2::zeros(),
                    c: 0.0,
                    f: 0.0,
                },
                BoundaryCondition::Neumann {
                    normal,
                    value: rho[i] * v_star[i].dot(&normal) / dt,
                },
            ),
            None => (
                PdeCoefficients {
                    b: -ops.gradient(&rho, i) / rho[i],
                    c: 1.0,
                    f: rho[i] * div[i] / dt,
                },
                BoundaryCondition::Interior,
            ),
        }
    };
    let initial = particles.iter().map(|p| p.pressure).collect();
    let mut system = assemble_system(cloud, list, row_data, initial)?;
    let stats = match options.method {
        SolverMethod::GaussSeidel => gauss_seidel_impl(&mut system, options.eps, options.max_sweeps, true, options.stagnation_window)?,
        SolverMethod::Jacobi => jacobi(&mut system, options.eps, options.max_sweeps)?,
    };
    let mut pressure = system.unknowns;
    let mean = pressure.iter().sum::<f64>() / pressure.len().max(1) as f64;
    pressure.iter_mut().for_each(|p| *p -= mean);
    Ok(PressureSolution { pressure, stats })
}
