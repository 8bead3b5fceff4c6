//! Projection time stepper.

use rayon::prelude::*;

use crate::cloud::{NeighborList, ParticleCloud};
use crate::config::{AdvectionVelocity, MomentumDensity, ScenarioConfig};
use crate::diagnostics::{diagnostics, Diagnostics};
use crate::elliptic::{solve_pressure_poisson_with, SolverOptions};
use crate::error::{Error, Result};
use crate::interface::{self, SurfaceTension};
use crate::ls::{shepard_smooth_with, LsOperators};
use crate::management::manage_particles;
use crate::particle::{Particle, Phase};
use crate::Vec2;

/// Summary of one accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub step: u64,
    /// Time at the end of the step.
    pub t: f64,
    pub solver_sweeps: usize,
    /// The pressure solve stopped on stagnation instead of the tolerance.
    pub solver_stagnated: bool,
    pub particles_added: usize,
    pub particles_removed: usize,
    pub max_velocity: f64,
    /// RMS divergence of the corrected velocity over interior particles.
    pub divergence_norm: f64,
    /// RMS divergence of the intermediate velocity over interior particles.
    pub divergence_star_norm: f64,
    /// Capillary time-step indicator `sqrt(rho_mean h^3 / (2 pi sigma))`.
    pub dt_cap: f64,
    /// Particles clamped back into the domain during advection.
    pub clamped: usize,
    pub corrected_normals: usize,
    /// Interior (gas, liquid) particle counts after the step.
    pub phase_counts: [usize; 2],
}

/// Smoothed density and viscosity. Wall particles receive the average of
/// their interior neighbors but do not contribute.
pub fn smooth_material_fields(cloud: &ParticleCloud, list: &NeighborList, config: &ScenarioConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let ps = cloud.particles();
    let source: Vec<bool> = ps.iter().map(|p| !p.is_wall()).collect();
    let rho: Vec<f64> = ps.iter().map(Particle::rho).collect();
    let mu: Vec<f64> = ps.iter().map(Particle::mu).collect();
    let rho_s = shepard_smooth_with(cloud, list, &rho, config.numerics.density_smoothing, Some(&source))?;
    let mu_s = shepard_smooth_with(cloud, list, &mu, config.numerics.viscosity_smoothing, Some(&source))?;
    Ok((rho_s, mu_s))
}

/// `v + dt/rho (2 grad(mu~) . D + mu~ lap v) + dt g + dt/rho F_S` on interior
/// particles. Wall particles get `dt g`, which sets the pressure wall condition
/// `dp/dn = rho~ g . n`.
pub fn intermediate_velocity(
    cloud: &ParticleCloud,
    ops: &LsOperators,
    dt: f64,
    gravity: Vec2,
    force: &[Vec2],
    rho: &[f64],
    mu_smooth: &[f64],
) -> Vec<Vec2> {
    let ps = cloud.particles();
    let u: Vec<f64> = ps.iter().map(|p| p.velocity.x).collect();
    let v: Vec<f64> = ps.iter().map(|p| p.velocity.y).collect();
    (0..ps.len())
        .into_par_iter()
        .map(|i| {
            if ps[i].is_wall() {
                return gravity * dt;
            }
            let du = ops.derivatives(&u, i);
            let dv = ops.derivatives(&v, i);
            let gm = ops.gradient(mu_smooth, i);
            let shear = du.ddy + dv.ddx;
            let viscous = Vec2::new(
                2.0 * gm.x * du.ddx + gm.y * shear + mu_smooth[i] * du.laplacian(),
                gm.x * shear + 2.0 * gm.y * dv.ddy + mu_smooth[i] * dv.laplacian(),
            );
            ps[i].velocity + (viscous + force[i]) * (dt / rho[i]) + gravity * dt
        })
        .collect()
}

/// `v* - dt grad(p) / rho~` on interior particles; walls are no-slip.
pub fn project_and_correct(cloud: &ParticleCloud, ops: &LsOperators, v_star: &[Vec2], pressure: &[f64], rho: &[f64], dt: f64) -> Vec<Vec2> {
    let ps = cloud.particles();
    (0..ps.len())
        .into_par_iter()
        .map(|i| {
            if ps[i].is_wall() {
                Vec2::zeros()
            } else {
                v_star[i] - ops.gradient(pressure, i) * (dt / rho[i])
            }
        })
        .collect()
}

/// Moves interior particles by `dt * velocity[i]`; particles that would leave
/// the domain are clamped to it, half a spacing inside the walls. Returns the
/// number clamped. The spatial index becomes stale.
pub fn advect(cloud: &mut ParticleCloud, velocity: &[Vec2], dt: f64) -> usize {
    let d = cloud.domain();
    let inset = 0.5 * cloud.dx0();
    let inner = crate::geometry::Rect::new(d.x_min + inset, d.x_max - inset, d.y_min + inset, d.y_max - inset);
    let mut clamped = 0;
    for (p, v) in cloud.particles_mut().iter_mut().zip(velocity) {
        if p.is_wall() {
            continue;
        }
        p.position += v * dt;
        if !inner.contains(&p.position) {
            inner.clamp(&mut p.position);
            clamped += 1;
        }
    }
    clamped
}

/// RMS of the velocity divergence over interior particles.
pub fn divergence_norm(cloud: &ParticleCloud, ops: &LsOperators, v: &[Vec2]) -> f64 {
    let ps = cloud.particles();
    let (sum, n) = (0..ps.len())
        .filter(|&i| !ps[i].is_wall())
        .map(|i| ops.divergence(v, i).powi(2))
        .fold((0.0, 0usize), |(s, n), d| (s + d, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

pub fn phase_counts(cloud: &ParticleCloud) -> [usize; 2] {
    let mut c = [0; 2];
    for p in cloud.particles().iter().filter(|p| !p.is_wall()) {
        c[(p.phase() == Phase::Liquid) as usize] += 1;
    }
    c
}

/// A scenario being integrated in time.
#[derive(Clone, Debug)]
pub struct Simulation {
    config: ScenarioConfig,
    cloud: ParticleCloud,
    t: f64,
    step: u64,
    initial_counts: [usize; 2],
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let mut cloud = ParticleCloud::seed(&config)?;
        cloud.set_alpha(config.numerics.alpha);
        let initial_counts = phase_counts(&cloud);
        let mut sim = Self {
            config,
            cloud,
            t: 0.0,
            step: 0,
            initial_counts,
        };
        sim.refresh_smoothed_fields()?;
        Ok(sim)
    }

    /// Starts from an explicit cloud (for tests and custom setups).
    pub fn from_cloud(config: ScenarioConfig, mut cloud: ParticleCloud) -> Result<Self> {
        config.validate()?;
        cloud.set_alpha(config.numerics.alpha);
        cloud.rebuild_index();
        let initial_counts = phase_counts(&cloud);
        let mut sim = Self {
            config,
            cloud,
            t: 0.0,
            step: 0,
            initial_counts,
        };
        sim.refresh_smoothed_fields()?;
        Ok(sim)
    }

    fn refresh_smoothed_fields(&mut self) -> Result<()> {
        let list = self.cloud.neighbor_list()?;
        let (rho, _) = smooth_material_fields(&self.cloud, &list, &self.config)?;
        let color = interface::smooth_color(&self.cloud, &list, self.config.numerics.color_smoothing)?;
        for ((p, r), c) in self.cloud.particles_mut().iter_mut().zip(rho).zip(color) {
            p.rho_smooth = r;
            p.color_smooth = c;
        }
        self.cloud.rebuild_index();
        Ok(())
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn cloud(&self) -> &ParticleCloud {
        &self.cloud
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn initial_phase_counts(&self) -> [usize; 2] {
        self.initial_counts
    }

    pub fn diagnostics(&self) -> Diagnostics {
        diagnostics(&self.cloud, self.t)
    }

    /// Capillary time-step indicator for the current configuration.
    pub fn capillary_dt(&self) -> f64 {
        let sigma = self.config.physics.sigma;
        if sigma <= 0.0 {
            return f64::INFINITY;
        }
        let rho_mean = 0.5 * (self.config.liquid.rho + self.config.gas.rho);
        (rho_mean * self.cloud.h().powi(3) / (2.0 * std::f64::consts::PI * sigma)).sqrt()
    }

    /// Advances one step of size `numerics.dt`.
    pub fn step(&mut self) -> Result<StepReport> {
        let step = self.step + 1;
        let time = self.t;
        self.step_inner().map_err(|e| Error::Step {
            step,
            time,
            source: Box::new(e),
        })
    }

    fn step_inner(&mut self) -> Result<StepReport> {
        let cfg = &self.config;
        let dt = cfg.numerics.dt;
        if !self.cloud.is_index_current() {
            self.cloud.rebuild_index();
        }
        let list = self.cloud.neighbor_list()?;
        let ops = LsOperators::build(&self.cloud, &list)?;

        let SurfaceTension { field, force, corrected } = interface::evaluate(
            &self.cloud,
            &list,
            &ops,
            cfg.numerics.color_smoothing,
            cfg.physics.theta_s(),
            cfg.numerics.beta,
            cfg.physics.sigma,
        )?;

        let (rho_s, mu_s) = smooth_material_fields(&self.cloud, &list, cfg)?;
        for ((p, r), c) in self.cloud.particles_mut().iter_mut().zip(&rho_s).zip(&field.color_smooth) {
            p.rho_smooth = *r;
            p.color_smooth = *c;
        }
        // particles_mut invalidates the index although nothing moved
        self.cloud.rebuild_index();
        let rho_momentum: Vec<f64> = match cfg.numerics.momentum_density {
            MomentumDensity::Smoothed => rho_s.clone(),
            MomentumDensity::Raw => self.cloud.particles().iter().map(Particle::rho).collect(),
        };

        let v_star = intermediate_velocity(&self.cloud, &ops, dt, cfg.physics.gravity(), &force, &rho_momentum, &mu_s);
        let options = SolverOptions {
            eps: cfg.numerics.eps_solver,
            max_sweeps: cfg.numerics.max_sweeps,
            stagnation_window: (cfg.numerics.stagnation_window > 0).then_some(cfg.numerics.stagnation_window),
            ..SolverOptions::default()
        };
        let solution = solve_pressure_poisson_with(&self.cloud, &list, &ops, &v_star, dt, &options)?;
        let v_new = project_and_correct(&self.cloud, &ops, &v_star, &solution.pressure, &rho_momentum, dt);
        let divergence_star_norm = divergence_norm(&self.cloud, &ops, &v_star);
        let divergence_norm = divergence_norm(&self.cloud, &ops, &v_new);
        let max_velocity = v_new.iter().map(|v| v.norm()).fold(0.0, f64::max);

        let v_old: Vec<Vec2> = self.cloud.particles().iter().map(|p| p.velocity).collect();
        let advect_with = match cfg.numerics.advect_with {
            AdvectionVelocity::Old => &v_old,
            AdvectionVelocity::New => &v_new,
        };
        let clamped = advect(&mut self.cloud, advect_with, dt);
        for ((p, v), pr) in self.cloud.particles_mut().iter_mut().zip(&v_new).zip(&solution.pressure) {
            p.velocity = *v;
            p.pressure = *pr;
        }
        self.cloud.rebuild_index();

        let managed = if cfg.numerics.particle_management {
            manage_particles(&mut self.cloud, cfg)?
        } else {
            Default::default()
        };

        self.step += 1;
        self.t = self.step as f64 * dt;
        Ok(StepReport {
            step: self.step,
            t: self.t,
            solver_sweeps: solution.stats.sweeps,
            solver_stagnated: solution.stats.stagnated,
            particles_added: managed.added,
            particles_removed: managed.removed,
            max_velocity,
            divergence_norm,
            divergence_star_norm,
            dt_cap: self.capillary_dt(),
            clamped,
            corrected_normals: corrected,
            phase_counts: phase_counts(&self.cloud),
        })
    }

    /// Steps until `t_end`, calling `observe` after each step.
    pub fn run(&mut self, mut observe: impl FnMut(&Self, &StepReport) -> Result<()>) -> Result<Vec<StepReport>> {
        let n = self.steps_to_end();
        let mut reports = Vec::with_capacity(n as usize);
        while self.step < n {
            let r = self.step()?;
            observe(self, &r)?;
            reports.push(r);
        }
        Ok(reports)
    }

    /// Total number of steps implied by `t_end / dt`.
    pub fn steps_to_end(&self) -> u64 {
        let n = &self.config.numerics;
        (n.t_end / n.dt - 1e-9).ceil().max(0.0) as u64
    }
}
