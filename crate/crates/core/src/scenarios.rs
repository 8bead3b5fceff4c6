//! Builtin scenario catalog.
//!
//! Families:
//! - `wall-adhesion-{175,5}`: shallow water pool in a closed tank.
//! - `sessile-rect-{30,60,90,120,150}`: initially rectangular ethanol drop.
//! - `sessile-circular-{30,60,90,120,150}`: initially semicircular drop.
//! - `gravity-eo-{0.12,1.2,6.06,12.16}`: semicircular drop at 130 degrees under gravity.
//! - `drop-convergence-h{0.01,0.005,0.0025}`: the 150 degree circular drop at three resolutions.

use crate::config::{
    material_smoothing_for_ratio, AdvectionVelocity, Material, MomentumDensity, Numerics, Output, PhaseRegion, Physics, ScenarioConfig,
    DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_COLOR_SMOOTHING, DEFAULT_DT, DEFAULT_MERGE_FACTOR, DEFAULT_OUTPUT_INTERVAL, DEFAULT_SPACING_RATIO,
    DEFAULT_STAGNATION_WINDOW,
};
use crate::geometry::Rect;
use crate::oracles::gravity_for_eotvos;

pub const CONTACT_ANGLES: [u32; 5] = [30, 60, 90, 120, 150];
pub const EOTVOS_NUMBERS: [f64; 4] = [0.12, 1.2, 6.06, 12.16];
pub const DROP_CONVERGENCE_H: [f64; 3] = [0.01, 0.005, 0.0025];

pub const WATER: Material = Material { rho: 1000.0, mu: 0.0091 };
pub const TANK_AIR: Material = Material { rho: 1.0, mu: 1.86e-5 };
pub const ETHANOL: Material = Material { rho: 797.88, mu: 0.0018 };
pub const ETHANOL_VISCOUS: Material = Material { rho: 797.88, mu: 0.1 };
pub const DAMPING_GAS: Material = Material { rho: 1.0, mu: 0.01 };
pub const ETHANOL_SIGMA: f64 = 0.02361;
/// Initial radius of the semicircular drops [m].
pub const DROP_R0: f64 = 0.06;

/// Pressure-solver tolerance of the flow scenarios. The pressure is warm
/// started from the previous step, and tightening this to `1e-5` changes the
/// drop diagnostics by well under one percent.
pub const FLOW_EPS_SOLVER: f64 = 1.0e-4;
/// Sweep budget of the flow scenarios; isolated steps after a sudden local
/// velocity change need several thousand sweeps.
pub const FLOW_MAX_SWEEPS: usize = 50_000;

fn numerics(h: f64, t_end: f64, liquid: Material, gas: Material) -> Numerics {
    Numerics {
        h,
        spacing_ratio: DEFAULT_SPACING_RATIO,
        alpha: DEFAULT_ALPHA,
        beta: DEFAULT_BETA,
        dt: DEFAULT_DT,
        t_end,
        eps_solver: FLOW_EPS_SOLVER,
        max_sweeps: FLOW_MAX_SWEEPS,
        stagnation_window: DEFAULT_STAGNATION_WINDOW,
        color_smoothing: DEFAULT_COLOR_SMOOTHING,
        density_smoothing: material_smoothing_for_ratio(liquid.rho / gas.rho),
        viscosity_smoothing: material_smoothing_for_ratio((liquid.mu / gas.mu).max(gas.mu / liquid.mu)),
        advect_with: AdvectionVelocity::Old,
        momentum_density: MomentumDensity::Smoothed,
        merge_factor: DEFAULT_MERGE_FACTOR,
        particle_management: true,
    }
}

fn scenario(
    name: String,
    domain: Rect,
    liquid_region: PhaseRegion,
    liquid: Material,
    gas: Material,
    physics: Physics,
    h: f64,
    t_end: f64,
) -> ScenarioConfig {
    ScenarioConfig {
        name,
        domain,
        liquid_region,
        liquid,
        gas,
        physics,
        numerics: numerics(h, t_end, liquid, gas),
        output: Output {
            interval: DEFAULT_OUTPUT_INTERVAL,
        },
        defaults_applied: Vec::new(),
    }
}

/// Water pool in the `[0, 0.112] x [0, 0.152]` tank at contact angle 175 or 5 degrees.
pub fn wall_adhesion(theta_deg: u32) -> ScenarioConfig {
    let fill = if theta_deg >= 90 { 0.02 } else { 0.05 };
    scenario(
        format!("wall-adhesion-{theta_deg}"),
        Rect::new(0.0, 0.112, 0.0, 0.152),
        PhaseRegion::HalfPlane { below_y: fill },
        WATER,
        TANK_AIR,
        Physics {
            sigma: 0.072,
            theta_s_deg: theta_deg as f64,
            gravity: [0.0, 0.0],
        },
        0.004,
        3.0,
    )
}

/// Ethanol block `[0.15, 0.25] x [0, 0.06]` relaxing to a cap.
pub fn sessile_rectangular(theta_deg: u32) -> ScenarioConfig {
    scenario(
        format!("sessile-rect-{theta_deg}"),
        Rect::new(0.0, 0.4, 0.0, 0.12),
        PhaseRegion::Rectangle {
            x_min: 0.15,
            x_max: 0.25,
            y_min: 0.0,
            y_max: 0.06,
        },
        ETHANOL,
        DAMPING_GAS,
        Physics {
            sigma: ETHANOL_SIGMA,
            theta_s_deg: theta_deg as f64,
            gravity: [0.0, 0.0],
        },
        0.005,
        15.0,
    )
}

/// Semicircle of radius 0.06 centred on the bottom wall with viscous liquid.
pub fn sessile_circular(theta_deg: u32) -> ScenarioConfig {
    scenario(
        format!("sessile-circular-{theta_deg}"),
        Rect::new(0.0, 0.3, 0.0, 0.123),
        PhaseRegion::Semicircle {
            center: [0.15, 0.0],
            radius: DROP_R0,
        },
        ETHANOL_VISCOUS,
        DAMPING_GAS,
        Physics {
            sigma: ETHANOL_SIGMA,
            theta_s_deg: theta_deg as f64,
            gravity: [0.0, 0.0],
        },
        0.005,
        15.0,
    )
}

/// Circular drop at 130 degrees with gravity chosen for the given Eotvos number.
/// Above `Eo = 12` the domain is twice as wide.
pub fn gravity_drop(eo: f64) -> ScenarioConfig {
    let mut c = sessile_circular(130);
    c.name = format!("gravity-eo-{eo}");
    c.physics.gravity = [0.0, -gravity_for_eotvos(eo, ETHANOL_SIGMA, ETHANOL_VISCOUS.rho, DROP_R0)];
    if eo > 12.0 {
        c.domain = Rect::new(0.0, 0.6, 0.0, 0.123);
        c.liquid_region = PhaseRegion::Semicircle {
            center: [0.3, 0.0],
            radius: DROP_R0,
        };
    }
    c
}

/// Largest step handed out by [`viscous_dt`].
pub const MAX_FLOW_DT: f64 = 1.0e-3;

/// Explicit viscous time step `0.1 h^2 / nu`, capped at [`MAX_FLOW_DT`].
/// Twice this step is unstable for the damping gas.
pub fn viscous_dt(h: f64, nu: f64) -> f64 {
    (0.1 * h * h / nu).min(MAX_FLOW_DT)
}

/// The 150 degree circular drop at interaction radius `h`.
pub fn drop_convergence(h: f64) -> ScenarioConfig {
    let mut c = sessile_circular(150);
    c.name = format!("drop-convergence-h{h}");
    c.numerics.h = h;
    c.numerics.dt = viscous_dt(h, c.gas.mu / c.gas.rho);
    c
}

/// Single-phase unit square at rest, used by the elliptic studies and tests.
pub fn unit_square(h: f64) -> ScenarioConfig {
    let m = Material { rho: 1.0, mu: 1.0 };
    scenario(
        "unit-square".into(),
        Rect::new(0.0, 1.0, 0.0, 1.0),
        PhaseRegion::AllLiquid,
        m,
        m,
        Physics {
            sigma: 0.0,
            theta_s_deg: 90.0,
            gravity: [0.0, 0.0],
        },
        h,
        0.0,
    )
}

pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    let mut all = vec![wall_adhesion(175), wall_adhesion(5)];
    all.extend(CONTACT_ANGLES.iter().map(|&t| sessile_rectangular(t)));
    all.extend(CONTACT_ANGLES.iter().map(|&t| sessile_circular(t)));
    all.extend(EOTVOS_NUMBERS.iter().map(|&eo| gravity_drop(eo)));
    all.extend(DROP_CONVERGENCE_H.iter().map(|&h| drop_convergence(h)));
    all
}

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    builtin_scenarios().into_iter().find(|c| c.name == name)
}
