//! Scenario configuration: typed model, TOML parsing with defaulting and validation.
//!
//! A configuration file is TOML with the sections `[domain]`, `[liquid_region]`,
//! `[liquid]`, `[gas]`, `[physics]`, `[numerics]` and `[output]`. A top-level
//! `scenario = "<builtin name>"` key starts from a builtin scenario and lets the
//! remaining keys override individual values. Keys that are omitted and have a
//! default are filled in, and every such decision is recorded in
//! [`ScenarioConfig::defaults_applied`] so that runs are self-describing.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigViolation, Error, Result};
use crate::geometry::{Rect, Vec2};
use crate::particle::Phase;
use crate::scenarios;

pub const DEFAULT_DT: f64 = 2.0e-4;
pub const DEFAULT_ALPHA: f64 = 6.25;
pub const DEFAULT_BETA: f64 = 1.0;
pub const DEFAULT_SPACING_RATIO: f64 = 3.0;
pub const DEFAULT_EPS_SOLVER: f64 = 1.0e-6;
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;
pub const DEFAULT_STAGNATION_WINDOW: usize = 200;
pub const DEFAULT_COLOR_SMOOTHING: usize = 3;
pub const DEFAULT_MERGE_FACTOR: f64 = 0.2;
pub const DEFAULT_OUTPUT_INTERVAL: f64 = 0.1;

/// Smoothing iterations for a material field with the given phase ratio.
pub fn material_smoothing_for_ratio(ratio: f64) -> usize {
    if ratio >= 100.0 {
        10
    } else {
        3
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// Density [kg/m^3].
    pub rho: f64,
    /// Dynamic viscosity [Pa s].
    pub mu: f64,
}

/// Region initially occupied by liquid; everything else is gas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum PhaseRegion {
    /// Closed rectangle.
    Rectangle {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    /// Closed disk; centred on a wall it seeds a semicircular drop.
    #[serde(alias = "disk")]
    Semicircle {
        center: [f64; 2],
        radius: f64,
    },
    /// Open half-plane `y < below_y`.
    HalfPlane {
        below_y: f64,
    },
    AllLiquid,
    AllGas,
}

impl PhaseRegion {
    pub fn phase_at(&self, p: &Vec2) -> Phase {
        let liquid = match *self {
            PhaseRegion::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max,
            PhaseRegion::Semicircle { center, radius } => (p - Vec2::new(center[0], center[1])).norm() <= radius,
            PhaseRegion::HalfPlane { below_y } => p.y < below_y,
            PhaseRegion::AllLiquid => true,
            PhaseRegion::AllGas => false,
        };
        if liquid {
            Phase::Liquid
        } else {
            Phase::Gas
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Physics {
    /// Surface tension coefficient [N/m].
    pub sigma: f64,
    /// Static contact angle, degrees, measured through the liquid.
    pub theta_s_deg: f64,
    /// Gravitational acceleration [m/s^2].
    pub gravity: [f64; 2],
}

impl Physics {
    pub fn theta_s(&self) -> f64 {
        self.theta_s_deg.to_radians()
    }

    pub fn gravity(&self) -> Vec2 {
        Vec2::new(self.gravity[0], self.gravity[1])
    }
}

/// Velocity used to move particles at the end of a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdvectionVelocity {
    /// `x^{n+1} = x^n + dt v^n`.
    Old,
    /// `x^{n+1} = x^n + dt v^{n+1}`.
    New,
}

/// Density used in the `1/rho` factors of the momentum update.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentumDensity {
    Smoothed,
    Raw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    /// Interaction radius [m].
    pub h: f64,
    /// `h / dx0` used when seeding the lattice.
    pub spacing_ratio: f64,
    /// Gaussian weight exponent.
    pub alpha: f64,
    /// Contact-angle correction radius in units of `h`.
    pub beta: f64,
    pub dt: f64,
    pub t_end: f64,
    pub eps_solver: f64,
    pub max_sweeps: usize,
    /// Pressure solve stops on stagnation after this many sweeps without
    /// progress; 0 disables the check.
    pub stagnation_window: usize,
    pub color_smoothing: usize,
    pub density_smoothing: usize,
    pub viscosity_smoothing: usize,
    pub advect_with: AdvectionVelocity,
    pub momentum_density: MomentumDensity,
    /// Merge distance in units of `dx0`.
    pub merge_factor: f64,
    pub particle_management: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Output {
    /// Simulated time between snapshot files [s].
    pub interval: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub domain: Rect,
    pub liquid_region: PhaseRegion,
    pub liquid: Material,
    pub gas: Material,
    pub physics: Physics,
    pub numerics: Numerics,
    pub output: Output,
    /// Human-readable log of defaults filled in while parsing.
    #[serde(skip)]
    pub defaults_applied: Vec<String>,
}

impl ScenarioConfig {
    pub fn material(&self, phase: Phase) -> Material {
        match phase {
            Phase::Gas => self.gas,
            Phase::Liquid => self.liquid,
        }
    }

    /// Serializes to the TOML text accepted by [`parse_config_str`].
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    /// Checks every range constraint, returning all violations at once.
    pub fn validate(&self) -> Result<()> {
        let v = violations(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

fn violations(c: &ScenarioConfig) -> Vec<ConfigViolation> {
    let mut v = Vec::new();
    let mut check = |ok: bool, key: &str, msg: &str| {
        if !ok {
            v.push(ConfigViolation::new(key, msg));
        }
    };
    let d = &c.domain;
    check(d.width() > 0.0, "domain", "x_max must exceed x_min");
    check(d.height() > 0.0, "domain", "y_max must exceed y_min");
    for (key, m) in [("liquid", &c.liquid), ("gas", &c.gas)] {
        check(m.rho > 0.0, &format!("{key}.rho"), "must be positive");
        check(m.mu >= 0.0, &format!("{key}.mu"), "must be non-negative");
    }
    let p = &c.physics;
    check(p.sigma >= 0.0, "physics.sigma", "must be non-negative");
    check(
        p.theta_s_deg > 0.0 && p.theta_s_deg < 180.0,
        "physics.theta_s_deg",
        "must lie strictly between 0 and 180 degrees",
    );
    check(p.gravity.iter().all(|g| g.is_finite()), "physics.gravity", "must be finite");
    let n = &c.numerics;
    check(n.h > 0.0, "numerics.h", "must be positive");
    check(n.spacing_ratio >= 1.5, "numerics.spacing_ratio", "must be at least 1.5");
    check(n.alpha > 0.0, "numerics.alpha", "must be positive");
    check(n.beta > 0.0, "numerics.beta", "must be positive");
    check(n.dt > 0.0, "numerics.dt", "must be positive");
    check(n.t_end >= 0.0, "numerics.t_end", "must be non-negative");
    check(n.eps_solver > 0.0, "numerics.eps_solver", "must be positive");
    check(n.max_sweeps >= 1, "numerics.max_sweeps", "must be at least 1");
    check(n.color_smoothing >= 1, "numerics.color_smoothing", "must be at least 1");
    check(n.density_smoothing >= 1, "numerics.density_smoothing", "must be at least 1");
    check(n.viscosity_smoothing >= 1, "numerics.viscosity_smoothing", "must be at least 1");
    check((0.0..1.0).contains(&n.merge_factor), "numerics.merge_factor", "must lie in [0, 1)");
    check(c.output.interval > 0.0, "output.interval", "must be positive");
    if let PhaseRegion::Semicircle { radius, .. } = c.liquid_region {
        check(radius > 0.0, "liquid_region.radius", "must be positive");
    }
    v
}

// Everything optional so that missing keys can be reported by path.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    domain: Option<Rect>,
    liquid_region: Option<PhaseRegion>,
    liquid: Option<RawMaterial>,
    gas: Option<RawMaterial>,
    physics: Option<RawPhysics>,
    numerics: Option<RawNumerics>,
    output: Option<RawOutput>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    rho: Option<f64>,
    mu: Option<f64>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    sigma: Option<f64>,
    theta_s_deg: Option<f64>,
    gravity: Option<[f64; 2]>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    h: Option<f64>,
    spacing_ratio: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    dt: Option<f64>,
    t_end: Option<f64>,
    eps_solver: Option<f64>,
    max_sweeps: Option<usize>,
    stagnation_window: Option<usize>,
    color_smoothing: Option<usize>,
    density_smoothing: Option<usize>,
    viscosity_smoothing: Option<usize>,
    advect_with: Option<AdvectionVelocity>,
    momentum_density: Option<MomentumDensity>,
    merge_factor: Option<f64>,
    particle_management: Option<bool>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    interval: Option<f64>,
}

/// Reads and validates a configuration file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_config_str(&text)
}

/// Parses configuration text; see the module docs for the grammar.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;

    if let Some(base) = table.remove("scenario") {
        let name = base
            .as_str()
            .ok_or_else(|| Error::Validation(vec![ConfigViolation::new("scenario", "must be a string")]))?;
        let builtin = scenarios::builtin(name).ok_or_else(|| {
            Error::Validation(vec![ConfigViolation::new(
                "scenario",
                format!("unknown scenario '{name}' (see `fpm scenarios`)"),
            )])
        })?;
        let mut merged: toml::Table = builtin.to_toml().parse().expect("builtin scenarios round-trip through TOML");
        // A replaced liquid region must not inherit keys of a different shape.
        if table.contains_key("liquid_region") {
            merged.remove("liquid_region");
        }
        merge_tables(&mut merged, table);
        table = merged;
    }

    let raw: RawConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    resolve(raw)
}

fn merge_tables(base: &mut toml::Table, overrides: toml::Table) {
    for (key, value) in overrides {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

fn resolve(raw: RawConfig) -> Result<ScenarioConfig> {
    let mut missing = Vec::new();
    let mut defaults = Vec::new();

    macro_rules! required {
        ($value:expr, $key:expr) => {
            match $value {
                Some(v) => v,
                None => {
                    missing.push(ConfigViolation::new($key, "missing required key"));
                    Default::default()
                }
            }
        };
    }
    macro_rules! defaulted {
        ($value:expr, $key:expr, $default:expr) => {
            match $value {
                Some(v) => v,
                None => {
                    let d = $default;
                    defaults.push(format!("{} not set, using default {:?}", $key, d));
                    d
                }
            }
        };
    }

    let name = defaulted!(raw.name, "name", String::from("custom"));
    let domain = required!(raw.domain.map(Some), "domain").unwrap_or(Rect::new(0.0, 0.0, 0.0, 0.0));
    let liquid_region = required!(raw.liquid_region.map(Some), "liquid_region").unwrap_or(PhaseRegion::AllGas);
    let liquid_raw = raw.liquid.unwrap_or_default();
    let gas_raw = raw.gas.unwrap_or_default();
    let liquid = Material {
        rho: required!(liquid_raw.rho, "liquid.rho"),
        mu: required!(liquid_raw.mu, "liquid.mu"),
    };
    let gas = Material {
        rho: required!(gas_raw.rho, "gas.rho"),
        mu: required!(gas_raw.mu, "gas.mu"),
    };
    let p = raw.physics.unwrap_or_default();
    let physics = Physics {
        sigma: required!(p.sigma, "physics.sigma"),
        theta_s_deg: required!(p.theta_s_deg, "physics.theta_s_deg"),
        gravity: defaulted!(p.gravity, "physics.gravity", [0.0, 0.0]),
    };
    let n = raw.numerics.unwrap_or_default();
    let density_ratio = ratio(liquid.rho, gas.rho);
    let viscosity_ratio = ratio(liquid.mu, gas.mu);
    let numerics = Numerics {
        h: required!(n.h, "numerics.h"),
        spacing_ratio: defaulted!(n.spacing_ratio, "numerics.spacing_ratio", DEFAULT_SPACING_RATIO),
        alpha: defaulted!(n.alpha, "numerics.alpha", DEFAULT_ALPHA),
        beta: defaulted!(n.beta, "numerics.beta", DEFAULT_BETA),
        dt: defaulted!(n.dt, "numerics.dt", DEFAULT_DT),
        t_end: required!(n.t_end, "numerics.t_end"),
        eps_solver: defaulted!(n.eps_solver, "numerics.eps_solver", DEFAULT_EPS_SOLVER),
        max_sweeps: defaulted!(n.max_sweeps, "numerics.max_sweeps", DEFAULT_MAX_SWEEPS),
        stagnation_window: defaulted!(n.stagnation_window, "numerics.stagnation_window", DEFAULT_STAGNATION_WINDOW),
        color_smoothing: defaulted!(n.color_smoothing, "numerics.color_smoothing", DEFAULT_COLOR_SMOOTHING),
        density_smoothing: defaulted!(
            n.density_smoothing,
            "numerics.density_smoothing",
            material_smoothing_for_ratio(density_ratio)
        ),
        viscosity_smoothing: defaulted!(
            n.viscosity_smoothing,
            "numerics.viscosity_smoothing",
            material_smoothing_for_ratio(viscosity_ratio)
        ),
        advect_with: defaulted!(n.advect_with, "numerics.advect_with", AdvectionVelocity::Old),
        momentum_density: defaulted!(n.momentum_density, "numerics.momentum_density", MomentumDensity::Smoothed),
        merge_factor: defaulted!(n.merge_factor, "numerics.merge_factor", DEFAULT_MERGE_FACTOR),
        particle_management: defaulted!(n.particle_management, "numerics.particle_management", true),
    };
    let o = raw.output.unwrap_or_default();
    let output = Output {
        interval: defaulted!(o.interval, "output.interval", DEFAULT_OUTPUT_INTERVAL),
    };

    let config = ScenarioConfig {
        name,
        domain,
        liquid_region,
        liquid,
        gas,
        physics,
        numerics,
        output,
        defaults_applied: defaults,
    };
    if !missing.is_empty() {
        // Range checks on placeholder values would only add noise.
        return Err(Error::Validation(missing));
    }
    config.validate()?;
    Ok(config)
}

fn ratio(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}
