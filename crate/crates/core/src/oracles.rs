//! Closed-form reference solutions: circular-cap drop geometry, the Laplace
//! law, gravity asymptotics of sessile drops and the manufactured diffusion
//! problems with a discontinuous coefficient.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Equilibrium shape of a 2D sessile drop of initial semicircle radius `R0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapGeometry {
    /// Radius of curvature [m].
    pub r: f64,
    /// Wetted length `2 R sin(theta)` [m].
    pub l: f64,
    /// Apex height `R (1 - cos(theta))` [m].
    pub h: f64,
}

fn check_angle(theta_s: f64) -> Result<()> {
    if theta_s > 0.0 && theta_s < PI {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "contact angle {theta_s} rad must lie strictly between 0 and pi"
        )))
    }
}

/// `R^2 (theta - sin(theta) cos(theta)) = pi R0^2 / 2`: the cap keeps the area of the initial semicircle.
pub fn cap_geometry(r0: f64, theta_s: f64) -> Result<CapGeometry> {
    check_angle(theta_s)?;
    if !(r0 > 0.0) {
        return Err(Error::Config(format!("initial radius {r0} must be positive")));
    }
    let r = r0 * (PI / (2.0 * (theta_s - theta_s.sin() * theta_s.cos()))).sqrt();
    Ok(CapGeometry {
        r,
        l: 2.0 * r * theta_s.sin(),
        h: r * (1.0 - theta_s.cos()),
    })
}

/// Pressure jump `sigma / R` across a 2D interface of radius `R`.
pub fn laplace_pressure(sigma: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Config(format!("radius {r} must be positive")));
    }
    Ok(sigma / r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GravityAsymptotics {
    /// Eotvos number `rho_l g R0^2 / sigma`.
    pub eo: f64,
    /// Height of the gravity-free cap.
    pub h0: f64,
    /// Pancake height `2 sqrt(sigma / (rho_l g)) sin(theta / 2)`; `None` without gravity.
    pub h_inf: Option<f64>,
}

pub fn gravity_asymptotics(sigma: f64, rho_l: f64, g: f64, r0: f64, theta_s: f64) -> GravityAsymptotics {
    let h0 = r0 * (1.0 - theta_s.cos()) * (PI / (2.0 * (theta_s - theta_s.sin() * theta_s.cos()))).sqrt();
    GravityAsymptotics {
        eo: rho_l * g * r0 * r0 / sigma,
        h0,
        h_inf: (g > 0.0).then(|| 2.0 * (sigma / (rho_l * g)).sqrt() * (theta_s / 2.0).sin()),
    }
}

/// Gravitational acceleration giving Eotvos number `eo`.
pub fn gravity_for_eotvos(eo: f64, sigma: f64, rho_l: f64, r0: f64) -> f64 {
    eo * sigma / (rho_l * r0 * r0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffusionExample {
    /// Straight interface `x = 1/2`, `k = 1000` on the left.
    One,
    /// Elliptic inclusion `(x-1/2)^2 + 4(y-1/2)^2 < 0.01` with `k = 1000` inside.
    Two,
}

impl DiffusionExample {
    pub fn from_number(n: u32) -> Option<Self> {
        match n {
            1 => Some(Self::One),
            2 => Some(Self::Two),
            _ => None,
        }
    }

    pub fn number(self) -> u32 {
        match self {
            Self::One => 1,
            Self::Two => 2,
        }
    }
}

/// `div(k grad psi) = f` on the unit square with piecewise-constant `k` and
/// the exact solution `psi = g / k`, where `g` is smooth and vanishes on the
/// interface, so both `psi` and the flux are continuous there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffusionProblem {
    pub example: DiffusionExample,
    pub k_inside: f64,
    pub k_outside: f64,
}

const ELLIPSE_R2: f64 = 0.01;

impl DiffusionProblem {
    pub fn new(example: DiffusionExample) -> Self {
        Self {
            example,
            k_inside: 1000.0,
            k_outside: 1.0,
        }
    }

    pub fn inside(&self, p: &Vec2) -> bool {
        match self.example {
            DiffusionExample::One => p.x <= 0.5,
            DiffusionExample::Two => self.bracket(p) <= 0.0,
        }
    }

    pub fn k(&self, p: &Vec2) -> f64 {
        if self.inside(p) {
            self.k_inside
        } else {
            self.k_outside
        }
    }

    // The factor that vanishes on the interface, its gradient and Laplacian.
    fn bracket(&self, p: &Vec2) -> f64 {
        match self.example {
            DiffusionExample::One => (p.x - 0.5) * (p.y - 0.5),
            DiffusionExample::Two => (p.x - 0.5).powi(2) + 4.0 * (p.y - 0.5).powi(2) - ELLIPSE_R2,
        }
    }

    fn bracket_derivatives(&self, p: &Vec2) -> (Vec2, f64) {
        match self.example {
            DiffusionExample::One => (Vec2::new(p.y - 0.5, p.x - 0.5), 0.0),
            DiffusionExample::Two => (Vec2::new(2.0 * (p.x - 0.5), 8.0 * (p.y - 0.5)), 10.0),
        }
    }

    /// Smooth numerator `g = sin(pi x / 2) * bracket * (1 + x^2 + y^2)`.
    pub fn g(&self, p: &Vec2) -> f64 {
        (FRAC_PI_2 * p.x).sin() * self.bracket(p) * (1.0 + p.norm_squared())
    }

    /// Exact solution of the discontinuous-coefficient problem.
    pub fn exact(&self, p: &Vec2) -> f64 {
        self.g(p) / self.k(p)
    }

    /// `f = div(k grad(g / k)) = lap g` away from the interface.
    pub fn source(&self, p: &Vec2) -> f64 {
        // g = S B Q with S = sin(pi x / 2), B the bracket, Q = 1 + x^2 + y^2.
        let s = (FRAC_PI_2 * p.x).sin();
        let grad_s = Vec2::new(FRAC_PI_2 * (FRAC_PI_2 * p.x).cos(), 0.0);
        let lap_s = -FRAC_PI_2 * FRAC_PI_2 * s;
        let b = self.bracket(p);
        let (grad_b, lap_b) = self.bracket_derivatives(p);
        let q = 1.0 + p.norm_squared();
        let grad_q = 2.0 * p;
        let lap_q = 4.0;
        lap_s * b * q + s * lap_b * q + s * b * lap_q + 2.0 * (grad_s.dot(&grad_b) * q + grad_s.dot(&grad_q) * b + grad_b.dot(&grad_q) * s)
    }
}

/// Problem definition for a manufactured example. `h` does not change the
/// continuous problem; it is accepted so callers can treat the pair as a case.
pub fn manufactured_diffusion(example: DiffusionExample, _h: f64) -> DiffusionProblem {
    DiffusionProblem::new(example)
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_order(h: &[f64], error: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(error)
        .filter(|(h, e)| **h > 0.0 && **e > 0.0 && e.is_finite())
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
