use crate::config::Material;
use crate::geometry::Vec2;

/// Phase label carried by every particle; the discriminant is its color value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Gas = 1,
    Liquid = 2,
}

impl Phase {
    pub fn color(self) -> f64 {
        self as u8 as f64
    }

    /// Phase whose color is nearest to a smoothed color value.
    pub fn from_color(c: f64) -> Phase {
        if c >= 1.5 {
            Phase::Liquid
        } else {
            Phase::Gas
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParticleKind {
    Interior,
    Wall,
}

impl ParticleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParticleKind::Interior => "interior",
            ParticleKind::Wall => "wall",
        }
    }
}

/// A Lagrangian particle. Phase, density and viscosity are fixed at creation.
#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub id: u64,
    pub position: Vec2,
    pub velocity: Vec2,
    pub pressure: f64,
    pub rho_smooth: f64,
    pub color_smooth: f64,
    phase: Phase,
    kind: ParticleKind,
    rho: f64,
    mu: f64,
    wall_normal: Option<Vec2>,
}

impl Particle {
    pub fn interior(id: u64, position: Vec2, phase: Phase, material: Material) -> Self {
        Self {
            id,
            position,
            velocity: Vec2::zeros(),
            pressure: 0.0,
            rho_smooth: material.rho,
            color_smooth: phase.color(),
            phase,
            kind: ParticleKind::Interior,
            rho: material.rho,
            mu: material.mu,
            wall_normal: None,
        }
    }

    /// Wall particle with the given outward unit normal; velocity stays zero.
    pub fn wall(id: u64, position: Vec2, normal: Vec2, phase: Phase, material: Material) -> Self {
        Self {
            kind: ParticleKind::Wall,
            wall_normal: Some(normal.normalize()),
            ..Self::interior(id, position, phase, material)
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn color(&self) -> f64 {
        self.phase.color()
    }

    pub fn kind(&self) -> ParticleKind {
        self.kind
    }

    pub fn is_wall(&self) -> bool {
        self.kind == ParticleKind::Wall
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn wall_normal(&self) -> Option<Vec2> {
        self.wall_normal
    }
}
