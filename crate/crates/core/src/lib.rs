//! Meshfree Lagrangian particle simulation of 2D incompressible two-phase flow
//! with surface tension and static contact angles.
//!
//! All spatial derivatives come from weighted least-squares fits over particle
//! neighborhoods ([`ls`]); the pressure Poisson equation is discretized by a
//! constrained least-squares fit and solved by Gauss-Seidel ([`elliptic`]);
//! surface tension enters as a continuum surface force computed from a
//! smoothed color function ([`interface`]); [`stepper`] advances the flow by a
//! projection scheme.

pub mod cloud;
pub mod config;
pub mod convergence;
pub mod diagnostics;
pub mod driver;
pub mod elliptic;
pub mod error;
pub mod geometry;
pub mod interface;
pub mod io;
pub mod ls;
pub mod management;
pub mod oracles;
pub mod particle;
pub mod scenarios;
pub mod stepper;

pub use cloud::{weight, NeighborList, ParticleCloud};
pub use config::{parse_config, parse_config_str, ScenarioConfig};
pub use error::{Error, Result};
pub use geometry::{Rect, Vec2};
pub use particle::{Particle, ParticleKind, Phase};
pub use stepper::{Simulation, StepReport};
