//! Small 2D geometry helpers shared by every module.

use serde::{Deserialize, Serialize};

pub type Vec2 = nalgebra::Vector2<f64>;

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Clamps `p` into the rectangle, returning whether it had to move.
    pub fn clamp(&self, p: &mut Vec2) -> bool {
        let before = *p;
        p.x = p.x.clamp(self.x_min, self.x_max);
        p.y = p.y.clamp(self.y_min, self.y_max);
        before != *p
    }

    /// Distance from `p` to the nearest of the four walls (zero on the boundary).
    pub fn wall_distance(&self, p: &Vec2) -> f64 {
        (p.x - self.x_min).min(self.x_max - p.x).min(p.y - self.y_min).min(self.y_max - p.y)
    }
}
