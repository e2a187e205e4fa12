//! Planar vectors and field geometry.
//!
//! Field coordinates put the origin at the corner of our goal line, so the
//! field spans `[0, length] x [0, width]` and the opponent goal sits on the
//! line `x = length`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `angle` radians from the +x axis.
    #[inline]
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: c, y: s }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or zero for the zero vector.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n > 0.0 {
            self * (1.0 / n)
        } else {
            Vec2::ZERO
        }
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Unsigned angle between two vectors in `[0, pi]`; zero if either is zero.
    pub fn angle_between(self, other: Vec2) -> f64 {
        if self.norm_squared() == 0.0 || other.norm_squared() == 0.0 {
            return 0.0;
        }
        self.cross(other).atan2(self.dot(other)).abs()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Distance from `self` to the segment `a..b`.
    pub fn distance_to_segment(self, a: Vec2, b: Vec2) -> f64 {
        let ab = b - a;
        let len2 = ab.norm_squared();
        if len2 == 0.0 {
            return self.distance(a);
        }
        let t = ((self - a).dot(ab) / len2).clamp(0.0, 1.0);
        self.distance(a + ab * t)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Axis-aligned rectangle, used for penalty areas and grid bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Playing field dimensions in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Field {
    pub length: f64,
    pub width: f64,
    pub goal_width: f64,
    /// Extent of the penalty area along the goal line.
    pub penalty_width: f64,
    /// Extent of the penalty area into the field.
    pub penalty_depth: f64,
}

impl Default for Field {
    fn default() -> Self {
        Self {
            length: 12.0,
            width: 9.0,
            goal_width: 1.8,
            penalty_width: 3.6,
            penalty_depth: 1.8,
        }
    }
}

impl Field {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("field.length", self.length),
            ("field.width", self.width),
            ("field.goal_width", self.goal_width),
            ("field.penalty_width", self.penalty_width),
            ("field.penalty_depth", self.penalty_depth),
        ];
        for (name, v) in dims {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, "must be finite and positive"));
            }
        }
        if self.goal_width > self.width || self.penalty_width > self.width {
            return Err(Error::invalid("field", "goal and penalty area must fit the goal line"));
        }
        if self.penalty_depth > self.length / 2.0 {
            return Err(Error::invalid("field.penalty_depth", "exceeds half the field"));
        }
        Ok(())
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.bounds().contains(p)
    }

    pub fn bounds(&self) -> Rect {
        Rect {
            min: Vec2::ZERO,
            max: Vec2::new(self.length, self.width),
        }
    }

    pub fn diagonal(&self) -> f64 {
        self.length.hypot(self.width)
    }

    pub fn opponent_goal_center(&self) -> Vec2 {
        Vec2::new(self.length, self.width / 2.0)
    }

    /// The two opponent goal posts, lower `y` first.
    pub fn opponent_goal_posts(&self) -> (Vec2, Vec2) {
        let c = self.opponent_goal_center();
        let h = self.goal_width / 2.0;
        (Vec2::new(c.x, c.y - h), Vec2::new(c.x, c.y + h))
    }

    pub fn opponent_penalty_area(&self) -> Rect {
        let cy = self.width / 2.0;
        let h = self.penalty_width / 2.0;
        Rect {
            min: Vec2::new(self.length - self.penalty_depth, cy - h),
            max: Vec2::new(self.length, cy + h),
        }
    }

    /// Whether a ball crossing the opponent goal line at height `y` scores.
    pub fn in_opponent_goal_mouth(&self, y: f64) -> bool {
        let (lo, hi) = self.opponent_goal_posts();
        y >= lo.y && y <= hi.y
    }
}
