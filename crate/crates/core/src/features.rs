//! The five-component description of a pass.
//!
//! All components are normalized into `[0, 1]`: times by the search horizon,
//! angles by pi, distances by the field diagonal.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{Field, Vec2};

pub const FEATURE_DIM: usize = 5;

/// `[intercept_time, open_goal_angle, dist_to_goal, shot_deflection, opponent_margin]`
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub [f64; FEATURE_DIM]);

impl FeatureVector {
    pub const NAMES: [&'static str; FEATURE_DIM] = [
        "intercept_time",
        "open_goal_angle",
        "dist_to_goal",
        "shot_deflection",
        "opponent_margin",
    ];

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn intercept_time(&self) -> f64 {
        self.0[0]
    }

    pub fn open_goal_angle(&self) -> f64 {
        self.0[1]
    }

    pub fn dist_to_goal(&self) -> f64 {
        self.0[2]
    }

    pub fn shot_deflection(&self) -> f64 {
        self.0[3]
    }

    pub fn opponent_margin(&self) -> f64 {
        self.0[4]
    }

    pub fn in_unit_box(&self) -> bool {
        self.0.iter().all(|v| (0.0..=1.0).contains(v))
    }

    /// Unit vector along feature `i`; used for tabular fixtures.
    pub fn one_hot(i: usize) -> Self {
        let mut x = [0.0; FEATURE_DIM];
        x[i] = 1.0;
        FeatureVector(x)
    }
}

fn unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Angle subtended by the opponent goal mouth at `p`, radians in `[0, pi]`.
///
/// Built from the bearings to the two posts, so a point sitting on a post
/// gets the limiting value from inside the field.
pub fn open_goal_angle(field: &Field, p: Vec2) -> f64 {
    let (lo, hi) = field.opponent_goal_posts();
    let b_lo = (lo - p).angle();
    let b_hi = (hi - p).angle();
    wrap_angle(b_hi - b_lo).abs()
}

/// Turn between the incoming pass and the follow-up shot at `p`, radians.
pub fn shot_deflection(field: &Field, leader: Vec2, p: Vec2) -> f64 {
    (p - leader).angle_between(field.opponent_goal_center() - p)
}

/// Features of a pass received at `point` at `time`, with the receiver
/// beating the fastest opponent by `margin` seconds.
pub fn extract_features(
    field: &Field,
    horizon: f64,
    leader: Vec2,
    point: Vec2,
    time: f64,
    margin: f64,
) -> FeatureVector {
    FeatureVector([
        unit(time / horizon),
        unit(open_goal_angle(field, point) / PI),
        unit(point.distance(field.opponent_goal_center()) / field.diagonal()),
        unit(shot_deflection(field, leader, point) / PI),
        unit(margin / horizon),
    ])
}
