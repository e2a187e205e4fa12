//! Time-optimal point-mass motion under speed and acceleration limits.
//!
//! Each axis is an independent double integrator driven bang-bang: full
//! acceleration, full deceleration or cruise at the speed cap. The 2D planner
//! splits the robot's limits evenly across the axes (`v_max / sqrt(2)`,
//! `a_max / sqrt(2)`), so the combined command never exceeds the robot's
//! limits, and reports the slower axis. Targets are always reached at rest.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Slack allowed on observed speeds above `v_max`.
pub const SPEED_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotLimits {
    /// m/s
    pub v_max: f64,
    /// m/s^2
    pub a_max: f64,
    /// rad/s, carried for completeness; the point-mass planner ignores it.
    pub omega_max: f64,
    /// rad/s^2, likewise unused.
    pub alpha_max: f64,
}

impl Default for RobotLimits {
    fn default() -> Self {
        Self {
            v_max: 3.0,
            a_max: 4.5,
            omega_max: 15.0,
            alpha_max: 15.0,
        }
    }
}

impl RobotLimits {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("v_max", self.v_max),
            ("a_max", self.a_max),
            ("omega_max", self.omega_max),
            ("alpha_max", self.alpha_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, "robot limits must be finite and positive"));
            }
        }
        Ok(())
    }

    /// Per-axis speed and acceleration budgets used by the decoupled planner.
    pub fn axis_budget(&self) -> (f64, f64) {
        (self.v_max / SQRT_2, self.a_max / SQRT_2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Team {
    Ours,
    Theirs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub id: u32,
    pub team: Team,
    pub position: Vec2,
    pub velocity: Vec2,
}

impl RobotState {
    pub fn at_rest(id: u32, team: Team, position: Vec2) -> Self {
        Self {
            id,
            team,
            position,
            velocity: Vec2::ZERO,
        }
    }
}

/// One constant-acceleration piece of a 1D profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub accel: f64,
}

/// Bang-bang segments that bring a 1D double integrator from velocity `v0`
/// to rest at displacement `d`, with `|v| <= v_cap` and `|a| <= a_cap`.
///
/// Overshooting starts (already too fast to stop in time, or moving away)
/// brake to rest first and then apply the rest-start profile.
pub fn profile_1d(d: f64, v0: f64, v_cap: f64, a_cap: f64) -> Vec<Segment> {
    let mut out = Vec::with_capacity(4);
    build_profile(d, v0, v_cap, a_cap, &mut out);
    out
}

fn build_profile(d: f64, v0: f64, v_cap: f64, a_cap: f64, out: &mut Vec<Segment>) {
    if d == 0.0 && v0 == 0.0 {
        return;
    }
    // Work in the frame where the target lies ahead.
    let sign = if d < 0.0 || (d == 0.0 && v0 < 0.0) { -1.0 } else { 1.0 };
    let d = d * sign;
    let mut v = v0 * sign;
    let mut rest = d;

    if v < 0.0 {
        out.push(Segment {
            duration: -v / a_cap,
            accel: sign * a_cap,
        });
        rest += v * v / (2.0 * a_cap);
        v = 0.0;
    } else if v > v_cap {
        out.push(Segment {
            duration: (v - v_cap) / a_cap,
            accel: -sign * a_cap,
        });
        rest -= (v * v - v_cap * v_cap) / (2.0 * a_cap);
        v = v_cap;
    }

    let stop = v * v / (2.0 * a_cap);
    if stop > rest {
        out.push(Segment {
            duration: v / a_cap,
            accel: -sign * a_cap,
        });
        build_profile(sign * (rest - stop), 0.0, v_cap, a_cap, out);
        return;
    }

    let peak = (a_cap * rest + 0.5 * v * v).sqrt();
    if peak <= v_cap {
        out.push(Segment {
            duration: (peak - v) / a_cap,
            accel: sign * a_cap,
        });
        out.push(Segment {
            duration: peak / a_cap,
            accel: -sign * a_cap,
        });
    } else {
        let ramp = (v_cap * v_cap - v * v) / (2.0 * a_cap);
        let brake = v_cap * v_cap / (2.0 * a_cap);
        let cruise = ((rest - ramp - brake) / v_cap).max(0.0);
        out.push(Segment {
            duration: (v_cap - v) / a_cap,
            accel: sign * a_cap,
        });
        out.push(Segment {
            duration: cruise,
            accel: 0.0,
        });
        out.push(Segment {
            duration: v_cap / a_cap,
            accel: -sign * a_cap,
        });
    }
}

/// Minimum time for a 1D double integrator to cover displacement `d` and
/// stop, starting at velocity `v0`.
pub fn time_to_point_1d(d: f64, v0: f64, v_cap: f64, a_cap: f64) -> f64 {
    if d == 0.0 && v0 == 0.0 {
        return 0.0;
    }
    // Rest start is the hot path of every interception scan.
    if v0 == 0.0 {
        let d = d.abs();
        return if d * a_cap <= v_cap * v_cap {
            2.0 * (d / a_cap).sqrt()
        } else {
            d / v_cap + v_cap / a_cap
        };
    }
    profile_1d(d, v0, v_cap, a_cap)
        .iter()
        .map(|s| s.duration)
        .sum()
}

/// Upper bound on the time for `start` to reach `target` and stop there.
pub fn time_to_point(start: &RobotState, target: Vec2, limits: &RobotLimits) -> f64 {
    let (v_cap, a_cap) = limits.axis_budget();
    let delta = target - start.position;
    let tx = time_to_point_1d(delta.x, start.velocity.x, v_cap, a_cap);
    let ty = time_to_point_1d(delta.y, start.velocity.y, v_cap, a_cap);
    tx.max(ty)
}

/// Follow the optimal 1D profile toward `target` for `dt` seconds.
///
/// Returns the new `(position, velocity)`. Once the profile finishes inside
/// the step the axis sits exactly on `target` at rest.
pub fn advance_1d(pos: f64, vel: f64, target: f64, v_cap: f64, a_cap: f64, dt: f64) -> (f64, f64) {
    let mut x = pos;
    let mut v = vel;
    let mut left = dt;
    for seg in profile_1d(target - pos, vel, v_cap, a_cap) {
        let h = seg.duration.min(left);
        x += v * h + 0.5 * seg.accel * h * h;
        v += seg.accel * h;
        left -= h;
        if left <= 0.0 {
            return (x, v);
        }
    }
    (target, 0.0)
}

/// Advance a robot toward `target` for `dt` seconds on the decoupled profile.
pub fn advance(state: &RobotState, target: Vec2, limits: &RobotLimits, dt: f64) -> RobotState {
    let (v_cap, a_cap) = limits.axis_budget();
    let (x, vx) = advance_1d(state.position.x, state.velocity.x, target.x, v_cap, a_cap, dt);
    let (y, vy) = advance_1d(state.position.y, state.velocity.y, target.y, v_cap, a_cap, dt);
    RobotState {
        position: Vec2::new(x, y),
        velocity: Vec2::new(vx, vy),
        ..*state
    }
}
