//! Ball trajectory prediction for flat (rolling) and chip kicks.
//!
//! A flat kick rolls in a straight line under constant friction deceleration
//! until it stops. A chip kick makes two ballistic hops along the kick
//! direction, keeping its horizontal speed and losing vertical speed at each
//! bounce by the restitution factor, then rolls like a flat kick.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Highest kick speed the robots are allowed, m/s.
pub const MAX_KICK_SPEED: f64 = 6.5;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BallState {
    pub position: Vec2,
    pub velocity: Vec2,
}

impl BallState {
    pub fn at_rest(position: Vec2) -> Self {
        Self {
            position,
            velocity: Vec2::ZERO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BallPhysicsParams {
    /// Rolling friction deceleration, m/s^2.
    pub roll_decel: f64,
    /// Fraction of vertical speed kept at a bounce.
    pub bounce_restitution: f64,
    /// Chip launch elevation, radians.
    pub chip_launch_angle: f64,
    /// m/s^2
    pub gravity: f64,
}

impl Default for BallPhysicsParams {
    fn default() -> Self {
        Self {
            roll_decel: 0.5,
            bounce_restitution: 0.6,
            chip_launch_angle: std::f64::consts::FRAC_PI_4,
            gravity: 9.81,
        }
    }
}

impl BallPhysicsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.roll_decel.is_finite() && self.roll_decel > 0.0) {
            return Err(Error::invalid("physics.roll_decel", "must be positive"));
        }
        // Zero restitution is accepted: the second hop collapses to an instant.
        if !(self.bounce_restitution >= 0.0 && self.bounce_restitution < 1.0) {
            return Err(Error::invalid("physics.bounce_restitution", "must lie in [0, 1)"));
        }
        if !(self.chip_launch_angle > 0.0 && self.chip_launch_angle < FRAC_PI_2) {
            return Err(Error::invalid("physics.chip_launch_angle", "must lie in (0, pi/2)"));
        }
        if !(self.gravity.is_finite() && self.gravity > 0.0) {
            return Err(Error::invalid("physics.gravity", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KickMode {
    Flat,
    Chip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Airborne,
    Rolling,
    Resting,
}

/// State of the ball where a phase begins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseBoundary {
    pub time: f64,
    pub position: Vec2,
    /// Ground (horizontal) speed.
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub kind: PhaseKind,
    pub start: PhaseBoundary,
    /// Infinite for the final resting phase.
    pub end_time: f64,
    /// Vertical launch speed for airborne phases, zero otherwise.
    pub vertical_speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallTrajectory {
    kind: KickMode,
    origin: BallState,
    params: BallPhysicsParams,
    direction: Vec2,
    phases: Vec<Phase>,
}

/// Rolling prediction from the ball's current state.
pub fn predict_flat(origin: BallState, params: &BallPhysicsParams) -> BallTrajectory {
    let speed = origin.velocity.norm();
    let direction = origin.velocity.normalized();
    let mut phases = Vec::with_capacity(2);
    push_roll(&mut phases, origin.position, direction, speed, 0.0, params);
    BallTrajectory {
        kind: KickMode::Flat,
        origin,
        params: *params,
        direction,
        phases,
    }
}

/// Chip-kick prediction from `origin.position`; the origin velocity is ignored.
pub fn predict_chip(
    origin: BallState,
    kick_speed: f64,
    direction: f64,
    params: &BallPhysicsParams,
) -> Result<BallTrajectory> {
    if !(kick_speed > 0.0 && kick_speed <= MAX_KICK_SPEED) {
        return Err(Error::invalid(
            "kick_speed",
            format!("{kick_speed} outside (0, {MAX_KICK_SPEED}]"),
        ));
    }
    let dir = Vec2::from_angle(direction);
    let (sin_l, cos_l) = params.chip_launch_angle.sin_cos();
    let ground_speed = kick_speed * cos_l;
    let mut vertical = kick_speed * sin_l;

    let mut phases = Vec::with_capacity(4);
    let mut t = 0.0;
    let mut pos = origin.position;
    for _ in 0..2 {
        let hop = 2.0 * vertical / params.gravity;
        phases.push(Phase {
            kind: PhaseKind::Airborne,
            start: PhaseBoundary {
                time: t,
                position: pos,
                speed: ground_speed,
            },
            end_time: t + hop,
            vertical_speed: vertical,
        });
        t += hop;
        pos = pos + dir * (ground_speed * hop);
        vertical *= params.bounce_restitution;
    }
    push_roll(&mut phases, pos, dir, ground_speed, t, params);

    Ok(BallTrajectory {
        kind: KickMode::Chip,
        origin: BallState {
            position: origin.position,
            velocity: dir * ground_speed,
        },
        params: *params,
        direction: dir,
        phases,
    })
}

fn push_roll(
    phases: &mut Vec<Phase>,
    start: Vec2,
    dir: Vec2,
    speed: f64,
    t0: f64,
    params: &BallPhysicsParams,
) {
    if speed > 0.0 {
        let stop_time = speed / params.roll_decel;
        phases.push(Phase {
            kind: PhaseKind::Rolling,
            start: PhaseBoundary {
                time: t0,
                position: start,
                speed,
            },
            end_time: t0 + stop_time,
            vertical_speed: 0.0,
        });
        let stop = start + dir * (speed * speed / (2.0 * params.roll_decel));
        phases.push(Phase {
            kind: PhaseKind::Resting,
            start: PhaseBoundary {
                time: t0 + stop_time,
                position: stop,
                speed: 0.0,
            },
            end_time: f64::INFINITY,
            vertical_speed: 0.0,
        });
    } else {
        phases.push(Phase {
            kind: PhaseKind::Resting,
            start: PhaseBoundary {
                time: t0,
                position: start,
                speed: 0.0,
            },
            end_time: f64::INFINITY,
            vertical_speed: 0.0,
        });
    }
}

impl BallTrajectory {
    pub fn kind(&self) -> KickMode {
        self.kind
    }

    pub fn origin(&self) -> &BallState {
        &self.origin
    }

    pub fn params(&self) -> &BallPhysicsParams {
        &self.params
    }

    /// Unit ground direction; zero for a ball that never moves.
    pub fn direction(&self) -> Vec2 {
        self.direction
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    /// Where each phase starts, in time order.
    pub fn boundaries(&self) -> Vec<PhaseBoundary> {
        self.phases.iter().map(|p| p.start).collect()
    }

    /// Touchdown times and points of the two chip hops; empty for flat kicks.
    pub fn drops(&self) -> Vec<(f64, Vec2)> {
        self.phases
            .iter()
            .filter(|p| p.kind == PhaseKind::Airborne)
            .map(|p| {
                let dur = p.end_time - p.start.time;
                (p.end_time, p.start.position + self.direction * (p.start.speed * dur))
            })
            .collect()
    }

    /// Time the ball comes to rest.
    pub fn stop_time(&self) -> f64 {
        self.phases.last().map_or(0.0, |p| p.start.time)
    }

    pub fn stop_position(&self) -> Vec2 {
        self.phases.last().map_or(self.origin.position, |p| p.start.position)
    }

    /// Time the ball first touches the ground for good.
    pub fn landing_time(&self) -> f64 {
        self.phases
            .iter()
            .find(|p| p.kind != PhaseKind::Airborne)
            .map_or(0.0, |p| p.start.time)
    }

    fn phase_at(&self, t: f64) -> &Phase {
        self.phases
            .iter()
            .find(|p| t < p.end_time)
            .unwrap_or_else(|| self.phases.last().expect("trajectory has a phase"))
    }

    pub fn position_at(&self, t: f64) -> Vec2 {
        let p = self.phase_at(t);
        let tau = t - p.start.time;
        match p.kind {
            PhaseKind::Airborne => p.start.position + self.direction * (p.start.speed * tau),
            PhaseKind::Rolling => {
                let s = tau * (p.start.speed - 0.5 * self.params.roll_decel * tau);
                p.start.position + self.direction * s
            }
            PhaseKind::Resting => p.start.position,
        }
    }

    /// Ground-plane velocity at `t`.
    pub fn velocity_at(&self, t: f64) -> Vec2 {
        let p = self.phase_at(t);
        let tau = t - p.start.time;
        match p.kind {
            PhaseKind::Airborne => self.direction * p.start.speed,
            PhaseKind::Rolling => self.direction * (p.start.speed - self.params.roll_decel * tau),
            PhaseKind::Resting => Vec2::ZERO,
        }
    }

    pub fn height_at(&self, t: f64) -> f64 {
        let p = self.phase_at(t);
        if p.kind != PhaseKind::Airborne {
            return 0.0;
        }
        let tau = t - p.start.time;
        (p.vertical_speed * tau - 0.5 * self.params.gravity * tau * tau).max(0.0)
    }

    /// Field robots can only take the ball while it is on the ground.
    pub fn interceptable_at(&self, t: f64) -> bool {
        !(t > 0.0 && t < self.landing_time())
    }

    /// Whether the ball is at rest at `t`.
    pub fn is_resting_at(&self, t: f64) -> bool {
        self.phase_at(t).kind == PhaseKind::Resting
    }
}
