//! Desk-scale 2D soccer simulator.
//!
//! Robots follow the same bang-bang profiles the planner assumes; a kicked
//! ball follows its predicted trajectory exactly. A robot takes the ball when
//! the ball's path over a step passes within the capture radius of it while
//! the ball is on the ground. Robot collisions are ignored.

mod defense;
mod episode;
mod heatmap;

use serde::{Deserialize, Serialize};

pub use defense::{defense_targets, DefensePolicy};
pub use episode::{
    random_world, run_4v4, run_pass_episode, Arena, EpisodeEnd, EpisodeResult, FourVFourReport, PassReport,
};
pub use heatmap::score_heatmap;

use crate::ball::{predict_flat, BallPhysicsParams, BallState, BallTrajectory, KickMode};
use crate::error::{Error, Result};
use crate::geometry::{Field, Vec2};
use crate::kinematics::{advance, RobotLimits, RobotState, Team};
use crate::search::{kick_trajectory, KickAction};
use crate::world::WorldSnapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Seconds per step.
    pub timestep: f64,
    pub team_size_ours: usize,
    pub team_size_theirs: usize,
    pub defense: DefensePolicy,
    pub seed: u64,
    pub robot_radius: f64,
    /// Extra reach beyond the robot radius for taking the ball.
    pub capture_slack: f64,
    /// Largest ball speed relative to the robot that can still be taken, m/s.
    pub capture_rel_speed: f64,
    /// Passes per episode before it is cut off.
    pub max_passes: usize,
    /// Seconds past the planned reception before a pass counts as lost.
    pub pass_timeout: f64,
    /// How far a marker stands from its man, toward the ball.
    pub mark_distance: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            timestep: 1.0 / 60.0,
            team_size_ours: 4,
            team_size_theirs: 4,
            defense: DefensePolicy::ManMark,
            seed: 0,
            robot_radius: 0.09,
            capture_slack: 0.02,
            capture_rel_speed: 10.0,
            max_passes: 8,
            pass_timeout: 2.0,
            mark_distance: 0.4,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sim.timestep", self.timestep),
            ("sim.robot_radius", self.robot_radius),
            ("sim.capture_rel_speed", self.capture_rel_speed),
            ("sim.pass_timeout", self.pass_timeout),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        if !(self.capture_slack.is_finite() && self.capture_slack >= 0.0) {
            return Err(Error::invalid("sim.capture_slack", "must be non-negative"));
        }
        if !(self.mark_distance.is_finite() && self.mark_distance >= 0.0) {
            return Err(Error::invalid("sim.mark_distance", "must be non-negative"));
        }
        if self.team_size_ours < 2 {
            return Err(Error::invalid("sim.team_size_ours", "need the leader and a receiver"));
        }
        if self.team_size_ours + self.team_size_theirs > crate::world::MAX_ROBOTS {
            return Err(Error::invalid("sim", "too many robots"));
        }
        Ok(())
    }

    pub fn capture_radius(&self) -> f64 {
        self.robot_radius + self.capture_slack
    }
}

/// Per-step inputs. Targets persist until replaced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Commands {
    pub targets: Vec<(u32, Vec2)>,
    /// Kick by the robot holding the ball; ignored for anyone else.
    pub kick: Option<(u32, KickAction)>,
    /// Teammate the kick is meant for. Until the ball is taken, no other
    /// robot of that team can capture it.
    pub receiver: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SimEvent {
    Kick { robot: u32, mode: KickMode, theta: f64, v: f64 },
    Capture { robot: u32, team: Team, x: f64, y: f64 },
    Goal { x: f64, y: f64 },
    Out { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceBall {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRobot {
    pub id: u32,
    pub team: Team,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

/// One line of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: f64,
    pub ball: TraceBall,
    pub robots: Vec<TraceRobot>,
    pub events: Vec<SimEvent>,
}

#[derive(Debug, Clone)]
enum BallMotion {
    Held { by: u32 },
    Free {
        traj: BallTrajectory,
        t0: f64,
        /// The kicker cannot retake the ball until it has left its reach.
        kicker: Option<u32>,
        receiver: Option<u32>,
    },
    Dead { position: Vec2 },
}

#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    physics: BallPhysicsParams,
    field: Field,
    limits_ours: RobotLimits,
    limits_theirs: RobotLimits,
    steps: u64,
    robots: Vec<RobotState>,
    targets: Vec<Vec2>,
    ball: BallMotion,
    leader: u32,
    events: Vec<SimEvent>,
    trace: Option<Vec<TraceRecord>>,
}

/// Where the segment `a..b` leaves the field, assuming `a` is inside.
fn exit_point(a: Vec2, b: Vec2, field: &Field) -> Vec2 {
    let d = b - a;
    let mut s: f64 = 1.0;
    let mut clip = |p: f64, dp: f64, lo: f64, hi: f64| {
        if dp > 0.0 && p + dp > hi {
            s = s.min((hi - p) / dp);
        } else if dp < 0.0 && p + dp < lo {
            s = s.min((lo - p) / dp);
        }
    };
    clip(a.x, d.x, 0.0, field.length);
    clip(a.y, d.y, 0.0, field.width);
    a + d * s.max(0.0)
}

impl Simulator {
    /// Start from `world`. The leader holds the ball when it is within reach
    /// and not moving; otherwise the ball rolls free.
    pub fn new(world: &WorldSnapshot, cfg: SimConfig, physics: BallPhysicsParams) -> Result<Self> {
        world.validate()?;
        cfg.validate()?;
        physics.validate()?;
        let leader = world.leader().expect("validated");
        let held = world.ball.velocity.norm() < 1e-9
            && world.ball.position.distance(leader.position) <= cfg.capture_radius();
        let ball = if held {
            BallMotion::Held { by: leader.id }
        } else {
            BallMotion::Free {
                traj: predict_flat(world.ball, &physics),
                t0: 0.0,
                kicker: None,
                receiver: None,
            }
        };
        Ok(Self {
            cfg,
            physics,
            field: world.field,
            limits_ours: world.limits_ours,
            limits_theirs: world.limits_theirs,
            steps: 0,
            targets: world.robots.iter().map(|r| r.position).collect(),
            robots: world.robots.clone(),
            ball,
            leader: world.leader_id,
            events: Vec::new(),
            trace: None,
        })
    }

    /// Record a trace line per step from now on.
    pub fn enable_trace(&mut self) {
        if self.trace.is_none() {
            self.trace = Some(vec![self.trace_record()]);
        }
    }

    pub fn trace(&self) -> &[TraceRecord] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        self.trace.take().unwrap_or_default()
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.cfg.timestep
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn robot(&self, id: u32) -> Option<&RobotState> {
        self.robots.iter().find(|r| r.id == id)
    }

    /// Actual dynamics limits of a team.
    pub fn limits(&self, team: Team) -> &RobotLimits {
        match team {
            Team::Ours => &self.limits_ours,
            Team::Theirs => &self.limits_theirs,
        }
    }

    /// Robot holding the ball, if any.
    pub fn holder(&self) -> Option<u32> {
        match self.ball {
            BallMotion::Held { by } => Some(by),
            _ => None,
        }
    }

    pub fn ball_in_play(&self) -> bool {
        !matches!(self.ball, BallMotion::Dead { .. })
    }

    /// Whether the ball is travelling (kicked or rolling, not held or dead).
    pub fn ball_free(&self) -> bool {
        matches!(self.ball, BallMotion::Free { .. })
    }

    /// Events raised by the last step.
    pub fn events(&self) -> &[SimEvent] {
        &self.events
    }

    pub fn ball_state(&self) -> BallState {
        match &self.ball {
            BallMotion::Held { by } => {
                let r = self.robot(*by).expect("holder exists");
                BallState {
                    position: r.position,
                    velocity: r.velocity,
                }
            }
            BallMotion::Free { traj, t0, .. } => {
                let t = self.time() - t0;
                BallState {
                    position: traj.position_at(t),
                    velocity: traj.velocity_at(t),
                }
            }
            BallMotion::Dead { position } => BallState::at_rest(*position),
        }
    }

    fn ball_height(&self) -> f64 {
        match &self.ball {
            BallMotion::Free { traj, t0, .. } => traj.height_at(self.time() - t0),
            _ => 0.0,
        }
    }

    /// Planner view of the current state, with the planner's model limits.
    pub fn snapshot(&self) -> WorldSnapshot {
        WorldSnapshot {
            ball: self.ball_state(),
            robots: self.robots.clone(),
            leader_id: self.leader,
            field: self.field,
            limits_ours: self.limits_ours,
            limits_theirs: self.limits_theirs,
        }
    }

    fn trace_record(&self) -> TraceRecord {
        let b = self.ball_state();
        TraceRecord {
            time: self.time(),
            ball: TraceBall {
                x: b.position.x,
                y: b.position.y,
                z: self.ball_height(),
            },
            robots: self
                .robots
                .iter()
                .map(|r| TraceRobot {
                    id: r.id,
                    team: r.team,
                    x: r.position.x,
                    y: r.position.y,
                    vx: r.velocity.x,
                    vy: r.velocity.y,
                })
                .collect(),
            events: self.events.clone(),
        }
    }

    /// Advance one timestep.
    pub fn step(&mut self, cmds: &Commands) -> WorldSnapshot {
        self.events.clear();
        for (id, target) in &cmds.targets {
            if let Some(i) = self.robots.iter().position(|r| r.id == *id) {
                if target.is_finite() {
                    self.targets[i] = *target;
                }
            }
        }
        if let (Some((kicker, action)), BallMotion::Held { by }) = (&cmds.kick, &self.ball) {
            if kicker == by {
                let from = self.robot(*by).expect("holder exists").position;
                if let Ok(traj) = kick_trajectory(from, action, &self.physics) {
                    self.events.push(SimEvent::Kick {
                        robot: *kicker,
                        mode: action.mode,
                        theta: action.direction,
                        v: action.speed,
                    });
                    self.ball = BallMotion::Free {
                        traj,
                        t0: self.time(),
                        kicker: Some(*kicker),
                        receiver: cmds.receiver,
                    };
                }
            }
        }

        let t_prev = self.time();
        self.steps += 1;
        let t_next = self.time();
        let dt = self.cfg.timestep;
        for (r, target) in self.robots.iter_mut().zip(&self.targets) {
            let limits = match r.team {
                Team::Ours => &self.limits_ours,
                Team::Theirs => &self.limits_theirs,
            };
            *r = advance(r, *target, limits, dt);
        }

        if let BallMotion::Free { traj, t0, kicker, receiver } = &self.ball {
            let a = traj.position_at(t_prev - t0);
            let b = traj.position_at(t_next - t0);
            if !self.field.contains(b) {
                let p = exit_point(a, b, &self.field);
                let goal = b.x > self.field.length && self.field.in_opponent_goal_mouth(p.y);
                self.events.push(if goal {
                    SimEvent::Goal { x: p.x, y: p.y }
                } else {
                    SimEvent::Out { x: p.x, y: p.y }
                });
                self.ball = BallMotion::Dead { position: p };
            } else {
                let reach = self.cfg.capture_radius();
                let mut kicker = *kicker;
                if let Some(k) = kicker {
                    let kp = self.robot(k).expect("kicker exists").position;
                    if a.distance(kp) > reach {
                        kicker = None;
                    }
                }
                let reserved = receiver.and_then(|id| self.robot(id)).map(|r| (r.id, r.team));
                let mut best: Option<(f64, f64, u32)> = None;
                if traj.interceptable_at(t_next - t0) {
                    let vb = traj.velocity_at(t_next - t0);
                    let ab = b - a;
                    for r in &self.robots {
                        if Some(r.id) == kicker || reserved.is_some_and(|(id, team)| r.team == team && r.id != id) {
                            continue;
                        }
                        let d = r.position.distance_to_segment(a, b);
                        if d > reach || (vb - r.velocity).norm() > self.cfg.capture_rel_speed {
                            continue;
                        }
                        let along = if ab.norm_squared() > 0.0 {
                            ((r.position - a).dot(ab) / ab.norm_squared()).clamp(0.0, 1.0)
                        } else {
                            0.0
                        };
                        let cand = (along, d, r.id);
                        if best.is_none_or(|b| cand < b) {
                            best = Some(cand);
                        }
                    }
                }
                match best {
                    Some((_, _, id)) => {
                        let r = *self.robot(id).expect("robot exists");
                        self.events.push(SimEvent::Capture {
                            robot: id,
                            team: r.team,
                            x: r.position.x,
                            y: r.position.y,
                        });
                        self.ball = BallMotion::Held { by: id };
                        if r.team == Team::Ours {
                            self.leader = id;
                        }
                    }
                    None => {
                        if let BallMotion::Free { kicker: k, .. } = &mut self.ball {
                            *k = kicker;
                        }
                    }
                }
            }
        }

        if self.trace.is_some() {
            let rec = self.trace_record();
            self.trace.as_mut().expect("checked").push(rec);
        }
        self.snapshot()
    }
}
