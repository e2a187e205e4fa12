//! Pass episodes and the 4v4 attack/defense harness.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{defense_targets, Commands, SimConfig, SimEvent, Simulator, TraceRecord};
use crate::ball::{BallPhysicsParams, BallState};
use crate::error::Result;
use crate::geometry::{Field, Vec2};
use crate::kinematics::{RobotLimits, RobotState, Team};
use crate::scoring::Policy;
use crate::search::{build_feasible_set, Cacop, KickAction, SearchParams};
use crate::training::{reward, BallEvent, EpisodeRecord, EpisodeSource, RewardParams, Transition};
use crate::world::WorldSnapshot;

/// Everything needed to generate scenes and play them out.
#[derive(Debug, Clone)]
pub struct Arena {
    pub sim: SimConfig,
    pub field: Field,
    pub physics: BallPhysicsParams,
    pub limits_ours: RobotLimits,
    pub limits_theirs: RobotLimits,
    pub actions: Vec<KickAction>,
    pub search: SearchParams,
    pub reward: RewardParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EpisodeEnd {
    Goal,
    PenaltyArea,
    Intercepted,
    Out,
    /// The ball was never taken before the pass deadline.
    Timeout,
    NoPass,
    StepCap,
}

impl EpisodeEnd {
    pub fn name(self) -> &'static str {
        match self {
            EpisodeEnd::Goal => "goal",
            EpisodeEnd::PenaltyArea => "penalty_area",
            EpisodeEnd::Intercepted => "intercepted",
            EpisodeEnd::Out => "out",
            EpisodeEnd::Timeout => "timeout",
            EpisodeEnd::NoPass => "no_pass",
            EpisodeEnd::StepCap => "step_cap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassReport {
    pub kicker: u32,
    pub intended: u32,
    pub planned_point: Vec2,
    pub planned_time: f64,
    pub captured_by: Option<(u32, Team)>,
    /// Seconds from the kick to the capture.
    pub capture_time: Option<f64>,
    pub capture_point: Option<Vec2>,
    /// Where the ball left the field, for goals and outs.
    pub exit_point: Option<Vec2>,
    pub event: BallEvent,
    pub reward: f64,
}

impl PassReport {
    pub fn received_by_intended(&self) -> bool {
        self.captured_by.is_some_and(|(id, _)| id == self.intended)
    }

    /// Ours at the end of the pass, or scored.
    pub fn retained(&self) -> bool {
        matches!(self.captured_by, Some((_, Team::Ours))) || self.event == BallEvent::Goal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub episode_id: u64,
    pub passes: Vec<PassReport>,
    pub end: EpisodeEnd,
    pub cumulative_reward: f64,
    pub records: Vec<EpisodeRecord>,
    pub trace: Vec<TraceRecord>,
}

impl EpisodeResult {
    pub fn steps(&self) -> usize {
        self.passes.len()
    }
}

/// Seed of episode `episode` in a run seeded by `seed`.
pub fn episode_seed(seed: u64, episode: u64) -> u64 {
    seed ^ episode.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn sample_spot(rng: &mut ChaCha8Rng, x: (f64, f64), y: (f64, f64), taken: &[Vec2]) -> Vec2 {
    let mut p = Vec2::ZERO;
    for _ in 0..1000 {
        p = Vec2::new(rng.random_range(x.0..x.1), rng.random_range(y.0..y.1));
        if taken.iter().all(|q| q.distance(p) >= 0.5) {
            break;
        }
    }
    p
}

/// Random attacking scene. Our leader (id 0) holds the ball in our half;
/// its teammates spread forward; opponents (ids from 10) stand in their half.
pub fn random_world(arena: &Arena, seed: u64) -> WorldSnapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l, w) = (arena.field.length, arena.field.width);
    let mut taken = Vec::new();
    let mut robots = Vec::new();
    for i in 0..arena.sim.team_size_ours {
        let p = if i == 0 {
            sample_spot(&mut rng, (0.12 * l, 0.42 * l), (0.17 * w, 0.83 * w), &taken)
        } else {
            sample_spot(&mut rng, (0.25 * l, 0.88 * l), (0.09 * w, 0.91 * w), &taken)
        };
        taken.push(p);
        robots.push(RobotState::at_rest(i as u32, Team::Ours, p));
    }
    for i in 0..arena.sim.team_size_theirs {
        let p = sample_spot(&mut rng, (0.42 * l, 0.96 * l), (0.09 * w, 0.91 * w), &taken);
        taken.push(p);
        robots.push(RobotState::at_rest(10 + i as u32, Team::Theirs, p));
    }
    WorldSnapshot {
        ball: BallState::at_rest(robots[0].position),
        robots,
        leader_id: 0,
        field: arena.field,
        limits_ours: arena.limits_ours,
        limits_theirs: arena.limits_theirs,
    }
}

fn defense_commands(sim: &Simulator) -> Vec<(u32, Vec2)> {
    let cfg = sim.config();
    defense_targets(
        cfg.defense,
        sim.robots(),
        sim.ball_state().position,
        sim.holder(),
        sim.field(),
        cfg.mark_distance,
    )
}

fn play_pass(sim: &mut Simulator, kicker: u32, c: &Cacop, arena: &Arena) -> PassReport {
    let mut targets: Vec<(u32, Vec2)> = sim
        .robots()
        .iter()
        .filter(|r| r.team == Team::Ours)
        .map(|r| (r.id, if r.id == c.receiver_id { c.point() } else { r.position }))
        .collect();
    targets.extend(defense_commands(sim));
    let mut cmds = Commands {
        targets,
        kick: Some((kicker, c.action)),
        receiver: Some(c.receiver_id),
    };
    let mut report = PassReport {
        kicker,
        intended: c.receiver_id,
        planned_point: c.point(),
        planned_time: c.time(),
        captured_by: None,
        capture_time: None,
        capture_point: None,
        exit_point: None,
        event: BallEvent::None,
        reward: 0.0,
    };
    let t_kick = sim.time();
    let deadline = c.time() + arena.sim.pass_timeout;
    loop {
        sim.step(&cmds);
        for ev in sim.events() {
            match *ev {
                SimEvent::Capture { robot, team, x, y } => {
                    let p = Vec2::new(x, y);
                    report.captured_by = Some((robot, team));
                    report.capture_time = Some(sim.time() - t_kick);
                    report.capture_point = Some(p);
                    if team == Team::Ours {
                        let in_box = arena.field.opponent_penalty_area().contains(p);
                        report.event = if in_box { BallEvent::PenaltyArea } else { BallEvent::None };
                        report.reward = reward(p, report.event, &arena.reward, &arena.field);
                    }
                }
                SimEvent::Goal { x, y } => {
                    let p = Vec2::new(x, y);
                    report.exit_point = Some(p);
                    report.event = BallEvent::Goal;
                    report.reward = reward(p, BallEvent::Goal, &arena.reward, &arena.field);
                }
                SimEvent::Out { x, y } => report.exit_point = Some(Vec2::new(x, y)),
                SimEvent::Kick { .. } => {}
            }
        }
        if !sim.ball_free() || sim.time() - t_kick > deadline {
            return report;
        }
        cmds = Commands {
            targets: defense_commands(sim),
            ..Commands::default()
        };
    }
}

/// Play passes until a terminal event or the pass cap.
///
/// Successful receptions earn the shaped reward at the capture point (plus
/// the penalty-area bonus, which ends the episode); a goal earns the goal
/// bonus; an interception, an out or a lost ball earns 0 and ends it.
pub fn run_pass_episode(
    sim: &mut Simulator,
    arena: &Arena,
    policy: Policy<'_>,
    episode_id: u64,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeResult> {
    let mut passes = Vec::new();
    let mut transitions: Vec<Transition> = Vec::new();
    let mut end = EpisodeEnd::StepCap;
    let mut open = true;

    for _ in 0..arena.sim.max_passes {
        let world = sim.snapshot();
        let set = build_feasible_set(&world, &arena.actions, &arena.physics, &arena.search)?;
        if let Some(last) = transitions.last_mut() {
            last.next_candidates = set.cacops.iter().map(|c| c.features).collect();
        }
        let Some(choice) = policy.choose(&set.cacops, rng) else {
            end = EpisodeEnd::NoPass;
            open = false;
            break;
        };
        let report = play_pass(sim, world.leader_id, choice, arena);
        let stop = match (report.event, report.captured_by) {
            (BallEvent::Goal, _) => Some(EpisodeEnd::Goal),
            (BallEvent::PenaltyArea, _) => Some(EpisodeEnd::PenaltyArea),
            (_, Some((_, Team::Ours))) => None,
            (_, Some((_, Team::Theirs))) => Some(EpisodeEnd::Intercepted),
            (_, None) if report.exit_point.is_some() => Some(EpisodeEnd::Out),
            (_, None) => Some(EpisodeEnd::Timeout),
        };
        transitions.push(Transition {
            state_features: choice.features,
            reward: report.reward,
            next_candidates: Vec::new(),
            terminal: stop.is_some(),
        });
        passes.push(report);
        if let Some(e) = stop {
            end = e;
            open = false;
            break;
        }
    }
    // Cut off by the pass cap: the last step still sees its successors.
    if open && !transitions.is_empty() {
        let set = build_feasible_set(&sim.snapshot(), &arena.actions, &arena.physics, &arena.search)?;
        transitions.last_mut().expect("nonempty").next_candidates = set.cacops.iter().map(|c| c.features).collect();
    }

    let records = transitions
        .iter()
        .enumerate()
        .map(|(i, t)| EpisodeRecord::from_transition(episode_id, i as u32, t))
        .collect();
    Ok(EpisodeResult {
        episode_id,
        cumulative_reward: passes.iter().map(|p: &PassReport| p.reward).sum(),
        passes,
        end,
        records,
        trace: sim.take_trace(),
    })
}

impl Arena {
    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.field.validate()?;
        self.physics.validate()?;
        self.limits_ours.validate()?;
        self.limits_theirs.validate()?;
        self.search.validate()?;
        self.reward.validate()?;
        for a in &self.actions {
            a.validate()?;
        }
        Ok(())
    }

    pub fn simulator(&self, world: &WorldSnapshot) -> Result<Simulator> {
        Simulator::new(world, self.sim.clone(), self.physics)
    }

    /// Play the scene of `episode` under a run `seed`.
    pub fn play_episode(&self, seed: u64, episode: u64, policy: Policy<'_>, trace: bool) -> Result<EpisodeResult> {
        let s = episode_seed(seed, episode);
        let mut rng = ChaCha8Rng::seed_from_u64(s.rotate_left(17));
        self.play_seeded(s, episode, policy, &mut rng, trace)
    }

    fn play_seeded(
        &self,
        scene_seed: u64,
        episode: u64,
        policy: Policy<'_>,
        rng: &mut ChaCha8Rng,
        trace: bool,
    ) -> Result<EpisodeResult> {
        let world = random_world(self, scene_seed);
        let mut sim = self.simulator(&world)?;
        if trace {
            sim.enable_trace();
        }
        run_pass_episode(&mut sim, self, policy, episode, rng)
    }
}

impl EpisodeSource for Arena {
    fn play(&mut self, episode: u64, policy: Policy<'_>, rng: &mut ChaCha8Rng) -> Result<Vec<EpisodeRecord>> {
        let s = episode_seed(self.sim.seed, episode);
        Ok(self.play_seeded(s, episode, policy, rng, false)?.records)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FourVFourReport {
    pub episodes: usize,
    pub passes: usize,
    /// Passes that ended with us still on the ball.
    pub retained: usize,
    /// Passes taken by the teammate they were aimed at.
    pub received: usize,
    pub episode_rewards: Vec<f64>,
    pub ends: Vec<EpisodeEnd>,
}

impl FourVFourReport {
    fn ratio(a: usize, b: usize) -> f64 {
        if b == 0 {
            0.0
        } else {
            a as f64 / b as f64
        }
    }

    pub fn possession_retention(&self) -> f64 {
        Self::ratio(self.retained, self.passes)
    }

    pub fn receiver_capture_rate(&self) -> f64 {
        Self::ratio(self.received, self.passes)
    }

    pub fn mean_reward(&self) -> f64 {
        if self.episodes == 0 {
            0.0
        } else {
            self.episode_rewards.iter().sum::<f64>() / self.episodes as f64
        }
    }

    pub fn mean_passes(&self) -> f64 {
        Self::ratio(self.passes, self.episodes)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "episodes {}", self.episodes);
        let _ = writeln!(out, "passes {}", self.passes);
        let _ = writeln!(out, "possession_retention {:.6}", self.possession_retention());
        let _ = writeln!(out, "receiver_capture_rate {:.6}", self.receiver_capture_rate());
        let _ = writeln!(out, "mean_reward {:.6}", self.mean_reward());
        let _ = writeln!(out, "mean_passes {:.6}", self.mean_passes());
        let mut counts: Vec<(EpisodeEnd, usize)> = Vec::new();
        for e in &self.ends {
            match counts.iter_mut().find(|(k, _)| k == e) {
                Some((_, n)) => *n += 1,
                None => counts.push((*e, 1)),
            }
        }
        counts.sort();
        for (e, n) in counts {
            let _ = writeln!(out, "end.{} {}", e.name(), n);
        }
        out
    }
}

/// Play `n_episodes` seeded scenes with `policy` and aggregate.
///
/// Episodes run in parallel; each has its own scene and random stream, so
/// the report does not depend on the worker count.
pub fn run_4v4(arena: &Arena, policy: Policy<'_>, n_episodes: usize, seed: u64) -> Result<FourVFourReport> {
    arena.validate()?;
    let results: Vec<EpisodeResult> = (0..n_episodes as u64)
        .into_par_iter()
        .map(|ep| arena.play_episode(seed, ep, policy, false))
        .collect::<Result<_>>()?;
    let mut report = FourVFourReport {
        episodes: results.len(),
        ..Default::default()
    };
    for r in &results {
        report.passes += r.passes.len();
        report.retained += r.passes.iter().filter(|p| p.retained()).count();
        report.received += r.passes.iter().filter(|p| p.received_by_intended()).count();
        report.episode_rewards.push(r.cumulative_reward);
        report.ends.push(r.end);
    }
    Ok(report)
}
