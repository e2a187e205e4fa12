//! Feasible pass-set construction.
//!
//! The leader's kick space is discretized into `(mode, direction, speed)`
//! actions. For every action the ball trajectory is predicted once, each
//! other robot's earliest interception is found, and every teammate that
//! reaches the ball strictly before all opponents (by more than
//! `margin_min`) forms a collaborative action/receiver pair.

use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ball::{predict_chip, predict_flat, BallPhysicsParams, BallState, BallTrajectory, KickMode, MAX_KICK_SPEED};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureVector};
use crate::geometry::Vec2;
use crate::interception::{InterceptParams, InterceptSolution, SampledTrajectory};
use crate::world::WorldSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickAction {
    pub mode: KickMode,
    /// Radians in `[0, 2pi)`.
    pub direction: f64,
    /// m/s in `(0, 6.5]`.
    pub speed: f64,
}

impl KickAction {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed > 0.0 && self.speed <= MAX_KICK_SPEED) {
            return Err(Error::invalid("kick speed", format!("{} outside (0, {MAX_KICK_SPEED}]", self.speed)));
        }
        if !(0.0..TAU).contains(&self.direction) {
            return Err(Error::invalid("kick direction", "must lie in [0, 2pi)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActionGrid {
    pub n_directions: usize,
    pub n_speeds: usize,
    pub modes: Vec<KickMode>,
}

impl Default for ActionGrid {
    fn default() -> Self {
        Self {
            n_directions: 128,
            n_speeds: 16,
            modes: vec![KickMode::Flat, KickMode::Chip],
        }
    }
}

impl ActionGrid {
    pub fn new(n_directions: usize, n_speeds: usize, modes: Vec<KickMode>) -> Self {
        Self {
            n_directions,
            n_speeds,
            modes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_directions == 0 || self.n_speeds == 0 || self.modes.is_empty() {
            return Err(Error::invalid("action grid", "counts and modes must be non-empty"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_directions * self.n_speeds * self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Every action of the grid: mode-major, then direction, then speed.
pub fn enumerate_actions(grid: &ActionGrid) -> Vec<KickAction> {
    let mut out = Vec::with_capacity(grid.len());
    for &mode in &grid.modes {
        for j in 0..grid.n_directions {
            let direction = TAU * j as f64 / grid.n_directions as f64;
            for i in 0..grid.n_speeds {
                out.push(KickAction {
                    mode,
                    direction,
                    speed: MAX_KICK_SPEED * (i + 1) as f64 / grid.n_speeds as f64,
                });
            }
        }
    }
    out
}

/// Ball trajectory produced by kicking from `from`.
pub fn kick_trajectory(from: Vec2, action: &KickAction, physics: &BallPhysicsParams) -> Result<BallTrajectory> {
    match action.mode {
        KickMode::Flat => Ok(predict_flat(
            BallState {
                position: from,
                velocity: Vec2::from_angle(action.direction) * action.speed,
            },
            physics,
        )),
        KickMode::Chip => predict_chip(BallState::at_rest(from), action.speed, action.direction, physics),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchParams {
    pub intercept: InterceptParams,
    /// Required lead over the fastest opponent, seconds.
    pub margin_min: f64,
    /// Skip work that cannot change the result.
    pub pruned: bool,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            intercept: InterceptParams::default(),
            margin_min: 0.0,
            pruned: true,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        self.intercept.validate()?;
        if !(self.margin_min.is_finite() && self.margin_min >= 0.0) {
            return Err(Error::invalid("margin_min", "must be finite and non-negative"));
        }
        Ok(())
    }
}

/// A kick paired with the teammate that receives it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cacop {
    /// Position of the action in the enumerated grid.
    pub action_index: usize,
    pub action: KickAction,
    pub receiver_id: u32,
    pub receiver_solution: InterceptSolution,
    /// Fastest opponent's interception time minus the receiver's, seconds;
    /// infinite when no opponent can reach the ball.
    #[serde(with = "finite_or_inf")]
    pub opponent_margin: f64,
    pub features: FeatureVector,
}

impl Cacop {
    /// Canonical ordering key.
    pub fn key(&self) -> (usize, u32) {
        (self.action_index, self.receiver_id)
    }

    pub fn point(&self) -> Vec2 {
        self.receiver_solution.point().expect("receiver solution is feasible")
    }

    pub fn time(&self) -> f64 {
        self.receiver_solution.time().expect("receiver solution is feasible")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub actions: usize,
    /// Arrival-time evaluations made inside interception scans.
    pub intercept_evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    pub cacops: Vec<Cacop>,
    pub stats: SearchStats,
}

/// Each non-leader robot's interception of the ball after `action`, in
/// `world.robots` order.
pub fn predict_outcome(
    world: &WorldSnapshot,
    action: &KickAction,
    physics: &BallPhysicsParams,
    params: &InterceptParams,
) -> Result<Vec<InterceptSolution>> {
    action.validate()?;
    let leader = world.leader().ok_or_else(|| Error::invalid("leader_id", "leader missing"))?;
    let traj = kick_trajectory(leader.position, action, physics)?;
    let sampled = SampledTrajectory::new(&traj, params, &world.field);
    Ok(world
        .robots
        .iter()
        .filter(|r| r.id != world.leader_id)
        .map(|r| sampled.intercept(r, world.limits(r.team), params.max_step()).0)
        .collect())
}

/// All feasible pairs over `actions`, sorted by `(action_index, receiver_id)`.
///
/// Actions are evaluated in parallel on the current rayon pool; the output
/// does not depend on the number of workers.
pub fn build_feasible_set(
    world: &WorldSnapshot,
    actions: &[KickAction],
    physics: &BallPhysicsParams,
    params: &SearchParams,
) -> Result<FeasibleSet> {
    world.validate()?;
    params.validate()?;
    physics.validate()?;
    for a in actions {
        a.validate()?;
    }
    let leader = *world.leader().expect("validated");

    let per_action: Vec<(Vec<Cacop>, usize)> = actions
        .par_iter()
        .enumerate()
        .map(|(i, a)| evaluate_action(world, leader.position, i, a, physics, params))
        .collect::<Result<_>>()?;

    let mut stats = SearchStats {
        actions: actions.len(),
        intercept_evals: 0,
    };
    let mut cacops = Vec::new();
    for (found, evals) in per_action {
        stats.intercept_evals += evals;
        cacops.extend(found);
    }
    cacops.sort_by_key(Cacop::key);
    Ok(FeasibleSet { cacops, stats })
}

fn evaluate_action(
    world: &WorldSnapshot,
    from: Vec2,
    index: usize,
    action: &KickAction,
    physics: &BallPhysicsParams,
    params: &SearchParams,
) -> Result<(Vec<Cacop>, usize)> {
    let ip = &params.intercept;
    let traj = kick_trajectory(from, action, physics)?;
    let sampled = SampledTrajectory::new(&traj, ip, &world.field);
    let last = ip.max_step();
    let mut evals = 0;

    let mut mates: Vec<InterceptSolution> = Vec::new();
    for r in world.teammates() {
        let (sol, n) = sampled.intercept(r, &world.limits_ours, last);
        evals += n;
        if sol.feasible() {
            mates.push(sol);
        }
    }
    if params.pruned && mates.is_empty() {
        return Ok((Vec::new(), evals));
    }
    let fastest_mate = mates
        .iter()
        .filter_map(|s| s.time())
        .fold(f64::INFINITY, f64::min);

    let mut best_opp: Option<usize> = None;
    for o in world.opponents() {
        let cutoff = match (params.pruned, best_opp) {
            // Only a strictly earlier interception can lower the minimum.
            (true, Some(0)) => break,
            (true, Some(k)) => k - 1,
            _ => last,
        };
        let (sol, n) = sampled.intercept(o, &world.limits_theirs, cutoff);
        evals += n;
        if let Some(h) = sol.hit {
            if best_opp.is_none_or(|b| h.step < b) {
                best_opp = Some(h.step);
            }
        }
        if params.pruned {
            if let Some(k) = best_opp {
                if ip.time_of(k) - fastest_mate <= params.margin_min {
                    return Ok((Vec::new(), evals));
                }
            }
        }
    }
    let opp_time = best_opp.map_or(f64::INFINITY, |k| ip.time_of(k));

    mates.sort_by_key(|s| s.robot_id);
    let cacops = mates
        .into_iter()
        .filter_map(|sol| {
            let hit = sol.hit?;
            let margin = opp_time - hit.time;
            (margin > params.margin_min).then(|| Cacop {
                action_index: index,
                action: *action,
                receiver_id: sol.robot_id,
                receiver_solution: sol,
                opponent_margin: margin,
                features: extract_features(&world.field, ip.horizon, from, hit.point, hit.time, margin),
            })
        })
        .collect();
    Ok((cacops, evals))
}

/// Flat record written per pair in feasible-set files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacopRecord {
    pub action_index: usize,
    pub mode: KickMode,
    pub theta: f64,
    pub v: f64,
    pub receiver: u32,
    pub p_best: [f64; 2],
    pub t_best: f64,
    #[serde(with = "finite_or_inf")]
    pub margin: f64,
    pub features: [f64; 5],
}

impl From<&Cacop> for CacopRecord {
    fn from(c: &Cacop) -> Self {
        let p = c.point();
        Self {
            action_index: c.action_index,
            mode: c.action.mode,
            theta: c.action.direction,
            v: c.action.speed,
            receiver: c.receiver_id,
            p_best: [p.x, p.y],
            t_best: c.time(),
            margin: c.opponent_margin,
            features: c.features.0,
        }
    }
}

/// One JSON object per line.
pub fn write_feasible_set<W: Write>(mut out: W, cacops: &[Cacop]) -> std::io::Result<()> {
    for c in cacops {
        serde_json::to_writer(&mut out, &CacopRecord::from(c))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_feasible_set<R: BufRead>(input: R) -> std::result::Result<Vec<CacopRecord>, String> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok(out)
}

/// JSON has no infinity; write it as the string `"inf"`.
pub(crate) mod finite_or_inf {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else if *v < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}
