//! Reference implementations the integration tests compare against.
//!
//! Each one is written the slow, obvious way: full scans, fixed-step
//! integration, finite differences, tabular value iteration.

#![allow(dead_code)]

use passplan::ball::BallPhysicsParams;
use passplan::features::{extract_features, FeatureVector};
use passplan::interception::Intercept;
use passplan::kinematics::time_to_point;
use passplan::search::kick_trajectory;
use passplan::{Cacop, InterceptSolution, KickAction, QScorer, RobotLimits, RobotState, SearchParams, Team, Vec2, WorldSnapshot};
use rand::Rng;

/// Every step from 0 to the horizon, checked one by one.
fn first_interception(
    robot: &RobotState,
    limits: &RobotLimits,
    traj: &passplan::BallTrajectory,
    world: &WorldSnapshot,
    params: &SearchParams,
) -> Option<Intercept> {
    let ip = params.intercept;
    for k in 0..=ip.max_step() {
        let t = k as f64 * ip.dt;
        let p = traj.position_at(t);
        if !world.field.contains(p) || !traj.interceptable_at(t) {
            continue;
        }
        if time_to_point(robot, p, limits) <= t {
            return Some(Intercept { point: p, time: t, step: k });
        }
    }
    None
}

/// Feasible set by exhaustive evaluation of every robot on every action.
pub fn brute_force_feasible_set(
    world: &WorldSnapshot,
    actions: &[KickAction],
    physics: &BallPhysicsParams,
    params: &SearchParams,
) -> Vec<Cacop> {
    let leader = world.leader().expect("leader present");
    let mut out = Vec::new();
    for (i, a) in actions.iter().enumerate() {
        let traj = kick_trajectory(leader.position, a, physics).expect("valid action");
        let mut opp_time = f64::INFINITY;
        for o in world.robots.iter().filter(|r| r.team == Team::Theirs) {
            if let Some(h) = first_interception(o, &world.limits_theirs, &traj, world, params) {
                opp_time = opp_time.min(h.time);
            }
        }
        let mut mates: Vec<&RobotState> = world
            .robots
            .iter()
            .filter(|r| r.team == Team::Ours && r.id != world.leader_id)
            .collect();
        mates.sort_by_key(|r| r.id);
        for m in mates {
            let Some(h) = first_interception(m, &world.limits_ours, &traj, world, params) else {
                continue;
            };
            let margin = opp_time - h.time;
            if margin > params.margin_min {
                out.push(Cacop {
                    action_index: i,
                    action: *a,
                    receiver_id: m.id,
                    receiver_solution: InterceptSolution { robot_id: m.id, hit: Some(h) },
                    opponent_margin: margin,
                    features: extract_features(&world.field, params.intercept.horizon, leader.position, h.point, h.time, margin),
                });
            }
        }
    }
    out
}

/// Time for a 1D double integrator to reach `d` and stop, by stepping a
/// bang-bang feedback law at `dt`.
///
/// The law accelerates toward the target while the stopping distance is
/// short of it, cruises at the cap, and brakes otherwise. A braking step
/// that would cross zero velocity is cut at the crossing; arrival is the
/// first such stop within `tol` of the target.
pub fn integrate_1d(d: f64, v0: f64, v_cap: f64, a_cap: f64, dt: f64) -> f64 {
    let tol = 1e-3;
    let (mut x, mut v, mut t) = (0.0f64, v0, 0.0f64);
    if d == 0.0 && v0 == 0.0 {
        return 0.0;
    }
    for _ in 0..10_000_000 {
        let e = d - x;
        let stopping = v * v.abs() / (2.0 * a_cap);
        let dir = if e - stopping > 0.0 { 1.0 } else { -1.0 };
        // Accelerate along `dir` unless already at the cap that way.
        let a = if v * dir >= v_cap { 0.0 } else { dir * a_cap };
        let mut h = dt;
        if a != 0.0 && (v + a * h) * dir > v_cap {
            h = (v_cap - v * dir) / a_cap;
        }
        let stops = v != 0.0 && a * v < 0.0 && (v + a * h) * v <= 0.0;
        if stops {
            h = -v / a;
        }
        x += v * h + 0.5 * a * h * h;
        v = if stops { 0.0 } else { v + a * h };
        t += h;
        if stops && (d - x).abs() < tol {
            return t;
        }
    }
    panic!("integration did not settle for d={d} v0={v0}");
}

/// 2D arrival time: both axes integrated under the split budgets.
pub fn integrate_2d(start: &RobotState, target: Vec2, limits: &RobotLimits, dt: f64) -> f64 {
    let v_cap = limits.v_max / 2f64.sqrt();
    let a_cap = limits.a_max / 2f64.sqrt();
    let d = target - start.position;
    let tx = integrate_1d(d.x, start.velocity.x, v_cap, a_cap, dt);
    let ty = integrate_1d(d.y, start.velocity.y, v_cap, a_cap, dt);
    tx.max(ty)
}

/// Squared-error loss `0.5 * (q(x) - target)^2`.
pub fn loss(q: &QScorer, x: &FeatureVector, target: f64) -> f64 {
    let e = q.forward(x) - target;
    0.5 * e * e
}

/// Central differences of the loss over every parameter.
pub fn numeric_gradient(q: &QScorer, x: &FeatureVector, target: f64, h: f64) -> Vec<f64> {
    let base = q.parameters();
    let mut probe = q.clone();
    let mut g = Vec::with_capacity(base.len());
    let mut p = base.clone();
    for i in 0..base.len() {
        p[i] = base[i] + h;
        probe.set_parameters(&p).unwrap();
        let up = loss(&probe, x, target);
        p[i] = base[i] - h;
        probe.set_parameters(&p).unwrap();
        let down = loss(&probe, x, target);
        p[i] = base[i];
        g.push((up - down) / (2.0 * h));
    }
    g
}

/// `||a - b|| / (||a|| + ||b||)`, 0 when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let den = norm(a) + norm(b);
    if den == 0.0 {
        0.0
    } else {
        norm(&diff) / den
    }
}

/// One step of a deterministic episodic MDP whose state-action pairs are
/// indexed by feature slot.
#[derive(Debug, Clone, Copy)]
pub struct ChainStep {
    pub pair: usize,
    pub reward: f64,
    /// Slots available after this step; empty when terminal.
    pub next: &'static [usize],
}

/// Three decision states. From s0 pass on (slot 0) or shoot (1); from s1
/// pass on (2) or shoot (3); from s2 only shoot (4).
pub const CHAIN: [ChainStep; 5] = [
    ChainStep { pair: 0, reward: 0.0, next: &[2, 3] },
    ChainStep { pair: 1, reward: 0.3, next: &[] },
    ChainStep { pair: 2, reward: 0.1, next: &[4] },
    ChainStep { pair: 3, reward: 0.5, next: &[] },
    ChainStep { pair: 4, reward: 1.0, next: &[] },
];

/// Optimal action values of the chain by value iteration.
pub fn chain_q_star(gamma: f64) -> [f64; 5] {
    let mut q = [0.0; 5];
    for _ in 0..1000 {
        let mut next = q;
        for s in &CHAIN {
            let best = s.next.iter().map(|&j| q[j]).fold(f64::NEG_INFINITY, f64::max);
            next[s.pair] = s.reward + if s.next.is_empty() { 0.0 } else { gamma * best };
        }
        if next == q {
            break;
        }
        q = next;
    }
    q
}

/// Spearman rank correlation, ties given their mean rank.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let mean = (i + j) as f64 / 2.0;
            for k in i..=j {
                r[idx[k]] = mean;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// One-sided sign test: probability of at least `wins` successes out of
/// `wins + losses` fair coin flips.
pub fn sign_test_p(wins: usize, losses: usize) -> f64 {
    let n = wins + losses;
    let mut p = 0.0;
    for k in wins..=n {
        p += binomial(n, k) * 0.5f64.powi(n as i32);
    }
    p
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Random scene with a leader holding the ball at rest.
pub fn random_scene<R: Rng>(rng: &mut R, n_ours: usize, n_theirs: usize) -> WorldSnapshot {
    let field = passplan::Field::default();
    let mut robots = Vec::new();
    let spot = |rng: &mut R| Vec2::new(rng.random_range(0.2..field.length - 0.2), rng.random_range(0.2..field.width - 0.2));
    let limits = RobotLimits::default();
    let vel = |rng: &mut R| {
        if rng.random_bool(0.5) {
            Vec2::ZERO
        } else {
            let s = rng.random_range(0.0..limits.v_max / 2f64.sqrt());
            Vec2::from_angle(rng.random_range(0.0..std::f64::consts::TAU)) * s
        }
    };
    for i in 0..n_ours {
        let position = spot(rng);
        let velocity = if i == 0 { Vec2::ZERO } else { vel(rng) };
        robots.push(RobotState { id: i as u32, team: Team::Ours, position, velocity });
    }
    for i in 0..n_theirs {
        let position = spot(rng);
        let velocity = vel(rng);
        robots.push(RobotState { id: 10 + i as u32, team: Team::Theirs, position, velocity });
    }
    WorldSnapshot {
        ball: passplan::BallState::at_rest(robots[0].position),
        robots,
        leader_id: 0,
        field,
        limits_ours: limits,
        limits_theirs: limits,
    }
}

/// `n` random valid kicks.
pub fn random_actions<R: Rng>(rng: &mut R, n: usize) -> Vec<KickAction> {
    (0..n)
        .map(|_| KickAction {
            mode: if rng.random_bool(0.5) { passplan::KickMode::Flat } else { passplan::KickMode::Chip },
            direction: rng.random_range(0.0..std::f64::consts::TAU),
            speed: rng.random_range(0.2..=passplan::ball::MAX_KICK_SPEED),
        })
        .collect()
}
