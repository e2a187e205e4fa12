//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Criteria whose hardware precondition is not met (the multi-core timing
//! targets on a machine with fewer than four cores) report `UNVERIFIED`
//! together with the measured numbers; everything else they check must
//! still hold.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use passplan::ball::{predict_flat, BallPhysicsParams};
use passplan::config::Config;
use passplan::geometry::Field;
use passplan::grid::{Grid, GridSpec};
use passplan::interception::intercept_heatmap;
use passplan::parallel::{default_workers, with_workers};
use passplan::scene::Scene;
use passplan::scoring::{encode_weights, LinearScorer, Policy, QScorer};
use passplan::search::{build_feasible_set, enumerate_actions, write_feasible_set, ActionGrid};
use passplan::sim::{run_4v4, DefensePolicy, FourVFourReport};
use passplan::training::{
    reward, run_offline, run_selfplay, td_target, td_update, BallEvent, EpisodeRecord, RewardParams, TrainParams,
    Transition,
};
use passplan::{BallState, FeatureVector, KickMode, RobotLimits, RobotState, SearchParams, Team, Vec2, WorldSnapshot};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Fail,
    Unverified,
}

type Check = Result<(Status, String), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scene(name: &str) -> WorldSnapshot {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenes").join(name);
    Scene::load(&path).unwrap().to_world(&Config::default()).unwrap()
}

fn workers<R: Send>(n: usize, f: impl FnOnce() -> R + Send) -> R {
    with_workers(Some(n), f).unwrap()
}

// 1 ------------------------------------------------------------------------

fn reward_formula() -> Check {
    let field = Field::default();
    let p = RewardParams::default();
    let goal = field.opponent_goal_center();
    let r3 = reward(goal - Vec2::new(3.0, 0.0), BallEvent::None, &p, &field);
    ensure((r3 - 0.5).abs() <= 1e-3, || format!("reward at 3 m = {r3}"))?;
    let rg = reward(goal, BallEvent::Goal, &p, &field);
    ensure(rg == 51.0, || format!("goal reward = {rg}"))?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..100 {
        for j in 0..100 {
            let x = Vec2::new(field.length * (i as f64 + 0.5) / 100.0, field.width * (j as f64 + 0.5) / 100.0);
            let r = reward(x, BallEvent::None, &p, &field);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    ensure(lo > 0.0 && hi <= 1.0, || format!("r1 range [{lo}, {hi}]"))?;
    Ok((Status::Pass, format!("r(3 m)={r3:.6} r(goal)={rg} r1 in [{lo:.4}, {hi:.4}]")))
}

// 2 ------------------------------------------------------------------------

/// Ball starts of the slow and fast heat maps.
const SLOW_START: Vec2 = Vec2 { x: 4.0, y: 4.5 };
const FAST_START: Vec2 = Vec2 { x: 0.0, y: 4.5 };

fn heat_grid(start: Vec2, speed: f64) -> Grid {
    let cfg = Config::default();
    let spec = GridSpec::covering(&cfg.field, 60);
    let ball = BallState { position: start, velocity: Vec2::new(speed, 0.0) };
    intercept_heatmap(ball, &cfg.limits.ours, &cfg.physics, &cfg.search.params().intercept, &cfg.field, &spec).unwrap()
}

fn heat_artifact() -> String {
    heat_grid(SLOW_START, 1.0).to_text() + &heat_grid(FAST_START, 4.0).to_text()
}

fn heatmaps() -> Check {
    let cfg = Config::default();
    let slow = heat_grid(SLOW_START, 1.0);
    let spec = slow.spec;
    ensure(spec.cols == 60 && spec.rows == 45, || format!("grid {}x{}", spec.cols, spec.rows))?;

    let stop = predict_flat(BallState { position: SLOW_START, velocity: Vec2::new(1.0, 0.0) }, &cfg.physics).stop_position();
    let infeasible = slow.values.iter().filter(|v| !v.is_finite()).count();
    ensure(infeasible == 0, || format!("{infeasible} infeasible cells at 1 m/s"))?;
    let dist: Vec<f64> = (0..spec.len()).map(|i| spec.cell_center(i).distance_to_segment(SLOW_START, stop)).collect();
    let rho = spearman(&slow.values, &dist);
    ensure(rho >= 0.8, || format!("spearman {rho:.4} at 1 m/s"))?;

    let fast = heat_grid(FAST_START, 4.0);
    let blocked = |i: usize| !fast.values[i].is_finite();
    let cells: Vec<usize> = (0..spec.len()).filter(|&i| blocked(i)).collect();
    ensure(!cells.is_empty(), || "no infeasible cells at 4 m/s".into())?;
    let start_cell = {
        let col = ((FAST_START.x / spec.cell_size) as usize).min(spec.cols - 1);
        let row = ((FAST_START.y / spec.cell_size) as usize).min(spec.rows - 1);
        row * spec.cols + col
    };
    ensure(blocked(start_cell), || "ball start cell is feasible".into())?;
    // 4-connected flood fill from the start cell must cover every infeasible cell.
    let mut seen = vec![false; spec.len()];
    let mut stack = vec![start_cell];
    seen[start_cell] = true;
    let mut reached = 0;
    while let Some(i) = stack.pop() {
        reached += 1;
        let (r, c) = ((i / spec.cols) as isize, (i % spec.cols) as isize);
        for (dr, dc) in [(0, 1), (0, -1), (1, 0), (-1, 0)] {
            let (nr, nc) = (r + dr, c + dc);
            if nr < 0 || nc < 0 || nr >= spec.rows as isize || nc >= spec.cols as isize {
                continue;
            }
            let j = nr as usize * spec.cols + nc as usize;
            if !seen[j] && blocked(j) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    ensure(reached == cells.len(), || format!("infeasible region split: {reached} of {} cells connected", cells.len()))?;
    // A single boundary: in each row the infeasible cells run from the left edge.
    for r in 0..spec.rows {
        let row: Vec<bool> = (0..spec.cols).map(|c| blocked(r * spec.cols + c)).collect();
        let run = row.iter().take_while(|b| **b).count();
        ensure(row[run..].iter().all(|b| !b), || format!("row {r}: infeasible cells ahead of the boundary"))?;
    }
    let mean_x = |idx: &mut dyn Iterator<Item = usize>| {
        let (mut s, mut n) = (0.0, 0.0);
        for i in idx {
            s += spec.cell_center(i).x;
            n += 1.0;
        }
        s / n
    };
    let behind = mean_x(&mut cells.iter().copied());
    let ahead = mean_x(&mut (0..spec.len()).filter(|&i| !blocked(i)));
    ensure(behind < ahead, || format!("infeasible centroid x={behind:.3}, feasible x={ahead:.3}"))?;
    Ok((
        Status::Pass,
        format!(
            "1 m/s: all feasible, spearman {rho:.3}; 4 m/s: {} infeasible cells in one region behind a single boundary (centroid x {behind:.2} vs {ahead:.2})",
            cells.len()
        ),
    ))
}

// 3 ------------------------------------------------------------------------

fn oracle_cases() -> Vec<(WorldSnapshot, Vec<passplan::KickAction>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..200)
        .map(|_| {
            let n_ours = rng.random_range(2..=5);
            let n_theirs = rng.random_range(0..=6 - n_ours);
            let w = random_scene(&mut rng, n_ours, n_theirs);
            let n = rng.random_range(1..=32);
            (w, random_actions(&mut rng, n))
        })
        .collect()
}

fn oracle_artifact(cases: &[(WorldSnapshot, Vec<passplan::KickAction>)]) -> Vec<u8> {
    let physics = BallPhysicsParams::default();
    let mut out = Vec::new();
    for (w, actions) in cases {
        let set = build_feasible_set(w, actions, &physics, &SearchParams::default()).unwrap();
        write_feasible_set(&mut out, &set.cacops).unwrap();
    }
    out
}

fn oracle_equivalence() -> Check {
    let physics = BallPhysicsParams::default();
    let cases = oracle_cases();
    let mut pairs = 0;
    let mut nonempty = 0;
    for (n, (w, actions)) in cases.iter().enumerate() {
        let expect = brute_force_feasible_set(w, actions, &physics, &SearchParams::default());
        for pruned in [true, false] {
            let params = SearchParams { pruned, ..SearchParams::default() };
            let got = build_feasible_set(w, actions, &physics, &params).unwrap().cacops;
            ensure(got == expect, || format!("scene {n} (pruned={pruned}): {} pairs vs oracle {}", got.len(), expect.len()))?;
        }
        pairs += expect.len();
        nonempty += usize::from(!expect.is_empty());
    }
    ensure(nonempty >= 50, || format!("only {nonempty} scenes with feasible pairs"))?;
    Ok((Status::Pass, format!("200 scenes identical, {pairs} pairs, {nonempty} nonempty")))
}

// 4 ------------------------------------------------------------------------

fn motion_times() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let dt = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let v_cap = rng.random_range(0.5..4.0);
        let a_cap = rng.random_range(0.5..6.0);
        let d = rng.random_range(-10.0..10.0);
        let v0 = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(-v_cap..v_cap) };
        let closed = passplan::kinematics::time_to_point_1d(d, v0, v_cap, a_cap);
        let oracle = integrate_1d(d, v0, v_cap, a_cap, dt);
        worst = worst.max((closed - oracle).abs());
        ensure((closed - oracle).abs() <= 2e-4, || format!("1D d={d} v0={v0} vc={v_cap} ac={a_cap}: {closed} vs {oracle}"))?;
    }
    let limits = RobotLimits::default();
    let axis = limits.v_max / 2f64.sqrt();
    for _ in 0..1000 {
        let start = RobotState {
            id: 1,
            team: Team::Ours,
            position: Vec2::new(rng.random_range(0.0..12.0), rng.random_range(0.0..9.0)),
            velocity: if rng.random_bool(0.3) {
                Vec2::ZERO
            } else {
                Vec2::new(rng.random_range(-axis..axis), rng.random_range(-axis..axis))
            },
        };
        let target = Vec2::new(rng.random_range(0.0..12.0), rng.random_range(0.0..9.0));
        let closed = passplan::kinematics::time_to_point(&start, target, &limits);
        let oracle = integrate_2d(&start, target, &limits, dt);
        worst = worst.max((closed - oracle).abs());
        ensure((closed - oracle).abs() <= 2e-4, || format!("2D {start:?} -> {target:?}: {closed} vs {oracle}"))?;
    }
    Ok((Status::Pass, format!("2000 cases, worst |dt| = {worst:.3e} s")))
}

// 5 ------------------------------------------------------------------------

fn gradient_check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for n in 0..50 {
        let sizes = [5, rng.random_range(1..=32), rng.random_range(1..=32), 1];
        let mut q = QScorer::random(&sizes, &mut rng).unwrap();
        let p: Vec<f64> = q.parameters().iter().map(|w| w + rng.random_range(-0.1..0.1)).collect();
        q.set_parameters(&p).unwrap();
        let x = FeatureVector(std::array::from_fn(|_| rng.random_range(0.0..1.0)));
        let target = rng.random_range(-2.0..2.0);
        let (_, g) = q.forward_backward(&x, target);
        let num = numeric_gradient(&q, &x, target, 1e-6);
        let err = relative_error(&g.flatten(), &num);
        worst = worst.max(err);
        ensure(err < 1e-4, || format!("pair {n} sizes {sizes:?}: relative error {err:.3e}"))?;
    }
    Ok((Status::Pass, format!("50 pairs, worst relative error {worst:.2e}")))
}

// 6 ------------------------------------------------------------------------

/// (table, slot, reward, next slots, terminal, alpha, gamma)
type Hand = ([f64; 5], usize, f64, &'static [usize], bool, f64, f64);

const HAND: [Hand; 20] = [
    ([0.0, 0.0, 0.0, 0.0, 0.0], 0, 1.0, &[1], false, 0.5, 0.9),
    ([0.2, 0.4, 0.0, 0.0, 0.0], 0, 0.0, &[1], false, 0.1, 0.9),
    ([0.2, 0.4, 0.6, 0.0, 0.0], 0, 0.5, &[1, 2], false, 0.1, 0.95),
    ([1.0, -1.0, 0.5, 0.0, 0.0], 1, 0.0, &[0, 2], false, 0.25, 0.5),
    ([0.7, 0.0, 0.0, 0.0, 0.0], 0, 0.0, &[], true, 0.1, 0.9),
    ([0.7, 0.3, 0.0, 0.0, 0.0], 0, 10.0, &[], true, 0.01, 0.9),
    ([0.0, 0.0, 0.0, 0.0, 2.0], 3, 0.0, &[4], false, 1.0, 0.99),
    ([0.5, 0.5, 0.5, 0.5, 0.5], 2, 0.5, &[0, 1, 3, 4], false, 0.3, 0.8),
    ([-0.4, -0.2, -0.9, 0.0, 0.0], 0, 0.0, &[1, 2], false, 0.2, 0.9),
    ([3.0, 0.0, 0.0, 0.0, 0.0], 0, 0.0, &[0], false, 0.1, 0.9),
    ([0.0, 1.5, 0.0, 0.0, 0.0], 4, 51.0, &[], true, 0.05, 0.95),
    ([0.1, 0.2, 0.3, 0.4, 0.5], 4, 0.25, &[0, 1, 2, 3], false, 0.7, 0.6),
    ([0.0, 0.0, 0.0, 0.0, 0.0], 2, 0.0, &[], false, 0.5, 0.9),
    ([2.0, 1.0, 0.0, 0.0, 0.0], 1, -1.0, &[0], false, 0.15, 0.9),
    ([0.9, 0.8, 0.7, 0.6, 0.5], 3, 0.6, &[4, 2], false, 0.05, 0.0),
    ([0.0, 0.0, 4.0, 0.0, 0.0], 2, 11.0, &[2], false, 0.01, 0.9),
    ([1.2, 0.0, 0.0, 3.3, 0.0], 0, 0.3, &[3], false, 0.4, 0.3),
    ([0.0, 0.0, 0.0, 0.0, -5.0], 4, 0.0, &[4], false, 0.2, 0.9),
    ([0.6, 0.6, 0.6, 0.6, 0.6], 1, 1.0, &[], true, 0.9, 0.9),
    ([0.05, 0.15, 0.25, 0.35, 0.45], 0, 0.125, &[4, 3, 2], false, 0.333, 0.75),
];

fn tabular(values: [f64; 5]) -> QScorer {
    let mut q = QScorer::zeros(&[5, 1]).unwrap();
    let mut p = values.to_vec();
    p.push(0.0);
    q.set_parameters(&p).unwrap();
    q
}

fn tabular_params(alpha: f64, gamma: f64) -> TrainParams {
    TrainParams {
        alpha,
        gamma,
        batch_size: 1,
        capacity: 1000,
        hidden: vec![],
        update_biases: false,
        ..TrainParams::default()
    }
}

fn td_updates() -> Check {
    for (n, &(table, slot, r, next, terminal, alpha, gamma)) in HAND.iter().enumerate() {
        let mut q = tabular(table);
        let t = Transition {
            state_features: FeatureVector::one_hot(slot),
            reward: r,
            next_candidates: next.iter().map(|&j| FeatureVector::one_hot(j)).collect(),
            terminal,
        };
        let best = next.iter().map(|&j| table[j]).fold(f64::NEG_INFINITY, f64::max);
        let target = if terminal || next.is_empty() { r } else { r + gamma * best };
        let mut expect = table;
        expect[slot] = table[slot] + alpha * (target - table[slot]);
        td_update(&mut q, &t, &tabular_params(alpha, gamma));
        for j in 0..5 {
            let got = q.forward(&FeatureVector::one_hot(j));
            ensure((got - expect[j]).abs() <= 1e-9, || format!("transition {n}: Q[{j}] = {got}, expected {}", expect[j]))?;
        }
    }

    let gamma = 0.9;
    let star = chain_q_star(gamma);
    let records: Vec<EpisodeRecord> = CHAIN
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let t = Transition {
                state_features: FeatureVector::one_hot(s.pair),
                reward: s.reward,
                next_candidates: s.next.iter().map(|&j| FeatureVector::one_hot(j)).collect(),
                terminal: s.next.is_empty(),
            };
            EpisodeRecord::from_transition(i as u64, 0, &t)
        })
        .collect();
    let params = TrainParams { offline_epochs: 2000, ..tabular_params(0.1, gamma) };
    let (q, _) = run_offline(&records, tabular([0.0; 5]), &params).unwrap();
    let mut worst: f64 = 0.0;
    let mut td = 0.0;
    for j in 0..CHAIN.len() {
        let got = q.forward(&FeatureVector::one_hot(j));
        worst = worst.max((got - star[j]).abs());
        let t = records[j].to_transition();
        td += (td_target(&q, &t, gamma) - q.forward(&t.state_features)).abs() / CHAIN.len() as f64;
    }
    ensure(worst <= 0.05, || format!("chain |Q - Q*| = {worst}"))?;
    ensure(td < 0.05, || format!("chain mean |TD| = {td}"))?;
    Ok((Status::Pass, format!("20 hand transitions exact; chain max |Q-Q*| = {worst:.2e}, mean |TD| = {td:.2e}")))
}

// 7 ------------------------------------------------------------------------

fn pass_config(theirs: usize) -> Config {
    let mut cfg = Config::default();
    cfg.sim.team_size_theirs = theirs;
    cfg.sim.defense = DefensePolicy::Frozen;
    cfg
}

fn report_artifact(r: &FourVFourReport) -> String {
    let bits: Vec<String> = r.episode_rewards.iter().map(|x| format!("{:016x}", x.to_bits())).collect();
    format!("{}{}\n", r.to_text(), bits.join(" "))
}

fn pass_reports() -> Vec<FourVFourReport> {
    let scorer = LinearScorer::default();
    [0, 4]
        .into_iter()
        .map(|theirs| run_4v4(&pass_config(theirs).arena(), Policy::Greedy(&scorer), 100, 7).unwrap())
        .collect()
}

fn pass_success() -> Check {
    let reports = pass_reports();
    let mut detail = Vec::new();
    for (r, label) in reports.iter().zip(["absent", "stationary"]) {
        let rate = r.receiver_capture_rate();
        ensure(r.passes > 0, || format!("{label}: no passes played"))?;
        ensure(rate >= 0.95, || format!("{label} opponents: capture rate {rate:.4} over {} passes", r.passes))?;
        detail.push(format!("{label} {rate:.3} ({} passes)", r.passes));
    }
    Ok((Status::Pass, detail.join(", ")))
}

// 8 ------------------------------------------------------------------------

fn time_search(world: &WorldSnapshot, actions: &[passplan::KickAction], params: &SearchParams, n: usize) -> Duration {
    let physics = BallPhysicsParams::default();
    build_feasible_set(world, actions, &physics, params).unwrap();
    let mut best = Duration::MAX;
    for _ in 0..n {
        let t = Instant::now();
        build_feasible_set(world, actions, &physics, params).unwrap();
        best = best.min(t.elapsed());
    }
    best
}

fn performance() -> Check {
    let world = scene("contested.toml");
    ensure(world.robots.len() == 16, || "contested scene must hold 16 robots".into())?;
    let actions = enumerate_actions(&ActionGrid::default());
    ensure(actions.len() == 4096, || format!("{} actions", actions.len()))?;
    let physics = BallPhysicsParams::default();
    let pruned = build_feasible_set(&world, &actions, &physics, &SearchParams::default()).unwrap();
    let full = build_feasible_set(&world, &actions, &physics, &SearchParams { pruned: false, ..SearchParams::default() }).unwrap();
    ensure(pruned.cacops == full.cacops, || "pruned and full sets differ".into())?;
    ensure(!full.cacops.is_empty(), || "contested scene has no feasible pair".into())?;
    ensure(pruned.stats.intercept_evals < full.stats.intercept_evals, || {
        format!("pruned {} evals vs full {}", pruned.stats.intercept_evals, full.stats.intercept_evals)
    })?;
    let structural = format!(
        "{} pairs identical, evals {} pruned vs {} full ({:.2}x)",
        full.cacops.len(),
        pruned.stats.intercept_evals,
        full.stats.intercept_evals,
        full.stats.intercept_evals as f64 / pruned.stats.intercept_evals as f64
    );

    let cores = default_workers();
    let params = SearchParams::default();
    let serial = workers(1, || time_search(&world, &actions, &params, 5));
    let parallel = workers(cores, || time_search(&world, &actions, &params, 5));
    let speedup = serial.as_secs_f64() / parallel.as_secs_f64();
    let timing = format!(
        "workers {cores}: {:.1} ms serial, {:.1} ms parallel, speedup {speedup:.2}x",
        serial.as_secs_f64() * 1e3,
        parallel.as_secs_f64() * 1e3
    );
    if cores < 4 {
        return Ok((Status::Unverified, format!("{structural}; timing needs >= 4 cores ({timing})")));
    }
    ensure(parallel < Duration::from_millis(50), || format!("{structural}; {timing}: over 50 ms"))?;
    ensure(speedup >= 2.0, || format!("{structural}; {timing}: speedup below 2x"))?;
    Ok((Status::Pass, format!("{structural}; {timing}")))
}

// 9 ------------------------------------------------------------------------

fn training_config() -> Config {
    let mut cfg = Config::default();
    cfg.search.n_directions = 32;
    cfg.search.n_speeds = 4;
    cfg.search.modes = vec![KickMode::Flat, KickMode::Chip];
    cfg
}

struct Trained {
    weights: Vec<u8>,
    trained: FourVFourReport,
    random: FourVFourReport,
}

impl Trained {
    fn artifact(&self) -> String {
        let hex: String = self.weights.iter().map(|b| format!("{b:02x}")).collect();
        format!("{hex}\n{}{}", report_artifact(&self.trained), report_artifact(&self.random))
    }
}

fn train_and_evaluate() -> Trained {
    let cfg = training_config();
    let mut arena = cfg.arena();
    let q0 = cfg.train.init_scorer().unwrap();
    let (q, _) = run_selfplay::<std::io::Sink>(&mut arena, q0, &cfg.train, 500, None).unwrap();
    let eval_seed = 9_000;
    Trained {
        weights: encode_weights(&q),
        trained: run_4v4(&arena, Policy::Greedy(&q), 50, eval_seed).unwrap(),
        random: run_4v4(&arena, Policy::Random, 50, eval_seed).unwrap(),
    }
}

fn training_efficacy(t: &Trained) -> Check {
    let (mut wins, mut losses) = (0, 0);
    for (a, b) in t.trained.episode_rewards.iter().zip(&t.random.episode_rewards) {
        if a > b {
            wins += 1;
        } else if a < b {
            losses += 1;
        }
    }
    let p = sign_test_p(wins, losses);
    let (mt, mr) = (t.trained.mean_reward(), t.random.mean_reward());
    let detail = format!("mean reward {mt:.3} vs random {mr:.3}; {wins} wins, {losses} losses, p = {p:.2e}");
    ensure(mt > mr && p < 0.05, || detail.clone())?;
    Ok((Status::Pass, detail))
}

// 10 -----------------------------------------------------------------------

fn determinism(trained_default: &str) -> Check {
    let cases = oracle_cases();
    let counts = [1, 2, 4];
    let heat: Vec<String> = counts.iter().map(|&n| workers(n, heat_artifact)).collect();
    ensure(heat.windows(2).all(|w| w[0] == w[1]), || "criterion 2 heat maps differ across worker counts".into())?;
    let sets: Vec<Vec<u8>> = counts.iter().map(|&n| workers(n, || oracle_artifact(&cases))).collect();
    ensure(sets.windows(2).all(|w| w[0] == w[1]), || "criterion 3 feasible sets differ across worker counts".into())?;
    let passes: Vec<String> = counts
        .iter()
        .map(|&n| workers(n, || pass_reports().iter().map(report_artifact).collect::<String>()))
        .collect();
    ensure(passes.windows(2).all(|w| w[0] == w[1]), || "criterion 7 reports differ across worker counts".into())?;
    let other = if default_workers() == 1 { 4 } else { 1 };
    let rerun = workers(other, || train_and_evaluate().artifact());
    ensure(rerun == trained_default, || format!("criterion 9 artifacts differ between {} and {other} workers", default_workers()))?;
    Ok((
        Status::Pass,
        format!("heat maps, feasible sets and 4v4 reports equal at 1/2/4 workers; training equal at {} and {other}", default_workers()),
    ))
}

// --------------------------------------------------------------------------

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, limit: Duration, f: &mut dyn FnMut() -> Check| {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = t.elapsed();
        let (status, detail) = match outcome {
            Ok((s, d)) if elapsed > limit => (
                if s == Status::Pass { Status::Fail } else { s },
                format!("{d}; took {:.1} s, limit {:.0} s", elapsed.as_secs_f64(), limit.as_secs_f64()),
            ),
            Ok(x) => x,
            Err(d) => (Status::Fail, d),
        };
        let tag = match status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Unverified => "UNVERIFIED",
        };
        if status == Status::Fail {
            failed += 1;
        }
        println!("criterion {n:>2} {tag:<10} {name:<22} {:>8.2} s  {detail}", elapsed.as_secs_f64());
    };

    let secs = Duration::from_secs;
    report(1, "reward formula", secs(1), &mut reward_formula);
    report(2, "interception heat maps", secs(10), &mut heatmaps);
    report(3, "oracle equivalence", secs(60), &mut oracle_equivalence);
    report(4, "motion-time oracle", secs(30), &mut motion_times);
    report(5, "gradient check", secs(10), &mut gradient_check);
    report(6, "td update", secs(60), &mut td_updates);
    report(7, "pass success", secs(120), &mut pass_success);
    report(8, "performance", secs(600), &mut performance);
    let mut trained = None;
    report(9, "training efficacy", secs(1800), &mut || {
        let t = train_and_evaluate();
        let r = training_efficacy(&t);
        trained = Some(t.artifact());
        r
    });
    report(10, "determinism", secs(3600), &mut || match &trained {
        Some(a) => determinism(a),
        None => Err("criterion 9 produced no artifact".into()),
    });

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
