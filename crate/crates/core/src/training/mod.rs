//! Q-learning of the pass scorer.
//!
//! Each pass is one MDP step: the state is the chosen pair's feature vector
//! and the next state's actions are the feasible pairs after the reception.

mod episode_log;
mod replay;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use episode_log::{
    parse_episode_log, read_episode_log, EpisodeLog, EpisodeLogWriter, EpisodeRecord, LOG_FORMAT, LOG_VERSION,
};
pub use replay::ReplayBuffer;

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::geometry::{Field, Vec2};
use crate::scoring::{Gradients, Policy, QScorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BallEvent {
    None,
    PenaltyArea,
    Goal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardParams {
    /// Distance scale of the shaping term, meters.
    pub a: f64,
    pub r_penalty_area: f64,
    pub r_goal: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            a: 4.33,
            r_penalty_area: 10.0,
            r_goal: 50.0,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::invalid("reward.a", "must be positive"));
        }
        if !(self.r_penalty_area.is_finite() && self.r_goal.is_finite()) {
            return Err(Error::invalid("reward", "bonuses must be finite"));
        }
        Ok(())
    }
}

/// `exp(-x / a)` for the distance `x` to the opponent goal center, plus the event bonus.
pub fn reward(ball_pos: Vec2, event: BallEvent, params: &RewardParams, field: &Field) -> f64 {
    let x = ball_pos.distance(field.opponent_goal_center());
    let bonus = match event {
        BallEvent::None => 0.0,
        BallEvent::PenaltyArea => params.r_penalty_area,
        BallEvent::Goal => params.r_goal,
    };
    (-x / params.a).exp() + bonus
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state_features: FeatureVector,
    pub reward: f64,
    /// Feasible pairs of the next state; empty when terminal.
    pub next_candidates: Vec<FeatureVector>,
    pub terminal: bool,
}

impl Transition {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let finite = |x: &FeatureVector| x.0.iter().all(|v| v.is_finite());
        if !finite(&self.state_features) || !self.next_candidates.iter().all(finite) {
            return Err("non-finite features".into());
        }
        if !self.reward.is_finite() {
            return Err("non-finite reward".into());
        }
        if self.terminal && !self.next_candidates.is_empty() {
            return Err("terminal step lists next candidates".into());
        }
        Ok(())
    }
}

/// Linear decay from `start` to `end` over `decay_episodes`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_episodes: u64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.05,
            decay_episodes: 300,
        }
    }
}

impl EpsilonSchedule {
    pub fn at(&self, episode: u64) -> f64 {
        if episode >= self.decay_episodes {
            return self.end;
        }
        let f = episode as f64 / self.decay_episodes as f64;
        self.start + (self.end - self.start) * f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainParams {
    pub alpha: f64,
    pub gamma: f64,
    pub capacity: usize,
    pub batch_size: usize,
    pub epsilon: EpsilonSchedule,
    pub seed: u64,
    /// Hidden layer widths of a freshly initialized scorer.
    pub hidden: Vec<usize>,
    /// Minibatch updates after each self-play episode.
    pub updates_per_episode: usize,
    /// Passes over the log in offline training.
    pub offline_epochs: usize,
    pub update_biases: bool,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            gamma: 0.95,
            capacity: 50_000,
            batch_size: 64,
            epsilon: EpsilonSchedule::default(),
            seed: 0,
            hidden: vec![32, 32],
            updates_per_episode: 16,
            offline_epochs: 10,
            update_biases: true,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid("train.alpha", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::invalid("train.gamma", "must lie in [0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("train.batch_size", "must be at least 1"));
        }
        if self.capacity < self.batch_size {
            return Err(Error::invalid("train.capacity", "must be at least the batch size"));
        }
        let e = &self.epsilon;
        if !((0.0..=1.0).contains(&e.start) && (0.0..=1.0).contains(&e.end)) {
            return Err(Error::invalid("train.epsilon", "must lie in [0, 1]"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::invalid("train.hidden", "zero-width layer"));
        }
        Ok(())
    }

    /// Layer sizes of a fresh scorer.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut s = vec![crate::features::FEATURE_DIM];
        s.extend(&self.hidden);
        s.push(1);
        s
    }

    /// Glorot-initialized scorer seeded from `seed`.
    pub fn init_scorer(&self) -> Result<QScorer> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        QScorer::random(&self.layer_sizes(), &mut rng)
    }
}

/// `r + gamma * max Q(x')`, with the max taken as 0 at a terminal or empty next state.
pub fn td_target(q: &QScorer, t: &Transition, gamma: f64) -> f64 {
    if t.terminal || t.next_candidates.is_empty() {
        return t.reward;
    }
    let best = t
        .next_candidates
        .iter()
        .map(|x| q.forward(x))
        .fold(f64::NEG_INFINITY, f64::max);
    t.reward + gamma * best
}

/// One semi-gradient step on a single transition. Returns the TD error
/// `target - Q(s, a)` measured before the step.
pub fn td_update(q: &mut QScorer, t: &Transition, params: &TrainParams) -> f64 {
    let target = td_target(q, t, params.gamma);
    let (_, g) = q.forward_backward(&t.state_features, target);
    let delta = target - q.forward(&t.state_features);
    q.apply_gradients(&g, params.alpha, params.update_biases);
    delta
}

/// One step on the mean loss of a minibatch. Targets all use the
/// pre-update network. Returns the mean absolute TD error.
pub fn td_update_batch(q: &mut QScorer, batch: &[&Transition], params: &TrainParams) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    let scale = 1.0 / batch.len() as f64;
    let mut total = Gradients::zeros_like(q);
    let mut abs_err = 0.0;
    for t in batch {
        let target = td_target(q, t, params.gamma);
        let (loss, g) = q.forward_backward(&t.state_features, target);
        abs_err += (2.0 * loss).sqrt();
        total.add_scaled(&g, scale);
    }
    q.apply_gradients(&total, params.alpha, params.update_biases);
    abs_err * scale
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub episode: u64,
    pub steps: usize,
    pub mean_reward: f64,
    pub mean_td_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingReport {
    pub rows: Vec<ReportRow>,
    pub updates: usize,
    pub skipped_records: usize,
}

impl TrainingReport {
    pub fn to_text(&self) -> String {
        let mut out = String::from("episode  steps  mean_reward  mean_td_error\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>7}  {:>5}  {:>11.6}  {:>13.6}",
                r.episode, r.steps, r.mean_reward, r.mean_td_error
            );
        }
        let _ = writeln!(out, "# updates {}", self.updates);
        let _ = writeln!(out, "# skipped_records {}", self.skipped_records);
        out
    }
}

fn mean_abs_td(q: &QScorer, ts: &[Transition], gamma: f64) -> f64 {
    if ts.is_empty() {
        return 0.0;
    }
    ts.iter()
        .map(|t| (td_target(q, t, gamma) - q.forward(&t.state_features)).abs())
        .sum::<f64>()
        / ts.len() as f64
}

fn report_row(q: &QScorer, episode: u64, ts: &[Transition], gamma: f64) -> ReportRow {
    let n = ts.len().max(1) as f64;
    ReportRow {
        episode,
        steps: ts.len(),
        mean_reward: ts.iter().map(|t| t.reward).sum::<f64>() / n,
        mean_td_error: mean_abs_td(q, ts, gamma),
    }
}

fn check_finite(q: &QScorer) -> Result<()> {
    if q.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("train.alpha", "training diverged to non-finite weights"))
    }
}

/// Train on logged episodes. The report is computed with the final network.
pub fn run_offline(records: &[EpisodeRecord], mut q: QScorer, params: &TrainParams) -> Result<(QScorer, TrainingReport)> {
    params.validate()?;
    let mut report = TrainingReport::default();
    if records.is_empty() {
        return Ok((q, report));
    }
    let mut buffer = ReplayBuffer::new(params.capacity);
    for r in records {
        buffer.push(r.to_transition());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let updates = params.offline_epochs * records.len().div_ceil(params.batch_size);
    for _ in 0..updates {
        let batch = buffer.sample(params.batch_size, &mut rng);
        td_update_batch(&mut q, &batch, params);
    }
    check_finite(&q)?;
    report.updates = updates;

    let mut by_episode: BTreeMap<u64, Vec<Transition>> = BTreeMap::new();
    for r in records {
        by_episode.entry(r.episode_id).or_default().push(r.to_transition());
    }
    report.rows = by_episode
        .iter()
        .map(|(ep, ts)| report_row(&q, *ep, ts, params.gamma))
        .collect();
    Ok((q, report))
}

/// Something that can play one training episode with a given policy.
pub trait EpisodeSource {
    /// Play episode `episode`, returning its steps in order.
    fn play(&mut self, episode: u64, policy: Policy<'_>, rng: &mut ChaCha8Rng) -> Result<Vec<EpisodeRecord>>;
}

/// Alternate epsilon-greedy episodes with minibatch sweeps. Generated
/// episodes go to `log` when given.
pub fn run_selfplay<W: std::io::Write>(
    source: &mut dyn EpisodeSource,
    mut q: QScorer,
    params: &TrainParams,
    n_episodes: u64,
    mut log: Option<&mut EpisodeLogWriter<W>>,
) -> Result<(QScorer, TrainingReport)> {
    params.validate()?;
    let mut report = TrainingReport::default();
    let mut buffer = ReplayBuffer::new(params.capacity);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for ep in 0..n_episodes {
        let snapshot = q.clone();
        let policy = Policy::EpsilonGreedy {
            scorer: &snapshot,
            epsilon: params.epsilon.at(ep),
        };
        let records = source.play(ep, policy, &mut rng)?;
        if let Some(w) = log.as_deref_mut() {
            for r in &records {
                w.write(r).map_err(|e| Error::io("episode log", e))?;
            }
        }
        let ts: Vec<Transition> = records.iter().map(EpisodeRecord::to_transition).collect();
        for t in &ts {
            buffer.push(t.clone());
        }
        if !buffer.is_empty() {
            for _ in 0..params.updates_per_episode {
                let batch = buffer.sample(params.batch_size, &mut rng);
                td_update_batch(&mut q, &batch, params);
            }
            report.updates += params.updates_per_episode;
        }
        check_finite(&q)?;
        report.rows.push(report_row(&q, ep, &ts, params.gamma));
    }
    if let Some(w) = log {
        w.flush().map_err(|e| Error::io("episode log", e))?;
    }
    Ok((q, report))
}
