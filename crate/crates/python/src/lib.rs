//! Python bindings for the pass planner.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use passplan::ball::{predict_chip, predict_flat, BallTrajectory};
use passplan::config::Config;
use passplan::features::FeatureVector;
use passplan::grid::GridSpec;
use passplan::interception::intercept_heatmap;
use passplan::kinematics;
use passplan::scene::Scene;
use passplan::scoring::{self, Scorer};
use passplan::search::{build_feasible_set, enumerate_actions, ActionGrid};
use passplan::sim::run_4v4;
use passplan::training::{self, BallEvent, Transition};
use passplan::{BallState, KickMode, RobotState, Team, Vec2};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(s: &str) -> PyResult<KickMode> {
    match s {
        "flat" => Ok(KickMode::Flat),
        "chip" => Ok(KickMode::Chip),
        _ => Err(PyValueError::new_err(format!("unknown kick mode {s:?}"))),
    }
}

fn features(x: [f64; 5]) -> FeatureVector {
    FeatureVector(x)
}

/// Time for a robot to reach `target` and stop there under the default limits.
#[pyfunction]
#[pyo3(signature = (position, target, velocity = (0.0, 0.0), v_max = 3.0, a_max = 4.5))]
fn time_to_point(position: (f64, f64), target: (f64, f64), velocity: (f64, f64), v_max: f64, a_max: f64) -> PyResult<f64> {
    let limits = kinematics::RobotLimits {
        v_max,
        a_max,
        ..Default::default()
    };
    limits.validate().map_err(err)?;
    let robot = RobotState {
        id: 0,
        team: Team::Ours,
        position: Vec2::new(position.0, position.1),
        velocity: Vec2::new(velocity.0, velocity.1),
    };
    Ok(kinematics::time_to_point(&robot, Vec2::new(target.0, target.1), &limits))
}

/// Shaped reward at a ball position; `event` is "none", "penalty_area" or "goal".
#[pyfunction]
#[pyo3(signature = (position, event = "none"))]
fn reward(position: (f64, f64), event: &str) -> PyResult<f64> {
    let ev = match event {
        "none" => BallEvent::None,
        "penalty_area" => BallEvent::PenaltyArea,
        "goal" => BallEvent::Goal,
        _ => return Err(PyValueError::new_err(format!("unknown event {event:?}"))),
    };
    let cfg = Config::default();
    Ok(training::reward(Vec2::new(position.0, position.1), ev, &cfg.reward, &cfg.field))
}

#[pyclass(name = "BallTrajectory", frozen)]
struct PyTrajectory(BallTrajectory);

#[pymethods]
impl PyTrajectory {
    /// Rolling ball from `position` with `velocity`.
    #[staticmethod]
    fn flat(position: (f64, f64), velocity: (f64, f64)) -> Self {
        let ball = BallState {
            position: Vec2::new(position.0, position.1),
            velocity: Vec2::new(velocity.0, velocity.1),
        };
        PyTrajectory(predict_flat(ball, &Default::default()))
    }

    /// Chip kick from rest at `position`.
    #[staticmethod]
    fn chip(position: (f64, f64), speed: f64, direction: f64) -> PyResult<Self> {
        let ball = BallState::at_rest(Vec2::new(position.0, position.1));
        predict_chip(ball, speed, direction, &Default::default())
            .map(PyTrajectory)
            .map_err(err)
    }

    fn position_at(&self, t: f64) -> (f64, f64) {
        let p = self.0.position_at(t);
        (p.x, p.y)
    }

    fn height_at(&self, t: f64) -> f64 {
        self.0.height_at(t)
    }

    #[getter]
    fn stop_time(&self) -> f64 {
        self.0.stop_time()
    }

    #[getter]
    fn stop_position(&self) -> (f64, f64) {
        let p = self.0.stop_position();
        (p.x, p.y)
    }
}

/// MLP pass scorer.
#[pyclass(name = "QScorer")]
struct PyQScorer(scoring::QScorer);

#[pymethods]
impl PyQScorer {
    /// Glorot-initialized network; `sizes` includes input and output.
    #[staticmethod]
    #[pyo3(signature = (seed = 0, sizes = vec![5, 32, 32, 1]))]
    fn random(seed: u64, sizes: Vec<usize>) -> PyResult<Self> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        scoring::QScorer::random(&sizes, &mut rng).map(PyQScorer).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        scoring::read_weights(&path).map(PyQScorer).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        scoring::write_weights(&self.0, &path).map_err(err)
    }

    fn score(&self, x: [f64; 5]) -> f64 {
        self.0.score(&features(x))
    }

    #[getter]
    fn sizes(&self) -> Vec<usize> {
        self.0.sizes()
    }

    fn parameters(&self) -> Vec<f64> {
        self.0.parameters()
    }

    /// One TD step; returns the TD error before the step.
    #[pyo3(signature = (x, reward, next_candidates, terminal, alpha = 1e-3, gamma = 0.95))]
    fn td_update(
        &mut self,
        x: [f64; 5],
        reward: f64,
        next_candidates: Vec<[f64; 5]>,
        terminal: bool,
        alpha: f64,
        gamma: f64,
    ) -> PyResult<f64> {
        let t = Transition {
            state_features: features(x),
            reward,
            next_candidates: next_candidates.into_iter().map(features).collect(),
            terminal,
        };
        t.validate().map_err(err)?;
        let params = training::TrainParams {
            alpha,
            gamma,
            ..Default::default()
        };
        params.validate().map_err(err)?;
        Ok(training::td_update(&mut self.0, &t, &params))
    }
}

/// A planning frame loaded from scene TOML, with the default configuration.
#[pyclass(name = "World", frozen)]
struct PyWorld(passplan::WorldSnapshot);

#[pymethods]
impl PyWorld {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let scene = Scene::from_toml_str(text).map_err(err)?;
        scene.to_world(&Config::default()).map(PyWorld).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let scene = Scene::load(&path).map_err(err)?;
        scene.to_world(&Config::default()).map(PyWorld).map_err(err)
    }

    #[getter]
    fn leader(&self) -> u32 {
        self.0.leader_id
    }

    /// Robots as `(id, team, x, y)` tuples.
    #[getter]
    fn robots(&self) -> Vec<(u32, &'static str, f64, f64)> {
        self.0
            .robots
            .iter()
            .map(|r| {
                let team = match r.team {
                    Team::Ours => "ours",
                    Team::Theirs => "theirs",
                };
                (r.id, team, r.position.x, r.position.y)
            })
            .collect()
    }

    /// Feasible pairs over a `n_directions x n_speeds` grid, as dicts.
    #[pyo3(signature = (n_directions = 128, n_speeds = 16, modes = vec!["flat".to_string(), "chip".to_string()], pruned = true))]
    fn feasible_set<'py>(
        &self,
        py: Python<'py>,
        n_directions: usize,
        n_speeds: usize,
        modes: Vec<String>,
        pruned: bool,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let modes = modes.iter().map(|m| parse_mode(m)).collect::<PyResult<Vec<_>>>()?;
        let grid = ActionGrid::new(n_directions, n_speeds, modes);
        grid.validate().map_err(err)?;
        let actions = enumerate_actions(&grid);
        let cfg = Config::default();
        let params = passplan::SearchParams {
            pruned,
            ..cfg.search.params()
        };
        let world = &self.0;
        let set = py
            .detach(|| build_feasible_set(world, &actions, &cfg.physics, &params))
            .map_err(err)?;
        set.cacops
            .iter()
            .map(|c| {
                let d = PyDict::new(py);
                let p = c.point();
                d.set_item("action_index", c.action_index)?;
                d.set_item(
                    "mode",
                    match c.action.mode {
                        KickMode::Flat => "flat",
                        KickMode::Chip => "chip",
                    },
                )?;
                d.set_item("theta", c.action.direction)?;
                d.set_item("v", c.action.speed)?;
                d.set_item("receiver", c.receiver_id)?;
                d.set_item("point", (p.x, p.y))?;
                d.set_item("time", c.time())?;
                d.set_item("margin", c.opponent_margin)?;
                d.set_item("features", c.features.0.to_vec())?;
                Ok(d)
            })
            .collect()
    }

    /// Interception-time grid (rows of seconds, `inf` when unreachable) for
    /// a ball rolling from this frame's ball position.
    #[pyo3(signature = (ball_speed, direction = 0.0, cols = 60))]
    fn intercept_heatmap(&self, py: Python<'_>, ball_speed: f64, direction: f64, cols: usize) -> PyResult<Vec<Vec<f64>>> {
        let w = &self.0;
        let ball = BallState {
            position: w.ball.position,
            velocity: Vec2::from_angle(direction) * ball_speed,
        };
        let spec = GridSpec::covering(&w.field, cols);
        let cfg = Config::default();
        let grid = py
            .detach(|| {
                intercept_heatmap(
                    ball,
                    &w.limits_ours,
                    &cfg.physics,
                    &cfg.search.params().intercept,
                    &w.field,
                    &spec,
                )
            })
            .map_err(err)?;
        Ok(grid.values.chunks(spec.cols).map(|r| r.to_vec()).collect())
    }
}

/// 4v4 evaluation with the given scorer, or random choice when `None`.
/// Returns the aggregate metrics as a dict.
#[pyfunction]
#[pyo3(signature = (scorer = None, episodes = 10, seed = 0, n_directions = 32, n_speeds = 4))]
fn run_4v4_eval<'py>(
    py: Python<'py>,
    scorer: Option<PyRef<'py, PyQScorer>>,
    episodes: usize,
    seed: u64,
    n_directions: usize,
    n_speeds: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = Config::default();
    cfg.search.n_directions = n_directions;
    cfg.search.n_speeds = n_speeds;
    cfg.validate().map_err(err)?;
    let arena = cfg.arena();
    let q = scorer.map(|s| s.0.clone());
    let report = py
        .detach(|| {
            let policy = match &q {
                Some(q) => scoring::Policy::Greedy(q),
                None => scoring::Policy::Random,
            };
            run_4v4(&arena, policy, episodes, seed)
        })
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("episodes", report.episodes)?;
    d.set_item("passes", report.passes)?;
    d.set_item("possession_retention", report.possession_retention())?;
    d.set_item("receiver_capture_rate", report.receiver_capture_rate())?;
    d.set_item("mean_reward", report.mean_reward())?;
    d.set_item("mean_passes", report.mean_passes())?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "passplan")]
fn passplan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(time_to_point, m)?)?;
    m.add_function(wrap_pyfunction!(reward, m)?)?;
    m.add_function(wrap_pyfunction!(run_4v4_eval, m)?)?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyQScorer>()?;
    m.add_class::<PyWorld>()?;
    m.add("MAX_KICK_SPEED", passplan::ball::MAX_KICK_SPEED)?;
    Ok(())
}
