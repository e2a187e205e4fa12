//! Earliest feasible interception of a predicted ball by a single robot.
//!
//! The ball trajectory is sampled every `dt`. Step `k` is an interception
//! when the ball is on the ground and inside the field at `k * dt` and the
//! robot's optimal arrival time at that point is no later than `k * dt`.
//! The first such step gives the interception point and time.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{predict_flat, BallPhysicsParams, BallState, BallTrajectory};
use crate::error::{Error, Result};
use crate::geometry::{Field, Vec2};
use crate::grid::{Grid, GridSpec};
use crate::kinematics::{time_to_point, RobotLimits, RobotState, Team};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterceptParams {
    /// Sampling interval, seconds.
    pub dt: f64,
    /// Latest interception time considered, seconds.
    pub horizon: f64,
}

impl Default for InterceptParams {
    fn default() -> Self {
        Self {
            dt: 1.0 / 60.0,
            horizon: 10.0,
        }
    }
}

impl InterceptParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::invalid("horizon", "must be positive"));
        }
        Ok(())
    }

    /// Largest sample index inside the horizon.
    pub fn max_step(&self) -> usize {
        ((self.horizon / self.dt) * (1.0 + 1e-12)).floor() as usize
    }

    #[inline]
    pub fn time_of(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intercept {
    /// Best interception point.
    pub point: Vec2,
    /// Earliest interception time, always `step * dt`.
    pub time: f64,
    pub step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterceptSolution {
    pub robot_id: u32,
    pub hit: Option<Intercept>,
}

impl InterceptSolution {
    pub fn feasible(&self) -> bool {
        self.hit.is_some()
    }

    pub fn point(&self) -> Option<Vec2> {
        self.hit.map(|h| h.point)
    }

    pub fn time(&self) -> Option<f64> {
        self.hit.map(|h| h.time)
    }
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    position: Vec2,
    interceptable: bool,
    resting: bool,
}

/// A trajectory pre-sampled on the interception clock.
///
/// Sampling stops at the first point outside the field (the ball moves along
/// a ray and the field is convex, so it never comes back), at the first
/// resting sample, or at the horizon, whichever comes first.
#[derive(Debug, Clone)]
pub struct SampledTrajectory {
    params: InterceptParams,
    samples: Vec<Sample>,
}

impl SampledTrajectory {
    pub fn new(traj: &BallTrajectory, params: &InterceptParams, field: &Field) -> Self {
        let max_k = params.max_step();
        let mut samples = Vec::with_capacity((max_k + 1).min(1024));
        for k in 0..=max_k {
            let t = params.time_of(k);
            let position = traj.position_at(t);
            if !field.contains(position) {
                break;
            }
            let resting = traj.is_resting_at(t);
            samples.push(Sample {
                position,
                interceptable: traj.interceptable_at(t),
                resting,
            });
            if resting {
                break;
            }
        }
        Self {
            params: *params,
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn params(&self) -> &InterceptParams {
        &self.params
    }

    /// Scan for the first interception at a step no later than `last_step`.
    ///
    /// Returns the solution and the number of arrival-time evaluations made.
    pub fn intercept(
        &self,
        robot: &RobotState,
        limits: &RobotLimits,
        last_step: usize,
    ) -> (InterceptSolution, usize) {
        let p = &self.params;
        let last_step = last_step.min(p.max_step());
        let mut evals = 0;
        let mut hit = None;
        for (k, s) in self.samples.iter().enumerate().take(last_step + 1) {
            if !s.interceptable {
                continue;
            }
            let arrival = time_to_point(robot, s.position, limits);
            evals += 1;
            if s.resting {
                // The ball stays here; the answer is the first step at or
                // after `k` that the robot can make.
                let step = first_step_after(arrival, k, p.dt);
                if step <= last_step {
                    hit = Some(Intercept {
                        point: s.position,
                        time: p.time_of(step),
                        step,
                    });
                }
                break;
            }
            if arrival <= p.time_of(k) {
                hit = Some(Intercept {
                    point: s.position,
                    time: p.time_of(k),
                    step: k,
                });
                break;
            }
        }
        (
            InterceptSolution {
                robot_id: robot.id,
                hit,
            },
            evals,
        )
    }
}

/// Smallest `j >= k` with `arrival <= j * dt`, evaluated exactly as the scan would.
fn first_step_after(arrival: f64, k: usize, dt: f64) -> usize {
    if !arrival.is_finite() {
        return usize::MAX;
    }
    let mut j = ((arrival / dt).ceil().max(0.0) as usize).max(k);
    while j > k && arrival <= (j - 1) as f64 * dt {
        j -= 1;
    }
    while arrival > j as f64 * dt {
        j += 1;
    }
    j
}

/// Earliest interception of `traj` by `robot` within the field.
pub fn intercept(
    robot: &RobotState,
    limits: &RobotLimits,
    traj: &BallTrajectory,
    params: &InterceptParams,
    field: &Field,
) -> InterceptSolution {
    let sampled = SampledTrajectory::new(traj, params, field);
    sampled.intercept(robot, limits, params.max_step()).0
}

/// Interception time for a robot starting at rest at every cell center.
///
/// Cells are independent, so the map is evaluated in parallel on the
/// current rayon pool; the result does not depend on scheduling.
pub fn intercept_heatmap(
    ball: BallState,
    limits: &RobotLimits,
    physics: &BallPhysicsParams,
    params: &InterceptParams,
    field: &Field,
    spec: &GridSpec,
) -> Result<Grid> {
    spec.validate()?;
    params.validate()?;
    let traj = predict_flat(ball, physics);
    let sampled = SampledTrajectory::new(&traj, params, field);
    let last = params.max_step();
    let values = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let robot = RobotState::at_rest(0, Team::Ours, spec.cell_center(i));
            let (sol, _) = sampled.intercept(&robot, limits, last);
            sol.time().unwrap_or(f64::INFINITY)
        })
        .collect();
    Ok(Grid {
        spec: *spec,
        values,
    })
}
