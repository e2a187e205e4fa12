use rayon::prelude::*;

use crate::ball::{BallPhysicsParams, MAX_KICK_SPEED};
use crate::error::{Error, Result};
use crate::features::extract_features;
use crate::grid::{Grid, GridSpec};
use crate::kinematics::time_to_point;
use crate::scoring::Scorer;
use crate::search::SearchParams;
use crate::world::WorldSnapshot;

/// Time for a flat kick at full speed to roll `d` meters, if it gets there.
fn flat_arrival(d: f64, physics: &BallPhysicsParams) -> Option<f64> {
    let (v, a) = (MAX_KICK_SPEED, physics.roll_decel);
    let disc = v * v - 2.0 * a * d;
    (disc >= 0.0).then(|| (v - disc.sqrt()) / a)
}

/// Score of a pass received at every cell center.
///
/// Each cell gets a synthetic pair: the fastest teammate receives there no
/// earlier than a full-speed flat ball can arrive, and the margin is the
/// fastest opponent's arrival minus that time. Cells no teammate can win
/// are written as `inf`.
pub fn score_heatmap(
    world: &WorldSnapshot,
    scorer: &dyn Scorer,
    spec: &GridSpec,
    physics: &BallPhysicsParams,
    params: &SearchParams,
) -> Result<Grid> {
    world.validate()?;
    spec.validate()?;
    params.validate()?;
    let leader = world.leader().ok_or_else(|| Error::invalid("leader_id", "leader missing"))?;
    let horizon = params.intercept.horizon;
    let values = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let p = spec.cell_center(i);
            if !world.field.contains(p) {
                return f64::INFINITY;
            }
            let Some(t_ball) = flat_arrival(leader.position.distance(p), physics) else {
                return f64::INFINITY;
            };
            let t_recv = world
                .teammates()
                .map(|r| time_to_point(r, p, &world.limits_ours))
                .fold(f64::INFINITY, f64::min);
            let t = t_recv.max(t_ball);
            let t_opp = world
                .opponents()
                .map(|r| time_to_point(r, p, &world.limits_theirs))
                .fold(f64::INFINITY, f64::min);
            let margin = t_opp - t;
            if t > horizon || margin <= params.margin_min {
                return f64::INFINITY;
            }
            scorer.score(&extract_features(&world.field, horizon, leader.position, p, t, margin))
        })
        .collect();
    Ok(Grid {
        spec: *spec,
        values,
    })
}
