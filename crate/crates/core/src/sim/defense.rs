//! Scripted defenders. They shadow attackers but never go for a held ball.

use serde::{Deserialize, Serialize};

use crate::geometry::{Field, Vec2};
use crate::kinematics::{RobotState, Team};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefensePolicy {
    /// Defenders stand still.
    Frozen,
    /// Each defender, in id order, takes the nearest unmarked attacker and
    /// stands between it and the ball.
    ManMark,
}

fn clamp_to_field(p: Vec2, field: &Field) -> Vec2 {
    Vec2::new(p.x.clamp(0.0, field.length), p.y.clamp(0.0, field.width))
}

/// Target points for the defending team.
pub fn defense_targets(
    policy: DefensePolicy,
    robots: &[RobotState],
    ball: Vec2,
    holder: Option<u32>,
    field: &Field,
    mark_distance: f64,
) -> Vec<(u32, Vec2)> {
    if policy == DefensePolicy::Frozen {
        return Vec::new();
    }
    let mut defenders: Vec<&RobotState> = robots.iter().filter(|r| r.team == Team::Theirs).collect();
    defenders.sort_by_key(|r| r.id);
    let mut threats: Vec<&RobotState> = robots
        .iter()
        .filter(|r| r.team == Team::Ours && Some(r.id) != holder)
        .collect();
    threats.sort_by_key(|r| r.id);
    let mut taken = vec![false; threats.len()];

    let mut out = Vec::with_capacity(defenders.len());
    for d in defenders {
        let pick = threats
            .iter()
            .enumerate()
            .filter(|(i, _)| !taken[*i])
            .min_by(|(_, a), (_, b)| {
                d.position
                    .distance(a.position)
                    .total_cmp(&d.position.distance(b.position))
            })
            .map(|(i, t)| (i, *t));
        let target = match pick {
            Some((i, t)) => {
                taken[i] = true;
                t.position + (ball - t.position).normalized() * mark_distance
            }
            // Spare defenders guard the lane from the ball to their goal.
            None => ball + (field.opponent_goal_center() - ball).normalized() * (mark_distance + 0.1),
        };
        out.push((d.id, clamp_to_field(target, field)));
    }
    out
}
