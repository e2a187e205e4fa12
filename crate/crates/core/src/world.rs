use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::ball::BallState;
use crate::error::{Error, Result};
use crate::geometry::Field;
use crate::kinematics::{RobotLimits, RobotState, Team, SPEED_EPS};

/// Most robots a single frame may carry.
pub const MAX_ROBOTS: usize = 24;

/// One frame of the game: ball, robots and the ball-holding leader.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSnapshot {
    pub ball: BallState,
    pub robots: Vec<RobotState>,
    pub leader_id: u32,
    pub field: Field,
    pub limits_ours: RobotLimits,
    pub limits_theirs: RobotLimits,
}

impl WorldSnapshot {
    pub fn validate(&self) -> Result<()> {
        self.field.validate()?;
        self.limits_ours.validate()?;
        self.limits_theirs.validate()?;
        if self.robots.len() > MAX_ROBOTS {
            return Err(Error::invalid("robots", format!("at most {MAX_ROBOTS} robots")));
        }
        let mut seen = HashSet::new();
        for r in &self.robots {
            if !seen.insert(r.id) {
                return Err(Error::invalid("robots", format!("duplicate robot id {}", r.id)));
            }
            if !(r.position.is_finite() && r.velocity.is_finite()) {
                return Err(Error::invalid("robots", format!("robot {} has non-finite state", r.id)));
            }
            if r.velocity.norm() > self.limits(r.team).v_max + SPEED_EPS {
                return Err(Error::invalid("robots", format!("robot {} exceeds v_max", r.id)));
            }
        }
        match self.leader() {
            Some(l) if l.team == Team::Ours => {}
            Some(_) => return Err(Error::invalid("leader_id", "leader must be on our team")),
            None => return Err(Error::invalid("leader_id", format!("no robot {}", self.leader_id))),
        }
        if !(self.ball.position.is_finite() && self.ball.velocity.is_finite()) {
            return Err(Error::invalid("ball", "non-finite state"));
        }
        Ok(())
    }

    pub fn leader(&self) -> Option<&RobotState> {
        self.robots.iter().find(|r| r.id == self.leader_id)
    }

    pub fn robot(&self, id: u32) -> Option<&RobotState> {
        self.robots.iter().find(|r| r.id == id)
    }

    pub fn limits(&self, team: Team) -> &RobotLimits {
        match team {
            Team::Ours => &self.limits_ours,
            Team::Theirs => &self.limits_theirs,
        }
    }

    pub fn teammates(&self) -> impl Iterator<Item = &RobotState> {
        self.robots
            .iter()
            .filter(move |r| r.team == Team::Ours && r.id != self.leader_id)
    }

    pub fn opponents(&self) -> impl Iterator<Item = &RobotState> {
        self.robots.iter().filter(|r| r.team == Team::Theirs)
    }
}
