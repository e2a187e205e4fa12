//! Scene files: robot placements for a single planning frame.
//!
//! ```toml
//! leader = 0
//!
//! [ball]          # optional, defaults to the leader's position
//! x = 3.0
//! y = 4.5
//!
//! [[robots]]
//! id = 0
//! team = "ours"
//! x = 3.0
//! y = 4.5
//!
//! [[robots]]
//! id = 10
//! team = "theirs"
//! x = 8.0
//! y = 4.0
//! vx = -1.0       # velocities default to zero
//! ```
//!
//! Optional `[field]` and `[limits.ours]` / `[limits.theirs]` sections
//! override the global configuration for this scene.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ball::BallState;
use crate::config::{Config, LimitsSection};
use crate::error::{Error, Result};
use crate::geometry::{Field, Vec2};
use crate::kinematics::{RobotState, Team};
use crate::world::WorldSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneBall {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneRobot {
    pub id: u32,
    pub team: Team,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub leader: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball: Option<SceneBall>,
    #[serde(default)]
    pub robots: Vec<SceneRobot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<Field>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<LimitsSection>,
}

impl Scene {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::parse(path, e))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scene serializes")
    }

    pub fn from_world(world: &WorldSnapshot) -> Self {
        Scene {
            leader: world.leader_id,
            ball: Some(SceneBall {
                x: world.ball.position.x,
                y: world.ball.position.y,
                vx: world.ball.velocity.x,
                vy: world.ball.velocity.y,
            }),
            robots: world
                .robots
                .iter()
                .map(|r| SceneRobot {
                    id: r.id,
                    team: r.team,
                    x: r.position.x,
                    y: r.position.y,
                    vx: r.velocity.x,
                    vy: r.velocity.y,
                })
                .collect(),
            field: Some(world.field),
            limits: Some(LimitsSection {
                ours: world.limits_ours,
                theirs: world.limits_theirs,
            }),
        }
    }

    /// Validated snapshot, with missing sections taken from `config`.
    pub fn to_world(&self, config: &Config) -> Result<WorldSnapshot> {
        let robots: Vec<RobotState> = self
            .robots
            .iter()
            .map(|r| RobotState {
                id: r.id,
                team: r.team,
                position: Vec2::new(r.x, r.y),
                velocity: Vec2::new(r.vx, r.vy),
            })
            .collect();
        let limits = self.limits.unwrap_or(config.limits);
        let ball = match self.ball {
            Some(b) => BallState {
                position: Vec2::new(b.x, b.y),
                velocity: Vec2::new(b.vx, b.vy),
            },
            None => {
                let l = robots
                    .iter()
                    .find(|r| r.id == self.leader)
                    .ok_or_else(|| Error::invalid("leader", format!("no robot {}", self.leader)))?;
                BallState::at_rest(l.position)
            }
        };
        let world = WorldSnapshot {
            ball,
            robots,
            leader_id: self.leader,
            field: self.field.unwrap_or(config.field),
            limits_ours: limits.ours,
            limits_theirs: limits.theirs,
        };
        world.validate()?;
        Ok(world)
    }
}
