//! Global TOML configuration shared by every command.
//!
//! Every section is optional and falls back to the built-in defaults.
//! Unknown keys are rejected.
//!
//! ```toml
//! seed = 7
//! workers = 4
//!
//! [physics]
//! roll_decel = 0.5
//!
//! [limits.ours]
//! v_max = 3.0
//!
//! [search]
//! n_directions = 128
//! n_speeds = 16
//! modes = ["flat", "chip"]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ball::{BallPhysicsParams, KickMode};
use crate::error::{Error, Result};
use crate::geometry::Field;
use crate::interception::InterceptParams;
use crate::kinematics::RobotLimits;
use crate::search::{enumerate_actions, ActionGrid, SearchParams};
use crate::sim::{Arena, SimConfig};
use crate::training::{RewardParams, TrainParams};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitsSection {
    pub ours: RobotLimits,
    pub theirs: RobotLimits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSection {
    pub n_directions: usize,
    pub n_speeds: usize,
    pub modes: Vec<KickMode>,
    pub dt: f64,
    pub horizon: f64,
    pub margin_min: f64,
    pub pruned: bool,
}

impl Default for SearchSection {
    fn default() -> Self {
        let g = ActionGrid::default();
        let p = SearchParams::default();
        Self {
            n_directions: g.n_directions,
            n_speeds: g.n_speeds,
            modes: g.modes,
            dt: p.intercept.dt,
            horizon: p.intercept.horizon,
            margin_min: p.margin_min,
            pruned: p.pruned,
        }
    }
}

impl SearchSection {
    pub fn grid(&self) -> ActionGrid {
        ActionGrid::new(self.n_directions, self.n_speeds, self.modes.clone())
    }

    pub fn params(&self) -> SearchParams {
        SearchParams {
            intercept: InterceptParams {
                dt: self.dt,
                horizon: self.horizon,
            },
            margin_min: self.margin_min,
            pruned: self.pruned,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatmapSection {
    /// Cells along the field length.
    pub cols: usize,
}

impl Default for HeatmapSection {
    fn default() -> Self {
        Self { cols: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Overrides the training and simulator seeds when set.
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    pub workers: Option<usize>,
    pub physics: BallPhysicsParams,
    pub limits: LimitsSection,
    pub field: Field,
    pub search: SearchSection,
    pub train: TrainParams,
    pub reward: RewardParams,
    pub sim: SimConfig,
    pub heatmap: HeatmapSection,
}

impl Config {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        let mut c: Config = toml::from_str(text).map_err(|e| e.message().to_string())?;
        if let Some(s) = c.seed {
            c.set_seed(s);
        }
        c.validate().map_err(|e| e.to_string())?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::parse(path, e))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        self.train.seed = seed;
        self.sim.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        self.physics.validate()?;
        self.limits.ours.validate()?;
        self.limits.theirs.validate()?;
        self.field.validate()?;
        self.search.grid().validate()?;
        self.search.params().validate()?;
        self.train.validate()?;
        self.reward.validate()?;
        self.sim.validate()?;
        if self.workers == Some(0) {
            return Err(Error::invalid("workers", "must be at least 1"));
        }
        if self.heatmap.cols < 4 {
            return Err(Error::invalid("heatmap.cols", "must be at least 4"));
        }
        Ok(())
    }

    pub fn arena(&self) -> Arena {
        Arena {
            sim: self.sim.clone(),
            field: self.field,
            physics: self.physics,
            limits_ours: self.limits.ours,
            limits_theirs: self.limits.theirs,
            actions: enumerate_actions(&self.search.grid()),
            search: self.search.params(),
            reward: self.reward,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_defaults() {
        let c = Config::from_toml_str("").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.search.grid().len(), 4096);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = Config::default();
        c.set_seed(42);
        c.workers = Some(2);
        c.search.n_directions = 32;
        let back = Config::from_toml_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Config::from_toml_str("bogus = 1").is_err());
        assert!(Config::from_toml_str("[physics]\nfriction = 1.0").is_err());
        assert!(Config::from_toml_str("[search]\nhorizon = 0.0").is_err());
        assert!(Config::from_toml_str("[limits.ours]\nv_max = -1.0").is_err());
        assert!(Config::from_toml_str("[train]\ngamma = 1.5").is_err());
        assert!(Config::from_toml_str("[sim]\ntimestep = 0.0").is_err());
    }

    #[test]
    fn global_seed_wins() {
        let c = Config::from_toml_str("seed = 5\n[train]\nseed = 1").unwrap();
        assert_eq!((c.train.seed, c.sim.seed), (5, 5));
    }

    #[test]
    fn search_section_parses_modes() {
        let c = Config::from_toml_str("[search]\nmodes = [\"chip\"]\nn_directions = 8\nn_speeds = 2").unwrap();
        assert_eq!(c.search.grid().len(), 16);
        assert_eq!(c.search.modes, vec![KickMode::Chip]);
    }
}
