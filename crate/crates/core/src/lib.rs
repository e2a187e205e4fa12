//! Pass planning for small-size robot soccer.
//!
//! The planner discretizes the ball holder's kick space, predicts how every
//! robot on the field would intercept each kick, keeps the kicks a teammate
//! wins, and ranks those with a scoring function learned by Q-learning.

pub mod ball;
pub mod cli;
pub mod config;
pub mod error;
pub mod features;
pub mod geometry;
pub mod grid;
pub mod interception;
pub mod kinematics;
pub mod parallel;
pub mod scene;
pub mod scoring;
pub mod search;
pub mod sim;
pub mod training;
pub mod world;

pub use ball::{BallPhysicsParams, BallState, BallTrajectory, KickMode};
pub use error::{Error, Result};
pub use features::FeatureVector;
pub use geometry::{Field, Vec2};
pub use interception::{InterceptParams, InterceptSolution};
pub use kinematics::{RobotLimits, RobotState, Team};
pub use scoring::{LinearScorer, QScorer, Scorer};
pub use search::{ActionGrid, Cacop, KickAction, SearchParams};
pub use world::WorldSnapshot;
