//! Fixed-step kinematic mission simulator: robots following graph routes in
//! formation, patrolling and static adversaries, smoke, search progress and
//! tactical decisions driven by a policy.

mod episode;
mod formation;
mod params;
mod trace;
mod world;

pub use episode::{observation_width, run_episode, ConstantPolicy, Episode, EpisodeResult, Policy};
pub use formation::{formation_velocity, region_pull, repulsion, settle_step, Region};
pub use params::{FormationParams, RobotTypeParams, RuntimeConfig, SimParams};
pub use trace::{fnv1a64, Trace};
pub use world::{
    allocate_tasks, engagement_tick, move_agents, observe, plan_paths, search_tick, static_kill, BuildingSite,
    DynamicAdversary, DynamicAdversarySpec, Mission, Robot, RobotStatus, SearchProgress, StaticAdversary, World,
};

use thiserror::Error;

use crate::encoding::EncodingError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("policy output has {found} entries, expected {expected}")]
    ActionWidth { expected: usize, found: usize },
    #[error("invalid mission: {0}")]
    Mission(String),
    #[error("episode already finished")]
    Finished,
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}
