//! Tactics state and action encoding: target beliefs, Pareto destination
//! nodes, per-type robot clusters, the fixed-width observation vector and the
//! squad-command decoder, plus the raw ablation encodings.

mod action;
mod belief;
mod kmeans;
mod observation;
mod pareto;

pub use action::{bin_index, decode_action, decode_action_raw, split_by_shares, SquadCommand, TacticsAction, ACTION_WIDTH, SQUADS};
pub use belief::{BeliefEvent, TargetBelief};
pub use kmeans::{cluster_robots, Cluster, ClusterSet, CLUSTERS_PER_TYPE};
pub use observation::{
    adversary_line_distance, encode_state, encode_state_raw, layout_text, raw_input_width, ObservationLayout,
    RobotView, MissionView, TRACKED_ADVERSARIES,
};
pub use pareto::{
    crowding_distances, crowding_select, dominates, objective_matrix, pareto_filter, pareto_nodes, ParetoContext,
    ParetoNodes, CAUTIOUS_NODES, PARETO_SLOTS, PLAIN_NODES,
};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EncodingError {
    #[error("goal index {index} out of range for {goals} goals")]
    GoalIndex { index: usize, goals: usize },
    #[error("action vector has {found} entries, expected {expected}")]
    ActionWidth { expected: usize, found: usize },
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("unknown encoding `{0}` (expected both, input, output or none)")]
    UnknownMode(String),
}

/// Which of the two structured encodings are active.
///
/// `Input` keeps the clustered observation but decodes destinations over every
/// graph node; `Output` feeds raw robot states but keeps Pareto destinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingMode {
    Both,
    Input,
    Output,
    None,
}

impl EncodingMode {
    pub const ALL: [EncodingMode; 4] = [EncodingMode::Both, EncodingMode::Input, EncodingMode::Output, EncodingMode::None];

    pub fn structured_input(self) -> bool {
        matches!(self, EncodingMode::Both | EncodingMode::Input)
    }

    pub fn pareto_output(self) -> bool {
        matches!(self, EncodingMode::Both | EncodingMode::Output)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EncodingMode::Both => "both",
            EncodingMode::Input => "input",
            EncodingMode::Output => "output",
            EncodingMode::None => "none",
        }
    }
}

impl fmt::Display for EncodingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EncodingMode {
    type Err = EncodingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "both" => Ok(EncodingMode::Both),
            "input" => Ok(EncodingMode::Input),
            "output" => Ok(EncodingMode::Output),
            "none" => Ok(EncodingMode::None),
            other => Err(EncodingError::UnknownMode(other.to_string())),
        }
    }
}
