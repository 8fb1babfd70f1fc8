use serde::{Deserialize, Serialize};

use crate::encoding::EncodingMode;
use crate::fleet::RobotType;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotTypeParams {
    pub max_speed: f64,
    pub perception_range: f64,
    /// Chance per second of removing one member of an engaged adversary squad.
    pub neutralize_prob: f64,
    pub indoor_capable: bool,
    /// Area searched per second, m²/s.
    pub search_rate: f64,
}

/// Region-based formation gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormationParams {
    /// Inter-robot repulsion gain.
    pub alpha: f64,
    /// Region attraction gain.
    pub beta: f64,
    pub d_min: f64,
}

impl Default for FormationParams {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 1.0, d_min: 1.0 }
    }
}

/// Physical and mission constants of the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    pub dt: f64,
    pub decision_interval: f64,
    pub ugv: RobotTypeParams,
    pub uav_a: RobotTypeParams,
    pub uav_b: RobotTypeParams,
    pub formation: FormationParams,
    /// Engagement range of dynamic adversaries, m.
    pub engagement_range: f64,
    /// Disable chance per second shared among the engaged robots.
    pub adversary_lethality: f64,
    /// Peak smoke slowdown fraction.
    pub smoke_slowdown: f64,
    /// Outdoor observation band around a building footprint, m.
    pub observation_band: f64,
    /// Search progress at which a building's status is known.
    pub identify_threshold: f64,
    pub smoke_weight_scale: f64,
    pub caution_weight_scale: f64,
    /// Radius of an observed adversary's influence on edge weights, m.
    pub caution_radius: f64,
    /// Distance at which a waypoint counts as reached, m.
    pub arrival_tolerance: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        let uav = RobotTypeParams {
            max_speed: 5.0,
            perception_range: 40.0,
            neutralize_prob: 0.05,
            indoor_capable: false,
            search_rate: 40.0,
        };
        Self {
            dt: 0.1,
            decision_interval: 60.0,
            ugv: RobotTypeParams {
                max_speed: 1.0,
                perception_range: 25.0,
                neutralize_prob: 0.15,
                indoor_capable: true,
                search_rate: 4.0,
            },
            uav_a: uav,
            uav_b: RobotTypeParams { max_speed: 4.0, ..uav },
            formation: FormationParams::default(),
            engagement_range: 15.0,
            adversary_lethality: 0.1,
            smoke_slowdown: 0.5,
            observation_band: 30.0,
            identify_threshold: 0.5,
            smoke_weight_scale: 1.0,
            caution_weight_scale: 4.0,
            caution_radius: 20.0,
            arrival_tolerance: 0.5,
        }
    }
}

impl SimParams {
    pub fn robot(&self, t: RobotType) -> &RobotTypeParams {
        match t {
            RobotType::Ugv => &self.ugv,
            RobotType::UavA => &self.uav_a,
            RobotType::UavB => &self.uav_b,
        }
    }

    pub fn v_max(&self) -> f64 {
        RobotType::ALL.iter().map(|&t| self.robot(t).max_speed).fold(0.0, f64::max)
    }
}

/// Per-run switches that do not change the physics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuntimeConfig {
    pub encoding: EncodingMode,
    /// Robot slots per type in the raw observation.
    pub raw_slots: usize,
    /// End the episode at the rescue; otherwise run to the time limit.
    pub stop_on_success: bool,
    pub record_trace: bool,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            encoding: EncodingMode::Both,
            raw_slots: 40,
            stop_on_success: true,
            record_trace: false,
        }
    }
}
