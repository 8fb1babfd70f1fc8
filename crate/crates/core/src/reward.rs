//! End-of-mission reward and fitness aggregation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::EpisodeResult;

#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error("successful result has rescue time {rescue_time} beyond the limit {t_f}")]
    RescueAfterLimit { rescue_time: f64, t_f: f64 },
    #[error("fitness needs at least one scenario")]
    NoScenarios,
    #[error("survivability coefficient must be non-negative, got {0}")]
    Coefficient(f64),
}

/// Reward shaping switches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    /// Survivability coefficient: weight of the survival rate against speed.
    pub c_s: f64,
    /// Use the original elapsed-time and pool-size-offset forms instead of
    /// the bounded per-scenario reward. For inspection only.
    #[serde(default)]
    pub literal: Option<LiteralForm>,
}

/// Parameters of the unnormalized reward form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiteralForm {
    pub scenario_count: usize,
}

impl RewardConfig {
    pub fn new(c_s: f64) -> Result<Self, RewardError> {
        if !(c_s >= 0.0) {
            return Err(RewardError::Coefficient(c_s));
        }
        Ok(Self { c_s, literal: None })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub success: bool,
    /// Fraction of the time limit left at the rescue.
    pub tau: f64,
    pub survival: f64,
    /// Failure term from search progress.
    pub progress: f64,
    pub total: f64,
}

/// Mean of `(psi_in + psi_out) / 2` over candidates, minus one.
pub fn search_progress_term(progress: &[(f64, f64)]) -> f64 {
    if progress.is_empty() {
        return -1.0;
    }
    let sum: f64 = progress.iter().map(|&(i, o)| 0.5 * (i + o)).sum();
    sum / progress.len() as f64 - 1.0
}

/// Success scores `tau * survival^c_s` in (0, 1]; failure scores the search
/// progress term in [-1, 0].
pub fn scenario_reward(result: &EpisodeResult, cfg: &RewardConfig) -> Result<RewardBreakdown, RewardError> {
    if result.success && result.rescue_time > result.t_f {
        return Err(RewardError::RescueAfterLimit { rescue_time: result.rescue_time, t_f: result.t_f });
    }
    let remaining = (result.t_f - result.rescue_time) / result.t_f;
    let progress = search_progress_term(&result.progress);
    let (tau, total) = match cfg.literal {
        None if result.success => (remaining, remaining * result.survival_rate.powf(cfg.c_s)),
        None => (remaining, progress),
        Some(lit) => {
            let elapsed = result.rescue_time / result.t_f;
            let total = if result.success {
                elapsed * result.survival_rate.powf(cfg.c_s)
            } else {
                (1.0 - lit.scenario_count as f64) + progress
            };
            (elapsed, total)
        }
    };
    Ok(RewardBreakdown {
        success: result.success,
        tau,
        survival: result.survival_rate,
        progress,
        total,
    })
}

/// Arithmetic mean of per-scenario rewards.
pub fn mean_reward(rewards: &[f64]) -> Result<f64, RewardError> {
    if rewards.is_empty() {
        return Err(RewardError::NoScenarios);
    }
    Ok(rewards.iter().sum::<f64>() / rewards.len() as f64)
}

/// Fitness of a set of episode results: the mean scenario reward.
pub fn fitness(results: &[EpisodeResult], cfg: &RewardConfig) -> Result<f64, RewardError> {
    let rewards = results
        .iter()
        .map(|r| scenario_reward(r, cfg).map(|b| b.total))
        .collect::<Result<Vec<_>, _>>()?;
    mean_reward(&rewards)
}
