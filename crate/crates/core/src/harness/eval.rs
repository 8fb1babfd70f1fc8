use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::LoadedScenario;
use super::HarnessError;
use crate::encoding::EncodingMode;
use crate::fleet::TypeCounts;
use crate::reward::{scenario_reward, RewardConfig};
use crate::sim::{run_episode, Policy, RuntimeConfig, SimParams};

/// How consecutive evaluation scenarios relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Each scenario starts from its configured robot counts.
    #[default]
    Independent,
    /// Each scenario starts from the survivors of the previous one.
    Continuation,
}

impl EvalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalMode::Independent => "independent",
            EvalMode::Continuation => "continuation",
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EvalMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "independent" => Ok(EvalMode::Independent),
            "continuation" => Ok(EvalMode::Continuation),
            other => Err(format!("unknown eval mode `{other}` (expected independent or continuation)")),
        }
    }
}

pub const RESULTS_HEADER: &str = "scenario_id,seed,success,rescue_time_s,survival_rate,reward,encoding,C_S";

/// One line of a results CSV. Failed missions record the time limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub scenario_id: String,
    pub seed: u64,
    pub success: bool,
    pub rescue_time_s: f64,
    pub survival_rate: f64,
    pub reward: f64,
    pub encoding: EncodingMode,
    #[serde(rename = "C_S")]
    pub c_s: f64,
}

/// A results row together with the fleet sizes it started and ended with.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub row: EvalRow,
    pub initial: TypeCounts,
    pub survivors: TypeCounts,
}

/// Evaluation settings shared by every scenario.
#[derive(Debug, Clone, Copy)]
pub struct EvalSetup<'a> {
    pub params: &'a SimParams,
    pub runtime: RuntimeConfig,
    pub reward: RewardConfig,
    pub mode: EvalMode,
}

fn run_one(
    scenario: &LoadedScenario,
    robots: TypeCounts,
    policy: &dyn Policy,
    setup: &EvalSetup,
) -> Result<EvalRecord, HarnessError> {
    let mut mission = scenario.mission.clone();
    mission.robots = robots;
    let result = run_episode(&mission, policy, setup.params, setup.runtime)?;
    let reward = scenario_reward(&result, &setup.reward)?;
    Ok(EvalRecord {
        row: EvalRow {
            scenario_id: scenario.id.clone(),
            seed: mission.seed,
            success: result.success,
            rescue_time_s: result.rescue_time,
            survival_rate: result.survival_rate,
            reward: reward.total,
            encoding: setup.runtime.encoding,
            c_s: setup.reward.c_s,
        },
        initial: result.initial,
        survivors: result.survivors,
    })
}

/// Evaluate `policy` on every scenario, in order.
///
/// Independent scenarios run concurrently. In continuation mode the fleet of
/// scenario `i + 1` is the per-type minimum of its configured counts and the
/// survivors of scenario `i`.
pub fn run_eval(scenarios: &[LoadedScenario], policy: &dyn Policy, setup: &EvalSetup) -> Result<Vec<EvalRecord>, HarnessError> {
    match setup.mode {
        EvalMode::Independent => scenarios
            .par_iter()
            .map(|s| run_one(s, s.mission.robots, policy, setup))
            .collect(),
        EvalMode::Continuation => {
            let mut records: Vec<EvalRecord> = Vec::with_capacity(scenarios.len());
            for s in scenarios {
                let robots = match records.last() {
                    Some(prev) => s.mission.robots.min(&prev.survivors),
                    None => s.mission.robots,
                };
                records.push(run_one(s, robots, policy, setup)?);
            }
            Ok(records)
        }
    }
}

pub fn results_csv(rows: &[EvalRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("results rows serialize");
    }
    if rows.is_empty() {
        return format!("{RESULTS_HEADER}\n");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

pub fn write_results(path: &Path, rows: &[EvalRow]) -> Result<(), HarnessError> {
    super::write_file(path, &results_csv(rows))
}

pub fn read_results(path: &Path) -> Result<Vec<EvalRow>, HarnessError> {
    let csv_err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

/// Whether `path` is a CSV whose header matches the results schema.
pub fn is_results_file(path: &Path) -> bool {
    if path.extension().is_none_or(|x| x != "csv") {
        return false;
    }
    match std::fs::read_to_string(path) {
        Ok(text) => text.lines().next().is_some_and(|h| h.trim_end() == RESULTS_HEADER),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, success: bool) -> EvalRow {
        EvalRow {
            scenario_id: id.into(),
            seed: 7,
            success,
            rescue_time_s: 1200.5,
            survival_rate: 0.75,
            reward: 0.5,
            encoding: EncodingMode::Both,
            c_s: 1.0,
        }
    }

    #[test]
    fn csv_header_matches_schema() {
        let text = results_csv(&[row("a", true)]);
        assert_eq!(text.lines().next(), Some(RESULTS_HEADER));
        assert_eq!(text.lines().nth(1), Some("a,7,true,1200.5,0.75,0.5,both,1.0"));
        assert_eq!(results_csv(&[]), format!("{RESULTS_HEADER}\n"));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let rows = vec![row("a", true), row("b", false)];
        write_results(&path, &rows).unwrap();
        assert!(is_results_file(&path));
        assert_eq!(read_results(&path).unwrap(), rows);
    }

    #[test]
    fn eval_mode_parses() {
        assert_eq!("continuation".parse::<EvalMode>(), Ok(EvalMode::Continuation));
        assert!("sequential".parse::<EvalMode>().is_err());
    }
}
