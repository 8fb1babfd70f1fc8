use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::eval::{run_eval, write_results, EvalMode, EvalRecord, EvalSetup};
use super::policy::{LoadedPolicy, PolicyFile, StoredModel};
use super::scenario::{load_scenario, load_scenario_dir, LoadedScenario};
use super::{io_error, with_workers, write_file, HarnessError};
use crate::a2c::{self, A2cConfig, PolicyParams, TrainingSetup};
use crate::encoding::{EncodingMode, ACTION_WIDTH};
use crate::neuroevo::{self, EvolutionConfig, Network};
use crate::reward::{fitness, RewardConfig};
use crate::sim::{observation_width, run_episode, Mission, RuntimeConfig, SimParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    TrainNeuro,
    TrainA2c,
    Eval,
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::TrainNeuro => "train-neuro",
            RunMode::TrainA2c => "train-a2c",
            RunMode::Eval => "eval",
        })
    }
}

fn default_encoding() -> EncodingMode {
    EncodingMode::Both
}

fn default_output() -> PathBuf {
    PathBuf::from("runs/latest")
}

fn default_raw_slots() -> usize {
    RuntimeConfig::default().raw_slots
}

/// Everything one run needs. Relative paths are taken from the spec file's
/// directory; `seed` overrides the trainer seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub mode: RunMode,
    #[serde(default = "default_encoding")]
    pub encoding: EncodingMode,
    #[serde(default)]
    pub c_s: f64,
    #[serde(default)]
    pub eval_mode: EvalMode,
    /// Scenario files or directories of scenario files.
    pub scenarios: Vec<PathBuf>,
    /// Scenarios for progress evaluation during A2C training; defaults to
    /// the training scenarios.
    #[serde(default)]
    pub eval_scenarios: Vec<PathBuf>,
    /// Checkpoint to evaluate (eval mode only).
    #[serde(default)]
    pub policy: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_raw_slots")]
    pub raw_slots: usize,
    #[serde(default)]
    pub neuro: EvolutionConfig,
    #[serde(default)]
    pub a2c: A2cConfig,
    #[serde(default)]
    pub sim: SimParams,
}

impl ExperimentSpec {
    pub fn new(mode: RunMode, scenarios: Vec<PathBuf>) -> Self {
        Self {
            mode,
            encoding: default_encoding(),
            c_s: 0.0,
            eval_mode: EvalMode::default(),
            scenarios,
            eval_scenarios: Vec::new(),
            policy: None,
            output_dir: default_output(),
            seed: 0,
            raw_slots: default_raw_slots(),
            neuro: EvolutionConfig::default(),
            a2c: A2cConfig::default(),
            sim: SimParams::default(),
        }
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, HarnessError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            HarnessError::Parse {
                path: path.to_path_buf(),
                line: inner.line(),
                column: inner.column(),
                message: format!("field `{field}`: {inner}"),
            }
        })
    }

    /// Read a spec file and resolve its paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        let spec = Self::parse(&text, path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        spec.resolved(base)
    }

    /// Absolute paths and trainer seeds filled in, then validated. The result
    /// is what the manifest records.
    pub fn resolved(mut self, base: &Path) -> Result<Self, HarnessError> {
        let abs = |p: &Path| -> Result<PathBuf, HarnessError> {
            let joined = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
            std::path::absolute(&joined).map_err(io_error(&joined))
        };
        self.scenarios = self.scenarios.iter().map(|p| abs(p)).collect::<Result<_, _>>()?;
        self.eval_scenarios = self.eval_scenarios.iter().map(|p| abs(p)).collect::<Result<_, _>>()?;
        self.policy = self.policy.as_deref().map(abs).transpose()?;
        self.output_dir = abs(&self.output_dir)?;
        self.neuro.seed = self.seed;
        self.a2c.seed = self.seed;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let invalid = |m: String| Err(HarnessError::Invalid(m));
        if !(self.c_s >= 0.0) || !self.c_s.is_finite() {
            return invalid(format!("c_s must be a non-negative number, got {}", self.c_s));
        }
        if self.scenarios.is_empty() {
            return invalid("scenarios: at least one scenario file or directory is required".into());
        }
        if self.raw_slots == 0 {
            return invalid("raw_slots must be positive".into());
        }
        match self.mode {
            RunMode::TrainNeuro => self.neuro.validate()?,
            RunMode::TrainA2c => self.a2c.validate()?,
            RunMode::Eval if self.policy.is_none() => return invalid("policy: eval mode needs a checkpoint".into()),
            RunMode::Eval => {}
        }
        Ok(())
    }

    pub fn runtime(&self) -> RuntimeConfig {
        RuntimeConfig { encoding: self.encoding, raw_slots: self.raw_slots, ..RuntimeConfig::default() }
    }

    pub fn reward(&self) -> RewardConfig {
        RewardConfig::new(self.c_s).expect("validated")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("specs serialize")
    }
}

/// Load scenario files and directories in the listed order.
pub fn load_scenarios(paths: &[PathBuf]) -> Result<Vec<LoadedScenario>, HarnessError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let dir = load_scenario_dir(p)?;
            if dir.is_empty() {
                return Err(HarnessError::Invalid(format!("no scenario files in {}", p.display())));
            }
            out.extend(dir);
        } else {
            out.push(load_scenario(p)?);
        }
    }
    Ok(out)
}

fn common_goals(scenarios: &[LoadedScenario]) -> Result<usize, HarnessError> {
    let goals = scenarios[0].mission.candidates().len();
    if let Some(s) = scenarios.iter().find(|s| s.mission.candidates().len() != goals) {
        return Err(HarnessError::Invalid(format!(
            "scenario {} has {} candidate buildings, {} has {goals}; one run needs a common count",
            s.id,
            s.mission.candidates().len(),
            scenarios[0].id
        )));
    }
    Ok(goals)
}

fn prepare_output(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(io_error(dir))
}

/// Files written by a training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policy: PolicyFile,
    pub best_fitness: f64,
    /// Per-generation history or per-update log, as written to disk.
    pub log: String,
    pub output_dir: PathBuf,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const POLICY_FILE: &str = "policy.json";
pub const HISTORY_FILE: &str = "history.csv";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const RESULTS_FILE: &str = "results.csv";

fn neuro_fitness(missions: &[Mission], net: &Network, params: &SimParams, runtime: RuntimeConfig, reward: &RewardConfig) -> f64 {
    let results: Vec<_> = missions
        .iter()
        .map(|m| run_episode(m, net, params, runtime).expect("missions and network widths are checked before training"))
        .collect();
    fitness(&results, reward).expect("validated reward inputs")
}

/// Train per a resolved spec and write policy, log and manifest.
pub fn run_training(spec: &ExperimentSpec) -> Result<TrainOutcome, HarnessError> {
    spec.validate()?;
    let scenarios = load_scenarios(&spec.scenarios)?;
    let goals = common_goals(&scenarios)?;
    let missions: Vec<Mission> = scenarios.iter().map(|s| s.mission.clone()).collect();
    let runtime = spec.runtime();
    let reward = spec.reward();
    let inputs = observation_width(goals, &runtime);
    prepare_output(&spec.output_dir)?;
    write_file(&spec.output_dir.join(MANIFEST_FILE), &(spec.to_json() + "\n"))?;

    let (model, best_fitness, log, log_file) = match spec.mode {
        RunMode::TrainNeuro => {
            let params = &spec.sim;
            let run = with_workers(|| {
                neuroevo::evolve(&spec.neuro, inputs, ACTION_WIDTH, |net: &Network| {
                    neuro_fitness(&missions, net, params, runtime, &reward)
                })
            })??;
            (StoredModel::Genome(run.best), run.best_fitness, neuroevo::history_csv(&run.history), HISTORY_FILE)
        }
        RunMode::TrainA2c => {
            let eval_missions: Vec<Mission> = if spec.eval_scenarios.is_empty() {
                missions.clone()
            } else {
                let eval = load_scenarios(&spec.eval_scenarios)?;
                if common_goals(&eval)? != goals {
                    return Err(HarnessError::Invalid("eval scenarios need the training candidate count".into()));
                }
                eval.into_iter().map(|s| s.mission).collect()
            };
            let setup = TrainingSetup { missions: &missions, eval_missions: &eval_missions, params: &spec.sim, runtime, reward };
            let training = with_workers(|| a2c::train(&spec.a2c, &setup))??;
            let best: PolicyParams = training.best;
            (StoredModel::Mlp(best), training.best_eval, a2c::log_csv(&training.log), TRAIN_LOG_FILE)
        }
        RunMode::Eval => return Err(HarnessError::Invalid("run_training needs a training mode".into())),
    };
    let policy = PolicyFile { encoding: spec.encoding, raw_slots: spec.raw_slots, goals, c_s: spec.c_s, model };
    write_file(&spec.output_dir.join(log_file), &log)?;
    policy.save(&spec.output_dir.join(POLICY_FILE))?;
    Ok(TrainOutcome { policy, best_fitness, log, output_dir: spec.output_dir.clone() })
}

/// Evaluate the spec's checkpoint and write the results CSV and manifest.
///
/// The checkpoint fixes the encoding and observation layout; the spec's
/// own encoding fields are overwritten to match before the manifest is
/// written.
pub fn run_eval_spec(spec: &ExperimentSpec) -> Result<Vec<EvalRecord>, HarnessError> {
    spec.validate()?;
    let policy_path = spec.policy.as_ref().expect("validated");
    let policy = LoadedPolicy::load(policy_path)?;
    let scenarios = load_scenarios(&spec.scenarios)?;
    policy.check_missions(scenarios.iter().map(|s| &s.mission))?;
    let mut manifest = spec.clone();
    manifest.encoding = policy.encoding;
    manifest.raw_slots = policy.raw_slots;
    let setup = EvalSetup { params: &spec.sim, runtime: policy.runtime(), reward: manifest.reward(), mode: spec.eval_mode };
    let records = with_workers(|| run_eval(&scenarios, &policy, &setup))??;
    prepare_output(&spec.output_dir)?;
    write_file(&spec.output_dir.join(MANIFEST_FILE), &(manifest.to_json() + "\n"))?;
    let rows: Vec<_> = records.iter().map(|r| r.row.clone()).collect();
    write_results(&spec.output_dir.join(RESULTS_FILE), &rows)?;
    Ok(records)
}

/// Dispatch on the spec's mode.
pub fn run_spec(spec: &ExperimentSpec) -> Result<(), HarnessError> {
    match spec.mode {
        RunMode::Eval => run_eval_spec(spec).map(|_| ()),
        _ => run_training(spec).map(|_| ()),
    }
}
