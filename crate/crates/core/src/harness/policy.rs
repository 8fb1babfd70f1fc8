use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_error, write_file, HarnessError};
use crate::a2c::PolicyParams;
use crate::encoding::EncodingMode;
use crate::neuroevo::{Genome, Network};
use crate::sim::{observation_width, Mission, Policy, RuntimeConfig};

/// Trained model inside a policy file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum StoredModel {
    Genome(Genome),
    Mlp(PolicyParams),
}

/// Policy checkpoint: the model plus the encoding it was trained under.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    pub encoding: EncodingMode,
    pub raw_slots: usize,
    /// Candidate buildings per scenario the model was trained with.
    pub goals: usize,
    /// Survivability coefficient used in training.
    pub c_s: f64,
    pub model: StoredModel,
}

impl PolicyFile {
    pub fn runtime(&self) -> RuntimeConfig {
        RuntimeConfig { encoding: self.encoding, raw_slots: self.raw_slots, ..RuntimeConfig::default() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("policy files serialize")
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        write_file(path, &(self.to_json() + "\n"))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        let file: PolicyFile = serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Ok(file)
    }
}

#[derive(Debug, Clone)]
enum Model {
    Genome(Network),
    Mlp(PolicyParams),
}

/// A checkpoint ready to act in episodes.
#[derive(Debug, Clone)]
pub struct LoadedPolicy {
    pub encoding: EncodingMode,
    pub raw_slots: usize,
    pub goals: usize,
    pub c_s: f64,
    model: Model,
}

impl LoadedPolicy {
    pub fn from_file(file: &PolicyFile) -> Result<Self, HarnessError> {
        let model = match &file.model {
            StoredModel::Genome(g) => {
                g.validate()?;
                Model::Genome(Network::compile(g)?)
            }
            StoredModel::Mlp(p) => Model::Mlp(p.clone()),
        };
        let loaded = LoadedPolicy { encoding: file.encoding, raw_slots: file.raw_slots, goals: file.goals, c_s: file.c_s, model };
        let expected = observation_width(file.goals, &loaded.runtime());
        if loaded.input_width() != expected {
            return Err(HarnessError::Invalid(format!(
                "policy reads {} inputs but `{}` encoding with {} goals needs {expected}",
                loaded.input_width(),
                file.encoding,
                file.goals
            )));
        }
        Ok(loaded)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_file(&PolicyFile::load(path)?)
    }

    pub fn runtime(&self) -> RuntimeConfig {
        RuntimeConfig { encoding: self.encoding, raw_slots: self.raw_slots, ..RuntimeConfig::default() }
    }

    pub fn input_width(&self) -> usize {
        match &self.model {
            Model::Genome(n) => n.input_width(),
            Model::Mlp(p) => p.obs_dim(),
        }
    }

    /// Every mission must have the candidate count the policy was trained on.
    pub fn check_missions<'a>(&self, missions: impl IntoIterator<Item = &'a Mission>) -> Result<(), HarnessError> {
        for m in missions {
            let goals = m.candidates().len();
            if goals != self.goals {
                return Err(HarnessError::Invalid(format!(
                    "policy was trained with {} candidate buildings; scenario seed {} has {goals}",
                    self.goals, m.seed
                )));
            }
        }
        Ok(())
    }
}

impl Policy for LoadedPolicy {
    fn output_width(&self) -> usize {
        match &self.model {
            Model::Genome(n) => n.output_width(),
            Model::Mlp(p) => Policy::output_width(p),
        }
    }

    fn act(&self, observation: &[f64]) -> Vec<f64> {
        match &self.model {
            Model::Genome(n) => n.act(observation),
            Model::Mlp(p) => p.act(observation),
        }
    }
}
