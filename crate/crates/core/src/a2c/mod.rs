//! Fixed-topology advantage actor-critic baseline: a 64-64 tanh perceptron
//! with analytic gradients, n-step returns, clipped RMSprop updates and a
//! training loop over mission episodes.

mod mlp;
mod train;

pub use mlp::{clip_grad_norm, Activations, LossBreakdown, PolicyParams, RmsProp, Sample, LOG_STD_MAX, LOG_STD_MIN, TENSOR_NAMES};
pub use train::{
    a2c_update, evaluate, log_csv, n_step_returns, train, train_with, A2cConfig, LogRow, Training, TrainingSetup, LOG_HEADER,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reward::RewardError;
use crate::sim::SimError;

#[derive(Debug, Error)]
pub enum A2cError {
    #[error("policy expects {expected} observation values, got {found}")]
    ObservationWidth { expected: usize, found: usize },
    #[error("policy expects {expected} action values, got {found}")]
    ActionWidth { expected: usize, found: usize },
    #[error("non-finite loss or gradient: {0}")]
    NonFinite(String),
    #[error("a2c config: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Reward(#[from] RewardError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TensorRecord {
    name: String,
    shape: [usize; 2],
    values: Vec<f64>,
}

/// On-disk form of [`PolicyParams`]: every tensor with its name and shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    observation_width: usize,
    action_width: usize,
    hidden: [usize; 2],
    tensors: Vec<TensorRecord>,
}

impl From<PolicyParams> for Checkpoint {
    fn from(p: PolicyParams) -> Self {
        Checkpoint {
            observation_width: p.obs_dim(),
            action_width: p.act_dim(),
            hidden: p.hidden(),
            tensors: p
                .tensors()
                .into_iter()
                .map(|(name, shape, values)| TensorRecord { name: name.into(), shape, values: values.to_vec() })
                .collect(),
        }
    }
}

impl TryFrom<Checkpoint> for PolicyParams {
    type Error = A2cError;

    fn try_from(ck: Checkpoint) -> Result<Self, A2cError> {
        let mut p = PolicyParams::zeros(ck.observation_width, ck.action_width, ck.hidden);
        let expected = p.tensors().into_iter().map(|(n, s, _)| (n, s)).collect::<Vec<_>>();
        if ck.tensors.len() != expected.len() {
            return Err(A2cError::Checkpoint(format!("expected {} tensors, found {}", expected.len(), ck.tensors.len())));
        }
        let ranges = p.tensor_ranges();
        for ((t, (name, shape)), (_, range)) in ck.tensors.iter().zip(expected).zip(ranges) {
            if t.name != name || t.shape != shape || t.values.len() != shape[0] * shape[1] {
                return Err(A2cError::Checkpoint(format!(
                    "tensor `{}` {:?} with {} values, expected `{name}` {shape:?}",
                    t.name,
                    t.shape,
                    t.values.len()
                )));
            }
            if t.values.iter().any(|v| !v.is_finite()) {
                return Err(A2cError::Checkpoint(format!("tensor `{name}` has non-finite values")));
            }
            p.data[range].copy_from_slice(&t.values);
        }
        p.clamp_log_std();
        Ok(p)
    }
}

impl PolicyParams {
    pub fn to_json(&self) -> Result<String, A2cError> {
        Ok(serde_json::to_string(&Checkpoint::from(self.clone()))?)
    }

    pub fn from_json(text: &str) -> Result<Self, A2cError> {
        serde_json::from_str::<Checkpoint>(text)?.try_into()
    }
}
