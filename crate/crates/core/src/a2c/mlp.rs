use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::A2cError;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

/// Location of one tensor inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Span {
    offset: usize,
    rows: usize,
    cols: usize,
}

impl Span {
    fn len(&self) -> usize {
        self.rows * self.cols
    }
    fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    w1: Span,
    b1: Span,
    w2: Span,
    b2: Span,
    wm: Span,
    bm: Span,
    wv: Span,
    bv: Span,
    log_std: Span,
    total: usize,
}

pub const TENSOR_NAMES: [&str; 9] = [
    "trunk1.weight",
    "trunk1.bias",
    "trunk2.weight",
    "trunk2.bias",
    "mean.weight",
    "mean.bias",
    "value.weight",
    "value.bias",
    "log_std",
];

impl Layout {
    fn new(obs: usize, act: usize, h1: usize, h2: usize) -> Self {
        let mut offset = 0;
        let mut span = |rows, cols| {
            let s = Span { offset, rows, cols };
            offset += rows * cols;
            s
        };
        let w1 = span(h1, obs);
        let b1 = span(h1, 1);
        let w2 = span(h2, h1);
        let b2 = span(h2, 1);
        let wm = span(act, h2);
        let bm = span(act, 1);
        let wv = span(1, h2);
        let bv = span(1, 1);
        let log_std = span(act, 1);
        Self { w1, b1, w2, b2, wm, bm, wv, bv, log_std, total: offset }
    }

    fn spans(&self) -> [Span; 9] {
        [self.w1, self.b1, self.w2, self.b2, self.wm, self.bm, self.wv, self.bv, self.log_std]
    }
}

/// Two tanh hidden layers feeding a tanh action-mean head and a linear value
/// head, plus a state-independent log standard deviation per action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "super::Checkpoint", into = "super::Checkpoint")]
pub struct PolicyParams {
    obs_dim: usize,
    act_dim: usize,
    hidden: [usize; 2],
    layout: Layout,
    pub data: Vec<f64>,
}

/// Forward-pass activations kept for backpropagation.
#[derive(Debug, Clone)]
pub struct Activations {
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub mean: Vec<f64>,
    pub value: f64,
}

/// One training sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub observation: Vec<f64>,
    pub action: Vec<f64>,
    pub advantage: f64,
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    pub total: f64,
}

const LN_2PI: f64 = 1.837_877_066_409_345_3;

fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        *o = b[r] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

impl PolicyParams {
    pub fn zeros(obs_dim: usize, act_dim: usize, hidden: [usize; 2]) -> Self {
        let layout = Layout::new(obs_dim, act_dim, hidden[0], hidden[1]);
        Self { obs_dim, act_dim, hidden, layout, data: vec![0.0; layout.total] }
    }

    /// Weights ~ N(0, gain^2 / fan_in) with a small gain on the action head
    /// so initial means sit near zero. Biases and log-std start at zero.
    pub fn init<R: Rng + ?Sized>(obs_dim: usize, act_dim: usize, hidden: [usize; 2], rng: &mut R) -> Self {
        let mut p = Self::zeros(obs_dim, act_dim, hidden);
        let l = p.layout;
        for (span, gain) in [(l.w1, 1.0), (l.w2, 1.0), (l.wm, 0.01), (l.wv, 1.0)] {
            let normal = Normal::new(0.0, gain / (span.cols as f64).sqrt()).expect("positive std");
            for w in &mut p.data[span.range()] {
                *w = normal.sample(rng);
            }
        }
        p
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    pub fn hidden(&self) -> [usize; 2] {
        self.hidden
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `(name, [rows, cols], values)` for each tensor.
    pub fn tensors(&self) -> Vec<(&'static str, [usize; 2], &[f64])> {
        TENSOR_NAMES
            .iter()
            .zip(self.layout.spans())
            .map(|(&n, s)| (n, [s.rows, s.cols], &self.data[s.range()]))
            .collect()
    }

    /// Clamped log standard deviations.
    pub fn log_std(&self) -> Vec<f64> {
        self.data[self.layout.log_std.range()]
            .iter()
            .map(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX))
            .collect()
    }

    pub fn clamp_log_std(&mut self) {
        for v in &mut self.data[self.layout.log_std.range()] {
            *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }

    pub fn activations(&self, observation: &[f64]) -> Result<Activations, A2cError> {
        if observation.len() != self.obs_dim {
            return Err(A2cError::ObservationWidth { expected: self.obs_dim, found: observation.len() });
        }
        let l = &self.layout;
        let d = &self.data;
        let mut h1 = vec![0.0; self.hidden[0]];
        affine(&d[l.w1.range()], &d[l.b1.range()], observation, &mut h1);
        h1.iter_mut().for_each(|v| *v = v.tanh());
        let mut h2 = vec![0.0; self.hidden[1]];
        affine(&d[l.w2.range()], &d[l.b2.range()], &h1, &mut h2);
        h2.iter_mut().for_each(|v| *v = v.tanh());
        let mut mean = vec![0.0; self.act_dim];
        affine(&d[l.wm.range()], &d[l.bm.range()], &h2, &mut mean);
        mean.iter_mut().for_each(|v| *v = v.tanh());
        let mut value = [0.0];
        affine(&d[l.wv.range()], &d[l.bv.range()], &h2, &mut value);
        Ok(Activations { h1, h2, mean, value: value[0] })
    }

    /// `(action mean, log-std, value)`.
    pub fn forward(&self, observation: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64), A2cError> {
        let a = self.activations(observation)?;
        Ok((a.mean, self.log_std(), a.value))
    }

    /// Mean over the batch of
    /// `-advantage * log pi(a|s) + value_coef * (V(s) - target)^2 - entropy_coef * H`,
    /// with its gradient.
    pub fn loss_and_gradient(
        &self,
        batch: &[Sample],
        value_coef: f64,
        entropy_coef: f64,
    ) -> Result<(LossBreakdown, Vec<f64>), A2cError> {
        let l = self.layout;
        let mut grad = vec![0.0; self.data.len()];
        if batch.is_empty() {
            return Ok((LossBreakdown { policy: 0.0, value: 0.0, entropy: 0.0, total: 0.0 }, grad));
        }
        let n = batch.len() as f64;
        let raw_log_std = &self.data[l.log_std.range()];
        let log_std = self.log_std();
        let inv_var: Vec<f64> = log_std.iter().map(|s| (-2.0 * s).exp()).collect();
        let entropy: f64 = log_std.iter().map(|s| s + 0.5 * (LN_2PI + 1.0)).sum();
        let (mut policy_loss, mut value_loss) = (0.0, 0.0);

        for s in batch {
            if s.action.len() != self.act_dim {
                return Err(A2cError::ActionWidth { expected: self.act_dim, found: s.action.len() });
            }
            let act = self.activations(&s.observation)?;
            let mut log_prob = 0.0;
            let mut d_mean_pre = vec![0.0; self.act_dim];
            for k in 0..self.act_dim {
                let diff = s.action[k] - act.mean[k];
                let z2 = diff * diff * inv_var[k];
                log_prob += -0.5 * z2 - log_std[k] - 0.5 * LN_2PI;
                let d_mean = -s.advantage * diff * inv_var[k] / n;
                d_mean_pre[k] = d_mean * (1.0 - act.mean[k] * act.mean[k]);
                if (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw_log_std[k]) {
                    grad[l.log_std.offset + k] += -s.advantage * (z2 - 1.0) / n;
                }
            }
            policy_loss += -s.advantage * log_prob / n;
            let verr = act.value - s.target;
            value_loss += verr * verr / n;
            let d_value = 2.0 * value_coef * verr / n;

            let mut d_h2 = vec![0.0; self.hidden[1]];
            for k in 0..self.act_dim {
                grad[l.bm.offset + k] += d_mean_pre[k];
                let row = l.wm.offset + k * self.hidden[1];
                for j in 0..self.hidden[1] {
                    grad[row + j] += d_mean_pre[k] * act.h2[j];
                    d_h2[j] += self.data[row + j] * d_mean_pre[k];
                }
            }
            grad[l.bv.offset] += d_value;
            for j in 0..self.hidden[1] {
                grad[l.wv.offset + j] += d_value * act.h2[j];
                d_h2[j] += self.data[l.wv.offset + j] * d_value;
            }
            let mut d_h1 = vec![0.0; self.hidden[0]];
            for j in 0..self.hidden[1] {
                let dz = d_h2[j] * (1.0 - act.h2[j] * act.h2[j]);
                grad[l.b2.offset + j] += dz;
                let row = l.w2.offset + j * self.hidden[0];
                for i in 0..self.hidden[0] {
                    grad[row + i] += dz * act.h1[i];
                    d_h1[i] += self.data[row + i] * dz;
                }
            }
            for i in 0..self.hidden[0] {
                let dz = d_h1[i] * (1.0 - act.h1[i] * act.h1[i]);
                grad[l.b1.offset + i] += dz;
                let row = l.w1.offset + i * self.obs_dim;
                for (g, x) in grad[row..row + self.obs_dim].iter_mut().zip(&s.observation) {
                    *g += dz * x;
                }
            }
        }
        if entropy_coef != 0.0 {
            for k in 0..self.act_dim {
                if (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw_log_std[k]) {
                    grad[l.log_std.offset + k] -= entropy_coef;
                }
            }
        }
        let total = policy_loss + value_coef * value_loss - entropy_coef * entropy;
        if !total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(A2cError::NonFinite(format!(
                "policy loss {policy_loss}, value loss {value_loss}, batch of {}",
                batch.len()
            )));
        }
        Ok((LossBreakdown { policy: policy_loss, value: value_loss, entropy, total }, grad))
    }

    /// Span of the action-mean head (weights then bias) in the flat vector.
    pub fn mean_head_range(&self) -> std::ops::Range<usize> {
        self.layout.wm.offset..self.layout.bm.offset + self.layout.bm.len()
    }

    /// Named flat ranges, one per tensor.
    pub fn tensor_ranges(&self) -> Vec<(&'static str, std::ops::Range<usize>)> {
        TENSOR_NAMES.iter().zip(self.layout.spans()).map(|(&n, s)| (n, s.range())).collect()
    }
}

/// Scale `grad` in place so its L2 norm is at most `max_norm`; returns the
/// norm before clipping.
pub fn clip_grad_norm(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= scale);
    }
    norm
}

/// RMSprop with a running mean of squared gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsProp {
    pub lr: f64,
    pub decay: f64,
    pub eps: f64,
    square_avg: Vec<f64>,
}

impl RmsProp {
    pub fn new(size: usize, lr: f64, decay: f64, eps: f64) -> Self {
        Self { lr, decay, eps, square_avg: vec![0.0; size] }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        for ((p, g), v) in params.iter_mut().zip(grad).zip(&mut self.square_avg) {
            *v = self.decay * *v + (1.0 - self.decay) * g * g;
            *p -= self.lr * g / (v.sqrt() + self.eps);
        }
    }
}
