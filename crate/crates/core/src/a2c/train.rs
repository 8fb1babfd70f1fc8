use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mlp::{clip_grad_norm, LossBreakdown, PolicyParams, RmsProp, Sample};
use super::A2cError;
use crate::encoding::ACTION_WIDTH;
use crate::reward::{scenario_reward, RewardConfig};
use crate::sim::{observation_width, run_episode, Episode, Mission, Policy, RuntimeConfig, SimParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct A2cConfig {
    /// Training budget in tactical decisions.
    pub max_timesteps: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub n_steps: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    pub rms_decay: f64,
    pub rms_eps: f64,
    pub hidden: [usize; 2],
    /// Updates between evaluations of the mean-action policy.
    pub eval_interval: usize,
    pub seed: u64,
}

impl Default for A2cConfig {
    fn default() -> Self {
        Self {
            max_timesteps: 300_000,
            learning_rate: 7e-4,
            gamma: 0.99,
            n_steps: 5,
            entropy_coef: 0.0,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            rms_decay: 0.99,
            rms_eps: 1e-5,
            hidden: [64, 64],
            eval_interval: 100,
            seed: 0,
        }
    }
}

impl A2cConfig {
    pub fn validate(&self) -> Result<(), A2cError> {
        let bad = |f: &str| Err(A2cError::Config(format!("{f} must be positive")));
        if self.max_timesteps == 0 {
            return bad("max_timesteps");
        }
        if self.n_steps == 0 {
            return bad("n_steps");
        }
        if self.eval_interval == 0 {
            return bad("eval_interval");
        }
        for (f, v) in [
            ("learning_rate", self.learning_rate),
            ("gamma", self.gamma),
            ("value_coef", self.value_coef),
            ("max_grad_norm", self.max_grad_norm),
            ("rms_eps", self.rms_eps),
        ] {
            if !(v > 0.0) {
                return bad(f);
            }
        }
        if !(0.0..1.0).contains(&self.rms_decay) || self.gamma > 1.0 || self.entropy_coef < 0.0 {
            return Err(A2cError::Config("rms_decay in [0,1), gamma <= 1, entropy_coef >= 0".into()));
        }
        if self.hidden.contains(&0) {
            return bad("hidden");
        }
        Ok(())
    }
}

/// Bootstrapped discounted returns over one rollout, cut at terminal steps,
/// and advantages `return - value`.
pub fn n_step_returns(rewards: &[f64], values: &[f64], terminal: &[bool], bootstrap: f64, gamma: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(rewards.len() == values.len() && rewards.len() == terminal.len());
    let mut returns = vec![0.0; rewards.len()];
    let mut running = bootstrap;
    for t in (0..rewards.len()).rev() {
        if terminal[t] {
            running = 0.0;
        }
        running = rewards[t] + gamma * running;
        returns[t] = running;
    }
    let advantages = returns.iter().zip(values).map(|(r, v)| r - v).collect();
    (advantages, returns)
}

/// One gradient step on `batch`; returns the loss and pre-clip gradient norm.
pub fn a2c_update(
    params: &mut PolicyParams,
    optimizer: &mut RmsProp,
    batch: &[Sample],
    cfg: &A2cConfig,
) -> Result<(LossBreakdown, f64), A2cError> {
    let (loss, mut grad) = params.loss_and_gradient(batch, cfg.value_coef, cfg.entropy_coef)?;
    let norm = clip_grad_norm(&mut grad, cfg.max_grad_norm);
    optimizer.step(&mut params.data, &grad);
    params.clamp_log_std();
    Ok((loss, norm))
}

impl Policy for PolicyParams {
    fn output_width(&self) -> usize {
        self.act_dim()
    }

    /// Mean action. Panics only if the observation width disagrees.
    fn act(&self, observation: &[f64]) -> Vec<f64> {
        self.activations(observation).expect("observation width matches policy").mean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub timestep: usize,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub grad_norm: f64,
    pub eval_reward: Option<f64>,
}

pub const LOG_HEADER: &str = "timestep,policy_loss,value_loss,grad_norm,eval_reward";

pub fn log_csv(rows: &[LogRow]) -> String {
    let mut out = String::from(LOG_HEADER);
    out.push('\n');
    for r in rows {
        let eval = r.eval_reward.map(|e| e.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{}\n", r.timestep, r.policy_loss, r.value_loss, r.grad_norm, eval));
    }
    out
}

#[derive(Debug, Clone)]
pub struct Training {
    /// Parameters with the best evaluation reward seen.
    pub best: PolicyParams,
    pub best_eval: f64,
    pub initial_eval: f64,
    pub last: PolicyParams,
    pub log: Vec<LogRow>,
}

/// Everything an A2C run needs besides its own hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct TrainingSetup<'a> {
    pub missions: &'a [Mission],
    pub eval_missions: &'a [Mission],
    pub params: &'a SimParams,
    pub runtime: RuntimeConfig,
    pub reward: RewardConfig,
}

/// Mean reward of the mean-action policy over `missions`, in mission order.
pub fn evaluate(policy: &PolicyParams, setup: &TrainingSetup) -> Result<f64, A2cError> {
    let rewards: Vec<f64> = setup
        .eval_missions
        .par_iter()
        .map(|m| -> Result<f64, A2cError> {
            let result = run_episode(m, policy, setup.params, setup.runtime)?;
            Ok(scenario_reward(&result, &setup.reward)?.total)
        })
        .collect::<Result<_, _>>()?;
    if rewards.is_empty() {
        return Err(A2cError::Config("no evaluation scenarios".into()));
    }
    Ok(rewards.iter().sum::<f64>() / rewards.len() as f64)
}

/// Cycles through the training missions, skipping any that end before their
/// first decision.
struct Rollouts<'a> {
    setup: &'a TrainingSetup<'a>,
    next: usize,
    episode: Episode<'a>,
}

impl<'a> Rollouts<'a> {
    fn new(setup: &'a TrainingSetup<'a>) -> Result<Self, A2cError> {
        let mut r = Self { setup, next: 0, episode: Episode::new(&setup.missions[0], setup.params, setup.runtime)? };
        r.next = 1 % setup.missions.len();
        r.skip_finished()?;
        Ok(r)
    }

    fn skip_finished(&mut self) -> Result<(), A2cError> {
        for _ in 0..=self.setup.missions.len() {
            if !self.episode.is_done() {
                return Ok(());
            }
            self.advance()?;
        }
        Err(A2cError::Config("every training scenario ends before its first decision".into()))
    }

    fn advance(&mut self) -> Result<(), A2cError> {
        let m = &self.setup.missions[self.next];
        self.next = (self.next + 1) % self.setup.missions.len();
        self.episode = Episode::new(m, self.setup.params, self.setup.runtime)?;
        Ok(())
    }

    fn observation(&self) -> Vec<f64> {
        self.episode.observation().expect("live episode").to_vec()
    }

    /// Apply an action; returns `(reward, terminal)`.
    fn step(&mut self, action: &[f64]) -> Result<(f64, bool), A2cError> {
        self.episode.apply(action)?;
        if !self.episode.is_done() {
            return Ok((0.0, false));
        }
        let result = self.episode.result().expect("finished episode has a result");
        let reward = scenario_reward(result, &self.setup.reward)?.total;
        self.advance()?;
        self.skip_finished()?;
        Ok((reward, true))
    }
}

/// Synchronous advantage actor-critic with a Gaussian policy. One timestep is
/// one tactical decision; the only reward is the end-of-mission score.
pub fn train(cfg: &A2cConfig, setup: &TrainingSetup) -> Result<Training, A2cError> {
    train_with(cfg, setup, |_| {})
}

/// As [`train`], calling `observer` after each logged update.
pub fn train_with<O: FnMut(&LogRow)>(cfg: &A2cConfig, setup: &TrainingSetup, mut observer: O) -> Result<Training, A2cError> {
    cfg.validate()?;
    if setup.missions.is_empty() {
        return Err(A2cError::Config("no training scenarios".into()));
    }
    let goals = setup.missions[0].candidates().len();
    let obs_dim = observation_width(goals, &setup.runtime);
    if let Some(m) = setup.missions.iter().chain(setup.eval_missions).find(|m| m.candidates().len() != goals) {
        return Err(A2cError::Config(format!(
            "all scenarios need {goals} candidate buildings; seed {} has {}",
            m.seed,
            m.candidates().len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = PolicyParams::init(obs_dim, ACTION_WIDTH, cfg.hidden, &mut rng);
    let mut optimizer = RmsProp::new(params.len(), cfg.learning_rate, cfg.rms_decay, cfg.rms_eps);
    let initial_eval = evaluate(&params, setup)?;
    let mut best = (params.clone(), initial_eval);
    let mut log = Vec::new();
    let mut rollouts = Rollouts::new(setup)?;
    let mut timestep = 0;
    let mut updates = 0;

    while timestep < cfg.max_timesteps {
        let (mut obs, mut actions, mut rewards, mut values, mut terminal) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for _ in 0..cfg.n_steps {
            let o = rollouts.observation();
            let act = params.activations(&o)?;
            let action: Vec<f64> = act
                .mean
                .iter()
                .zip(params.log_std())
                .map(|(m, s)| m + s.exp() * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let (r, done) = rollouts.step(&action)?;
            obs.push(o);
            actions.push(action);
            rewards.push(r);
            values.push(act.value);
            terminal.push(done);
            timestep += 1;
            if timestep >= cfg.max_timesteps {
                break;
            }
        }
        let bootstrap = if *terminal.last().expect("at least one step") {
            0.0
        } else {
            params.activations(&rollouts.observation())?.value
        };
        let (advantages, targets) = n_step_returns(&rewards, &values, &terminal, bootstrap, cfg.gamma);
        let batch: Vec<Sample> = obs
            .into_iter()
            .zip(actions)
            .zip(advantages.iter().zip(&targets))
            .map(|((observation, action), (&advantage, &target))| Sample { observation, action, advantage, target })
            .collect();
        let (loss, grad_norm) = a2c_update(&mut params, &mut optimizer, &batch, cfg)?;
        updates += 1;
        let eval_reward = if updates % cfg.eval_interval == 0 || timestep >= cfg.max_timesteps {
            let e = evaluate(&params, setup)?;
            if e > best.1 {
                best = (params.clone(), e);
            }
            Some(e)
        } else {
            None
        };
        let row = LogRow { timestep, policy_loss: loss.policy, value_loss: loss.value, grad_norm, eval_reward };
        observer(&row);
        log.push(row);
    }
    Ok(Training { best: best.0, best_eval: best.1, initial_eval, last: params, log })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rollout_has_zero_advantage() {
        let (adv, ret) = n_step_returns(&[0.0; 5], &[0.0; 5], &[false; 5], 0.0, 0.99);
        assert_eq!(adv, vec![0.0; 5]);
        assert_eq!(ret, vec![0.0; 5]);
    }

    #[test]
    fn single_step_advantage() {
        let (adv, _) = n_step_returns(&[1.0], &[0.3], &[false], 0.0, 0.99);
        assert!((adv[0] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn terminal_blocks_bootstrap() {
        // r = [0, 1, 0], terminal after step 1, bootstrap 10:
        // R2 = 0 + 0.5 * 10 = 5, R1 = 1 (cut), R0 = 0 + 0.5 * 1 = 0.5.
        let (_, ret) = n_step_returns(&[0.0, 1.0, 0.0], &[0.0; 3], &[false, true, false], 10.0, 0.5);
        assert_eq!(ret, vec![0.5, 1.0, 5.0]);
    }

    #[test]
    fn table_defaults() {
        let c = A2cConfig::default();
        assert_eq!(
            (c.max_timesteps, c.learning_rate, c.gamma, c.n_steps, c.entropy_coef, c.value_coef, c.max_grad_norm),
            (300_000, 7e-4, 0.99, 5, 0.0, 0.5, 0.5)
        );
        c.validate().unwrap();
    }

    #[test]
    fn log_csv_leaves_missing_evals_blank() {
        let rows = [LogRow { timestep: 5, policy_loss: 0.1, value_loss: 0.2, grad_norm: 0.3, eval_reward: None }];
        assert_eq!(log_csv(&rows), "timestep,policy_loss,value_loss,grad_norm,eval_reward\n5,0.1,0.2,0.3,\n");
    }
}
