use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{
    cluster_robots, decode_action, decode_action_raw, encode_state, encode_state_raw, pareto_nodes, raw_input_width,
    MissionView, ObservationLayout, ParetoNodes, RobotView, ACTION_WIDTH,
};
use crate::fleet::TypeCounts;
use crate::geometry::Point;
use crate::topo_map::{NodeId, TopoGraph};

use super::params::{RuntimeConfig, SimParams};
use super::trace::Trace;
use super::world::{
    allocate_tasks, engagement_tick, move_agents, observe, plan_paths, search_tick, static_kill, Mission, World,
};
use super::SimError;

/// Maps an observation to a raw action vector in `[-1, 1]`.
pub trait Policy: Sync {
    fn output_width(&self) -> usize;
    fn act(&self, observation: &[f64]) -> Vec<f64>;
}

/// The same action at every decision.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantPolicy(pub Vec<f64>);

impl Policy for ConstantPolicy {
    fn output_width(&self) -> usize {
        self.0.len()
    }

    fn act(&self, _observation: &[f64]) -> Vec<f64> {
        self.0.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub success: bool,
    /// Time of the rescue, or the time limit on failure, s.
    pub rescue_time: f64,
    pub t_f: f64,
    pub survival_rate: f64,
    pub initial: TypeCounts,
    pub survivors: TypeCounts,
    /// `(psi_in, psi_out)` per candidate building.
    pub progress: Vec<(f64, f64)>,
    pub decisions: usize,
    pub trace_hash: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
}

/// Observation width for a mission with `goals` candidate buildings.
pub fn observation_width(goals: usize, runtime: &RuntimeConfig) -> usize {
    if runtime.encoding.structured_input() {
        ObservationLayout::structured(goals).width()
    } else {
        raw_input_width(goals, runtime.raw_slots)
    }
}

/// A mission in progress, advanced one tactical decision at a time.
pub struct Episode<'a> {
    mission: &'a Mission,
    params: &'a SimParams,
    runtime: RuntimeConfig,
    world: World,
    rng: ChaCha8Rng,
    scratch: TopoGraph,
    goal_positions: Vec<Point>,
    goal_nodes: Vec<NodeId>,
    initial: TypeCounts,
    tick: u64,
    limit_ticks: u64,
    decision_ticks: u64,
    decisions: usize,
    pareto: Option<ParetoNodes>,
    observation: Vec<f64>,
    rescue_time: Option<f64>,
    result: Option<EpisodeResult>,
    trace: Option<Trace>,
}

impl<'a> Episode<'a> {
    pub fn new(mission: &'a Mission, params: &'a SimParams, runtime: RuntimeConfig) -> Result<Self, SimError> {
        mission.validate()?;
        if !(params.dt > 0.0) || !(params.decision_interval > 0.0) {
            return Err(SimError::Mission("time step and decision interval must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mission.seed);
        let world = World::new(mission, &mut rng);
        let candidates = mission.candidates();
        let mut ep = Self {
            mission,
            params,
            runtime,
            initial: world.active_counts(),
            world,
            rng,
            scratch: (*mission.graph).clone(),
            goal_positions: candidates.iter().map(|&b| mission.buildings[b].rect.center()).collect(),
            goal_nodes: candidates.iter().map(|&b| mission.buildings[b].node).collect(),
            tick: 0,
            limit_ticks: (mission.t_f / params.dt).round() as u64,
            decision_ticks: ((params.decision_interval / params.dt).round() as u64).max(1),
            decisions: 0,
            pareto: None,
            observation: Vec::new(),
            rescue_time: None,
            result: None,
            trace: Some(Trace::new(runtime.record_trace)),
        };
        if ep.initial.total() == 0 {
            ep.finish();
        } else {
            ep.prepare_decision();
        }
        Ok(ep)
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.params.dt
    }

    /// Pending observation, or `None` once the episode is over.
    pub fn observation(&self) -> Option<&[f64]> {
        self.result.is_none().then_some(self.observation.as_slice())
    }

    pub fn is_done(&self) -> bool {
        self.result.is_some()
    }

    pub fn result(&self) -> Option<&EpisodeResult> {
        self.result.as_ref()
    }

    pub fn into_result(self) -> Option<EpisodeResult> {
        self.result
    }

    fn prepare_decision(&mut self) {
        let robots: Vec<RobotView> = self
            .world
            .robots
            .iter()
            .map(|r| RobotView { kind: r.kind, position: r.position, alive: r.is_active() })
            .collect();
        let zones = self.world.adversary_zones(self.params.caution_radius);
        let view = MissionView {
            time: self.time(),
            t_f: self.mission.t_f,
            v_max: self.params.v_max(),
            diag: self.mission.diagonal(),
            map_center: self.mission.center(),
            goal_positions: &self.goal_positions,
            goal_nodes: &self.goal_nodes,
            robots: &robots,
            initial_counts: self.initial,
            adversaries: &zones,
            smokes: &self.mission.smokes,
            smoke_scale: self.params.smoke_weight_scale,
            caution_scale: self.params.caution_weight_scale,
        };
        let belief = &self.world.belief;
        let encoding = self.runtime.encoding;
        self.pareto = (encoding.structured_input() || encoding.pareto_output())
            .then(|| pareto_nodes(&mut self.scratch, belief, &view.pareto_context()));
        self.observation = if encoding.structured_input() {
            let seed = self.mission.seed ^ (self.decisions as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let clusters = cluster_robots(&view.alive_positions(), view.map_center, seed);
            let pareto = self.pareto.as_ref().expect("computed for structured input");
            encode_state(&mut self.scratch, &view, belief, &clusters, pareto)
        } else {
            encode_state_raw(&view, belief, self.runtime.raw_slots)
        };
    }

    /// Apply the policy's raw output and simulate up to the next decision.
    pub fn apply(&mut self, raw: &[f64]) -> Result<(), SimError> {
        if self.result.is_some() {
            return Err(SimError::Finished);
        }
        if raw.len() != ACTION_WIDTH {
            return Err(SimError::ActionWidth { expected: ACTION_WIDTH, found: raw.len() });
        }
        let clamped: Vec<f64> = raw
            .iter()
            .map(|&o| if o.is_nan() { 0.0 } else { o.clamp(-1.0, 1.0) })
            .collect();
        let idle = self.world.idle_counts();
        let action = match self.pareto.as_ref().filter(|_| self.runtime.encoding.pareto_output()) {
            Some(p) => decode_action(&clamped, idle, p)?,
            None => decode_action_raw(&clamped, idle, self.mission.graph.node_count())?,
        };
        allocate_tasks(&mut self.world, self.mission, &action, &mut self.rng);
        plan_paths(&mut self.world, self.mission, self.params, &mut self.scratch);
        let now = self.time();
        if let Some(trace) = &mut self.trace {
            let alive = self.world.active_counts().to_string();
            trace.decision(now, &clamped, self.world.belief.probabilities(), &alive);
        }
        self.decisions += 1;

        let next_decision = self.tick + self.decision_ticks;
        loop {
            if self.tick >= self.limit_ticks {
                self.finish();
                return Ok(());
            }
            let changed = self.step();
            // A rescue must finish strictly before the time limit.
            if self.rescue_time.is_none() && self.time() < self.mission.t_f && self.world.rescued(self.mission) {
                self.rescue_time = Some(self.time());
                if self.runtime.stop_on_success {
                    self.finish();
                    return Ok(());
                }
            }
            if self.world.active_counts().total() == 0 {
                self.finish();
                return Ok(());
            }
            if changed || self.tick >= next_decision {
                break;
            }
        }
        self.prepare_decision();
        Ok(())
    }

    /// One tick: observe, move, static kills, engagement, search, clock.
    /// Returns whether the target belief changed.
    fn step(&mut self) -> bool {
        observe(&mut self.world, self.params);
        move_agents(&mut self.world, self.mission, self.params, &mut self.rng);
        static_kill(&mut self.world, self.mission);
        engagement_tick(&mut self.world, self.params, &mut self.rng);
        let mut changed = false;
        for event in search_tick(&mut self.world, self.mission, self.params) {
            changed |= self.world.belief.apply(event).unwrap_or(false);
        }
        self.tick += 1;
        self.world.time = self.time();
        changed
    }

    fn finish(&mut self) {
        let survivors = self.world.active_counts();
        let initial = self.initial.total();
        let survival_rate = if initial > 0 { survivors.total() as f64 / initial as f64 } else { 0.0 };
        let rescue_time = self.rescue_time.unwrap_or(self.mission.t_f);
        let mut trace = self.trace.take().expect("finish runs once");
        trace.outcome(self.time(), self.rescue_time.is_some(), rescue_time, survival_rate);
        let progress = self
            .mission
            .candidates()
            .into_iter()
            .map(|b| (self.world.progress[b].psi_in, self.world.progress[b].psi_out))
            .collect();
        self.result = Some(EpisodeResult {
            success: self.rescue_time.is_some(),
            rescue_time,
            t_f: self.mission.t_f,
            survival_rate,
            initial: self.initial,
            survivors,
            progress,
            decisions: self.decisions,
            trace_hash: trace.hash(),
            trace: trace.into_text(),
        });
    }
}

/// Run a whole mission under `policy`.
pub fn run_episode(
    mission: &Mission,
    policy: &dyn Policy,
    params: &SimParams,
    runtime: RuntimeConfig,
) -> Result<EpisodeResult, SimError> {
    if policy.output_width() != ACTION_WIDTH {
        return Err(SimError::ActionWidth { expected: ACTION_WIDTH, found: policy.output_width() });
    }
    let mut episode = Episode::new(mission, params, runtime)?;
    while let Some(obs) = episode.observation() {
        let action = policy.act(obs);
        episode.apply(&action)?;
    }
    Ok(episode.into_result().expect("loop ends when the episode is done"))
}
