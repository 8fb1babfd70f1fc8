use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{split_by_shares, BeliefEvent, TacticsAction, TargetBelief};
use crate::fleet::{RobotType, TypeCounts};
use crate::geometry::{Point, Rect};
use crate::topo_map::{AdversaryZone, GraphError, NodeId, NodeKind, PathTree, Route, SmokeZone, TopoGraph};

use super::formation::{formation_velocity, Region};
use super::params::SimParams;
use super::SimError;

/// A building wired into the road graph through its entrance.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingSite {
    pub name: String,
    pub rect: Rect,
    pub entrance: NodeId,
    /// Node at the footprint center, reachable only through `entrance`.
    pub node: NodeId,
    pub candidate: bool,
}

impl BuildingSite {
    /// Split the road edge nearest `entrance`, then chain an entrance node
    /// and a footprint-center node onto it.
    pub fn attach(
        graph: &mut TopoGraph,
        name: impl Into<String>,
        rect: Rect,
        entrance: Point,
        candidate: bool,
    ) -> Result<Self, GraphError> {
        let road = graph
            .split_nearest_edge(entrance)
            .or_else(|_| graph.nearest_node(entrance).map_err(|_| GraphError::NoAnchor))?;
        let door = graph.attach_poi(entrance, NodeKind::Entrance, road)?;
        let node = graph.attach_poi(rect.center(), NodeKind::Building, door)?;
        Ok(Self {
            name: name.into(),
            rect,
            entrance: door,
            node,
            candidate,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticAdversary {
    pub position: Point,
    pub kill_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicAdversarySpec {
    pub waypoints: Vec<Point>,
    pub size: usize,
    pub speed: f64,
}

/// One fully resolved mission instance.
#[derive(Debug, Clone)]
pub struct Mission {
    pub graph: Arc<TopoGraph>,
    /// Map extent, m.
    pub width: f64,
    pub height: f64,
    pub buildings: Vec<BuildingSite>,
    /// Index into `buildings`.
    pub true_target: usize,
    pub robots: TypeCounts,
    pub spawn: Rect,
    pub static_adversaries: Vec<StaticAdversary>,
    pub dynamic_adversaries: Vec<DynamicAdversarySpec>,
    pub smokes: Vec<SmokeZone>,
    /// Time limit, s.
    pub t_f: f64,
    pub seed: u64,
}

impl Mission {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.t_f > 0.0) {
            return Err(SimError::Mission(format!("time limit must be positive, got {}", self.t_f)));
        }
        match self.buildings.get(self.true_target) {
            Some(b) if b.candidate => {}
            _ => return Err(SimError::Mission("true target must be a candidate building".into())),
        }
        for b in &self.buildings {
            for n in [b.entrance, b.node] {
                if !self.graph.contains(n) {
                    return Err(SimError::Mission(format!("building {} references unknown node {n}", b.name)));
                }
            }
        }
        if self.graph.is_empty() {
            return Err(SimError::Mission("road graph is empty".into()));
        }
        Ok(())
    }

    /// Building indices of the candidate targets, in file order.
    pub fn candidates(&self) -> Vec<usize> {
        (0..self.buildings.len()).filter(|&i| self.buildings[i].candidate).collect()
    }

    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * self.width, 0.5 * self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RobotStatus {
    Active,
    Disabled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Robot {
    pub id: usize,
    pub kind: RobotType,
    pub position: Point,
    pub status: RobotStatus,
    pub squad: Option<usize>,
    pub destination: Option<NodeId>,
    pub caution: f64,
    /// Remaining nodes to visit, front first.
    pub path: VecDeque<NodeId>,
    /// Building entered through its entrance node.
    pub entered: Option<usize>,
    /// Newly assigned and still needing a route.
    pub replan: bool,
}

impl Robot {
    pub fn is_active(&self) -> bool {
        self.status == RobotStatus::Active
    }

    /// Active and either unassigned or at its destination.
    pub fn is_idle(&self) -> bool {
        self.is_active() && (self.destination.is_none() || self.path.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicAdversary {
    pub position: Point,
    pub waypoints: Vec<Point>,
    pub next_waypoint: usize,
    pub size: usize,
    pub speed: f64,
    pub observed: bool,
    pub last_seen: Point,
}

impl DynamicAdversary {
    pub fn from_spec(spec: &DynamicAdversarySpec) -> Self {
        let start = spec.waypoints.first().copied().unwrap_or_default();
        Self {
            position: start,
            waypoints: spec.waypoints.clone(),
            next_waypoint: 1 % spec.waypoints.len().max(1),
            size: spec.size,
            speed: spec.speed,
            observed: false,
            last_seen: start,
        }
    }

    pub fn is_alive(&self) -> bool {
        self.size > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchProgress {
    pub psi_in: f64,
    pub psi_out: f64,
    pub identified: bool,
}

/// Full mutable simulation state.
#[derive(Debug, Clone)]
pub struct World {
    pub time: f64,
    pub robots: Vec<Robot>,
    pub adversaries: Vec<DynamicAdversary>,
    /// Indexed like `Mission::buildings`.
    pub progress: Vec<SearchProgress>,
    pub belief: TargetBelief,
    /// Goal index of each building, for candidates.
    goal_of: Vec<Option<usize>>,
}

impl World {
    /// Spawn robots uniformly in the spawn rectangle: UGVs, then UAV-A, then UAV-B.
    pub fn new<R: Rng + ?Sized>(mission: &Mission, rng: &mut R) -> Self {
        let mut robots = Vec::with_capacity(mission.robots.total());
        for t in RobotType::ALL {
            for _ in 0..mission.robots[t] {
                let s = mission.spawn;
                let position = Point::new(s.x + rng.random::<f64>() * s.w, s.y + rng.random::<f64>() * s.h);
                robots.push(Robot {
                    id: robots.len(),
                    kind: t,
                    position,
                    status: RobotStatus::Active,
                    squad: None,
                    destination: None,
                    caution: 0.0,
                    path: VecDeque::new(),
                    entered: None,
                    replan: false,
                });
            }
        }
        let mut goal_of = vec![None; mission.buildings.len()];
        for (l, b) in mission.candidates().into_iter().enumerate() {
            goal_of[b] = Some(l);
        }
        Self {
            time: 0.0,
            robots,
            adversaries: mission.dynamic_adversaries.iter().map(DynamicAdversary::from_spec).collect(),
            progress: vec![SearchProgress::default(); mission.buildings.len()],
            belief: TargetBelief::uniform(mission.candidates().len()),
            goal_of,
        }
    }

    pub fn active_counts(&self) -> TypeCounts {
        let mut c = TypeCounts::default();
        for r in self.robots.iter().filter(|r| r.is_active()) {
            c[r.kind] += 1;
        }
        c
    }

    pub fn idle_counts(&self) -> TypeCounts {
        let mut c = TypeCounts::default();
        for r in self.robots.iter().filter(|r| r.is_idle()) {
            c[r.kind] += 1;
        }
        c
    }

    /// Observed, surviving adversaries at their last seen positions.
    pub fn adversary_zones(&self, radius: f64) -> Vec<AdversaryZone> {
        self.adversaries
            .iter()
            .filter(|a| a.is_alive() && a.observed)
            .map(|a| AdversaryZone { position: a.last_seen, radius, observed: true })
            .collect()
    }

    /// UGV inside the true target having entered through its door.
    pub fn rescued(&self, mission: &Mission) -> bool {
        let tt = mission.true_target;
        self.progress[tt].psi_in >= 1.0 && self.robots.iter().any(|r| self.is_inside(r, mission, tt))
    }

    fn is_inside(&self, r: &Robot, mission: &Mission, b: usize) -> bool {
        r.is_active() && r.entered == Some(b) && mission.buildings[b].rect.contains(r.position)
    }
}

fn smoke_factor(p: Point, smokes: &[SmokeZone], slowdown: f64) -> f64 {
    smokes
        .iter()
        .filter(|s| s.radius > 0.0)
        .map(|s| 1.0 - slowdown * (1.0 - p.dist(s.center) / s.radius).max(0.0))
        .fold(1.0, f64::min)
}

/// Settling radius around a squad's destination.
fn settle_region(mission: &Mission, params: &SimParams, dest: NodeId, squad_size: usize) -> Region {
    let d_min = params.formation.d_min;
    let mut radius = d_min * (squad_size.max(1) as f64).sqrt();
    if let Some(b) = mission.buildings.iter().find(|b| b.node == dest) {
        let half = 0.5 * b.rect.w.min(b.rect.h) - d_min;
        radius = radius.min(half.max(0.5 * d_min));
    }
    Region {
        center: mission.graph.position(dest),
        radius,
    }
}

fn reached_node(robot: &mut Robot, mission: &Mission, node: NodeId) {
    if let Some(b) = mission.buildings.iter().position(|b| b.entrance == node) {
        robot.entered = Some(b);
    } else if robot.entered.map_or(true, |b| mission.buildings[b].node != node) {
        robot.entered = None;
    }
}

/// Mark adversaries seen by any active robot.
pub fn observe(world: &mut World, params: &SimParams) {
    for adv in world.adversaries.iter_mut().filter(|a| a.is_alive()) {
        let seen = world
            .robots
            .iter()
            .filter(|r| r.is_active())
            .any(|r| r.position.dist(adv.position) <= params.robot(r.kind).perception_range);
        if seen {
            adv.observed = true;
            adv.last_seen = adv.position;
        }
    }
}

/// Move every active robot along its path with formation control, then
/// advance the adversaries along their patrol loops.
pub fn move_agents<R: Rng + ?Sized>(world: &mut World, mission: &Mission, params: &SimParams, rng: &mut R) {
    let dt = params.dt;
    let mut squads: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, r) in world.robots.iter().enumerate() {
        if let (true, Some(s)) = (r.is_active(), r.squad) {
            squads.entry(s).or_default().push(i);
        }
    }
    let mut velocities = vec![Point::default(); world.robots.len()];
    let mut neighbors: Vec<Point> = Vec::new();
    for (i, r) in world.robots.iter().enumerate() {
        if !r.is_active() {
            continue;
        }
        let kind = params.robot(r.kind);
        let speed = kind.max_speed * smoke_factor(r.position, &mission.smokes, params.smoke_slowdown);
        let mut region = None;
        let path_velocity = match r.path.front() {
            Some(&n) => {
                let offset = mission.graph.position(n) - r.position;
                let step = offset.norm();
                if step <= speed * dt {
                    offset * (1.0 / dt)
                } else {
                    offset * (speed / step)
                }
            }
            None => {
                if let Some(dest) = r.destination {
                    let size = r.squad.and_then(|s| squads.get(&s)).map_or(1, |m| m.len());
                    region = Some(settle_region(mission, params, dest, size));
                }
                Point::default()
            }
        };
        neighbors.clear();
        if let Some(members) = r.squad.and_then(|s| squads.get(&s)) {
            neighbors.extend(members.iter().filter(|&&j| j != i).map(|&j| world.robots[j].position));
        }
        velocities[i] = formation_velocity(
            r.position,
            &neighbors,
            &params.formation,
            region.as_ref(),
            path_velocity,
            speed,
            rng,
        );
    }
    let tol = params.arrival_tolerance;
    for (r, v) in world.robots.iter_mut().zip(&velocities) {
        if !r.is_active() {
            continue;
        }
        r.position = r.position + *v * dt;
        while let Some(&n) = r.path.front() {
            if r.position.dist(mission.graph.position(n)) > tol {
                break;
            }
            r.path.pop_front();
            reached_node(r, mission, n);
            // Only one node per tick unless it was already at the next one.
            if r.path.front().map_or(true, |&m| mission.graph.position(m).dist(r.position) > tol) {
                break;
            }
        }
    }
    for adv in world.adversaries.iter_mut().filter(|a| a.is_alive() && a.waypoints.len() > 1) {
        let mut budget = adv.speed * dt;
        while budget > 0.0 {
            let target = adv.waypoints[adv.next_waypoint];
            let d = adv.position.dist(target);
            if d <= budget {
                adv.position = target;
                budget -= d;
                adv.next_waypoint = (adv.next_waypoint + 1) % adv.waypoints.len();
                if d == 0.0 {
                    break;
                }
            } else {
                adv.position = adv.position.lerp(target, budget / d);
                budget = 0.0;
            }
        }
    }
}

/// Disable robots inside any static kill zone.
pub fn static_kill(world: &mut World, mission: &Mission) {
    for r in world.robots.iter_mut().filter(|r| r.is_active()) {
        if mission.static_adversaries.iter().any(|s| r.position.dist(s.position) <= s.kill_radius) {
            r.status = RobotStatus::Disabled;
        }
    }
}

/// Stochastic fights between adversary squads and nearby robots.
///
/// Adversaries are processed by index, engaged robots by id; each engaged
/// robot draws once to be disabled (`p_adv * dt / n`) and once to neutralize
/// an adversary member (`neutralize_prob * dt`). Squads reduced to zero
/// members are gone.
pub fn engagement_tick<R: Rng + ?Sized>(world: &mut World, params: &SimParams, rng: &mut R) {
    let dt = params.dt;
    for adv in world.adversaries.iter_mut().filter(|a| a.is_alive()) {
        let engaged: Vec<usize> = world
            .robots
            .iter()
            .filter(|r| r.is_active() && r.position.dist(adv.position) <= params.engagement_range)
            .map(|r| r.id)
            .collect();
        if engaged.is_empty() {
            continue;
        }
        let p_disable = (params.adversary_lethality * dt / engaged.len() as f64).clamp(0.0, 1.0);
        for id in engaged {
            let robot = &mut world.robots[id];
            let disabled = rng.random::<f64>() < p_disable;
            let neutralize = rng.random::<f64>() < (params.robot(robot.kind).neutralize_prob * dt).clamp(0.0, 1.0);
            if disabled {
                robot.status = RobotStatus::Disabled;
            }
            if neutralize && adv.size > 0 {
                adv.size -= 1;
            }
        }
        if adv.size == 0 {
            adv.observed = false;
        }
    }
}

/// Accumulate search progress on candidate buildings and report buildings
/// whose status just became known.
pub fn search_tick(world: &mut World, mission: &Mission, params: &SimParams) -> Vec<BeliefEvent> {
    let dt = params.dt;
    let mut events = Vec::new();
    for (b, site) in mission.buildings.iter().enumerate() {
        let Some(l) = world.goal_of[b] else { continue };
        let mut outdoor = 0.0;
        let mut indoor = 0.0;
        for r in world.robots.iter().filter(|r| r.is_active()) {
            let kind = params.robot(r.kind);
            if r.kind.is_aerial() {
                if site.rect.distance_to(r.position) <= params.observation_band {
                    outdoor += kind.search_rate;
                }
            } else if kind.indoor_capable && r.entered == Some(b) && site.rect.contains(r.position) {
                indoor += kind.search_rate;
            }
        }
        let band_area = site.rect.perimeter() * params.observation_band;
        let p = &mut world.progress[b];
        if band_area > 0.0 {
            p.psi_out = (p.psi_out + dt * outdoor / band_area).min(1.0);
        }
        if site.rect.area() > 0.0 {
            p.psi_in = (p.psi_in + dt * indoor / site.rect.area()).min(1.0);
        }
        if !p.identified && p.psi_in.max(p.psi_out) >= params.identify_threshold {
            p.identified = true;
            events.push(if b == mission.true_target {
                BeliefEvent::ConfirmedTrue(l)
            } else {
                BeliefEvent::SearchedEmpty(l)
            });
        }
    }
    events
}

/// Assign idle robots to the squads of `action`.
///
/// Idle robots of each type are shuffled, then each squad in turn takes the
/// robots nearest its destination (shuffle order breaks distance ties).
/// Requested sizes above the idle count are scaled down by largest remainder.
pub fn allocate_tasks<R: Rng + ?Sized>(world: &mut World, mission: &Mission, action: &TacticsAction, rng: &mut R) {
    for t in RobotType::ALL {
        let mut idle: Vec<usize> = world.robots.iter().filter(|r| r.kind == t && r.is_idle()).map(|r| r.id).collect();
        let squads: Vec<(usize, _)> = action
            .squads
            .iter()
            .enumerate()
            .filter(|(_, s)| s.robot_type == t)
            .collect();
        let mut sizes: Vec<usize> = squads.iter().map(|(_, s)| s.size).collect();
        if sizes.iter().sum::<usize>() > idle.len() {
            let shares: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
            sizes = split_by_shares(&shares, idle.len());
        }
        idle.shuffle(rng);
        for ((j, cmd), size) in squads.into_iter().zip(sizes) {
            if size == 0 {
                continue;
            }
            let goal = mission.graph.position(cmd.node);
            idle.sort_by(|&a, &b| {
                world.robots[a]
                    .position
                    .dist(goal)
                    .total_cmp(&world.robots[b].position.dist(goal))
            });
            for id in idle.drain(..size) {
                let r = &mut world.robots[id];
                r.squad = Some(j);
                r.destination = Some(cmd.node);
                r.caution = cmd.caution;
                r.path.clear();
                r.replan = true;
            }
        }
    }
}

/// Plan every assigned robot's route on the reweighted graph.
///
/// Moving robots keep heading to their next node and route from there;
/// robots settled at their destination stay put.
pub fn plan_paths(world: &mut World, mission: &Mission, params: &SimParams, scratch: &mut TopoGraph) {
    let zones = world.adversary_zones(params.caution_radius);
    let mut by_caution: Vec<(u64, Vec<usize>)> = Vec::new();
    for r in world
        .robots
        .iter()
        .filter(|r| r.is_active() && r.destination.is_some() && (r.replan || !r.path.is_empty()))
    {
        let key = r.caution.to_bits();
        match by_caution.iter_mut().find(|(k, _)| *k == key) {
            Some((_, ids)) => ids.push(r.id),
            None => by_caution.push((key, vec![r.id])),
        }
    }
    for (key, ids) in by_caution {
        scratch.reset_weights();
        scratch.apply_smoke_weights(&mission.smokes, params.smoke_weight_scale);
        scratch.apply_caution_weights(&zones, f64::from_bits(key), params.caution_weight_scale);
        let mut trees: HashMap<NodeId, PathTree> = HashMap::new();
        for id in ids {
            let r = &world.robots[id];
            let dest = r.destination.expect("filtered on destination");
            let start = match r.path.front() {
                Some(&n) => n,
                None => scratch.nearest_node(r.position).expect("mission graph is not empty"),
            };
            let tree = trees.entry(dest).or_insert_with(|| PathTree::toward(scratch, dest));
            let r = &mut world.robots[id];
            r.replan = false;
            match tree.route_from(scratch, start) {
                Route::Found { nodes, .. } => r.path = nodes.into(),
                Route::Unreachable => {
                    r.destination = None;
                    r.path.clear();
                }
            }
        }
    }
}
