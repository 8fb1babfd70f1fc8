use std::collections::HashMap;
use std::fmt::Write as _;

use crate::fleet::{RobotType, TypeCounts};
use crate::geometry::{line_distance, Point};
use crate::topo_map::{distances_from, AdversaryZone, NodeId, SmokeZone, TopoGraph};

use super::action::{ACTION_WIDTH, SQUADS};
use super::belief::TargetBelief;
use super::kmeans::{ClusterSet, CLUSTERS_PER_TYPE};
use super::pareto::{ParetoContext, ParetoNodes, PARETO_SLOTS};

/// Observed adversaries tracked per cluster and goal.
pub const TRACKED_ADVERSARIES: usize = 2;
/// Normalized value for a missing or meaningless distance.
const SENTINEL: f64 = 1.0;
const MAX_DISTANCE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotView {
    pub kind: RobotType,
    pub position: Point,
    pub alive: bool,
}

/// Read-only snapshot of the mission used by the encoders.
#[derive(Debug, Clone)]
pub struct MissionView<'a> {
    pub time: f64,
    pub t_f: f64,
    /// Fastest robot speed, used for travel-time normalization.
    pub v_max: f64,
    /// Map diagonal, the normalizer for every distance feature.
    pub diag: f64,
    pub map_center: Point,
    pub goal_positions: &'a [Point],
    pub goal_nodes: &'a [NodeId],
    pub robots: &'a [RobotView],
    pub initial_counts: TypeCounts,
    /// Adversary zones at their last observed positions.
    pub adversaries: &'a [AdversaryZone],
    pub smokes: &'a [SmokeZone],
    pub smoke_scale: f64,
    pub caution_scale: f64,
}

impl<'a> MissionView<'a> {
    pub fn pareto_context(&self) -> ParetoContext<'a> {
        ParetoContext {
            goal_nodes: self.goal_nodes,
            smokes: self.smokes,
            adversaries: self.adversaries,
            smoke_scale: self.smoke_scale,
            caution_scale: self.caution_scale,
            v_max: self.v_max,
            t_f: self.t_f,
        }
    }

    /// Alive robot positions grouped by type, in robot order.
    pub fn alive_positions(&self) -> [Vec<Point>; 3] {
        let mut out: [Vec<Point>; 3] = Default::default();
        for r in self.robots.iter().filter(|r| r.alive) {
            out[r.kind.index()].push(r.position);
        }
        out
    }

    pub fn alive_counts(&self) -> TypeCounts {
        let mut c = TypeCounts::default();
        for r in self.robots.iter().filter(|r| r.alive) {
            c[r.kind] += 1;
        }
        c
    }

    /// Remaining reachable distance at top speed, in map diagonals.
    pub fn time_feature(&self) -> f64 {
        ((self.t_f - self.time).max(0.0) * self.v_max / self.diag).max(0.0)
    }
}

/// Perpendicular distance from `r` to the line through `c` and `g`.
pub fn adversary_line_distance(c: Point, g: Point, r: Point) -> f64 {
    line_distance(c, g, r)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice {
    pub name: &'static str,
    pub offset: usize,
    pub len: usize,
}

/// Named contiguous slices of a flat vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationLayout {
    pub slices: Vec<Slice>,
}

impl ObservationLayout {
    fn from_lengths(parts: &[(&'static str, usize)]) -> Self {
        let mut offset = 0;
        let slices = parts
            .iter()
            .map(|&(name, len)| {
                let s = Slice { name, offset, len };
                offset += len;
                s
            })
            .collect();
        Self { slices }
    }

    /// Clustered observation for `goals` candidate buildings.
    pub fn structured(goals: usize) -> Self {
        let clusters = 3 * CLUSTERS_PER_TYPE;
        Self::from_lengths(&[
            ("time", 1),
            ("beliefs", goals),
            ("cluster_sizes", clusters),
            ("inter_cluster", clusters),
            ("cluster_to_node", clusters * PARETO_SLOTS),
            ("adversary_lines", clusters * goals * TRACKED_ADVERSARIES),
        ])
    }

    /// Raw per-robot observation with `n_max` slots per type.
    pub fn raw(goals: usize, n_max: usize) -> Self {
        Self::from_lengths(&[("time", 1), ("beliefs", goals), ("robots", 3 * 3 * n_max)])
    }

    pub fn action() -> Self {
        Self::from_lengths(&[("node", SQUADS), ("size", SQUADS), ("caution", SQUADS)])
    }

    pub fn width(&self) -> usize {
        self.slices.last().map_or(0, |s| s.offset + s.len)
    }

    pub fn slice(&self, name: &str) -> Option<&Slice> {
        self.slices.iter().find(|s| s.name == name)
    }
}

pub fn raw_input_width(goals: usize, n_max: usize) -> usize {
    ObservationLayout::raw(goals, n_max).width()
}

/// Self-describing `section / name offset length` listing of every layout.
pub fn layout_text(goals: usize, n_max: usize) -> String {
    let mut out = String::new();
    for (title, layout) in [
        ("observation", ObservationLayout::structured(goals)),
        ("raw_observation", ObservationLayout::raw(goals, n_max)),
        ("action", ObservationLayout::action()),
    ] {
        let _ = writeln!(out, "# {title} width {}", layout.width());
        for s in &layout.slices {
            let _ = writeln!(out, "{} {} {}", s.name, s.offset, s.len);
        }
    }
    debug_assert!(out.contains(&format!("width {ACTION_WIDTH}")));
    out
}

fn normalized(d: f64, diag: f64) -> f64 {
    if d.is_finite() {
        (d / diag).clamp(0.0, MAX_DISTANCE)
    } else {
        MAX_DISTANCE
    }
}

/// Build the clustered observation vector.
///
/// `scratch` is reweighted with smoke penalties only; cluster-to-node features
/// are graph distances from the node nearest each centroid plus the straight
/// offset to that node. Features of an extinct type are the sentinel 1.0.
pub fn encode_state(
    scratch: &mut TopoGraph,
    view: &MissionView,
    belief: &TargetBelief,
    clusters: &ClusterSet,
    pareto: &ParetoNodes,
) -> Vec<f64> {
    let goals = view.goal_positions.len();
    let layout = ObservationLayout::structured(goals);
    let mut out = Vec::with_capacity(layout.width());
    let alive = view.alive_counts();
    let extinct = |t: RobotType| alive[t] == 0;

    out.push(view.time_feature());
    out.extend_from_slice(belief.probabilities());

    for t in RobotType::ALL {
        for c in 0..CLUSTERS_PER_TYPE {
            let n0 = view.initial_counts[t];
            let size = clusters.get(t, c).size;
            out.push(if n0 > 0 { (size as f64 / n0 as f64).clamp(0.0, 1.0) } else { 0.0 });
        }
    }

    for t in RobotType::ALL {
        let next = RobotType::from_index((t.index() + 1) % 3);
        for c in 0..CLUSTERS_PER_TYPE {
            if extinct(t) || extinct(next) {
                out.push(SENTINEL);
            } else {
                let d = clusters.get(t, c).centroid.dist(clusters.get(next, c).centroid);
                out.push(normalized(d, view.diag));
            }
        }
    }

    scratch.reset_weights();
    scratch.apply_smoke_weights(view.smokes, view.smoke_scale);
    let mut from_node: HashMap<NodeId, Vec<f64>> = HashMap::new();
    for &n in pareto.slots().iter() {
        from_node.entry(n).or_insert_with(|| distances_from(scratch, n));
    }
    for t in RobotType::ALL {
        for c in 0..CLUSTERS_PER_TYPE {
            let centroid = clusters.get(t, c).centroid;
            let anchor = scratch.nearest_node(centroid).ok();
            for n in pareto.slots() {
                let value = match anchor {
                    _ if extinct(t) => SENTINEL,
                    Some(a) => {
                        let d = from_node[&n][a.index()] + centroid.dist(scratch.position(a));
                        normalized(d, view.diag)
                    }
                    None => MAX_DISTANCE,
                };
                out.push(value);
            }
        }
    }

    let observed: Vec<&AdversaryZone> = view.adversaries.iter().filter(|a| a.observed).collect();
    for t in RobotType::ALL {
        for c in 0..CLUSTERS_PER_TYPE {
            let centroid = clusters.get(t, c).centroid;
            let mut nearest: Vec<(usize, f64)> = observed
                .iter()
                .enumerate()
                .map(|(i, a)| (i, a.position.dist(centroid)))
                .collect();
            nearest.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            for &g in view.goal_positions {
                for k in 0..TRACKED_ADVERSARIES {
                    let value = match nearest.get(k) {
                        Some(&(i, _)) if !extinct(t) => {
                            normalized(adversary_line_distance(centroid, g, observed[i].position), view.diag)
                        }
                        _ => SENTINEL,
                    };
                    out.push(value);
                }
            }
        }
    }
    debug_assert_eq!(out.len(), layout.width());
    out
}

/// Raw observation: time, beliefs, then `(x, y, alive)` for up to `n_max`
/// robots of each type in fleet order. Dead and absent slots are zero.
pub fn encode_state_raw(view: &MissionView, belief: &TargetBelief, n_max: usize) -> Vec<f64> {
    let goals = view.goal_positions.len();
    let mut out = Vec::with_capacity(raw_input_width(goals, n_max));
    out.push(view.time_feature());
    out.extend_from_slice(belief.probabilities());
    for t in RobotType::ALL {
        let mut slots = vec![0.0; 3 * n_max];
        for (i, r) in view.robots.iter().filter(|r| r.kind == t).take(n_max).enumerate() {
            if r.alive {
                slots[3 * i] = r.position.x / view.diag;
                slots[3 * i + 1] = r.position.y / view.diag;
                slots[3 * i + 2] = 1.0;
            }
        }
        out.extend(slots);
    }
    out
}
