use std::cmp::Ordering;

use crate::topo_map::{distances_from, AdversaryZone, NodeId, SmokeZone, TopoGraph};

use super::belief::TargetBelief;

/// `a` Pareto-dominates `b` (minimization): no worse everywhere, better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Non-dominated subset of `candidates`, ordered by node id.
///
/// `objectives[i]` is the objective vector of `candidates[i]`. Candidates are
/// visited in lexicographic objective order, so any dominator of a point is
/// visited before it and only the current front needs checking.
pub fn pareto_filter(candidates: &[NodeId], objectives: &[Vec<f64>]) -> Vec<NodeId> {
    assert_eq!(candidates.len(), objectives.len());
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&i, &j| {
        lexicographic(&objectives[i], &objectives[j]).then(candidates[i].cmp(&candidates[j]))
    });
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&f| dominates(&objectives[f], &objectives[i])) {
            front.push(i);
        }
    }
    let mut ids: Vec<NodeId> = front.into_iter().map(|i| candidates[i]).collect();
    ids.sort();
    ids
}

/// NSGA-II crowding distance of each member; boundary members get infinity.
pub fn crowding_distances(objectives: &[Vec<f64>]) -> Vec<f64> {
    let n = objectives.len();
    let mut dist = vec![0.0; n];
    if n == 0 {
        return dist;
    }
    let m = objectives[0].len();
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        order.sort_by(|&i, &j| objectives[i][k].total_cmp(&objectives[j][k]).then(i.cmp(&j)));
        let lo = objectives[order[0]][k];
        let hi = objectives[order[n - 1]][k];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in order.windows(3) {
            dist[w[1]] += (objectives[w[2]][k] - objectives[w[0]][k]) / range;
        }
    }
    dist
}

/// Reduce `members` to at most `quota` ids, keeping the most spread-out ones.
///
/// Members sharing an objective vector with a lower-id member are treated as
/// zero-crowding duplicates and dropped first. Ties fall to the smaller id.
/// The result is ordered by node id.
pub fn crowding_select(members: &[(NodeId, Vec<f64>)], quota: usize) -> Vec<NodeId> {
    if members.len() <= quota {
        let mut ids: Vec<NodeId> = members.iter().map(|(id, _)| *id).collect();
        ids.sort();
        return ids;
    }
    let mut by_id: Vec<usize> = (0..members.len()).collect();
    by_id.sort_by_key(|&i| members[i].0);
    let mut unique: Vec<usize> = Vec::new();
    let mut duplicate = vec![false; members.len()];
    for &i in &by_id {
        if unique.iter().any(|&u| members[u].1 == members[i].1) {
            duplicate[i] = true;
        } else {
            unique.push(i);
        }
    }
    let objs: Vec<Vec<f64>> = unique.iter().map(|&i| members[i].1.clone()).collect();
    let cd = crowding_distances(&objs);
    let mut score = vec![0.0; members.len()];
    for (k, &i) in unique.iter().enumerate() {
        score[i] = cd[k];
    }
    let mut ranked: Vec<usize> = (0..members.len()).collect();
    ranked.sort_by(|&i, &j| {
        duplicate[i]
            .cmp(&duplicate[j])
            .then(score[j].total_cmp(&score[i]))
            .then(members[i].0.cmp(&members[j].0))
    });
    let mut ids: Vec<NodeId> = ranked[..quota].iter().map(|&i| members[i].0).collect();
    ids.sort();
    ids
}

pub const PLAIN_NODES: usize = 5;
pub const CAUTIOUS_NODES: usize = 3;
pub const PARETO_SLOTS: usize = PLAIN_NODES + CAUTIOUS_NODES;

/// Destination candidates: 5 distance-based nodes and 3 caution-based nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParetoNodes {
    pub plain: [NodeId; PLAIN_NODES],
    pub cautious: [NodeId; CAUTIOUS_NODES],
}

impl ParetoNodes {
    pub fn slots(&self) -> [NodeId; PARETO_SLOTS] {
        let mut out = [NodeId(0); PARETO_SLOTS];
        out[..PLAIN_NODES].copy_from_slice(&self.plain);
        out[PLAIN_NODES..].copy_from_slice(&self.cautious);
        out
    }
}

/// Everything needed to pick Pareto destination nodes.
#[derive(Debug, Clone)]
pub struct ParetoContext<'a> {
    /// Graph node of each candidate goal, indexed like the belief.
    pub goal_nodes: &'a [NodeId],
    pub smokes: &'a [SmokeZone],
    pub adversaries: &'a [AdversaryZone],
    pub smoke_scale: f64,
    pub caution_scale: f64,
    /// Speed used to turn path cost into travel time.
    pub v_max: f64,
    /// Mission time limit; `2 * t_f` stands in for unreachable goals.
    pub t_f: f64,
}

/// Objective matrix `f_l(k) = P(G_l) * t(X_k -> G_l)` over every graph node.
pub fn objective_matrix(graph: &TopoGraph, belief: &TargetBelief, ctx: &ParetoContext) -> Vec<Vec<f64>> {
    let sentinel = 2.0 * ctx.t_f;
    let per_goal: Vec<Vec<f64>> = ctx
        .goal_nodes
        .iter()
        .map(|&g| distances_from(graph, g))
        .collect();
    (0..graph.node_count())
        .map(|k| {
            per_goal
                .iter()
                .enumerate()
                .map(|(l, d)| {
                    let t = if d[k].is_finite() { d[k] / ctx.v_max } else { sentinel };
                    belief.probability(l) * t
                })
                .collect()
        })
        .collect()
}

fn select_front(graph: &TopoGraph, belief: &TargetBelief, ctx: &ParetoContext, quota: usize) -> Vec<NodeId> {
    let objectives = objective_matrix(graph, belief, ctx);
    let ids: Vec<NodeId> = (0..graph.node_count()).map(NodeId).collect();
    let front = pareto_filter(&ids, &objectives);
    let members: Vec<(NodeId, Vec<f64>)> = front
        .into_iter()
        .map(|id| (id, objectives[id.index()].clone()))
        .collect();
    crowding_select(&members, quota)
}

fn pad<const N: usize>(mut ids: Vec<NodeId>, fill: NodeId) -> [NodeId; N] {
    ids.resize(N, fill);
    ids.try_into().expect("resized to N")
}

/// Pick 5 nodes under plain (smoke-only) weights and 3 under full caution.
///
/// `scratch` has its weights overwritten; they are left at the cautious
/// weighting on return.
pub fn pareto_nodes(scratch: &mut TopoGraph, belief: &TargetBelief, ctx: &ParetoContext) -> ParetoNodes {
    let fill = belief
        .most_probable()
        .map(|l| ctx.goal_nodes[l])
        .unwrap_or(NodeId(0));

    scratch.reset_weights();
    scratch.apply_smoke_weights(ctx.smokes, ctx.smoke_scale);
    let plain = select_front(scratch, belief, ctx, PLAIN_NODES);

    scratch.apply_caution_weights(ctx.adversaries, 1.0, ctx.caution_scale);
    let cautious = select_front(scratch, belief, ctx, CAUTIOUS_NODES);

    ParetoNodes {
        plain: pad(plain, fill),
        cautious: pad(cautious, fill),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[usize]) -> Vec<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn single_candidate_survives() {
        assert_eq!(pareto_filter(&ids(&[4]), &[vec![3.0, 1.0]]), ids(&[4]));
        assert!(pareto_filter(&[], &[]).is_empty());
    }

    #[test]
    fn zero_component_is_never_dominated() {
        let objs = vec![vec![0.0, 5.0, 5.0], vec![5.0, 0.0, 5.0], vec![5.0, 5.0, 0.0], vec![1.0, 1.0, 1.0], vec![6.0, 6.0, 6.0]];
        assert_eq!(pareto_filter(&ids(&[0, 1, 2, 3, 4]), &objs), ids(&[0, 1, 2, 3]));
    }

    #[test]
    fn duplicates_do_not_dominate_each_other() {
        let objs = vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![2.0, 3.0]];
        assert_eq!(pareto_filter(&ids(&[9, 3, 5]), &objs), ids(&[3, 9]));
    }

    #[test]
    fn crowding_keeps_all_under_quota() {
        let m = vec![(NodeId(3), vec![1.0, 2.0]), (NodeId(1), vec![2.0, 1.0])];
        assert_eq!(crowding_select(&m, 5), ids(&[1, 3]));
    }

    #[test]
    fn crowding_collinear_front() {
        // f2 = 10 - f1 at f1 = 0, 1, 2, 6, 10. Interior crowding (two equal
        // normalized terms): id1: 2*(2-0)/10 = 0.4, id2: 2*(6-1)/10 = 1.0,
        // id3: 2*(10-2)/10 = 1.6. Extremes are infinite.
        let m: Vec<(NodeId, Vec<f64>)> = [0.0, 1.0, 2.0, 6.0, 10.0]
            .iter()
            .enumerate()
            .map(|(i, &f)| (NodeId(i), vec![f, 10.0 - f]))
            .collect();
        let cd = crowding_distances(&m.iter().map(|x| x.1.clone()).collect::<Vec<_>>());
        assert!((cd[1] - 0.4).abs() < 1e-12 && (cd[2] - 1.0).abs() < 1e-12 && (cd[3] - 1.6).abs() < 1e-12);
        assert_eq!(crowding_select(&m, 3), ids(&[0, 3, 4]));
    }

    #[test]
    fn crowding_drops_duplicates_first() {
        let m = vec![
            (NodeId(0), vec![0.0, 4.0]),
            (NodeId(1), vec![2.0, 2.0]),
            (NodeId(2), vec![2.0, 2.0]),
            (NodeId(3), vec![4.0, 0.0]),
        ];
        assert_eq!(crowding_select(&m, 3), ids(&[0, 1, 3]));
    }
}
