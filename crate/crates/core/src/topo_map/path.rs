use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::graph::{NodeId, TopoGraph};
use super::GraphError;

#[derive(Debug, Clone, Copy)]
struct Frontier {
    cost: f64,
    node: NodeId,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    // min-heap on cost, then node id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Single-source Dijkstra over the current edge weights. Unreachable nodes
/// get `f64::INFINITY`.
pub fn distances_from(graph: &TopoGraph, source: NodeId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.node_count()];
    if !graph.contains(source) {
        return dist;
    }
    let mut heap = BinaryHeap::new();
    dist[source.index()] = 0.0;
    heap.push(Frontier { cost: 0.0, node: source });
    while let Some(Frontier { cost, node }) = heap.pop() {
        if cost > dist[node.index()] {
            continue;
        }
        for &(next, e) in graph.neighbors(node) {
            let c = cost + graph.edges()[e].weight;
            if c < dist[next.index()] {
                dist[next.index()] = c;
                heap.push(Frontier { cost: c, node: next });
            }
        }
    }
    dist
}

/// Outcome of a shortest-path query.
#[derive(Debug, Clone, PartialEq)]
pub enum Route {
    Found { nodes: Vec<NodeId>, cost: f64 },
    Unreachable,
}

impl Route {
    pub fn cost(&self) -> Option<f64> {
        match self {
            Route::Found { cost, .. } => Some(*cost),
            Route::Unreachable => None,
        }
    }

    pub fn nodes(&self) -> Option<&[NodeId]> {
        match self {
            Route::Found { nodes, .. } => Some(nodes),
            Route::Unreachable => None,
        }
    }
}

/// Distances to a fixed target; extracts routes from any source.
#[derive(Debug, Clone)]
pub struct PathTree {
    target: NodeId,
    dist: Vec<f64>,
}

impl PathTree {
    pub fn toward(graph: &TopoGraph, target: NodeId) -> Self {
        Self {
            target,
            dist: distances_from(graph, target),
        }
    }

    pub fn target(&self) -> NodeId {
        self.target
    }

    pub fn distance(&self, from: NodeId) -> f64 {
        self.dist[from.index()]
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    /// Minimal-cost route from `source` to the target; among equal-cost
    /// routes the lexicographically smallest node sequence is returned.
    pub fn route_from(&self, graph: &TopoGraph, source: NodeId) -> Route {
        let total = self.dist[source.index()];
        if !total.is_finite() {
            return Route::Unreachable;
        }
        let mut nodes = vec![source];
        let mut cur = source;
        while cur != self.target {
            let here = self.dist[cur.index()];
            let tol = 1e-9 * here.max(1.0);
            let next = graph
                .neighbors(cur)
                .iter()
                .filter(|&&(n, e)| {
                    let d = self.dist[n.index()];
                    d < here && (d + graph.edges()[e].weight - here).abs() <= tol
                })
                .map(|&(n, _)| n)
                .min()
                .expect("a tight edge exists on every finite shortest-path distance");
            nodes.push(next);
            cur = next;
        }
        Route::Found { nodes, cost: total }
    }
}

/// Shortest path between two nodes under the current edge weights.
pub fn shortest_path(graph: &TopoGraph, src: NodeId, dst: NodeId) -> Result<Route, GraphError> {
    for n in [src, dst] {
        if !graph.contains(n) {
            return Err(GraphError::UnknownNode(n));
        }
    }
    Ok(PathTree::toward(graph, dst).route_from(graph, src))
}
