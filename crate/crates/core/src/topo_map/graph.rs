use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

use super::grid::{Pixel, Skeleton};
use super::GraphError;

/// Dense node identifier; ids are `0..node_count()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Junction,
    Waypoint,
    Building,
    Entrance,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Junction => "junction",
            NodeKind::Waypoint => "waypoint",
            NodeKind::Building => "building",
            NodeKind::Entrance => "entrance",
        }
    }
}

impl FromStr for NodeKind {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "junction" => Ok(NodeKind::Junction),
            "waypoint" => Ok(NodeKind::Waypoint),
            "building" => Ok(NodeKind::Building),
            "entrance" => Ok(NodeKind::Entrance),
            other => Err(GraphError::Parse {
                line: 0,
                reason: format!("unknown node kind `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub position: Point,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub base_length: f64,
    pub weight: f64,
}

impl Edge {
    pub fn other(&self, n: NodeId) -> NodeId {
        if self.a == n {
            self.b
        } else {
            self.a
        }
    }
}

/// Circular smoke cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmokeZone {
    pub center: Point,
    pub radius: f64,
}

/// Area of influence of a dynamic adversary squad for caution weighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversaryZone {
    pub position: Point,
    pub radius: f64,
    pub observed: bool,
}

/// POIs closer than this to an existing node are merged into it.
const MERGE_DISTANCE: f64 = 1e-6;

/// Undirected topological graph of the road network with mutable edge weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TopoGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, usize)>>,
}

impl TopoGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.0 < self.nodes.len()
    }

    pub fn position(&self, id: NodeId) -> Point {
        self.nodes[id.0].position
    }

    /// `(neighbor, edge index)` pairs incident to `id`.
    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, usize)] {
        &self.adjacency[id.0]
    }

    pub fn add_node(&mut self, position: Point, kind: NodeKind) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node { id, position, kind });
        self.adjacency.push(Vec::new());
        id
    }

    /// Add an edge whose base length is the chord length between its endpoints.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> Result<usize, GraphError> {
        let len = self.position(a).dist(self.position(b));
        self.add_edge_with_length(a, b, len)
    }

    pub fn add_edge_with_length(
        &mut self,
        a: NodeId,
        b: NodeId,
        base_length: f64,
    ) -> Result<usize, GraphError> {
        for n in [a, b] {
            if !self.contains(n) {
                return Err(GraphError::UnknownNode(n));
            }
        }
        if a == b || !(base_length > 0.0) || !base_length.is_finite() {
            return Err(GraphError::DegenerateEdge { a, b });
        }
        let idx = self.edges.len();
        self.edges.push(Edge {
            a,
            b,
            base_length,
            weight: base_length,
        });
        self.adjacency[a.0].push((b, idx));
        self.adjacency[b.0].push((a, idx));
        Ok(idx)
    }

    /// Node closest to `position`; ties resolve to the smallest id.
    pub fn nearest_node(&self, position: Point) -> Result<NodeId, GraphError> {
        let mut best: Option<(NodeId, f64)> = None;
        for n in &self.nodes {
            let d = n.position.dist(position);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((n.id, d));
            }
        }
        best.map(|(id, _)| id).ok_or(GraphError::Empty)
    }

    /// Closest point on any edge chord: `(edge index, point, distance)`.
    pub fn nearest_edge_point(&self, position: Point) -> Option<(usize, Point, f64)> {
        let mut best: Option<(usize, Point, f64)> = None;
        for (i, e) in self.edges.iter().enumerate() {
            let (pa, pb) = (self.position(e.a), self.position(e.b));
            let ab = pb - pa;
            let len2 = ab.dot(ab);
            let s = if len2 > 0.0 {
                ((position - pa).dot(ab) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let q = pa.lerp(pb, s);
            let d = q.dist(position);
            if best.map_or(true, |(_, _, bd)| d < bd) {
                best = Some((i, q, d));
            }
        }
        best
    }

    /// Register a point of interest, linking it to the nearest existing node.
    ///
    /// A POI coincident with an existing node upgrades that node's kind and
    /// returns its id instead of creating a zero-length edge.
    pub fn register_poi(&mut self, position: Point, kind: NodeKind) -> Result<NodeId, GraphError> {
        let anchor = self.nearest_node(position).map_err(|_| GraphError::NoAnchor)?;
        self.attach_poi(position, kind, anchor)
    }

    /// Like [`register_poi`](Self::register_poi) but with an explicit anchor node.
    pub fn attach_poi(
        &mut self,
        position: Point,
        kind: NodeKind,
        anchor: NodeId,
    ) -> Result<NodeId, GraphError> {
        if !self.contains(anchor) {
            return Err(GraphError::UnknownNode(anchor));
        }
        if self.position(anchor).dist(position) < MERGE_DISTANCE {
            self.nodes[anchor.0].kind = kind;
            return Ok(anchor);
        }
        let id = self.add_node(position, kind);
        self.add_edge(anchor, id)?;
        Ok(id)
    }

    /// Insert a waypoint on the nearest edge at the projection of `position`
    /// (or reuse an endpoint when the projection lands on it).
    pub fn split_nearest_edge(&mut self, position: Point) -> Result<NodeId, GraphError> {
        let (edge_idx, q, _) = self
            .nearest_edge_point(position)
            .ok_or(GraphError::NoAnchor)?;
        let Edge { a, b, base_length, .. } = self.edges[edge_idx].clone();
        let (pa, pb) = (self.position(a), self.position(b));
        let chord = pa.dist(pb);
        let s = if chord > 0.0 { pa.dist(q) / chord } else { 0.0 };
        if s * base_length < MERGE_DISTANCE {
            return Ok(a);
        }
        if (1.0 - s) * base_length < MERGE_DISTANCE {
            return Ok(b);
        }
        let mid = self.add_node(q, NodeKind::Waypoint);
        // Reuse the old edge slot for a-mid and append mid-b.
        let new_idx = self.edges.len();
        self.edges[edge_idx].b = mid;
        self.edges[edge_idx].base_length = base_length * s;
        self.edges[edge_idx].weight = base_length * s;
        self.edges.push(Edge {
            a: mid,
            b,
            base_length: base_length * (1.0 - s),
            weight: base_length * (1.0 - s),
        });
        for entry in self.adjacency[a.0].iter_mut() {
            if entry.1 == edge_idx {
                entry.0 = mid;
            }
        }
        for entry in self.adjacency[b.0].iter_mut() {
            if entry.1 == edge_idx {
                *entry = (mid, new_idx);
            }
        }
        self.adjacency[mid.0].push((a, edge_idx));
        self.adjacency[mid.0].push((b, new_idx));
        Ok(mid)
    }

    /// Restore every edge weight to its base length.
    pub fn reset_weights(&mut self) {
        for e in &mut self.edges {
            e.weight = e.base_length;
        }
    }

    fn edge_midpoint(&self, e: &Edge) -> Point {
        self.position(e.a).lerp(self.position(e.b), 0.5)
    }

    /// Penalize edges near smoke: `w *= 1 + c_s * (1 - d / r_s)` for each smoke
    /// whose radius covers the edge midpoint.
    pub fn apply_smoke_weights(&mut self, smokes: &[SmokeZone], c_s: f64) {
        for smoke in smokes.iter().filter(|s| s.radius > 0.0) {
            for i in 0..self.edges.len() {
                let d = self.edge_midpoint(&self.edges[i]).dist(smoke.center);
                if d < smoke.radius {
                    self.edges[i].weight *= 1.0 + c_s * (1.0 - d / smoke.radius);
                }
            }
        }
    }

    /// Penalize edges near observed adversaries: `w *= 1 + gamma * c_a` per
    /// adversary whose influence radius covers the edge midpoint.
    pub fn apply_caution_weights(&mut self, adversaries: &[AdversaryZone], gamma: f64, c_a: f64) {
        let factor = 1.0 + gamma.clamp(0.0, 1.0) * c_a;
        if factor == 1.0 {
            return;
        }
        for adv in adversaries.iter().filter(|a| a.observed) {
            for i in 0..self.edges.len() {
                let d = self.edge_midpoint(&self.edges[i]).dist(adv.position);
                if d <= adv.radius {
                    self.edges[i].weight *= factor;
                }
            }
        }
    }

    /// Text export: `node id x y kind` and `edge a b base_length` records.
    pub fn to_export_text(&self) -> String {
        let mut out = String::from("# topo graph\n");
        for n in &self.nodes {
            out.push_str(&format!(
                "node {} {} {} {}\n",
                n.id,
                n.position.x,
                n.position.y,
                n.kind.as_str()
            ));
        }
        for e in &self.edges {
            out.push_str(&format!("edge {} {} {}\n", e.a, e.b, e.base_length));
        }
        out
    }

    pub fn from_export_text(text: &str) -> Result<Self, GraphError> {
        let mut g = TopoGraph::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| GraphError::Parse { line: i + 1, reason };
            let f: Vec<&str> = line.split_whitespace().collect();
            match f.as_slice() {
                ["node", id, x, y, kind] => {
                    let id: usize = id.parse().map_err(|_| err("bad node id".into()))?;
                    if id != g.node_count() {
                        return Err(err(format!("node ids must be dense, got {id}")));
                    }
                    let x: f64 = x.parse().map_err(|_| err("bad x".into()))?;
                    let y: f64 = y.parse().map_err(|_| err("bad y".into()))?;
                    let kind: NodeKind = kind.parse().map_err(|e: GraphError| err(e.to_string()))?;
                    g.add_node(Point::new(x, y), kind);
                }
                ["edge", a, b, len] => {
                    let a: usize = a.parse().map_err(|_| err("bad edge endpoint".into()))?;
                    let b: usize = b.parse().map_err(|_| err("bad edge endpoint".into()))?;
                    let len: f64 = len.parse().map_err(|_| err("bad length".into()))?;
                    g.add_edge_with_length(NodeId(a), NodeId(b), len)
                        .map_err(|e| err(e.to_string()))?;
                }
                _ => return Err(err(format!("unrecognized record `{line}`"))),
            }
        }
        Ok(g)
    }
}

fn m_neighbors(sk: &Skeleton, p: Pixel) -> Vec<Pixel> {
    let (x, y) = (p.x as isize, p.y as isize);
    let mut out = Vec::with_capacity(8);
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            if (dx, dy) == (0, 0) || !sk.contains(x + dx, y + dy) {
                continue;
            }
            // Mixed adjacency: a diagonal link is dropped when a 4-connected
            // detour through a shared neighbor exists.
            if dx != 0 && dy != 0 && (sk.contains(x + dx, y) || sk.contains(x, y + dy)) {
                continue;
            }
            out.push(Pixel::new((x + dx) as usize, (y + dy) as usize));
        }
    }
    out
}

/// Collapse a skeleton into a topological graph: one node per pixel whose
/// degree differs from 2, with degree-2 chains merged into single edges.
pub fn build_graph(skeleton: &Skeleton, resolution: f64) -> TopoGraph {
    let mut g = TopoGraph::new();
    let pixels: Vec<Pixel> = skeleton.iter().collect();
    if pixels.is_empty() {
        return g;
    }
    let (w, h) = (skeleton.width(), skeleton.height());
    let center = |p: Pixel| Point::new((p.x as f64 + 0.5) * resolution, (p.y as f64 + 0.5) * resolution);
    let step_len = |a: Pixel, b: Pixel| if a.x != b.x && a.y != b.y { std::f64::consts::SQRT_2 } else { 1.0 } * resolution;

    let nbrs: Vec<Vec<Pixel>> = pixels.iter().map(|&p| m_neighbors(skeleton, p)).collect();
    let mut pixel_index = vec![usize::MAX; w * h];
    for (i, p) in pixels.iter().enumerate() {
        pixel_index[p.y * w + p.x] = i;
    }
    let idx = |p: Pixel| pixel_index[p.y * w + p.x];

    let mut node_of = vec![None; pixels.len()];
    for (i, &p) in pixels.iter().enumerate() {
        if nbrs[i].len() != 2 {
            let kind = if nbrs[i].len() >= 3 { NodeKind::Junction } else { NodeKind::Waypoint };
            node_of[i] = Some(g.add_node(center(p), kind));
        }
    }

    let mut used_steps: HashSet<(usize, usize)> = HashSet::new();
    let mut on_chain = vec![false; pixels.len()];

    // Walk from `start` through `first`, stopping at the next node pixel.
    let trace = |start: usize,
                     first: usize,
                     node_of: &Vec<Option<NodeId>>,
                     used: &mut HashSet<(usize, usize)>,
                     on_chain: &mut Vec<bool>|
     -> Option<(usize, f64, Vec<usize>)> {
        if !used.insert((start, first)) {
            return None;
        }
        let mut prev = start;
        let mut cur = first;
        let mut len = step_len(pixels[start], pixels[first]);
        let mut chain = vec![start];
        loop {
            if node_of[cur].is_some() || (cur == start) {
                used.insert((cur, prev));
                chain.push(cur);
                return Some((cur, len, chain));
            }
            on_chain[cur] = true;
            chain.push(cur);
            let next = nbrs[cur].iter().map(|&q| idx(q)).find(|&q| q != prev)?;
            len += step_len(pixels[cur], pixels[next]);
            prev = cur;
            cur = next;
        }
    };

    for i in 0..pixels.len() {
        let Some(a) = node_of[i] else { continue };
        for q in nbrs[i].clone() {
            let j = idx(q);
            if let Some((end, len, _)) = trace(i, j, &node_of, &mut used_steps, &mut on_chain) {
                let b = node_of[end].expect("trace ends on a node");
                if a != b {
                    g.add_edge_with_length(a, b, len).expect("valid skeleton edge");
                }
            }
        }
    }

    // Closed loops of degree-2 pixels carry no node yet: anchor each at its
    // first pixel and split it halfway.
    for i in 0..pixels.len() {
        if node_of[i].is_some() || on_chain[i] {
            continue;
        }
        let a = g.add_node(center(pixels[i]), NodeKind::Waypoint);
        node_of[i] = Some(a);
        let first = idx(nbrs[i][0]);
        let Some((_, total, chain)) = trace(i, first, &node_of, &mut used_steps, &mut on_chain) else {
            continue;
        };
        if chain.len() < 4 {
            continue;
        }
        let mid_i = chain[chain.len() / 2];
        let mut half = 0.0;
        for k in 0..chain.len() / 2 {
            half += step_len(pixels[chain[k]], pixels[chain[k + 1]]);
        }
        let m = g.add_node(center(pixels[mid_i]), NodeKind::Waypoint);
        node_of[mid_i] = Some(m);
        g.add_edge_with_length(a, m, half).expect("loop half");
        g.add_edge_with_length(m, a, total - half).expect("loop half");
    }
    g
}
