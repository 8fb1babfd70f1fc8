#![allow(dead_code)]

use std::sync::Arc;

use swarm_tactics::fleet::TypeCounts;
use swarm_tactics::geometry::{Point, Rect};
use swarm_tactics::sim::{BuildingSite, Mission};
use swarm_tactics::topo_map::{NodeKind, TopoGraph};

/// A single road with one candidate building at its far end.
pub fn corridor_mission(seed: u64) -> Mission {
    let mut g = TopoGraph::new();
    let a = g.add_node(Point::new(10.0, 75.0), NodeKind::Waypoint);
    let b = g.add_node(Point::new(150.0, 75.0), NodeKind::Waypoint);
    g.add_edge(a, b).unwrap();
    let site = BuildingSite::attach(&mut g, "t", Rect::new(140.0, 85.0, 20.0, 20.0), Point::new(150.0, 85.0), true).unwrap();
    Mission {
        graph: Arc::new(g),
        width: 200.0,
        height: 150.0,
        buildings: vec![site],
        true_target: 0,
        robots: TypeCounts::new(3, 3, 3),
        spawn: Rect::new(8.0, 73.0, 4.0, 4.0),
        static_adversaries: vec![],
        dynamic_adversaries: vec![],
        smokes: vec![],
        t_f: 600.0,
        seed,
    }
}
