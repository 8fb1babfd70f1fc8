//! Urban map abstraction: occupancy grid, medial-axis skeleton, topological
//! road graph with points of interest, and reweighted shortest paths.

mod graph;
mod grid;
mod path;

pub use graph::{build_graph, AdversaryZone, Edge, Node, NodeId, NodeKind, SmokeZone, TopoGraph};
pub use grid::{distance_transform, skeletonize, CellClass, OccupancyGrid, Pixel, Skeleton};
pub use path::{distances_from, shortest_path, PathTree, Route};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("map header (line {line}): {reason}")]
    Header { line: usize, reason: String },
    #[error("map line {line}: expected {expected} cells, found {found}")]
    RowLength {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("map line {line}, column {column}: unknown cell `{ch}`")]
    UnknownCell { line: usize, column: usize, ch: char },
    #[error("map: expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("map: expected {expected} cells, found {found}")]
    CellCount { expected: usize, found: usize },
    #[error("map resolution must be positive, got {0}")]
    Resolution(f64),
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("no anchor node")]
    NoAnchor,
    #[error("graph is empty")]
    Empty,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("degenerate edge {a}-{b}")]
    DegenerateEdge { a: NodeId, b: NodeId },
    #[error("graph text line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Skeletonize the road region of `grid` and collapse it into a graph.
pub fn graph_from_grid(grid: &OccupancyGrid) -> TopoGraph {
    build_graph(&skeletonize(grid), grid.resolution())
}
