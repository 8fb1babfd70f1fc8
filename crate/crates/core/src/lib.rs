//! Swarm tactics learning for heterogeneous UAV/UGV search-and-rescue missions.

pub mod a2c;
pub mod encoding;
pub mod fleet;
pub mod geometry;
pub mod harness;
pub mod neuroevo;
pub mod reward;
pub mod sim;
pub mod topo_map;
