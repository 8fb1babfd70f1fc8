use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::map::{default_graph, default_spawn, DEFAULT_MAP, DEFAULT_MAP_REF};
use crate::fleet::TypeCounts;
use crate::geometry::{Point, Rect};
use crate::sim::{BuildingSite, DynamicAdversarySpec, Mission, StaticAdversary};
use crate::topo_map::{graph_from_grid, GraphError, MapError, OccupancyGrid, SmokeZone, TopoGraph};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: field `{field}`: {message}")]
    Schema {
        path: PathBuf,
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}:{line}: field `{field}`: {message}")]
    Invalid {
        path: PathBuf,
        field: String,
        line: usize,
        message: String,
    },
    #[error("map {path}: {source}")]
    Map {
        path: PathBuf,
        #[source]
        source: MapError,
    },
    #[error("field `{field}`: {source}")]
    Graph {
        field: String,
        #[source]
        source: GraphError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingConfig {
    pub id: String,
    /// `[x, y, w, h]`, m.
    pub rect: [f64; 4],
    pub entrance: [f64; 2],
    #[serde(default = "yes")]
    pub candidate: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    #[serde(default = "default_ugv")]
    pub ugv: usize,
    #[serde(default = "default_uav")]
    pub uav_a: usize,
    #[serde(default = "default_uav")]
    pub uav_b: usize,
    #[serde(default = "default_spawn_box")]
    pub spawn: [f64; 4],
}

fn default_ugv() -> usize {
    12
}

fn default_uav() -> usize {
    6
}

fn default_spawn_box() -> [f64; 4] {
    let r = default_spawn();
    [r.x, r.y, r.w, r.h]
}

impl Default for RobotConfig {
    fn default() -> Self {
        Self { ugv: default_ugv(), uav_a: default_uav(), uav_b: default_uav(), spawn: default_spawn_box() }
    }
}

impl RobotConfig {
    pub fn counts(&self) -> TypeCounts {
        TypeCounts::new(self.ugv, self.uav_a, self.uav_b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticAdversaryConfig {
    pub x: f64,
    pub y: f64,
    pub kill_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicAdversaryConfig {
    pub waypoints: Vec<[f64; 2]>,
    pub size: usize,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmokeConfig {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

/// One mission instance as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Map file relative to the scenario file, or `@default`.
    #[serde(default = "default_map_ref")]
    pub map: String,
    pub buildings: Vec<BuildingConfig>,
    /// Id of the building holding the victims.
    pub true_target: String,
    #[serde(default)]
    pub robots: RobotConfig,
    #[serde(default)]
    pub static_adversaries: Vec<StaticAdversaryConfig>,
    #[serde(default)]
    pub dynamic_adversaries: Vec<DynamicAdversaryConfig>,
    #[serde(default)]
    pub smokes: Vec<SmokeConfig>,
    /// Time limit, minutes.
    #[serde(default = "default_t_f")]
    pub t_f: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_map_ref() -> String {
    DEFAULT_MAP_REF.into()
}

fn default_t_f() -> f64 {
    40.0
}

/// A validation failure: the offending field path, the JSON key to point at
/// and which occurrence of that key in the document.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub key: String,
    pub occurrence: usize,
    pub message: String,
}

fn field_error(field: impl Into<String>, key: &str, occurrence: usize, message: impl Into<String>) -> FieldError {
    FieldError { field: field.into(), key: key.into(), occurrence, message: message.into() }
}

fn point(p: [f64; 2]) -> Point {
    Point::new(p[0], p[1])
}

fn rect(r: [f64; 4]) -> Rect {
    Rect::new(r[0], r[1], r[2], r[3])
}

impl ScenarioConfig {
    /// Time limit in seconds.
    pub fn t_f_seconds(&self) -> f64 {
        self.t_f * 60.0
    }

    pub fn target_index(&self) -> Option<usize> {
        self.buildings.iter().position(|b| b.id == self.true_target)
    }

    /// Check the invariants that do not need the map, then the geometry
    /// against a `width x height` extent.
    pub fn validate(&self, width: f64, height: f64) -> Result<(), FieldError> {
        if !(self.t_f > 0.0) || !self.t_f.is_finite() {
            return Err(field_error("t_f", "t_f", 0, "time limit must be positive"));
        }
        if self.buildings.is_empty() {
            return Err(field_error("buildings", "buildings", 0, "at least one building required"));
        }
        for (i, b) in self.buildings.iter().enumerate() {
            if self.buildings[..i].iter().any(|o| o.id == b.id) {
                return Err(field_error(format!("buildings[{i}].id"), "id", i, format!("duplicate id `{}`", b.id)));
            }
        }
        match self.target_index() {
            None => return Err(field_error("true_target", "true_target", 0, format!("no building `{}`", self.true_target))),
            Some(i) if !self.buildings[i].candidate => {
                return Err(field_error("true_target", "true_target", 0, format!("building `{}` is not a candidate", self.true_target)))
            }
            _ => {}
        }
        let inside = |p: Point| p.is_finite() && (0.0..=width).contains(&p.x) && (0.0..=height).contains(&p.y);
        let rect_inside = |r: Rect| r.w > 0.0 && r.h > 0.0 && inside(Point::new(r.x, r.y)) && inside(Point::new(r.x + r.w, r.y + r.h));
        for (i, b) in self.buildings.iter().enumerate() {
            if !rect_inside(rect(b.rect)) {
                return Err(field_error(format!("buildings[{i}].rect"), "rect", i, "footprint must be non-empty and inside the map"));
            }
            if !inside(point(b.entrance)) {
                return Err(field_error(format!("buildings[{i}].entrance"), "entrance", i, "entrance outside the map"));
            }
        }
        if !rect_inside(rect(self.robots.spawn)) {
            return Err(field_error("robots.spawn", "spawn", 0, "spawn area must be non-empty and inside the map"));
        }
        for (i, s) in self.static_adversaries.iter().enumerate() {
            if !inside(Point::new(s.x, s.y)) {
                return Err(field_error(format!("static_adversaries[{i}]"), "kill_radius", i, "position outside the map"));
            }
            if !(s.kill_radius >= 0.0) {
                return Err(field_error(format!("static_adversaries[{i}].kill_radius"), "kill_radius", i, "must be non-negative"));
            }
        }
        for (i, d) in self.dynamic_adversaries.iter().enumerate() {
            if d.waypoints.is_empty() || !d.waypoints.iter().all(|&w| inside(point(w))) {
                return Err(field_error(format!("dynamic_adversaries[{i}].waypoints"), "waypoints", i, "need at least one waypoint, all inside the map"));
            }
            if !(d.speed >= 0.0) {
                return Err(field_error(format!("dynamic_adversaries[{i}].speed"), "speed", i, "must be non-negative"));
            }
        }
        for (i, s) in self.smokes.iter().enumerate() {
            if !inside(Point::new(s.x, s.y)) || !(s.radius >= 0.0) {
                return Err(field_error(format!("smokes[{i}]"), "radius", i, "center inside the map and radius non-negative"));
            }
        }
        Ok(())
    }

    /// Resolve into a mission on `base` (the map's road graph). Candidate
    /// buildings are attached first so they take the lower node ids.
    pub fn to_mission(&self, base: &TopoGraph, width: f64, height: f64) -> Result<Mission, ScenarioError> {
        let mut graph = base.clone();
        let mut sites: Vec<Option<BuildingSite>> = vec![None; self.buildings.len()];
        let order = (0..self.buildings.len())
            .filter(|&i| self.buildings[i].candidate)
            .chain((0..self.buildings.len()).filter(|&i| !self.buildings[i].candidate));
        for i in order {
            let b = &self.buildings[i];
            let site = BuildingSite::attach(&mut graph, b.id.clone(), rect(b.rect), point(b.entrance), b.candidate)
                .map_err(|source| ScenarioError::Graph { field: format!("buildings[{i}]"), source })?;
            sites[i] = Some(site);
        }
        Ok(Mission {
            graph: Arc::new(graph),
            width,
            height,
            buildings: sites.into_iter().map(|s| s.expect("every building attached")).collect(),
            true_target: self.target_index().expect("validated"),
            robots: self.robots.counts(),
            spawn: rect(self.robots.spawn),
            static_adversaries: self
                .static_adversaries
                .iter()
                .map(|s| StaticAdversary { position: Point::new(s.x, s.y), kill_radius: s.kill_radius })
                .collect(),
            dynamic_adversaries: self
                .dynamic_adversaries
                .iter()
                .map(|d| DynamicAdversarySpec { waypoints: d.waypoints.iter().map(|&w| point(w)).collect(), size: d.size, speed: d.speed })
                .collect(),
            smokes: self.smokes.iter().map(|s| SmokeZone { center: Point::new(s.x, s.y), radius: s.radius }).collect(),
            t_f: self.t_f_seconds(),
            seed: self.seed,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// 1-based line of the `occurrence`-th `"key"` in `text`, or line 1.
fn line_of(text: &str, key: &str, occurrence: usize) -> usize {
    let needle = format!("\"{key}\"");
    text.lines()
        .enumerate()
        .flat_map(|(i, l)| std::iter::repeat(i + 1).take(l.matches(&needle).count()))
        .nth(occurrence)
        .unwrap_or(1)
}

/// Parse scenario JSON; schema errors name the field path and position.
pub fn parse_scenario(text: &str, path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        ScenarioError::Schema {
            path: path.to_path_buf(),
            field,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })
}

/// Load a road graph and map extent from a map reference.
pub fn load_map(reference: &str, base_dir: &Path) -> Result<(Arc<TopoGraph>, f64, f64), ScenarioError> {
    if reference == DEFAULT_MAP_REF {
        let grid = OccupancyGrid::parse(DEFAULT_MAP).expect("bundled map parses");
        let (w, h) = grid.extent();
        return Ok((default_graph(), w, h));
    }
    let path = base_dir.join(reference);
    let text = std::fs::read_to_string(&path).map_err(|source| ScenarioError::Io { path: path.clone(), source })?;
    let grid = OccupancyGrid::parse(&text).map_err(|source| ScenarioError::Map { path: path.clone(), source })?;
    let (w, h) = grid.extent();
    Ok((Arc::new(graph_from_grid(&grid)), w, h))
}

/// A scenario file resolved into its config and mission.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub id: String,
    pub path: PathBuf,
    pub config: ScenarioConfig,
    pub mission: Mission,
}

/// Read, validate and resolve a scenario file.
pub fn load_scenario(path: &Path) -> Result<LoadedScenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    let config = parse_scenario(&text, path)?;
    let base_dir = path.parent().unwrap_or(Path::new("."));
    let (graph, w, h) = load_map(&config.map, base_dir)?;
    config.validate(w, h).map_err(|e| ScenarioError::Invalid {
        path: path.to_path_buf(),
        line: line_of(&text, &e.key, e.occurrence),
        field: e.field,
        message: e.message,
    })?;
    let mission = config.to_mission(&graph, w, h)?;
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(LoadedScenario { id, path: path.to_path_buf(), config, mission })
}

/// Every `*.json` scenario in `dir`, sorted by file name.
pub fn load_scenario_dir(dir: &Path) -> Result<Vec<LoadedScenario>, ScenarioError> {
    let entries = std::fs::read_dir(dir).map_err(|source| ScenarioError::Io { path: dir.to_path_buf(), source })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_scenario(p)).collect()
}

pub fn save_scenario(config: &ScenarioConfig, path: &Path) -> Result<(), ScenarioError> {
    std::fs::write(path, config.to_json() + "\n").map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })
}
