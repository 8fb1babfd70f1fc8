use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::map::{default_buildings, default_graph, default_spawn, DEFAULT_MAP_REF};
use super::scenario::{
    save_scenario, BuildingConfig, DynamicAdversaryConfig, RobotConfig, ScenarioConfig, ScenarioError, SmokeConfig,
    StaticAdversaryConfig,
};
use crate::geometry::Point;

/// Indices into [`default_buildings`] that may hold the victims.
pub const CANDIDATE_BUILDINGS: [usize; 3] = [2, 7, 11];

/// Ranges for randomly drawn scenarios on the bundled map. Ranges are
/// inclusive `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSpec {
    pub count: usize,
    pub seed: u64,
    pub ugv: (usize, usize),
    /// Aerial robots in total, split evenly between the two aerial types.
    pub uav: (usize, usize),
    pub static_adversaries: (usize, usize),
    /// Dynamic adversary units, grouped into squads of 1 to 3.
    pub dynamic_units: (usize, usize),
    pub smokes: (usize, usize),
    pub smoke_radius: (f64, f64),
    pub t_f_minutes: f64,
}

impl PoolSpec {
    /// Training pool of the first experiment: large fleets, two static
    /// adversaries and 10 m smoke.
    pub fn exp1_train(seed: u64) -> Self {
        Self {
            count: 15,
            seed,
            ugv: (10, 40),
            uav: (10, 40),
            static_adversaries: (2, 2),
            dynamic_units: (0, 0),
            smokes: (1, 2),
            smoke_radius: (10.0, 10.0),
            t_f_minutes: 40.0,
        }
    }

    /// Training and test pools of the later experiments.
    pub fn exp2(count: usize, seed: u64) -> Self {
        Self {
            count,
            seed,
            ugv: (6, 24),
            uav: (12, 36),
            static_adversaries: (0, 6),
            dynamic_units: (0, 14),
            smokes: (0, 3),
            smoke_radius: (0.0, 10.0),
            t_f_minutes: 40.0,
        }
    }

    /// No adversaries and no smoke.
    pub fn adversary_free(count: usize, seed: u64) -> Self {
        Self {
            static_adversaries: (0, 0),
            dynamic_units: (0, 0),
            smokes: (0, 0),
            ..Self::exp2(count, seed)
        }
    }

    /// Dynamic adversaries only, always at least a few units.
    pub fn dynamic_threat(count: usize, seed: u64) -> Self {
        Self {
            static_adversaries: (0, 0),
            dynamic_units: (4, 14),
            smokes: (0, 0),
            ..Self::exp2(count, seed)
        }
    }

    /// Named pools for the command line.
    pub fn named(name: &str, count: Option<usize>, seed: u64) -> Option<Self> {
        let spec = match name {
            "exp1-train" => Self::exp1_train(seed),
            "exp2-train" => Self::exp2(15, seed),
            "exp2-test" => Self::exp2(54, seed),
            "adversary-free" => Self::adversary_free(3, seed),
            "dynamic" => Self::dynamic_threat(10, seed),
            _ => return None,
        };
        Some(match count {
            Some(count) => Self { count, ..spec },
            None => spec,
        })
    }

    pub const NAMES: [&'static str; 5] = ["exp1-train", "exp2-train", "exp2-test", "adversary-free", "dynamic"];
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (usize, usize)) -> usize {
    rng.random_range(lo..=hi.max(lo))
}

/// A random point on a random road edge at least `clearance` from `avoid`.
fn road_point(rng: &mut ChaCha8Rng, avoid: Point, clearance: f64) -> Point {
    let graph = default_graph();
    loop {
        let e = graph.edges().choose(rng).expect("bundled map has roads");
        let p = graph.position(e.a).lerp(graph.position(e.b), rng.random::<f64>());
        if p.dist(avoid) >= clearance {
            return p;
        }
    }
}

fn round(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn pair(p: Point) -> [f64; 2] {
    [round(p.x), round(p.y)]
}

/// Draw `spec.count` scenarios on the bundled map.
pub fn generate_pool(spec: &PoolSpec) -> Vec<ScenarioConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let templates = default_buildings();
    let spawn = default_spawn();
    let home = spawn.center();
    (0..spec.count)
        .map(|_| {
            let buildings: Vec<BuildingConfig> = templates
                .iter()
                .enumerate()
                .map(|(i, t)| BuildingConfig {
                    id: format!("b{i}"),
                    rect: [t.rect.x, t.rect.y, t.rect.w, t.rect.h],
                    entrance: [t.entrance.x, t.entrance.y],
                    candidate: CANDIDATE_BUILDINGS.contains(&i),
                })
                .collect();
            let target = *CANDIDATE_BUILDINGS.choose(&mut rng).expect("non-empty");
            let uav = draw(&mut rng, spec.uav);
            let robots = RobotConfig {
                ugv: draw(&mut rng, spec.ugv),
                uav_a: uav / 2,
                uav_b: uav - uav / 2,
                spawn: [spawn.x, spawn.y, spawn.w, spawn.h],
            };
            let static_adversaries = (0..draw(&mut rng, spec.static_adversaries))
                .map(|_| {
                    let p = road_point(&mut rng, home, 40.0);
                    StaticAdversaryConfig { x: round(p.x), y: round(p.y), kill_radius: round(rng.random_range(4.0..8.0)) }
                })
                .collect();
            let mut dynamic_adversaries = Vec::new();
            let mut units = draw(&mut rng, spec.dynamic_units);
            while units > 0 {
                let size = rng.random_range(1..=3usize).min(units);
                units -= size;
                let waypoints = (0..rng.random_range(2..=3)).map(|_| pair(road_point(&mut rng, home, 60.0))).collect();
                dynamic_adversaries.push(DynamicAdversaryConfig { waypoints, size, speed: round(rng.random_range(0.5..1.5)) });
            }
            let smokes = (0..draw(&mut rng, spec.smokes))
                .map(|_| {
                    let p = road_point(&mut rng, home, 20.0);
                    let (lo, hi) = spec.smoke_radius;
                    let radius = if hi > lo { rng.random_range(lo..=hi) } else { lo };
                    SmokeConfig { x: round(p.x), y: round(p.y), radius: round(radius) }
                })
                .collect();
            ScenarioConfig {
                map: DEFAULT_MAP_REF.into(),
                buildings,
                true_target: format!("b{target}"),
                robots,
                static_adversaries,
                dynamic_adversaries,
                smokes,
                t_f: spec.t_f_minutes,
                seed: rng.random::<u32>() as u64,
            }
        })
        .collect()
}

/// Write `configs` into `dir` as `{prefix}-000.json`, `{prefix}-001.json`, ...
pub fn write_pool(configs: &[ScenarioConfig], dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|source| ScenarioError::Io { path: dir.to_path_buf(), source })?;
    configs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let path = dir.join(format!("{prefix}-{i:03}.json"));
            save_scenario(c, &path).map(|_| path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pools_respect_ranges_and_validate() {
        for spec in [PoolSpec::exp1_train(1), PoolSpec::exp2(54, 2), PoolSpec::dynamic_threat(10, 3)] {
            let pool = generate_pool(&spec);
            assert_eq!(pool.len(), spec.count);
            for s in &pool {
                s.validate(300.0, 150.0).unwrap();
                let r = &s.robots;
                assert!((spec.ugv.0..=spec.ugv.1).contains(&r.ugv));
                assert!((spec.uav.0..=spec.uav.1).contains(&(r.uav_a + r.uav_b)));
                let units: usize = s.dynamic_adversaries.iter().map(|d| d.size).sum();
                assert!((spec.dynamic_units.0..=spec.dynamic_units.1).contains(&units));
                assert!(s.smokes.iter().all(|m| m.radius <= spec.smoke_radius.1));
                assert_eq!(s.buildings.iter().filter(|b| b.candidate).count(), 3);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_pool(&PoolSpec::exp2(5, 9)), generate_pool(&PoolSpec::exp2(5, 9)));
        assert_ne!(generate_pool(&PoolSpec::exp2(5, 9)), generate_pool(&PoolSpec::exp2(5, 10)));
    }

    #[test]
    fn adversary_free_pool_is_clear() {
        for s in generate_pool(&PoolSpec::adversary_free(3, 0)) {
            assert!(s.static_adversaries.is_empty() && s.dynamic_adversaries.is_empty() && s.smokes.is_empty());
        }
    }
}
