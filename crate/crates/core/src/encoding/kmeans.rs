use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fleet::RobotType;
use crate::geometry::Point;

pub const CLUSTERS_PER_TYPE: usize = 3;
const MAX_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub centroid: Point,
    pub size: usize,
}

/// Three clusters per robot type, indexed `[type][cluster]`.
///
/// Within a type clusters are ordered by size (largest first), then by
/// centroid x and y, so slot meaning is stable across calls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub clusters: [[Cluster; CLUSTERS_PER_TYPE]; 3],
}

impl ClusterSet {
    pub fn get(&self, t: RobotType, c: usize) -> &Cluster {
        &self.clusters[t.index()][c]
    }

    pub fn type_size(&self, t: RobotType) -> usize {
        self.clusters[t.index()].iter().map(|c| c.size).sum()
    }
}

fn mean(points: &[Point]) -> Option<Point> {
    if points.is_empty() {
        return None;
    }
    let s = points.iter().fold(Point::default(), |a, &p| a + p);
    Some(s * (1.0 / points.len() as f64))
}

fn nearest(p: Point, centers: &[Point]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = (p - *c).dot(p - *c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn plus_plus_init(points: &[Point], rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut centers = vec![points[rng.random_range(0..points.len())]];
    while centers.len() < CLUSTERS_PER_TYPE {
        let d2: Vec<f64> = points
            .iter()
            .map(|&p| centers.iter().map(|&c| (p - c).dot(p - c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                if u < d {
                    chosen = i;
                    break;
                }
                u -= d;
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        centers.push(points[pick]);
    }
    centers
}

/// Lloyd's k-means with k = 3, returning the final assignment of each point.
fn lloyd(points: &[Point], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut centers = plus_plus_init(points, rng);
    let mut assignment: Vec<usize> = points.iter().map(|&p| nearest(p, &centers)).collect();
    for _ in 0..MAX_ITERATIONS {
        for (k, center) in centers.iter_mut().enumerate() {
            let members: Vec<Point> = points
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == k)
                .map(|(&p, _)| p)
                .collect();
            if let Some(m) = mean(&members) {
                *center = m;
            }
        }
        let next: Vec<usize> = points.iter().map(|&p| nearest(p, &centers)).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    assignment
}

fn cluster_type(points: &[Point], fallback: Point, rng: &mut ChaCha8Rng) -> [Cluster; CLUSTERS_PER_TYPE] {
    let type_center = mean(points).unwrap_or(fallback);
    let mut groups: Vec<Vec<Point>> = vec![Vec::new(); CLUSTERS_PER_TYPE];
    if points.len() <= CLUSTERS_PER_TYPE {
        for (i, &p) in points.iter().enumerate() {
            groups[i].push(p);
        }
    } else {
        for (&p, k) in points.iter().zip(lloyd(points, rng)) {
            groups[k].push(p);
        }
    }
    let mut out: Vec<Cluster> = groups
        .iter()
        .map(|g| Cluster {
            centroid: mean(g).unwrap_or(type_center),
            size: g.len(),
        })
        .collect();
    out.sort_by(|a, b| {
        b.size
            .cmp(&a.size)
            .then(a.centroid.x.total_cmp(&b.centroid.x))
            .then(a.centroid.y.total_cmp(&b.centroid.y))
    });
    [out[0], out[1], out[2]]
}

/// Cluster the alive robots of each type into exactly three groups.
///
/// Types with at most three robots put each robot in its own cluster. Empty
/// clusters sit on the type's mean position, or on `map_center` when the type
/// has no alive robots.
pub fn cluster_robots(positions: &[Vec<Point>; 3], map_center: Point, seed: u64) -> ClusterSet {
    let mut clusters = [[Cluster { centroid: map_center, size: 0 }; CLUSTERS_PER_TYPE]; 3];
    for (t, pts) in positions.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(3).wrapping_add(t as u64));
        clusters[t] = cluster_type(pts, map_center, &mut rng);
    }
    ClusterSet { clusters }
}
