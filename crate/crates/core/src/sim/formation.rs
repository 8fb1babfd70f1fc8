use rand::Rng;
use rand_distr::{Distribution, UnitCircle};

use crate::geometry::Point;

use super::params::FormationParams;

/// Circular region a settled squad must occupy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub center: Point,
    pub radius: f64,
}

/// Repulsion from neighbors closer than `d_min`: `sum (d_min - d) * u_away`.
///
/// Coincident neighbors push along a random unit vector.
pub fn repulsion<R: Rng + ?Sized>(position: Point, neighbors: &[Point], d_min: f64, rng: &mut R) -> Point {
    let mut h = Point::default();
    for &q in neighbors {
        let d = position.dist(q);
        if d >= d_min {
            continue;
        }
        let away = match (position - q).unit() {
            Some(u) => u,
            None => {
                let [x, y]: [f64; 2] = UnitCircle.sample(rng);
                Point::new(x, y)
            }
        };
        h = h + away * (d_min - d);
    }
    h
}

/// Pull back into `region`: `max(0, |p - c| - r) * u_toward_center`.
pub fn region_pull(position: Point, region: &Region) -> Point {
    let offset = region.center - position;
    let excess = offset.norm() - region.radius;
    match offset.unit() {
        Some(u) if excess > 0.0 => u * excess,
        _ => Point::default(),
    }
}

/// `path_velocity + alpha * H + beta * F`, clamped to `max_speed`.
pub fn formation_velocity<R: Rng + ?Sized>(
    position: Point,
    neighbors: &[Point],
    params: &FormationParams,
    region: Option<&Region>,
    path_velocity: Point,
    max_speed: f64,
    rng: &mut R,
) -> Point {
    let h = repulsion(position, neighbors, params.d_min, rng);
    let f = region.map_or(Point::default(), |r| region_pull(position, r));
    (path_velocity + h * params.alpha + f * params.beta).clamp_len(max_speed)
}

/// One synchronous settling tick for a squad with no path left to follow.
/// Returns the largest speed commanded this tick.
pub fn settle_step<R: Rng + ?Sized>(
    positions: &mut [Point],
    region: &Region,
    params: &FormationParams,
    max_speed: f64,
    dt: f64,
    rng: &mut R,
) -> f64 {
    let mut velocities = Vec::with_capacity(positions.len());
    let mut neighbors = Vec::with_capacity(positions.len());
    for (i, &p) in positions.iter().enumerate() {
        neighbors.clear();
        neighbors.extend(positions.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &q)| q));
        velocities.push(formation_velocity(p, &neighbors, params, Some(region), Point::default(), max_speed, rng));
    }
    let mut fastest: f64 = 0.0;
    for (p, v) in positions.iter_mut().zip(&velocities) {
        *p = *p + *v * dt;
        fastest = fastest.max(v.norm());
    }
    fastest
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inside_region_without_neighbors_keeps_path_velocity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let region = Region { center: Point::new(0.0, 0.0), radius: 5.0 };
        let v = formation_velocity(
            Point::new(1.0, 1.0),
            &[Point::new(4.0, 4.0)],
            &FormationParams::default(),
            Some(&region),
            Point::new(0.3, -0.2),
            1.0,
            &mut rng,
        );
        assert_eq!(v, Point::new(0.3, -0.2));
    }

    #[test]
    fn outside_region_points_to_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let region = Region { center: Point::new(0.0, 0.0), radius: 2.0 };
        let v = formation_velocity(
            Point::new(10.0, 0.0),
            &[],
            &FormationParams::default(),
            Some(&region),
            Point::default(),
            100.0,
            &mut rng,
        );
        assert_eq!(v, Point::new(-8.0, 0.0));
    }

    #[test]
    fn half_gap_pair_repels_symmetrically() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (a, b) = (Point::new(0.0, 0.0), Point::new(0.5, 0.0));
        let ha = repulsion(a, &[b], 1.0, &mut rng);
        let hb = repulsion(b, &[a], 1.0, &mut rng);
        assert_eq!(ha, Point::new(-0.5, 0.0));
        assert_eq!(hb, Point::new(0.5, 0.0));
    }

    #[test]
    fn coincident_robots_get_unit_push() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Point::new(2.0, 2.0);
        let h = repulsion(p, &[p], 1.0, &mut rng);
        assert!((h.norm() - 1.0).abs() < 1e-12);
    }
}
