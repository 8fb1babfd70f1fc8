use std::sync::{Arc, OnceLock};

use crate::geometry::{Point, Rect};
use crate::topo_map::{graph_from_grid, CellClass, OccupancyGrid, TopoGraph};

/// The bundled 300 m x 150 m urban map at 2 m per cell.
pub const DEFAULT_MAP: &str = include_str!("../../assets/default_map.txt");
pub const DEFAULT_MAP_REF: &str = "@default";

const RESOLUTION: f64 = 2.0;
const WIDTH: usize = 150;
const HEIGHT: usize = 75;
const STREETS: [usize; 3] = [8, 37, 66];
const AVENUES: [usize; 4] = [8, 52, 97, 141];
const BUILDING_HALF_WIDTH: usize = 8;
const OVERHANG: usize = 5;

/// A building footprint with its door on the street side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildingTemplate {
    pub rect: Rect,
    pub entrance: Point,
}

fn cells_to_rect(x0: usize, y0: usize, x1: usize, y1: usize) -> Rect {
    let r = RESOLUTION;
    Rect::new(x0 as f64 * r, y0 as f64 * r, (x1 - x0) as f64 * r, (y1 - y0) as f64 * r)
}

/// Two buildings per block: one facing the street above, one the street below.
/// Ordered block by block, row-major, north building first.
pub fn default_buildings() -> Vec<BuildingTemplate> {
    let mut out = Vec::new();
    for rows in STREETS.windows(2) {
        let (top, bottom) = (rows[0] + 4, rows[1] - 3);
        for cols in AVENUES.windows(2) {
            let cx = (cols[0] + cols[1]) / 2;
            let (x0, x1) = (cx - BUILDING_HALF_WIDTH, cx + BUILDING_HALF_WIDTH);
            let north = cells_to_rect(x0, top, x1, top + 9);
            out.push(BuildingTemplate { rect: north, entrance: Point::new(north.center().x, north.y) });
            let south = cells_to_rect(x0, bottom - 9, x1, bottom);
            out.push(BuildingTemplate { rect: south, entrance: Point::new(south.center().x, south.y + south.h) });
        }
    }
    out
}

/// Procedural source of the bundled map: a 3 x 4 street grid of 6 m roads,
/// building interiors from [`default_buildings`], obstacles elsewhere. Roads
/// run a few cells past the outer junctions so corners become crossings
/// rather than bends, keeping every graph edge straight.
pub fn generate_default_grid() -> OccupancyGrid {
    let mut grid = OccupancyGrid::filled(WIDTH, HEIGHT, RESOLUTION, CellClass::Obstacle);
    let (x_lo, x_hi) = (AVENUES[0], AVENUES[AVENUES.len() - 1]);
    let (y_lo, y_hi) = (STREETS[0], STREETS[STREETS.len() - 1]);
    for &s in &STREETS {
        for y in s - 1..=s + 1 {
            for x in x_lo - OVERHANG..=x_hi + OVERHANG {
                grid.set(x, y, CellClass::Road);
            }
        }
    }
    for &a in &AVENUES {
        for x in a - 1..=a + 1 {
            for y in y_lo - OVERHANG..=y_hi + OVERHANG {
                grid.set(x, y, CellClass::Road);
            }
        }
    }
    for b in default_buildings() {
        let r = b.rect;
        let (x0, y0) = ((r.x / RESOLUTION) as usize, (r.y / RESOLUTION) as usize);
        let (x1, y1) = (((r.x + r.w) / RESOLUTION) as usize, ((r.y + r.h) / RESOLUTION) as usize);
        for y in y0..y1 {
            for x in x0..x1 {
                grid.set(x, y, CellClass::BuildingInterior);
            }
        }
    }
    grid
}

/// Road graph of the bundled map, built once.
pub fn default_graph() -> Arc<TopoGraph> {
    static GRAPH: OnceLock<Arc<TopoGraph>> = OnceLock::new();
    GRAPH
        .get_or_init(|| {
            let grid = OccupancyGrid::parse(DEFAULT_MAP).expect("bundled map parses");
            Arc::new(graph_from_grid(&grid))
        })
        .clone()
}

/// Default spawn area around the western middle junction.
pub fn default_spawn() -> Rect {
    Rect::new(10.0, 68.0, 14.0, 14.0)
}
