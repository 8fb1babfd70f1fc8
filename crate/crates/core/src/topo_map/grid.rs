use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::geometry::Point;

use super::MapError;

/// Class of a single occupancy-grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    Road,
    Obstacle,
    BuildingInterior,
}

impl CellClass {
    fn from_char(c: char) -> Option<Self> {
        match c {
            '.' => Some(CellClass::Road),
            '#' => Some(CellClass::Obstacle),
            'B' => Some(CellClass::BuildingInterior),
            _ => None,
        }
    }

    fn to_char(self) -> char {
        match self {
            CellClass::Road => '.',
            CellClass::Obstacle => '#',
            CellClass::BuildingInterior => 'B',
        }
    }
}

/// Row-major occupancy grid. Row 0 is the first map line; cell `(x, y)` has its
/// center at `((x + 0.5) * res, (y + 0.5) * res)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<CellClass>,
}

impl OccupancyGrid {
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        cells: Vec<CellClass>,
    ) -> Result<Self, MapError> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(MapError::Resolution(resolution));
        }
        if width * height != cells.len() {
            return Err(MapError::CellCount {
                expected: width * height,
                found: cells.len(),
            });
        }
        Ok(Self {
            width,
            height,
            resolution,
            cells,
        })
    }

    /// Grid filled with a single class.
    pub fn filled(width: usize, height: usize, resolution: f64, class: CellClass) -> Self {
        Self::new(width, height, resolution, vec![class; width * height])
            .expect("valid filled grid")
    }

    /// Parse the ASCII map format: a `W H RES` header line followed by `H` rows
    /// of `W` characters (`.` road, `#` obstacle, `B` building interior).
    pub fn parse(text: &str) -> Result<Self, MapError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (header_line, header) = lines.next().ok_or(MapError::Header {
            line: 1,
            reason: "missing header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let header_err = |reason: &str| MapError::Header {
            line: header_line + 1,
            reason: reason.into(),
        };
        if fields.len() != 3 {
            return Err(header_err("expected `W H RES`"));
        }
        let width: usize = fields[0].parse().map_err(|_| header_err("bad width"))?;
        let height: usize = fields[1].parse().map_err(|_| header_err("bad height"))?;
        let resolution: f64 = fields[2].parse().map_err(|_| header_err("bad resolution"))?;

        let mut cells = Vec::with_capacity(width * height);
        let mut rows = 0;
        for (idx, line) in lines {
            let row = line.trim_end();
            if rows == height {
                return Err(MapError::RowCount {
                    expected: height,
                    found: rows + 1,
                });
            }
            if row.chars().count() != width {
                return Err(MapError::RowLength {
                    line: idx + 1,
                    expected: width,
                    found: row.chars().count(),
                });
            }
            for (col, ch) in row.chars().enumerate() {
                let class = CellClass::from_char(ch).ok_or(MapError::UnknownCell {
                    line: idx + 1,
                    column: col + 1,
                    ch,
                })?;
                cells.push(class);
            }
            rows += 1;
        }
        if rows != height {
            return Err(MapError::RowCount {
                expected: height,
                found: rows,
            });
        }
        Self::new(width, height, resolution, cells)
    }

    pub fn to_ascii(&self) -> String {
        let mut out = format!("{} {} {}\n", self.width, self.height, self.resolution);
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(self.get(x, y).to_char());
            }
            out.push('\n');
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Map extent in meters.
    pub fn extent(&self) -> (f64, f64) {
        (
            self.width as f64 * self.resolution,
            self.height as f64 * self.resolution,
        )
    }

    pub fn get(&self, x: usize, y: usize) -> CellClass {
        self.cells[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, class: CellClass) {
        self.cells[y * self.width + x] = class;
    }

    pub fn is_road(&self, x: usize, y: usize) -> bool {
        self.get(x, y) == CellClass::Road
    }

    pub fn cell_center(&self, x: usize, y: usize) -> Point {
        Point::new(
            (x as f64 + 0.5) * self.resolution,
            (y as f64 + 0.5) * self.resolution,
        )
    }
}

/// Grid coordinate of a skeleton pixel; ordered row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pixel {
    pub y: usize,
    pub x: usize,
}

impl Pixel {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { y, x }
    }
}

/// Medial-axis pixels of the road region.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl Skeleton {
    pub fn from_pixels(
        width: usize,
        height: usize,
        pixels: impl IntoIterator<Item = Pixel>,
    ) -> Self {
        let mut mask = vec![false; width * height];
        for p in pixels {
            mask[p.y * width + p.x] = true;
        }
        Self {
            width,
            height,
            mask,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn contains(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.mask[y as usize * self.width + x as usize]
    }

    pub fn pixels(&self) -> BTreeSet<Pixel> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = Pixel> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &on)| on)
            .map(move |(i, _)| Pixel::new(i % self.width, i / self.width))
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Debug rendering, `o` for skeleton pixels.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for y in 0..self.height {
            for x in 0..self.width {
                s.push(if self.mask[y * self.width + x] { 'o' } else { '.' });
            }
            let _ = writeln!(s);
        }
        s
    }
}

/// Neighbor offsets P2..P9 in clockwise order starting north.
const RING: [(isize, isize); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

/// Thin the road region of `grid` to its medial axis.
///
/// Two-subiteration parallel thinning (Zhang-Suen); cells outside the grid
/// count as background.
pub fn skeletonize(grid: &OccupancyGrid) -> Skeleton {
    let (w, h) = (grid.width(), grid.height());
    let mut mask: Vec<bool> = (0..w * h).map(|i| grid.is_road(i % w, i / w)).collect();
    let at = |mask: &Vec<bool>, x: isize, y: isize| -> bool {
        x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && mask[y as usize * w + x as usize]
    };

    let mut to_clear = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            to_clear.clear();
            for y in 0..h {
                for x in 0..w {
                    if !mask[y * w + x] {
                        continue;
                    }
                    let (xi, yi) = (x as isize, y as isize);
                    let p: [bool; 8] = std::array::from_fn(|k| {
                        at(&mask, xi + RING[k].0, yi + RING[k].1)
                    });
                    let b = p.iter().filter(|&&v| v).count();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = (0..8).filter(|&k| !p[k] && p[(k + 1) % 8]).count();
                    if a != 1 {
                        continue;
                    }
                    // p[0]=N, p[2]=E, p[4]=S, p[6]=W
                    let removable = if pass == 0 {
                        !(p[0] && p[2] && p[4]) && !(p[2] && p[4] && p[6])
                    } else {
                        !(p[0] && p[2] && p[6]) && !(p[0] && p[4] && p[6])
                    };
                    if removable {
                        to_clear.push(y * w + x);
                    }
                }
            }
            if !to_clear.is_empty() {
                changed = true;
                for &i in &to_clear {
                    mask[i] = false;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Skeleton {
        width: w,
        height: h,
        mask,
    }
}

/// Exact Euclidean distance (in cells) from every road cell to the nearest
/// non-road cell; cells outside the grid count as non-road. Non-road cells get 0.
pub fn distance_transform(grid: &OccupancyGrid) -> Vec<f64> {
    // Felzenszwalb-Huttenlocher separable squared EDT on a grid padded by one
    // background cell on every side.
    let (w, h) = (grid.width() + 2, grid.height() + 2);
    const INF: f64 = 1e20;
    let mut f = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            if grid.is_road(x - 1, y - 1) {
                f[y * w + x] = INF;
            }
        }
    }
    let mut buf = vec![0.0; w.max(h)];
    let mut out = vec![0.0; w.max(h)];
    for x in 0..w {
        for y in 0..h {
            buf[y] = f[y * w + x];
        }
        edt_1d(&buf[..h], &mut out[..h]);
        for y in 0..h {
            f[y * w + x] = out[y];
        }
    }
    for y in 0..h {
        buf[..w].copy_from_slice(&f[y * w..(y + 1) * w]);
        edt_1d(&buf[..w], &mut out[..w]);
        f[y * w..(y + 1) * w].copy_from_slice(&out[..w]);
    }
    let mut dt = vec![0.0; grid.width() * grid.height()];
    for y in 0..grid.height() {
        for x in 0..grid.width() {
            dt[y * grid.width() + x] = f[(y + 1) * w + x + 1].sqrt();
        }
    }
    dt
}

fn edt_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        d[q] = dq * dq + f[p];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_from(rows: &[&str]) -> OccupancyGrid {
        let text = format!("{} {} 1\n{}", rows[0].len(), rows.len(), rows.join("\n"));
        OccupancyGrid::parse(&text).unwrap()
    }

    /// Brute-force distance to the nearest background cell (or outside the grid).
    fn brute_dt(grid: &OccupancyGrid) -> Vec<f64> {
        let (w, h) = (grid.width() as isize, grid.height() as isize);
        let mut out = vec![0.0; (w * h) as usize];
        for y in 0..h {
            for x in 0..w {
                if !grid.is_road(x as usize, y as usize) {
                    continue;
                }
                let mut best = f64::INFINITY;
                for by in -1..=h {
                    for bx in -1..=w {
                        let inside = bx >= 0 && by >= 0 && bx < w && by < h;
                        if inside && grid.is_road(bx as usize, by as usize) {
                            continue;
                        }
                        best = best.min(((bx - x) as f64).hypot((by - y) as f64));
                    }
                }
                out[(y * w + x) as usize] = best;
            }
        }
        out
    }

    #[test]
    fn parse_rejects_bad_rows() {
        let err = OccupancyGrid::parse("3 2 1\n...\n..\n").unwrap_err();
        assert!(matches!(err, MapError::RowLength { line: 3, .. }), "{err}");
        let err = OccupancyGrid::parse("3 1 1\n.x.\n").unwrap_err();
        assert!(matches!(err, MapError::UnknownCell { ch: 'x', .. }));
        assert!(OccupancyGrid::parse("3 1 0\n...\n").is_err());
        assert!(OccupancyGrid::parse("3 2 1\n...\n").is_err());
    }

    #[test]
    fn ascii_round_trip() {
        let g = grid_from(&["..#B", "#..B"]);
        assert_eq!(OccupancyGrid::parse(&g.to_ascii()).unwrap(), g);
        assert_eq!(g.extent(), (4.0, 2.0));
    }

    #[test]
    fn distance_transform_matches_brute_force() {
        let g = grid_from(&[
            "##########",
            "#......###",
            "#.......##",
            "#........#",
            "##.......#",
            "##....#..#",
            "..........",
        ]);
        let fast = distance_transform(&g);
        let slow = brute_dt(&g);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn corridor_thins_to_center_line() {
        let mut rows = vec!["#".repeat(20)];
        rows.extend(std::iter::repeat(format!("#{}#", ".".repeat(18))).take(3));
        rows.push("#".repeat(20));
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        let sk = skeletonize(&grid_from(&refs));
        assert!(!sk.is_empty());
        assert!(sk.iter().all(|p| p.y == 2), "\n{}", sk.render());
        // contiguous run
        let xs: Vec<usize> = sk.iter().map(|p| p.x).collect();
        assert!(xs.windows(2).all(|w| w[1] == w[0] + 1));
        assert!(xs.len() >= 14);
    }

    #[test]
    fn all_obstacle_grid_has_empty_skeleton() {
        let g = OccupancyGrid::filled(8, 5, 1.0, CellClass::Obstacle);
        assert!(skeletonize(&g).is_empty());
    }
}
