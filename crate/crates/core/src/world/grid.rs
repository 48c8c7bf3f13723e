use super::voxel::{Occupancy, VoxelMap};
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Traversability {
    Unknown,
    Traversable,
    Obstacle,
}

/// Integer tile coordinate; signed so out-of-grid tiles are representable.
pub type TileIndex = (i64, i64);

/// 2D traversability grid at the voxel resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap2D {
    origin: Point2,
    resolution: f64,
    dims: [usize; 2],
    cells: Vec<Traversability>,
    ground: Vec<Option<f64>>,
}

impl GridMap2D {
    pub fn new(origin: Point2, resolution: f64, dims: [usize; 2], fill: Traversability) -> Self {
        assert!(resolution > 0.0);
        let n = dims[0] * dims[1];
        Self {
            origin,
            resolution,
            dims,
            cells: vec![fill; n],
            ground: vec![None; n],
        }
    }

    /// Builds a grid from rows of `'.'` (traversable), `'#'` (obstacle) and
    /// `'?'` (unknown); row `r` is `y = r`.
    pub fn from_ascii(origin: Point2, resolution: f64, rows: &[&str]) -> Self {
        let ny = rows.len();
        let nx = rows.first().map_or(0, |r| r.len());
        let mut g = Self::new(origin, resolution, [nx, ny], Traversability::Unknown);
        for (y, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), nx, "ragged grid rows");
            for (x, c) in row.chars().enumerate() {
                let t = match c {
                    '.' => Traversability::Traversable,
                    '#' => Traversability::Obstacle,
                    _ => Traversability::Unknown,
                };
                g.set((x as i64, y as i64), t);
            }
        }
        g
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn in_bounds(&self, t: TileIndex) -> bool {
        t.0 >= 0 && t.1 >= 0 && (t.0 as usize) < self.dims[0] && (t.1 as usize) < self.dims[1]
    }

    #[inline]
    fn linear(&self, t: TileIndex) -> usize {
        t.1 as usize * self.dims[0] + t.0 as usize
    }

    /// Tile containing a point, in or out of the grid.
    #[inline]
    pub fn tile_of(&self, p: Point2) -> TileIndex {
        (
            ((p.x - self.origin.x) / self.resolution).floor() as i64,
            ((p.y - self.origin.y) / self.resolution).floor() as i64,
        )
    }

    pub fn tile_center(&self, t: TileIndex) -> Point2 {
        Point2::new(
            self.origin.x + (t.0 as f64 + 0.5) * self.resolution,
            self.origin.y + (t.1 as f64 + 0.5) * self.resolution,
        )
    }

    /// Tile state; tiles outside the grid are Unknown.
    #[inline]
    pub fn state(&self, t: TileIndex) -> Traversability {
        if self.in_bounds(t) {
            self.cells[self.linear(t)]
        } else {
            Traversability::Unknown
        }
    }

    pub fn state_at(&self, p: Point2) -> Traversability {
        self.state(self.tile_of(p))
    }

    pub fn ground_height(&self, t: TileIndex) -> Option<f64> {
        if self.in_bounds(t) {
            self.ground[self.linear(t)]
        } else {
            None
        }
    }

    pub fn set(&mut self, t: TileIndex, state: Traversability) {
        assert!(self.in_bounds(t), "tile {t:?} outside grid");
        let li = self.linear(t);
        self.cells[li] = state;
    }

    pub fn count(&self, state: Traversability) -> usize {
        self.cells.iter().filter(|&&c| c == state).count()
    }

    /// Axis-aligned world rectangle `(min, max)` covering every non-Unknown tile.
    pub fn known_bounds(&self) -> Option<(Point2, Point2)> {
        let [nx, ny] = self.dims;
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0usize, 0usize);
        for y in 0..ny {
            for x in 0..nx {
                if self.cells[y * nx + x] != Traversability::Unknown {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        (x0 != usize::MAX).then(|| {
            let r = self.resolution;
            (
                Point2::new(self.origin.x + x0 as f64 * r, self.origin.y + y0 as f64 * r),
                Point2::new(self.origin.x + (x1 + 1) as f64 * r, self.origin.y + (y1 + 1) as f64 * r),
            )
        })
    }
}

/// Number of voxel layers that make up a clearance band of `height` metres.
pub fn band_layers(height: f64, edge: f64) -> i64 {
    ((height / edge) - 1e-9).ceil().max(1.0) as i64
}

/// Topmost standable ground in column `(i, j)`: an Occupied voxel whose
/// `band` voxels above are all observed Free. Returns `(k, blocked)` where
/// `blocked` reports observed occupied material with no clearance.
pub(crate) fn column_ground(map: &VoxelMap, i: i64, j: i64, band: i64) -> (Option<i64>, bool) {
    let nz = map.dims()[2] as i64;
    let mut blocked = false;
    for k in (0..nz).rev() {
        if map.get([i, j, k]) != Occupancy::Occupied {
            continue;
        }
        match clearance(map, i, j, k, band) {
            Clearance::Clear => return (Some(k), blocked),
            Clearance::Blocked => blocked = true,
            Clearance::Unobserved => {}
        }
    }
    (None, blocked)
}

#[derive(Debug, PartialEq, Eq)]
pub(crate) enum Clearance {
    Clear,
    Blocked,
    Unobserved,
}

/// Classifies the `band` voxels directly above `(i, j, k)`. Voxels above the
/// map's top count as unobserved.
pub(crate) fn clearance(map: &VoxelMap, i: i64, j: i64, k: i64, band: i64) -> Clearance {
    let nz = map.dims()[2] as i64;
    let mut unobserved = false;
    for dk in 1..=band {
        let kk = k + dk;
        if kk >= nz {
            unobserved = true;
            continue;
        }
        match map.get([i, j, kk]) {
            Occupancy::Occupied => return Clearance::Blocked,
            Occupancy::Unknown => unobserved = true,
            Occupancy::Free => {}
        }
    }
    if unobserved {
        Clearance::Unobserved
    } else {
        Clearance::Clear
    }
}

/// Derives the traversability grid from a voxel map.
///
/// A column's ground is its topmost Occupied voxel with `robot_height` of
/// observed Free voxels above it. A tile is Traversable when it has ground and
/// every 4-neighbour with ground differs in height by at most
/// `step_tolerance`; Obstacle when the step is exceeded or the column holds
/// observed material without clearance; Unknown otherwise.
pub fn derive_grid(map: &VoxelMap, robot_height: f64, step_tolerance: f64) -> GridMap2D {
    let [nx, ny, _] = map.dims();
    let origin = map.origin();
    let mut grid = GridMap2D::new(
        Point2::new(origin.x, origin.y),
        map.edge_length(),
        [nx, ny],
        Traversability::Unknown,
    );
    let band = band_layers(robot_height, map.edge_length());

    let mut blocked = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let (k, b) = column_ground(map, i as i64, j as i64, band);
            let li = j * nx + i;
            grid.ground[li] = k.map(|k| map.layer_top(k));
            blocked[li] = b;
        }
    }

    const NEIGHBOURS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    for j in 0..ny {
        for i in 0..nx {
            let li = j * nx + i;
            grid.cells[li] = match grid.ground[li] {
                Some(h) => {
                    let step_ok = NEIGHBOURS.iter().all(|&(di, dj)| {
                        grid.ground_height((i as i64 + di, j as i64 + dj))
                            .map_or(true, |hn| (hn - h).abs() <= step_tolerance + 1e-9)
                    });
                    if step_ok {
                        Traversability::Traversable
                    } else {
                        Traversability::Obstacle
                    }
                }
                None if blocked[li] => Traversability::Obstacle,
                None => Traversability::Unknown,
            };
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;

    /// Floor at layer 0, free above, fully observed.
    fn flat(n: usize, nz: usize) -> VoxelMap {
        let mut m = VoxelMap::new(Point3::default(), 0.1, [n, n, nz]);
        for (idx, _) in m.clone().iter() {
            let s = if idx[2] == 0 { Occupancy::Occupied } else { Occupancy::Free };
            m.observe(idx, s);
        }
        m
    }

    #[test]
    fn flat_scanned_floor_is_traversable() {
        let g = derive_grid(&flat(6, 8), 0.5, 0.2);
        assert_eq!(g.count(Traversability::Traversable), 36);
        assert_eq!(g.ground_height((3, 3)), Some(0.1));
    }

    #[test]
    fn unscanned_region_is_unknown() {
        let g = derive_grid(&VoxelMap::new(Point3::default(), 0.1, [5, 5, 5]), 0.3, 0.2);
        assert_eq!(g.count(Traversability::Unknown), 25);
        assert!(g.known_bounds().is_none());
    }

    #[test]
    fn missing_headroom_is_not_ground() {
        // band of 5 layers but only 3 free layers above the floor, then map top
        let g = derive_grid(&flat(3, 4), 0.5, 0.2);
        assert_eq!(g.count(Traversability::Unknown), 9);
    }

    #[test]
    fn wall_columns_are_obstacles() {
        let mut m = flat(5, 8);
        for k in 1..8 {
            m.set([2, 2, k], Occupancy::Occupied);
        }
        let g = derive_grid(&m, 0.3, 0.2);
        assert_eq!(g.state((2, 2)), Traversability::Obstacle);
        assert_eq!(g.state((1, 2)), Traversability::Traversable);
    }

    #[test]
    fn low_overhang_blocks_column() {
        let mut m = flat(3, 8);
        m.set([1, 1, 3], Occupancy::Occupied);
        let g = derive_grid(&m, 0.5, 0.2);
        // ground of (1,1) becomes the overhang top if it has clearance (layers 4..8 = 4 < 5)
        assert_eq!(g.state((1, 1)), Traversability::Obstacle);
    }

    #[test]
    fn ledge_above_step_tolerance_blocks_both_sides() {
        // 5x5 columns, e = 0.25 m; x >= 3 sits one voxel (0.25 m) higher.
        let mut m = VoxelMap::new(Point3::default(), 0.25, [5, 5, 6]);
        for (idx, _) in m.clone().iter() {
            let floor_top = if idx[0] >= 3 { 1 } else { 0 };
            let s = if idx[2] <= floor_top { Occupancy::Occupied } else { Occupancy::Free };
            m.observe(idx, s);
        }
        let g = derive_grid(&m, 0.5, 0.2);
        for y in 0..5 {
            assert_eq!(g.state((0, y)), Traversability::Traversable);
            assert_eq!(g.state((1, y)), Traversability::Traversable);
            assert_eq!(g.state((2, y)), Traversability::Obstacle);
            assert_eq!(g.state((3, y)), Traversability::Obstacle);
            assert_eq!(g.state((4, y)), Traversability::Traversable);
        }
        // the same ledge is fine with a generous tolerance
        let lenient = derive_grid(&m, 0.5, 0.3);
        assert_eq!(lenient.count(Traversability::Traversable), 25);
    }

    #[test]
    fn derivation_is_deterministic() {
        let mut m = flat(6, 8);
        m.set([4, 1, 2], Occupancy::Occupied);
        assert_eq!(derive_grid(&m, 0.4, 0.2), derive_grid(&m.clone(), 0.4, 0.2));
    }

    #[test]
    fn known_bounds_cover_known_tiles() {
        let g = GridMap2D::from_ascii(Point2::new(1.0, 2.0), 0.5, &["???", "?.#", "???"]);
        let (lo, hi) = g.known_bounds().unwrap();
        assert_eq!(lo, Point2::new(1.5, 2.5));
        assert_eq!(hi, Point2::new(2.5, 3.0));
    }
}
