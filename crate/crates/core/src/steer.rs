//! Traversability check for a candidate graph edge.
//!
//! The region a robot sweeps when driving from a new sample `x_rand` to an
//! existing node `x_n` is approximated by a disc of radius `r_robot` at
//! `x_rand` plus a `w_robot`-wide corridor along the segment. The corridor is
//! shortened to `d_rem` so its corners just touch both endpoint discs; the
//! disc at `x_n` was verified when that node was inserted and is skipped.
//!
//! Both shapes are rasterised into row slices (constant `y`, increasing `x`)
//! and every tile whose centre lies inside a shape is checked. Any Obstacle or
//! Unknown tile, including tiles beyond the grid edge, fails the connection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::world::{GridMap2D, TileIndex, Traversability};

/// Slack, in tile units, for tile centres lying on a shape boundary.
const EDGE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotFootprint {
    /// Radius of the disc that must be free around a new node (at least half
    /// the footprint diagonal).
    pub r_robot: f64,
    /// Corridor width.
    pub w_robot: f64,
}

impl RobotFootprint {
    pub fn new(r_robot: f64, w_robot: f64) -> Result<Self> {
        let fp = Self { r_robot, w_robot };
        fp.validate()?;
        Ok(fp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_robot > 0.0) {
            return Err(Error::config("footprint: w_robot must be positive"));
        }
        if !(self.r_robot >= self.w_robot / 2.0) {
            return Err(Error::config(format!(
                "footprint: r_robot ({}) must be at least w_robot / 2 ({})",
                self.r_robot,
                self.w_robot / 2.0
            )));
        }
        Ok(())
    }

    /// Distance along the segment from an endpoint to where the corridor's
    /// corners meet that endpoint's disc.
    pub fn d_diff(&self) -> f64 {
        let half_w = self.w_robot / 2.0;
        (self.r_robot * self.r_robot - half_w * half_w).max(0.0).sqrt()
    }
}

/// `(d_diff, d_rem)` for a connection between `x_rand` and `x_n`, with
/// `d_rem = d(x_rand, x_n) - 2 d_diff` clamped at zero.
pub fn corridor_remainder(x_rand: Point2, x_n: Point2, fp: &RobotFootprint) -> Result<(f64, f64)> {
    fp.validate()?;
    let d_diff = fp.d_diff();
    let d_rem = (x_rand.distance(x_n) - 2.0 * d_diff).max(0.0);
    Ok((d_diff, d_rem))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteerResult {
    Pass,
    Fail(TileIndex),
}

impl SteerResult {
    pub fn passed(self) -> bool {
        self == SteerResult::Pass
    }
}

/// Checks whether the robot can drive from `x_rand` to `x_n`.
pub fn steer(grid: &GridMap2D, x_rand: Point2, x_n: Point2, fp: &RobotFootprint) -> SteerResult {
    steer_counted(grid, x_rand, x_n, fp).0
}

/// [`steer`] plus the number of tiles examined.
pub fn steer_counted(
    grid: &GridMap2D,
    x_rand: Point2,
    x_n: Point2,
    fp: &RobotFootprint,
) -> (SteerResult, usize) {
    let mut checked = 0usize;
    let mut verdict = SteerResult::Pass;
    for_each_region_tile(grid, x_rand, x_n, fp, |t| {
        checked += 1;
        if grid.state(t) == Traversability::Traversable {
            true
        } else {
            verdict = SteerResult::Fail(t);
            false
        }
    });
    (verdict, checked)
}

/// Checks every tile whose centre lies in the disc, plus the tile holding the
/// centre itself.
pub fn check_disc(grid: &GridMap2D, center: Point2, radius: f64) -> SteerResult {
    let mut verdict = SteerResult::Pass;
    let mut check = |t: TileIndex| {
        if grid.state(t) == Traversability::Traversable {
            true
        } else {
            verdict = SteerResult::Fail(t);
            false
        }
    };
    if check(grid.tile_of(center)) {
        disc_slices(grid, center, radius, &mut check);
    }
    verdict
}

/// Visits the steer region's tiles in checking order: the tile containing
/// `x_rand`, then the corridor's row slices, then the disc's row slices. Stops
/// early when `visit` returns `false`.
pub fn for_each_region_tile<F>(grid: &GridMap2D, x_rand: Point2, x_n: Point2, fp: &RobotFootprint, mut visit: F)
where
    F: FnMut(TileIndex) -> bool,
{
    if !visit(grid.tile_of(x_rand)) {
        return;
    }
    if let Some(corners) = corridor_corners(x_rand, x_n, fp) {
        if !polygon_slices(grid, &corners, &mut visit) {
            return;
        }
    }
    disc_slices(grid, x_rand, fp.r_robot, &mut visit);
}

/// Corners of the shortened corridor in world coordinates, or `None` when its
/// length clamps to zero.
pub fn corridor_corners(x_rand: Point2, x_n: Point2, fp: &RobotFootprint) -> Option<[Point2; 4]> {
    let d = x_rand.distance(x_n);
    if d <= 0.0 {
        return None;
    }
    let d_rem = (d - 2.0 * fp.d_diff()).max(0.0);
    if d_rem <= 0.0 {
        return None;
    }
    let axis = (x_n - x_rand) * (1.0 / d);
    let normal = Point2::new(-axis.y, axis.x);
    let mid = (x_rand + x_n) * 0.5;
    let a = axis * (d_rem / 2.0);
    let n = normal * (fp.w_robot / 2.0);
    Some([mid - a - n, mid + a - n, mid + a + n, mid - a + n])
}

/// Position in tile units where tile `i`'s centre sits at `i`.
fn to_tile_space(grid: &GridMap2D, p: Point2) -> Point2 {
    let o = grid.origin();
    let r = grid.resolution();
    Point2::new((p.x - o.x) / r - 0.5, (p.y - o.y) / r - 0.5)
}

fn disc_slices<F>(grid: &GridMap2D, center: Point2, radius: f64, visit: &mut F) -> bool
where
    F: FnMut(TileIndex) -> bool,
{
    let c = to_tile_space(grid, center);
    let rad = radius / grid.resolution();
    let r2 = rad * rad;
    let j0 = (c.y - rad - EDGE_EPS).ceil() as i64;
    let j1 = (c.y + rad + EDGE_EPS).floor() as i64;
    for j in j0..=j1 {
        let dy = j as f64 - c.y;
        let h2 = r2 - dy * dy;
        if h2 < -EDGE_EPS {
            continue;
        }
        let hw = h2.max(0.0).sqrt();
        let i0 = (c.x - hw - EDGE_EPS).ceil() as i64;
        let i1 = (c.x + hw + EDGE_EPS).floor() as i64;
        for i in i0..=i1 {
            if !visit((i, j)) {
                return false;
            }
        }
    }
    true
}

fn polygon_slices<F>(grid: &GridMap2D, corners: &[Point2; 4], visit: &mut F) -> bool
where
    F: FnMut(TileIndex) -> bool,
{
    let pts: Vec<Point2> = corners.iter().map(|&p| to_tile_space(grid, p)).collect();
    let vmin = pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let vmax = pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let j0 = (vmin - EDGE_EPS).ceil() as i64;
    let j1 = (vmax + EDGE_EPS).floor() as i64;
    for j in j0..=j1 {
        let y = j as f64;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for e in 0..4 {
            let p = pts[e];
            let q = pts[(e + 1) % 4];
            let (pmin, pmax) = if p.y <= q.y { (p.y, q.y) } else { (q.y, p.y) };
            if y < pmin - EDGE_EPS || y > pmax + EDGE_EPS {
                continue;
            }
            if (q.y - p.y).abs() < 1e-12 {
                lo = lo.min(p.x.min(q.x));
                hi = hi.max(p.x.max(q.x));
            } else {
                let t = ((y - p.y) / (q.y - p.y)).clamp(0.0, 1.0);
                let x = p.x + t * (q.x - p.x);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        if lo > hi {
            continue;
        }
        let i0 = (lo - EDGE_EPS).ceil() as i64;
        let i1 = (hi + EDGE_EPS).floor() as i64;
        for i in i0..=i1 {
            if !visit((i, j)) {
                return false;
            }
        }
    }
    true
}
