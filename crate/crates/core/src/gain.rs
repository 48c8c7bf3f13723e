//! Expected-information estimate for graph nodes.
//!
//! A lattice of poll points (range × elevation × azimuth) is built once.
//! Evaluating a node translates the lattice to the node and walks each
//! (elevation, azimuth) ray outward: Unknown voxels add one to that azimuth
//! bin, an Occupied voxel ends the ray, Free voxels are passed through. The
//! node's gain is the best sum over a contiguous azimuth window as wide as the
//! sensor's horizontal field of view.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{angle_distance, Point2, Point3};
use crate::rrg::NodeStatus;
use crate::world::{band_layers, clearance, Clearance, Occupancy, SensorModel, VoxelMap};

const INDEX_EPS: f64 = 1e-9;

/// Inclusive integer index range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRange {
    pub lo: i64,
    pub hi: i64,
}

impl IndexRange {
    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PollPoint {
    pub range: f64,
    pub elevation: f64,
    pub azimuth: f64,
    pub offset: [f64; 3],
}

/// Precomputed poll-point lattice, grouped by azimuth bin, then elevation,
/// with ascending range inside each ray.
#[derive(Debug, Clone, PartialEq)]
pub struct PollPointSet {
    pub step_range: f64,
    pub step_elevation: f64,
    pub step_azimuth: f64,
    pub range_index: IndexRange,
    pub elevation_index: IndexRange,
    pub azimuth_bins: usize,
    points: Vec<PollPoint>,
}

impl PollPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[PollPoint] {
        &self.points
    }

    pub fn ray_len(&self) -> usize {
        self.range_index.len()
    }

    /// Points along one ray, nearest first.
    pub fn ray(&self, azimuth_bin: usize, elevation_slot: usize) -> &[PollPoint] {
        let n = self.ray_len();
        let start = (azimuth_bin * self.elevation_index.len() + elevation_slot) * n;
        &self.points[start..start + n]
    }

    /// Number of azimuth bins covered by a horizontal field of view.
    pub fn window_bins(&self, hfov: f64) -> usize {
        ((hfov / self.step_azimuth).round() as usize).clamp(1, self.azimuth_bins)
    }

    /// Poll points inside one horizontal-FoV window: the largest gain a node
    /// can report.
    pub fn max_gain(&self, hfov: f64) -> usize {
        self.window_bins(hfov) * self.elevation_index.len() * self.ray_len()
    }
}

/// Builds the poll lattice `r_i = i Δr`, `θ_j = j Δθ`, `φ_k = k Δφ` with
/// `r_min/Δr <= i <= r_max/Δr`, `θ_min/Δθ <= j <= θ_max/Δθ` and
/// `0 <= k < 2π/Δφ`. The full azimuth revolution is always covered.
pub fn build_pollset(
    sensor: &SensorModel,
    step_range: f64,
    step_elevation: f64,
    step_azimuth: f64,
) -> Result<PollPointSet> {
    if !(step_range > 0.0 && step_elevation > 0.0 && step_azimuth > 0.0) {
        return Err(Error::config("poll step sizes must be positive"));
    }
    let range_index = IndexRange {
        lo: ((sensor.r_min / step_range) - INDEX_EPS).ceil().max(0.0) as i64,
        hi: ((sensor.r_max / step_range) + INDEX_EPS).floor() as i64,
    };
    let elevation_index = IndexRange {
        lo: ((sensor.vfov_min / step_elevation) - INDEX_EPS).ceil() as i64,
        hi: ((sensor.vfov_max / step_elevation) + INDEX_EPS).floor() as i64,
    };
    let azimuth_bins = ((TAU / step_azimuth) - INDEX_EPS).ceil().max(0.0) as usize;
    if range_index.is_empty() || elevation_index.is_empty() || azimuth_bins == 0 {
        return Err(Error::config(format!(
            "poll steps leave an empty lattice ({} range x {} elevation x {} azimuth bins)",
            range_index.len(),
            elevation_index.len(),
            azimuth_bins
        )));
    }

    let mut points =
        Vec::with_capacity(range_index.len() * elevation_index.len() * azimuth_bins);
    for k in 0..azimuth_bins {
        let azimuth = k as f64 * step_azimuth;
        let (sa, ca) = azimuth.sin_cos();
        for j in elevation_index.iter() {
            let elevation = j as f64 * step_elevation;
            let (se, ce) = elevation.sin_cos();
            for i in range_index.iter() {
                let range = i as f64 * step_range;
                points.push(PollPoint {
                    range,
                    elevation,
                    azimuth,
                    offset: [range * ce * ca, range * ce * sa, range * se],
                });
            }
        }
    }
    Ok(PollPointSet {
        step_range,
        step_elevation,
        step_azimuth,
        range_index,
        elevation_index,
        azimuth_bins,
        points,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainResult {
    /// Unknown polls inside the best window.
    pub gain: i64,
    /// Azimuth at which the best window starts.
    pub best_yaw: f64,
    /// Heading that centres the sensor on the best window.
    pub view_yaw: f64,
    pub bin_gains: Vec<u32>,
}

/// Polls the lattice around `position` (the sensor origin at the node).
/// Polls leaving the map end their ray without adding gain.
pub fn evaluate_gain(map: &VoxelMap, pollset: &PollPointSet, position: Point3, hfov: f64) -> GainResult {
    let rays_per_bin = pollset.elevation_index.len();
    let mut bin_gains = vec![0u32; pollset.azimuth_bins];
    for (k, bin) in bin_gains.iter_mut().enumerate() {
        for slot in 0..rays_per_bin {
            for p in pollset.ray(k, slot) {
                let q = Point3::new(
                    position.x + p.offset[0],
                    position.y + p.offset[1],
                    position.z + p.offset[2],
                );
                let v = map.voxel_of(q);
                if !map.in_bounds(v) {
                    break;
                }
                match map.get(v) {
                    Occupancy::Unknown => *bin += 1,
                    Occupancy::Occupied => break,
                    Occupancy::Free => {}
                }
            }
        }
    }
    let window = pollset.window_bins(hfov);
    let (start, gain) = best_window(&bin_gains, window);
    let best_yaw = start as f64 * pollset.step_azimuth;
    GainResult {
        gain: gain as i64,
        best_yaw,
        view_yaw: best_yaw + (window as f64 - 1.0) * pollset.step_azimuth / 2.0,
        bin_gains,
    }
}

/// Start bin and sum of the best circular window of `window` bins; ties go to
/// the smallest start.
pub fn best_window(bins: &[u32], window: usize) -> (usize, u64) {
    let n = bins.len();
    let window = window.clamp(1, n);
    let mut sum: u64 = bins[..window].iter().map(|&b| b as u64).sum();
    let mut best = (0, sum);
    for start in 1..n {
        sum = sum + bins[(start + window - 1) % n] as u64 - bins[start - 1] as u64;
        if sum > best.1 {
            best = (start, sum);
        }
    }
    best
}

/// Parameters for locating the ground under a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundProbe {
    pub h_sensor: f64,
    pub h_max: f64,
    pub robot_height: f64,
}

/// Sensor height for a node at `xy`, starting from `z_initial` (the mean of
/// the neighbours' heights).
///
/// Searches the column downward, then upward, for an Occupied voxel with an
/// observed-Free clearance band above it, within `h_max` of the expected
/// ground height. Returns `ground + h_sensor`, or `None` if no ground exists
/// in that window.
pub fn snap_to_ground(map: &VoxelMap, xy: Point2, z_initial: f64, probe: &GroundProbe) -> Option<f64> {
    let e = map.edge_length();
    let expected = z_initial - probe.h_sensor;
    let col = map.voxel_of(xy.with_z(expected));
    let (i, j) = (col[0], col[1]);
    let band = band_layers(probe.robot_height, e);
    let origin_z = map.origin().z;
    let nz = map.dims()[2] as i64;
    // layer whose top face is closest to the expected ground, from below
    let pivot = ((expected - origin_z) / e - 1.0 + INDEX_EPS).floor() as i64;
    let within = |k: i64| (map.layer_top(k) - expected).abs() <= probe.h_max + INDEX_EPS;
    let is_ground =
        |k: i64| map.get([i, j, k]) == Occupancy::Occupied && clearance(map, i, j, k, band) == Clearance::Clear;

    let down = (0..=pivot.min(nz - 1)).rev().take_while(|&k| within(k));
    let up = (pivot + 1).max(0)..nz;
    down.chain(up.take_while(|&k| within(k)))
        .find(|&k| is_ground(k))
        .map(|k| map.layer_top(k) + probe.h_sensor)
}

/// Next node status from a fresh gain evaluation.
///
/// Failed when the ground was unreachable (`gain < 0`). Explored when the
/// fill ratio `gain / g_max` is below `g_min`, or when a Visited node's best
/// heading came back within `yaw_tolerance` of the previous one. Initial
/// otherwise.
pub fn update_status(
    previous: NodeStatus,
    gain: i64,
    g_max: usize,
    g_min: f64,
    previous_yaw: f64,
    new_yaw: f64,
    yaw_tolerance: f64,
) -> NodeStatus {
    if gain < 0 {
        return NodeStatus::Failed;
    }
    if (gain as f64) / (g_max as f64) < g_min {
        return NodeStatus::Explored;
    }
    if previous == NodeStatus::Visited && angle_distance(new_yaw, previous_yaw) <= yaw_tolerance + INDEX_EPS {
        return NodeStatus::Explored;
    }
    NodeStatus::Initial
}
