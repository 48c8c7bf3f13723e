use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::voxel::{Occupancy, VoxelIndex, VoxelMap};
use crate::error::{Error, Result};
use crate::geometry::Pose;

/// Range sensor description. Angles in radians; elevation is measured from the
/// horizontal plane, positive up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub hfov: f64,
    pub vfov_min: f64,
    pub vfov_max: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Sensor origin height above the ground the robot stands on.
    pub h_sensor: f64,
    /// Scan lattice size used by the simulator.
    pub azimuth_rays: usize,
    pub elevation_rays: usize,
}

impl SensorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min >= 0.0 && self.r_min < self.r_max) {
            return Err(Error::config(format!(
                "sensor range requires 0 <= r_min < r_max (got {} .. {})",
                self.r_min, self.r_max
            )));
        }
        if !(self.vfov_min < self.vfov_max) {
            return Err(Error::config("sensor vertical FoV requires vfov_min < vfov_max"));
        }
        if !(self.hfov > 0.0 && self.hfov <= TAU + 1e-9) {
            return Err(Error::config("sensor horizontal FoV must lie in (0, 2π]"));
        }
        if self.vfov_max - self.vfov_min > TAU + 1e-9 {
            return Err(Error::config("sensor vertical FoV must not exceed 2π"));
        }
        if self.azimuth_rays == 0 || self.elevation_rays == 0 {
            return Err(Error::config("sensor lattice needs at least one ray per axis"));
        }
        if self.h_sensor < 0.0 {
            return Err(Error::config("sensor height must be non-negative"));
        }
        Ok(())
    }

    pub fn is_omnidirectional(&self) -> bool {
        self.hfov >= TAU - 1e-9
    }

    /// Unit direction vectors of the scan lattice for a sensor facing `yaw`.
    pub fn ray_directions(&self, yaw: f64) -> Vec<[f64; 3]> {
        let azimuths: Vec<f64> = if self.is_omnidirectional() {
            (0..self.azimuth_rays)
                .map(|a| yaw + TAU * a as f64 / self.azimuth_rays as f64)
                .collect()
        } else {
            spread(yaw - self.hfov / 2.0, yaw + self.hfov / 2.0, self.azimuth_rays)
        };
        let elevations = spread(self.vfov_min, self.vfov_max, self.elevation_rays);
        let mut dirs = Vec::with_capacity(azimuths.len() * elevations.len());
        for &el in &elevations {
            let (se, ce) = el.sin_cos();
            for &az in &azimuths {
                let (sa, ca) = az.sin_cos();
                dirs.push([ce * ca, ce * sa, se]);
            }
        }
        dirs
    }
}

fn spread(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanStats {
    pub rays: usize,
    pub newly_free: usize,
    pub newly_occupied: usize,
}

impl ScanStats {
    pub fn changed(&self) -> bool {
        self.newly_free + self.newly_occupied > 0
    }
}

/// Casts the sensor's ray lattice from `pose` through the ground truth and
/// records what it sees in `robot_map`.
///
/// Along each ray every voxel before the first truth-Occupied voxel becomes
/// Free and the hit voxel becomes Occupied. A ray whose first hit lies closer
/// than `r_min` returns nothing. Rays end at `r_max` or the map boundary.
pub fn simulate_scan(
    truth: &VoxelMap,
    robot_map: &mut VoxelMap,
    pose: Pose,
    sensor: &SensorModel,
) -> ScanStats {
    debug_assert_eq!(truth.dims(), robot_map.dims());
    let mut stats = ScanStats::default();
    if !truth.contains(pose.position) {
        return stats;
    }
    let mut carved: Vec<VoxelIndex> = Vec::with_capacity(256);
    for dir in sensor.ray_directions(pose.yaw) {
        stats.rays += 1;
        carved.clear();
        let mut hit: Option<(VoxelIndex, f64)> = None;
        truth.traverse_ray(pose.position, dir, sensor.r_max, |v, t| {
            if truth.get(v) == Occupancy::Occupied {
                hit = Some((v, t));
                false
            } else {
                carved.push(v);
                true
            }
        });
        if let Some((_, t)) = hit {
            if t < sensor.r_min {
                continue;
            }
        }
        for &v in &carved {
            if robot_map.observe(v, Occupancy::Free) {
                stats.newly_free += 1;
            }
        }
        if let Some((v, _)) = hit {
            if robot_map.observe(v, Occupancy::Occupied) {
                stats.newly_occupied += 1;
            }
        }
    }
    stats
}
