//! Ground truth, the robot's evolving voxel map, the derived traversability
//! grid and the simulated range sensor linking them.

mod env_format;
mod grid;
mod sensor;
mod voxel;

pub use env_format::{dump_robot_map, load_environment, write_environment};
pub use grid::{band_layers, derive_grid, GridMap2D, TileIndex, Traversability};
pub(crate) use grid::{clearance, Clearance};
pub use sensor::{simulate_scan, ScanStats, SensorModel};
pub use voxel::{mapped_volume, Occupancy, VoxelIndex, VoxelMap};
