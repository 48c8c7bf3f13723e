//! Shared fixtures for the benchmarks.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rne_core::rrg::{ExpansionParams, GraphMode, RrgGraph};
use rne_core::scenario::Scenario;
use rne_core::steer::RobotFootprint;
use rne_core::world::{derive_grid, simulate_scan, GridMap2D, Traversability, VoxelMap};
use rne_core::{Point2, Point3, Pose};

pub fn scenario(name: &str) -> Scenario {
    let path: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    Scenario::load(&path).expect("shipped scenario loads")
}

/// Sensor pose at the spawn point, standing on the ground.
pub fn spawn_pose(s: &Scenario) -> Pose {
    let c = &s.config;
    let grid = derive_grid(&s.truth, c.robot.height, c.robot.step_tolerance);
    let xy = Point2::new(c.spawn.x, c.spawn.y);
    let ground = grid.ground_height(grid.tile_of(xy)).expect("spawn on the ground");
    Pose::new(xy.with_z(ground + c.sensor.h_sensor), c.spawn.yaw_deg.to_radians())
}

/// Robot map after a single scan from the spawn pose.
pub fn first_scan(s: &Scenario) -> VoxelMap {
    let mut map = s.truth.blank_like();
    simulate_scan(&s.truth, &mut map, spawn_pose(s), &s.config.sensor.model());
    map
}

/// 40 x 40 tiles at 0.1 m with roughly `density` of them blocked and a
/// sprinkling of Unknown.
pub fn random_grid(seed: u64, density: f64) -> GridMap2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<String> = (0..40)
        .map(|_| {
            (0..40)
                .map(|_| {
                    let u: f64 = rng.gen();
                    if u < density {
                        '#'
                    } else if u < density + 0.02 {
                        '?'
                    } else {
                        '.'
                    }
                })
                .collect()
        })
        .collect();
    let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
    GridMap2D::from_ascii(Point2::new(0.0, 0.0), 0.1, &refs)
}

/// A graph of `n` nodes grown on an open 30 x 30 m floor.
pub fn open_graph(n: usize, seed: u64) -> RrgGraph {
    let grid = GridMap2D::new(Point2::new(0.0, 0.0), 0.1, [300, 300], Traversability::Traversable);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = RrgGraph::new(
        Point3::new(15.05, 15.05, 0.5),
        ExpansionParams {
            mode: GraphMode::Graph,
            d_min: 1.0,
            d_max: 2.0,
            footprint: RobotFootprint::new(0.3, 0.4).unwrap(),
        },
    );
    while g.node_count() < n {
        let _ = g.expand(Point2::new(rng.gen_range(0.0..30.0), rng.gen_range(0.0..30.0)), &grid);
    }
    g
}
