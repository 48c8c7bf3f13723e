//! Next-best-view exploration for ground robots on a continuously grown
//! rapidly-exploring random graph, plus the deterministic voxel-world harness
//! used to run and benchmark it.

pub mod error;
pub mod gain;
pub mod geometry;
pub mod path;
pub mod planner;
pub mod rrg;
pub mod scenario;
pub mod sim;
pub mod stats;
pub mod steer;
pub mod world;

pub use error::{Error, ParseError, Result};
pub use geometry::{Point2, Point3, Pose};
pub use rrg::{GraphMode, NodeId, NodeStatus, RrgGraph};
pub use scenario::{Scenario, ScenarioConfig, Variant};
pub use sim::{run_to_completion, RunEnd, RunMetrics, RunOutcome, Simulation};
