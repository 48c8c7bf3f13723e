//! Scenario files: TOML describing the environment, robot, sensor, planner
//! and simulator settings for one run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::rrg::GraphMode;
use crate::steer::RobotFootprint;
use crate::world::{derive_grid, load_environment, SensorModel, Traversability, VoxelMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spawn {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub yaw_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotConfig {
    pub r_robot: f64,
    pub w_robot: f64,
    /// Vertical clearance the robot needs above the ground.
    pub height: f64,
    /// Largest ground height difference between neighbouring tiles.
    pub step_tolerance: f64,
    pub linear_speed: f64,
    pub angular_speed_deg: f64,
}

impl Default for RobotConfig {
    fn default() -> Self {
        Self {
            r_robot: 0.3,
            w_robot: 0.4,
            height: 0.6,
            step_tolerance: 0.15,
            linear_speed: 1.0,
            angular_speed_deg: 90.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub hfov_deg: f64,
    pub vfov_min_deg: f64,
    pub vfov_max_deg: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub h_sensor: f64,
    pub azimuth_rays: usize,
    pub elevation_rays: usize,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            hfov_deg: 360.0,
            vfov_min_deg: -70.0,
            vfov_max_deg: 70.0,
            r_min: 0.1,
            r_max: 4.0,
            h_sensor: 0.5,
            azimuth_rays: 360,
            elevation_rays: 281,
        }
    }
}

impl SensorConfig {
    pub fn model(&self) -> SensorModel {
        SensorModel {
            hfov: self.hfov_deg.to_radians(),
            vfov_min: self.vfov_min_deg.to_radians(),
            vfov_max: self.vfov_max_deg.to_radians(),
            r_min: self.r_min,
            r_max: self.r_max,
            h_sensor: self.h_sensor,
            azimuth_rays: self.azimuth_rays,
            elevation_rays: self.elevation_rays,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeConfig {
    Graph,
    Tree,
}

impl From<ModeConfig> for GraphMode {
    fn from(m: ModeConfig) -> Self {
        match m {
            ModeConfig::Graph => GraphMode::Graph,
            ModeConfig::Tree => GraphMode::Tree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub mode: ModeConfig,
    pub local_sampling: bool,
    pub d_min: f64,
    pub d_max: f64,
    pub r_ls: f64,
    pub delta_r: f64,
    pub delta_theta_deg: f64,
    pub delta_phi_deg: f64,
    pub g_min: f64,
    pub t_exit: f64,
    /// Search window for the ground under a node.
    pub h_max: f64,
    pub interrupt_margin: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            mode: ModeConfig::Graph,
            local_sampling: true,
            d_min: 1.0,
            d_max: 2.0,
            r_ls: 5.0,
            delta_r: 0.1,
            delta_theta_deg: 10.0,
            delta_phi_deg: 10.0,
            g_min: 0.1,
            t_exit: 10.0,
            h_max: 0.5,
            interrupt_margin: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainExecution {
    /// Evaluations run on the tick thread.
    Inline,
    /// Evaluations run on a worker thread.
    Threaded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub tick: f64,
    pub scan_interval: f64,
    /// Simulated seconds before a run is cut off.
    pub time_limit: f64,
    /// Simulated seconds one gain evaluation takes.
    pub gain_eval_time: f64,
    /// Multiplier on `gain_eval_time`, for delay injection.
    pub gain_delay_factor: f64,
    pub gain_execution: GainExecution,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            tick: 0.1,
            scan_interval: 1.0,
            time_limit: 1800.0,
            gain_eval_time: 0.01,
            gain_delay_factor: 1.0,
            gain_execution: GainExecution::Inline,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Environment file, relative to the scenario file.
    pub environment: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub spawn: Spawn,
    #[serde(default)]
    pub robot: RobotConfig,
    #[serde(default)]
    pub sensor: SensorConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub sim: SimConfig,
}

fn positive(out: &mut Vec<String>, name: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        out.push(format!("{name} must be positive (got {v})"));
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn footprint(&self) -> Result<RobotFootprint> {
        RobotFootprint::new(self.robot.r_robot, self.robot.w_robot)
    }

    /// Parameter problems, one message per violation.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let r = &self.robot;
        positive(&mut out, "robot.r_robot", r.r_robot);
        positive(&mut out, "robot.w_robot", r.w_robot);
        positive(&mut out, "robot.height", r.height);
        positive(&mut out, "robot.linear_speed", r.linear_speed);
        positive(&mut out, "robot.angular_speed_deg", r.angular_speed_deg);
        if r.step_tolerance < 0.0 {
            out.push("robot.step_tolerance must be non-negative".into());
        }
        if r.w_robot > 2.0 * r.r_robot {
            out.push(format!(
                "footprint invariant violated: r_robot >= w_robot/2 required (r_robot = {}, w_robot = {})",
                r.r_robot, r.w_robot
            ));
        }
        if let Err(e) = self.sensor.model().validate() {
            out.push(e.to_string());
        }
        let p = &self.planner;
        positive(&mut out, "planner.d_min", p.d_min);
        positive(&mut out, "planner.d_max", p.d_max);
        positive(&mut out, "planner.r_ls", p.r_ls);
        positive(&mut out, "planner.delta_r", p.delta_r);
        positive(&mut out, "planner.delta_theta_deg", p.delta_theta_deg);
        positive(&mut out, "planner.delta_phi_deg", p.delta_phi_deg);
        positive(&mut out, "planner.t_exit", p.t_exit);
        positive(&mut out, "planner.h_max", p.h_max);
        if p.d_min > p.d_max {
            out.push(format!("planner.d_min ({}) exceeds planner.d_max ({})", p.d_min, p.d_max));
        }
        if !(0.0..=1.0).contains(&p.g_min) {
            out.push(format!("planner.g_min must lie in [0, 1] (got {})", p.g_min));
        }
        if p.interrupt_margin < 0.0 {
            out.push("planner.interrupt_margin must be non-negative".into());
        }
        let s = &self.sim;
        positive(&mut out, "sim.tick", s.tick);
        positive(&mut out, "sim.scan_interval", s.scan_interval);
        positive(&mut out, "sim.time_limit", s.time_limit);
        positive(&mut out, "sim.gain_eval_time", s.gain_eval_time);
        positive(&mut out, "sim.gain_delay_factor", s.gain_delay_factor);
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }

    pub fn apply_variant(&mut self, variant: Variant) {
        let (mode, ls) = variant.settings();
        self.planner.mode = mode;
        self.planner.local_sampling = ls;
    }
}

/// A scenario with its environment loaded.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub truth: VoxelMap,
    pub source: Option<PathBuf>,
}

impl Scenario {
    pub fn new(config: ScenarioConfig, truth: VoxelMap) -> Self {
        Self {
            config,
            truth,
            source: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config = ScenarioConfig::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let env_path = base.join(&config.environment);
        let env_text = std::fs::read_to_string(&env_path).map_err(|e| {
            Error::Scenario(format!("cannot read environment {}: {e}", env_path.display()))
        })?;
        let truth = load_environment(&env_text)?;
        Ok(Self {
            config,
            truth,
            source: Some(path.to_path_buf()),
        })
    }

    /// Parameter violations plus the spawn check against the ground truth.
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.config.violations();
        if out.is_empty() {
            let grid = derive_grid(&self.truth, self.config.robot.height, self.config.robot.step_tolerance);
            let spawn = Point2::new(self.config.spawn.x, self.config.spawn.y);
            if grid.state_at(spawn) != Traversability::Traversable {
                out.push(format!("spawn not traversable at ({}, {})", spawn.x, spawn.y));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Scenario(v.join("; ")))
        }
    }
}

/// The four planner combinations compared in the ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Graph expansion with local sampling.
    Rne,
    Rrg,
    RrtLs,
    Rrt,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Rne, Variant::Rrg, Variant::RrtLs, Variant::Rrt];

    pub fn settings(self) -> (ModeConfig, bool) {
        match self {
            Variant::Rne => (ModeConfig::Graph, true),
            Variant::Rrg => (ModeConfig::Graph, false),
            Variant::RrtLs => (ModeConfig::Tree, true),
            Variant::Rrt => (ModeConfig::Tree, false),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Rne => "rne",
            Variant::Rrg => "rrg",
            Variant::RrtLs => "rrt+ls",
            Variant::Rrt => "rrt",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown variant '{s}' (expected rne, rrg, rrt+ls or rrt)")))
    }
}
