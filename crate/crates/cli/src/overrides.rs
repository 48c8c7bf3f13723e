//! Command-line overrides for scenario file values. Every field of the
//! scenario config has a flag; unset flags leave the file value alone.

use clap::{Args, ValueEnum};
use rne_core::scenario::{GainExecution, ModeConfig, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Graph,
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Execution {
    Inline,
    Threaded,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, help_heading = "Spawn")]
    pub spawn_x: Option<f64>,
    #[arg(long, help_heading = "Spawn")]
    pub spawn_y: Option<f64>,
    #[arg(long, help_heading = "Spawn")]
    pub spawn_yaw_deg: Option<f64>,

    #[arg(long, help_heading = "Robot")]
    pub r_robot: Option<f64>,
    #[arg(long, help_heading = "Robot")]
    pub w_robot: Option<f64>,
    #[arg(long, help_heading = "Robot")]
    pub robot_height: Option<f64>,
    #[arg(long, help_heading = "Robot")]
    pub step_tolerance: Option<f64>,
    #[arg(long, help_heading = "Robot")]
    pub linear_speed: Option<f64>,
    #[arg(long, help_heading = "Robot")]
    pub angular_speed_deg: Option<f64>,

    #[arg(long, help_heading = "Sensor")]
    pub hfov_deg: Option<f64>,
    #[arg(long, help_heading = "Sensor", allow_negative_numbers = true)]
    pub vfov_min_deg: Option<f64>,
    #[arg(long, help_heading = "Sensor", allow_negative_numbers = true)]
    pub vfov_max_deg: Option<f64>,
    #[arg(long, help_heading = "Sensor")]
    pub r_min: Option<f64>,
    #[arg(long, help_heading = "Sensor")]
    pub r_max: Option<f64>,
    #[arg(long, help_heading = "Sensor")]
    pub h_sensor: Option<f64>,
    #[arg(long, help_heading = "Sensor")]
    pub azimuth_rays: Option<usize>,
    #[arg(long, help_heading = "Sensor")]
    pub elevation_rays: Option<usize>,

    #[arg(long, help_heading = "Planner")]
    pub d_min: Option<f64>,
    #[arg(long, help_heading = "Planner")]
    pub d_max: Option<f64>,
    #[arg(long, help_heading = "Planner")]
    pub r_ls: Option<f64>,
    #[arg(long, help_heading = "Planner")]
    pub delta_r: Option<f64>,
    #[arg(long, help_heading = "Planner")]
    pub delta_theta_deg: Option<f64>,
    #[arg(long, help_heading = "Planner")]
    pub delta_phi_deg: Option<f64>,
    #[arg(long, help_heading = "Planner")]
    pub g_min: Option<f64>,
    #[arg(long, help_heading = "Planner")]
    pub t_exit: Option<f64>,
    #[arg(long, help_heading = "Planner")]
    pub h_max: Option<f64>,
    #[arg(long, help_heading = "Planner")]
    pub interrupt_margin: Option<f64>,

    #[arg(long, help_heading = "Simulator")]
    pub tick: Option<f64>,
    #[arg(long, help_heading = "Simulator")]
    pub scan_interval: Option<f64>,
    #[arg(long, help_heading = "Simulator")]
    pub time_limit: Option<f64>,
    #[arg(long, help_heading = "Simulator")]
    pub gain_eval_time: Option<f64>,
    #[arg(long, help_heading = "Simulator")]
    pub gain_delay_factor: Option<f64>,
    #[arg(long, value_enum, help_heading = "Simulator")]
    pub gain_execution: Option<Execution>,
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Overrides {
    pub fn apply(&self, c: &mut ScenarioConfig) {
        set(&mut c.spawn.x, self.spawn_x);
        set(&mut c.spawn.y, self.spawn_y);
        set(&mut c.spawn.yaw_deg, self.spawn_yaw_deg);

        let r = &mut c.robot;
        set(&mut r.r_robot, self.r_robot);
        set(&mut r.w_robot, self.w_robot);
        set(&mut r.height, self.robot_height);
        set(&mut r.step_tolerance, self.step_tolerance);
        set(&mut r.linear_speed, self.linear_speed);
        set(&mut r.angular_speed_deg, self.angular_speed_deg);

        let s = &mut c.sensor;
        set(&mut s.hfov_deg, self.hfov_deg);
        set(&mut s.vfov_min_deg, self.vfov_min_deg);
        set(&mut s.vfov_max_deg, self.vfov_max_deg);
        set(&mut s.r_min, self.r_min);
        set(&mut s.r_max, self.r_max);
        set(&mut s.h_sensor, self.h_sensor);
        set(&mut s.azimuth_rays, self.azimuth_rays);
        set(&mut s.elevation_rays, self.elevation_rays);

        let p = &mut c.planner;
        set(&mut p.d_min, self.d_min);
        set(&mut p.d_max, self.d_max);
        set(&mut p.r_ls, self.r_ls);
        set(&mut p.delta_r, self.delta_r);
        set(&mut p.delta_theta_deg, self.delta_theta_deg);
        set(&mut p.delta_phi_deg, self.delta_phi_deg);
        set(&mut p.g_min, self.g_min);
        set(&mut p.t_exit, self.t_exit);
        set(&mut p.h_max, self.h_max);
        set(&mut p.interrupt_margin, self.interrupt_margin);

        let m = &mut c.sim;
        set(&mut m.tick, self.tick);
        set(&mut m.scan_interval, self.scan_interval);
        set(&mut m.time_limit, self.time_limit);
        set(&mut m.gain_eval_time, self.gain_eval_time);
        set(&mut m.gain_delay_factor, self.gain_delay_factor);
        if let Some(e) = self.gain_execution {
            m.gain_execution = match e {
                Execution::Inline => GainExecution::Inline,
                Execution::Threaded => GainExecution::Threaded,
            };
        }
    }
}

impl From<Mode> for ModeConfig {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Graph => ModeConfig::Graph,
            Mode::Tree => ModeConfig::Tree,
        }
    }
}
