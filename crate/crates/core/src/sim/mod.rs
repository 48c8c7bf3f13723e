//! Closed-loop exploration harness on a fixed tick clock.
//!
//! Each tick: move the robot, scan, drain gain results and pick or switch
//! goals, expand the graph, refresh path distances, check termination and
//! record metrics. Gain evaluations dispatched in one tick are applied at the
//! start of the next, whichever executor runs them.

mod worker;

use std::collections::VecDeque;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gain::{build_pollset, GroundProbe};
use crate::geometry::{angle_distance, wrap_angle, Point2, Point3, Pose};
use crate::path::{nearest_node, PathTable};
use crate::planner::{
    EventKind, GoalEvent, Interrupt, Planner, PlannerEvent, PlannerParams, Termination,
};
use crate::rrg::{sample_point, sample_point_local, ExpansionParams, NodeId, RrgGraph};
use crate::scenario::{Scenario, ScenarioConfig};
use crate::steer::{steer, RobotFootprint};
use crate::world::{
    derive_grid, simulate_scan, GridMap2D, Occupancy, SensorModel, Traversability, VoxelIndex, VoxelMap,
};

pub use worker::{run_gain_job, GainContext, GainJob};
use worker::GainWorker;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    /// Sensor origin and heading.
    pub pose: Pose,
    pub linear_speed: f64,
    pub angular_speed: f64,
    pub footprint: RobotFootprint,
    /// Node the robot is standing on, if any.
    pub at_node: Option<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub tick: u64,
    pub time: f64,
    pub path_length: f64,
    pub mapped_volume: f64,
    pub nodes: usize,
    pub edges: usize,
}

pub const METRICS_HEADER: &str = "tick,sim_time_s,path_length_m,mapped_volume_m3,nodes,edges";

impl MetricSample {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.3},{:.6},{:.6},{},{}",
            self.tick, self.time, self.path_length, self.mapped_volume, self.nodes, self.edges
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMetrics {
    pub duration: f64,
    pub path_length: f64,
    pub mapped_volume: f64,
    pub samples: Vec<MetricSample>,
}

impl RunMetrics {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 40 + 64);
        out.push_str(METRICS_HEADER);
        out.push('\n');
        for s in &self.samples {
            out.push_str(&s.csv_row());
            out.push('\n');
        }
        out
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunEnd {
    /// The exit timer expired.
    Natural,
    TimeLimit,
}

impl RunEnd {
    pub fn as_str(self) -> &'static str {
        match self {
            RunEnd::Natural => "natural",
            RunEnd::TimeLimit => "time_limit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub end: RunEnd,
    pub metrics: RunMetrics,
    pub events: Vec<PlannerEvent>,
    pub robot_map: VoxelMap,
    pub graph: RrgGraph,
    pub ticks: u64,
    /// Simulated time the first gain result was applied.
    pub first_gain_result: Option<f64>,
    /// Simulated time of the first goal selection.
    pub first_goal: Option<f64>,
    /// Ticks where the footprint touched a ground-truth obstacle.
    pub safety_violations: usize,
}

impl RunOutcome {
    pub fn event_log(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Leg {
    Edge(NodeId),
    View,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Motion {
    Idle,
    Turning { target: f64, then: Leg },
    Driving { from: Point3, to: NodeId, travelled: f64, length: f64 },
}

#[derive(Debug, Clone)]
struct Navigation {
    motion: Motion,
    /// Remaining waypoints after the current node; `None` until planned.
    route: Option<VecDeque<NodeId>>,
    view_done: bool,
}

/// A single exploration run.
pub struct Simulation {
    config: ScenarioConfig,
    sensor: SensorModel,
    truth: Arc<VoxelMap>,
    truth_grid: GridMap2D,
    robot_map: Arc<VoxelMap>,
    grid: GridMap2D,
    graph: RrgGraph,
    paths: PathTable,
    planner: Planner,
    rng: ChaCha8Rng,
    robot: RobotState,
    nav: Navigation,
    worker: GainWorker,
    view_yaw: Vec<f64>,
    root_height: f64,
    tick: u64,
    now: f64,
    last_scan: f64,
    scan_due: bool,
    moved_since_recalc: bool,
    pending_event: Option<GoalEvent>,
    gain_budget: f64,
    path_length: f64,
    mapped_volume: f64,
    metrics: RunMetrics,
    events: Vec<PlannerEvent>,
    first_gain_result: Option<f64>,
    first_goal: Option<f64>,
    safety_violations: usize,
    end: Option<RunEnd>,
}

impl Simulation {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let config = scenario.config.clone();
        let truth = Arc::new(scenario.truth.clone());
        let sensor = config.sensor.model();
        let footprint = config.footprint()?;
        let p = &config.planner;
        let expansion = ExpansionParams {
            mode: p.mode.into(),
            d_min: p.d_min,
            d_max: p.d_max,
            footprint,
        };
        expansion.validate()?;
        let pollset = build_pollset(
            &sensor,
            p.delta_r,
            p.delta_theta_deg.to_radians(),
            p.delta_phi_deg.to_radians(),
        )?;
        let g_max = pollset.max_gain(sensor.hfov);
        let params = PlannerParams {
            g_min: p.g_min,
            t_exit: p.t_exit,
            r_max: sensor.r_max,
            yaw_tolerance: p.delta_phi_deg.to_radians(),
            interrupt_margin: p.interrupt_margin,
            g_max,
        };
        params.validate()?;
        let ctx = GainContext {
            pollset,
            hfov: sensor.hfov,
            probe: GroundProbe {
                h_sensor: sensor.h_sensor,
                h_max: p.h_max,
                robot_height: config.robot.height,
            },
        };

        let truth_grid = derive_grid(&truth, config.robot.height, config.robot.step_tolerance);
        let spawn_xy = Point2::new(config.spawn.x, config.spawn.y);
        let ground = truth_grid
            .ground_height(truth_grid.tile_of(spawn_xy))
            .ok_or_else(|| Error::Scenario("spawn not traversable".into()))?;
        let root_height = ground + sensor.h_sensor;
        let start = spawn_xy.with_z(root_height);
        let robot = RobotState {
            pose: Pose::new(start, wrap_angle(config.spawn.yaw_deg.to_radians())),
            linear_speed: config.robot.linear_speed,
            angular_speed: config.robot.angular_speed_deg.to_radians(),
            footprint,
            at_node: Some(0),
        };

        let robot_map = Arc::new(truth.blank_like());
        let grid = derive_grid(&robot_map, config.robot.height, config.robot.step_tolerance);
        let graph = RrgGraph::new(start, expansion);
        let paths = PathTable::rebuild(&graph, 0);
        let worker = GainWorker::new(config.sim.gain_execution, Arc::new(ctx));

        let mut sim = Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            planner: Planner::new(params),
            config,
            sensor,
            truth,
            truth_grid,
            robot_map,
            grid,
            graph,
            paths,
            robot,
            nav: Navigation {
                motion: Motion::Idle,
                route: None,
                view_done: false,
            },
            worker,
            view_yaw: vec![0.0],
            root_height,
            tick: 0,
            now: 0.0,
            last_scan: 0.0,
            scan_due: false,
            moved_since_recalc: false,
            pending_event: None,
            gain_budget: 0.0,
            path_length: 0.0,
            mapped_volume: 0.0,
            metrics: RunMetrics::default(),
            events: Vec::new(),
            first_gain_result: None,
            first_goal: None,
            safety_violations: 0,
            end: None,
        };
        sim.scan();
        sim.planner.on_node_added(&mut sim.graph, 0);
        sim.planner.sync_distances(&mut sim.graph, &sim.paths);
        sim.record_metrics();
        Ok(sim)
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.now
    }

    pub fn graph(&self) -> &RrgGraph {
        &self.graph
    }

    pub fn robot(&self) -> &RobotState {
        &self.robot
    }

    pub fn robot_map(&self) -> &VoxelMap {
        &self.robot_map
    }

    pub fn grid(&self) -> &GridMap2D {
        &self.grid
    }

    pub fn planner(&self) -> &Planner {
        &self.planner
    }

    pub fn events(&self) -> &[PlannerEvent] {
        &self.events
    }

    pub fn metrics(&self) -> &RunMetrics {
        &self.metrics
    }

    pub fn finished(&self) -> Option<RunEnd> {
        self.end
    }

    fn tick_len(&self) -> f64 {
        self.config.sim.tick
    }

    fn emit(&mut self, kind: EventKind, node: Option<NodeId>) {
        let gcr = node.map_or(0.0, |n| self.graph.node(n).gcr);
        self.events.push(PlannerEvent {
            tick: self.tick,
            kind,
            node,
            gcr,
        });
    }

    fn scan(&mut self) {
        let map = Arc::make_mut(&mut self.robot_map);
        let stats = simulate_scan(&self.truth, map, self.robot.pose, &self.sensor);
        self.last_scan = self.now;
        if stats.changed() {
            self.grid = derive_grid(&self.robot_map, self.config.robot.height, self.config.robot.step_tolerance);
            self.mapped_volume = self.robot_map.mapped_volume();
        }
    }

    /// Advances one tick. Does nothing once the run has ended.
    pub fn step(&mut self) {
        if self.end.is_some() {
            return;
        }
        self.tick += 1;
        self.now = self.tick as f64 * self.tick_len();

        self.advance_robot();

        if self.scan_due || self.now - self.last_scan >= self.config.sim.scan_interval - EPS {
            self.scan_due = false;
            self.scan();
        }

        self.planner_step();
        self.expand();
        self.update_anchor();

        self.planner.update_timer(&self.graph, self.now);
        if self.planner.check_termination(self.now) == Termination::Finished {
            self.emit(EventKind::Terminated, None);
            self.end = Some(RunEnd::Natural);
        } else if self.now >= self.config.sim.time_limit - EPS {
            self.end = Some(RunEnd::TimeLimit);
        }

        if cfg!(debug_assertions) {
            if let Err(e) = self.planner.check_invariants(&self.graph) {
                panic!("planner invariant broken at tick {}: {e}", self.tick);
            }
        }
        if !self.footprint_clear() {
            self.safety_violations += 1;
        }
        self.record_metrics();
    }

    pub fn run_to_completion(mut self) -> RunOutcome {
        while self.end.is_none() {
            self.step();
        }
        self.into_outcome()
    }

    pub fn into_outcome(self) -> RunOutcome {
        let robot_map = Arc::try_unwrap(self.robot_map).unwrap_or_else(|a| (*a).clone());
        RunOutcome {
            end: self.end.unwrap_or(RunEnd::TimeLimit),
            metrics: self.metrics,
            events: self.events,
            robot_map,
            graph: self.graph,
            ticks: self.tick,
            first_gain_result: self.first_gain_result,
            first_goal: self.first_goal,
            safety_violations: self.safety_violations,
        }
    }

    fn record_metrics(&mut self) {
        let s = MetricSample {
            tick: self.tick,
            time: self.now,
            path_length: self.path_length,
            mapped_volume: self.mapped_volume,
            nodes: self.graph.node_count(),
            edges: self.graph.edge_count(),
        };
        self.metrics.duration = self.now;
        self.metrics.path_length = self.path_length;
        self.metrics.mapped_volume = self.mapped_volume;
        self.metrics.samples.push(s);
    }

    /// Every tile within half the robot width of its position is traversable
    /// in the ground-truth grid.
    fn footprint_clear(&self) -> bool {
        let c = self.robot.pose.position.xy();
        let r = self.robot.footprint.w_robot / 2.0;
        let g = &self.truth_grid;
        let (lo, hi) = (g.tile_of(Point2::new(c.x - r, c.y - r)), g.tile_of(Point2::new(c.x + r, c.y + r)));
        for i in lo.0..=hi.0 {
            for j in lo.1..=hi.1 {
                let t = (i, j);
                if g.tile_center(t).distance(c) <= r + EPS && g.state(t) != Traversability::Traversable {
                    return false;
                }
            }
        }
        true
    }

    fn set_goal_route_stale(&mut self) {
        self.nav.route = None;
        self.nav.view_done = false;
        if let Motion::Turning { .. } = self.nav.motion {
            self.nav.motion = Motion::Idle;
        }
    }

    /// Motion for one tick: zero-length transitions are free, the first turn
    /// or drive consumes the tick.
    fn advance_robot(&mut self) {
        let dt = self.tick_len();
        loop {
            match self.nav.motion {
                Motion::Idle => {
                    let Some(goal) = self.planner.goal() else { return };
                    if self.pending_event.is_some() {
                        return;
                    }
                    let cur = self.robot.at_node.expect("idle robot stands on a node");
                    if self.nav.route.is_none() {
                        if self.paths.anchor() != cur {
                            self.paths.reset(&self.graph, cur);
                            self.planner.sync_distances(&mut self.graph, &self.paths);
                        }
                        match self.paths.path_to(&self.graph, goal) {
                            Some(p) => self.nav.route = Some(p.into_iter().skip(1).collect()),
                            None => {
                                self.pending_event = Some(GoalEvent::Failed);
                                return;
                            }
                        }
                    }
                    let next = self.nav.route.as_ref().and_then(|r| r.front().copied());
                    match next {
                        None => {
                            if self.sensor.is_omnidirectional() || self.nav.view_done {
                                self.pending_event = Some(GoalEvent::Reached);
                                self.scan_due = true;
                                return;
                            }
                            let target = self.view_yaw[goal];
                            self.nav.motion = Motion::Turning { target, then: Leg::View };
                        }
                        Some(next) => {
                            let (a, b) = (self.graph.node(cur).xy(), self.graph.node(next).xy());
                            if !steer(&self.grid, b, a, &self.robot.footprint).passed() {
                                self.pending_event = Some(GoalEvent::Failed);
                                return;
                            }
                            let target = (b - a).heading();
                            self.nav.motion = Motion::Turning { target, then: Leg::Edge(next) };
                        }
                    }
                }
                Motion::Turning { target, then } => {
                    let remaining = angle_distance(self.robot.pose.yaw, target);
                    let finish = |s: &mut Self| match then {
                        Leg::Edge(to) => {
                            let from = s.robot.pose.position;
                            let length = from.xy().distance(s.graph.node(to).xy());
                            s.nav.motion = Motion::Driving { from, to, travelled: 0.0, length };
                        }
                        Leg::View => {
                            s.nav.view_done = true;
                            s.nav.motion = Motion::Idle;
                        }
                    };
                    if remaining <= EPS {
                        self.robot.pose.yaw = wrap_angle(target);
                        finish(self);
                        continue;
                    }
                    let max = self.robot.angular_speed * dt;
                    self.moved_since_recalc = true;
                    if remaining <= max + EPS {
                        self.robot.pose.yaw = wrap_angle(target);
                        finish(self);
                    } else {
                        let dir = wrap_angle(target - self.robot.pose.yaw).signum();
                        self.robot.pose.yaw = wrap_angle(self.robot.pose.yaw + dir * max);
                    }
                    return;
                }
                Motion::Driving { from, to, travelled, length } => {
                    self.robot.at_node = None;
                    self.moved_since_recalc = true;
                    let step = self.robot.linear_speed * dt;
                    if travelled + step >= length - EPS {
                        self.path_length += length - travelled;
                        self.robot.pose.position = self.graph.node(to).position;
                        self.robot.at_node = Some(to);
                        if let Some(r) = self.nav.route.as_mut() {
                            r.pop_front();
                        }
                        self.nav.motion = Motion::Idle;
                        self.scan_due = true;
                        // a goal reached with nothing left to turn is closed this tick
                        if self.planner.goal() == Some(to)
                            && self.nav.route.as_ref().is_some_and(|r| r.is_empty())
                            && self.sensor.is_omnidirectional()
                        {
                            self.pending_event = Some(GoalEvent::Reached);
                        }
                    } else {
                        let travelled = travelled + step;
                        let target = self.graph.node(to).position;
                        let f = travelled / length;
                        self.robot.pose.position = Point3::new(
                            from.x + (target.x - from.x) * f,
                            from.y + (target.y - from.y) * f,
                            from.z + (target.z - from.z) * f,
                        );
                        self.path_length += step;
                        self.nav.motion = Motion::Driving { from, to, travelled, length };
                    }
                    return;
                }
            }
        }
    }

    fn close_goal(&mut self, event: GoalEvent) {
        let Some(goal) = self.planner.goal() else { return };
        let kind = match event {
            GoalEvent::Reached => EventKind::GoalReached,
            GoalEvent::Failed => EventKind::GoalFailed,
            GoalEvent::Aborted => EventKind::GoalAborted,
        };
        self.emit(kind, Some(goal));
        let moved = self.moved_since_recalc;
        let robot = self.robot.pose.position.xy();
        self.planner
            .on_goal_event(&mut self.graph, event, moved, robot)
            .expect("goal event with an active goal");
        if moved {
            self.moved_since_recalc = false;
        }
        self.set_goal_route_stale();
    }

    fn planner_step(&mut self) {
        if let Some(event) = self.pending_event.take() {
            self.close_goal(event);
        }

        let updates = self.worker.collect();
        if !updates.is_empty() && self.first_gain_result.is_none() {
            self.first_gain_result = Some(self.now);
        }
        for u in &updates {
            let applied = self.planner.apply_gain(&mut self.graph, u, self.tick);
            self.view_yaw[u.node] = u.view_yaw;
            if applied.goal_invalidated {
                self.close_goal(GoalEvent::Aborted);
            }
        }

        if let Interrupt::Switch(_) = self.planner.maybe_interrupt(&self.graph) {
            self.close_goal(GoalEvent::Aborted);
        }
        if self.planner.goal().is_none() {
            if let Some(g) = self.planner.select_nbv(&mut self.graph) {
                self.emit(EventKind::GoalSelected, Some(g));
                self.first_goal.get_or_insert(self.now);
                self.set_goal_route_stale();
            }
        }

        self.dispatch_gains();
    }

    fn dispatch_gains(&mut self) {
        let cost = self.config.sim.gain_eval_time * self.config.sim.gain_delay_factor;
        self.gain_budget += self.tick_len();
        let n = ((self.gain_budget + EPS) / cost).floor() as usize;
        let batch = self.planner.take_batch(n);
        self.gain_budget -= batch.len() as f64 * cost;
        if batch.is_empty() {
            // unused budget does not accumulate while idle
            self.gain_budget = self.gain_budget.min(cost);
            return;
        }
        let jobs = batch
            .into_iter()
            .map(|id| {
                let n = self.graph.node(id);
                GainJob {
                    node: id,
                    xy: n.xy(),
                    z_initial: if id == 0 { self.root_height } else { n.position.z },
                    fixed_height: id == 0,
                }
            })
            .collect();
        self.worker.dispatch(Arc::clone(&self.robot_map), jobs);
    }

    fn expand(&mut self) {
        let mut candidates = Vec::with_capacity(2);
        candidates.push(sample_point(&self.grid, &mut self.rng));
        if self.config.planner.local_sampling {
            let robot = self.robot.pose.position.xy();
            candidates.push(sample_point_local(&self.grid, robot, self.config.planner.r_ls, &mut self.rng));
        }
        for p in candidates.into_iter().flatten() {
            if let Ok(e) = self.graph.expand(p, &self.grid) {
                self.view_yaw.push(0.0);
                self.paths.insert_node(&self.graph, e.node);
                self.planner.on_node_added(&mut self.graph, e.node);
                self.planner.sync_distances(&mut self.graph, &self.paths);
            }
        }
    }

    fn update_anchor(&mut self) {
        let robot = self.robot.pose.position.xy();
        let anchor = nearest_node(&self.graph, robot);
        if anchor != self.paths.anchor() {
            self.paths.reset(&self.graph, anchor);
            self.planner.reorder_work(&self.graph, robot);
            self.planner.sync_distances(&mut self.graph, &self.paths);
        }
    }
}

/// Runs a scenario until it ends.
pub fn run_to_completion(scenario: &Scenario) -> Result<RunOutcome> {
    Ok(Simulation::new(scenario)?.run_to_completion())
}

/// Free voxels of `truth` 6-connected to the voxel containing `start`.
pub fn reachable_free(truth: &VoxelMap, start: Point3) -> Vec<VoxelIndex> {
    let [nx, ny, nz] = truth.dims();
    let lin = |v: VoxelIndex| (v[0] as usize) + nx * ((v[1] as usize) + ny * (v[2] as usize));
    let mut seen = vec![false; nx * ny * nz];
    let mut out = Vec::new();
    let s = truth.voxel_of(start);
    if truth.get(s) != Occupancy::Free {
        return out;
    }
    let mut queue = VecDeque::from([s]);
    seen[lin(s)] = true;
    while let Some(v) = queue.pop_front() {
        out.push(v);
        for d in [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]] {
            let w = [v[0] + d[0], v[1] + d[1], v[2] + d[2]];
            if truth.in_bounds(w) && !seen[lin(w)] && truth.get(w) == Occupancy::Free {
                seen[lin(w)] = true;
                queue.push_back(w);
            }
        }
    }
    out
}

/// Fraction of `reachable` voxels the robot map knows as Free.
pub fn coverage(robot_map: &VoxelMap, reachable: &[VoxelIndex]) -> f64 {
    if reachable.is_empty() {
        return 1.0;
    }
    let seen = reachable
        .iter()
        .filter(|&&v| robot_map.get(v) == Occupancy::Free)
        .count();
    seen as f64 / reachable.len() as f64
}

#[cfg(test)]
mod tests;
