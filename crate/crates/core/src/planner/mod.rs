//! Goal selection: the candidate list ordered by gain-cost ratio, the queue of
//! nodes awaiting gain evaluation, goal interruption, recalculation after
//! goal events and the exit timer.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::update_status;
use crate::geometry::Point2;
use crate::path::PathTable;
use crate::rrg::{gain_cost_ratio, NodeId, NodeStatus, RrgGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    /// Fill ratio below which a node counts as explored.
    pub g_min: f64,
    /// Seconds without candidates or goal before exploration ends.
    pub t_exit: f64,
    /// Sensor range; gains within `2 * r_max` of the robot are recalculated
    /// after goal events.
    pub r_max: f64,
    /// Heading tolerance for the visited-node rule (one azimuth bin).
    pub yaw_tolerance: f64,
    /// A challenger must beat the goal's ratio by more than this.
    pub interrupt_margin: f64,
    /// Largest gain a node can report (poll points in one FoV window).
    pub g_max: usize,
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_min >= 0.0 && self.g_min <= 1.0) {
            return Err(Error::config("g_min must lie in [0, 1]"));
        }
        if !(self.t_exit > 0.0) {
            return Err(Error::config("t_exit must be positive"));
        }
        if !(self.r_max > 0.0) {
            return Err(Error::config("r_max must be positive"));
        }
        if self.g_max == 0 {
            return Err(Error::config("g_max must be positive"));
        }
        if self.interrupt_margin < 0.0 {
            return Err(Error::config("interrupt margin must be non-negative"));
        }
        Ok(())
    }
}

/// Ordering key: higher ratio first, then smaller distance, then smaller id.
fn candidate_order(graph: &RrgGraph, a: NodeId, b: NodeId) -> Ordering {
    let (na, nb) = (graph.node(a), graph.node(b));
    nb.gcr
        .total_cmp(&na.gcr)
        .then_with(|| na.d_xn.total_cmp(&nb.d_xn))
        .then_with(|| a.cmp(&b))
}

/// Whether a node belongs in the candidate list.
pub fn is_candidate(graph: &RrgGraph, id: NodeId) -> bool {
    let n = graph.node(id);
    n.has_gain() && matches!(n.status, NodeStatus::Initial | NodeStatus::ActiveGoal)
}

/// Nodes with a computed gain that may still become goals, best first.
#[derive(Debug, Clone, Default)]
pub struct CandidateQueue {
    order: Vec<NodeId>,
    dirty: bool,
}

impl CandidateQueue {
    pub fn mark_dirty(&mut self) {
        self.dirty = true;
    }

    /// Re-collects and re-sorts the list from the graph.
    pub fn refresh(&mut self, graph: &RrgGraph) {
        self.order.clear();
        self.order
            .extend((0..graph.node_count()).filter(|&id| is_candidate(graph, id)));
        self.order.sort_by(|&a, &b| candidate_order(graph, a, b));
        self.dirty = false;
    }

    fn ensure(&mut self, graph: &RrgGraph) {
        if self.dirty {
            self.refresh(graph);
        }
    }

    pub fn head(&mut self, graph: &RrgGraph) -> Option<NodeId> {
        self.ensure(graph);
        self.order.first().copied()
    }

    pub fn is_empty(&mut self, graph: &RrgGraph) -> bool {
        self.ensure(graph);
        self.order.is_empty()
    }

    pub fn ordered(&mut self, graph: &RrgGraph) -> &[NodeId] {
        self.ensure(graph);
        &self.order
    }
}

/// Nodes awaiting gain evaluation, nearest to the robot first.
#[derive(Debug, Clone, Default)]
pub struct GainWorkQueue {
    items: Vec<(f64, NodeId)>,
    queued: Vec<bool>,
    reference: Point2,
}

impl GainWorkQueue {
    fn grow(&mut self, n: usize) {
        if self.queued.len() < n {
            self.queued.resize(n, false);
        }
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.queued.get(id).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Inserts a node (ignoring duplicates) at its distance rank.
    pub fn push(&mut self, graph: &RrgGraph, id: NodeId) -> bool {
        self.grow(graph.node_count());
        if self.queued[id] {
            return false;
        }
        self.queued[id] = true;
        let key = (graph.node(id).xy().distance(self.reference), id);
        let at = self
            .items
            .partition_point(|&(d, n)| (d, n).partial_cmp(&key) == Some(Ordering::Less));
        self.items.insert(at, key);
        true
    }

    /// Re-sorts by distance to a new robot position.
    pub fn reorder(&mut self, graph: &RrgGraph, robot: Point2) {
        self.reference = robot;
        for item in &mut self.items {
            item.0 = graph.node(item.1).xy().distance(robot);
        }
        self.items
            .sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    }

    pub fn pop_nearest(&mut self) -> Option<NodeId> {
        if self.items.is_empty() {
            return None;
        }
        let (_, id) = self.items.remove(0);
        self.queued[id] = false;
        Some(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.items.iter().map(|&(_, id)| id)
    }
}

/// Countdown armed while there is nothing to pursue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitTimer {
    pub t_exit: f64,
    armed_at: Option<f64>,
}

impl ExitTimer {
    pub fn new(t_exit: f64) -> Self {
        Self { t_exit, armed_at: None }
    }

    pub fn arm(&mut self, now: f64) {
        if self.armed_at.is_none() {
            self.armed_at = Some(now);
        }
    }

    pub fn disarm(&mut self) {
        self.armed_at = None;
    }

    pub fn armed_at(&self) -> Option<f64> {
        self.armed_at
    }

    pub fn is_armed(&self) -> bool {
        self.armed_at.is_some()
    }

    pub fn expired(&self, now: f64) -> bool {
        self.armed_at
            .map_or(false, |t| now - t >= self.t_exit - 1e-9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalEvent {
    Reached,
    Failed,
    Aborted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalOutcome {
    Pending,
    Reached,
    Failed,
    Aborted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoalState {
    pub goal: Option<NodeId>,
    pub outcome: GoalOutcome,
}

impl Default for GoalState {
    fn default() -> Self {
        Self {
            goal: None,
            outcome: GoalOutcome::Pending,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interrupt {
    Keep,
    Switch(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Continue,
    Finished,
}

/// What a gain evaluation produced for one node.
#[derive(Debug, Clone, PartialEq)]
pub struct GainUpdate {
    pub node: NodeId,
    /// Snapped sensor height, `None` when no ground was found.
    pub height: Option<f64>,
    pub gain: i64,
    pub best_yaw: f64,
    pub view_yaw: f64,
}

/// Effect of applying a [`GainUpdate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Applied {
    pub status: NodeStatus,
    /// The active goal stopped being a candidate.
    pub goal_invalidated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    GoalSelected,
    GoalReached,
    GoalFailed,
    GoalAborted,
    Terminated,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::GoalSelected => "goal_selected",
            EventKind::GoalReached => "goal_reached",
            EventKind::GoalFailed => "goal_failed",
            EventKind::GoalAborted => "goal_aborted",
            EventKind::Terminated => "terminated",
        }
    }
}

/// One line of the event log:
/// `tick <t> event <kind> node <id> gcr <v>` (`node -1` when no node applies).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerEvent {
    pub tick: u64,
    pub kind: EventKind,
    pub node: Option<NodeId>,
    pub gcr: f64,
}

impl fmt::Display for PlannerEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let node = self.node.map_or(-1, |n| n as i64);
        write!(
            f,
            "tick {} event {} node {} gcr {:.6}",
            self.tick,
            self.kind.as_str(),
            node,
            self.gcr
        )
    }
}

#[derive(Debug, Clone)]
pub struct Planner {
    params: PlannerParams,
    candidates: CandidateQueue,
    work: GainWorkQueue,
    timer: ExitTimer,
    goal: GoalState,
    in_flight: Vec<bool>,
    in_flight_count: usize,
    requeue: Vec<bool>,
}

impl Planner {
    pub fn new(params: PlannerParams) -> Self {
        Self {
            params,
            candidates: CandidateQueue::default(),
            work: GainWorkQueue::default(),
            timer: ExitTimer::new(params.t_exit),
            goal: GoalState::default(),
            in_flight: Vec::new(),
            in_flight_count: 0,
            requeue: Vec::new(),
        }
    }

    pub fn params(&self) -> &PlannerParams {
        &self.params
    }

    pub fn goal(&self) -> Option<NodeId> {
        self.goal.goal
    }

    pub fn goal_state(&self) -> GoalState {
        self.goal
    }

    pub fn timer(&self) -> &ExitTimer {
        &self.timer
    }

    pub fn work_queue(&self) -> &GainWorkQueue {
        &self.work
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight_count
    }

    pub fn candidates(&mut self, graph: &RrgGraph) -> &[NodeId] {
        self.candidates.ordered(graph)
    }

    fn grow(&mut self, n: usize) {
        if self.in_flight.len() < n {
            self.in_flight.resize(n, false);
            self.requeue.resize(n, false);
        }
    }

    /// Queues a node for (re-)evaluation. A node already being evaluated is
    /// queued again once that evaluation lands.
    pub fn enqueue_gain(&mut self, graph: &mut RrgGraph, id: NodeId) {
        self.grow(graph.node_count());
        if graph.node(id).status == NodeStatus::Failed {
            return;
        }
        if self.in_flight[id] {
            self.requeue[id] = true;
            return;
        }
        if !graph.node(id).has_gain() {
            graph.node_mut(id).status = NodeStatus::GainPending;
        }
        self.work.push(graph, id);
    }

    /// Registers a freshly inserted node: queue its gain and stop the timer.
    pub fn on_node_added(&mut self, graph: &mut RrgGraph, id: NodeId) {
        self.enqueue_gain(graph, id);
        self.timer.disarm();
        self.candidates.mark_dirty();
    }

    /// Takes up to `n` nodes for evaluation, nearest first.
    pub fn take_batch(&mut self, n: usize) -> Vec<NodeId> {
        let mut batch = Vec::with_capacity(n.min(self.work.len()));
        while batch.len() < n {
            match self.work.pop_nearest() {
                Some(id) => {
                    self.grow(id + 1);
                    self.in_flight[id] = true;
                    self.in_flight_count += 1;
                    batch.push(id);
                }
                None => break,
            }
        }
        batch
    }

    pub fn reorder_work(&mut self, graph: &RrgGraph, robot: Point2) {
        self.work.reorder(graph, robot);
    }

    /// Applies a finished evaluation: height, gain, heading and the next
    /// status from the explored/visited rule.
    pub fn apply_gain(&mut self, graph: &mut RrgGraph, update: &GainUpdate, tick: u64) -> Applied {
        let id = update.node;
        self.grow(graph.node_count());
        if self.in_flight[id] {
            self.in_flight[id] = false;
            self.in_flight_count -= 1;
        }
        let is_goal = self.goal.goal == Some(id);
        let node = graph.node_mut(id);
        let previous = node.status;
        if let Some(z) = update.height {
            node.position.z = z;
        }
        let status = match update.height {
            None => NodeStatus::Failed,
            Some(_) => update_status(
                previous,
                update.gain,
                self.params.g_max,
                self.params.g_min,
                node.best_yaw,
                update.best_yaw,
                self.params.yaw_tolerance,
            ),
        };
        node.gain = if update.height.is_some() { update.gain } else { -1 };
        node.best_yaw = update.best_yaw;
        node.gain_stamp = Some(tick);
        let mut goal_invalidated = false;
        node.status = if is_goal && status == NodeStatus::Initial {
            NodeStatus::ActiveGoal
        } else {
            goal_invalidated = is_goal;
            status
        };
        let applied = node.status;
        graph.refresh_gcr(id);
        if self.requeue[id] {
            self.requeue[id] = false;
            self.enqueue_gain(graph, id);
        }
        self.candidates.mark_dirty();
        Applied {
            status: applied,
            goal_invalidated,
        }
    }

    /// Copies path distances into the graph and refreshes every ratio.
    pub fn sync_distances(&mut self, graph: &mut RrgGraph, paths: &PathTable) {
        for id in 0..graph.node_count() {
            let n = graph.node_mut(id);
            n.d_xn = paths.distance(id);
            n.path_edge = paths.predecessor(id);
            n.gcr = gain_cost_ratio(n.gain, n.d_xn);
        }
        self.candidates.mark_dirty();
    }

    /// Picks the best candidate as the new goal. Works on whatever gains are
    /// available; never waits for pending evaluations.
    pub fn select_nbv(&mut self, graph: &mut RrgGraph) -> Option<NodeId> {
        debug_assert!(self.goal.goal.is_none(), "select_nbv with an active goal");
        let head = self.candidates.head(graph)?;
        graph.node_mut(head).status = NodeStatus::ActiveGoal;
        self.goal = GoalState {
            goal: Some(head),
            outcome: GoalOutcome::Pending,
        };
        self.timer.disarm();
        Some(head)
    }

    /// Switch when the best candidate is not the goal and strictly beats it.
    pub fn maybe_interrupt(&mut self, graph: &RrgGraph) -> Interrupt {
        let Some(goal) = self.goal.goal else {
            return Interrupt::Keep;
        };
        match self.candidates.head(graph) {
            Some(head)
                if head != goal
                    && graph.node(head).gcr > graph.node(goal).gcr + self.params.interrupt_margin =>
            {
                Interrupt::Switch(head)
            }
            _ => Interrupt::Keep,
        }
    }

    /// Closes the active goal. Reached goals become Visited, failed ones
    /// Failed, aborted ones return to Initial. If the robot moved since the
    /// last recalculation, the goal and every node within `2 r_max` of the
    /// robot are queued for re-evaluation; the queued ids are returned.
    pub fn on_goal_event(
        &mut self,
        graph: &mut RrgGraph,
        event: GoalEvent,
        robot_moved: bool,
        robot: Point2,
    ) -> Result<Vec<NodeId>> {
        let goal = self
            .goal
            .goal
            .ok_or_else(|| Error::Protocol(format!("{event:?} event without an active goal")))?;
        {
            let node = graph.node_mut(goal);
            match event {
                GoalEvent::Reached => node.status = NodeStatus::Visited,
                GoalEvent::Failed => node.status = NodeStatus::Failed,
                GoalEvent::Aborted => {
                    if node.status == NodeStatus::ActiveGoal {
                        node.status = NodeStatus::Initial;
                    }
                }
            }
        }
        self.goal = GoalState {
            goal: None,
            outcome: match event {
                GoalEvent::Reached => GoalOutcome::Reached,
                GoalEvent::Failed => GoalOutcome::Failed,
                GoalEvent::Aborted => GoalOutcome::Aborted,
            },
        };
        self.candidates.mark_dirty();
        if !robot_moved {
            return Ok(Vec::new());
        }
        let mut ids: Vec<NodeId> = graph
            .nodes_within(robot, 2.0 * self.params.r_max)
            .into_iter()
            .map(|(id, _)| id)
            .filter(|&id| id != goal)
            .collect();
        ids.insert(0, goal);
        let mut queued = Vec::new();
        for id in ids {
            let n = graph.node(id);
            let eligible = n.has_gain()
                && matches!(n.status, NodeStatus::Initial | NodeStatus::Visited | NodeStatus::ActiveGoal);
            if eligible {
                self.enqueue_gain(graph, id);
                queued.push(id);
            }
        }
        Ok(queued)
    }

    /// Arms the timer while there is no candidate, no goal and no gain work
    /// outstanding; disarms it otherwise.
    pub fn update_timer(&mut self, graph: &RrgGraph, now: f64) {
        let idle = self.goal.goal.is_none()
            && self.work.is_empty()
            && self.in_flight_count == 0
            && self.candidates.is_empty(graph);
        if idle {
            self.timer.arm(now);
        } else {
            self.timer.disarm();
        }
    }

    pub fn check_termination(&self, now: f64) -> Termination {
        if self.goal.goal.is_none() && self.timer.expired(now) {
            Termination::Finished
        } else {
            Termination::Continue
        }
    }

    /// Full consistency scan of the candidate list; used after each planner
    /// step in debug builds.
    pub fn check_invariants(&mut self, graph: &RrgGraph) -> std::result::Result<(), String> {
        let order = self.candidates.ordered(graph).to_vec();
        for w in order.windows(2) {
            if candidate_order(graph, w[0], w[1]) != Ordering::Less {
                return Err(format!("candidates {} and {} out of order", w[0], w[1]));
            }
        }
        for &id in &order {
            let n = graph.node(id);
            if !is_candidate(graph, id) {
                return Err(format!("node {id} ({}) is not eligible", n.status));
            }
            if n.gcr != gain_cost_ratio(n.gain, n.d_xn) {
                return Err(format!("node {id} has a stale ratio"));
            }
        }
        let goals = graph
            .nodes()
            .iter()
            .filter(|n| n.status == NodeStatus::ActiveGoal)
            .count();
        if goals > usize::from(self.goal.goal.is_some()) {
            return Err(format!("{goals} nodes marked as active goal"));
        }
        Ok(())
    }
}
