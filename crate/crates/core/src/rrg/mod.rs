//! The exploration graph: node and edge storage, spatial index, sampling and
//! the incremental expansion step.

mod kdtree;
mod snapshot;

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Point3};
use crate::steer::{steer, RobotFootprint};
use crate::world::{GridMap2D, Traversability};

pub use kdtree::KdTree;
pub use snapshot::{parse_snapshot, write_snapshot, Snapshot, SnapshotEdge, SnapshotNode};

pub type NodeId = usize;
pub type EdgeId = usize;

/// Numerical slack for the edge-length window.
pub const LENGTH_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    /// Candidate (or freshly inserted, before being queued for gain).
    Initial,
    /// Waiting for its first gain evaluation.
    GainPending,
    /// The goal currently being pursued.
    ActiveGoal,
    /// Reached as a goal; awaiting re-evaluation.
    Visited,
    /// Too little expected gain left.
    Explored,
    /// Unreachable ground or failed navigation.
    Failed,
}

impl NodeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeStatus::Initial => "initial",
            NodeStatus::GainPending => "gain_pending",
            NodeStatus::ActiveGoal => "active_goal",
            NodeStatus::Visited => "visited",
            NodeStatus::Explored => "explored",
            NodeStatus::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "initial" => NodeStatus::Initial,
            "gain_pending" => NodeStatus::GainPending,
            "active_goal" => NodeStatus::ActiveGoal,
            "visited" => NodeStatus::Visited,
            "explored" => NodeStatus::Explored,
            "failed" => NodeStatus::Failed,
            _ => return None,
        })
    }
}

impl fmt::Display for NodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub position: Point3,
    pub status: NodeStatus,
    /// Expected new voxels; `-1` marks unreachable ground. Meaningful once
    /// `gain_stamp` is set.
    pub gain: i64,
    pub best_yaw: f64,
    pub gcr: f64,
    /// Graph distance from the anchor node (the node nearest the robot).
    pub d_xn: f64,
    /// Predecessor edge on the shortest path from the anchor.
    pub path_edge: Option<EdgeId>,
    /// Tick of the last applied gain evaluation.
    pub gain_stamp: Option<u64>,
    pub edges: Vec<EdgeId>,
}

impl Node {
    pub fn xy(&self) -> Point2 {
        self.position.xy()
    }

    pub fn has_gain(&self) -> bool {
        self.gain_stamp.is_some()
    }
}

/// Gain-cost ratio `G * exp(-d)`. Unreachable nodes and infinite distances
/// score zero.
pub fn gain_cost_ratio(gain: i64, d_xn: f64) -> f64 {
    if gain < 0 || !d_xn.is_finite() {
        0.0
    } else {
        gain as f64 * (-d_xn).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub a: NodeId,
    pub b: NodeId,
    pub length: f64,
}

impl Edge {
    pub fn other(&self, n: NodeId) -> NodeId {
        if self.a == n {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphMode {
    /// Connect to every steerable node within `d_max`.
    Graph,
    /// Connect only to the nearest node, at exactly `d_min`.
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionParams {
    pub mode: GraphMode,
    pub d_min: f64,
    pub d_max: f64,
    pub footprint: RobotFootprint,
}

impl ExpansionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_min > 0.0 && self.d_min <= self.d_max) {
            return Err(Error::config(format!(
                "expansion requires 0 < d_min <= d_max (got {} .. {})",
                self.d_min, self.d_max
            )));
        }
        self.footprint.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    TooClose,
    NoConnection,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rejection::TooClose => "too_close",
            Rejection::NoConnection => "no_connection",
        })
    }
}

/// A node inserted by [`RrgGraph::expand`].
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub node: NodeId,
    /// Neighbours the new node was connected to.
    pub connected: Vec<NodeId>,
}

#[derive(Debug, Clone)]
pub struct RrgGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    index: KdTree,
    params: ExpansionParams,
}

impl RrgGraph {
    /// A graph holding only the root node at `root`.
    pub fn new(root: Point3, params: ExpansionParams) -> Self {
        let mut g = Self {
            nodes: Vec::new(),
            edges: Vec::new(),
            index: KdTree::new(),
            params,
        };
        let id = g.push_node(root);
        g.nodes[id].d_xn = 0.0;
        g
    }

    pub fn params(&self) -> &ExpansionParams {
        &self.params
    }

    pub fn mode(&self) -> GraphMode {
        self.params.mode
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id]
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `(neighbour, edge)` pairs of a node.
    pub fn neighbours(&self, n: NodeId) -> impl Iterator<Item = (NodeId, &Edge)> + '_ {
        self.nodes[n].edges.iter().map(move |&e| {
            let edge = &self.edges[e];
            (edge.other(n), edge)
        })
    }

    pub fn nearest(&self, p: Point2) -> (NodeId, f64) {
        self.index.nearest(p).expect("graph always holds the root")
    }

    pub fn nodes_within(&self, p: Point2, radius: f64) -> Vec<(NodeId, f64)> {
        self.index.within_radius(p, radius)
    }

    fn push_node(&mut self, position: Point3) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node {
            id,
            position,
            status: NodeStatus::Initial,
            gain: 0,
            best_yaw: 0.0,
            gcr: 0.0,
            d_xn: f64::INFINITY,
            path_edge: None,
            gain_stamp: None,
            edges: Vec::new(),
        });
        self.index.insert(position.xy(), id);
        id
    }

    fn push_edge(&mut self, a: NodeId, b: NodeId) -> EdgeId {
        debug_assert_ne!(a, b);
        debug_assert!(self.edge_between(a, b).is_none());
        let id = self.edges.len();
        let length = self.nodes[a].xy().distance(self.nodes[b].xy());
        self.edges.push(Edge { id, a, b, length });
        self.nodes[a].edges.push(id);
        self.nodes[b].edges.push(id);
        id
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.nodes[a]
            .edges
            .iter()
            .copied()
            .find(|&e| self.edges[e].other(a) == b)
    }

    /// One expansion attempt for an accepted sample.
    ///
    /// The sample is rejected when it lies closer than `d_min` to the nearest
    /// node. Otherwise it is snapped to its tile centre and pulled in to
    /// `d_max` of the nearest node (graph mode) or placed at exactly `d_min`
    /// from it (tree mode), then connected to every node within `d_max` that
    /// passes [`steer`] (graph mode) or to the nearest node only (tree mode).
    pub fn expand(&mut self, candidate: Point2, grid: &GridMap2D) -> Result<Expansion, Rejection> {
        let ExpansionParams {
            mode,
            d_min,
            d_max,
            footprint,
        } = self.params;
        let (near, d_near) = self.nearest(candidate);
        if d_near < d_min {
            return Err(Rejection::TooClose);
        }
        let near_xy = self.nodes[near].xy();
        let mut p = grid.tile_center(grid.tile_of(candidate));
        let d = p.distance(near_xy);
        if d <= 0.0 {
            return Err(Rejection::TooClose);
        }
        match mode {
            GraphMode::Graph => {
                if d > d_max {
                    p = near_xy + (p - near_xy) * (d_max / d);
                }
            }
            GraphMode::Tree => p = near_xy + (p - near_xy) * (d_min / d),
        }

        // snapping and pull-in may have moved the sample toward other nodes
        let (closest, d_closest) = self.nearest(p);
        if d_closest < d_min - LENGTH_EPS
            || grid.tile_of(p) == grid.tile_of(self.nodes[closest].xy())
        {
            return Err(Rejection::TooClose);
        }

        let candidates: Vec<NodeId> = match mode {
            GraphMode::Graph => self
                .nodes_within(p, d_max + LENGTH_EPS)
                .into_iter()
                .map(|(id, _)| id)
                .collect(),
            GraphMode::Tree => vec![near],
        };
        let connected: Vec<NodeId> = candidates
            .into_iter()
            .filter(|&n| steer(grid, p, self.nodes[n].xy(), &footprint).passed())
            .collect();
        if connected.is_empty() {
            return Err(Rejection::NoConnection);
        }
        let z = connected.iter().map(|&n| self.nodes[n].position.z).sum::<f64>() / connected.len() as f64;
        let id = self.push_node(p.with_z(z));
        for &n in &connected {
            self.push_edge(id, n);
        }
        Ok(Expansion { node: id, connected })
    }

    /// Nodes reachable from the root by breadth-first search.
    pub fn reachable_from_root(&self) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(n) = queue.pop_front() {
            for (m, _) in self.neighbours(n) {
                if !seen[m] {
                    seen[m] = true;
                    count += 1;
                    queue.push_back(m);
                }
            }
        }
        count
    }

    /// Recomputes a node's gain-cost ratio from its stored gain and distance.
    pub fn refresh_gcr(&mut self, id: NodeId) {
        let n = &mut self.nodes[id];
        n.gcr = gain_cost_ratio(n.gain, n.d_xn);
    }
}

/// Uniform sample over the known part of the grid; `None` unless the sample
/// lands on a Traversable tile.
pub fn sample_point<R: Rng + ?Sized>(grid: &GridMap2D, rng: &mut R) -> Option<Point2> {
    let (lo, hi) = grid.known_bounds()?;
    let p = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
    (grid.state_at(p) == Traversability::Traversable).then_some(p)
}

/// Uniform sample over the disc of radius `r_ls` around the robot, drawn
/// once from the enclosing square; `None` when outside the disc or not on a
/// Traversable tile.
pub fn sample_point_local<R: Rng + ?Sized>(
    grid: &GridMap2D,
    robot: Point2,
    r_ls: f64,
    rng: &mut R,
) -> Option<Point2> {
    let offset = Point2::new(rng.gen_range(-r_ls..r_ls), rng.gen_range(-r_ls..r_ls));
    if offset.norm() > r_ls {
        return None;
    }
    let p = robot + offset;
    (grid.state_at(p) == Traversability::Traversable).then_some(p)
}
