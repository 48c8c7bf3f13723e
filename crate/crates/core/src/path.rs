//! Graph distances from the node nearest the robot.
//!
//! The table is rebuilt with Dijkstra whenever that anchor node changes, and
//! patched incrementally when nodes are added: the new node takes its best
//! neighbour's distance plus the edge, and a relaxation started from it only
//! ever lowers existing entries.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::Point2;
use crate::rrg::{EdgeId, NodeId, RrgGraph};

/// `C(d) = exp(-d)`; an infinite distance costs zero.
pub fn cost(d_xn: f64) -> f64 {
    if d_xn.is_finite() {
        (-d_xn).exp()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: NodeId,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then on id for a deterministic pop order
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Work counters for the priority queue.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PathCounters {
    pub pushes: u64,
    pub pops: u64,
    pub relaxations: u64,
    pub rebuilds: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathTable {
    anchor: NodeId,
    dist: Vec<f64>,
    pred: Vec<Option<EdgeId>>,
    counters: PathCounters,
}

impl PathTable {
    /// Exact single-source shortest paths from `anchor`.
    pub fn rebuild(graph: &RrgGraph, anchor: NodeId) -> Self {
        let mut t = Self {
            anchor,
            dist: Vec::new(),
            pred: Vec::new(),
            counters: PathCounters::default(),
        };
        t.reset(graph, anchor);
        t
    }

    /// Recomputes from scratch for a (possibly new) anchor, keeping counters.
    pub fn reset(&mut self, graph: &RrgGraph, anchor: NodeId) {
        let n = graph.node_count();
        self.anchor = anchor;
        self.dist.clear();
        self.dist.resize(n, f64::INFINITY);
        self.pred.clear();
        self.pred.resize(n, None);
        self.dist[anchor] = 0.0;
        self.counters.rebuilds += 1;
        self.relax_from(graph, anchor);
    }

    pub fn anchor(&self) -> NodeId {
        self.anchor
    }

    pub fn distance(&self, n: NodeId) -> f64 {
        self.dist.get(n).copied().unwrap_or(f64::INFINITY)
    }

    pub fn predecessor(&self, n: NodeId) -> Option<EdgeId> {
        self.pred.get(n).copied().flatten()
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    pub fn counters(&self) -> PathCounters {
        self.counters
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    /// Adds a newly inserted node and propagates any shortcut it creates.
    pub fn insert_node(&mut self, graph: &RrgGraph, new: NodeId) {
        if self.dist.len() < graph.node_count() {
            self.dist.resize(graph.node_count(), f64::INFINITY);
            self.pred.resize(graph.node_count(), None);
        }
        let mut best: Option<(f64, EdgeId)> = None;
        for (nb, edge) in graph.neighbours(new) {
            let d = self.dist[nb] + edge.length;
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, edge.id));
            }
        }
        if let Some((d, e)) = best {
            if d < self.dist[new] {
                self.dist[new] = d;
                self.pred[new] = Some(e);
            }
        }
        if self.dist[new].is_finite() {
            self.relax_from(graph, new);
        }
    }

    /// Dijkstra relaxation seeded at `source`, which must already hold its
    /// final distance. Entries only ever decrease.
    fn relax_from(&mut self, graph: &RrgGraph, source: NodeId) {
        let mut heap = BinaryHeap::new();
        heap.push(Entry {
            dist: self.dist[source],
            node: source,
        });
        self.counters.pushes += 1;
        while let Some(Entry { dist, node }) = heap.pop() {
            self.counters.pops += 1;
            if dist > self.dist[node] {
                continue;
            }
            for (nb, edge) in graph.neighbours(node) {
                self.counters.relaxations += 1;
                let cand = dist + edge.length;
                if cand < self.dist[nb] {
                    self.dist[nb] = cand;
                    self.pred[nb] = Some(edge.id);
                    heap.push(Entry { dist: cand, node: nb });
                    self.counters.pushes += 1;
                }
            }
        }
    }

    /// Node sequence from the anchor to `target`, both included.
    pub fn path_to(&self, graph: &RrgGraph, target: NodeId) -> Option<Vec<NodeId>> {
        if !self.distance(target).is_finite() {
            return None;
        }
        let mut path = vec![target];
        let mut cur = target;
        while cur != self.anchor {
            let e = self.pred[cur]?;
            cur = graph.edge(e).other(cur);
            path.push(cur);
            if path.len() > graph.node_count() {
                return None;
            }
        }
        path.reverse();
        Some(path)
    }
}

/// Node nearest the robot; the source of all path distances.
pub fn nearest_node(graph: &RrgGraph, robot: Point2) -> NodeId {
    graph.nearest(robot).0
}
