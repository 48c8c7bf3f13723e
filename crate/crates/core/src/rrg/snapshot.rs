//! Line-oriented graph snapshot:
//!
//! ```text
//! node <id> <x> <y> <z> <status> <gain> <yaw> <d_xn>
//! edge <id> <a> <b> <len>
//! ```

use std::fmt::Write;

use super::{NodeStatus, RrgGraph};
use crate::error::ParseError;

pub fn write_snapshot(graph: &RrgGraph) -> String {
    let mut out = String::new();
    for n in graph.nodes() {
        writeln!(
            out,
            "node {} {:.6} {:.6} {:.6} {} {} {:.6} {}",
            n.id,
            n.position.x,
            n.position.y,
            n.position.z,
            n.status,
            n.gain,
            n.best_yaw,
            fmt_distance(n.d_xn)
        )
        .unwrap();
    }
    for e in graph.edges() {
        writeln!(out, "edge {} {} {} {:.6}", e.id, e.a, e.b, e.length).unwrap();
    }
    out
}

fn fmt_distance(d: f64) -> String {
    if d.is_finite() {
        format!("{d:.6}")
    } else {
        "inf".to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotNode {
    pub id: usize,
    pub position: [f64; 3],
    pub status: NodeStatus,
    pub gain: i64,
    pub yaw: f64,
    pub d_xn: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotEdge {
    pub id: usize,
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshot {
    pub nodes: Vec<SnapshotNode>,
    pub edges: Vec<SnapshotEdge>,
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot, ParseError> {
    let mut snap = Snapshot::default();
    for (n, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = |what: &str| ParseError::new(n, format!("malformed {what} record: `{line}`"));
        match f.first() {
            None => continue,
            Some(&"node") if f.len() == 9 => {
                let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad("node"));
                snap.nodes.push(SnapshotNode {
                    id: f[1].parse().map_err(|_| bad("node"))?,
                    position: [num(2)?, num(3)?, num(4)?],
                    status: NodeStatus::parse(f[5]).ok_or_else(|| bad("node"))?,
                    gain: f[6].parse().map_err(|_| bad("node"))?,
                    yaw: num(7)?,
                    d_xn: num(8)?,
                });
            }
            Some(&"edge") if f.len() == 5 => {
                let int = |i: usize| f[i].parse::<usize>().map_err(|_| bad("edge"));
                snap.edges.push(SnapshotEdge {
                    id: int(1)?,
                    a: int(2)?,
                    b: int(3)?,
                    length: f[4].parse().map_err(|_| bad("edge"))?,
                });
            }
            Some(_) => return Err(ParseError::new(n, format!("unrecognised record: `{line}`"))),
        }
    }
    Ok(snap)
}
