//! Incremental 2-d tree over node positions.
//!
//! Nodes are appended in insertion order and never removed, which matches how
//! the exploration graph grows. Random insertion order keeps depth close to
//! logarithmic without rebalancing.

use crate::geometry::Point2;

#[derive(Debug, Clone)]
struct KdNode {
    point: Point2,
    id: usize,
    left: Option<u32>,
    right: Option<u32>,
}

#[derive(Debug, Clone, Default)]
pub struct KdTree {
    nodes: Vec<KdNode>,
}

impl KdTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn insert(&mut self, point: Point2, id: usize) {
        let new_index = self.nodes.len() as u32;
        self.nodes.push(KdNode {
            point,
            id,
            left: None,
            right: None,
        });
        if new_index == 0 {
            return;
        }
        let mut cur = 0u32;
        let mut depth = 0usize;
        loop {
            let node = &self.nodes[cur as usize];
            let go_left = coord(point, depth) < coord(node.point, depth);
            let slot = if go_left { node.left } else { node.right };
            match slot {
                Some(next) => {
                    cur = next;
                    depth += 1;
                }
                None => {
                    let node = &mut self.nodes[cur as usize];
                    if go_left {
                        node.left = Some(new_index);
                    } else {
                        node.right = Some(new_index);
                    }
                    return;
                }
            }
        }
    }

    /// Nearest stored id and its distance; ties resolve to the smaller id.
    pub fn nearest(&self, query: Point2) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(0, 0, query, &mut best);
        Some((best.0, best.1.sqrt()))
    }

    fn nearest_rec(&self, index: u32, depth: usize, q: Point2, best: &mut (usize, f64)) {
        let node = &self.nodes[index as usize];
        let d2 = node.point.distance_squared(q);
        if d2 < best.1 || (d2 == best.1 && node.id < best.0) {
            *best = (node.id, d2);
        }
        let diff = coord(q, depth) - coord(node.point, depth);
        let (near, far) = if diff < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        if let Some(n) = near {
            self.nearest_rec(n, depth + 1, q, best);
        }
        if let Some(f) = far {
            if diff * diff <= best.1 {
                self.nearest_rec(f, depth + 1, q, best);
            }
        }
    }

    /// All ids within `radius` (inclusive), sorted by ascending id.
    pub fn within_radius(&self, query: Point2, radius: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        if !self.nodes.is_empty() {
            self.radius_rec(0, 0, query, radius * radius, &mut out);
        }
        out.sort_unstable_by_key(|&(id, _)| id);
        out
    }

    fn radius_rec(&self, index: u32, depth: usize, q: Point2, r2: f64, out: &mut Vec<(usize, f64)>) {
        let node = &self.nodes[index as usize];
        let d2 = node.point.distance_squared(q);
        if d2 <= r2 {
            out.push((node.id, d2.sqrt()));
        }
        let diff = coord(q, depth) - coord(node.point, depth);
        if let Some(l) = node.left {
            if diff < 0.0 || diff * diff <= r2 {
                self.radius_rec(l, depth + 1, q, r2, out);
            }
        }
        if let Some(r) = node.right {
            if diff >= 0.0 || diff * diff <= r2 {
                self.radius_rec(r, depth + 1, q, r2, out);
            }
        }
    }
}

#[inline]
fn coord(p: Point2, depth: usize) -> f64 {
    if depth % 2 == 0 {
        p.x
    } else {
        p.y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn linear_nearest(points: &[Point2], q: Point2) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, p) in points.iter().enumerate() {
            let d2 = p.distance_squared(q);
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        (best.0, best.1.sqrt())
    }

    #[test]
    fn empty_tree_has_no_neighbours() {
        let t = KdTree::new();
        assert!(t.nearest(Point2::new(0.0, 0.0)).is_none());
        assert!(t.within_radius(Point2::new(0.0, 0.0), 10.0).is_empty());
    }

    #[test]
    fn duplicate_coordinates_resolve_to_smallest_id() {
        let mut t = KdTree::new();
        t.insert(Point2::new(1.0, 1.0), 0);
        t.insert(Point2::new(1.0, 1.0), 1);
        t.insert(Point2::new(1.0, 1.0), 2);
        assert_eq!(t.nearest(Point2::new(1.0, 1.2)).unwrap().0, 0);
    }

    proptest! {
        #[test]
        fn queries_match_linear_scan(
            pts in prop::collection::vec((0.0f64..50.0, 0.0f64..50.0), 1..500),
            qs in prop::collection::vec((-5.0f64..55.0, -5.0f64..55.0), 10),
            radius in 0.1f64..8.0,
        ) {
            let points: Vec<Point2> = pts.iter().map(|&(x, y)| Point2::new(x, y)).collect();
            let mut t = KdTree::new();
            for (i, &p) in points.iter().enumerate() {
                t.insert(p, i);
            }
            for &(x, y) in &qs {
                let q = Point2::new(x, y);
                let (id, d) = t.nearest(q).unwrap();
                let (lid, ld) = linear_nearest(&points, q);
                prop_assert_eq!(d, ld);
                prop_assert_eq!(id, lid);
                let got: Vec<usize> = t.within_radius(q, radius).into_iter().map(|(i, _)| i).collect();
                let want: Vec<usize> = points
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.distance_squared(q) <= radius * radius)
                    .map(|(i, _)| i)
                    .collect();
                prop_assert_eq!(got, want);
            }
        }
    }
}
