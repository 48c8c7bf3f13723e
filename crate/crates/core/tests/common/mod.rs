//! Brute-force oracles and the checks built on them. Shared by the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rne_core::gain::{build_pollset, evaluate_gain, update_status};
use rne_core::path::PathTable;
use rne_core::rrg::{ExpansionParams, GraphMode, NodeStatus, RrgGraph};
use rne_core::steer::{corridor_remainder, steer, RobotFootprint};
use rne_core::world::{GridMap2D, Occupancy, SensorModel, Traversability, VoxelIndex, VoxelMap};
use rne_core::{Point2, Point3};

pub type Check = Result<String, String>;

pub fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

// ---------------------------------------------------------------- steer

/// Every tile whose centre lies in the disc at `a` or in the corridor toward
/// `b` (plus the tile holding `a`) must be Traversable. Tiles off the grid
/// count as Unknown.
pub fn steer_oracle(grid: &GridMap2D, a: Point2, b: Point2, r: f64, w: f64) -> bool {
    let res = grid.resolution();
    let o = grid.origin();
    let d = a.distance(b);
    let d_diff = (r * r - w * w / 4.0).max(0.0).sqrt();
    let d_rem = (d - 2.0 * d_diff).max(0.0);
    let (ux, uy) = ((b.x - a.x) / d, (b.y - a.y) / d);
    let (mx, my) = ((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
    let inside = |cx: f64, cy: f64| {
        let disc = (cx - a.x).powi(2) + (cy - a.y).powi(2) <= r * r + 1e-9;
        let along = (cx - mx) * ux + (cy - my) * uy;
        let across = -(cx - mx) * uy + (cy - my) * ux;
        let corridor = d_rem > 0.0 && along.abs() <= d_rem / 2.0 + 1e-9 && across.abs() <= w / 2.0 + 1e-9;
        disc || corridor
    };
    let [nx, ny] = grid.dims();
    let margin = ((r + d) / res).ceil() as i64 + 2;
    let own = (((a.x - o.x) / res).floor() as i64, ((a.y - o.y) / res).floor() as i64);
    for i in -margin..nx as i64 + margin {
        for j in -margin..ny as i64 + margin {
            let cx = o.x + (i as f64 + 0.5) * res;
            let cy = o.y + (j as f64 + 0.5) * res;
            if ((i, j) == own || inside(cx, cy)) && grid.state((i, j)) != Traversability::Traversable {
                return false;
            }
        }
    }
    true
}

/// Random 40 x 40 grids with scattered obstacles and unknown patches.
pub fn check_steer_oracle(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let (mut passes, mut fails) = (0, 0);
    for n in 0..instances {
        let mut grid = GridMap2D::new(Point2::new(0.0, 0.0), 0.1, [40, 40], Traversability::Traversable);
        let blobs = rng.gen_range(0..6);
        for _ in 0..blobs {
            let (ci, cj) = (rng.gen_range(0..40), rng.gen_range(0..40));
            let state = if rng.gen_bool(0.7) { Traversability::Obstacle } else { Traversability::Unknown };
            for _ in 0..rng.gen_range(1..6) {
                let t = (ci + rng.gen_range(-2..3), cj + rng.gen_range(-2..3));
                if grid.in_bounds(t) {
                    grid.set(t, state);
                }
            }
        }
        let w = rng.gen_range(0.05..0.6);
        let r = rng.gen_range(w / 2.0..w / 2.0 + 0.4);
        let fp = RobotFootprint::new(r, w).map_err(|e| e.to_string())?;
        let a = Point2::new(rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0));
        let b = Point2::new(rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0));
        if a.distance(b) < 1e-6 {
            continue;
        }
        let got = steer(&grid, a, b, &fp).passed();
        let want = steer_oracle(&grid, a, b, r, w);
        if got != want {
            return Err(format!(
                "instance {n}: steer says {got}, oracle says {want} (a = {a}, b = {b}, r = {r}, w = {w})"
            ));
        }
        if got {
            passes += 1;
        } else {
            fails += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 10.0 {
        return Err(format!("took {elapsed:.2} s"));
    }
    Ok(format!("{} instances ({passes} pass / {fails} fail) agree, {elapsed:.2} s", passes + fails))
}

/// Hand-derived corridor remainder values.
pub fn check_corridor_values() -> Check {
    let fp = RobotFootprint::new(0.5, 0.6).map_err(|e| e.to_string())?;
    let o = Point2::new(0.0, 0.0);
    let cases = [
        (fp, 2.0, 0.4, 1.2),
        (RobotFootprint::new(0.3, 0.6).map_err(|e| e.to_string())?, 2.0, 0.0, 2.0),
        (fp, 0.7, 0.4, 0.0),
    ];
    for (fp, d, diff, rem) in cases {
        let (got_diff, got_rem) = corridor_remainder(Point2::new(d, 0.0), o, &fp).map_err(|e| e.to_string())?;
        if (got_diff - diff).abs() > 1e-9 || (got_rem - rem).abs() > 1e-9 {
            return Err(format!("d = {d}: got ({got_diff}, {got_rem}), want ({diff}, {rem})"));
        }
    }
    Ok("(0.4, 1.2), (0, 2.0), (0.4, 0) within 1e-9".into())
}

// ---------------------------------------------------------------- path

/// Single-source shortest paths by repeated edge relaxation.
pub fn bellman_ford(graph: &RrgGraph, source: usize) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; graph.node_count()];
    d[source] = 0.0;
    for _ in 0..graph.node_count() {
        let mut changed = false;
        for e in graph.edges() {
            for (u, v) in [(e.a, e.b), (e.b, e.a)] {
                if d[u] + e.length < d[v] {
                    d[v] = d[u] + e.length;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    d
}

fn compare_table(graph: &RrgGraph, table: &PathTable) -> Result<(), String> {
    let want = bellman_ford(graph, table.anchor());
    for (v, &w) in want.iter().enumerate() {
        let got = table.distance(v);
        if got != w {
            return Err(format!("node {v}: table {got}, oracle {w}"));
        }
        if let Some(p) = table.path_to(graph, v) {
            let sum: f64 = p
                .windows(2)
                .map(|s| graph.edge(graph.edge_between(s[0], s[1]).unwrap()).length)
                .sum();
            if (sum - got).abs() > 1e-9 {
                return Err(format!("node {v}: path sums to {sum}, table says {got}"));
            }
        }
    }
    Ok(())
}

/// Random interleavings of insertions and anchor changes, each step checked
/// against Bellman-Ford.
pub fn check_dijkstra(interleavings: usize, max_nodes: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = 0usize;
    let mut largest = 0;
    for run in 0..interleavings {
        let side = 260;
        let mut grid = GridMap2D::new(Point2::new(0.0, 0.0), 0.1, [side, side], Traversability::Traversable);
        for _ in 0..rng.gen_range(0..40) {
            let (ci, cj) = (rng.gen_range(0..side as i64), rng.gen_range(0..side as i64));
            for di in 0..rng.gen_range(2..25) {
                if grid.in_bounds((ci + di, cj)) {
                    grid.set((ci + di, cj), Traversability::Obstacle);
                }
            }
        }
        let mode = if rng.gen_bool(0.8) { GraphMode::Graph } else { GraphMode::Tree };
        let params = ExpansionParams {
            mode,
            d_min: 1.0,
            d_max: 2.0,
            footprint: RobotFootprint::new(0.3, 0.4).unwrap(),
        };
        let mut g = RrgGraph::new(Point3::new(13.05, 13.05, 0.5), params);
        let mut table = PathTable::rebuild(&g, 0);
        let target = if run % 20 == 0 { max_nodes } else { rng.gen_range(5..=max_nodes / 2) };
        let mut attempts = 0;
        while g.node_count() < target && attempts < target * 40 {
            attempts += 1;
            if rng.gen_bool(0.1) {
                let anchor = rng.gen_range(0..g.node_count());
                table.reset(&g, anchor);
            } else {
                let p = Point2::new(rng.gen_range(0.0..26.0), rng.gen_range(0.0..26.0));
                match g.expand(p, &grid) {
                    Ok(e) => table.insert_node(&g, e.node),
                    Err(_) => continue,
                }
            }
            checks += 1;
            compare_table(&g, &table).map_err(|e| format!("interleaving {run}, {} nodes: {e}", g.node_count()))?;
        }
        largest = largest.max(g.node_count());
    }
    Ok(format!("{interleavings} interleavings, {checks} states checked, up to {largest} nodes"))
}

// ---------------------------------------------------------------- gain

/// Poll lattice defined by integer index ranges, independent of the library.
pub struct Lattice {
    pub dr: f64,
    pub dtheta: f64,
    pub dphi: f64,
    pub i: (i64, i64),
    pub j: (i64, i64),
    pub k: usize,
}

/// Gain per azimuth bin, counting a poll point iff its voxel is Unknown and
/// the straight segment from the sensor to it crosses no Occupied voxel and
/// stays inside the map.
pub fn srp_oracle(map: &VoxelMap, l: &Lattice, at: Point3) -> Vec<u32> {
    let step = map.edge_length() / 20.0;
    let mut bins = vec![0u32; l.k];
    for (k, bin) in bins.iter_mut().enumerate() {
        let phi = k as f64 * l.dphi;
        for j in l.j.0..=l.j.1 {
            let theta = j as f64 * l.dtheta;
            let dir = [theta.cos() * phi.cos(), theta.cos() * phi.sin(), theta.sin()];
            for i in l.i.0..=l.i.1 {
                let r = i as f64 * l.dr;
                let p = Point3::new(at.x + r * dir[0], at.y + r * dir[1], at.z + r * dir[2]);
                if map.get(map.voxel_of(p)) != Occupancy::Unknown || !map.contains(p) {
                    continue;
                }
                let n = (r / step).ceil() as usize;
                let clear = (0..n).all(|s| {
                    let t = s as f64 * step;
                    let q = Point3::new(at.x + t * dir[0], at.y + t * dir[1], at.z + t * dir[2]);
                    map.contains(q) && map.get(map.voxel_of(q)) != Occupancy::Occupied
                });
                if clear {
                    *bin += 1;
                }
            }
        }
    }
    bins
}

/// Best circular window by brute force over every start.
pub fn best_window_oracle(bins: &[u32], w: usize) -> (usize, u64) {
    let n = bins.len();
    (0..n)
        .map(|s| (s, (0..w).map(|o| bins[(s + o) % n] as u64).sum::<u64>()))
        .fold((0, 0), |best, c| if c.1 > best.1 { c } else { best })
}

fn ang_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Fixture maps for the SRP comparison, each with a sensor position.
pub fn srp_fixtures() -> Vec<(&'static str, VoxelMap, Point3)> {
    let o = Point3::new(0.0, 0.0, 0.0);
    let mut out = Vec::new();

    // half-scanned wall: known free half-space west of a wall, unknown east
    let mut m = VoxelMap::new(o, 0.1, [30, 30, 10]);
    for i in 0..30 {
        for j in 0..30 {
            m.set([i, j, 0], Occupancy::Occupied);
            for k in 1..10 {
                if i < 15 {
                    m.set([i, j, k], Occupancy::Free);
                }
            }
            if i == 15 && j < 18 {
                for k in 1..10 {
                    m.set([i, j, k], Occupancy::Occupied);
                }
            }
        }
    }
    out.push(("half-scanned wall", m, Point3::new(1.05, 1.05, 0.55)));

    // scanned room corner with a pillar, rest unknown
    let mut m = VoxelMap::new(o, 0.1, [30, 30, 10]);
    for i in 0..30 {
        for j in 0..30 {
            m.set([i, j, 0], Occupancy::Occupied);
            if i < 12 && j < 20 {
                for k in 1..10 {
                    m.set([i, j, k], Occupancy::Free);
                }
            }
        }
    }
    for i in 5..8 {
        for j in 8..11 {
            for k in 0..10 {
                m.set([i, j, k], Occupancy::Occupied);
            }
        }
    }
    out.push(("pillar corner", m, Point3::new(0.55, 1.55, 0.45)));

    // random boxes over a partially known volume
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut m = VoxelMap::new(o, 0.1, [30, 30, 10]);
    for i in 0..30 {
        for j in 0..30 {
            m.set([i, j, 0], Occupancy::Occupied);
            for k in 1..10 {
                if rng.gen_bool(0.5) {
                    m.set([i, j, k], Occupancy::Free);
                }
            }
        }
    }
    for _ in 0..14 {
        let (i0, j0) = (rng.gen_range(0..27), rng.gen_range(0..27));
        let (w, d, h) = (rng.gen_range(1..4), rng.gen_range(1..4), rng.gen_range(2..10));
        if i0 <= 17 && i0 + w >= 14 && j0 <= 17 && j0 + d >= 14 {
            continue;
        }
        for i in i0..i0 + w {
            for j in j0..j0 + d {
                for k in 0..h {
                    m.set([i, j, k], Occupancy::Occupied);
                }
            }
        }
    }
    out.push(("random boxes", m, Point3::new(1.55, 1.55, 0.55)));
    out
}

pub fn camera(r_min: f64, r_max: f64) -> SensorModel {
    SensorModel {
        hfov: 90f64.to_radians(),
        vfov_min: -30f64.to_radians(),
        vfov_max: 30f64.to_radians(),
        r_min,
        r_max,
        h_sensor: 0.5,
        azimuth_rays: 90,
        elevation_rays: 30,
    }
}

/// SRP against the line-of-sight oracle on the fixtures: gain within 10%,
/// best heading within two azimuth bins.
pub fn check_srp_fixtures() -> Check {
    let sensor = camera(0.2, 2.0);
    let set = build_pollset(&sensor, 0.1, 10f64.to_radians(), 10f64.to_radians()).map_err(|e| e.to_string())?;
    let lattice = Lattice {
        dr: 0.1,
        dtheta: 10f64.to_radians(),
        dphi: 10f64.to_radians(),
        i: (2, 20),
        j: (-3, 3),
        k: 36,
    };
    let window = 9;
    let mut notes = Vec::new();
    for (name, map, at) in srp_fixtures() {
        let got = evaluate_gain(&map, &set, at, sensor.hfov);
        let bins = srp_oracle(&map, &lattice, at);
        let (start, want) = best_window_oracle(&bins, window);
        let want_yaw = start as f64 * lattice.dphi;
        let rel = if want == 0 { got.gain as f64 } else { (got.gain as f64 - want as f64).abs() / want as f64 };
        let yaw_err = ang_dist(got.best_yaw, want_yaw);
        if rel > 0.10 || yaw_err > 2.0 * lattice.dphi + 1e-9 {
            return Err(format!(
                "{name}: G = {} vs oracle {want} ({:.1}%), yaw {:.1} vs {:.1} deg",
                got.gain,
                rel * 100.0,
                got.best_yaw.to_degrees(),
                want_yaw.to_degrees()
            ));
        }
        notes.push(format!("{name} {:.1}%/{:.0}deg", rel * 100.0, yaw_err.to_degrees()));
    }
    Ok(notes.join(", "))
}

/// |P| for random step sizes and sensor bounds drawn on integer grids, so the
/// closed form can be evaluated exactly with integer arithmetic.
pub fn check_pollset_cardinality(draws: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 0..draws {
        // centimetres and whole degrees
        let dr_cm: i64 = rng.gen_range(5..=40);
        let rmin_cm: i64 = rng.gen_range(0..=100);
        let rmax_cm: i64 = rng.gen_range(rmin_cm + dr_cm..=rmin_cm + 1500);
        let dth: i64 = rng.gen_range(1..=20);
        let dph: i64 = rng.gen_range(1..=45);
        let th_min: i64 = rng.gen_range(-80..=0);
        let th_max: i64 = rng.gen_range(th_min + dth..=85);
        let i_count = rmax_cm.div_euclid(dr_cm) - (rmin_cm + dr_cm - 1).div_euclid(dr_cm) + 1;
        let j_count = th_max.div_euclid(dth) - (-((-th_min).div_euclid(dth))) + 1;
        let k_count = (360 + dph - 1) / dph;
        let want = (i_count * j_count * k_count) as usize;
        let sensor = SensorModel {
            hfov: TAU,
            vfov_min: (th_min as f64).to_radians(),
            vfov_max: (th_max as f64).to_radians(),
            r_min: rmin_cm as f64 / 100.0,
            r_max: rmax_cm as f64 / 100.0,
            h_sensor: 0.5,
            azimuth_rays: 1,
            elevation_rays: 1,
        };
        let set = build_pollset(
            &sensor,
            dr_cm as f64 / 100.0,
            (dth as f64).to_radians(),
            (dph as f64).to_radians(),
        )
        .map_err(|e| e.to_string())?;
        if set.len() != want {
            return Err(format!(
                "draw {n}: |P| = {} but closed form gives {want} (dr {dr_cm} cm, r {rmin_cm}..{rmax_cm} cm, dtheta {dth}, theta {th_min}..{th_max}, dphi {dph})",
                set.len()
            ));
        }
    }
    Ok(format!("{draws} parameter draws exact"))
}

/// The node status rule restated branch by branch.
pub fn status_oracle(prev: NodeStatus, gain: i64, g_max: usize, g_min: f64, prev_yaw: f64, new_yaw: f64, tol: f64) -> NodeStatus {
    if gain == -1 {
        NodeStatus::Failed
    } else if (gain as f64) / (g_max as f64) < g_min {
        NodeStatus::Explored
    } else if prev == NodeStatus::Visited && ang_dist(prev_yaw, new_yaw) <= tol + 1e-9 {
        NodeStatus::Explored
    } else {
        NodeStatus::Initial
    }
}

pub fn check_status_rule() -> Check {
    let statuses = [
        NodeStatus::Initial,
        NodeStatus::GainPending,
        NodeStatus::ActiveGoal,
        NodeStatus::Visited,
        NodeStatus::Explored,
    ];
    let tol = 10f64.to_radians();
    let mut hits: BTreeMap<&str, usize> = BTreeMap::new();
    let mut cases = 0usize;
    for g_min in [0.05, 0.1] {
        for g_max in [100usize, 360, 2000] {
            for prev in statuses {
                for gain in (-1..=g_max as i64).step_by(if g_max > 400 { 7 } else { 1 }) {
                    for dy in -40..=40 {
                        let prev_yaw = 1.3;
                        let new_yaw = prev_yaw + dy as f64 * 0.5f64.to_radians() + if dy % 3 == 0 { TAU } else { 0.0 };
                        let got = update_status(prev, gain, g_max, g_min, prev_yaw, new_yaw, tol);
                        let want = status_oracle(prev, gain, g_max, g_min, prev_yaw, new_yaw, tol);
                        cases += 1;
                        if got != want {
                            return Err(format!(
                                "prev {prev}, G {gain}/{g_max}, G_min {g_min}, dyaw {:.1} deg: {got} vs {want}",
                                dy as f64 * 0.5
                            ));
                        }
                        let branch = match want {
                            NodeStatus::Failed => "failed",
                            NodeStatus::Initial => "initial",
                            _ if (gain as f64) / (g_max as f64) < g_min => "explored-ratio",
                            _ => "explored-visited",
                        };
                        *hits.entry(branch).or_default() += 1;
                    }
                }
            }
        }
    }
    if hits.len() != 4 {
        return Err(format!("sweep reached only {:?}", hits.keys().collect::<Vec<_>>()));
    }
    // the two quoted examples
    if update_status(NodeStatus::Initial, 4, 100, 0.05, 0.0, 0.0, tol) != NodeStatus::Explored
        || update_status(NodeStatus::Initial, 30, 100, 0.05, 0.0, 0.0, tol) != NodeStatus::Initial
    {
        return Err("quoted examples disagree".into());
    }
    Ok(format!("{cases} cases over 4 branches, G_min 0.05 and 0.1"))
}

// ---------------------------------------------------------------- world

/// Voxels a scan should mark Free: some point of the voxel (centre, face
/// and corner samples) lies inside range and FoV with a clear line of sight.
pub fn visible_free_oracle(truth: &VoxelMap, at: Point3, sensor: &SensorModel) -> Vec<VoxelIndex> {
    let [nx, ny, nz] = truth.dims();
    let e = truth.edge_length();
    let step = e / 20.0;
    let offsets = [-0.45, 0.0, 0.45];
    let sees = |p: Point3| {
        let (dx, dy, dz) = (p.x - at.x, p.y - at.y, p.z - at.z);
        let r = (dx * dx + dy * dy + dz * dz).sqrt();
        if r > sensor.r_max {
            return false;
        }
        if r < 1e-9 {
            return true;
        }
        let el = dz.atan2((dx * dx + dy * dy).sqrt());
        if el < sensor.vfov_min || el > sensor.vfov_max {
            return false;
        }
        let n = (r / step).ceil() as usize;
        (1..n).all(|s| {
            let t = s as f64 / n as f64;
            let q = Point3::new(at.x + t * dx, at.y + t * dy, at.z + t * dz);
            truth.get(truth.voxel_of(q)) != Occupancy::Occupied
        })
    };
    let mut out = Vec::new();
    for i in 0..nx as i64 {
        for j in 0..ny as i64 {
            for k in 0..nz as i64 {
                let v = [i, j, k];
                if truth.get(v) != Occupancy::Free {
                    continue;
                }
                let c = truth.voxel_center(v);
                let visible = offsets.iter().any(|&ox| {
                    offsets.iter().any(|&oy| {
                        offsets
                            .iter()
                            .any(|&oz| sees(Point3::new(c.x + ox * e, c.y + oy * e, c.z + oz * e)))
                    })
                });
                if visible {
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Free voxels 6-connected to `start`, by depth-first search.
pub fn flood_fill_oracle(truth: &VoxelMap, start: Point3) -> Vec<VoxelIndex> {
    let s = truth.voxel_of(start);
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![s];
    let mut out = Vec::new();
    if truth.get(s) != Occupancy::Free {
        return out;
    }
    seen.insert(s);
    while let Some(v) = stack.pop() {
        out.push(v);
        for (a, d) in [(0, 1), (0, -1), (1, 1), (1, -1), (2, 1), (2, -1)] {
            let mut w = v;
            w[a] += d;
            if truth.get(w) == Occupancy::Free && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    out
}
