use super::*;

use crate::planner::GainUpdate;
use crate::scenario::GainExecution;

/// Box room with floor, ceiling and a two-voxel wall, `nx` x `ny` x 12.
fn room(nx: usize, ny: usize) -> VoxelMap {
    let mut m = VoxelMap::filled(Point3::new(0.0, 0.0, 0.0), 0.1, [nx, ny, 12], Occupancy::Free);
    for i in 0..nx as i64 {
        for j in 0..ny as i64 {
            let wall = i < 2 || j < 2 || i >= nx as i64 - 2 || j >= ny as i64 - 2;
            for k in 0..12 {
                if wall || k == 0 || k == 11 {
                    m.set([i, j, k], Occupancy::Occupied);
                }
            }
        }
    }
    m
}

fn config(x: f64, y: f64) -> ScenarioConfig {
    let mut c = ScenarioConfig::from_toml(&format!(
        "environment = \"inline\"\n[spawn]\nx = {x}\ny = {y}\n"
    ))
    .unwrap();
    c.sensor.azimuth_rays = 180;
    c.sensor.elevation_rays = 141;
    c.planner.g_min = 0.01;
    c
}

#[test]
fn turn_then_drive_along_a_two_metre_edge() {
    let scenario = Scenario::new(config(1.05, 1.05), room(60, 30));
    let mut sim = Simulation::new(&scenario).unwrap();
    sim.grid = GridMap2D::new(Point2::new(0.0, 0.0), 0.1, [60, 30], Traversability::Traversable);
    let e = sim.graph.expand(Point2::new(3.05, 1.05), &sim.grid).unwrap();
    sim.view_yaw.push(0.0);
    assert_eq!(e.connected, vec![0]);
    assert!((sim.graph.node(e.node).xy().distance(Point2::new(1.05, 1.05)) - 2.0).abs() < 1e-9);
    sim.paths.insert_node(&sim.graph, e.node);
    sim.planner.on_node_added(&mut sim.graph, e.node);
    sim.planner.sync_distances(&mut sim.graph, &sim.paths);
    for (node, gain) in [(0, 0), (e.node, 5000)] {
        sim.planner.take_batch(8);
        let u = GainUpdate { node, height: Some(0.6), gain, best_yaw: 0.0, view_yaw: 0.0 };
        sim.planner.apply_gain(&mut sim.graph, &u, 0);
    }
    assert_eq!(sim.planner.select_nbv(&mut sim.graph), Some(e.node));

    // facing north, goal due east: 90 deg at 90 deg/s in 0.1 s ticks
    sim.robot.pose.yaw = std::f64::consts::FRAC_PI_2;
    let mut ticks = 0;
    while sim.pending_event.is_none() {
        sim.advance_robot();
        ticks += 1;
        assert!(ticks < 100);
    }
    assert_eq!(sim.pending_event, Some(GoalEvent::Reached));
    assert_eq!(ticks, 10 + 20);
    assert!((sim.path_length - 2.0).abs() < 1e-9);
    assert_eq!(sim.robot.at_node, Some(e.node));
}

#[test]
fn sealed_pocket_ends_by_exit_timer() {
    let mut truth = VoxelMap::filled(Point3::new(0.0, 0.0, 0.0), 0.1, [9, 9, 10], Occupancy::Occupied);
    for k in 1..9 {
        truth.set([4, 4, k], Occupancy::Free);
    }
    let scenario = Scenario::new(config(0.45, 0.45), truth);
    scenario.validate().unwrap();
    let out = run_to_completion(&scenario).unwrap();
    assert_eq!(out.end, RunEnd::Natural);
    assert_eq!(out.graph.node_count(), 1);
    assert!(out.metrics.duration <= 10.0 + 0.5, "{}", out.metrics.duration);
    assert!(out.metrics.mapped_volume < 0.05);
    let last = out.events.last().unwrap();
    assert_eq!(last.kind, EventKind::Terminated);
}

fn small_run(exec: GainExecution, seed: u64) -> RunOutcome {
    let mut c = config(1.05, 1.05);
    c.seed = seed;
    c.sim.gain_execution = exec;
    run_to_completion(&Scenario::new(c, room(50, 40))).unwrap()
}

#[test]
fn runs_are_reproducible_and_executor_independent() {
    let a = small_run(GainExecution::Inline, 3);
    let b = small_run(GainExecution::Inline, 3);
    let c = small_run(GainExecution::Threaded, 3);
    assert_eq!(a.metrics.to_csv(), b.metrics.to_csv());
    assert_eq!(a.event_log(), b.event_log());
    assert_eq!(a.metrics.to_csv(), c.metrics.to_csv());
    assert_eq!(a.event_log(), c.event_log());
    assert_eq!(
        crate::rrg::write_snapshot(&a.graph),
        crate::rrg::write_snapshot(&c.graph)
    );
}

#[test]
fn room_run_is_safe_monotone_and_complete() {
    let truth = room(50, 40);
    let out = small_run(GainExecution::Inline, 5);
    assert_eq!(out.end, RunEnd::Natural);
    assert_eq!(out.safety_violations, 0);
    for w in out.metrics.samples.windows(2) {
        assert!(w[1].time > w[0].time);
        assert!(w[1].path_length >= w[0].path_length);
        assert!(w[1].mapped_volume >= w[0].mapped_volume);
    }
    let reach = reachable_free(&truth, Point3::new(1.05, 1.05, 0.6));
    assert!(coverage(&out.robot_map, &reach) >= 0.95);
}

#[test]
fn flood_fill_counts_room_interior() {
    let truth = room(10, 10);
    // 6 x 6 interior, layers 1..=10
    assert_eq!(reachable_free(&truth, Point3::new(0.45, 0.45, 0.5)).len(), 36 * 10);
    assert!(reachable_free(&truth, Point3::new(0.05, 0.05, 0.5)).is_empty());
}
