use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;
use std::thread::JoinHandle;

use crate::gain::{evaluate_gain, snap_to_ground, GroundProbe, PollPointSet};
use crate::geometry::Point2;
use crate::planner::GainUpdate;
use crate::rrg::NodeId;
use crate::scenario::GainExecution;
use crate::world::VoxelMap;

/// Everything a gain evaluation needs besides the map.
#[derive(Debug, Clone)]
pub struct GainContext {
    pub pollset: PollPointSet,
    pub hfov: f64,
    pub probe: GroundProbe,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainJob {
    pub node: NodeId,
    pub xy: Point2,
    pub z_initial: f64,
    /// Use `z_initial` as is instead of snapping to the ground (the root).
    pub fixed_height: bool,
}

pub fn run_gain_job(map: &VoxelMap, ctx: &GainContext, job: &GainJob) -> GainUpdate {
    let height = if job.fixed_height {
        Some(job.z_initial)
    } else {
        snap_to_ground(map, job.xy, job.z_initial, &ctx.probe)
    };
    match height {
        Some(z) => {
            let r = evaluate_gain(map, &ctx.pollset, job.xy.with_z(z), ctx.hfov);
            GainUpdate {
                node: job.node,
                height: Some(z),
                gain: r.gain,
                best_yaw: r.best_yaw,
                view_yaw: r.view_yaw,
            }
        }
        None => GainUpdate {
            node: job.node,
            height: None,
            gain: -1,
            best_yaw: 0.0,
            view_yaw: 0.0,
        },
    }
}

pub(crate) struct Batch {
    map: Arc<VoxelMap>,
    jobs: Vec<GainJob>,
}

fn run_batch(ctx: &GainContext, batch: Batch) -> Vec<GainUpdate> {
    batch.jobs.iter().map(|j| run_gain_job(&batch.map, ctx, j)).collect()
}

/// Mailbox between the tick loop and the gain evaluator. A batch dispatched
/// in one tick is collected in the next.
pub(crate) enum GainWorker {
    Inline {
        ctx: Arc<GainContext>,
        ready: Vec<GainUpdate>,
    },
    Threaded {
        tx: Option<Sender<Batch>>,
        rx: Receiver<Vec<GainUpdate>>,
        handle: Option<JoinHandle<()>>,
        outstanding: usize,
    },
}

impl GainWorker {
    pub(crate) fn new(mode: GainExecution, ctx: Arc<GainContext>) -> Self {
        match mode {
            GainExecution::Inline => GainWorker::Inline { ctx, ready: Vec::new() },
            GainExecution::Threaded => {
                let (tx, jobs) = channel::<Batch>();
                let (results, rx) = channel();
                let handle = std::thread::spawn(move || {
                    for batch in jobs {
                        if results.send(run_batch(&ctx, batch)).is_err() {
                            break;
                        }
                    }
                });
                GainWorker::Threaded {
                    tx: Some(tx),
                    rx,
                    handle: Some(handle),
                    outstanding: 0,
                }
            }
        }
    }

    pub(crate) fn dispatch(&mut self, map: Arc<VoxelMap>, jobs: Vec<GainJob>) {
        let batch = Batch { map, jobs };
        match self {
            GainWorker::Inline { ctx, ready } => ready.extend(run_batch(ctx, batch)),
            GainWorker::Threaded { tx, outstanding, .. } => {
                tx.as_ref()
                    .expect("worker running")
                    .send(batch)
                    .expect("gain worker alive");
                *outstanding += 1;
            }
        }
    }

    /// Results of every batch dispatched so far, in dispatch order.
    pub(crate) fn collect(&mut self) -> Vec<GainUpdate> {
        match self {
            GainWorker::Inline { ready, .. } => std::mem::take(ready),
            GainWorker::Threaded { rx, outstanding, .. } => {
                let mut out = Vec::new();
                while *outstanding > 0 {
                    out.extend(rx.recv().expect("gain worker alive"));
                    *outstanding -= 1;
                }
                out
            }
        }
    }
}

impl Drop for GainWorker {
    fn drop(&mut self) {
        if let GainWorker::Threaded { tx, handle, .. } = self {
            tx.take();
            if let Some(h) = handle.take() {
                let _ = h.join();
            }
        }
    }
}
