//! `rne`: run exploration scenarios, ablation batches and scenario checks.
//!
//! Every invocation ends with a single `status=...` line on stdout so batch
//! scripts can grep the outcome without parsing the rest.

mod overrides;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use rne_core::rrg::write_snapshot;
use rne_core::scenario::{Scenario, Variant};
use rne_core::sim::{run_to_completion, RunEnd, RunOutcome};
use rne_core::stats::{compare_variants, RunSummary};
use rne_core::world::dump_robot_map;

use overrides::{Mode, Overrides, Switch};

#[derive(Debug, Parser)]
#[command(name = "rne", version, about = "RRG next-best-view exploration simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its artifacts.
    Run(RunArgs),
    /// Run seeds x variants and print the per-variant summary table.
    Bench(BenchArgs),
    /// Check a scenario file without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, value_enum)]
    local_sampling: Option<Switch>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Number of seeds; runs use seeds first_seed..first_seed+n.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    first_seed: u64,
    /// Comma-separated list; deltas are relative to the first entry.
    #[arg(long, value_delimiter = ',', default_value = "rne,rrg,rrt+ls,rrt")]
    variants: Vec<String>,
    /// Worker threads for independent runs (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write summary.csv and runs.csv here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

/// What a command reports on its final line.
struct Status {
    code: u8,
    line: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                finish(Status {
                    code: 1,
                    line: format!("status=error command=none message={}", quote(&first_line(&e.to_string()))),
                })
            } else {
                finish(Status {
                    code: 0,
                    line: "status=ok command=help".into(),
                })
            };
        }
    };
    let name = match &cli.command {
        Command::Run(_) => "run",
        Command::Bench(_) => "bench",
        Command::Validate { .. } => "validate",
    };
    let status = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Validate { scenario } => cmd_validate(&scenario),
    };
    finish(status.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        Status {
            code: 1,
            line: format!("status=error command={name} message={}", quote(&format!("{e:#}"))),
        }
    }))
}

fn finish(status: Status) -> ExitCode {
    println!("{}", status.line);
    ExitCode::from(status.code)
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or("").trim_start_matches("error: ").to_string()
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " "))
}

fn load(path: &Path, overrides: &Overrides) -> Result<Scenario> {
    let mut scenario =
        Scenario::load(path).with_context(|| format!("loading scenario {}", path.display()))?;
    overrides.apply(&mut scenario.config);
    let violations = scenario.violations();
    if !violations.is_empty() {
        bail!("invalid scenario: {}", violations.join("; "));
    }
    Ok(scenario)
}

fn cmd_run(args: RunArgs) -> Result<Status> {
    let mut scenario = load(&args.scenario, &args.overrides)?;
    let c = &mut scenario.config;
    if let Some(seed) = args.seed {
        c.seed = seed;
    }
    if let Some(mode) = args.mode {
        c.planner.mode = mode.into();
    }
    if let Some(ls) = args.local_sampling {
        c.planner.local_sampling = ls == Switch::On;
    }

    let outcome = run_to_completion(&scenario)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let write = |name: &str, text: String| {
        let path = args.out.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    };
    write("events.log", outcome.event_log())?;
    write("metrics.csv", outcome.metrics.to_csv())?;
    write("graph.txt", write_snapshot(&outcome.graph))?;
    write("map.vw", dump_robot_map(&outcome.robot_map))?;

    let m = &outcome.metrics;
    let code = match outcome.end {
        RunEnd::Natural => 0,
        RunEnd::TimeLimit => 2,
    };
    Ok(Status {
        code,
        line: format!(
            "status={} command=run seed={} end={} ticks={} duration_s={:.1} path_length_m={:.3} mapped_volume_m3={:.3} nodes={} edges={}",
            if code == 0 { "ok" } else { "time_limit" },
            scenario.config.seed,
            outcome.end.as_str(),
            outcome.ticks,
            m.duration,
            m.path_length,
            m.mapped_volume,
            outcome.graph.node_count(),
            outcome.graph.edge_count(),
        ),
    })
}

struct BenchRun {
    variant: Variant,
    seed: u64,
    result: Result<RunOutcome>,
}

fn cmd_bench(args: BenchArgs) -> Result<Status> {
    let variants = args
        .variants
        .iter()
        .map(|s| s.parse::<Variant>())
        .collect::<Result<Vec<_>, _>>()?;
    if variants.is_empty() || args.seeds == 0 {
        bail!("nothing to run: need at least one variant and one seed");
    }
    let base = load(&args.scenario, &args.overrides)?;

    let jobs: Vec<(Variant, u64)> = variants
        .iter()
        .flat_map(|&v| (0..args.seeds).map(move |i| (v, args.first_seed + i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .context("starting worker pool")?;
    let runs: Vec<BenchRun> = pool.install(|| {
        jobs.par_iter()
            .map(|&(variant, seed)| {
                let mut s = base.clone();
                s.config.seed = seed;
                s.config.apply_variant(variant);
                BenchRun {
                    variant,
                    seed,
                    result: run_to_completion(&s).map_err(anyhow::Error::from),
                }
            })
            .collect()
    });

    let mut per_run = String::from("variant,seed,end,duration_s,path_length_m,mapped_volume_m3,error\n");
    let mut failed = 0;
    let mut time_limited = 0;
    for r in &runs {
        match &r.result {
            Ok(o) => {
                if o.end == RunEnd::TimeLimit {
                    time_limited += 1;
                }
                let m = &o.metrics;
                let _ = writeln!(
                    per_run,
                    "{},{},{},{:.3},{:.3},{:.3},",
                    r.variant, r.seed, o.end.as_str(), m.duration, m.path_length, m.mapped_volume
                );
            }
            Err(e) => {
                failed += 1;
                eprintln!("run {} seed {} failed: {e:#}", r.variant, r.seed);
                let _ = writeln!(per_run, "{},{},error,,,,{}", r.variant, r.seed, quote(&format!("{e:#}")));
            }
        }
    }

    let tables: Vec<(String, Vec<RunSummary>)> = variants
        .iter()
        .map(|&v| {
            let done = runs
                .iter()
                .filter(|r| r.variant == v)
                .filter_map(|r| r.result.as_ref().ok())
                .map(|o| RunSummary {
                    duration: o.metrics.duration,
                    path_length: o.metrics.path_length,
                    mapped_volume: o.metrics.mapped_volume,
                })
                .collect();
            (v.to_string(), done)
        })
        .collect();
    let summary = compare_variants(&tables)?;
    let table = summary.to_csv();
    print!("{table}");

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("summary.csv"), &table).context("writing summary.csv")?;
        fs::write(dir.join("runs.csv"), &per_run).context("writing runs.csv")?;
    }

    Ok(Status {
        code: if failed == 0 { 0 } else { 1 },
        line: format!(
            "status={} command=bench runs={} failed={failed} time_limited={time_limited} variants={}",
            if failed == 0 { "ok" } else { "partial" },
            runs.len(),
            summary.rows.len()
        ),
    })
}

fn cmd_validate(path: &Path) -> Result<Status> {
    let scenario = match Scenario::load(path) {
        Ok(s) => s,
        Err(e) => {
            println!("violation: {e}");
            return Ok(Status {
                code: 1,
                line: format!("status=invalid command=validate violations=1 scenario={}", quote(&path.display().to_string())),
            });
        }
    };
    let violations = scenario.violations();
    for v in &violations {
        println!("violation: {v}");
    }
    Ok(Status {
        code: if violations.is_empty() { 0 } else { 1 },
        line: format!(
            "status={} command=validate violations={} scenario={}",
            if violations.is_empty() { "ok" } else { "invalid" },
            violations.len(),
            quote(&path.display().to_string())
        ),
    })
}
