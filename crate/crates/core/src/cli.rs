//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::experiments::{
    self, from_jsonl, map_seed, read_maps, summarize, to_csv, to_jsonl, with_threads,
    ExperimentPlan, MapSet, Metric,
};
use crate::grid::GridMap;
use crate::mapgen::{generate, MapGenConfig};
use crate::mcts::{Backup, MctsConfig, TurnPenaltyMode};
use crate::sim::{trace, PlannerKind, SimConfig, Simulation, StartPlacement};

#[derive(Debug, Parser)]
#[command(
    name = "covergrid",
    version,
    about = "Multi-robot on-line coverage on grid maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate random maps and a manifest.
    Genmaps(GenmapsArgs),
    /// Run one trial and print its record.
    Run(RunArgs),
    /// Run a preset experiment.
    Sweep(SweepArgs),
    /// Box-plot statistics of a record file as CSV.
    Stats(StatsArgs),
    /// Re-check a trace file against the motion model.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct GenmapsArgs {
    /// Comma-separated obstacle densities in [0, 1).
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.10,0.15,0.20")]
    density: Vec<f64>,
    /// Maps per density.
    #[arg(long, default_value_t = 5)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    width: usize,
    #[arg(long, default_value_t = 20)]
    height: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Clone)]
struct MctsArgs {
    #[arg(long)]
    cp: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    c_hit: Option<f64>,
    #[arg(long)]
    c_turn: Option<f64>,
    /// none | left | right | both
    #[arg(long)]
    turn_mode: Option<TurnPenaltyMode>,
    #[arg(long)]
    iters: Option<u32>,
    #[arg(long)]
    wallclock_ms: Option<u64>,
    /// child-mean | visit-weighted
    #[arg(long, value_parser = parse_backup)]
    backup: Option<Backup>,
    /// Disable the nearest-uncovered fallback.
    #[arg(long)]
    no_fallback: bool,
}

fn parse_backup(s: &str) -> Result<Backup, String> {
    match s {
        "child-mean" | "child_mean" => Ok(Backup::ChildMean),
        "visit-weighted" | "visit_weighted" => Ok(Backup::VisitWeighted),
        other => Err(format!(
            "unknown backup {other:?} (child-mean|visit-weighted)"
        )),
    }
}

impl MctsArgs {
    fn apply(&self, cfg: &mut MctsConfig) {
        if let Some(v) = self.cp {
            cfg.c_p = v;
        }
        if let Some(v) = self.horizon {
            cfg.horizon = v;
        }
        if let Some(v) = self.c_hit {
            cfg.c_hit = v;
        }
        if let Some(v) = self.c_turn {
            cfg.c_turn = v;
        }
        if let Some(v) = self.turn_mode {
            cfg.turn_mode = v;
        }
        if let Some(v) = self.iters {
            cfg.iterations = v;
        }
        if self.wallclock_ms.is_some() {
            cfg.wallclock_ms = self.wallclock_ms;
        }
        if let Some(v) = self.backup {
            cfg.backup = v;
        }
        if self.no_fallback {
            cfg.fallback = false;
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// mcts | boustro
    #[arg(long, default_value = "mcts")]
    planner: PlannerKind,
    #[arg(long, default_value_t = 1)]
    robots: usize,
    #[arg(long, default_value_t = 0.10)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Map directory written by `genmaps`; maps are generated when absent.
    #[arg(long)]
    maps: Option<PathBuf>,
    /// A single map file, overriding `--maps` and `--density`.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    map_index: usize,
    /// wall | random
    #[arg(long, default_value = "wall")]
    placement: String,
    #[arg(long)]
    max_steps: Option<u64>,
    /// Write a per-epoch trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the record here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    mcts: MctsArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// fig3 | fig4 | fig5
    #[arg(long)]
    preset: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for records.jsonl and summary.csv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    maps: Option<PathBuf>,
    /// Maps per density (preset: 5).
    #[arg(long)]
    map_count: Option<usize>,
    /// Trials per map (preset: 10).
    #[arg(long)]
    trials: Option<usize>,
    /// Restrict the robot counts of a sweep, comma-separated.
    #[arg(long, value_delimiter = ',')]
    robots: Option<Vec<usize>>,
    #[command(flatten)]
    mcts: MctsArgs,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// JSON-lines record file.
    records: PathBuf,
    /// Comma-separated group keys: planner, placement, robots, density, c_turn, turn_mode, map_index.
    #[arg(long, value_delimiter = ',', default_value = "planner,robots")]
    group: Vec<String>,
    /// time | left | right
    #[arg(long, default_value = "time")]
    metric: Metric,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    trace: PathBuf,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_placement(s: &str) -> Result<StartPlacement> {
    match s {
        "wall" => Ok(StartPlacement::WallUniform),
        "random" => Ok(StartPlacement::RandomUniform),
        other => bail!("unknown placement {other:?} (wall|random)"),
    }
}

fn genmaps(args: &GenmapsArgs) -> Result<()> {
    for d in &args.density {
        if !(0.0..1.0).contains(d) {
            bail!("density {d} outside [0, 1)");
        }
    }
    let manifest = experiments::write_maps(
        &args.out,
        &args.density,
        args.count,
        args.seed,
        (args.width, args.height),
    )?;
    println!("wrote {} maps to {}", manifest.len(), args.out.display());
    Ok(())
}

fn run(args: &RunArgs) -> Result<()> {
    let (map, density): (GridMap, Option<f64>) = match (&args.map, &args.maps) {
        (Some(file), _) => {
            let text = std::fs::read_to_string(file)
                .with_context(|| format!("reading {}", file.display()))?;
            (
                text.parse()
                    .with_context(|| format!("parsing {}", file.display()))?,
                None,
            )
        }
        (None, Some(dir)) => {
            let set = read_maps(dir)?;
            let m = set.get(args.density, args.map_index).ok_or_else(|| {
                anyhow!(
                    "no map {} at density {} in {}",
                    args.map_index,
                    args.density,
                    dir.display()
                )
            })?;
            (m.clone(), Some(args.density))
        }
        (None, None) => {
            if !(0.0..1.0).contains(&args.density) {
                bail!("density {} outside [0, 1)", args.density);
            }
            let seed = map_seed(args.seed, args.density, args.map_index);
            (
                generate(&MapGenConfig::standard(args.density, seed))?.map,
                Some(args.density),
            )
        }
    };
    let mut config = SimConfig {
        planner: args.planner,
        robots: args.robots,
        seed: args.seed,
        placement: parse_placement(&args.placement)?,
        max_steps: args.max_steps,
        ..SimConfig::default()
    };
    args.mcts.apply(&mut config.mcts);
    let mut sim = Simulation::new(config, &map)?;
    if args.trace.is_some() {
        sim = sim.with_trace();
    }
    sim.run_to_end()?;
    let mut rec = sim.record();
    rec.density = density;
    rec.map_index = density.map(|_| args.map_index);
    if let (Some(path), Some(text)) = (&args.trace, sim.trace_text()) {
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    emit(args.out.as_deref(), &(rec.to_json_line() + "\n"))
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let mut plan = ExperimentPlan::preset(&args.preset, args.seed)
        .ok_or_else(|| anyhow!("unknown preset {:?} (fig3|fig4|fig5)", args.preset))?;
    if let Some(counts) = &args.robots {
        plan.points.retain(|p| counts.contains(&p.robots));
    }
    let (maps_per, trials) = (
        args.map_count.unwrap_or(plan.maps_per_density),
        args.trials.unwrap_or(plan.trials_per_map),
    );
    plan = plan.scaled(maps_per, trials);
    args.mcts.apply(&mut plan.mcts);
    let maps = match &args.maps {
        Some(dir) => read_maps(dir)?,
        None => MapSet::generate_for(&plan)?,
    };
    let records = experiments::run_plan(&plan, &maps)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    std::fs::write(args.out.join("records.jsonl"), to_jsonl(&records))?;
    let keys = [
        "planner",
        "placement",
        "robots",
        "density",
        "c_turn",
        "turn_mode",
    ];
    let summary = summarize(&records, &keys, Metric::CompletionTime)?;
    std::fs::write(args.out.join("summary.csv"), to_csv(&keys, &summary))?;
    let timeouts = records.iter().filter(|r| r.is_timeout()).count();
    println!(
        "{} records, {timeouts} timeouts, written to {}",
        records.len(),
        args.out.display()
    );
    Ok(())
}

fn stats(args: &StatsArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.records)
        .with_context(|| format!("reading {}", args.records.display()))?;
    let records =
        from_jsonl(&text).with_context(|| format!("parsing {}", args.records.display()))?;
    let keys: Vec<&str> = args.group.iter().map(String::as_str).collect();
    let groups = summarize(&records, &keys, args.metric)?;
    emit(args.out.as_deref(), &to_csv(&keys, &groups))
}

fn replay(args: &ReplayArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.trace)
        .with_context(|| format!("reading {}", args.trace.display()))?;
    let s = trace::replay(&text)?;
    println!(
        "ok: {} robots, {} epochs, covered {}/{}{}",
        s.robots,
        s.epochs,
        s.covered,
        s.target,
        if s.complete { ", complete" } else { "" }
    );
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    with_threads(experiments::thread_cap(), || match &cli.command {
        Command::Genmaps(a) => genmaps(a),
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Stats(a) => stats(a),
        Command::Replay(a) => replay(a),
    })
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 on a runtime error, 2 on bad usage.
pub fn cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(parsed) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
