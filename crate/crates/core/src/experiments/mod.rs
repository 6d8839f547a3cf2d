//! Batch experiments: plans, seeding, parallel execution and summaries.
//!
//! A plan is a list of configuration points, each run on `maps_per_density`
//! maps with `trials_per_map` trials per map. Maps depend only on the base
//! seed, the density and the map index, so every planner sees the same maps.
//! Trial seeds are
//!
//! ```text
//! derive(base, [TRIAL, planner index, config index, map index, trial index])
//! ```
//!
//! with `derive` the SplitMix64 mix from [`crate::rng`]. Records come back in
//! plan order whatever the thread count.

mod stats;

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MapError, SimError};
use crate::grid::GridMap;
use crate::mapgen::{generate, MapGenConfig};
use crate::mcts::{MctsConfig, TurnPenaltyMode};
use crate::rng::{derive_seed, stream};
use crate::sim::{self, PlannerKind, SimConfig, StartPlacement, TrialRecord};

pub use stats::{
    box_stats, key_value, summarize, to_csv, BoxStats, GroupSummary, Metric, GROUP_KEYS,
};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "COVERGRID_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigPoint {
    pub planner: PlannerKind,
    pub placement: StartPlacement,
    pub robots: usize,
    pub density: f64,
    pub c_turn: f64,
    pub turn_mode: TurnPenaltyMode,
}

impl ConfigPoint {
    pub fn new(planner: PlannerKind, robots: usize, density: f64) -> Self {
        ConfigPoint {
            planner,
            placement: StartPlacement::WallUniform,
            robots,
            density,
            c_turn: 0.0,
            turn_mode: TurnPenaltyMode::None,
        }
    }

    pub fn placed(mut self, placement: StartPlacement) -> Self {
        self.placement = placement;
        self
    }

    pub fn turn_cost(mut self, mode: TurnPenaltyMode, c_turn: f64) -> Self {
        self.turn_mode = mode;
        self.c_turn = c_turn;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub name: String,
    pub points: Vec<ConfigPoint>,
    pub maps_per_density: usize,
    pub trials_per_map: usize,
    pub base_seed: u64,
    pub width: usize,
    pub height: usize,
    /// Planner settings shared by all points; each point overrides the turn cost.
    pub mcts: MctsConfig,
    pub max_steps: Option<u64>,
}

const PLANNERS: [PlannerKind; 2] = [PlannerKind::Mcts, PlannerKind::Boustrophedon];

impl ExperimentPlan {
    fn with_points(name: &str, points: Vec<ConfigPoint>, seed: u64) -> Self {
        ExperimentPlan {
            name: name.to_string(),
            points,
            maps_per_density: 5,
            trials_per_map: 10,
            base_seed: seed,
            width: 20,
            height: 20,
            mcts: MctsConfig::default(),
            max_steps: None,
        }
    }

    /// Robot-count sweep at 10% density: both planners from the wall, plus
    /// MCTS from random starts.
    pub fn fig3(seed: u64) -> Self {
        Self::robot_sweep(&(1..=10).collect::<Vec<_>>(), seed)
    }

    pub fn robot_sweep(counts: &[usize], seed: u64) -> Self {
        let mut points = Vec::new();
        for planner in PLANNERS {
            points.extend(counts.iter().map(|&n| ConfigPoint::new(planner, n, 0.10)));
        }
        points.extend(counts.iter().map(|&n| {
            ConfigPoint::new(PlannerKind::Mcts, n, 0.10).placed(StartPlacement::RandomUniform)
        }));
        Self::with_points("fig3", points, seed)
    }

    /// Density sweep with three robots.
    pub fn fig4(seed: u64) -> Self {
        let mut points = Vec::new();
        for planner in PLANNERS {
            points.extend([0.05, 0.10, 0.15, 0.20].map(|d| ConfigPoint::new(planner, 3, d)));
        }
        Self::with_points("fig4", points, seed)
    }

    /// Turn-cost modes for MCTS with five robots at 10% density.
    pub fn fig5(seed: u64) -> Self {
        let base = ConfigPoint::new(PlannerKind::Mcts, 5, 0.10);
        let points = vec![
            base.clone(),
            base.clone().turn_cost(TurnPenaltyMode::LeftOnly, 0.5),
            base.clone().turn_cost(TurnPenaltyMode::RightOnly, 0.5),
            base.turn_cost(TurnPenaltyMode::Both, 0.1),
        ];
        Self::with_points("fig5", points, seed)
    }

    pub fn preset(name: &str, seed: u64) -> Option<Self> {
        match name {
            "fig3" => Some(Self::fig3(seed)),
            "fig4" => Some(Self::fig4(seed)),
            "fig5" => Some(Self::fig5(seed)),
            _ => None,
        }
    }

    /// Fewer maps and trials, same structure.
    pub fn scaled(mut self, maps_per_density: usize, trials_per_map: usize) -> Self {
        self.maps_per_density = maps_per_density;
        self.trials_per_map = trials_per_map;
        self
    }

    pub fn trial_count(&self) -> usize {
        self.points.len() * self.maps_per_density * self.trials_per_map
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.maps_per_density == 0 || self.trials_per_map == 0 || self.points.is_empty() {
            return Err(crate::error::ConfigError::Invalid("plan has no trials".into()).into());
        }
        for p in &self.points {
            self.sim_config(p, 0).validate(0.5)?;
        }
        Ok(())
    }

    pub fn sim_config(&self, point: &ConfigPoint, seed: u64) -> SimConfig {
        let mut mcts = self.mcts.clone();
        mcts.c_turn = point.c_turn;
        mcts.turn_mode = point.turn_mode;
        SimConfig {
            planner: point.planner,
            placement: point.placement.clone(),
            robots: point.robots,
            seed,
            mcts,
            max_steps: self.max_steps,
            ..SimConfig::default()
        }
    }

    /// Distinct densities in first-use order.
    pub fn densities(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for p in &self.points {
            if !out.contains(&p.density) {
                out.push(p.density);
            }
        }
        out
    }
}

fn planner_index(p: PlannerKind) -> u64 {
    match p {
        PlannerKind::Mcts => 0,
        PlannerKind::Boustrophedon => 1,
    }
}

fn density_tag(density: f64) -> u64 {
    (density * 10_000.0).round() as u64
}

/// Seed of map `index` at `density` under `base`.
pub fn map_seed(base: u64, density: f64, index: usize) -> u64 {
    derive_seed(base, &[stream::MAP, density_tag(density), index as u64])
}

pub fn trial_seed(base: u64, planner: PlannerKind, config: usize, map: usize, trial: usize) -> u64 {
    derive_seed(
        base,
        &[
            stream::TRIAL,
            planner_index(planner),
            config as u64,
            map as u64,
            trial as u64,
        ],
    )
}

/// Maps keyed by (density, index).
#[derive(Clone, Debug, Default)]
pub struct MapSet {
    maps: HashMap<(u64, usize), GridMap>,
}

impl MapSet {
    /// Generates every map a plan needs.
    pub fn generate_for(plan: &ExperimentPlan) -> Result<Self, MapError> {
        let mut set = MapSet::default();
        for d in plan.densities() {
            for i in 0..plan.maps_per_density {
                let cfg = MapGenConfig {
                    width: plan.width,
                    height: plan.height,
                    density: d,
                    seed: map_seed(plan.base_seed, d, i),
                };
                set.insert(d, i, generate(&cfg)?.map);
            }
        }
        Ok(set)
    }

    pub fn insert(&mut self, density: f64, index: usize, map: GridMap) {
        self.maps.insert((density_tag(density), index), map);
    }

    pub fn get(&self, density: f64, index: usize) -> Option<&GridMap> {
        self.maps.get(&(density_tag(density), index))
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
}

/// One entry of a map directory's `manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub density: f64,
    pub index: usize,
    pub seed: u64,
    pub obstacles: usize,
    pub filled: usize,
}

pub const MANIFEST: &str = "manifest.json";

/// Writes `count` maps per density into `dir` with a manifest.
pub fn write_maps(
    dir: &Path,
    densities: &[f64],
    count: usize,
    base: u64,
    size: (usize, usize),
) -> anyhow::Result<Vec<ManifestEntry>> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = Vec::new();
    for &d in densities {
        for i in 0..count {
            let seed = map_seed(base, d, i);
            let g = generate(&MapGenConfig {
                width: size.0,
                height: size.1,
                density: d,
                seed,
            })?;
            let file = format!("d{:04}_m{i:02}.map", density_tag(d));
            std::fs::write(dir.join(&file), g.map.to_map_text())?;
            manifest.push(ManifestEntry {
                file,
                density: d,
                index: i,
                seed,
                obstacles: g.map.obstacle_count(),
                filled: g.filled_squares,
            });
        }
    }
    std::fs::write(
        dir.join(MANIFEST),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(manifest)
}

pub fn read_maps(dir: &Path) -> anyhow::Result<MapSet> {
    use anyhow::Context;
    let path = dir.join(MANIFEST);
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: Vec<ManifestEntry> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut set = MapSet::default();
    for e in manifest {
        let p = dir.join(&e.file);
        let text =
            std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
        let map: GridMap = text
            .parse()
            .with_context(|| format!("parsing {}", p.display()))?;
        set.insert(e.density, e.index, map);
    }
    Ok(set)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialId {
    pub point: usize,
    pub map: usize,
    pub trial: usize,
}

/// Every trial of `plan`, in plan order.
pub fn trials(plan: &ExperimentPlan) -> Vec<TrialId> {
    let mut out = Vec::with_capacity(plan.trial_count());
    for point in 0..plan.points.len() {
        for map in 0..plan.maps_per_density {
            for trial in 0..plan.trials_per_map {
                out.push(TrialId { point, map, trial });
            }
        }
    }
    out
}

pub fn run_trial(
    plan: &ExperimentPlan,
    maps: &MapSet,
    id: TrialId,
) -> Result<TrialRecord, SimError> {
    let point = &plan.points[id.point];
    let map = maps.get(point.density, id.map).ok_or_else(|| {
        crate::error::ConfigError::Invalid(format!(
            "no map {} at density {}",
            id.map, point.density
        ))
    })?;
    let seed = trial_seed(plan.base_seed, point.planner, id.point, id.map, id.trial);
    let mut rec = sim::run(&plan.sim_config(point, seed), map)?;
    rec.density = Some(point.density);
    rec.map_index = Some(id.map);
    rec.trial = Some(id.trial);
    Ok(rec)
}

/// Worker count from `COVERGRID_THREADS`, if set to a positive number.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
}

/// Runs `f` on a pool of `threads` workers (rayon's default when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Runs every trial of `plan`; records are in plan order.
pub fn run_plan(plan: &ExperimentPlan, maps: &MapSet) -> Result<Vec<TrialRecord>, SimError> {
    plan.validate()?;
    trials(plan)
        .into_par_iter()
        .map(|id| run_trial(plan, maps, id))
        .collect()
}

/// Records as JSON lines.
pub fn to_jsonl(records: &[TrialRecord]) -> String {
    records.iter().map(|r| r.to_json_line() + "\n").collect()
}

pub fn from_jsonl(text: &str) -> Result<Vec<TrialRecord>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
