//! Epoch-based multi-robot simulation.
//!
//! One epoch is 0.5 s: every robot moves at most one square. Each epoch the
//! engine hands planners an immutable [`Snapshot`], resolves the returned
//! actions simultaneously, marks newly entered squares covered, senses from
//! every robot and merges the observations into the shared map.
//!
//! Move conflicts are resolved in robot-id order. A move is blocked when its
//! target is out of bounds, an obstacle, any robot's current square, or a
//! square already claimed this epoch by a lower id. Blocked robots keep
//! their square but still turn.

mod engine;
mod record;
pub mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, SimError};
use crate::grid::{Action, GridMap, RobotState};
use crate::mcts::MctsConfig;

pub use engine::{place_robots, resolve_moves, Simulation, TurnCount, WorldState};
pub use record::{config_digest, Outcome, TrialRecord};

/// What a planner may read during one epoch.
#[derive(Clone, Copy, Debug)]
pub struct Snapshot<'a> {
    /// Known map and covered set. Truth must not be consulted by planners.
    pub map: &'a GridMap,
    pub robots: &'a [RobotState],
    /// Each robot's plan published last epoch, starting from its current state.
    pub paths: &'a [Vec<Action>],
    pub epoch: u64,
}

/// Output of a team planner for one epoch.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TeamDecision {
    pub actions: Vec<Action>,
    /// Published plans, each starting from the state after this epoch's action.
    pub paths: Vec<Vec<Action>>,
}

/// Planning for the whole team. Per-robot planners run inside.
pub trait TeamPlanner: Send {
    fn plan(&mut self, snapshot: &Snapshot<'_>) -> Result<TeamDecision, SimError>;

    /// Optional per-epoch diagnostics lines, drained by the caller.
    fn take_diagnostics(&mut self) -> Vec<String> {
        Vec::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    Mcts,
    Boustrophedon,
}

impl PlannerKind {
    pub fn label(self) -> &'static str {
        match self {
            PlannerKind::Mcts => "mcts",
            PlannerKind::Boustrophedon => "boustro",
        }
    }
}

impl std::str::FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mcts" => Ok(PlannerKind::Mcts),
            "boustro" | "boustrophedon" => Ok(PlannerKind::Boustrophedon),
            other => Err(format!("unknown planner {other:?} (mcts|boustro)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPlacement {
    /// Evenly spaced along the top border row, facing into the map.
    WallUniform,
    /// Uniform over free squares without repeats, uniform headings.
    RandomUniform,
    /// Explicit start states.
    Fixed(Vec<RobotState>),
}

impl StartPlacement {
    pub fn label(&self) -> &'static str {
        match self {
            StartPlacement::WallUniform => "wall",
            StartPlacement::RandomUniform => "random",
            StartPlacement::Fixed(_) => "fixed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub step_seconds: f64,
    pub robot_speed: f64,
    pub sensor_range: f64,
    /// Epoch cap; `None` means 25 × the number of free squares.
    pub max_steps: Option<u64>,
    pub planner: PlannerKind,
    pub placement: StartPlacement,
    pub robots: usize,
    pub seed: u64,
    pub mcts: MctsConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            step_seconds: 0.5,
            robot_speed: 1.0,
            sensor_range: 2.0,
            max_steps: None,
            planner: PlannerKind::Mcts,
            placement: StartPlacement::WallUniform,
            robots: 1,
            seed: 0,
            mcts: MctsConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self, cell_size: f64) -> Result<(), ConfigError> {
        if self.robots == 0 {
            return Err(ConfigError::NoRobots);
        }
        if (self.step_seconds * self.robot_speed - cell_size).abs() > 1e-9 {
            return Err(ConfigError::Invalid(format!(
                "step_seconds × robot_speed = {} m, must equal the {cell_size} m square",
                self.step_seconds * self.robot_speed
            )));
        }
        if !(self.sensor_range >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "sensor range {} < 0",
                self.sensor_range
            )));
        }
        if let StartPlacement::Fixed(starts) = &self.placement {
            if starts.len() != self.robots {
                return Err(ConfigError::Invalid(format!(
                    "{} fixed starts for {} robots",
                    starts.len(),
                    self.robots
                )));
            }
        }
        if self.planner == PlannerKind::Mcts {
            self.mcts.validate()?;
        }
        Ok(())
    }
}

/// Builds the planner for `config` over a world with `robots` starting states.
pub fn build_planner(
    config: &SimConfig,
    map: &GridMap,
    robots: &[RobotState],
) -> Result<Box<dyn TeamPlanner>, SimError> {
    Ok(match config.planner {
        PlannerKind::Mcts => Box::new(crate::mcts_team::MctsTeam::new(
            robots.len(),
            &config.mcts,
            config.seed,
        )?),
        PlannerKind::Boustrophedon => {
            Box::new(crate::boustro::BoustroTeam::new(map, robots, config.seed)?)
        }
    })
}

/// Runs one trial to completion or timeout.
pub fn run(config: &SimConfig, truth: &GridMap) -> Result<TrialRecord, SimError> {
    let mut sim = Simulation::new(config.clone(), truth)?;
    sim.run_to_end()?;
    Ok(sim.record())
}
