//! Monte Carlo Tree Search coverage planner.
//!
//! Each robot owns one [`SearchTree`] whose root is its current state and
//! whose edges are the three motion actions. Every iteration runs
//! selection (UCT), expansion (one random untried action), a rollout under
//! the default policy with peers replaying their published best paths, and
//! backpropagation (parents take the mean of their children's values).
//!
//! After the budget is spent the root child with the largest value is taken
//! and its subtree becomes the next root.

pub mod objective;
pub mod rollout;
pub mod tree;

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::boustro::wavefront::{steer, wave};
use crate::error::ConfigError;
use crate::grid::{apply_action, Action, Cell, RobotState};
use crate::rng::{derive_seed, rng_from, stream, SimRng};
use crate::sim::Snapshot;

pub use objective::{coverage_value, evaluate, step_weight, StepFlags, TurnPenaltyMode};
pub use rollout::{default_policy, rollout, RolloutInput, RolloutScratch};
pub use tree::{uct_score, Backup, NodeId, SearchTree, TreeNode, ROOT};

/// Planner settings. Field names on the wire: `cp`, `horizon`, `c_hit`,
/// `c_turn`, `turn_mode`, `iters`, `wallclock_ms`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MctsConfig {
    #[serde(rename = "cp")]
    pub c_p: f64,
    pub horizon: usize,
    pub c_hit: f64,
    pub c_turn: f64,
    pub turn_mode: TurnPenaltyMode,
    #[serde(rename = "iters")]
    pub iterations: u32,
    /// When set, search runs until this much wall-clock time has passed
    /// instead of for a fixed number of iterations.
    pub wallclock_ms: Option<u64>,
    pub backup: Backup,
    /// When no root action has a positive value, step toward the nearest
    /// uncovered square along a wavefront path instead.
    pub fallback: bool,
}

impl Default for MctsConfig {
    fn default() -> Self {
        MctsConfig {
            c_p: 1.0,
            horizon: 30,
            c_hit: 2.0,
            c_turn: 0.0,
            turn_mode: TurnPenaltyMode::None,
            iterations: 2000,
            wallclock_ms: None,
            backup: Backup::ChildMean,
            fallback: true,
        }
    }
}

impl MctsConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.c_p > 0.0) || !self.c_p.is_finite() {
            return Err(ConfigError::ExplorationCoefficient(self.c_p));
        }
        if self.horizon == 0 {
            return Err(ConfigError::Horizon);
        }
        match self.wallclock_ms {
            Some(0) => Err(ConfigError::ZeroBudget),
            None if self.iterations == 0 => Err(ConfigError::ZeroBudget),
            _ => Ok(()),
        }
    }
}

/// One decision and what gets published to peers.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub action: Action,
    /// Greedy value descent from the root; starts with `action`.
    pub best_path: Vec<Action>,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub iterations: u32,
    pub root_values: [Option<f64>; 3],
    pub chosen: Action,
    /// The action came from the nearest-uncovered fallback.
    pub guided: bool,
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "iters={}", self.iterations)?;
        for a in Action::ALL {
            match self.root_values[a.index()] {
                Some(v) => write!(f, " {}={v:.6}", a.letter())?,
                None => write!(f, " {}=-", a.letter())?,
            }
        }
        write!(f, " chosen={}", self.chosen.letter())?;
        if self.guided {
            write!(f, " guided")?;
        }
        Ok(())
    }
}

/// One robot's planner. Owns its tree and random streams exclusively.
#[derive(Debug)]
pub struct MctsPlanner {
    robot: usize,
    config: MctsConfig,
    tree: Option<SearchTree>,
    rng: SimRng,
    peer_rngs: Vec<SimRng>,
    seed: u64,
    scratch: RolloutScratch,
}

impl MctsPlanner {
    pub fn new(robot: usize, config: MctsConfig, seed: u64) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(MctsPlanner {
            robot,
            config,
            tree: None,
            rng: rng_from(derive_seed(seed, &[stream::PLANNER, robot as u64])),
            peer_rngs: Vec::new(),
            seed,
            scratch: RolloutScratch::default(),
        })
    }

    pub fn config(&self) -> &MctsConfig {
        &self.config
    }

    pub fn tree(&self) -> Option<&SearchTree> {
        self.tree.as_ref()
    }

    /// The tree to search from: the retained subtree when it still starts at
    /// the robot's actual state, a fresh one otherwise.
    fn take_tree(&mut self, state: RobotState) -> SearchTree {
        match self.tree.take() {
            Some(t) if t.root().state == state => t,
            _ => SearchTree::new(state, self.config.horizon as u32),
        }
    }

    fn ensure_peer_rngs(&mut self, robots: usize) {
        while self.peer_rngs.len() < robots {
            let j = self.peer_rngs.len() as u64;
            self.peer_rngs.push(rng_from(derive_seed(
                self.seed,
                &[stream::PEER, self.robot as u64, j],
            )));
        }
    }

    /// Runs one search iteration on `tree`.
    pub fn iterate(&mut self, tree: &mut SearchTree, snapshot: &Snapshot<'_>) {
        self.ensure_peer_rngs(snapshot.robots.len());
        let map = snapshot.map;
        let leaf = tree.select(self.config.c_p);
        let node = if tree.node(leaf).has_untried() {
            tree.expand(leaf, &mut self.rng, |s, a| {
                apply_action(s, a, |c| map.in_bounds(c), |c| map.known_blocked(c)).0
            })
        } else {
            leaf
        };
        let prefix = tree.path_to(node);
        let input = RolloutInput {
            snapshot,
            robot: self.robot,
            config: &self.config,
        };
        let x = rollout(
            &input,
            &prefix,
            &mut self.scratch,
            &mut self.rng,
            &mut self.peer_rngs,
        );
        tree.backpropagate(node, x, self.config.backup);
    }

    /// Grows the tree for the configured budget and picks an action.
    pub fn decide(&mut self, snapshot: &Snapshot<'_>) -> Result<Decision, ConfigError> {
        self.config.validate()?;
        self.ensure_peer_rngs(snapshot.robots.len());
        let mut tree = self.take_tree(snapshot.robots[self.robot]);
        let mut iterations = 0u32;
        match self.config.wallclock_ms {
            Some(ms) => {
                let deadline = Instant::now() + Duration::from_millis(ms);
                loop {
                    self.iterate(&mut tree, snapshot);
                    iterations += 1;
                    if iterations % 16 == 0 && Instant::now() >= deadline {
                        break;
                    }
                }
            }
            None => {
                for _ in 0..self.config.iterations {
                    self.iterate(&mut tree, snapshot);
                }
                iterations = self.config.iterations;
            }
        }
        let best = tree.best_child(ROOT).expect("at least one iteration ran");
        let mut action = tree.node(best).action.expect("root child has an action");
        let mut best_path = tree.best_path();
        let mut guided = false;
        if self.config.fallback && tree.node(best).value <= 0.0 {
            if let Some(a) = toward_uncovered(snapshot, self.robot) {
                guided = a != action;
                if guided {
                    action = a;
                    best_path = vec![a];
                }
            }
        }
        let diagnostics = Diagnostics {
            iterations,
            root_values: tree.root_values(),
            chosen: action,
            guided,
        };
        self.tree = tree.into_subtree(action);
        if guided {
            if let Some(t) = &self.tree {
                best_path.extend(t.best_path());
            }
        }
        Ok(Decision {
            action,
            best_path,
            diagnostics,
        })
    }
}

/// First step of a shortest path to the nearest square that is neither
/// covered nor a known obstacle, avoiding the other robots' squares.
fn toward_uncovered(snapshot: &Snapshot<'_>, robot: usize) -> Option<Action> {
    let map = snapshot.map;
    let others = |c: Cell| {
        snapshot
            .robots
            .iter()
            .enumerate()
            .any(|(j, r)| j != robot && r.pos == c)
    };
    let goals = map
        .cells()
        .filter(|c| !map.is_covered(*c) && !map.known_blocked(*c));
    let dist = wave(map, goals, |c| !map.known_blocked(c));
    steer(
        map,
        snapshot.robots[robot],
        &dist,
        |c| !map.known_blocked(c) && !others(c),
        |c| map.known_blocked(c) || others(c),
    )
}
