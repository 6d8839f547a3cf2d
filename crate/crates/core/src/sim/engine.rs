use rand::seq::index;
use rand::Rng;

use crate::error::{ConfigError, SimError};
use crate::grid::{reachable_free_cells, Action, Cell, GridMap, Heading, Occupancy, RobotState};
use crate::rng::{derive_seed, rng_from, stream};
use crate::sensing::Sensor;

use super::record::{config_digest, Outcome, TrialRecord};
use super::trace::TraceWriter;
use super::{build_planner, SimConfig, Snapshot, StartPlacement, TeamPlanner};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TurnCount {
    pub left: u32,
    pub right: u32,
}

/// Everything that changes during a run.
#[derive(Clone, Debug)]
pub struct WorldState {
    pub map: GridMap,
    pub robots: Vec<RobotState>,
    pub epoch: u64,
    pub turns: Vec<TurnCount>,
    pub paths: Vec<Vec<crate::grid::Action>>,
    target: Vec<bool>,
    remaining: usize,
}

impl WorldState {
    /// Fresh world over `truth`: nothing known, robots' squares covered,
    /// and one round of sensing done.
    pub fn new(truth: &GridMap, robots: Vec<RobotState>, sensor: &Sensor) -> Self {
        let mut map = truth.clone();
        map.reset_belief();
        let starts: Vec<Cell> = robots.iter().map(|r| r.pos).collect();
        let target = reachable_free_cells(&map, &starts);
        let remaining = target.iter().filter(|t| **t).count();
        let n = robots.len();
        let mut world = WorldState {
            map,
            robots,
            epoch: 0,
            turns: vec![TurnCount::default(); n],
            paths: vec![Vec::new(); n],
            target,
            remaining,
        };
        for i in 0..n {
            world.cover(world.robots[i].pos);
        }
        for i in 0..n {
            sensor.sense_into(&mut world.map, world.robots[i].pos);
        }
        world
    }

    fn cover(&mut self, c: Cell) {
        let was = self.map.is_covered(c);
        self.map.mark_covered(c);
        if !was && self.target[self.map.index(c)] {
            self.remaining -= 1;
        }
    }

    /// True when every square reachable from the start positions is covered.
    pub fn is_complete(&self) -> bool {
        self.remaining == 0
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn target_count(&self) -> usize {
        self.target.iter().filter(|t| **t).count()
    }

    pub fn snapshot(&self) -> Snapshot<'_> {
        Snapshot {
            map: &self.map,
            robots: &self.robots,
            paths: &self.paths,
            epoch: self.epoch,
        }
    }

    /// Applies one epoch of actions. Returns which robots moved.
    pub fn apply(&mut self, actions: &[Action], sensor: &Sensor) -> Vec<bool> {
        let resolved = resolve_moves(&self.map, &self.robots, actions);
        let mut moved = Vec::with_capacity(resolved.len());
        for (i, (next, m)) in resolved.into_iter().enumerate() {
            self.robots[i] = next;
            match actions[i] {
                Action::Left => self.turns[i].left += 1,
                Action::Right => self.turns[i].right += 1,
                Action::Straight => {}
            }
            if m {
                self.cover(next.pos);
            }
            moved.push(m);
        }
        for i in 0..self.robots.len() {
            sensor.sense_into(&mut self.map, self.robots[i].pos);
        }
        self.epoch += 1;
        moved
    }
}

/// Simultaneous move resolution against truth, in robot-id order.
pub fn resolve_moves(
    map: &GridMap,
    robots: &[RobotState],
    actions: &[Action],
) -> Vec<(RobotState, bool)> {
    let mut claimed: Vec<Cell> = Vec::with_capacity(robots.len());
    robots
        .iter()
        .zip(actions)
        .map(|(r, a)| {
            let heading = r.heading.turned(*a);
            let target = r.pos.step(heading);
            let blocked = !map.in_bounds(target)
                || map.truth_at(target) == Occupancy::Obstacle
                || robots.iter().any(|o| o.pos == target)
                || claimed.contains(&target);
            if blocked {
                (RobotState::new(r.pos, heading), false)
            } else {
                claimed.push(target);
                (RobotState::new(target, heading), true)
            }
        })
        .collect()
}

/// Start states for `n` robots.
pub fn place_robots(
    map: &GridMap,
    n: usize,
    placement: &StartPlacement,
    seed: u64,
) -> Result<Vec<RobotState>, ConfigError> {
    if n == 0 {
        return Err(ConfigError::NoRobots);
    }
    match placement {
        StartPlacement::WallUniform => {
            let w = map.width();
            if n > w {
                return Err(ConfigError::TooManyRobots {
                    robots: n,
                    available: w,
                });
            }
            Ok((0..n)
                .map(|i| {
                    let col = (2 * i + 1) * w / (2 * n);
                    RobotState::new(Cell::new(col as i32, 0), Heading::South)
                })
                .collect())
        }
        StartPlacement::RandomUniform => {
            let free: Vec<Cell> = map
                .cells()
                .filter(|c| map.truth_at(*c) == Occupancy::Free)
                .collect();
            if n > free.len() {
                return Err(ConfigError::TooManyRobots {
                    robots: n,
                    available: free.len(),
                });
            }
            let mut rng = rng_from(derive_seed(seed, &[stream::PLACEMENT]));
            let picks = index::sample(&mut rng, free.len(), n).into_vec();
            Ok(picks
                .into_iter()
                .map(|i| RobotState::new(free[i], Heading::ALL[rng.gen_range(0..4)]))
                .collect())
        }
        StartPlacement::Fixed(starts) => {
            for (i, s) in starts.iter().enumerate() {
                if !map.in_bounds(s.pos) || map.truth_at(s.pos) == Occupancy::Obstacle {
                    return Err(ConfigError::Invalid(format!(
                        "robot {i} starts on a blocked square {}",
                        s.pos
                    )));
                }
                if starts[..i].iter().any(|o| o.pos == s.pos) {
                    return Err(ConfigError::Invalid(format!(
                        "robots share start square {}",
                        s.pos
                    )));
                }
            }
            if starts.len() != n {
                return Err(ConfigError::Invalid(format!(
                    "{} fixed starts for {n} robots",
                    starts.len()
                )));
            }
            Ok(starts.clone())
        }
    }
}

/// A configured run in progress.
pub struct Simulation {
    config: SimConfig,
    world: WorldState,
    sensor: Sensor,
    planner: Box<dyn TeamPlanner>,
    max_steps: u64,
    trace: Option<TraceWriter>,
    diagnostics: Vec<String>,
}

impl Simulation {
    pub fn new(config: SimConfig, truth: &GridMap) -> Result<Self, SimError> {
        config.validate(truth.cell_size())?;
        let robots = place_robots(truth, config.robots, &config.placement, config.seed)?;
        let sensor = Sensor::new(config.sensor_range, truth.cell_size());
        let world = WorldState::new(truth, robots, &sensor);
        let planner = build_planner(&config, &world.map, &world.robots)?;
        let max_steps = config.max_steps.unwrap_or(25 * truth.free_count() as u64);
        Ok(Simulation {
            config,
            world,
            sensor,
            planner,
            max_steps,
            trace: None,
            diagnostics: Vec::new(),
        })
    }

    /// Swaps in a custom planner, e.g. one with diagnostics enabled.
    pub fn with_planner(mut self, planner: Box<dyn TeamPlanner>) -> Self {
        self.planner = planner;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(TraceWriter::new(&self.world.map, &self.world.robots));
        self
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn max_steps(&self) -> u64 {
        self.max_steps
    }

    pub fn is_complete(&self) -> bool {
        self.world.is_complete()
    }

    pub fn is_finished(&self) -> bool {
        self.is_complete() || self.world.epoch >= self.max_steps
    }

    /// Advances one epoch.
    pub fn step(&mut self) -> Result<(), SimError> {
        let decision = self.planner.plan(&self.world.snapshot())?;
        let n = self.world.robots.len();
        if decision.actions.len() != n {
            return Err(SimError::ActionCount {
                expected: n,
                got: decision.actions.len(),
            });
        }
        self.world.apply(&decision.actions, &self.sensor);
        self.world.paths = if decision.paths.len() == n {
            decision.paths
        } else {
            vec![Vec::new(); n]
        };
        self.diagnostics.extend(self.planner.take_diagnostics());
        if let Some(t) = &mut self.trace {
            t.epoch(self.world.epoch, &decision.actions, &self.world.robots);
        }
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<(), SimError> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(())
    }

    pub fn take_diagnostics(&mut self) -> Vec<String> {
        std::mem::take(&mut self.diagnostics)
    }

    pub fn trace_text(&self) -> Option<String> {
        self.trace.as_ref().map(TraceWriter::text)
    }

    pub fn record(&self) -> TrialRecord {
        let w = &self.world;
        let outcome = if w.is_complete() {
            Outcome::Complete
        } else {
            Outcome::Timeout
        };
        TrialRecord {
            planner: self.config.planner.label().to_string(),
            placement: self.config.placement.label().to_string(),
            robots: w.robots.len(),
            density: None,
            map_index: None,
            trial: None,
            c_turn: self.config.mcts.c_turn,
            turn_mode: self.config.mcts.turn_mode,
            seed: self.config.seed,
            config_digest: config_digest(&self.config),
            outcome,
            epochs: w.epoch,
            completion_time_s: w.epoch as f64 * self.config.step_seconds,
            covered: w.target_count() - w.remaining(),
            target: w.target_count(),
            turns_left: w.turns.iter().map(|t| t.left).collect(),
            turns_right: w.turns.iter().map(|t| t.right).collect(),
            total_left: w.turns.iter().map(|t| t.left).sum(),
            total_right: w.turns.iter().map(|t| t.right).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::PlannerKind;

    fn st(c: i32, r: i32, h: Heading) -> RobotState {
        RobotState::new(Cell::new(c, r), h)
    }

    #[test]
    fn wall_placement() {
        let map = GridMap::empty(20, 20);
        let one = place_robots(&map, 1, &StartPlacement::WallUniform, 0).unwrap();
        assert_eq!(one, vec![st(10, 0, Heading::South)]);
        let ten = place_robots(&map, 10, &StartPlacement::WallUniform, 0).unwrap();
        let cols: Vec<i32> = ten.iter().map(|r| r.pos.col).collect();
        let gaps: Vec<i32> = cols.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gaps.iter().all(|g| *g > 0));
        assert!(gaps.iter().max().unwrap() - gaps.iter().min().unwrap() <= 1);
        let three = place_robots(&map, 3, &StartPlacement::WallUniform, 0).unwrap();
        let gaps: Vec<i32> = three
            .windows(2)
            .map(|w| w[1].pos.col - w[0].pos.col)
            .collect();
        assert!(gaps.iter().max().unwrap() - gaps.iter().min().unwrap() <= 1);
    }

    #[test]
    fn random_placement_is_seeded() {
        let map = GridMap::empty(20, 20);
        let a = place_robots(&map, 3, &StartPlacement::RandomUniform, 5).unwrap();
        let b = place_robots(&map, 3, &StartPlacement::RandomUniform, 5).unwrap();
        assert_eq!(a, b);
        assert!(a[0].pos != a[1].pos && a[1].pos != a[2].pos && a[0].pos != a[2].pos);
    }

    #[test]
    fn too_many_robots() {
        let map = GridMap::empty(3, 3);
        assert!(matches!(
            place_robots(&map, 10, &StartPlacement::RandomUniform, 0),
            Err(ConfigError::TooManyRobots { .. })
        ));
        assert!(matches!(
            place_robots(&map, 0, &StartPlacement::WallUniform, 0),
            Err(ConfigError::NoRobots)
        ));
    }

    #[test]
    fn swap_targets_both_blocked() {
        let map = GridMap::empty(6, 6);
        let robots = [st(2, 2, Heading::East), st(3, 2, Heading::West)];
        let out = resolve_moves(&map, &robots, &[Action::Straight, Action::Straight]);
        assert_eq!(out, vec![(robots[0], false), (robots[1], false)]);

        let robots = [st(2, 2, Heading::North), st(3, 3, Heading::North)];
        // robot 0 turns right into (3,2); robot 1 turns left into (2,3)
        let out = resolve_moves(&map, &robots, &[Action::Right, Action::Left]);
        assert!(out[0].1 && out[1].1);
    }

    #[test]
    fn same_target_lower_id_wins() {
        let map = GridMap::empty(6, 6);
        let robots = [st(1, 2, Heading::East), st(3, 2, Heading::West)];
        let out = resolve_moves(&map, &robots, &[Action::Straight, Action::Straight]);
        assert_eq!(out[0], (st(2, 2, Heading::East), true));
        assert_eq!(out[1], (st(3, 2, Heading::West), false));
    }

    #[test]
    fn blocked_turn_commits_heading() {
        let map = GridMap::empty(6, 6);
        let robots = [st(0, 0, Heading::South)];
        let out = resolve_moves(&map, &robots, &[Action::Right]);
        assert_eq!(out[0], (st(0, 0, Heading::West), false));
    }

    #[test]
    fn single_free_square_is_complete_at_start() {
        let map: GridMap = "1 1\n.\n".parse().unwrap();
        let cfg = SimConfig {
            planner: PlannerKind::Mcts,
            robots: 1,
            ..SimConfig::default()
        };
        let sim = Simulation::new(cfg, &map).unwrap();
        assert!(sim.is_complete());
        assert_eq!(sim.record().epochs, 0);
        assert_eq!(sim.record().outcome, Outcome::Complete);
    }

    #[test]
    fn initial_world_is_not_complete() {
        let map = GridMap::empty(5, 5);
        let cfg = SimConfig {
            robots: 2,
            ..SimConfig::default()
        };
        let sim = Simulation::new(cfg, &map).unwrap();
        assert!(!sim.is_complete());
        assert_eq!(sim.world().map.covered_count(), 2);
    }

    #[test]
    fn one_step_covers_at_most_one_square() {
        let map = GridMap::empty(6, 6);
        let sensor = Sensor::new(2.0, 0.5);
        let mut w = WorldState::new(&map, vec![st(2, 2, Heading::East)], &sensor);
        let before = w.map.covered_count();
        w.apply(&[Action::Straight], &sensor);
        assert!(w.map.covered_count() - before <= 1);
        assert_eq!(w.epoch, 1);
    }

    #[test]
    fn turn_counters() {
        let map = GridMap::empty(6, 6);
        let sensor = Sensor::new(2.0, 0.5);
        let mut w = WorldState::new(&map, vec![st(2, 2, Heading::East)], &sensor);
        w.apply(&[Action::Left], &sensor);
        w.apply(&[Action::Left], &sensor);
        w.apply(&[Action::Right], &sensor);
        w.apply(&[Action::Straight], &sensor);
        assert_eq!(w.turns[0], TurnCount { left: 2, right: 1 });
    }

    #[test]
    fn timeout_is_recorded() {
        let map = GridMap::empty(20, 20);
        let cfg = SimConfig {
            robots: 1,
            max_steps: Some(1),
            mcts: crate::mcts::MctsConfig {
                iterations: 20,
                ..Default::default()
            },
            ..SimConfig::default()
        };
        let rec = crate::sim::run(&cfg, &map).unwrap();
        assert_eq!(rec.outcome, Outcome::Timeout);
        assert_eq!(rec.epochs, 1);
    }

    #[test]
    fn bad_clock_is_rejected() {
        let map = GridMap::empty(5, 5);
        let cfg = SimConfig {
            robot_speed: 2.0,
            ..SimConfig::default()
        };
        assert!(Simulation::new(cfg, &map).is_err());
    }
}
