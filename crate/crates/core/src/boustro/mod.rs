//! On-line Boustrophedon baseline.
//!
//! A central allocator keeps a [`ReebGraph`] of the still-possibly-free space
//! and auctions its cells to robots. Each robot transits to its cell along a
//! wavefront path, laps the cell boundary once when part of it is still
//! unknown, then sweeps it column by column. Re-auctions happen whenever the
//! decomposition changes, a cell is completed, or a robot sits idle while
//! unassigned cells remain.

pub mod auction;
pub mod coverage;
pub mod decomp;
pub mod wavefront;

use std::collections::VecDeque;

use rand::seq::SliceRandom;

use crate::error::{ConfigError, SimError};
use crate::grid::{Action, Cell, GridMap, Knowledge, RobotState};
use crate::rng::{derive_seed, rng_from, stream, SimRng};
use crate::sim::{Snapshot, TeamDecision, TeamPlanner};

use auction::{allocate, bid_from, distance_to};
use coverage::{
    boundary_known, lawnmower_next, uncovered, FollowStep, Sweep, SweepStep, WallFollow,
};
use decomp::{init_stripes, CellStatus, DecompEvent, ReebGraph};
use wavefront::{steer, wave, UNREACHED};

pub use decomp::DecompCell;

/// Robots that have not reached a fresh square for this many epochs take a
/// random step.
const STUCK_LIMIT: u32 = 3;
/// Squares remembered per robot when judging progress; a robot pacing
/// between a few squares next to another robot counts as stuck.
const HISTORY: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Idle,
    Transit,
    Follow(WallFollow),
    Sweep(Sweep),
}

#[derive(Clone, Debug)]
struct Worker {
    /// Cell being reached or swept.
    current: Option<usize>,
    /// Cell won while busy; released again at the next auction.
    queued: Option<usize>,
    mode: Mode,
    recent: VecDeque<Cell>,
    stuck: u32,
}

pub struct BoustroTeam {
    graph: ReebGraph,
    known: Vec<Knowledge>,
    workers: Vec<Worker>,
    rng: SimRng,
    started: bool,
}

impl BoustroTeam {
    /// Stripe `k` (from the left) goes to the robot with the `k`-th smallest
    /// start column.
    pub fn new(map: &GridMap, robots: &[RobotState], seed: u64) -> Result<Self, ConfigError> {
        let mut graph = init_stripes(map.width(), map.height(), robots.len())?;
        let mut order: Vec<usize> = (0..robots.len()).collect();
        order.sort_by_key(|&r| (robots[r].pos.col, r));
        let mut workers: Vec<Worker> = robots
            .iter()
            .map(|r| Worker {
                current: None,
                queued: None,
                mode: Mode::Transit,
                recent: VecDeque::from([r.pos]),
                stuck: 0,
            })
            .collect();
        for (stripe, &r) in order.iter().enumerate() {
            graph.set_status(stripe, CellStatus::Assigned(r));
            workers[r].current = Some(stripe);
        }
        Ok(BoustroTeam {
            graph,
            known: vec![Knowledge::Unknown; map.len()],
            workers,
            rng: rng_from(derive_seed(seed, &[stream::BOUSTRO])),
            started: false,
        })
    }

    pub fn graph(&self) -> &ReebGraph {
        &self.graph
    }

    /// Cell each robot is working toward, if any.
    pub fn assignments(&self) -> Vec<Option<usize>> {
        self.workers.iter().map(|w| w.current).collect()
    }

    fn sync_knowledge(&mut self, map: &GridMap) -> Vec<DecompEvent> {
        let mut newly = Vec::new();
        for (i, k) in map.known().iter().enumerate() {
            if *k != self.known[i] {
                self.known[i] = *k;
                newly.push(map.cell_at(i));
            }
        }
        self.graph.update(map, &newly)
    }

    /// Hands the piece of a split cell that holds its robot back to that robot.
    fn inherit(&mut self, parent: usize, children: &[usize], robots: &[RobotState]) {
        let status = self.graph.cell(parent).status;
        let Some(r) = status.holder() else { return };
        let w = &mut self.workers[r];
        if w.queued == Some(parent) {
            w.queued = None;
        }
        if w.current != Some(parent) {
            return;
        }
        let free = |c: &usize| self.graph.cell(*c).status == CellStatus::Unassigned;
        let heir = children
            .iter()
            .copied()
            .filter(free)
            .find(|c| self.graph.cell(*c).contains(robots[r].pos))
            .or_else(|| children.iter().copied().find(free));
        match heir {
            Some(c) => {
                self.graph.set_status(c, status);
                w.current = Some(c);
            }
            None => {
                w.current = None;
                w.mode = Mode::Idle;
            }
        }
    }

    fn complete(&mut self, id: usize) {
        self.graph.set_status(id, CellStatus::Complete);
        for w in &mut self.workers {
            if w.queued == Some(id) {
                w.queued = None;
            }
            if w.current == Some(id) {
                w.current = w.queued.take();
                w.mode = if w.current.is_some() {
                    Mode::Transit
                } else {
                    Mode::Idle
                };
            }
        }
    }

    fn auction(&mut self, map: &GridMap, robots: &[RobotState]) {
        for w in &mut self.workers {
            if let Some(q) = w.queued.take() {
                self.graph.set_status(q, CellStatus::Unassigned);
            }
        }
        let open: Vec<usize> = self
            .graph
            .alive()
            .filter(|c| c.status == CellStatus::Unassigned)
            .map(|c| c.id)
            .collect();
        if open.is_empty() {
            return;
        }
        let remaining: Vec<usize> = self
            .workers
            .iter()
            .map(|w| w.current.map_or(0, |c| uncovered(self.graph.cell(c), map)))
            .collect();
        let bids_over = |robots_in: &[usize], cells: &[usize], passable: &dyn Fn(Cell) -> bool| {
            let mut bids = Vec::new();
            for &c in cells {
                let dist = distance_to(self.graph.cell(c), map, passable);
                for &r in robots_in {
                    bids.push(bid_from(r, c, remaining[r], dist[map.index(robots[r].pos)]));
                }
            }
            bids
        };
        let everyone: Vec<usize> = (0..robots.len()).collect();
        let mut won = allocate(&bids_over(&everyone, &open, &|c| {
            map.known_at(c) == Knowledge::Free
        }));

        // idle robots with no known route bid optimistically through unknown squares
        let idle: Vec<usize> = everyone
            .iter()
            .copied()
            .filter(|&r| self.workers[r].current.is_none() && won.iter().all(|w| w.0 != r))
            .collect();
        let left: Vec<usize> = open
            .iter()
            .copied()
            .filter(|&c| won.iter().all(|w| w.1 != c))
            .collect();
        if !idle.is_empty() && !left.is_empty() {
            won.extend(allocate(&bids_over(&idle, &left, &|c| {
                map.known_at(c) != Knowledge::Obstacle
            })));
        }
        for (r, c) in won {
            self.graph.set_status(c, CellStatus::Assigned(r));
            let w = &mut self.workers[r];
            if w.current.is_none() {
                w.current = Some(c);
                w.mode = Mode::Transit;
            } else {
                w.queued = Some(c);
            }
        }
    }

    fn transit_action(
        &self,
        r: usize,
        cell: usize,
        map: &GridMap,
        robots: &[RobotState],
    ) -> Action {
        let cell = self.graph.cell(cell);
        let state = robots[r];
        let robot_at = |c: Cell| robots.iter().enumerate().any(|(j, s)| j != r && s.pos == c);
        let known_route = |c: Cell| {
            map.known_at(c) == Knowledge::Free
                || (cell.contains(c) && map.known_at(c) != Knowledge::Obstacle)
        };
        let goals = || {
            cell.squares()
                .filter(|q| map.known_at(*q) != Knowledge::Obstacle)
        };
        let here = map.index(state.pos);
        let mut dist = wave(map, goals(), |c| known_route(c) && !robot_at(c));
        if dist[here] == UNREACHED {
            dist = wave(map, goals(), known_route);
        }
        if dist[here] == UNREACHED {
            dist = wave(map, goals(), |c| map.known_at(c) != Knowledge::Obstacle);
        }
        steer(
            map,
            state,
            &dist,
            |c| map.known_at(c) != Knowledge::Obstacle && !robot_at(c),
            |c| map.known_at(c) == Knowledge::Obstacle || robot_at(c),
        )
        .unwrap_or(Action::Straight)
    }

    fn act(&mut self, r: usize, map: &GridMap, robots: &[RobotState]) -> Action {
        let state = robots[r];
        let robot_at = |c: Cell| robots.iter().enumerate().any(|(j, s)| j != r && s.pos == c);
        // a mode change retries at most a few times within one epoch
        for _ in 0..4 {
            let Some(id) = self.workers[r].current else {
                return idle_action(state, map, robot_at);
            };
            let cell = &self.graph.cell(id).clone();
            match self.workers[r].mode {
                Mode::Idle | Mode::Transit => {
                    if !cell.contains(state.pos) {
                        self.workers[r].mode = Mode::Transit;
                        return self.transit_action(r, id, map, robots);
                    }
                    self.graph.set_status(id, CellStatus::InProgress(r));
                    self.workers[r].mode = if boundary_known(cell, map) {
                        Mode::Sweep(Sweep::starting_at(cell, state.pos))
                    } else {
                        Mode::Follow(WallFollow::new(state.pos))
                    };
                }
                Mode::Follow(mut lap) => {
                    if !cell.contains(state.pos) {
                        self.workers[r].mode = Mode::Transit;
                        continue;
                    }
                    match lap.next(cell, state, map) {
                        FollowStep::Act(a) => {
                            self.workers[r].mode = Mode::Follow(lap);
                            return a;
                        }
                        FollowStep::Done => {
                            self.workers[r].mode = Mode::Sweep(Sweep::starting_at(cell, state.pos))
                        }
                    }
                }
                Mode::Sweep(sweep) => match lawnmower_next(cell, sweep, state, map, robot_at) {
                    Ok(SweepStep::Act(a)) => return a,
                    Ok(SweepStep::Complete) => self.complete(id),
                    Err(_) => self.workers[r].mode = Mode::Transit,
                },
            }
        }
        Action::Straight
    }
}

fn enterable(map: &GridMap, c: Cell, robot_at: impl Fn(Cell) -> bool) -> bool {
    map.in_bounds(c) && map.known_at(c) != Knowledge::Obstacle && !robot_at(c)
}

/// Idle robots park facing something solid so that `Straight` keeps them put.
fn idle_action(state: RobotState, map: &GridMap, robot_at: impl Fn(Cell) -> bool) -> Action {
    let solid = |a: Action| !enterable(map, state.pos.step(state.heading.turned(a)), &robot_at);
    if solid(Action::Straight) {
        Action::Straight
    } else if solid(Action::Left) {
        Action::Left
    } else if solid(Action::Right) {
        Action::Right
    } else {
        Action::Straight
    }
}

impl TeamPlanner for BoustroTeam {
    fn plan(&mut self, snapshot: &Snapshot<'_>) -> Result<TeamDecision, SimError> {
        let map = snapshot.map;
        let robots = snapshot.robots;
        let n = robots.len();
        let events = self.sync_knowledge(map);
        let mut reauction = !self.started || !events.is_empty();
        self.started = true;
        for ev in &events {
            if let DecompEvent::Split { parent, children } = ev {
                self.inherit(*parent, children, robots);
            }
        }
        let done: Vec<usize> = self
            .graph
            .alive()
            .filter(|c| c.status != CellStatus::Complete && uncovered(c, map) == 0)
            .map(|c| c.id)
            .collect();
        for id in done {
            self.complete(id);
            reauction = true;
        }
        let waiting = self.workers.iter().any(|w| w.current.is_none());
        if waiting
            && self
                .graph
                .alive()
                .any(|c| c.status == CellStatus::Unassigned)
        {
            reauction = true;
        }
        if reauction {
            self.auction(map, robots);
        }

        for (r, (w, s)) in self.workers.iter_mut().zip(robots).enumerate() {
            let crowded = robots.iter().enumerate().any(|(j, o)| {
                j != r && (o.pos.col - s.pos.col).abs() + (o.pos.row - s.pos.row).abs() <= 2
            });
            let still = w.recent.back() == Some(&s.pos);
            if still || (crowded && w.recent.contains(&s.pos)) {
                w.stuck += 1;
            } else {
                w.stuck = 0;
            }
            if w.recent.back() != Some(&s.pos) {
                w.recent.push_back(s.pos);
                if w.recent.len() > HISTORY {
                    w.recent.pop_front();
                }
            }
        }
        let mut actions: Vec<Action> = (0..n).map(|r| self.act(r, map, robots)).collect();

        let target = |r: usize, a: Action| robots[r].pos.step(robots[r].heading.turned(a));
        for r in 0..n {
            let robot_at = |c: Cell| robots.iter().enumerate().any(|(j, s)| j != r && s.pos == c);
            let idle = self.workers[r].current.is_none();
            let wanted = (0..n).any(|i| i != r && target(i, actions[i]) == robots[r].pos);
            if idle && wanted {
                // step aside for a working robot
                let spare = Action::ALL.into_iter().find(|&a| {
                    let t = target(r, a);
                    enterable(map, t, robot_at)
                        && (0..n).all(|i| i == r || target(i, actions[i]) != t)
                });
                if let Some(a) = spare {
                    actions[r] = a;
                }
            } else if !idle && self.workers[r].stuck >= STUCK_LIMIT {
                let options: Vec<Action> = Action::ALL
                    .into_iter()
                    .filter(|&a| enterable(map, target(r, a), robot_at))
                    .collect();
                if let Some(a) = options.choose(&mut self.rng) {
                    actions[r] = *a;
                }
            }
        }
        Ok(TeamDecision {
            actions,
            paths: vec![Vec::new(); n],
        })
    }
}
