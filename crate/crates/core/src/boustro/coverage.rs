//! Per-robot motion inside an assigned cell: a preliminary wall-following
//! lap, then a lawnmower sweep along the columns.

use thiserror::Error;

use crate::grid::{Action, Cell, GridMap, Knowledge, RobotState};

use super::decomp::DecompCell;
use super::wavefront::{steer, wave};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverageError {
    #[error("robot at {at} is outside cell {cell}")]
    OutsideCell { cell: usize, at: Cell },
}

/// Column order for a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sweep {
    pub ascending: bool,
}

impl Sweep {
    /// Starts from whichever end column of `cell` is nearer to `at`.
    pub fn starting_at(cell: &DecompCell, at: Cell) -> Sweep {
        Sweep {
            ascending: at.col - cell.first_col <= cell.last_col() - at.col,
        }
    }

    pub fn columns(self, cell: &DecompCell) -> Vec<i32> {
        let mut cols: Vec<i32> = (cell.first_col..=cell.last_col()).collect();
        if !self.ascending {
            cols.reverse();
        }
        cols
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepStep {
    Act(Action),
    Complete,
}

fn open_square(known: &GridMap, c: Cell) -> bool {
    known.in_bounds(c) && known.known_at(c) != Knowledge::Obstacle
}

/// Squares of `cell` still to cover.
pub fn uncovered(cell: &DecompCell, known: &GridMap) -> usize {
    cell.squares()
        .filter(|q| open_square(known, *q) && !known.is_covered(*q))
        .count()
}

/// Next lawnmower action inside `cell`.
///
/// The working column is the first column in sweep order with an uncovered
/// square; the robot heads for the nearest uncovered square of that column,
/// which walks the column to its end and then shifts to the next one.
/// `occupied` marks squares held by other robots.
pub fn lawnmower_next(
    cell: &DecompCell,
    sweep: Sweep,
    state: RobotState,
    known: &GridMap,
    occupied: impl Fn(Cell) -> bool,
) -> Result<SweepStep, CoverageError> {
    if !cell.contains(state.pos) {
        return Err(CoverageError::OutsideCell {
            cell: cell.id,
            at: state.pos,
        });
    }
    let pending = |q: &Cell| open_square(known, *q) && !known.is_covered(*q);
    let Some(col) = sweep
        .columns(cell)
        .into_iter()
        .find(|&c| cell.squares().any(|q| q.col == c && pending(&q)))
    else {
        return Ok(SweepStep::Complete);
    };
    let goals = cell.squares().filter(|q| q.col == col && pending(q));
    let region = |c: Cell| cell.contains(c) && open_square(known, c);
    let dist = wave(known, goals, region);
    let a = steer(
        known,
        state,
        &dist,
        |c| region(c) && !occupied(c),
        |c| known.known_at(c) == Knowledge::Obstacle || occupied(c),
    );
    Ok(SweepStep::Act(a.unwrap_or(Action::Straight)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FollowStep {
    Act(Action),
    Done,
}

/// Right-hand-rule lap of a cell's boundary, ending back at `anchor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WallFollow {
    pub anchor: Cell,
    left_anchor: bool,
    steps: usize,
}

impl WallFollow {
    pub fn new(anchor: Cell) -> Self {
        WallFollow {
            anchor,
            left_anchor: false,
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Keeps the boundary on the right: tries Right, Straight, Left into the
    /// region; at a dead end rotates toward a side the motion model refuses.
    /// Done once the anchor is re-entered, when the lap cannot continue
    /// without leaving the cell, or after a safety cap on steps.
    pub fn next(&mut self, cell: &DecompCell, state: RobotState, known: &GridMap) -> FollowStep {
        if state.pos != self.anchor {
            self.left_anchor = true;
        } else if self.left_anchor {
            return FollowStep::Done;
        }
        if self.steps > 4 * cell.len() + 8 {
            return FollowStep::Done;
        }
        let region = |c: Cell| cell.contains(c) && open_square(known, c);
        let target = |a: Action| state.pos.step(state.heading.turned(a));
        let choice = [Action::Right, Action::Straight, Action::Left]
            .into_iter()
            .find(|a| region(target(*a)))
            .or_else(|| {
                let wall = |a: Action| {
                    !known.in_bounds(target(a)) || known.known_at(target(a)) == Knowledge::Obstacle
                };
                [Action::Left, Action::Right].into_iter().find(|a| wall(*a))
            });
        match choice {
            // a lone square has nowhere to go
            Some(a) if cell.len() > 1 => {
                self.steps += 1;
                FollowStep::Act(a)
            }
            _ => FollowStep::Done,
        }
    }
}

/// Wall following is skipped when every boundary square is already known.
pub fn boundary_known(cell: &DecompCell, known: &GridMap) -> bool {
    cell.squares()
        .filter(|q| {
            (-1..=1).any(|dc| (-1..=1).any(|dr| !cell.contains(Cell::new(q.col + dc, q.row + dr))))
        })
        .all(|q| known.known_at(q) != Knowledge::Unknown)
}
