//! Market-based cell allocation.

use crate::grid::{Cell, GridMap, Knowledge};
use crate::mcts::objective::STEP_SECONDS;

use super::decomp::DecompCell;
use super::wavefront::{wave, UNREACHED};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bid {
    pub robot: usize,
    pub cell: usize,
    /// Seconds; infinite when the cell cannot be reached.
    pub cost: f64,
}

/// Cost for `robot` to take `cell`: the time to finish `remaining` squares of
/// its current work plus the transit time from `handoff` to the cell's
/// nearest square over squares where `passable` holds.
pub fn compute_bid_over(
    robot: usize,
    cell: &DecompCell,
    remaining: usize,
    handoff: Cell,
    known: &GridMap,
    passable: impl Fn(Cell) -> bool,
) -> Bid {
    let d = distance_to(cell, known, passable)[known.index(handoff)];
    bid_from(robot, cell.id, remaining, d)
}

/// Transit distance (moves) from every square to the nearest square of `cell`.
pub fn distance_to(
    cell: &DecompCell,
    known: &GridMap,
    passable: impl Fn(Cell) -> bool,
) -> Vec<u32> {
    wave(
        known,
        cell.squares()
            .filter(|q| known.known_at(*q) != Knowledge::Obstacle),
        passable,
    )
}

pub fn bid_from(robot: usize, cell: usize, remaining: usize, distance: u32) -> Bid {
    let cost = if distance == UNREACHED {
        f64::INFINITY
    } else {
        (remaining as f64 + distance as f64) * STEP_SECONDS
    };
    Bid { robot, cell, cost }
}

/// [`compute_bid_over`] restricted to known-free squares.
pub fn compute_bid(
    robot: usize,
    cell: &DecompCell,
    remaining: usize,
    handoff: Cell,
    known: &GridMap,
) -> Bid {
    compute_bid_over(robot, cell, remaining, handoff, known, |c| {
        known.known_at(c) == Knowledge::Free
    })
}

/// Greedy allocation: commits the lowest finite bid, drops its robot and
/// cell, repeats. Ties go to the lower robot id, then the lower cell id.
pub fn allocate(bids: &[Bid]) -> Vec<(usize, usize)> {
    let mut order: Vec<&Bid> = bids.iter().filter(|b| b.cost.is_finite()).collect();
    order.sort_by(|a, b| {
        a.cost
            .total_cmp(&b.cost)
            .then(a.robot.cmp(&b.robot))
            .then(a.cell.cmp(&b.cell))
    });
    let mut out: Vec<(usize, usize)> = Vec::new();
    for b in order {
        if out.iter().all(|&(r, c)| r != b.robot && c != b.cell) {
            out.push((b.robot, b.cell));
        }
    }
    out
}
