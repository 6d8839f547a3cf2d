use thiserror::Error;

use crate::grid::Cell;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("map file is empty")]
    MissingHeader,
    #[error("bad map header {0:?}, expected `W H`")]
    BadHeader(String),
    #[error("map file ends before row {0}")]
    MissingRow(usize),
    #[error("row {row} has {got} columns, expected {expected}")]
    RowWidth {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("unexpected character {ch:?} in row {row}")]
    BadChar { row: usize, ch: char },
    #[error("data after the last map row")]
    TrailingData,
    #[error("raster has {got} cells, expected {expected}")]
    Size { expected: usize, got: usize },
    #[error("invalid map dimensions {width}x{height}")]
    Dimensions { width: usize, height: usize },
    #[error("border square {0} is an obstacle")]
    BorderObstacle(Cell),
    #[error("obstacle density {0} outside [0, 1)")]
    Density(f64),
    #[error("generated map has no free space")]
    NoFreeSpace,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("exploration coefficient cp must be > 0, got {0}")]
    ExplorationCoefficient(f64),
    #[error("rollout horizon must be at least 1")]
    Horizon,
    #[error("planner budget is zero: set iters > 0 or wallclock_ms > 0")]
    ZeroBudget,
    #[error("need at least one robot")]
    NoRobots,
    #[error("{robots} robots do not fit in {available} free squares")]
    TooManyRobots { robots: usize, available: usize },
    #[error("{robots} robots cannot split {columns} columns into stripes")]
    TooManyStripes { robots: usize, columns: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("planner returned {got} actions for {expected} robots")]
    ActionCount { expected: usize, got: usize },
    #[error("planner for robot {robot} failed: {reason}")]
    Planner { robot: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("group {0:?} has no samples")]
    EmptyGroup(String),
    #[error("unknown group key {0:?}")]
    UnknownKey(String),
}
