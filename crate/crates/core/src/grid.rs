//! Grid world: truth map, team knowledge, coverage state, and motion.
//!
//! Coordinates are `(col, row)` with row 0 at the top of the map. North
//! points toward decreasing rows. The full heading/turn table is:
//!
//! | heading | step `(dcol, drow)` | after `Left` | after `Right` |
//! |---------|---------------------|--------------|---------------|
//! | North   | `( 0, -1)`          | West         | East          |
//! | East    | `( 1,  0)`          | North        | South         |
//! | South   | `( 0,  1)`          | East         | West          |
//! | West    | `(-1,  0)`          | South        | North         |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::MapError;

/// Side length of one grid square in meters.
pub const CELL_SIZE_M: f64 = 0.5;

/// A grid square coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub col: i32,
    pub row: i32,
}

impl Cell {
    pub const fn new(col: i32, row: i32) -> Self {
        Cell { col, row }
    }

    pub fn step(self, heading: Heading) -> Cell {
        let (dc, dr) = heading.delta();
        Cell::new(self.col + dc, self.row + dr)
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        self.col.abs_diff(other.col) + self.row.abs_diff(other.row)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.col, self.row)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::North, Heading::East, Heading::South, Heading::West];

    pub const fn delta(self) -> (i32, i32) {
        match self {
            Heading::North => (0, -1),
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
        }
    }

    pub const fn left(self) -> Heading {
        match self {
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
            Heading::East => Heading::North,
        }
    }

    pub const fn right(self) -> Heading {
        match self {
            Heading::North => Heading::East,
            Heading::East => Heading::South,
            Heading::South => Heading::West,
            Heading::West => Heading::North,
        }
    }

    pub const fn reverse(self) -> Heading {
        self.left().left()
    }

    pub fn turned(self, action: Action) -> Heading {
        match action {
            Action::Straight => self,
            Action::Left => self.left(),
            Action::Right => self.right(),
        }
    }

    pub const fn letter(self) -> char {
        match self {
            Heading::North => 'N',
            Heading::East => 'E',
            Heading::South => 'S',
            Heading::West => 'W',
        }
    }

    pub fn from_letter(c: char) -> Option<Heading> {
        Heading::ALL.into_iter().find(|h| h.letter() == c)
    }

    /// The heading that moves from `from` to the 4-neighbor `to`.
    pub fn between(from: Cell, to: Cell) -> Option<Heading> {
        Heading::ALL.into_iter().find(|h| from.step(*h) == to)
    }
}

/// One of the three motion primitives. The declaration order is the
/// tie-break order used everywhere: `Straight < Left < Right`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Straight,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Straight, Action::Left, Action::Right];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn letter(self) -> char {
        match self {
            Action::Straight => 'S',
            Action::Left => 'L',
            Action::Right => 'R',
        }
    }

    pub fn from_letter(c: char) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.letter() == c)
    }

    pub const fn is_turn(self) -> bool {
        !matches!(self, Action::Straight)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RobotState {
    pub pos: Cell,
    pub heading: Heading,
}

impl RobotState {
    pub const fn new(pos: Cell, heading: Heading) -> Self {
        RobotState { pos, heading }
    }
}

impl fmt::Display for RobotState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{}",
            self.pos.col,
            self.pos.row,
            self.heading.letter()
        )
    }
}

/// Rotates per `action`, then advances one square along the new heading
/// unless the target is blocked. Rotation always commits.
///
/// The `blocked` predicate only sees in-bounds squares; bounds are the
/// caller's job via `in_bounds`.
pub fn apply_action(
    state: RobotState,
    action: Action,
    in_bounds: impl Fn(Cell) -> bool,
    blocked: impl Fn(Cell) -> bool,
) -> (RobotState, bool) {
    let heading = state.heading.turned(action);
    let target = state.pos.step(heading);
    if in_bounds(target) && !blocked(target) {
        (RobotState::new(target, heading), true)
    } else {
        (RobotState::new(state.pos, heading), false)
    }
}

/// Ground-truth occupancy of a square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Occupancy {
    Free,
    Obstacle,
}

/// Team belief about a square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Knowledge {
    Unknown,
    Free,
    Obstacle,
}

impl From<Occupancy> for Knowledge {
    fn from(o: Occupancy) -> Self {
        match o {
            Occupancy::Free => Knowledge::Free,
            Occupancy::Obstacle => Knowledge::Obstacle,
        }
    }
}

/// The shared world: truth, team knowledge and the covered set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    truth: Vec<Occupancy>,
    known: Vec<Knowledge>,
    covered: Vec<bool>,
    covered_count: usize,
}

impl GridMap {
    /// An all-free map with nothing known and nothing covered.
    pub fn empty(width: usize, height: usize) -> Self {
        let n = width * height;
        GridMap {
            width,
            height,
            truth: vec![Occupancy::Free; n],
            known: vec![Knowledge::Unknown; n],
            covered: vec![false; n],
            covered_count: 0,
        }
    }

    /// Builds a map from a truth raster in row-major order.
    pub fn from_truth(
        width: usize,
        height: usize,
        truth: Vec<Occupancy>,
    ) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::Dimensions { width, height });
        }
        if truth.len() != width * height {
            return Err(MapError::Size {
                expected: width * height,
                got: truth.len(),
            });
        }
        let mut map = GridMap::empty(width, height);
        map.truth = truth;
        for c in map.border_cells() {
            if map.truth_at(c) == Occupancy::Obstacle {
                return Err(MapError::BorderObstacle(c));
            }
        }
        Ok(map)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    pub fn cell_size(&self) -> f64 {
        CELL_SIZE_M
    }

    #[inline]
    pub fn in_bounds(&self, c: Cell) -> bool {
        c.col >= 0 && c.row >= 0 && (c.col as usize) < self.width && (c.row as usize) < self.height
    }

    /// Row-major index of an in-bounds cell.
    #[inline]
    pub fn index(&self, c: Cell) -> usize {
        debug_assert!(self.in_bounds(c), "{c} out of bounds");
        c.row as usize * self.width + c.col as usize
    }

    #[inline]
    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new((index % self.width) as i32, (index / self.width) as i32)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).map(|i| self.cell_at(i))
    }

    pub fn is_border(&self, c: Cell) -> bool {
        c.col == 0
            || c.row == 0
            || c.col as usize == self.width - 1
            || c.row as usize == self.height - 1
    }

    fn border_cells(&self) -> Vec<Cell> {
        self.cells().filter(|c| self.is_border(*c)).collect()
    }

    #[inline]
    pub fn truth_at(&self, c: Cell) -> Occupancy {
        self.truth[self.index(c)]
    }

    #[inline]
    pub fn known_at(&self, c: Cell) -> Knowledge {
        self.known[self.index(c)]
    }

    #[inline]
    pub fn is_covered(&self, c: Cell) -> bool {
        self.covered[self.index(c)]
    }

    pub fn truth(&self) -> &[Occupancy] {
        &self.truth
    }

    pub fn known(&self) -> &[Knowledge] {
        &self.known
    }

    pub fn covered(&self) -> &[bool] {
        &self.covered
    }

    pub fn covered_count(&self) -> usize {
        self.covered_count
    }

    pub fn free_count(&self) -> usize {
        self.truth.iter().filter(|o| **o == Occupancy::Free).count()
    }

    pub fn obstacle_count(&self) -> usize {
        self.len() - self.free_count()
    }

    /// Known obstacles block; unknown squares count as open.
    #[inline]
    pub fn known_blocked(&self, c: Cell) -> bool {
        self.known_at(c) == Knowledge::Obstacle
    }

    /// Records an observation. Panics in debug builds if it contradicts truth.
    pub fn reveal(&mut self, c: Cell, observed: Occupancy) {
        debug_assert_eq!(
            self.truth_at(c),
            observed,
            "observation of {c} contradicts truth"
        );
        let i = self.index(c);
        self.known[i] = observed.into();
    }

    /// Marks a free square covered. Idempotent.
    ///
    /// # Panics
    ///
    /// If `c` is an obstacle in truth; that can only come from a motion bug.
    pub fn mark_covered(&mut self, c: Cell) {
        assert_eq!(
            self.truth_at(c),
            Occupancy::Free,
            "marking obstacle {c} covered"
        );
        let i = self.index(c);
        if !self.covered[i] {
            self.covered[i] = true;
            self.covered_count += 1;
        }
    }

    /// True when every truth-free square is covered.
    pub fn is_complete(&self) -> bool {
        self.covered_count == self.free_count()
    }

    /// Drops knowledge and coverage, keeping truth.
    pub fn reset_belief(&mut self) {
        self.known.fill(Knowledge::Unknown);
        self.covered.fill(false);
        self.covered_count = 0;
    }

    /// Replaces knowledge with truth everywhere.
    pub fn reveal_all(&mut self) {
        for i in 0..self.len() {
            self.known[i] = self.truth[i].into();
        }
    }

    /// Sets a truth square. Intended for building fixtures.
    pub fn set_truth(&mut self, c: Cell, o: Occupancy) {
        let i = self.index(c);
        self.truth[i] = o;
    }

    /// The 4-connected neighbors of `c` that are in bounds, in N, E, S, W order.
    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        Heading::ALL
            .into_iter()
            .map(move |h| c.step(h))
            .filter(|n| self.in_bounds(*n))
    }

    /// Serializes the truth raster in the plain-text map format.
    pub fn to_map_text(&self) -> String {
        let mut s = String::with_capacity(self.len() + self.height + 16);
        s.push_str(&format!("{} {}\n", self.width, self.height));
        for row in 0..self.height {
            for col in 0..self.width {
                s.push(match self.truth[row * self.width + col] {
                    Occupancy::Free => '.',
                    Occupancy::Obstacle => '#',
                });
            }
            s.push('\n');
        }
        s
    }
}

impl FromStr for GridMap {
    type Err = MapError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(MapError::MissingHeader)?;
        let mut dims = header.split_whitespace().map(str::parse::<usize>);
        let (width, height) = match (dims.next(), dims.next(), dims.next()) {
            (Some(Ok(w)), Some(Ok(h)), None) => (w, h),
            _ => return Err(MapError::BadHeader(header.to_string())),
        };
        let mut truth = Vec::with_capacity(width * height);
        for row in 0..height {
            let line = lines.next().ok_or(MapError::MissingRow(row))?;
            if line.chars().count() != width {
                return Err(MapError::RowWidth {
                    row,
                    expected: width,
                    got: line.chars().count(),
                });
            }
            for ch in line.chars() {
                truth.push(match ch {
                    '.' => Occupancy::Free,
                    '#' => Occupancy::Obstacle,
                    other => return Err(MapError::BadChar { row, ch: other }),
                });
            }
        }
        if lines.any(|l| !l.is_empty()) {
            return Err(MapError::TrailingData);
        }
        GridMap::from_truth(width, height, truth)
    }
}

/// 4-connected flood fill over truth-free squares.
pub fn reachable_free_cells(map: &GridMap, seeds: &[Cell]) -> Vec<bool> {
    let mut seen = vec![false; map.len()];
    let mut stack = Vec::new();
    for &s in seeds {
        if map.in_bounds(s) && map.truth_at(s) == Occupancy::Free {
            let i = map.index(s);
            if !seen[i] {
                seen[i] = true;
                stack.push(s);
            }
        }
    }
    while let Some(c) = stack.pop() {
        for n in map.neighbors(c) {
            let i = map.index(n);
            if !seen[i] && map.truth[i] == Occupancy::Free {
                seen[i] = true;
                stack.push(n);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open(map: &GridMap) -> (impl Fn(Cell) -> bool + '_, impl Fn(Cell) -> bool + '_) {
        (
            move |c| map.in_bounds(c),
            move |c| map.truth_at(c) == Occupancy::Obstacle,
        )
    }

    #[test]
    fn heading_table() {
        for h in Heading::ALL {
            assert_eq!(h.left().right(), h);
            assert_eq!(h.reverse().reverse(), h);
            let (dc, dr) = h.delta();
            let (lc, lr) = h.left().delta();
            // left is a counter-clockwise quarter turn on screen
            assert_eq!((lc, lr), (dr, -dc));
        }
        assert_eq!(Heading::East.left(), Heading::North);
        assert_eq!(Heading::North.delta(), (0, -1));
    }

    #[test]
    fn straight_into_free_square() {
        let map = GridMap::empty(20, 20);
        let (b, o) = open(&map);
        let (s, moved) = apply_action(
            RobotState::new(Cell::new(5, 5), Heading::East),
            Action::Straight,
            b,
            o,
        );
        assert!(moved);
        assert_eq!(s, RobotState::new(Cell::new(6, 5), Heading::East));
    }

    #[test]
    fn blocked_turn_keeps_rotation() {
        let mut map = GridMap::empty(20, 20);
        map.set_truth(Cell::new(5, 4), Occupancy::Obstacle);
        let (b, o) = open(&map);
        let (s, moved) = apply_action(
            RobotState::new(Cell::new(5, 5), Heading::East),
            Action::Left,
            b,
            o,
        );
        assert!(!moved);
        assert_eq!(s, RobotState::new(Cell::new(5, 5), Heading::North));
    }

    #[test]
    fn out_of_bounds_is_blocked() {
        let map = GridMap::empty(20, 20);
        let (b, o) = open(&map);
        let (s, moved) = apply_action(
            RobotState::new(Cell::new(0, 5), Heading::West),
            Action::Straight,
            b,
            o,
        );
        assert!(!moved);
        assert_eq!(s, RobotState::new(Cell::new(0, 5), Heading::West));
    }

    #[test]
    fn mark_covered_is_idempotent() {
        let mut map = GridMap::empty(20, 20);
        map.mark_covered(Cell::new(3, 3));
        assert_eq!(map.covered_count(), 1);
        map.mark_covered(Cell::new(3, 3));
        assert_eq!(map.covered_count(), 1);
    }

    #[test]
    fn covering_everything_completes() {
        let mut map = GridMap::empty(4, 3);
        map.set_truth(Cell::new(1, 1), Occupancy::Obstacle);
        let free: Vec<Cell> = map
            .cells()
            .filter(|c| map.truth_at(*c) == Occupancy::Free)
            .collect();
        for c in free {
            assert!(!map.is_complete());
            map.mark_covered(c);
        }
        assert!(map.is_complete());
    }

    #[test]
    #[should_panic(expected = "covered")]
    fn covering_obstacle_panics() {
        let mut map = GridMap::empty(4, 4);
        map.set_truth(Cell::new(1, 1), Occupancy::Obstacle);
        map.mark_covered(Cell::new(1, 1));
    }

    #[test]
    fn flood_fill_empty_and_bisected() {
        let map = GridMap::empty(20, 20);
        let all = reachable_free_cells(&map, &[Cell::new(7, 3)]);
        assert_eq!(all.iter().filter(|b| **b).count(), 400);

        // A full-height wall has to touch the border, so build it by hand.
        let mut truth = vec![Occupancy::Free; 20 * 20];
        for row in 0..20 {
            truth[row * 20 + 10] = Occupancy::Obstacle;
        }
        let mut map = GridMap::empty(20, 20);
        for (i, o) in truth.into_iter().enumerate() {
            let c = map.cell_at(i);
            map.set_truth(c, o);
        }
        let left = reachable_free_cells(&map, &[Cell::new(2, 2)]);
        assert_eq!(left.iter().filter(|b| **b).count(), 200);
        assert!(map.cells().all(|c| left[map.index(c)] == (c.col < 10)));
    }

    #[test]
    fn map_text_roundtrip() {
        let text = "5 4\n.....\n.#.#.\n..#..\n.....\n";
        let map: GridMap = text.parse().unwrap();
        assert_eq!(map.obstacle_count(), 3);
        assert_eq!(map.to_map_text(), text);
        let again: GridMap = map.to_map_text().parse().unwrap();
        assert_eq!(again, map);
    }

    #[test]
    fn map_text_rejects_garbage() {
        assert!(matches!(
            "".parse::<GridMap>(),
            Err(MapError::MissingHeader)
        ));
        assert!(matches!(
            "3\n...\n".parse::<GridMap>(),
            Err(MapError::BadHeader(_))
        ));
        assert!(matches!(
            "3 2\n...\n".parse::<GridMap>(),
            Err(MapError::MissingRow(1))
        ));
        assert!(matches!(
            "3 1\n.x.\n".parse::<GridMap>(),
            Err(MapError::BadChar { row: 0, ch: 'x' })
        ));
        assert!(matches!(
            "3 1\n....\n".parse::<GridMap>(),
            Err(MapError::RowWidth { .. })
        ));
        assert!(matches!(
            "3 3\n...\n.#.\n..#\n".parse::<GridMap>(),
            Err(MapError::BorderObstacle(_))
        ));
    }
}
