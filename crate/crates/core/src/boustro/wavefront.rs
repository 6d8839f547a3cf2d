//! Wavefront (breadth-first) distance fields and paths.

use std::collections::VecDeque;

use crate::grid::{Action, Cell, GridMap, Heading, Knowledge, RobotState};

pub const UNREACHED: u32 = u32::MAX;

/// Breadth-first wave from `sources` over squares where `passable` holds.
/// Sources are always seeded, passable or not.
pub fn wave(
    map: &GridMap,
    sources: impl IntoIterator<Item = Cell>,
    passable: impl Fn(Cell) -> bool,
) -> Vec<u32> {
    let mut dist = vec![UNREACHED; map.len()];
    let mut queue = VecDeque::new();
    for s in sources {
        if map.in_bounds(s) && dist[map.index(s)] == UNREACHED {
            dist[map.index(s)] = 0;
            queue.push_back(s);
        }
    }
    while let Some(c) = queue.pop_front() {
        let d = dist[map.index(c)];
        for h in Heading::ALL {
            let n = c.step(h);
            if map.in_bounds(n) && dist[map.index(n)] == UNREACHED && passable(n) {
                dist[map.index(n)] = d + 1;
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Heading change a move implies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Turn {
    None,
    Left,
    Right,
    Reverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Move {
    pub to: Cell,
    pub heading: Heading,
    pub turn: Turn,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WavePath {
    pub found: bool,
    pub moves: Vec<Move>,
}

impl WavePath {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.moves.iter().map(|m| m.to)
    }
}

/// Shortest 4-connected path over known-free squares from `from` to `to`.
/// The wave expands from `to`; the path descends it from `from`, breaking
/// ties in N, E, S, W order. `heading` is the robot's heading at `from`.
pub fn wavefront_path(known: &GridMap, from: Cell, heading: Heading, to: Cell) -> WavePath {
    wavefront_path_over(known, from, heading, to, |c| {
        known.known_at(c) == Knowledge::Free
    })
}

pub fn wavefront_path_over(
    map: &GridMap,
    from: Cell,
    heading: Heading,
    to: Cell,
    passable: impl Fn(Cell) -> bool,
) -> WavePath {
    let dist = wave(map, [to], &passable);
    if !map.in_bounds(from) || dist[map.index(from)] == UNREACHED {
        return WavePath {
            found: false,
            moves: Vec::new(),
        };
    }
    let mut moves = Vec::new();
    let mut cur = from;
    let mut h = heading;
    while cur != to {
        let d = dist[map.index(cur)];
        let (next_h, next) = Heading::ALL
            .into_iter()
            .map(|nh| (nh, cur.step(nh)))
            .find(|(_, n)| map.in_bounds(*n) && dist[map.index(*n)] == d - 1)
            .expect("wave descends by one each step");
        let turn = if next_h == h {
            Turn::None
        } else if next_h == h.left() {
            Turn::Left
        } else if next_h == h.right() {
            Turn::Right
        } else {
            Turn::Reverse
        };
        moves.push(Move {
            to: next,
            heading: next_h,
            turn,
        });
        cur = next;
        h = next_h;
    }
    WavePath { found: true, moves }
}

/// One action that follows the distance field `dist` downhill.
///
/// `open` says where the robot may go; `blocked` says where a move would be
/// refused by the motion model (so turning toward it rotates in place).
/// Prefers a move into an open square that lowers the distance
/// (`Straight < Left < Right` on ties). When the only way down is behind,
/// rotates toward a blocked side, else steps to the cheaper open side.
pub fn steer(
    map: &GridMap,
    state: RobotState,
    dist: &[u32],
    open: impl Fn(Cell) -> bool,
    blocked: impl Fn(Cell) -> bool,
) -> Option<Action> {
    let here = dist[map.index(state.pos)];
    if here == UNREACHED || here == 0 {
        return None;
    }
    let target = |a: Action| state.pos.step(state.heading.turned(a));
    let mut best: Option<(Action, u32)> = None;
    for a in Action::ALL {
        let t = target(a);
        if map.in_bounds(t) && open(t) {
            let d = dist[map.index(t)];
            if d < here && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((a, d));
            }
        }
    }
    if let Some((a, _)) = best {
        return Some(a);
    }
    let wall = |a: Action| !map.in_bounds(target(a)) || blocked(target(a));
    if wall(Action::Left) {
        return Some(Action::Left);
    }
    if wall(Action::Right) {
        return Some(Action::Right);
    }
    let side = |a: Action| {
        let t = target(a);
        (map.in_bounds(t) && open(t)).then(|| dist[map.index(t)])
    };
    Some(match (side(Action::Left), side(Action::Right)) {
        (Some(l), Some(r)) if r < l => Action::Right,
        (None, Some(_)) => Action::Right,
        _ => Action::Left,
    })
}
