//! Per-epoch trace files and their replay.
//!
//! ```text
//! covergrid-trace v1
//! robots <n>
//! <map file: `W H` header and rows>
//! 0 - <col,row,H> ...            # start poses
//! <epoch> <actions> <col,row,H> ...
//! ```
//!
//! `<actions>` is one letter per robot (`S`, `L`, `R`); poses are the
//! states after the epoch's moves were resolved.

use thiserror::Error;

use crate::grid::{reachable_free_cells, Action, Cell, GridMap, Heading, RobotState};

use super::engine::resolve_moves;
use super::TurnCount;

const MAGIC: &str = "covergrid-trace v1";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(
        "epoch {epoch}: robot {robot} recorded at {recorded} but the motion model gives {replayed}"
    )]
    Diverged {
        epoch: u64,
        robot: usize,
        recorded: RobotState,
        replayed: RobotState,
    },
}

pub struct TraceWriter {
    out: String,
}

fn poses(robots: &[RobotState]) -> String {
    robots
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

impl TraceWriter {
    pub fn new(map: &GridMap, robots: &[RobotState]) -> Self {
        let mut out = format!("{MAGIC}\nrobots {}\n", robots.len());
        out.push_str(&map.to_map_text());
        out.push_str(&format!("0 - {}\n", poses(robots)));
        TraceWriter { out }
    }

    pub fn epoch(&mut self, epoch: u64, actions: &[Action], robots: &[RobotState]) {
        let letters: String = actions.iter().map(|a| a.letter()).collect();
        self.out
            .push_str(&format!("{epoch} {letters} {}\n", poses(robots)));
    }

    pub fn text(&self) -> String {
        self.out.clone()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplaySummary {
    pub robots: usize,
    pub epochs: u64,
    pub covered: usize,
    pub target: usize,
    pub complete: bool,
    pub turns: Vec<TurnCount>,
}

fn parse_pose(tok: &str, line: usize) -> Result<RobotState, TraceError> {
    let err = || TraceError::Parse {
        line,
        msg: format!("bad pose {tok:?}"),
    };
    let mut parts = tok.split(',');
    let col = parts.next().and_then(|s| s.parse().ok()).ok_or_else(err)?;
    let row = parts.next().and_then(|s| s.parse().ok()).ok_or_else(err)?;
    let h = parts
        .next()
        .and_then(|s| s.chars().next())
        .and_then(Heading::from_letter)
        .ok_or_else(err)?;
    if parts.next().is_some() {
        return Err(err());
    }
    Ok(RobotState::new(Cell::new(col, row), h))
}

/// Re-applies every recorded epoch through the motion model and checks the
/// recorded poses.
pub fn replay(text: &str) -> Result<ReplaySummary, TraceError> {
    let lines: Vec<&str> = text.lines().collect();
    let perr = |line: usize, msg: &str| TraceError::Parse {
        line: line + 1,
        msg: msg.to_string(),
    };
    if lines.first() != Some(&MAGIC) {
        return Err(perr(0, "missing trace header"));
    }
    let n: usize = lines
        .get(1)
        .and_then(|l| l.strip_prefix("robots "))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| perr(1, "expected `robots N`"))?;
    let header = lines.get(2).ok_or_else(|| perr(2, "missing map"))?;
    let height: usize = header
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| perr(2, "bad map header"))?;
    let map_end = 3 + height;
    if lines.len() < map_end + 1 {
        return Err(perr(lines.len(), "truncated trace"));
    }
    let map_text = lines[2..map_end].join("\n") + "\n";
    let mut map: GridMap = map_text
        .parse()
        .map_err(|e: crate::error::MapError| perr(2, &e.to_string()))?;

    let parse_line = |idx: usize| -> Result<(u64, String, Vec<RobotState>), TraceError> {
        let mut toks = lines[idx].split_whitespace();
        let epoch = toks
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| perr(idx, "bad epoch"))?;
        let acts = toks
            .next()
            .ok_or_else(|| perr(idx, "missing actions"))?
            .to_string();
        let states = toks
            .map(|t| parse_pose(t, idx + 1))
            .collect::<Result<Vec<_>, _>>()?;
        if states.len() != n {
            return Err(perr(idx, "wrong number of poses"));
        }
        Ok((epoch, acts, states))
    };

    let (_, _, mut robots) = parse_line(map_end)?;
    let starts: Vec<Cell> = robots.iter().map(|r| r.pos).collect();
    let target = reachable_free_cells(&map, &starts);
    for r in &robots {
        map.mark_covered(r.pos);
    }
    let mut turns = vec![TurnCount::default(); n];
    let mut epochs = 0;
    for idx in map_end + 1..lines.len() {
        if lines[idx].trim().is_empty() {
            continue;
        }
        let (epoch, acts, recorded) = parse_line(idx)?;
        let actions = acts
            .chars()
            .map(Action::from_letter)
            .collect::<Option<Vec<_>>>()
            .filter(|a| a.len() == n)
            .ok_or_else(|| perr(idx, "bad action string"))?;
        let resolved = resolve_moves(&map, &robots, &actions);
        for (i, ((next, moved), rec)) in resolved.into_iter().zip(&recorded).enumerate() {
            if next != *rec {
                return Err(TraceError::Diverged {
                    epoch,
                    robot: i,
                    recorded: *rec,
                    replayed: next,
                });
            }
            if moved {
                map.mark_covered(next.pos);
            }
            match actions[i] {
                Action::Left => turns[i].left += 1,
                Action::Right => turns[i].right += 1,
                Action::Straight => {}
            }
        }
        robots = recorded;
        epochs = epoch;
    }
    let target_count = target.iter().filter(|t| **t).count();
    let covered = map
        .cells()
        .filter(|c| target[map.index(*c)] && map.is_covered(*c))
        .count();
    Ok(ReplaySummary {
        robots: n,
        epochs,
        covered,
        target: target_count,
        complete: covered == target_count,
        turns,
    })
}
