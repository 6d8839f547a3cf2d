//! On-line Boustrophedon decomposition kept in an adjacency (Reeb) graph.
//!
//! The map starts as vertical stripes, one per robot. Within a stripe, cells
//! are built column by column from the maximal vertical runs of squares not
//! known to be obstacles. A run continues the cell of a run in the previous
//! column only when the two overlap one-to-one; anything else (a split, a
//! merge, a birth) starts a new cell. Columns where the runs of a column and
//! its left neighbour are not one-to-one are the critical (split) columns.
//!
//! Unknown squares count as open, so cells cover the squares that are still
//! possibly free and only shrink as obstacles are discovered.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::ConfigError;
use crate::grid::{Cell, GridMap, Knowledge};

/// Inclusive run of rows in one column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub top: i32,
    pub bottom: i32,
}

impl Span {
    pub fn len(self) -> usize {
        (self.bottom - self.top + 1) as usize
    }

    pub fn overlaps(self, other: Span) -> bool {
        self.top <= other.bottom && other.top <= self.bottom
    }

    pub fn contains(self, row: i32) -> bool {
        (self.top..=self.bottom).contains(&row)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellStatus {
    Unassigned,
    Assigned(usize),
    InProgress(usize),
    Complete,
}

impl CellStatus {
    pub fn holder(self) -> Option<usize> {
        match self {
            CellStatus::Assigned(r) | CellStatus::InProgress(r) => Some(r),
            _ => None,
        }
    }

    fn label(self) -> String {
        match self {
            CellStatus::Unassigned => "unassigned".into(),
            CellStatus::Assigned(r) => format!("assigned({r})"),
            CellStatus::InProgress(r) => format!("in_progress({r})"),
            CellStatus::Complete => "complete".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompCell {
    pub id: usize,
    pub stripe: usize,
    pub first_col: i32,
    /// One run per column, starting at `first_col`.
    pub spans: Vec<Span>,
    pub status: CellStatus,
    /// False once the cell was replaced; kept for history.
    pub alive: bool,
    pub replaced_by: Vec<usize>,
}

impl DecompCell {
    pub fn last_col(&self) -> i32 {
        self.first_col + self.spans.len() as i32 - 1
    }

    pub fn span_at(&self, col: i32) -> Option<Span> {
        let i = col - self.first_col;
        if i < 0 {
            return None;
        }
        self.spans.get(i as usize).copied()
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.span_at(c.col).is_some_and(|s| s.contains(c.row))
    }

    /// Member squares, column by column, top to bottom.
    pub fn squares(&self) -> impl Iterator<Item = Cell> + '_ {
        self.spans.iter().enumerate().flat_map(move |(i, s)| {
            let col = self.first_col + i as i32;
            (s.top..=s.bottom).map(move |row| Cell::new(col, row))
        })
    }

    pub fn len(&self) -> usize {
        self.spans.iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stripe {
    pub first_col: i32,
    /// Exclusive.
    pub end_col: i32,
    /// Critical columns inside this stripe, ascending.
    pub critical: Vec<i32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecompEvent {
    /// `parent` was replaced; `children` are the new cells overlapping it.
    Split { parent: usize, children: Vec<usize> },
    /// A cell kept its identity but lost squares to discovered obstacles.
    Shrunk { cell: usize },
}

#[derive(Clone, Debug)]
pub struct ReebGraph {
    width: usize,
    height: usize,
    pub stripes: Vec<Stripe>,
    pub cells: Vec<DecompCell>,
    pub edges: BTreeSet<(usize, usize)>,
    owner: Vec<Option<usize>>,
}

/// Maximal runs of squares in `col` that are not known obstacles.
pub fn column_runs(known: &GridMap, col: i32) -> Vec<Span> {
    let mut runs = Vec::new();
    let mut start = None;
    for row in 0..known.height() as i32 {
        let open = known.known_at(Cell::new(col, row)) != Knowledge::Obstacle;
        match (open, start) {
            (true, None) => start = Some(row),
            (false, Some(top)) => {
                runs.push(Span {
                    top,
                    bottom: row - 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(top) = start {
        runs.push(Span {
            top,
            bottom: known.height() as i32 - 1,
        });
    }
    runs
}

/// True when every run on each side overlaps exactly one run on the other.
fn one_to_one(prev: &[Span], cur: &[Span]) -> bool {
    prev.len() == cur.len()
        && prev
            .iter()
            .all(|p| cur.iter().filter(|c| c.overlaps(*p)).count() == 1)
        && cur
            .iter()
            .all(|c| prev.iter().filter(|p| p.overlaps(*c)).count() == 1)
}

/// Splits `width` columns into `n` stripes whose widths differ by at most one,
/// wider stripes first.
pub fn stripe_widths(width: usize, n: usize) -> Result<Vec<usize>, ConfigError> {
    if n == 0 {
        return Err(ConfigError::NoRobots);
    }
    if n > width {
        return Err(ConfigError::TooManyStripes {
            robots: n,
            columns: width,
        });
    }
    Ok((0..n)
        .map(|i| width / n + usize::from(i < width % n))
        .collect())
}

/// One stripe per robot over an unknown `width × height` map; stripe `i`
/// starts out assigned to robot `i`.
pub fn init_stripes(
    width: usize,
    height: usize,
    n_robots: usize,
) -> Result<ReebGraph, ConfigError> {
    let widths = stripe_widths(width, n_robots)?;
    let mut g = ReebGraph {
        width,
        height,
        stripes: Vec::new(),
        cells: Vec::new(),
        edges: BTreeSet::new(),
        owner: vec![None; width * height],
    };
    let mut col = 0i32;
    for (i, w) in widths.into_iter().enumerate() {
        g.stripes.push(Stripe {
            first_col: col,
            end_col: col + w as i32,
            critical: Vec::new(),
        });
        g.cells.push(DecompCell {
            id: i,
            stripe: i,
            first_col: col,
            spans: vec![
                Span {
                    top: 0,
                    bottom: height as i32 - 1
                };
                w
            ],
            status: CellStatus::Assigned(i),
            alive: true,
            replaced_by: Vec::new(),
        });
        for c in col..col + w as i32 {
            for r in 0..height as i32 {
                g.owner[r as usize * width + c as usize] = Some(i);
            }
        }
        col += w as i32;
    }
    g.rebuild_edges();
    Ok(g)
}

impl ReebGraph {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn stripe_of(&self, col: i32) -> usize {
        self.stripes
            .iter()
            .position(|s| col < s.end_col)
            .expect("column inside the map")
    }

    /// Live cell holding square `c`, if any.
    pub fn owner(&self, c: Cell) -> Option<usize> {
        if c.col < 0 || c.row < 0 || c.col >= self.width as i32 || c.row >= self.height as i32 {
            return None;
        }
        self.owner[c.row as usize * self.width + c.col as usize]
    }

    pub fn cell(&self, id: usize) -> &DecompCell {
        &self.cells[id]
    }

    pub fn alive(&self) -> impl Iterator<Item = &DecompCell> + '_ {
        self.cells.iter().filter(|c| c.alive)
    }

    pub fn set_status(&mut self, id: usize, status: CellStatus) {
        self.cells[id].status = status;
    }

    pub fn neighbours(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == id {
                Some(b)
            } else if b == id {
                Some(a)
            } else {
                None
            }
        })
    }

    /// All critical columns, ascending.
    pub fn split_columns(&self) -> Vec<i32> {
        self.stripes
            .iter()
            .flat_map(|s| s.critical.iter().copied())
            .collect()
    }

    fn rebuild_edges(&mut self) {
        self.edges.clear();
        for r in 0..self.height {
            for c in 0..self.width {
                let Some(a) = self.owner[r * self.width + c] else {
                    continue;
                };
                let right = (c + 1 < self.width)
                    .then(|| self.owner[r * self.width + c + 1])
                    .flatten();
                let below = (r + 1 < self.height)
                    .then(|| self.owner[(r + 1) * self.width + c])
                    .flatten();
                for b in [right, below].into_iter().flatten() {
                    if a != b {
                        self.edges.insert((a.min(b), a.max(b)));
                    }
                }
            }
        }
    }

    /// Cells of stripe `s` over the current knowledge, plus its critical columns.
    fn build_stripe(&self, known: &GridMap, s: usize) -> (Vec<(i32, Vec<Span>)>, Vec<i32>) {
        let stripe = &self.stripes[s];
        let mut cells: Vec<(i32, Vec<Span>)> = Vec::new();
        let mut critical = Vec::new();
        let mut prev: Vec<Span> = if stripe.first_col > 0 {
            column_runs(known, stripe.first_col - 1)
        } else {
            Vec::new()
        };
        let mut prev_cell: Vec<Option<usize>> = Vec::new();
        for col in stripe.first_col..stripe.end_col {
            let runs = column_runs(known, col);
            if col > 0 && !one_to_one(&prev, &runs) {
                critical.push(col);
            }
            let mut cur_cell = Vec::with_capacity(runs.len());
            for run in &runs {
                let continued = if col == stripe.first_col {
                    None
                } else {
                    let over: Vec<usize> = (0..prev.len())
                        .filter(|&j| prev[j].overlaps(*run))
                        .collect();
                    match over.as_slice() {
                        [j] if runs.iter().filter(|r| r.overlaps(prev[*j])).count() == 1 => {
                            prev_cell[*j]
                        }
                        _ => None,
                    }
                };
                let idx = match continued {
                    Some(k) => {
                        cells[k].1.push(*run);
                        k
                    }
                    None => {
                        cells.push((col, vec![*run]));
                        cells.len() - 1
                    }
                };
                cur_cell.push(Some(idx));
            }
            prev = runs;
            prev_cell = cur_cell;
        }
        (cells, critical)
    }

    /// Folds newly observed squares into the decomposition.
    ///
    /// Only observations of obstacles change anything. Stripes holding an
    /// obstacle's column or the column to its right are rebuilt; a rebuilt
    /// cell keeps its id (and status) when its squares equal the old cell's
    /// squares minus the new obstacles, otherwise the old cell is retired.
    pub fn update(&mut self, known: &GridMap, newly: &[Cell]) -> Vec<DecompEvent> {
        let mut dirty = BTreeSet::new();
        for c in newly
            .iter()
            .filter(|c| known.known_at(**c) == Knowledge::Obstacle)
        {
            dirty.insert(self.stripe_of(c.col));
            if c.col + 1 < self.width as i32 {
                dirty.insert(self.stripe_of(c.col + 1));
            }
        }
        let mut events = Vec::new();
        for s in dirty {
            self.rebuild_stripe(known, s, &mut events);
        }
        if !events.is_empty() {
            self.rebuild_edges();
        }
        events
    }

    fn rebuild_stripe(&mut self, known: &GridMap, s: usize, events: &mut Vec<DecompEvent>) {
        let (built, critical) = self.build_stripe(known, s);
        self.stripes[s].critical = critical;
        let old: Vec<usize> = self
            .cells
            .iter()
            .filter(|c| c.alive && c.stripe == s)
            .map(|c| c.id)
            .collect();

        let open = |c: Cell| known.known_at(c) != Knowledge::Obstacle;
        let mut kept = BTreeSet::new();
        let mut new_ids = Vec::with_capacity(built.len());
        for (first_col, spans) in built {
            let candidate = DecompCell {
                id: usize::MAX,
                stripe: s,
                first_col,
                spans,
                status: CellStatus::Unassigned,
                alive: true,
                replaced_by: Vec::new(),
            };
            let same = old.iter().copied().find(|&o| {
                !kept.contains(&o) && {
                    let oc = &self.cells[o];
                    oc.squares().filter(|q| open(*q)).eq(candidate.squares())
                }
            });
            match same {
                Some(o) => {
                    kept.insert(o);
                    if self.cells[o].spans != candidate.spans
                        || self.cells[o].first_col != candidate.first_col
                    {
                        self.cells[o].first_col = candidate.first_col;
                        self.cells[o].spans = candidate.spans;
                        events.push(DecompEvent::Shrunk { cell: o });
                    }
                    new_ids.push(o);
                }
                None => {
                    let id = self.cells.len();
                    self.cells.push(DecompCell { id, ..candidate });
                    new_ids.push(id);
                }
            }
        }
        for &o in &old {
            if kept.contains(&o) {
                continue;
            }
            let children: Vec<usize> = new_ids
                .iter()
                .copied()
                .filter(|&n| {
                    !kept.contains(&n) && self.cells[n].squares().any(|q| self.cells[o].contains(q))
                })
                .collect();
            self.cells[o].alive = false;
            self.cells[o].replaced_by = children.clone();
            events.push(DecompEvent::Split {
                parent: o,
                children,
            });
        }
        // ownership of the stripe's columns
        let stripe = self.stripes[s].clone();
        for col in stripe.first_col..stripe.end_col {
            for row in 0..self.height as i32 {
                self.owner[row as usize * self.width + col as usize] = None;
            }
        }
        for &id in &new_ids {
            let squares: Vec<Cell> = self.cells[id].squares().collect();
            for q in squares {
                self.owner[q.row as usize * self.width + q.col as usize] = Some(id);
            }
        }
    }

    /// Deterministic text form: stripes, split columns, cells, edges.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let stripes: Vec<String> = self
            .stripes
            .iter()
            .map(|s| format!("{}..{}", s.first_col, s.end_col))
            .collect();
        let _ = writeln!(out, "stripes {}", stripes.join(" "));
        let split: Vec<String> = self.split_columns().iter().map(i32::to_string).collect();
        let _ = writeln!(out, "split {}", split.join(" ").trim_end());
        for c in &self.cells {
            let spans: Vec<String> = c
                .spans
                .iter()
                .enumerate()
                .map(|(i, s)| format!("{}:{}-{}", c.first_col + i as i32, s.top, s.bottom))
                .collect();
            let _ = write!(
                out,
                "cell {} stripe {} {} ",
                c.id,
                c.stripe,
                c.status.label()
            );
            if c.alive {
                let _ = writeln!(out, "spans {}", spans.join(" "));
            } else {
                let by: Vec<String> = c.replaced_by.iter().map(usize::to_string).collect();
                let _ = writeln!(out, "replaced_by {}", by.join(" "));
            }
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "edge {a} {b}");
        }
        out
    }
}

/// Free-function form of [`ReebGraph::update`].
pub fn update_decomposition(
    graph: &mut ReebGraph,
    known: &GridMap,
    newly: &[Cell],
) -> Vec<DecompEvent> {
    graph.update(known, newly)
}
