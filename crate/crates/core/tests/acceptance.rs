//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero on any
//! FAIL outside `KNOWN_RED`, or on any FAIL at all with `ACCEPTANCE_STRICT=1`.
//!
//! `ACCEPTANCE_ONLY=2,3` restricts the run to the listed criteria.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use covergrid::boustro::decomp::{init_stripes, ReebGraph};
use covergrid::boustro::wavefront::wavefront_path;
use covergrid::experiments::{map_seed, run_plan, ExperimentPlan, MapSet};
use covergrid::grid::{Action, Cell, GridMap, Heading, Knowledge, Occupancy, RobotState};
use covergrid::mapgen::{generate, MapGenConfig};
use covergrid::mcts::{
    coverage_value, evaluate, uct_score, Backup, MctsConfig, MctsPlanner, SearchTree, StepFlags,
    TurnPenaltyMode,
};
use covergrid::sim::{run, PlannerKind, SimConfig, Snapshot, TrialRecord};

/// Iterations per decision for the desk-scale trend runs (criteria 2-5).
const DESK_ITERS: u32 = 200;
const DESK_MAPS: usize = 5;
const DESK_TRIALS: usize = 5;
const BASE_SEED: u64 = 2024;

/// Criteria this implementation does not meet. They still print FAIL with
/// their measurements; the README explains each one.
const KNOWN_RED: [u32; 3] = [3, 5, 9];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn desk_plan(plan: ExperimentPlan) -> (ExperimentPlan, Vec<TrialRecord>) {
    let mut plan = plan.scaled(DESK_MAPS, DESK_TRIALS);
    plan.mcts.iterations = DESK_ITERS;
    let maps = MapSet::generate_for(&plan).expect("maps generate");
    let records = run_plan(&plan, &maps).expect("plan runs");
    (plan, records)
}

fn med_by(
    records: &[TrialRecord],
    keep: impl Fn(&TrialRecord) -> bool,
    metric: impl Fn(&TrialRecord) -> f64,
) -> f64 {
    median(records.iter().filter(|r| keep(r)).map(metric).collect())
}

// ---------------------------------------------------------------- 1

fn completeness() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut epochs = [Vec::new(), Vec::new()];
    for i in 0..20 {
        let map = generate(&MapGenConfig::standard(0.10, map_seed(BASE_SEED, 0.10, i)))
            .expect("map")
            .map;
        for (k, planner) in [PlannerKind::Mcts, PlannerKind::Boustrophedon]
            .into_iter()
            .enumerate()
        {
            let config = SimConfig {
                planner,
                robots: 3,
                seed: BASE_SEED + i as u64,
                ..SimConfig::default()
            };
            let rec = run(&config, &map).expect("trial runs");
            if rec.is_timeout() || rec.covered != rec.target {
                failures.push(format!("{} map {i}", planner.label()));
            }
            epochs[k].push(rec.epochs as f64);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "20 maps x 2 planners, 3 robots, {} iterations: {} incomplete; median epochs mcts {} boustro {}; {secs:.0} s",
        MctsConfig::default().iterations,
        failures.len(),
        median(epochs[0].clone()),
        median(epochs[1].clone()),
    );
    check(failures.is_empty() && secs < 300.0, detail)
}

// ---------------------------------------------------------------- 2, 3

fn robot_sweep() -> (Outcome, Outcome) {
    let counts = [1, 2, 4, 8];
    let (_, recs) = desk_plan(ExperimentPlan::robot_sweep(&counts, BASE_SEED));
    let timeouts = recs.iter().filter(|r| r.is_timeout()).count();
    let med = |planner: &str, placement: &str, n: usize| {
        med_by(
            &recs,
            |r| r.planner == planner && r.placement == placement && r.robots == n,
            |r| r.completion_time_s,
        )
    };
    let mut ok2 = timeouts == 0;
    let mut parts = Vec::new();
    for planner in ["mcts", "boustro"] {
        let m: Vec<f64> = counts.iter().map(|&n| med(planner, "wall", n)).collect();
        let decreasing = m.windows(2).all(|w| w[1] < w[0]);
        let flattening = (m[2] - m[3]) < (m[0] - m[1]);
        ok2 &= decreasing && flattening;
        parts.push(format!("{planner} {:?}", m));
    }
    let c2 = check(
        ok2,
        format!(
            "median time (s) at 1/2/4/8 robots: {}; timeouts {timeouts}",
            parts.join(", ")
        ),
    );

    let mut ok3 = true;
    let mut parts = Vec::new();
    for n in [4, 8] {
        let (random, wall) = (med("mcts", "random", n), med("mcts", "wall", n));
        ok3 &= random <= wall;
        parts.push(format!("{n} robots random {random} vs wall {wall}"));
    }
    (c2, check(ok3, parts.join("; ")))
}

// ---------------------------------------------------------------- 4

fn density_sweep() -> Outcome {
    let (_, recs) = desk_plan(ExperimentPlan::fig4(BASE_SEED));
    let timeouts = recs.iter().filter(|r| r.is_timeout()).count();
    let mut ok = timeouts == 0;
    let mut parts = Vec::new();
    for planner in ["mcts", "boustro"] {
        let at = |d: f64| {
            med_by(
                &recs,
                |r| r.planner == planner && r.density.is_some_and(|x| (x - d).abs() < 1e-9),
                |r| r.completion_time_s,
            )
        };
        let (lo, hi) = (at(0.05), at(0.20));
        ok &= hi <= 1.5 * lo;
        parts.push(format!("{planner} 5% {lo} 20% {hi} ratio {:.3}", hi / lo));
    }
    check(ok, format!("{}; timeouts {timeouts}", parts.join(", ")))
}

// ---------------------------------------------------------------- 5

fn turn_costs() -> Outcome {
    let (_, recs) = desk_plan(ExperimentPlan::fig5(BASE_SEED));
    let timeouts = recs.iter().filter(|r| r.is_timeout()).count();
    let mode = |m: TurnPenaltyMode| {
        let left = med_by(&recs, |r| r.turn_mode == m, |r| f64::from(r.total_left));
        let right = med_by(&recs, |r| r.turn_mode == m, |r| f64::from(r.total_right));
        let time = med_by(&recs, |r| r.turn_mode == m, |r| r.completion_time_s);
        (left, right, time)
    };
    let base = mode(TurnPenaltyMode::None);
    let left = mode(TurnPenaltyMode::LeftOnly);
    let right = mode(TurnPenaltyMode::RightOnly);
    let both = mode(TurnPenaltyMode::Both);
    let a = left.0 < base.0 && left.1 >= base.1;
    let b = right.1 < base.1 && right.0 >= base.0;
    let c = both.0 < base.0 && both.1 < base.1;
    let d = base.2 <= left.2 && base.2 <= right.2 && base.2 <= both.2;
    let show = |(l, r, t): (f64, f64, f64)| format!("L{l} R{r} t{t}");
    check(
        a && b && c && d && timeouts == 0,
        format!(
            "(a){a} (b){b} (c){c} (d){d}; baseline {} left {} right {} both {}; timeouts {timeouts}",
            show(base),
            show(left),
            show(right),
            show(both)
        ),
    )
}

// ---------------------------------------------------------------- 6, 7

fn uct_examples() -> Outcome {
    let a = uct_score(0.5, 10, 2, 1.0);
    let b = uct_score(0.3, 7, 0, 1.0);
    let c = uct_score(0.7, 1, 1, 1.0);
    let want_a = 0.5 + 2.0 * (2.0 * 10f64.ln() / 2.0).sqrt();
    let ok = (a - 3.534854).abs() < 1e-5
        && (a - want_a).abs() < 1e-12
        && b == f64::INFINITY
        && (c - 0.7).abs() < 1e-5;
    check(
        ok,
        format!("uct(0.5,10,2)={a:.6}, unvisited={b}, uct(0.7,1,1)={c}"),
    )
}

fn flags(p: &[u8], q: &[u8], r: &[u8]) -> Vec<StepFlags> {
    (0..p.len())
        .map(|k| StepFlags {
            covered: p[k] == 1,
            hit: q[k] == 1,
            turned: r[k] == 1,
        })
        .collect()
}

fn evaluate_examples() -> Outcome {
    let cases: [(Vec<StepFlags>, f64, f64, f64); 5] = [
        (flags(&[0, 0, 0], &[0, 0, 0], &[0, 0, 0]), 2.0, 0.0, 0.0),
        (flags(&[1], &[0], &[1]), 2.0, 0.1, 0.4),
        (flags(&[0], &[1], &[0]), 2.0, 0.0, -2.0 / 2.25),
        (
            flags(&[1, 1], &[0, 0], &[0, 0]),
            2.0,
            0.0,
            1.0 / 2.25 + 0.25,
        ),
        (flags(&[1, 0], &[0, 1], &[0, 0]), 2.0, 0.0, 1.0 / 2.25 - 0.5),
    ];
    let mut worst: f64 = 0.0;
    for (f, c_hit, c_turn, want) in &cases {
        worst = worst.max((evaluate(f, *c_hit, *c_turn) - want).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut identical = true;
    for _ in 0..1000 {
        let t = rng.gen_range(1..40);
        let f: Vec<StepFlags> = (0..t)
            .map(|_| StepFlags {
                covered: rng.gen(),
                hit: rng.gen(),
                turned: rng.gen(),
            })
            .collect();
        let c_hit = rng.gen_range(0.0..4.0);
        identical &= evaluate(&f, c_hit, 0.0).to_bits() == coverage_value(&f, c_hit).to_bits();
    }
    check(
        worst < 1e-9 && identical,
        format!("max error {worst:.1e} over {} examples; c_turn=0 bit-identical on 1000 random flag sets: {identical}", cases.len()),
    )
}

// ---------------------------------------------------------------- 8

fn tree_invariants() -> Outcome {
    let map = generate(&MapGenConfig::standard(0.10, 11))
        .expect("map")
        .map;
    let mut known = map.clone();
    known.reset_belief();
    let robots = [
        RobotState::new(Cell::new(3, 0), Heading::South),
        RobotState::new(Cell::new(10, 0), Heading::South),
        RobotState::new(Cell::new(16, 0), Heading::South),
    ];
    for r in &robots {
        known.reveal(r.pos, Occupancy::Free);
        known.mark_covered(r.pos);
    }
    let paths = vec![
        Vec::new(),
        vec![Action::Straight; 5],
        vec![Action::Left, Action::Straight],
    ];
    let snap = Snapshot {
        map: &known,
        robots: &robots,
        paths: &paths,
        epoch: 0,
    };
    let mut planner = MctsPlanner::new(0, MctsConfig::default(), 5).expect("planner");
    let mut tree = SearchTree::new(robots[0], 30);
    let mut violation = None;
    for it in 1..=10_000u32 {
        planner.iterate(&mut tree, &snap);
        if tree.root().visits != it {
            violation = Some(format!(
                "root visits {} after {it} iterations",
                tree.root().visits
            ));
        }
        for (id, node) in tree.nodes() {
            let kids: Vec<_> = node.child_ids().map(|c| tree.node(c)).collect();
            if kids.is_empty() {
                continue;
            }
            let sum: u32 = kids.iter().map(|k| k.visits).sum();
            if node.visits < sum {
                violation = Some(format!("node {id} visits {} < children {sum}", node.visits));
            }
            let unvisited = kids.iter().any(|k| k.visits == 0) || node.has_untried();
            if unvisited && kids.iter().any(|k| k.visits >= 2) {
                violation = Some(format!(
                    "node {id} revisits a child while a sibling is unvisited"
                ));
            }
            let mean = kids.iter().map(|k| k.value).sum::<f64>() / kids.len() as f64;
            if (node.value - mean).abs() > 1e-9 {
                violation = Some(format!(
                    "node {id} value {} vs child mean {mean}",
                    node.value
                ));
            }
        }
        if let Some(v) = violation {
            return Err(format!("iteration {it}: {v}"));
        }
    }
    Ok(format!(
        "10000 iterations, {} nodes, every check held at every iteration",
        tree.len()
    ))
}

// ---------------------------------------------------------------- 9

/// Motion model written out independently of the library.
fn oracle_value(map: &GridMap, start: RobotState, seq: &[Action]) -> f64 {
    let (mut pos, mut h) = ((start.pos.col, start.pos.row), start.heading);
    let mut seen: BTreeSet<(i32, i32)> = BTreeSet::new();
    let mut x = 0.0;
    for (k, a) in seq.iter().enumerate() {
        h = match a {
            Action::Straight => h,
            Action::Left => match h {
                Heading::North => Heading::West,
                Heading::West => Heading::South,
                Heading::South => Heading::East,
                Heading::East => Heading::North,
            },
            Action::Right => match h {
                Heading::North => Heading::East,
                Heading::East => Heading::South,
                Heading::South => Heading::West,
                Heading::West => Heading::North,
            },
        };
        let (dc, dr) = match h {
            Heading::North => (0, -1),
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
        };
        let next = (pos.0 + dc, pos.1 + dr);
        let inside = next.0 >= 0
            && next.1 >= 0
            && (next.0 as usize) < map.width()
            && (next.1 as usize) < map.height();
        let free = inside && map.known_at(Cell::new(next.0, next.1)) != Knowledge::Obstacle;
        let t = 0.5 * (k + 1) as f64;
        let w = 1.0 / ((1.0 + t) * (1.0 + t));
        if free {
            pos = next;
            if !map.is_covered(Cell::new(next.0, next.1)) && seen.insert(next) {
                x += w;
            }
        } else {
            x -= 2.0 * w;
        }
    }
    x
}

fn oracle_snapshot(seed: u64) -> (GridMap, RobotState) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = generate(&MapGenConfig {
        width: 5,
        height: 5,
        density: 0.25,
        seed,
    })
    .expect("map")
    .map;
    map.reveal_all();
    let free: Vec<Cell> = map
        .cells()
        .filter(|c| map.truth_at(*c) == Occupancy::Free)
        .collect();
    for c in &free {
        if rng.gen_bool(0.4) {
            map.mark_covered(*c);
        }
    }
    let pos = free[rng.gen_range(0..free.len())];
    map.mark_covered(pos);
    (map, RobotState::new(pos, Heading::ALL[rng.gen_range(0..4)]))
}

fn small_oracle(backup: Backup) -> (usize, Vec<String>) {
    let mut hits = 0;
    let mut notes = Vec::new();
    for s in 0..10u64 {
        let (map, state) = oracle_snapshot(1000 + s);
        let mut best = f64::NEG_INFINITY;
        let mut by_first = [f64::NEG_INFINITY; 3];
        // value each first action gets once the full depth-3 tree is averaged bottom-up
        let mut mean_first = [0.0; 3];
        for a in Action::ALL {
            for b in Action::ALL {
                for c in Action::ALL {
                    let v = oracle_value(&map, state, &[a, b, c]);
                    by_first[a.index()] = by_first[a.index()].max(v);
                    mean_first[a.index()] += v / 9.0;
                    best = best.max(v);
                }
            }
        }
        let mean_pick = (0..3).fold(0, |m, i| {
            if mean_first[i] > mean_first[m] + 1e-12 {
                i
            } else {
                m
            }
        });
        let config = MctsConfig {
            horizon: 3,
            iterations: 50_000,
            backup,
            fallback: false,
            ..MctsConfig::default()
        };
        let mut planner = MctsPlanner::new(0, config, s).expect("planner");
        let robots = [state];
        let paths = vec![Vec::new()];
        let snap = Snapshot {
            map: &map,
            robots: &robots,
            paths: &paths,
            epoch: 0,
        };
        let d = planner.decide(&snap).expect("decide");
        if (by_first[d.action.index()] - best).abs() < 1e-9 {
            hits += 1;
        } else {
            notes.push(format!(
                "snapshot {s}: chose {} (best {:.4}) vs optimum {best:.4}, averaged-tree argmax {}",
                d.action.letter(),
                by_first[d.action.index()],
                Action::ALL[mean_pick].letter()
            ));
        }
    }
    (hits, notes)
}

fn oracle_optimum() -> Outcome {
    let (hits, notes) = small_oracle(Backup::ChildMean);
    let (weighted, _) = small_oracle(Backup::VisitWeighted);
    let detail = format!(
        "{hits}/10 snapshots optimal (visit-weighted backup: {weighted}/10){}{}",
        if notes.is_empty() { "" } else { "; " },
        notes.join("; ")
    );
    check(hits == 10, detail)
}

// ---------------------------------------------------------------- 10

fn bfs_len(map: &GridMap, from: Cell, to: Cell) -> Option<usize> {
    let w = map.width() as i32;
    let h = map.height() as i32;
    let mut dist: HashMap<(i32, i32), usize> = HashMap::new();
    let mut q = VecDeque::from([(from.col, from.row)]);
    dist.insert((from.col, from.row), 0);
    while let Some((c, r)) = q.pop_front() {
        let d = dist[&(c, r)];
        if (c, r) == (to.col, to.row) {
            return Some(d);
        }
        for (dc, dr) in [(0, -1), (1, 0), (0, 1), (-1, 0)] {
            let n = (c + dc, r + dr);
            if n.0 < 0 || n.1 < 0 || n.0 >= w || n.1 >= h || dist.contains_key(&n) {
                continue;
            }
            if map.known_at(Cell::new(n.0, n.1)) == Knowledge::Free {
                dist.insert(n, d + 1);
                q.push_back(n);
            }
        }
    }
    None
}

fn wavefront_vs_bfs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut mismatches = 0;
    let mut unreachable = 0;
    for m in 0..100u64 {
        let density = [0.05, 0.10, 0.20, 0.30][m as usize % 4];
        let mut map = generate(&MapGenConfig::standard(density, 500 + m))
            .expect("map")
            .map;
        map.reveal_all();
        // some knowledge gaps make a few pairs unreachable
        for _ in 0..rng.gen_range(0..30) {
            let c = Cell::new(rng.gen_range(0..20), rng.gen_range(0..20));
            if map.truth_at(c) == Occupancy::Free {
                map.set_truth(c, Occupancy::Obstacle);
                map.reveal(c, Occupancy::Obstacle);
            }
        }
        let free: Vec<Cell> = map
            .cells()
            .filter(|c| map.known_at(*c) == Knowledge::Free)
            .collect();
        for _ in 0..10 {
            let a = free[rng.gen_range(0..free.len())];
            let b = free[rng.gen_range(0..free.len())];
            let path = wavefront_path(&map, a, Heading::ALL[rng.gen_range(0..4)], b);
            let got = path.found.then_some(path.len());
            let want = bfs_len(&map, a, b);
            unreachable += usize::from(want.is_none());
            let valid = !path.found
                || path
                    .moves
                    .iter()
                    .fold((a, true), |(p, ok), mv| {
                        (
                            mv.to,
                            ok && p.manhattan(mv.to) == 1 && map.known_at(mv.to) == Knowledge::Free,
                        )
                    })
                    .1
                    && path.moves.last().map_or(a, |m| m.to) == b;
            if got != want || !valid {
                mismatches += 1;
            }
        }
    }
    check(
        mismatches == 0,
        format!("100 maps x 10 pairs: {mismatches} mismatches ({unreachable} pairs unreachable)"),
    )
}

// ---------------------------------------------------------------- 11

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let n = parent[y];
        parent[y] = r;
        y = n;
    }
    r
}

/// Columns `c` where the free squares of columns `c-1` and `c` do not pair
/// up run for run, from a union-find over each two-column strip.
fn offline_split_columns(map: &GridMap) -> Vec<i32> {
    let (w, h) = (map.width() as i32, map.height() as i32);
    let free = |c: i32, r: i32| map.truth_at(Cell::new(c, r)) == Occupancy::Free;
    let mut out = Vec::new();
    for c in 1..w {
        let idx = |cc: i32, r: i32| ((cc - (c - 1)) * h + r) as usize;
        let mut parent: Vec<usize> = (0..(2 * h) as usize).collect();
        for cc in [c - 1, c] {
            for r in 0..h {
                if !free(cc, r) {
                    continue;
                }
                if r + 1 < h && free(cc, r + 1) {
                    let (a, b) = (
                        find(&mut parent, idx(cc, r)),
                        find(&mut parent, idx(cc, r + 1)),
                    );
                    parent[a] = b;
                }
                if cc == c - 1 && free(c, r) {
                    let (a, b) = (find(&mut parent, idx(cc, r)), find(&mut parent, idx(c, r)));
                    parent[a] = b;
                }
            }
        }
        // runs per component and column
        let mut runs: HashMap<usize, [usize; 2]> = HashMap::new();
        for (k, cc) in [c - 1, c].into_iter().enumerate() {
            for r in 0..h {
                if free(cc, r) && (r == 0 || !free(cc, r - 1)) {
                    let root = find(&mut parent, idx(cc, r));
                    runs.entry(root).or_default()[k] += 1;
                }
            }
        }
        if runs.values().any(|n| *n != [1, 1]) {
            out.push(c);
        }
    }
    out
}

fn partition_ok(g: &ReebGraph, known: &GridMap) -> bool {
    let mut count = vec![0u32; known.len()];
    for cell in g.alive() {
        for q in cell.squares() {
            count[known.index(q)] += 1;
        }
    }
    known.cells().all(|c| {
        let n = count[known.index(c)];
        if known.known_at(c) == Knowledge::Obstacle {
            n == 0
        } else {
            n == 1
        }
    })
}

fn decomposition_convergence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bad = Vec::new();
    let mut total_splits = 0;
    for m in 0..20u64 {
        let density = [0.05, 0.10, 0.15, 0.20][m as usize % 4];
        let truth = generate(&MapGenConfig::standard(density, 900 + m))
            .expect("map")
            .map;
        let robots = 1 + (m as usize % 4);
        let mut g = init_stripes(20, 20, robots).expect("stripes");
        let mut known = truth.clone();
        known.reset_belief();
        let mut order: Vec<Cell> = truth.cells().collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let mut partitioned = true;
        for chunk in order.chunks(rng.gen_range(5..40)) {
            for c in chunk {
                known.reveal(*c, truth.truth_at(*c));
            }
            g.update(&known, chunk);
            partitioned &= partition_ok(&g, &known);
        }
        let online = g.split_columns();
        let offline = offline_split_columns(&truth);
        total_splits += offline.len();
        if online != offline || !partitioned {
            bad.push(format!(
                "map {m}: online {online:?} offline {offline:?} partition {partitioned}"
            ));
        }
    }
    check(
        bad.is_empty(),
        format!(
            "20 maps, {total_splits} split columns in total; mismatches: {}",
            if bad.is_empty() {
                "none".into()
            } else {
                bad.join("; ")
            }
        ),
    )
}

// ---------------------------------------------------------------- 12

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_covergrid");
    let runs: [&[&str]; 3] = [
        &[
            "run",
            "--planner",
            "mcts",
            "--robots",
            "3",
            "--seed",
            "31",
            "--iters",
            "150",
        ],
        &[
            "run",
            "--planner",
            "boustro",
            "--robots",
            "4",
            "--seed",
            "31",
            "--density",
            "0.15",
        ],
        &[
            "run",
            "--planner",
            "mcts",
            "--robots",
            "2",
            "--seed",
            "5",
            "--placement",
            "random",
            "--iters",
            "100",
            "--turn-mode",
            "left",
            "--c-turn",
            "0.5",
        ],
    ];
    let mut mismatched = Vec::new();
    for args in runs {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "1"] {
            let out = Command::new(bin)
                .args(args)
                .env("COVERGRID_THREADS", threads)
                .output()
                .expect("binary runs");
            if !out.status.success() {
                return Err(format!(
                    "`{}` failed: {}",
                    args.join(" "),
                    String::from_utf8_lossy(&out.stderr)
                ));
            }
            outputs.push(out.stdout);
        }
        if outputs.iter().any(|o| *o != outputs[0]) {
            mismatched.push(args.join(" "));
        }
    }
    check(
        mismatched.is_empty(),
        format!(
            "3 runs x thread caps 1/4/1 byte-identical; differing: {}",
            if mismatched.is_empty() {
                "none".into()
            } else {
                mismatched.join(" | ")
            }
        ),
    )
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |n: u32| only.as_ref().is_none_or(|o| o.contains(&n));
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |n: u32, name: &'static str, outcome: Outcome| {
        match &outcome {
            Ok(d) => println!("PASS {n:>2} {name}: {d}"),
            Err(d) => println!("FAIL {n:>2} {name}: {d}"),
        }
        results.push((n, name, outcome));
    };
    if wanted(1) {
        report(1, "coverage completeness", completeness());
    }
    if wanted(2) || wanted(3) {
        let (c2, c3) = robot_sweep();
        if wanted(2) {
            report(2, "robot-count trend", c2);
        }
        if wanted(3) {
            report(3, "random vs wall start", c3);
        }
    }
    if wanted(4) {
        report(4, "density trend", density_sweep());
    }
    if wanted(5) {
        report(5, "turn-cost objectives", turn_costs());
    }
    if wanted(6) {
        report(6, "uct score", uct_examples());
    }
    if wanted(7) {
        report(7, "evaluate", evaluate_examples());
    }
    if wanted(8) {
        report(8, "tree invariants", tree_invariants());
    }
    if wanted(9) {
        report(9, "small-instance oracle", oracle_optimum());
    }
    if wanted(10) {
        report(10, "wavefront vs bfs", wavefront_vs_bfs());
    }
    if wanted(11) {
        report(11, "decomposition convergence", decomposition_convergence());
    }
    if wanted(12) {
        report(12, "determinism", determinism());
    }
    let failed: Vec<u32> = results
        .iter()
        .filter(|r| r.2.is_err())
        .map(|r| r.0)
        .collect();
    println!(
        "acceptance: {} passed, {} failed {failed:?}",
        results.len() - failed.len(),
        failed.len()
    );
    let strict = std::env::var_os("ACCEPTANCE_STRICT").is_some();
    let unexpected: Vec<u32> = failed
        .iter()
        .copied()
        .filter(|n| strict || !KNOWN_RED.contains(n))
        .collect();
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
    if !failed.is_empty() {
        println!("all failures are on the known-red list {KNOWN_RED:?}; set ACCEPTANCE_STRICT=1 to fail on them");
    }
}
