//! Forward simulation used to score tree nodes.

use rand::Rng;

use crate::grid::{apply_action, Action, Cell, GridMap, RobotState};
use crate::mcts::objective::{evaluate, StepFlags};
use crate::mcts::MctsConfig;
use crate::sim::Snapshot;

/// The rollout's straight-then-turn heuristic.
///
/// Goes straight while the square ahead is open and uncovered. Otherwise it
/// looks left and right: exactly one open-and-uncovered side wins; two such
/// sides give a random turn. When neither side qualifies the robot keeps
/// going straight if it can, and turns at random if it cannot.
pub fn default_policy<R: Rng + ?Sized>(
    state: RobotState,
    open: impl Fn(Cell) -> bool,
    covered: impl Fn(Cell) -> bool,
    rng: &mut R,
) -> Action {
    let fresh = |h| {
        let c = state.pos.step(h);
        open(c) && !covered(c)
    };
    if fresh(state.heading) {
        return Action::Straight;
    }
    let left = fresh(state.heading.left());
    let right = fresh(state.heading.right());
    match (left, right) {
        (true, false) => Action::Left,
        (false, true) => Action::Right,
        (false, false) if open(state.pos.step(state.heading)) => Action::Straight,
        _ => {
            if rng.gen_bool(0.5) {
                Action::Left
            } else {
                Action::Right
            }
        }
    }
}

/// Reusable buffers for rollouts on one map size.
#[derive(Clone, Debug, Default)]
pub struct RolloutScratch {
    stamp: u32,
    overlay: Vec<u32>,
    peers: Vec<RobotState>,
    flags: Vec<StepFlags>,
}

impl RolloutScratch {
    pub fn flags(&self) -> &[StepFlags] {
        &self.flags
    }

    fn begin(&mut self, cells: usize) {
        if self.overlay.len() != cells {
            self.overlay = vec![0; cells];
            self.stamp = 0;
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.overlay.fill(0);
            self.stamp = 1;
        }
        self.flags.clear();
    }
}

/// Everything one robot's rollouts read.
pub struct RolloutInput<'a> {
    pub snapshot: &'a Snapshot<'a>,
    pub robot: usize,
    pub config: &'a MctsConfig,
}

/// Simulates `horizon` steps from the robot's current state. The first
/// `prefix.len()` actions are forced; the rest come from the default policy.
/// Peers move first each step, along their published paths and then by the
/// default policy. Returns the trajectory value; the flags stay in `scratch`.
pub fn rollout<R: Rng + ?Sized>(
    input: &RolloutInput<'_>,
    prefix: &[Action],
    scratch: &mut RolloutScratch,
    rng: &mut R,
    peer_rngs: &mut [impl Rng],
) -> f64 {
    let snap = input.snapshot;
    let map: &GridMap = snap.map;
    let cfg = input.config;
    let me = input.robot;
    scratch.begin(map.len());
    let stamp = scratch.stamp;
    scratch.peers.clear();
    scratch.peers.extend_from_slice(snap.robots);
    let mut state = snap.robots[me];

    for k in 1..=cfg.horizon {
        // peers first, in id order, against the positions at that moment
        for j in 0..scratch.peers.len() {
            if j == me {
                continue;
            }
            let cur = scratch.peers[j];
            let action = match snap.paths.get(j).and_then(|p| p.get(k - 1)) {
                Some(a) => *a,
                None => {
                    let peers = &scratch.peers;
                    let overlay = &scratch.overlay;
                    default_policy(
                        cur,
                        |c| {
                            map.in_bounds(c)
                                && !map.known_blocked(c)
                                && !peers.iter().any(|p| p.pos == c)
                        },
                        |c| map.is_covered(c) || overlay[map.index(c)] == stamp,
                        &mut peer_rngs[j],
                    )
                }
            };
            let peers = &scratch.peers;
            let (next, moved) = apply_action(
                cur,
                action,
                |c| map.in_bounds(c),
                |c| map.known_blocked(c) || peers.iter().any(|p| p.pos == c),
            );
            scratch.peers[j] = next;
            if moved {
                let i = map.index(next.pos);
                scratch.overlay[i] = stamp;
            }
        }

        let peers = &scratch.peers;
        let overlay = &scratch.overlay;
        let occupied_by_peer =
            |c: Cell| peers.iter().enumerate().any(|(j, p)| j != me && p.pos == c);
        let action = match prefix.get(k - 1) {
            Some(a) => *a,
            None => default_policy(
                state,
                |c| map.in_bounds(c) && !map.known_blocked(c) && !occupied_by_peer(c),
                |c| map.is_covered(c) || overlay[map.index(c)] == stamp,
                rng,
            ),
        };
        let (next, moved) = apply_action(
            state,
            action,
            |c| map.in_bounds(c),
            |c| map.known_blocked(c) || occupied_by_peer(c),
        );
        let mut flags = StepFlags {
            hit: !moved,
            turned: cfg.turn_mode.penalizes(action),
            covered: false,
        };
        if moved {
            let i = map.index(next.pos);
            flags.covered = !map.covered()[i] && scratch.overlay[i] != stamp;
            scratch.overlay[i] = stamp;
        }
        scratch.peers[me] = next;
        state = next;
        scratch.flags.push(flags);
    }
    evaluate(&scratch.flags, cfg.c_hit, cfg.c_turn)
}
