//! Trajectory objectives.
//!
//! A rollout of `T` steps produces per-step flags: `covered` when the robot
//! entered a square nobody had covered, `hit` when its advance was blocked
//! by a wall, an obstacle or a robot, and `turned` when the step's action is
//! a penalized turn. Step `k` (1-based) happens at `t_k = 0.5·k` seconds after
//! the rollout starts and is weighted by `1 / (t_k + 1)²`, so rewards further
//! out count for less.

use serde::{Deserialize, Serialize};

use crate::grid::Action;

/// Seconds per simulated step.
pub const STEP_SECONDS: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepFlags {
    pub covered: bool,
    pub hit: bool,
    pub turned: bool,
}

/// Which turns the turn cost applies to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnPenaltyMode {
    #[default]
    None,
    LeftOnly,
    RightOnly,
    Both,
}

impl TurnPenaltyMode {
    pub fn penalizes(self, action: Action) -> bool {
        match (self, action) {
            (_, Action::Straight) | (TurnPenaltyMode::None, _) => false,
            (TurnPenaltyMode::Both, _) => true,
            (TurnPenaltyMode::LeftOnly, a) => a == Action::Left,
            (TurnPenaltyMode::RightOnly, a) => a == Action::Right,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TurnPenaltyMode::None => "none",
            TurnPenaltyMode::LeftOnly => "left_only",
            TurnPenaltyMode::RightOnly => "right_only",
            TurnPenaltyMode::Both => "both",
        }
    }
}

impl std::str::FromStr for TurnPenaltyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(TurnPenaltyMode::None),
            "left" | "left_only" => Ok(TurnPenaltyMode::LeftOnly),
            "right" | "right_only" => Ok(TurnPenaltyMode::RightOnly),
            "both" => Ok(TurnPenaltyMode::Both),
            other => Err(format!(
                "unknown turn mode {other:?} (none|left_only|right_only|both)"
            )),
        }
    }
}

/// Discount for step `k`: `1 / (0.5·k + 1)²`.
#[inline]
pub fn step_weight(k: usize) -> f64 {
    let t = STEP_SECONDS * k as f64;
    1.0 / ((t + 1.0) * (t + 1.0))
}

/// Coverage objective with hit penalty; no turn term.
pub fn coverage_value(flags: &[StepFlags], c_hit: f64) -> f64 {
    flags
        .iter()
        .enumerate()
        .map(|(i, f)| {
            step_weight(i + 1)
                * (f64::from(u8::from(f.covered)) - c_hit * f64::from(u8::from(f.hit)))
        })
        .sum()
}

/// Coverage objective with hit and turn penalties. With `c_turn = 0` this
/// equals [`coverage_value`] bit for bit.
pub fn evaluate(flags: &[StepFlags], c_hit: f64, c_turn: f64) -> f64 {
    flags
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let p = f64::from(u8::from(f.covered));
            let q = f64::from(u8::from(f.hit));
            let r = f64::from(u8::from(f.turned));
            step_weight(i + 1) * (p - c_hit * q - c_turn * r)
        })
        .sum()
}
