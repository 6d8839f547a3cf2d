use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::mcts::TurnPenaltyMode;

use super::SimConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Complete,
    Timeout,
}

/// Result of one trial; one JSON object per line in batch output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub planner: String,
    pub placement: String,
    pub robots: usize,
    pub density: Option<f64>,
    pub map_index: Option<usize>,
    pub trial: Option<usize>,
    pub c_turn: f64,
    pub turn_mode: TurnPenaltyMode,
    pub seed: u64,
    pub config_digest: String,
    pub outcome: Outcome,
    pub epochs: u64,
    /// `epochs × 0.5 s`; for a timeout, the time at the cap.
    pub completion_time_s: f64,
    pub covered: usize,
    pub target: usize,
    pub turns_left: Vec<u32>,
    pub turns_right: Vec<u32>,
    pub total_left: u32,
    pub total_right: u32,
}

impl TrialRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trial records always serialize")
    }

    pub fn is_timeout(&self) -> bool {
        self.outcome == Outcome::Timeout
    }
}

/// First 16 hex digits of SHA-256 over the config's JSON form.
pub fn config_digest(config: &SimConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("configs always serialize");
    let digest = Sha256::digest(&bytes);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
