//! Adapter running one [`MctsPlanner`] per robot inside the engine.

use rayon::prelude::*;

use crate::error::{ConfigError, SimError};
use crate::mcts::{MctsConfig, MctsPlanner};
use crate::sim::{Snapshot, TeamDecision, TeamPlanner};

pub struct MctsTeam {
    planners: Vec<MctsPlanner>,
    diagnostics: Vec<String>,
    keep_diagnostics: bool,
}

impl MctsTeam {
    pub fn new(robots: usize, config: &MctsConfig, seed: u64) -> Result<Self, ConfigError> {
        let planners = (0..robots)
            .map(|i| MctsPlanner::new(i, config.clone(), seed))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MctsTeam {
            planners,
            diagnostics: Vec::new(),
            keep_diagnostics: false,
        })
    }

    pub fn with_diagnostics(mut self) -> Self {
        self.keep_diagnostics = true;
        self
    }
}

impl TeamPlanner for MctsTeam {
    fn plan(&mut self, snapshot: &Snapshot<'_>) -> Result<TeamDecision, SimError> {
        // trees are private to each planner; only the snapshot is shared
        let results: Vec<_> = self
            .planners
            .par_iter_mut()
            .map(|p| p.decide(snapshot))
            .collect();
        let mut out = TeamDecision::default();
        for (robot, r) in results.into_iter().enumerate() {
            let d = r.map_err(|e| SimError::Planner {
                robot,
                reason: e.to_string(),
            })?;
            if self.keep_diagnostics {
                self.diagnostics.push(format!(
                    "epoch={} robot={robot} {}",
                    snapshot.epoch, d.diagnostics
                ));
            }
            out.actions.push(d.action);
            out.paths
                .push(d.best_path.get(1..).unwrap_or_default().to_vec());
        }
        Ok(out)
    }

    fn take_diagnostics(&mut self) -> Vec<String> {
        std::mem::take(&mut self.diagnostics)
    }
}
