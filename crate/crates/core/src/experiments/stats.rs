//! Box-plot statistics.
//!
//! Quartiles are Tukey's hinges: the medians of the lower and upper halves
//! of the sorted sample, each half including the overall median when the
//! count is odd. Whiskers end at the most extreme samples inside
//! `[q1 - 1.5 IQR, q3 + 1.5 IQR]`; everything beyond is an outlier.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::StatsError;
use crate::sim::TrialRecord;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxStats {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn box_stats(samples: &[f64]) -> Option<BoxStats> {
    if samples.is_empty() {
        return None;
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let half = n.div_ceil(2);
    let q1 = median_sorted(&v[..half]);
    let q3 = median_sorted(&v[n - half..]);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = || v.iter().copied().filter(|x| (lo..=hi).contains(x));
    Some(BoxStats {
        n,
        median: median_sorted(&v),
        q1,
        q3,
        whisker_low: inside().next().unwrap_or(q1),
        whisker_high: inside().last().unwrap_or(q3),
        outliers: v
            .iter()
            .copied()
            .filter(|x| !(lo..=hi).contains(x))
            .collect(),
    })
}

/// Quantity summarized per record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    CompletionTime,
    LeftTurns,
    RightTurns,
}

impl Metric {
    pub fn of(self, r: &TrialRecord) -> f64 {
        match self {
            Metric::CompletionTime => r.completion_time_s,
            Metric::LeftTurns => r.total_left as f64,
            Metric::RightTurns => r.total_right as f64,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "time" => Ok(Metric::CompletionTime),
            "left" => Ok(Metric::LeftTurns),
            "right" => Ok(Metric::RightTurns),
            other => Err(format!("unknown metric {other:?} (time|left|right)")),
        }
    }
}

pub const GROUP_KEYS: [&str; 7] = [
    "planner",
    "placement",
    "robots",
    "density",
    "c_turn",
    "turn_mode",
    "map_index",
];

/// Value of one group key for a record, as printed in the CSV.
pub fn key_value(r: &TrialRecord, key: &str) -> Result<String, StatsError> {
    Ok(match key {
        "planner" => r.planner.clone(),
        "placement" => r.placement.clone(),
        "robots" => r.robots.to_string(),
        "density" => r.density.map_or_else(String::new, |d| d.to_string()),
        "c_turn" => r.c_turn.to_string(),
        "turn_mode" => r.turn_mode.label().to_string(),
        "map_index" => r.map_index.map_or_else(String::new, |m| m.to_string()),
        other => return Err(StatsError::UnknownKey(other.to_string())),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupSummary {
    pub key: Vec<String>,
    pub stats: BoxStats,
    pub timeouts: usize,
}

/// Box statistics per group, groups in order of first appearance.
pub fn summarize(
    records: &[TrialRecord],
    keys: &[&str],
    metric: Metric,
) -> Result<Vec<GroupSummary>, StatsError> {
    let mut groups: Vec<(Vec<String>, Vec<&TrialRecord>)> = Vec::new();
    for r in records {
        let key = keys
            .iter()
            .map(|k| key_value(r, k))
            .collect::<Result<Vec<_>, _>>()?;
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    if groups.is_empty() {
        return Err(StatsError::EmptyGroup(keys.join(",")));
    }
    groups
        .into_iter()
        .map(|(key, members)| {
            let samples: Vec<f64> = members.iter().map(|r| metric.of(r)).collect();
            let stats = box_stats(&samples).ok_or_else(|| StatsError::EmptyGroup(key.join(",")))?;
            let timeouts = members.iter().filter(|r| r.is_timeout()).count();
            Ok(GroupSummary {
                key,
                stats,
                timeouts,
            })
        })
        .collect()
}

pub fn to_csv(keys: &[&str], groups: &[GroupSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}{}n,median,q1,q3,whisker_low,whisker_high,outlier_count,timeout_count",
        keys.join(","),
        if keys.is_empty() { "" } else { "," }
    );
    for g in groups {
        let s = &g.stats;
        for k in &g.key {
            let _ = write!(out, "{k},");
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.n,
            s.median,
            s.q1,
            s.q3,
            s.whisker_low,
            s.whisker_high,
            s.outliers.len(),
            g.timeouts
        );
    }
    out
}
