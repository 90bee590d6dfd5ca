//! Exact solving at desk scale: LP-based branch-and-bound, exhaustive
//! enumeration as an oracle, and the sequential two-phase heuristic.

mod bb;
mod brute;
pub(crate) mod simplex;
mod two_phase;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use bb::{solve_bb, solve_model, MilpOutcome};
pub use brute::{brute_force, search_space, BRUTE_FORCE_LIMIT};
pub use two_phase::{solve_two_phase, TwoPhaseReport};

use crate::costs::{Allocation, CostError};
use crate::milp::{ModelError, ModelKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("invalid limits: {0}")]
    InvalidLimits(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("search space of {bound} candidates exceeds the enumeration limit of {limit}")]
    SpaceTooLarge { bound: f64, limit: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveLimits {
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    pub node_limit: u64,
    /// Relative optimality gap at which branch-and-bound stops.
    pub gap_target: f64,
    /// Accepted for interface stability; the search runs on one thread.
    pub threads: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            time_limit: 300.0,
            node_limit: 10_000_000,
            gap_target: 1e-9,
            threads: 1,
        }
    }
}

impl SolveLimits {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.time_limit.is_finite() && self.time_limit > 0.0) {
            return Err(SolveError::InvalidLimits("time_limit must be positive".into()));
        }
        if self.node_limit == 0 {
            return Err(SolveError::InvalidLimits("node_limit must be positive".into()));
        }
        if !(self.gap_target.is_finite() && self.gap_target > 0.0) {
            return Err(SolveError::InvalidLimits("gap_target must be positive".into()));
        }
        if self.threads == 0 {
            return Err(SolveError::InvalidLimits("threads must be positive".into()));
        }
        Ok(())
    }

    pub fn time_budget(&self) -> Duration {
        Duration::from_secs_f64(self.time_limit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Seconds since the solve started.
    pub time: f64,
    pub incumbent: f64,
}

/// Result of any solver. `objective` is in the units of the solved model:
/// machining cost, forging cost, or the integrated total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: String,
    pub model: ModelKind,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub allocation: Option<Allocation>,
    pub best_bound: Option<f64>,
    pub relative_gap: Option<f64>,
    pub nodes: u64,
    pub iterations: u64,
    /// Seconds.
    pub wall_time: f64,
    pub trace: Vec<TracePoint>,
    /// Labels of rows that together admit no solution, when proven at the root.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificate: Vec<String>,
}

impl SolveReport {
    /// Copy without timing data, for reproducibility comparisons.
    pub fn without_timing(&self) -> SolveReport {
        let mut out = self.clone();
        out.wall_time = 0.0;
        for p in &mut out.trace {
            p.time = 0.0;
        }
        out
    }

    /// Trace as `time,incumbent` CSV.
    pub fn trace_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["time", "incumbent"]).expect("in-memory write");
        for p in &self.trace {
            w.write_record([p.time.to_string(), p.incumbent.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

pub(crate) fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    ((incumbent - bound) / incumbent.abs().max(1e-9)).max(0.0)
}
