use serde::{Deserialize, Serialize};

use crate::costs::{evaluate, Allocation, CostBreakdown};
use crate::instance::SupplyChainInstance;
use crate::milp::{build_forger, build_machinist, BuildOptions};

use super::{solve_bb, SolveError, SolveLimits, SolveReport};

/// Machinist tier solved first, forger tier conditioned on its allocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseReport {
    pub machinist: SolveReport,
    /// Absent when phase 1 found no allocation.
    pub forger: Option<SolveReport>,
    pub allocation: Option<Allocation>,
    /// Costs of the merged allocation.
    pub combined: Option<CostBreakdown>,
}

pub fn solve_two_phase(
    inst: &SupplyChainInstance,
    limits: &SolveLimits,
    opts: &BuildOptions,
) -> Result<TwoPhaseReport, SolveError> {
    let m1 = build_machinist(inst, opts)?;
    let machinist = solve_bb(inst, &m1, limits)?;
    let Some(phase1) = machinist.allocation.clone() else {
        return Ok(TwoPhaseReport {
            machinist,
            forger: None,
            allocation: None,
            combined: None,
        });
    };
    let m2 = build_forger(inst, &phase1.tier1, opts)?;
    let forger = solve_bb(inst, &m2, limits)?;
    let (allocation, combined) = match &forger.allocation {
        Some(a) => {
            let merged = Allocation {
                mode: inst.mode(),
                tier1: phase1.tier1.clone(),
                tier2: a.tier2.clone(),
            };
            let costs = evaluate(inst, &merged)?;
            (Some(merged), Some(costs))
        }
        None => (None, None),
    };
    Ok(TwoPhaseReport {
        machinist,
        forger: Some(forger),
        allocation,
        combined,
    })
}
