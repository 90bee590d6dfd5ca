//! One entry point over every solver, used by the sweeps, the service and
//! the command line.

use serde::{Deserialize, Serialize};

use crate::exact::{brute_force, solve_bb, SolveError, SolveLimits, SolveReport};
use crate::heuristics::{
    aco_solve, ga_solve, pso_solve, AcoParams, GaParams, HeuristicError, Problem, PsoParams, RunOptions,
};
use crate::instance::SupplyChainInstance;
use crate::milp::{build_forger, build_integrated_linearized, build_machinist, BuildOptions, ModelKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error(transparent)]
    Exact(#[from] SolveError),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error("{0}")]
    Request(String),
}

impl From<crate::milp::ModelError> for SolverError {
    fn from(e: crate::milp::ModelError) -> Self {
        SolverError::Exact(e.into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SolverChoice {
    BranchAndBound,
    BruteForce,
    Ga {
        #[serde(default)]
        params: GaParams,
    },
    Pso {
        #[serde(default)]
        params: PsoParams,
    },
    Aco {
        #[serde(default)]
        params: AcoParams,
    },
}

impl SolverChoice {
    pub fn label(&self) -> &'static str {
        match self {
            SolverChoice::BranchAndBound => "branch_and_bound",
            SolverChoice::BruteForce => "brute_force",
            SolverChoice::Ga { .. } => "ga",
            SolverChoice::Pso { .. } => "pso",
            SolverChoice::Aco { .. } => "aco",
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, SolverChoice::BranchAndBound | SolverChoice::BruteForce)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveRequest {
    pub kind: ModelKind,
    pub solver: SolverChoice,
    #[serde(default)]
    pub limits: SolveLimits,
    #[serde(default)]
    pub seed: u64,
    /// Tier1 allocation the forger problem is conditioned on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier1: Option<Vec<usize>>,
}

impl SolveRequest {
    pub fn new(kind: ModelKind, solver: SolverChoice) -> Self {
        SolveRequest {
            kind,
            solver,
            limits: SolveLimits::default(),
            seed: 0,
            tier1: None,
        }
    }
}

/// Solves `inst` as requested. The integrated problem is solved exactly
/// through its linearized model.
pub fn solve(inst: &SupplyChainInstance, req: &SolveRequest) -> Result<SolveReport, SolverError> {
    req.limits.validate()?;
    let tier1 = req.tier1.as_deref();
    if req.kind == ModelKind::Forger && tier1.is_none() {
        return Err(SolverError::Request(
            "the forger problem needs the Tier1 allocation it is conditioned on".into(),
        ));
    }
    let opts = BuildOptions::default();
    let run = RunOptions {
        seed: req.seed,
        threads: req.limits.threads,
        time_limit: Some(req.limits.time_limit),
        reference: None,
    };
    let report = match &req.solver {
        SolverChoice::BranchAndBound => {
            let model = match req.kind {
                ModelKind::Machinist => build_machinist(inst, &opts)?,
                ModelKind::Forger => build_forger(inst, tier1.expect("checked"), &opts)?,
                ModelKind::Integrated | ModelKind::IntegratedLinearized => {
                    build_integrated_linearized(inst, &opts)?
                }
            };
            let mut rep = solve_bb(inst, &model, &req.limits)?;
            rep.model = req.kind;
            rep
        }
        SolverChoice::BruteForce => {
            let mut rep = brute_force(inst, req.kind, inst.mode(), tier1)?;
            rep.model = req.kind;
            rep
        }
        SolverChoice::Ga { params } => ga_solve(&Problem::new(inst, req.kind, tier1)?, params, &run)?.0,
        SolverChoice::Pso { params } => pso_solve(&Problem::new(inst, req.kind, tier1)?, params, &run)?.0,
        SolverChoice::Aco { params } => aco_solve(&Problem::new(inst, req.kind, tier1)?, params, &run)?.0,
    };
    Ok(report)
}
