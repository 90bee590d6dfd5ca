//! Stateless operations: each request carries its instance.

use axum::extract::rejection::JsonRejection;
use axum::Json;

use ssoa_core::analysis::{compare_solvers, solve_kind, sweep_penalty, sweep_sourcing, ComparisonTable, SplitRatio, SweepResult};
use ssoa_core::api::{
    CompareRequest, CountRequest, ExportRequest, ExportResponse, GenerateRequest, HeuristicRequest, HeuristicResponse,
    InstanceInput, PenaltySweepRequest, SolveInstanceRequest, SolveResponse, SourcingSweepRequest, TuneRequest,
    TwoPhaseRequest, ValidateResponse,
};
use ssoa_core::costs::evaluate;
use ssoa_core::exact::{solve_bb, solve_two_phase, SolveLimits, TwoPhaseReport};
use ssoa_core::heuristics::{default_ranges, tune, HeuristicError, ParamSet, Problem, RunOptions, TuneResult};
use ssoa_core::instance::{generate_instance, validate_instance, InstanceDocument, SupplyChainInstance};
use ssoa_core::milp::{build_machinist, build_model, count_variables, export_model, BuildOptions, ModelKind, VariableCount};
use ssoa_core::solver::{solve, SolverChoice};

use crate::error::{body, ApiError, ApiResult};

/// Runs CPU-bound work on the blocking pool.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
        .map(Json)
}

/// Parses and validates a request instance.
fn instance(input: &InstanceInput) -> Result<SupplyChainInstance, ApiError> {
    let inst = input.to_instance()?;
    let violations = validate_instance(&inst);
    if !violations.is_empty() {
        return Err(ApiError::invalid_instance(violations));
    }
    Ok(inst)
}

/// Linearized form when the bilinear integrated model is asked for.
fn buildable(kind: ModelKind) -> ModelKind {
    match kind {
        ModelKind::Integrated => ModelKind::IntegratedLinearized,
        k => k,
    }
}

pub(crate) async fn generate(b: Result<Json<GenerateRequest>, JsonRejection>) -> ApiResult<InstanceDocument> {
    let req = body(b)?;
    blocking(move || Ok(InstanceDocument::from(&generate_instance(&req.config)?))).await
}

pub(crate) async fn validate(b: Result<Json<InstanceInput>, JsonRejection>) -> ApiResult<ValidateResponse> {
    let inst = body(b)?.to_instance()?;
    let violations = validate_instance(&inst);
    Ok(Json(ValidateResponse {
        valid: violations.is_empty(),
        violations,
    }))
}

pub(crate) async fn count(b: Result<Json<CountRequest>, JsonRejection>) -> ApiResult<VariableCount> {
    let req = body(b)?;
    let inst = req.input.to_instance()?;
    Ok(Json(count_variables(&inst, req.kind, inst.mode())))
}

pub(crate) async fn export(b: Result<Json<ExportRequest>, JsonRejection>) -> ApiResult<ExportResponse> {
    let req = body(b)?;
    blocking(move || {
        let inst = instance(&req.input)?;
        let opts = BuildOptions::default();
        let kind = buildable(req.kind);
        let tier1 = match (kind, req.tier1) {
            (ModelKind::Forger, None) => {
                let m = build_machinist(&inst, &opts)?;
                let rep = solve_bb(&inst, &m, &SolveLimits::default())?;
                let alloc = rep.allocation.ok_or_else(|| {
                    ApiError::unprocessable("infeasible", "the machinist problem has no solution to condition on")
                })?;
                Some(alloc.tier1)
            }
            (_, t) => t,
        };
        let model = build_model(&inst, kind, tier1.as_deref(), &opts)?;
        Ok(ExportResponse {
            format: req.format,
            count: count_variables(&inst, kind, inst.mode()),
            text: export_model(&model, req.format)?,
        })
    })
    .await
}

pub(crate) async fn solve_instance(b: Result<Json<SolveInstanceRequest>, JsonRejection>) -> ApiResult<SolveResponse> {
    let req = body(b)?;
    blocking(move || {
        let inst = instance(&req.input)?;
        let r = req.request;
        let report = if r.kind == ModelKind::Forger && r.tier1.is_none() {
            r.limits.validate()?;
            solve_kind(&inst, r.kind, &r.solver, &r.limits, r.seed)?
        } else {
            solve(&inst, &r)?
        };
        let breakdown = report.allocation.as_ref().and_then(|a| evaluate(&inst, a).ok());
        Ok(SolveResponse { report, breakdown })
    })
    .await
}

pub(crate) async fn two_phase(b: Result<Json<TwoPhaseRequest>, JsonRejection>) -> ApiResult<TwoPhaseReport> {
    let req = body(b)?;
    blocking(move || {
        let inst = instance(&req.input)?;
        req.limits.validate()?;
        Ok(solve_two_phase(&inst, &req.limits, &BuildOptions::default())?)
    })
    .await
}

/// The forger problem without a given Tier1 allocation is conditioned on
/// the same heuristic's machinist solution.
fn heuristic_tier1(
    inst: &SupplyChainInstance,
    kind: ModelKind,
    tier1: Option<Vec<usize>>,
    params: &ParamSet,
    run: &RunOptions,
) -> Result<Option<Vec<usize>>, ApiError> {
    if kind != ModelKind::Forger || tier1.is_some() {
        return Ok(tier1);
    }
    let pr = Problem::new(inst, ModelKind::Machinist, None)?;
    let (rep, _) = params.run(&pr, run)?;
    let alloc = rep.allocation.ok_or_else(|| {
        ApiError::from(HeuristicError::Tier1("no machinist allocation found to condition on".into()))
    })?;
    Ok(Some(alloc.tier1))
}

pub(crate) async fn heuristic(b: Result<Json<HeuristicRequest>, JsonRejection>) -> ApiResult<HeuristicResponse> {
    let req = body(b)?;
    blocking(move || {
        let inst = instance(&req.input)?;
        let tier1 = heuristic_tier1(&inst, req.kind, req.tier1, &req.params, &req.run)?;
        let pr = Problem::new(&inst, req.kind, tier1.as_deref())?;
        let (report, trace) = req.params.run(&pr, &req.run)?;
        Ok(HeuristicResponse { report, trace })
    })
    .await
}

pub(crate) async fn tune_params(b: Result<Json<TuneRequest>, JsonRejection>) -> ApiResult<TuneResult> {
    let req = body(b)?;
    blocking(move || {
        let inst = instance(&req.input)?;
        let tier1 = heuristic_tier1(&inst, req.kind, req.tier1, &req.base, &req.run)?;
        let pr = Problem::new(&inst, req.kind, tier1.as_deref())?;
        let ranges = req.ranges.unwrap_or_else(|| default_ranges(req.base.algorithm()));
        Ok(tune(&pr, req.base, &ranges, req.trials, req.seeds_per_trial, req.seed, &req.run)?)
    })
    .await
}

pub(crate) async fn sweep_sourcing_ratios(
    b: Result<Json<SourcingSweepRequest>, JsonRejection>,
) -> ApiResult<SweepResult> {
    let req = body(b)?;
    blocking(move || {
        let inst = instance(&req.input)?;
        req.limits.validate()?;
        let ratios = req.ratios.unwrap_or_else(SplitRatio::standard);
        if ratios.is_empty() {
            return Err(ApiError::bad_request("no split ratios given"));
        }
        Ok(sweep_sourcing(&inst, &ratios, req.kind, &req.solver, &req.limits))
    })
    .await
}

pub(crate) async fn sweep_penalty_values(
    b: Result<Json<PenaltySweepRequest>, JsonRejection>,
) -> ApiResult<SweepResult> {
    let req = body(b)?;
    blocking(move || {
        let inst = instance(&req.input)?;
        req.limits.validate()?;
        sweep_penalty(&inst, req.axis, req.supplier, &req.values, req.kind, &req.solver, &req.limits)
            .map_err(|m| ApiError::unprocessable("invalid_sweep", m))
    })
    .await
}

pub(crate) async fn compare(b: Result<Json<CompareRequest>, JsonRejection>) -> ApiResult<ComparisonTable> {
    let req = body(b)?;
    blocking(move || {
        let inst = instance(&req.input)?;
        req.limits.validate()?;
        if req.solvers.is_empty() || req.kinds.is_empty() || req.seeds.is_empty() {
            return Err(ApiError::bad_request("solvers, kinds and seeds must be non-empty"));
        }
        let solvers: Vec<SolverChoice> = req.solvers;
        Ok(compare_solvers(&inst, &solvers, &req.kinds, &req.limits, &req.seeds))
    })
    .await
}
