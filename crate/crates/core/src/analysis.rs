//! Sensitivity sweeps and solver comparisons, with CSV output.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::costs::{evaluate, Allocation};
use crate::exact::{SolveLimits, SolveReport, SolveStatus};
use crate::heuristics::{map_indexed, thread_pool};
use crate::instance::{SourcingMode, SupplyChainInstance};
use crate::milp::ModelKind;
use crate::solver::{solve, SolveRequest, SolverChoice, SolverError};

/// A split such as `70:30`, in percent. `100:0` means single sourcing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplitRatio {
    pub first: u32,
    pub second: u32,
}

impl SplitRatio {
    pub const SINGLE: SplitRatio = SplitRatio { first: 100, second: 0 };

    pub fn new(first: u32, second: u32) -> Result<Self, String> {
        if first + second != 100 || first == 0 {
            return Err(format!("{first}:{second} is not a split of 100 with a non-empty first share"));
        }
        Ok(SplitRatio { first, second })
    }

    pub fn is_single(self) -> bool {
        self.second == 0
    }

    /// The usual grid 50:50, 60:40, ..., 100:0.
    pub fn standard() -> Vec<SplitRatio> {
        (5..=10).map(|t| SplitRatio { first: t * 10, second: 100 - t * 10 }).collect()
    }

    /// `inst` re-sourced with this split on every part and forging.
    pub fn apply(self, inst: &SupplyChainInstance) -> SupplyChainInstance {
        if self.is_single() {
            return inst.with_mode(SourcingMode::Single);
        }
        let mut out = inst.with_mode(SourcingMode::Dual);
        let s = self.first as f64 / 100.0;
        out.sourcing.part_split.iter_mut().for_each(|x| *x = s);
        out.sourcing.forging_split.iter_mut().for_each(|x| *x = s);
        out
    }
}

impl fmt::Display for SplitRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.first, self.second)
    }
}

impl FromStr for SplitRatio {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("`{s}` is not of the form A:B"))?;
        let parse = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("`{s}`: {e}"));
        SplitRatio::new(parse(a)?, parse(b)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub label: String,
    pub value: f64,
    pub status: Option<SolveStatus>,
    pub total_cost: Option<f64>,
    /// Forgers whose blue-chip spend misses the threshold.
    pub penalized_suppliers: usize,
    /// Whether the varied forger is penalized (penalty sweeps only).
    pub designated_penalized: Option<bool>,
    pub allocation: Option<Allocation>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: String,
    pub kind: ModelKind,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Header: `axis,label,value,status,total_cost,penalized_suppliers,designated_penalized,error`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "axis",
            "label",
            "value",
            "status",
            "total_cost",
            "penalized_suppliers",
            "designated_penalized",
            "error",
        ])
        .expect("in-memory write");
        for p in &self.points {
            w.write_record([
                self.axis.clone(),
                p.label.clone(),
                p.value.to_string(),
                p.status.map(|s| format!("{s:?}").to_lowercase()).unwrap_or_default(),
                p.total_cost.map(|c| c.to_string()).unwrap_or_default(),
                p.penalized_suppliers.to_string(),
                p.designated_penalized.map(|b| b.to_string()).unwrap_or_default(),
                p.error.clone().unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Solves one model kind; the forger problem is conditioned on the same
/// solver's machinist solution.
pub fn solve_kind(
    inst: &SupplyChainInstance,
    kind: ModelKind,
    solver: &SolverChoice,
    limits: &SolveLimits,
    seed: u64,
) -> Result<SolveReport, SolverError> {
    let mut req = SolveRequest {
        kind,
        solver: solver.clone(),
        limits: *limits,
        seed,
        tier1: None,
    };
    if kind == ModelKind::Forger {
        let phase1 = solve(
            inst,
            &SolveRequest {
                kind: ModelKind::Machinist,
                ..req.clone()
            },
        )?;
        let Some(a) = phase1.allocation else {
            return Ok(phase1);
        };
        req.tier1 = Some(a.tier1);
    }
    solve(inst, &req)
}

fn point(
    inst: &SupplyChainInstance,
    label: String,
    value: f64,
    kind: ModelKind,
    solver: &SolverChoice,
    limits: &SolveLimits,
    designated: Option<usize>,
) -> SweepPoint {
    let mut p = SweepPoint {
        label,
        value,
        status: None,
        total_cost: None,
        penalized_suppliers: 0,
        designated_penalized: None,
        allocation: None,
        error: None,
    };
    match solve_kind(inst, kind, solver, limits, 0) {
        Ok(rep) => {
            p.status = Some(rep.status);
            p.total_cost = rep.objective;
            if let Some(a) = rep.allocation {
                if let Ok(b) = evaluate(inst, &a) {
                    p.penalized_suppliers = b.penalty_flags.iter().filter(|&&f| f).count();
                    p.designated_penalized = designated.and_then(|l| b.penalty_flags.get(l).copied());
                }
                p.allocation = Some(a);
            }
        }
        Err(e) => p.error = Some(e.to_string()),
    }
    p
}

/// Cost of the optimised scope for each split; `100:0` is solved as the
/// single-sourcing model.
pub fn sweep_sourcing(
    inst: &SupplyChainInstance,
    ratios: &[SplitRatio],
    kind: ModelKind,
    solver: &SolverChoice,
    limits: &SolveLimits,
) -> SweepResult {
    let pool = thread_pool(limits.threads);
    let inner = SolveLimits { threads: 1, ..*limits };
    let points = map_indexed(pool.as_ref(), ratios.len(), |n| {
        let r = ratios[n];
        point(&r.apply(inst), r.to_string(), r.first as f64, kind, solver, &inner, None)
    });
    SweepResult {
        axis: "sourcing".into(),
        kind,
        points,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyAxis {
    Factor,
    Threshold,
}

impl FromStr for PenaltyAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "factor" => Ok(PenaltyAxis::Factor),
            "threshold" => Ok(PenaltyAxis::Threshold),
            other => Err(format!("unknown penalty axis `{other}` (expected factor or threshold)")),
        }
    }
}

/// Varies the penalty factor or threshold of one forger, keeping every
/// other setting, and records whether the optimum absorbs the penalty.
pub fn sweep_penalty(
    inst: &SupplyChainInstance,
    axis: PenaltyAxis,
    supplier: usize,
    values: &[f64],
    kind: ModelKind,
    solver: &SolverChoice,
    limits: &SolveLimits,
) -> Result<SweepResult, String> {
    if supplier >= inst.shape.tier2_count {
        return Err(format!("tier2 supplier {supplier} does not exist"));
    }
    for &v in values {
        let ok = match axis {
            PenaltyAxis::Factor => v >= 1.0,
            PenaltyAxis::Threshold => v >= 0.0,
        };
        if !ok || !v.is_finite() {
            return Err(format!("{axis:?} value {v} out of range"));
        }
    }
    let pool = thread_pool(limits.threads);
    let inner = SolveLimits { threads: 1, ..*limits };
    let points = map_indexed(pool.as_ref(), values.len(), |n| {
        let v = values[n];
        let mut variant = inst.clone();
        match axis {
            PenaltyAxis::Factor => variant.penalty.factor[supplier] = v,
            PenaltyAxis::Threshold => variant.penalty.threshold[supplier] = v,
        }
        point(&variant, v.to_string(), v, kind, solver, &inner, Some(supplier))
    });
    Ok(SweepResult {
        axis: match axis {
            PenaltyAxis::Factor => "penalty_factor".into(),
            PenaltyAxis::Threshold => "penalty_threshold".into(),
        },
        kind,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub kind: ModelKind,
    pub solver: String,
    /// Mean over seeds.
    pub time: f64,
    /// Mean final cost over seeds; absent when a run failed.
    pub cost: Option<f64>,
    /// `cost` divided by the lowest cost of the same model kind.
    pub cost_over_best: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    /// Header: `model,solver,time_s,cost,cost_over_best,error`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["model", "solver", "time_s", "cost", "cost_over_best", "error"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.kind.name().to_string(),
                r.solver.clone(),
                format!("{:.6}", r.time),
                r.cost.map(|c| c.to_string()).unwrap_or_default(),
                r.cost_over_best.map(|c| format!("{c:.5}")).unwrap_or_default(),
                r.error.clone().unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Runs every solver on every model kind. Exact solvers run once;
/// meta-heuristics once per seed, averaged. Failures are recorded per cell.
pub fn compare_solvers(
    inst: &SupplyChainInstance,
    solvers: &[SolverChoice],
    kinds: &[ModelKind],
    limits: &SolveLimits,
    seeds: &[u64],
) -> ComparisonTable {
    let mut rows = Vec::new();
    for &kind in kinds {
        let first = rows.len();
        for solver in solvers {
            let run_seeds: &[u64] = if solver.is_exact() || seeds.is_empty() { &[0] } else { seeds };
            let mut costs = Vec::new();
            let mut time = 0.0;
            let mut error = None;
            for &seed in run_seeds {
                let t0 = Instant::now();
                let res = solve_kind(inst, kind, solver, limits, seed);
                time += t0.elapsed().as_secs_f64();
                match res {
                    Ok(rep) => match rep.objective {
                        Some(c) => costs.push(c),
                        None => error = Some(format!("no solution ({:?})", rep.status)),
                    },
                    Err(e) => error = Some(e.to_string()),
                }
            }
            let cost = (error.is_none() && !costs.is_empty())
                .then(|| costs.iter().sum::<f64>() / costs.len() as f64);
            rows.push(ComparisonRow {
                kind,
                solver: solver.label().into(),
                time: time / run_seeds.len() as f64,
                cost,
                cost_over_best: None,
                error,
            });
        }
        let best = rows[first..]
            .iter()
            .filter_map(|r| r.cost)
            .fold(f64::INFINITY, f64::min);
        for r in &mut rows[first..] {
            r.cost_over_best = r.cost.map(|c| c / best);
        }
    }
    ComparisonTable { rows }
}
