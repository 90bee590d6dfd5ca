use std::time::Instant;

use crate::costs::{
    check_constraints, derive_penalty_levels, evaluate_unchecked, Allocation, ConstraintViolation,
    CostModel, Scope, Tier2Choice,
};
use crate::instance::{SourcingMode, SupplyChainInstance};
use crate::milp::{ModelError, ModelKind};

use super::{SolveError, SolveReport, SolveStatus, TracePoint};

/// Largest number of candidate allocations [`brute_force`] will visit.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// Supplier tuples (one per proportion) that honour the must-make set of
/// one item. Dual tuples are ordered pairs of distinct suppliers.
fn choices(suppliers: usize, mode: SourcingMode, must: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    match mode {
        SourcingMode::Single => {
            for a in 0..suppliers {
                if must.iter().all(|&m| m == a) {
                    out.push(vec![a]);
                }
            }
        }
        SourcingMode::Dual => {
            for a in 0..suppliers {
                for b in 0..suppliers {
                    if a != b && must.iter().all(|&m| m == a || m == b) {
                        out.push(vec![a, b]);
                    }
                }
            }
        }
    }
    out
}

fn scope_of(kind: ModelKind) -> Scope {
    match kind {
        ModelKind::Machinist => Scope::Machinist,
        ModelKind::Forger => Scope::Forger,
        ModelKind::Integrated | ModelKind::IntegratedLinearized => Scope::Integrated,
    }
}

struct Space {
    tier1: Vec<Vec<Vec<usize>>>,
    tier2: Vec<Vec<Vec<usize>>>,
}

impl Space {
    fn new(inst: &SupplyChainInstance, kind: ModelKind) -> Self {
        let mode = inst.mode();
        let shape = inst.shape;
        let tier1 = if kind == ModelKind::Forger {
            Vec::new()
        } else {
            (0..inst.part_count())
                .map(|i| choices(shape.tier1_count, mode, &inst.must_make_tier1_of(i)))
                .collect()
        };
        let mut tier2 = Vec::new();
        if kind != ModelKind::Machinist {
            for k in 0..inst.forging_count() {
                for j in 0..shape.tier1_count {
                    tier2.push(choices(shape.tier2_count, mode, &inst.must_make_tier2_of(k, j)));
                }
            }
        }
        Space { tier1, tier2 }
    }

    fn size(&self) -> f64 {
        self.tier1
            .iter()
            .chain(&self.tier2)
            .map(|c| c.len() as f64)
            .product()
    }
}

/// Number of candidate allocations [`brute_force`] would visit.
pub fn search_space(inst: &SupplyChainInstance, kind: ModelKind, mode: SourcingMode) -> f64 {
    Space::new(&inst.with_mode(mode), kind).size()
}

/// Exhaustive enumeration oracle. Every candidate honours dual-sourcing
/// distinctness and must-make by construction; budgets are checked on the
/// evaluated costs, and penalty levels follow the forgers' blue-chip spend.
/// Cannot-make pairs are priced, not excluded, exactly as in the models.
/// Forger enumeration needs the Tier1 allocation it is conditioned on.
pub fn brute_force(
    inst: &SupplyChainInstance,
    kind: ModelKind,
    mode: SourcingMode,
    tier1: Option<&[usize]>,
) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    let inst = inst.with_mode(mode);
    let props = inst.proportions();
    let space = Space::new(&inst, kind);
    let size = space.size();
    if size > BRUTE_FORCE_LIMIT {
        return Err(SolveError::SpaceTooLarge {
            bound: size,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let fixed_tier1 = match kind {
        ModelKind::Forger => {
            let t = tier1.ok_or_else(|| {
                ModelError::IncompleteTier1("forger enumeration needs a Tier1 allocation".into())
            })?;
            if t.len() != inst.part_count() * props
                || t.iter().any(|&j| j >= inst.shape.tier1_count)
            {
                return Err(ModelError::IncompleteTier1(format!(
                    "{} entries, expected {}",
                    t.len(),
                    inst.part_count() * props
                ))
                .into());
            }
            Some(t.to_vec())
        }
        _ => None,
    };
    let scope = scope_of(kind);
    let cm = CostModel::new(&inst);
    let with_tier2 = kind != ModelKind::Machinist;

    let slots: Vec<&Vec<Vec<usize>>> = space.tier1.iter().chain(&space.tier2).collect();
    let n1 = space.tier1.len();
    let mut best: Option<(f64, Allocation)> = None;
    let mut trace = Vec::new();
    let mut visited = 0u64;
    let mut digits = vec![0usize; slots.len()];
    let mut done = slots.iter().any(|c| c.is_empty());

    let mut alloc = Allocation {
        mode,
        tier1: fixed_tier1.clone().unwrap_or_else(|| vec![0; inst.part_count() * props]),
        tier2: if with_tier2 {
            vec![Tier2Choice::base(0); space.tier2.len() * props]
        } else {
            Vec::new()
        },
    };
    while !done {
        for (s, &d) in digits.iter().enumerate() {
            let pick = &slots[s][d];
            if s < n1 {
                alloc.tier1[s * props..(s + 1) * props].copy_from_slice(pick);
            } else {
                let base = (s - n1) * props;
                for (p, &l) in pick.iter().enumerate() {
                    alloc.tier2[base + p] = Tier2Choice::base(l);
                }
            }
        }
        derive_penalty_levels(&cm, &mut alloc);
        let breakdown = evaluate_unchecked(&cm, &alloc);
        visited += 1;
        let feasible = check_constraints(&inst, &alloc, &breakdown, scope)
            .iter()
            .all(|v| matches!(v, ConstraintViolation::CannotMake { .. }));
        if feasible {
            let value = breakdown.scope_total(scope);
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                trace.push(TracePoint {
                    time: start.elapsed().as_secs_f64(),
                    incumbent: value,
                });
                best = Some((value, alloc.clone()));
            }
        }
        // advance the mixed-radix counter, last slot fastest
        let mut s = slots.len();
        loop {
            if s == 0 {
                break;
            }
            s -= 1;
            digits[s] += 1;
            if digits[s] < slots[s].len() {
                break;
            }
            digits[s] = 0;
            if s == 0 {
                s = usize::MAX;
                break;
            }
        }
        done = s == usize::MAX || slots.is_empty();
    }

    let (status, objective, allocation) = match best {
        Some((v, a)) => (SolveStatus::Optimal, Some(v), Some(a)),
        None => (SolveStatus::Infeasible, None, None),
    };
    Ok(SolveReport {
        solver: "brute_force".into(),
        model: kind,
        status,
        objective,
        allocation,
        best_bound: objective,
        relative_gap: objective.map(|_| 0.0),
        nodes: visited,
        iterations: 0,
        wall_time: start.elapsed().as_secs_f64(),
        trace,
        certificate: Vec::new(),
    })
}
