use crate::costs::{derive_penalty_levels, evaluate_unchecked, Allocation, CostModel, Tier2Choice};
use crate::instance::{Budget, PenaltyLevel, SourcingMode, SupplyChainInstance};

use super::count::{count_variables, VariableCount};
use super::model::{LinearModel, ModelKind, ModelMetadata, Relation, VarTag};
use super::ModelError;

/// Default ceiling on the variable count of a linearized integrated build.
pub const DEFAULT_LINEARIZATION_CAP: usize = 200_000;

/// Multiplier applied to the largest possible spend when picking big-M.
pub const BIG_M_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildOptions {
    /// Reject must-make sets that force an item onto more suppliers than it
    /// has proportions. Disabling this lets the solver prove infeasibility.
    pub structural_checks: bool,
    pub linearization_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            structural_checks: true,
            linearization_cap: DEFAULT_LINEARIZATION_CAP,
        }
    }
}

const LEVELS: [PenaltyLevel; 2] = [PenaltyLevel::Base, PenaltyLevel::Penalized];

fn levels_of(inst: &SupplyChainInstance, forging: usize) -> &'static [PenaltyLevel] {
    if inst.shape.is_llv_forging(forging) {
        &LEVELS
    } else {
        &LEVELS[..1]
    }
}

fn metadata(inst: &SupplyChainInstance, kind: ModelKind, count: &VariableCount) -> ModelMetadata {
    ModelMetadata {
        kind,
        mode: inst.mode(),
        fingerprint: inst.fingerprint(),
        big_m: None,
        epsilon: inst.penalty.epsilon,
        variable_estimate: count.total,
    }
}

fn check_structure(inst: &SupplyChainInstance, tier2: bool) -> Result<(), ModelError> {
    let props = inst.proportions();
    let shape = inst.shape;
    for i in 0..inst.part_count() {
        let n = inst.must_make_tier1_of(i).len();
        if n > props {
            return Err(ModelError::StructurallyInfeasible(format!(
                "{} must be made by {n} Tier1 suppliers but has {props} proportion(s)",
                shape.part_id(i)
            )));
        }
    }
    if tier2 {
        for k in 0..inst.forging_count() {
            for j in 0..shape.tier1_count {
                let n = inst.must_make_tier2_of(k, j).len();
                if n > props {
                    return Err(ModelError::StructurallyInfeasible(format!(
                        "({}, tier1 {j}) must be supplied by {n} Tier2 suppliers but has {props} proportion(s)",
                        shape.forging_id(k)
                    )));
                }
            }
        }
    }
    Ok(())
}

fn budget_rows(
    model: &mut LinearModel,
    prefix: &str,
    supplier: usize,
    budget: Budget,
    terms: Vec<(usize, f64)>,
) {
    if budget.min > 0.0 {
        model.add_row(
            format!("{prefix}_min_{supplier}"),
            terms.clone(),
            Relation::Ge,
            budget.min,
        );
    }
    let reachable: f64 = terms.iter().map(|&(_, a)| a.max(0.0)).sum();
    if reachable > budget.max {
        model.add_row(format!("{prefix}_max_{supplier}"), terms, Relation::Le, budget.max);
    }
}

/// X variables, indexed `[(part * J + tier1) * P + p]`.
fn add_x(model: &mut LinearModel, cm: &CostModel<'_>) -> Vec<usize> {
    let inst = cm.inst;
    let nj = inst.shape.tier1_count;
    let props = inst.proportions();
    let mut idx = vec![0; inst.part_count() * nj * props];
    for i in 0..inst.part_count() {
        let item = inst.shape.part_id(i);
        for j in 0..nj {
            for p in 0..props {
                idx[(i * nj + j) * props + p] = model.add_binary(
                    format!("x_{item}_j{j}_p{}", p + 1),
                    Some(VarTag::X {
                        part: i,
                        tier1: j,
                        proportion: p,
                    }),
                    cm.machining_cost(i, j, p),
                );
            }
        }
    }
    idx
}

fn tier1_rows(model: &mut LinearModel, inst: &SupplyChainInstance, x: &[usize], spend: &[Vec<(usize, f64)>]) {
    let nj = inst.shape.tier1_count;
    let props = inst.proportions();
    for i in 0..inst.part_count() {
        let item = inst.shape.part_id(i);
        for p in 0..props {
            let row = (0..nj).map(|j| (x[(i * nj + j) * props + p], 1.0)).collect();
            model.add_row(format!("assign_{item}_p{}", p + 1), row, Relation::Eq, 1.0);
        }
    }
    if props == 2 {
        for i in 0..inst.part_count() {
            let item = inst.shape.part_id(i);
            for j in 0..nj {
                let row = (0..2).map(|p| (x[(i * nj + j) * 2 + p], 1.0)).collect();
                model.add_row(format!("distinct_{item}_j{j}"), row, Relation::Le, 1.0);
            }
        }
    }
    for &(i, j) in &inst.must_make_tier1 {
        let row = (0..props).map(|p| (x[(i * nj + j) * props + p], 1.0)).collect();
        model.add_row(
            format!("must_{}_j{j}", inst.shape.part_id(i)),
            row,
            Relation::Eq,
            1.0,
        );
    }
    for (j, terms) in spend.iter().enumerate() {
        budget_rows(model, "budget1", j, inst.tier1_budget[j], terms.clone());
    }
}

fn tier1_spend(inst: &SupplyChainInstance, cm: &CostModel<'_>, x: &[usize]) -> Vec<Vec<(usize, f64)>> {
    let nj = inst.shape.tier1_count;
    let props = inst.proportions();
    let mut spend = vec![Vec::new(); nj];
    for i in 0..inst.part_count() {
        for (j, terms) in spend.iter_mut().enumerate() {
            for p in 0..props {
                terms.push((x[(i * nj + j) * props + p], cm.machining_cost(i, j, p)));
            }
        }
    }
    spend
}

/// Y variable lookup. `None` marks level 2 of a blue-chip forging.
struct YIndex {
    nj: usize,
    nl: usize,
    props: usize,
    idx: Vec<Option<usize>>,
}

impl YIndex {
    fn at(&self, k: usize, j: usize, l: usize, d: usize, q: usize) -> Option<usize> {
        self.idx[((((k * self.nj + j) * self.nl + l) * 2 + d) * self.props) + q]
    }
}

/// Adds Y variables; `cost` gives the objective coefficient.
fn add_y(
    model: &mut LinearModel,
    inst: &SupplyChainInstance,
    mut cost: impl FnMut(usize, usize, usize, PenaltyLevel, usize) -> f64,
) -> YIndex {
    let shape = inst.shape;
    let (nj, nl) = (shape.tier1_count, shape.tier2_count);
    let props = inst.proportions();
    let mut yi = YIndex {
        nj,
        nl,
        props,
        idx: vec![None; inst.forging_count() * nj * nl * 2 * props],
    };
    for k in 0..inst.forging_count() {
        let item = shape.forging_id(k);
        let llv = shape.is_llv_forging(k);
        for j in 0..nj {
            for l in 0..nl {
                for (d, &level) in levels_of(inst, k).iter().enumerate() {
                    for q in 0..props {
                        let name = if llv {
                            format!("y_{item}_j{j}_l{l}_d{}_p{}", d + 1, q + 1)
                        } else {
                            format!("y_{item}_j{j}_l{l}_p{}", q + 1)
                        };
                        let v = model.add_binary(
                            name,
                            Some(VarTag::Y {
                                forging: k,
                                tier1: j,
                                tier2: l,
                                level,
                                proportion: q,
                            }),
                            cost(k, j, l, level, q),
                        );
                        yi.idx[((((k * nj + j) * nl + l) * 2 + d) * props) + q] = Some(v);
                    }
                }
            }
        }
    }
    yi
}

fn add_v(model: &mut LinearModel, inst: &SupplyChainInstance) -> Vec<usize> {
    (0..inst.shape.tier2_count)
        .map(|l| model.add_binary(format!("v_l{l}"), Some(VarTag::V { tier2: l }), 0.0))
        .collect()
}

/// Per-forger spend split by kind: blue, LLV at level 1, LLV at level 2.
#[derive(Default, Clone)]
struct Tier2Spend {
    blue: Vec<(usize, f64)>,
    llv: [Vec<(usize, f64)>; 2],
}

impl Tier2Spend {
    fn push(&mut self, llv: bool, level: PenaltyLevel, term: (usize, f64)) {
        if !llv {
            self.blue.push(term);
        } else {
            self.llv[usize::from(level == PenaltyLevel::Penalized)].push(term);
        }
    }

    fn all(&self) -> Vec<(usize, f64)> {
        self.blue
            .iter()
            .chain(&self.llv[0])
            .chain(&self.llv[1])
            .copied()
            .collect()
    }
}

fn tier2_rows(
    model: &mut LinearModel,
    inst: &SupplyChainInstance,
    y: &YIndex,
    v: &[usize],
    spend: &[Tier2Spend],
) {
    let shape = inst.shape;
    let (nj, nl) = (shape.tier1_count, shape.tier2_count);
    let props = inst.proportions();
    let slot_terms = |k: usize, j: usize, l: usize, q: Option<usize>| -> Vec<(usize, f64)> {
        let mut row = Vec::new();
        for d in 0..2 {
            for qq in 0..props {
                if q.is_none_or(|q| q == qq) {
                    if let Some(var) = y.at(k, j, l, d, qq) {
                        row.push((var, 1.0));
                    }
                }
            }
        }
        row
    };

    for k in 0..inst.forging_count() {
        let item = shape.forging_id(k);
        for j in 0..nj {
            for q in 0..props {
                let row = (0..nl).flat_map(|l| slot_terms(k, j, l, Some(q))).collect();
                model.add_row(format!("assign_{item}_j{j}_p{}", q + 1), row, Relation::Eq, 1.0);
            }
        }
    }
    if props == 2 {
        for k in 0..inst.forging_count() {
            let item = shape.forging_id(k);
            for j in 0..nj {
                for l in 0..nl {
                    model.add_row(
                        format!("distinct_{item}_j{j}_l{l}"),
                        slot_terms(k, j, l, None),
                        Relation::Le,
                        1.0,
                    );
                }
            }
        }
    }
    for &(k, j, l) in &inst.must_make_tier2 {
        model.add_row(
            format!("must_{}_j{j}_l{l}", shape.forging_id(k)),
            slot_terms(k, j, l, None),
            Relation::Eq,
            1.0,
        );
    }
    for (l, s) in spend.iter().enumerate() {
        budget_rows(model, "budget2", l, inst.tier2_budget[l], s.all());
    }

    let reachable: f64 = spend
        .iter()
        .flat_map(|s| s.all())
        .map(|(_, a)| a.max(0.0))
        .sum();
    let max_threshold = inst.penalty.threshold.iter().copied().fold(0.0, f64::max);
    let big_m = inst.penalty.big_m.unwrap_or_else(|| {
        BIG_M_FACTOR * reachable.max(max_threshold + inst.penalty.epsilon).max(1.0)
    });
    model.metadata.big_m = Some(big_m);
    let eps = inst.penalty.epsilon;
    for (l, s) in spend.iter().enumerate() {
        let d = inst.penalty.threshold[l];
        let with_v = |terms: &[(usize, f64)], coef: f64| {
            let mut row = terms.to_vec();
            row.push((v[l], coef));
            row
        };
        // v = 1 forces blue spend <= D - eps, v = 0 forces it >= D - eps
        model.add_row(format!("pen_low_{l}"), with_v(&s.blue, big_m), Relation::Ge, d - eps);
        model.add_row(
            format!("pen_high_{l}"),
            with_v(&s.blue, big_m),
            Relation::Le,
            d - eps + big_m,
        );
        model.add_row(format!("pen_d1_{l}"), with_v(&s.llv[0], big_m), Relation::Le, big_m);
        model.add_row(format!("pen_d2_{l}"), with_v(&s.llv[1], -big_m), Relation::Le, 0.0);
    }
}

/// Machinist-tier model over X.
pub fn build_machinist(inst: &SupplyChainInstance, opts: &BuildOptions) -> Result<LinearModel, ModelError> {
    if opts.structural_checks {
        check_structure(inst, false)?;
    }
    let count = count_variables(inst, ModelKind::Machinist, inst.mode());
    let mut model = LinearModel::new(metadata(inst, ModelKind::Machinist, &count));
    let cm = CostModel::new(inst);
    let x = add_x(&mut model, &cm);
    let spend = tier1_spend(inst, &cm, &x);
    tier1_rows(&mut model, inst, &x, &spend);
    Ok(model)
}

/// Forger-tier model over Y and v for a fixed Tier1 allocation.
pub fn build_forger(
    inst: &SupplyChainInstance,
    tier1: &[usize],
    opts: &BuildOptions,
) -> Result<LinearModel, ModelError> {
    let expected = inst.part_count() * inst.proportions();
    if tier1.len() != expected || tier1.iter().any(|&j| j >= inst.shape.tier1_count) {
        return Err(ModelError::IncompleteTier1(format!(
            "{} entries, expected {expected} with suppliers below {}",
            tier1.len(),
            inst.shape.tier1_count
        )));
    }
    if opts.structural_checks {
        check_structure(inst, true)?;
    }
    let count = count_variables(inst, ModelKind::Forger, inst.mode());
    let mut model = LinearModel::new(metadata(inst, ModelKind::Forger, &count));
    model.fixed_tier1 = Some(tier1.to_vec());
    let cm = CostModel::new(inst);
    let nj = inst.shape.tier1_count;
    let z = cm.requirements(tier1);
    let y = add_y(&mut model, inst, |k, j, l, level, q| {
        cm.forging_cost(z[k * nj + j], k, j, l, level, q)
    });
    let v = add_v(&mut model, inst);
    let mut spend = vec![Tier2Spend::default(); inst.shape.tier2_count];
    for &(var, cost) in &model.objective {
        if let Some(VarTag::Y {
            forging, tier2, level, ..
        }) = model.variables[var].tag
        {
            spend[tier2].push(inst.shape.is_llv_forging(forging), level, (var, cost));
        }
    }
    tier2_rows(&mut model, inst, &y, &v, &spend);
    Ok(model)
}

/// Integrated model with every X*Y product replaced by a binary U and the
/// three standard linearization rows. U exists only for part/forging pairs
/// with a nonzero yield.
pub fn build_integrated_linearized(
    inst: &SupplyChainInstance,
    opts: &BuildOptions,
) -> Result<LinearModel, ModelError> {
    let count = count_variables(inst, ModelKind::IntegratedLinearized, inst.mode());
    if count.total > opts.linearization_cap {
        return Err(ModelError::Intractable {
            estimated: count.total,
            cap: opts.linearization_cap,
        });
    }
    if opts.structural_checks {
        check_structure(inst, true)?;
    }
    let mut model = LinearModel::new(metadata(inst, ModelKind::IntegratedLinearized, &count));
    let cm = CostModel::new(inst);
    let shape = inst.shape;
    let (nj, nl) = (shape.tier1_count, shape.tier2_count);
    let props = inst.proportions();

    let x = add_x(&mut model, &cm);
    let y = add_y(&mut model, inst, |_, _, _, _, _| 0.0);
    let v = add_v(&mut model, inst);

    let consumers = inst.forging_consumers();
    let mut spend = vec![Tier2Spend::default(); nl];
    let mut lin_rows = Vec::new();
    for (k, users) in consumers.iter().enumerate() {
        let item = shape.forging_id(k);
        let llv = shape.is_llv_forging(k);
        for j in 0..nj {
            for (l, sl) in spend.iter_mut().enumerate().take(nl) {
                for (d, &level) in levels_of(inst, k).iter().enumerate() {
                    let unit = cm.forging_unit(k, j, l, level);
                    for q in 0..props {
                        let yv = y.at(k, j, l, d, q).expect("declared level");
                        let split = inst.forging_fraction(k, q);
                        for &(i, yield_) in users {
                            let part = shape.part_id(i);
                            for p in 0..props {
                                let xv = x[(i * nj + j) * props + p];
                                let coef = unit * split * yield_ as f64 * cm.part_quantity(i, p);
                                let name = if llv {
                                    format!("u_{item}_j{j}_l{l}_d{}_p{}_{part}_p{}", d + 1, q + 1, p + 1)
                                } else {
                                    format!("u_{item}_j{j}_l{l}_p{}_{part}_p{}", q + 1, p + 1)
                                };
                                let u = model.add_binary(
                                    name.clone(),
                                    Some(VarTag::U {
                                        forging: k,
                                        tier1: j,
                                        tier2: l,
                                        level,
                                        proportion: q,
                                        part: i,
                                        part_proportion: p,
                                    }),
                                    coef,
                                );
                                sl.push(llv, level, (u, coef));
                                lin_rows.push((name, u, xv, yv));
                            }
                        }
                    }
                }
            }
        }
    }

    let spend1 = tier1_spend(inst, &cm, &x);
    tier1_rows(&mut model, inst, &x, &spend1);
    tier2_rows(&mut model, inst, &y, &v, &spend);
    for (name, u, xv, yv) in lin_rows {
        let body = &name[2..];
        model.add_row(format!("lx_{body}"), vec![(u, 1.0), (xv, -1.0)], Relation::Le, 0.0);
        model.add_row(format!("ly_{body}"), vec![(u, 1.0), (yv, -1.0)], Relation::Le, 0.0);
        model.add_row(
            format!("lxy_{body}"),
            vec![(u, 1.0), (xv, -1.0), (yv, -1.0)],
            Relation::Ge,
            -1.0,
        );
    }
    Ok(model)
}

/// Builds the model of `kind`; forger models need the Tier1 allocation.
pub fn build_model(
    inst: &SupplyChainInstance,
    kind: ModelKind,
    tier1: Option<&[usize]>,
    opts: &BuildOptions,
) -> Result<LinearModel, ModelError> {
    match kind {
        ModelKind::Machinist => build_machinist(inst, opts),
        ModelKind::Forger => {
            let tier1 = tier1.ok_or_else(|| {
                ModelError::IncompleteTier1("the forger model needs a Tier1 allocation".into())
            })?;
            build_forger(inst, tier1, opts)
        }
        ModelKind::IntegratedLinearized => build_integrated_linearized(inst, opts),
        ModelKind::Integrated => Err(ModelError::Unsupported(
            "the bilinear integrated model is only counted; build the linearized form".into(),
        )),
    }
}

/// Indicator vector of `alloc` in `model`. Penalty indicators follow the
/// forgers' blue-chip spend; U variables are the X*Y products.
pub fn encode_allocation(
    model: &LinearModel,
    inst: &SupplyChainInstance,
    alloc: &Allocation,
) -> Vec<f64> {
    let shape = inst.shape;
    let nj = shape.tier1_count;
    let props = inst.proportions();
    let tier1: &[usize] = model.fixed_tier1.as_deref().unwrap_or(&alloc.tier1);
    let full = Allocation {
        mode: alloc.mode,
        tier1: tier1.to_vec(),
        tier2: alloc.tier2.clone(),
    };
    let flags = if full.has_tier2() {
        evaluate_unchecked(&CostModel::new(inst), &full).penalty_flags
    } else {
        vec![false; shape.tier2_count]
    };
    let x_on = |i: usize, j: usize, p: usize| tier1[i * props + p] == j;
    let y_on = |k: usize, j: usize, l: usize, level: PenaltyLevel, q: usize| {
        full.has_tier2() && {
            let c: Tier2Choice = full.tier2[(k * nj + j) * props + q];
            c.supplier == l && (c.level == level || !shape.is_llv_forging(k))
        }
    };
    model
        .variables
        .iter()
        .map(|var| {
            let on = match var.tag {
                Some(VarTag::X {
                    part,
                    tier1,
                    proportion,
                }) => x_on(part, tier1, proportion),
                Some(VarTag::Y {
                    forging,
                    tier1,
                    tier2,
                    level,
                    proportion,
                }) => y_on(forging, tier1, tier2, level, proportion),
                Some(VarTag::V { tier2 }) => flags[tier2],
                Some(VarTag::U {
                    forging,
                    tier1,
                    tier2,
                    level,
                    proportion,
                    part,
                    part_proportion,
                }) => {
                    x_on(part, tier1, part_proportion)
                        && y_on(forging, tier1, tier2, level, proportion)
                }
                None => false,
            };
            if on {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Reads an allocation back from a (near-)integral solution vector. Penalty
/// levels are re-derived from spend so slots with no demand carry the
/// level implied by their forger's flag.
pub fn decode_allocation(
    model: &LinearModel,
    inst: &SupplyChainInstance,
    values: &[f64],
) -> Result<Allocation, ModelError> {
    let shape = inst.shape;
    let nj = shape.tier1_count;
    let props = inst.proportions();
    let mode: SourcingMode = inst.mode();
    let kind = model.metadata.kind;
    let unset = usize::MAX;
    let mut tier1 = match &model.fixed_tier1 {
        Some(t) => t.clone(),
        None => vec![unset; inst.part_count() * props],
    };
    let with_tier2 = kind != ModelKind::Machinist && inst.forging_count() > 0;
    let mut tier2 = if with_tier2 {
        vec![Tier2Choice::base(unset); inst.forging_count() * nj * props]
    } else {
        Vec::new()
    };
    for (var, &val) in model.variables.iter().zip(values) {
        if val < 0.5 {
            continue;
        }
        match var.tag {
            Some(VarTag::X {
                part,
                tier1: j,
                proportion,
            }) => tier1[part * props + proportion] = j,
            Some(VarTag::Y {
                forging,
                tier1: j,
                tier2: l,
                level,
                proportion,
            }) if with_tier2 => {
                tier2[(forging * nj + j) * props + proportion] = Tier2Choice { supplier: l, level };
            }
            _ => {}
        }
    }
    if tier1.contains(&unset) || tier2.iter().any(|c| c.supplier == unset) {
        return Err(ModelError::Invalid("solution leaves an item unassigned".into()));
    }
    let mut alloc = Allocation { mode, tier1, tier2 };
    derive_penalty_levels(&CostModel::new(inst), &mut alloc);
    Ok(alloc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::evaluate;
    use crate::instance::{generate_instance, GeneratorConfig, ProblemShape};
    use crate::milp::Integrality;

    fn tiny(shape: ProblemShape, mode: SourcingMode, seed: u64) -> SupplyChainInstance {
        generate_instance(&GeneratorConfig {
            shape,
            must_make: Default::default(),
            sourcing_mode: mode,
            seed,
            ..Default::default()
        })
        .unwrap()
    }

    fn shape(nj: usize, nl: usize, pb: usize, pl: usize, fb: usize, fl: usize) -> ProblemShape {
        ProblemShape {
            tier1_count: nj,
            tier2_count: nl,
            parts_blue: pb,
            parts_llv: pl,
            forgings_blue: fb,
            forgings_llv: fl,
        }
    }

    #[test]
    fn machinist_dual_one_part_two_suppliers() {
        let inst = tiny(shape(2, 2, 1, 0, 1, 0), SourcingMode::Dual, 1);
        let m = build_machinist(&inst, &BuildOptions::default()).unwrap();
        assert_eq!(m.variables.len(), 4);
        assert!(m.variables.iter().all(|v| v.integrality == Integrality::Binary));
        let eq = m.constraints.iter().filter(|c| c.label.starts_with("assign_")).count();
        let pair = m.constraints.iter().filter(|c| c.label.starts_with("distinct_")).count();
        assert_eq!((eq, pair), (2, 2));
        assert_eq!(m.constraints.len(), 4, "loose budgets add no rows");
        m.validate().unwrap();
    }

    #[test]
    fn forger_one_llv_forging_counts() {
        let inst = tiny(shape(2, 2, 0, 1, 0, 1), SourcingMode::Dual, 2);
        // dual sourcing needs two machinists in the generator; build by hand
        let mut inst1 = inst.clone();
        inst1.shape.tier1_count = 1;
        inst1.machining_unit_cost = crate::instance::Grid2::filled(1, 1, 10.0);
        inst1.machining_transport_cost = crate::instance::Grid2::filled(1, 1, 1.0);
        inst1.forging_unit_cost = crate::instance::Grid3::filled(1, 1, 2, 3.0);
        inst1.forging_transport_cost = crate::instance::Grid3::filled(1, 1, 2, 1.0);
        inst1.tier1_budget.truncate(1);
        inst1.must_make_tier1.clear();
        inst1.must_make_tier2.clear();
        inst1.cannot_make_tier1.clear();
        inst1.cannot_make_tier2.clear();
        let m = build_forger(&inst1, &[0, 0], &BuildOptions::default()).unwrap();
        let y = m
            .variables
            .iter()
            .filter(|v| matches!(v.tag, Some(VarTag::Y { .. })))
            .count();
        let v = m
            .variables
            .iter()
            .filter(|v| matches!(v.tag, Some(VarTag::V { .. })))
            .count();
        assert_eq!((y, v), (8, 2));
        m.validate().unwrap();
    }

    #[test]
    fn linearized_tiny_counts() {
        let inst = tiny(shape(2, 2, 1, 0, 1, 0), SourcingMode::Single, 3);
        let m = build_integrated_linearized(&inst, &BuildOptions::default()).unwrap();
        let u = m
            .variables
            .iter()
            .filter(|v| matches!(v.tag, Some(VarTag::U { .. })))
            .count();
        let lin = m
            .constraints
            .iter()
            .filter(|c| c.label.starts_with('l') && !c.label.starts_with("pen"))
            .count();
        assert_eq!((u, lin), (4, 12));
        assert_eq!(m.variables.len(), count_variables(&inst, ModelKind::IntegratedLinearized, SourcingMode::Single).total);
        m.validate().unwrap();
    }

    #[test]
    fn linearization_rows_pin_products_at_corners() {
        let inst = tiny(shape(2, 2, 1, 0, 1, 0), SourcingMode::Single, 3);
        let m = build_integrated_linearized(&inst, &BuildOptions::default()).unwrap();
        let row = |prefix: &str| {
            m.constraints
                .iter()
                .find(|c| c.label.starts_with(prefix))
                .unwrap()
                .clone()
        };
        let (lx, lxy) = (row("lx_"), row("lxy_"));
        // U - X - Y >= -1 with X = Y = 1 gives U >= 1
        assert_eq!(lxy.rhs, -1.0);
        assert_eq!(lxy.row.len(), 3);
        // U - X <= 0 with X = 0 gives U <= 0
        assert_eq!((lx.relation, lx.rhs), (Relation::Le, 0.0));
    }

    #[test]
    fn full_scale_linearization_is_refused() {
        let inst = tiny(shape(3, 3, 4, 4, 4, 4), SourcingMode::Dual, 4);
        let opts = BuildOptions {
            linearization_cap: 100,
            ..Default::default()
        };
        assert!(matches!(
            build_integrated_linearized(&inst, &opts),
            Err(ModelError::Intractable { .. })
        ));
    }

    #[test]
    fn too_many_must_make_is_structurally_infeasible() {
        let mut inst = tiny(shape(3, 2, 1, 0, 1, 0), SourcingMode::Single, 5);
        inst.cannot_make_tier1.clear();
        for j in 0..3 {
            inst.must_make_tier1.insert((0, j));
        }
        assert!(matches!(
            build_machinist(&inst, &BuildOptions::default()),
            Err(ModelError::StructurallyInfeasible(_))
        ));
        let lax = BuildOptions {
            structural_checks: false,
            ..Default::default()
        };
        assert!(build_machinist(&inst, &lax).is_ok());
    }

    #[test]
    fn encoded_allocation_round_trips() {
        let inst = tiny(shape(2, 3, 1, 1, 1, 1), SourcingMode::Dual, 6);
        let m = build_integrated_linearized(&inst, &BuildOptions::default()).unwrap();
        let mut alloc = Allocation {
            mode: SourcingMode::Dual,
            tier1: vec![0, 1, 1, 0],
            tier2: (0..8)
                .map(|s| Tier2Choice::base([0, 2, 1, 0, 2, 1, 1, 2][s]))
                .collect(),
        };
        derive_penalty_levels(&CostModel::new(&inst), &mut alloc);
        let x = encode_allocation(&m, &inst, &alloc);
        let back = decode_allocation(&m, &inst, &x).unwrap();
        assert_eq!(back, alloc);
        let total = evaluate(&inst, &alloc).unwrap().total;
        assert!((m.objective_value(&x) - total).abs() <= 1e-6 * total.max(1.0));
    }
}
