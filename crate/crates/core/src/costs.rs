//! Cost algebra shared by the models and every solver.
//!
//! Machining cost of a part proportion is `(CBX + CTX) * fraction * orders`.
//! Forging cost of a `(forging, tier1)` slot depends on the Tier1
//! allocation through the requirement `Z[k][j]`, the total number of
//! forgings `k` that machinist `j` needs for the parts it won. LLV forging
//! prices are scaled by the forger's penalty factor when its blue-chip spend
//! stays below the threshold.

use serde::{Deserialize, Serialize};

use crate::instance::{
    ItemId, PenaltyLevel, ProhibitiveCosts, SourcingMode, SupplyChainInstance,
};
use crate::MONEY_TOL;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CostError {
    #[error("unknown index: {0}")]
    UnknownIndex(String),
    #[error("incomplete allocation: {0}")]
    Incomplete(String),
    #[error("allocation is for {found:?} sourcing but the instance uses {expected:?}")]
    ModeMismatch {
        expected: SourcingMode,
        found: SourcingMode,
    },
}

/// Which part of the supply chain an allocation or model covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Machinist,
    Forger,
    Integrated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tier2Choice {
    pub supplier: usize,
    pub level: PenaltyLevel,
}

impl Tier2Choice {
    pub fn base(supplier: usize) -> Self {
        Tier2Choice {
            supplier,
            level: PenaltyLevel::Base,
        }
    }
}

/// Supplier choices for every item proportion.
///
/// `tier1[part * P + p]` is the machinist of proportion `p` of a part and
/// `tier2[(forging * J + j) * P + p]` the forger serving proportion `p` of
/// machinist `j`'s requirement of a forging, where `P` is 1 or 2 by mode
/// and `J` the Tier1 count. An empty `tier2` marks a machinist-only
/// allocation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Allocation {
    pub mode: SourcingMode,
    pub tier1: Vec<usize>,
    #[serde(default)]
    pub tier2: Vec<Tier2Choice>,
}

impl Allocation {
    pub fn proportions(&self) -> usize {
        self.mode.proportions()
    }

    pub fn tier1_supplier(&self, part: usize, proportion: usize) -> usize {
        self.tier1[part * self.proportions() + proportion]
    }

    pub fn tier2_slot(tier1_count: usize, proportions: usize, forging: usize, tier1: usize, p: usize) -> usize {
        (forging * tier1_count + tier1) * proportions + p
    }

    pub fn has_tier2(&self) -> bool {
        !self.tier2.is_empty()
    }
}

/// Cost totals of an allocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub machining_blue: f64,
    pub machining_llv: f64,
    pub forging_blue: f64,
    pub forging_llv: f64,
    pub total: f64,
    pub per_supplier_spend_tier1: Vec<f64>,
    /// Blue-chip forging spend per Tier2 supplier (compared with thresholds).
    pub per_supplier_blue_forging_spend_tier2: Vec<f64>,
    /// All forging spend per Tier2 supplier (compared with budgets).
    pub per_supplier_spend_tier2: Vec<f64>,
    /// `true` when the forger's blue-chip spend is below its threshold.
    pub penalty_flags: Vec<bool>,
    pub consistency_violations: Vec<PenaltyInconsistency>,
    /// Selected pairs that are on a cannot-make list.
    pub cannot_make_selections: Vec<String>,
}

impl CostBreakdown {
    pub fn machining_total(&self) -> f64 {
        self.machining_blue + self.machining_llv
    }

    pub fn forging_total(&self) -> f64 {
        self.forging_blue + self.forging_llv
    }

    /// Objective of the model covering `scope`.
    pub fn scope_total(&self, scope: Scope) -> f64 {
        match scope {
            Scope::Machinist => self.machining_total(),
            Scope::Forger => self.forging_total(),
            Scope::Integrated => self.total,
        }
    }
}

/// An LLV assignment priced at a level that disagrees with the forger's
/// penalty flag, or a blue-chip assignment marked penalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyInconsistency {
    pub item: ItemId,
    pub tier1: usize,
    pub proportion: usize,
    pub tier2: usize,
    pub level: PenaltyLevel,
    pub flagged: bool,
}

/// Instance view with the cannot-make prices resolved once, used on hot
/// paths (fitness evaluation, enumeration, model building).
#[derive(Clone, Copy)]
pub struct CostModel<'a> {
    pub inst: &'a SupplyChainInstance,
    pub prohibitive: ProhibitiveCosts,
}

impl<'a> CostModel<'a> {
    pub fn new(inst: &'a SupplyChainInstance) -> Self {
        CostModel {
            inst,
            prohibitive: inst.prohibitive_costs(),
        }
    }

    /// `CBX + CTX`, with the prohibitive price for cannot-make pairs.
    #[inline]
    pub fn machining_unit(&self, part: usize, tier1: usize) -> f64 {
        let inst = self.inst;
        let unit = if inst.cannot_make_tier1.contains(&(part, tier1)) {
            self.prohibitive.machining_unit
        } else {
            inst.machining_unit_cost.get(part, tier1)
        };
        unit + inst.machining_transport_cost.get(part, tier1)
    }

    /// Units of part proportion `p`; fractional under dual sourcing.
    #[inline]
    pub fn part_quantity(&self, part: usize, proportion: usize) -> f64 {
        self.inst.part_fraction(part, proportion) * self.inst.part_orders[part] as f64
    }

    #[inline]
    pub fn machining_cost(&self, part: usize, tier1: usize, proportion: usize) -> f64 {
        self.machining_unit(part, tier1) * self.part_quantity(part, proportion)
    }

    /// `CBY * gamma + CTY`; gamma is 1 at the base level and for blue chips.
    #[inline]
    pub fn forging_unit(&self, forging: usize, tier1: usize, tier2: usize, level: PenaltyLevel) -> f64 {
        let inst = self.inst;
        let mut unit = if inst.cannot_make_tier2.contains(&(forging, tier1, tier2)) {
            self.prohibitive.forging_unit
        } else {
            inst.forging_unit_cost.get(forging, tier1, tier2)
        };
        if level == PenaltyLevel::Penalized && inst.shape.is_llv_forging(forging) {
            unit *= inst.penalty.factor[tier2];
        }
        unit + inst.forging_transport_cost.get(forging, tier1, tier2)
    }

    #[inline]
    pub fn forging_cost(
        &self,
        requirement: f64,
        forging: usize,
        tier1: usize,
        tier2: usize,
        level: PenaltyLevel,
        proportion: usize,
    ) -> f64 {
        self.forging_unit(forging, tier1, tier2, level)
            * requirement
            * self.inst.forging_fraction(forging, proportion)
    }

    /// Forging requirements `Z`, indexed `[forging * J + tier1]`.
    pub fn requirements(&self, tier1: &[usize]) -> Vec<f64> {
        let inst = self.inst;
        let nj = inst.shape.tier1_count;
        let props = inst.proportions();
        let mut z = vec![0.0; inst.forging_count() * nj];
        for (i, links) in inst.yields.iter().enumerate() {
            for p in 0..props {
                let j = tier1[i * props + p];
                let q = self.part_quantity(i, p);
                for &(k, y) in links {
                    z[k * nj + j] += y as f64 * q;
                }
            }
        }
        z
    }
}

fn part_flat(inst: &SupplyChainInstance, part: ItemId) -> Result<usize, CostError> {
    inst.shape
        .part_index(part)
        .ok_or_else(|| CostError::UnknownIndex(part.to_string()))
}

fn forging_flat(inst: &SupplyChainInstance, forging: ItemId) -> Result<usize, CostError> {
    inst.shape
        .forging_index(forging)
        .ok_or_else(|| CostError::UnknownIndex(forging.to_string()))
}

fn check_supplier(n: usize, count: usize, tier: &str) -> Result<(), CostError> {
    if n >= count {
        return Err(CostError::UnknownIndex(format!("{tier} supplier {n}")));
    }
    Ok(())
}

fn check_proportion(inst: &SupplyChainInstance, p: usize) -> Result<(), CostError> {
    if p >= inst.proportions() {
        return Err(CostError::UnknownIndex(format!(
            "proportion {} under {:?} sourcing",
            p + 1,
            inst.mode()
        )));
    }
    Ok(())
}

/// Total cost of machining proportion `proportion` (0-based) of `part` at
/// Tier1 supplier `tier1`.
pub fn machining_cost(
    inst: &SupplyChainInstance,
    part: ItemId,
    tier1: usize,
    proportion: usize,
) -> Result<f64, CostError> {
    let i = part_flat(inst, part)?;
    check_supplier(tier1, inst.shape.tier1_count, "tier1")?;
    check_proportion(inst, proportion)?;
    Ok(CostModel::new(inst).machining_cost(i, tier1, proportion))
}

/// Number of `forging` units machinist `tier1` needs under `tier1_alloc`.
pub fn forging_requirement(
    inst: &SupplyChainInstance,
    tier1_alloc: &[usize],
    forging: ItemId,
    tier1: usize,
) -> Result<f64, CostError> {
    let k = forging_flat(inst, forging)?;
    check_supplier(tier1, inst.shape.tier1_count, "tier1")?;
    check_tier1(inst, tier1_alloc)?;
    let model = CostModel::new(inst);
    Ok(model.requirements(tier1_alloc)[k * inst.shape.tier1_count + tier1])
}

/// Cost of supplying proportion `proportion` of machinist `tier1`'s need
/// for `forging` from forger `tier2` at penalty level `level`.
pub fn forging_cost(
    inst: &SupplyChainInstance,
    tier1_alloc: &[usize],
    forging: ItemId,
    tier1: usize,
    tier2: usize,
    level: PenaltyLevel,
    proportion: usize,
) -> Result<f64, CostError> {
    let z = forging_requirement(inst, tier1_alloc, forging, tier1)?;
    let k = forging_flat(inst, forging)?;
    check_supplier(tier2, inst.shape.tier2_count, "tier2")?;
    check_proportion(inst, proportion)?;
    if level == PenaltyLevel::Penalized && !forging.kind.is_llv() {
        return Err(CostError::UnknownIndex(format!(
            "penalty level 2 for blue-chip forging {forging}"
        )));
    }
    Ok(CostModel::new(inst).forging_cost(z, k, tier1, tier2, level, proportion))
}

fn check_tier1(inst: &SupplyChainInstance, tier1: &[usize]) -> Result<(), CostError> {
    let expected = inst.part_count() * inst.proportions();
    if tier1.len() != expected {
        return Err(CostError::Incomplete(format!(
            "{} Tier1 genes, expected {expected}",
            tier1.len()
        )));
    }
    if let Some(&j) = tier1.iter().find(|&&j| j >= inst.shape.tier1_count) {
        return Err(CostError::UnknownIndex(format!("tier1 supplier {j}")));
    }
    Ok(())
}

fn check_allocation(inst: &SupplyChainInstance, alloc: &Allocation) -> Result<(), CostError> {
    if alloc.mode != inst.mode() {
        return Err(CostError::ModeMismatch {
            expected: inst.mode(),
            found: alloc.mode,
        });
    }
    check_tier1(inst, &alloc.tier1)?;
    if alloc.has_tier2() || inst.forging_count() == 0 {
        let expected = inst.forging_count() * inst.shape.tier1_count * inst.proportions();
        if alloc.tier2.len() != expected {
            return Err(CostError::Incomplete(format!(
                "{} Tier2 genes, expected {expected}",
                alloc.tier2.len()
            )));
        }
        if let Some(c) = alloc.tier2.iter().find(|c| c.supplier >= inst.shape.tier2_count) {
            return Err(CostError::UnknownIndex(format!("tier2 supplier {}", c.supplier)));
        }
    }
    Ok(())
}

/// Evaluates an allocation. Machinist-only allocations (empty `tier2`)
/// report zero forging cost.
pub fn evaluate(inst: &SupplyChainInstance, alloc: &Allocation) -> Result<CostBreakdown, CostError> {
    check_allocation(inst, alloc)?;
    Ok(evaluate_unchecked(&CostModel::new(inst), alloc))
}

/// [`evaluate`] without the structural checks; `alloc` must be well formed.
pub fn evaluate_unchecked(model: &CostModel<'_>, alloc: &Allocation) -> CostBreakdown {
    let inst = model.inst;
    let shape = inst.shape;
    let (nj, nl) = (shape.tier1_count, shape.tier2_count);
    let props = inst.proportions();

    let mut out = CostBreakdown {
        machining_blue: 0.0,
        machining_llv: 0.0,
        forging_blue: 0.0,
        forging_llv: 0.0,
        total: 0.0,
        per_supplier_spend_tier1: vec![0.0; nj],
        per_supplier_blue_forging_spend_tier2: vec![0.0; nl],
        per_supplier_spend_tier2: vec![0.0; nl],
        penalty_flags: Vec::new(),
        consistency_violations: Vec::new(),
        cannot_make_selections: Vec::new(),
    };

    for i in 0..inst.part_count() {
        for p in 0..props {
            let j = alloc.tier1[i * props + p];
            let c = model.machining_cost(i, j, p);
            if shape.is_llv_part(i) {
                out.machining_llv += c;
            } else {
                out.machining_blue += c;
            }
            out.per_supplier_spend_tier1[j] += c;
            if inst.cannot_make_tier1.contains(&(i, j)) {
                out.cannot_make_selections
                    .push(format!("({}, tier1 {j})", shape.part_id(i)));
            }
        }
    }

    if alloc.has_tier2() {
        let z = model.requirements(&alloc.tier1);
        // blue chips first: their spend decides the penalty flags
        for k in 0..shape.forgings_blue {
            for j in 0..nj {
                for p in 0..props {
                    let choice = alloc.tier2[(k * nj + j) * props + p];
                    let l = choice.supplier;
                    let c = model.forging_cost(z[k * nj + j], k, j, l, PenaltyLevel::Base, p);
                    out.forging_blue += c;
                    out.per_supplier_blue_forging_spend_tier2[l] += c;
                    out.per_supplier_spend_tier2[l] += c;
                    if choice.level != PenaltyLevel::Base {
                        out.consistency_violations.push(PenaltyInconsistency {
                            item: shape.forging_id(k),
                            tier1: j,
                            proportion: p,
                            tier2: l,
                            level: choice.level,
                            flagged: false,
                        });
                    }
                }
            }
        }
        out.penalty_flags = (0..nl)
            .map(|l| out.per_supplier_blue_forging_spend_tier2[l] < inst.penalty.threshold[l])
            .collect();
        for k in shape.forgings_blue..shape.forging_count() {
            for j in 0..nj {
                for p in 0..props {
                    let choice = alloc.tier2[(k * nj + j) * props + p];
                    let l = choice.supplier;
                    let c = model.forging_cost(z[k * nj + j], k, j, l, choice.level, p);
                    out.forging_llv += c;
                    out.per_supplier_spend_tier2[l] += c;
                    let flagged = out.penalty_flags[l];
                    if choice.level != PenaltyLevel::from_flag(flagged) {
                        out.consistency_violations.push(PenaltyInconsistency {
                            item: shape.forging_id(k),
                            tier1: j,
                            proportion: p,
                            tier2: l,
                            level: choice.level,
                            flagged,
                        });
                    }
                }
            }
        }
        for k in 0..shape.forging_count() {
            for j in 0..nj {
                for p in 0..props {
                    let l = alloc.tier2[(k * nj + j) * props + p].supplier;
                    if inst.cannot_make_tier2.contains(&(k, j, l)) {
                        out.cannot_make_selections.push(format!(
                            "({}, tier1 {j}, tier2 {l})",
                            shape.forging_id(k)
                        ));
                    }
                }
            }
        }
    }

    out.total = out.machining_blue + out.machining_llv + out.forging_blue + out.forging_llv;
    out
}

/// Sets every penalty level to the one implied by the forgers' blue-chip
/// spend, so the allocation passes the consistency check.
pub fn derive_penalty_levels(model: &CostModel<'_>, alloc: &mut Allocation) {
    if !alloc.has_tier2() {
        return;
    }
    let inst = model.inst;
    let shape = inst.shape;
    let nj = shape.tier1_count;
    let props = inst.proportions();
    let z = model.requirements(&alloc.tier1);
    let mut blue = vec![0.0; shape.tier2_count];
    for k in 0..shape.forgings_blue {
        for j in 0..nj {
            for p in 0..props {
                let slot = (k * nj + j) * props + p;
                let choice = &mut alloc.tier2[slot];
                choice.level = PenaltyLevel::Base;
                blue[choice.supplier] +=
                    model.forging_cost(z[k * nj + j], k, j, choice.supplier, PenaltyLevel::Base, p);
            }
        }
    }
    for slot in shape.forgings_blue * nj * props..alloc.tier2.len() {
        let choice = &mut alloc.tier2[slot];
        let l = choice.supplier;
        choice.level = PenaltyLevel::from_flag(blue[l] < inst.penalty.threshold[l]);
    }
}

/// A broken hard constraint of an allocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintViolation {
    /// Both proportions of an item went to the same supplier.
    SameSupplier { entity: String },
    MustMake { entity: String },
    CannotMake { entity: String },
    Budget { tier: u8, supplier: usize, spend: f64, min: f64, max: f64 },
    PenaltyLevel { entity: String },
}

/// Checks the constraints relevant to `scope`. Cannot-make selections are
/// reported too; callers that price them instead of forbidding them can
/// filter those out.
pub fn check_constraints(
    inst: &SupplyChainInstance,
    alloc: &Allocation,
    breakdown: &CostBreakdown,
    scope: Scope,
) -> Vec<ConstraintViolation> {
    let shape = inst.shape;
    let nj = shape.tier1_count;
    let props = inst.proportions();
    let mut out = Vec::new();

    if scope != Scope::Forger {
        for i in 0..inst.part_count() {
            let chosen = &alloc.tier1[i * props..(i + 1) * props];
            if props == 2 && chosen[0] == chosen[1] {
                out.push(ConstraintViolation::SameSupplier {
                    entity: shape.part_id(i).to_string(),
                });
            }
            for j in inst.must_make_tier1_of(i) {
                if !chosen.contains(&j) {
                    out.push(ConstraintViolation::MustMake {
                        entity: format!("({}, tier1 {j})", shape.part_id(i)),
                    });
                }
            }
            for &j in chosen {
                if inst.cannot_make_tier1.contains(&(i, j)) {
                    out.push(ConstraintViolation::CannotMake {
                        entity: format!("({}, tier1 {j})", shape.part_id(i)),
                    });
                }
            }
        }
        for (j, b) in inst.tier1_budget.iter().enumerate() {
            let spend = breakdown.per_supplier_spend_tier1[j];
            if !b.contains(spend) {
                out.push(ConstraintViolation::Budget {
                    tier: 1,
                    supplier: j,
                    spend,
                    min: b.min,
                    max: b.max,
                });
            }
        }
    }

    if scope != Scope::Machinist && alloc.has_tier2() {
        for k in 0..inst.forging_count() {
            for j in 0..nj {
                let base = (k * nj + j) * props;
                let chosen: Vec<usize> = alloc.tier2[base..base + props]
                    .iter()
                    .map(|c| c.supplier)
                    .collect();
                let entity = || format!("({}, tier1 {j})", shape.forging_id(k));
                if props == 2 && chosen[0] == chosen[1] {
                    out.push(ConstraintViolation::SameSupplier { entity: entity() });
                }
                for l in inst.must_make_tier2_of(k, j) {
                    if !chosen.contains(&l) {
                        out.push(ConstraintViolation::MustMake {
                            entity: format!("({}, tier1 {j}, tier2 {l})", shape.forging_id(k)),
                        });
                    }
                }
                for &l in &chosen {
                    if inst.cannot_make_tier2.contains(&(k, j, l)) {
                        out.push(ConstraintViolation::CannotMake {
                            entity: format!("({}, tier1 {j}, tier2 {l})", shape.forging_id(k)),
                        });
                    }
                }
            }
        }
        for (l, b) in inst.tier2_budget.iter().enumerate() {
            let spend = breakdown.per_supplier_spend_tier2[l];
            if !b.contains(spend) {
                out.push(ConstraintViolation::Budget {
                    tier: 2,
                    supplier: l,
                    spend,
                    min: b.min,
                    max: b.max,
                });
            }
        }
        for c in &breakdown.consistency_violations {
            out.push(ConstraintViolation::PenaltyLevel {
                entity: format!("({}, tier1 {}, tier2 {})", c.item, c.tier1, c.tier2),
            });
        }
    }
    out
}

/// Human-oriented rows of an allocation, used by reports and the service.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationTable {
    pub tier1: Vec<Tier1Row>,
    pub tier2: Vec<Tier2Row>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tier1Row {
    pub item: ItemId,
    pub proportion: usize,
    pub supplier: usize,
    pub quantity: f64,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tier2Row {
    pub item: ItemId,
    pub tier1: usize,
    pub proportion: usize,
    pub supplier: usize,
    pub level: PenaltyLevel,
    pub quantity: f64,
    pub cost: f64,
}

impl AllocationTable {
    /// Proportions are reported 1-based. Tier2 rows with zero quantity are
    /// left out.
    pub fn build(inst: &SupplyChainInstance, alloc: &Allocation) -> Self {
        let model = CostModel::new(inst);
        let shape = inst.shape;
        let nj = shape.tier1_count;
        let props = inst.proportions();
        let mut tier1 = Vec::new();
        for i in 0..inst.part_count() {
            for p in 0..props {
                let j = alloc.tier1[i * props + p];
                tier1.push(Tier1Row {
                    item: shape.part_id(i),
                    proportion: p + 1,
                    supplier: j,
                    quantity: model.part_quantity(i, p),
                    cost: model.machining_cost(i, j, p),
                });
            }
        }
        let mut tier2 = Vec::new();
        if alloc.has_tier2() {
            let z = model.requirements(&alloc.tier1);
            for k in 0..inst.forging_count() {
                for j in 0..nj {
                    for p in 0..props {
                        let c = alloc.tier2[(k * nj + j) * props + p];
                        let q = z[k * nj + j] * inst.forging_fraction(k, p);
                        if q == 0.0 {
                            continue;
                        }
                        tier2.push(Tier2Row {
                            item: shape.forging_id(k),
                            tier1: j,
                            proportion: p + 1,
                            supplier: c.supplier,
                            level: c.level,
                            quantity: q,
                            cost: model.forging_cost(z[k * nj + j], k, j, c.supplier, c.level, p),
                        });
                    }
                }
            }
        }
        AllocationTable { tier1, tier2 }
    }
}

/// `|a - b| <= MONEY_TOL`, or relative closeness for large totals.
pub fn money_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= MONEY_TOL.max(1e-12 * a.abs().max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Budget, Grid2, Grid3, ItemKind, PenaltyPolicy, ProblemShape, SourcingPolicy};
    use std::collections::BTreeSet;

    /// One blue part (100 units, yield 2 of one forging), two machinists and
    /// two forgers.
    fn one_part(mode: SourcingMode, forging_kind: ItemKind) -> SupplyChainInstance {
        let llv = forging_kind == ItemKind::ForgingLlv;
        let shape = ProblemShape {
            tier1_count: 2,
            tier2_count: 2,
            parts_blue: 1,
            parts_llv: 0,
            forgings_blue: usize::from(!llv),
            forgings_llv: usize::from(llv),
        };
        let mut cbx = Grid2::filled(1, 2, 10.0);
        cbx.set(0, 1, 20.0);
        let ctx = Grid2::filled(1, 2, 2.0);
        let cby = Grid3::filled(1, 2, 2, 4.0);
        let cty = Grid3::filled(1, 2, 2, 1.0);
        SupplyChainInstance {
            shape,
            part_orders: vec![100],
            yields: vec![vec![(0, 2)]],
            machining_unit_cost: cbx,
            machining_transport_cost: ctx,
            forging_unit_cost: cby,
            forging_transport_cost: cty,
            tier1_budget: vec![Budget::LOOSE; 2],
            tier2_budget: vec![Budget::LOOSE; 2],
            must_make_tier1: BTreeSet::new(),
            must_make_tier2: BTreeSet::new(),
            cannot_make_tier1: BTreeSet::new(),
            cannot_make_tier2: BTreeSet::new(),
            penalty: PenaltyPolicy {
                threshold: vec![0.0; 2],
                factor: vec![5.0; 2],
                big_m: None,
                epsilon: 1e-3,
            },
            sourcing: SourcingPolicy {
                mode,
                part_split: vec![0.7],
                forging_split: vec![0.7],
            },
            bid_round: 0,
        }
    }

    const PB0: ItemId = ItemId {
        kind: ItemKind::PartBlue,
        index: 0,
    };

    #[test]
    fn machining_cost_by_mode() {
        let dual = one_part(SourcingMode::Dual, ItemKind::ForgingBlue);
        assert!(money_eq(machining_cost(&dual, PB0, 0, 0).unwrap(), 840.0));
        assert!(money_eq(machining_cost(&dual, PB0, 0, 1).unwrap(), 360.0));
        let single = dual.with_mode(SourcingMode::Single);
        assert!(money_eq(machining_cost(&single, PB0, 0, 0).unwrap(), 1200.0));
        assert!(machining_cost(&single, PB0, 0, 1).is_err());
        let mut zero = single.clone();
        zero.part_orders[0] = 0;
        assert_eq!(machining_cost(&zero, PB0, 1, 0).unwrap(), 0.0);
    }

    #[test]
    fn requirement_follows_tier1_split() {
        let fb0 = ItemId::new(ItemKind::ForgingBlue, 0);
        let single = one_part(SourcingMode::Single, ItemKind::ForgingBlue);
        assert_eq!(forging_requirement(&single, &[1], fb0, 1).unwrap(), 200.0);
        assert_eq!(forging_requirement(&single, &[1], fb0, 0).unwrap(), 0.0);
        let dual = single.with_mode(SourcingMode::Dual);
        assert!(money_eq(forging_requirement(&dual, &[0, 1], fb0, 0).unwrap(), 140.0));
        assert!(money_eq(forging_requirement(&dual, &[0, 1], fb0, 1).unwrap(), 60.0));
    }

    #[test]
    fn zero_yield_contributes_nothing() {
        let mut inst = one_part(SourcingMode::Single, ItemKind::ForgingBlue);
        inst.shape.forgings_blue = 2;
        inst.forging_unit_cost = Grid3::filled(2, 2, 2, 4.0);
        inst.forging_transport_cost = Grid3::filled(2, 2, 2, 1.0);
        inst.sourcing.forging_split = vec![0.7; 2];
        let fb1 = ItemId::new(ItemKind::ForgingBlue, 1);
        assert_eq!(forging_requirement(&inst, &[0], fb1, 0).unwrap(), 0.0);
    }

    #[test]
    fn forging_cost_blue_and_llv() {
        // Z = 200 at machinist 0 under single sourcing of the part
        let blue = one_part(SourcingMode::Dual, ItemKind::ForgingBlue).with_mode(SourcingMode::Dual);
        // dual part split 70:30 to (0, 0) is not allowed by the model, but the
        // cost function itself only needs the requirement
        let fb0 = ItemId::new(ItemKind::ForgingBlue, 0);
        let z = forging_requirement(&blue, &[0, 0], fb0, 0).unwrap();
        assert!(money_eq(z, 200.0));
        let c = forging_cost(&blue, &[0, 0], fb0, 0, 1, PenaltyLevel::Base, 0).unwrap();
        assert!(money_eq(c, 700.0));

        let llv = one_part(SourcingMode::Dual, ItemKind::ForgingLlv);
        let fl0 = ItemId::new(ItemKind::ForgingLlv, 0);
        let pen = forging_cost(&llv, &[0, 0], fl0, 0, 1, PenaltyLevel::Penalized, 0).unwrap();
        assert!(money_eq(pen, 2940.0));
        let base = forging_cost(&llv, &[0, 0], fl0, 0, 1, PenaltyLevel::Base, 0).unwrap();
        assert!(money_eq(base, 700.0));
        assert!(forging_cost(&blue, &[0, 0], fb0, 0, 1, PenaltyLevel::Penalized, 0).is_err());
    }

    #[test]
    fn evaluate_matches_hand_sum() {
        let inst = one_part(SourcingMode::Single, ItemKind::ForgingBlue);
        let alloc = Allocation {
            mode: SourcingMode::Single,
            tier1: vec![1],
            tier2: vec![Tier2Choice::base(0), Tier2Choice::base(1)],
        };
        let b = evaluate(&inst, &alloc).unwrap();
        // (20 + 2) * 100 + (4 + 1) * 200
        assert!(money_eq(b.total, 2200.0 + 1000.0));
        assert!(money_eq(b.per_supplier_spend_tier1[1], 2200.0));
        assert!(money_eq(b.per_supplier_blue_forging_spend_tier2[1], 1000.0));
        assert_eq!(b.per_supplier_blue_forging_spend_tier2[0], 0.0);
        assert!(b.consistency_violations.is_empty());
    }

    #[test]
    fn zero_orders_set_every_flag_with_positive_thresholds() {
        let mut inst = one_part(SourcingMode::Single, ItemKind::ForgingBlue);
        inst.part_orders[0] = 0;
        inst.penalty.threshold = vec![10.0, 0.0];
        let alloc = Allocation {
            mode: SourcingMode::Single,
            tier1: vec![0],
            tier2: vec![Tier2Choice::base(0), Tier2Choice::base(0)],
        };
        let b = evaluate(&inst, &alloc).unwrap();
        assert_eq!(b.total, 0.0);
        assert_eq!(b.penalty_flags, vec![true, false]);
    }

    #[test]
    fn penalty_level_mismatch_is_reported() {
        let mut inst = one_part(SourcingMode::Single, ItemKind::ForgingLlv);
        inst.penalty.threshold = vec![0.0, 0.0];
        let mut alloc = Allocation {
            mode: SourcingMode::Single,
            tier1: vec![0],
            tier2: vec![
                Tier2Choice {
                    supplier: 1,
                    level: PenaltyLevel::Penalized,
                },
                Tier2Choice::base(0),
            ],
        };
        let b = evaluate(&inst, &alloc).unwrap();
        assert_eq!(b.consistency_violations.len(), 1);
        assert!(!b.consistency_violations[0].flagged);
        derive_penalty_levels(&CostModel::new(&inst), &mut alloc);
        let fixed = evaluate(&inst, &alloc).unwrap();
        assert!(fixed.consistency_violations.is_empty());
        assert!(fixed.total < b.total);
    }

    #[test]
    fn incomplete_allocations_are_errors() {
        let inst = one_part(SourcingMode::Dual, ItemKind::ForgingBlue);
        let short = Allocation {
            mode: SourcingMode::Dual,
            tier1: vec![0],
            tier2: vec![],
        };
        assert!(matches!(evaluate(&inst, &short), Err(CostError::Incomplete(_))));
        let wrong_mode = Allocation {
            mode: SourcingMode::Single,
            tier1: vec![0],
            tier2: vec![],
        };
        assert!(matches!(
            evaluate(&inst, &wrong_mode),
            Err(CostError::ModeMismatch { .. })
        ));
    }
}
