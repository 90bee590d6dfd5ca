use serde::{Deserialize, Serialize};

use super::{SourcingMode, SupplyChainInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Dimension,
    NonNegative,
    Disjoint,
    Eligibility,
    Yield,
    Penalty,
    Sourcing,
    Budget,
}

/// A broken instance invariant, naming the offending entity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub entity: String,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} [{}]: {}", self.rule, self.entity, self.detail)
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, rule: Rule, entity: impl Into<String>, detail: impl Into<String>) {
        self.0.push(Violation {
            rule,
            entity: entity.into(),
            detail: detail.into(),
        });
    }
}

fn bad_money(x: f64) -> bool {
    !x.is_finite() || x < 0.0
}

/// Checks every instance invariant. Returns an empty list iff the instance
/// is well formed.
pub fn validate_instance(inst: &SupplyChainInstance) -> Vec<Violation> {
    let mut v = Collector(Vec::new());
    let s = inst.shape;
    let (nj, nl) = (s.tier1_count, s.tier2_count);
    let np = s.part_count();
    let nf = s.forging_count();

    // Dimension problems make the remaining checks meaningless.
    let dims = [
        ("part_orders", inst.part_orders.len(), np),
        ("yield", inst.yields.len(), np),
        ("machining_unit_cost", inst.machining_unit_cost.data.len(), np * nj),
        ("machining_transport_cost", inst.machining_transport_cost.data.len(), np * nj),
        ("forging_unit_cost", inst.forging_unit_cost.data.len(), nf * nj * nl),
        ("forging_transport_cost", inst.forging_transport_cost.data.len(), nf * nj * nl),
        ("tier1_budget", inst.tier1_budget.len(), nj),
        ("tier2_budget", inst.tier2_budget.len(), nl),
        ("penalty.threshold", inst.penalty.threshold.len(), nl),
        ("penalty.factor", inst.penalty.factor.len(), nl),
        ("sourcing.part_split", inst.sourcing.part_split.len(), np),
        ("sourcing.forging_split", inst.sourcing.forging_split.len(), nf),
    ];
    for (name, found, expected) in dims {
        if found != expected {
            v.push(
                Rule::Dimension,
                name,
                format!("expected {expected} entries, found {found}"),
            );
        }
    }
    let oob1 = inst
        .must_make_tier1
        .iter()
        .chain(&inst.cannot_make_tier1)
        .any(|&(i, j)| i >= np || j >= nj);
    let oob2 = inst
        .must_make_tier2
        .iter()
        .chain(&inst.cannot_make_tier2)
        .any(|&(k, j, l)| k >= nf || j >= nj || l >= nl);
    if oob1 || oob2 {
        v.push(Rule::Dimension, "must/cannot-make sets", "index out of range");
    }
    if !v.0.is_empty() {
        return v.0;
    }

    for i in 0..np {
        for j in 0..nj {
            for (table, c) in [
                ("machining_unit_cost", inst.machining_unit_cost.get(i, j)),
                ("machining_transport_cost", inst.machining_transport_cost.get(i, j)),
            ] {
                if bad_money(c) {
                    v.push(
                        Rule::NonNegative,
                        format!("{table}[{}][{j}]", s.part_id(i)),
                        format!("cost {c} must be finite and >= 0"),
                    );
                }
            }
        }
    }
    for k in 0..nf {
        for j in 0..nj {
            for l in 0..nl {
                for (table, c) in [
                    ("forging_unit_cost", inst.forging_unit_cost.get(k, j, l)),
                    ("forging_transport_cost", inst.forging_transport_cost.get(k, j, l)),
                ] {
                    if bad_money(c) {
                        v.push(
                            Rule::NonNegative,
                            format!("{table}[{}][{j}][{l}]", s.forging_id(k)),
                            format!("cost {c} must be finite and >= 0"),
                        );
                    }
                }
            }
        }
    }

    for (tier, budgets) in [("tier1", &inst.tier1_budget), ("tier2", &inst.tier2_budget)] {
        for (n, b) in budgets.iter().enumerate() {
            if bad_money(b.min) || b.max.is_nan() || b.max < b.min {
                v.push(
                    Rule::Budget,
                    format!("{tier}_budget[{n}]"),
                    format!("invalid budget [{}, {}]", b.min, b.max),
                );
            }
        }
    }

    for pair in inst.must_make_tier1.intersection(&inst.cannot_make_tier1) {
        v.push(
            Rule::Disjoint,
            format!("({}, tier1 {})", s.part_id(pair.0), pair.1),
            "pair is both must-make and cannot-make",
        );
    }
    for t in inst.must_make_tier2.intersection(&inst.cannot_make_tier2) {
        v.push(
            Rule::Disjoint,
            format!("({}, tier1 {}, tier2 {})", s.forging_id(t.0), t.1, t.2),
            "triple is both must-make and cannot-make",
        );
    }

    let need = inst.sourcing.mode.proportions();
    for i in 0..np {
        let eligible = inst.eligible_tier1(i).len();
        if eligible < need {
            v.push(
                Rule::Eligibility,
                s.part_id(i).to_string(),
                format!("{eligible} eligible Tier1 suppliers, {need} required"),
            );
        }
    }
    for k in 0..nf {
        for j in 0..nj {
            let eligible = inst.eligible_tier2(k, j).len();
            if eligible < need {
                v.push(
                    Rule::Eligibility,
                    format!("({}, tier1 {j})", s.forging_id(k)),
                    format!("{eligible} eligible Tier2 suppliers, {need} required"),
                );
            }
        }
    }

    for (i, links) in inst.yields.iter().enumerate() {
        if links.iter().any(|&(k, _)| k >= nf) {
            v.push(Rule::Yield, s.part_id(i).to_string(), "yield refers to an unknown forging");
        } else if !links.iter().any(|&(_, y)| y >= 1) {
            v.push(Rule::Yield, s.part_id(i).to_string(), "part consumes no forging");
        }
    }

    let p = &inst.penalty;
    for l in 0..nl {
        if !(p.factor[l].is_finite() && p.factor[l] > 1.0) {
            v.push(
                Rule::Penalty,
                format!("penalty.factor[{l}]"),
                format!("factor {} must exceed 1", p.factor[l]),
            );
        }
        if bad_money(p.threshold[l]) {
            v.push(
                Rule::Penalty,
                format!("penalty.threshold[{l}]"),
                format!("threshold {} must be finite and >= 0", p.threshold[l]),
            );
        }
    }
    if !(p.epsilon.is_finite() && p.epsilon > 0.0) {
        v.push(Rule::Penalty, "penalty.epsilon", "epsilon must be > 0");
    }
    if let Some(m) = p.big_m {
        if !(m.is_finite() && m > 0.0) {
            v.push(Rule::Penalty, "penalty.big_m", "big-M must be finite and > 0");
        }
    }

    if inst.sourcing.mode == SourcingMode::Dual {
        for (i, &sp) in inst.sourcing.part_split.iter().enumerate() {
            if !(sp > 0.0 && sp < 1.0) {
                v.push(
                    Rule::Sourcing,
                    format!("sourcing.part_split[{}]", s.part_id(i)),
                    format!("split {sp} outside (0, 1)"),
                );
            }
        }
        for (k, &sp) in inst.sourcing.forging_split.iter().enumerate() {
            if !(sp > 0.0 && sp < 1.0) {
                v.push(
                    Rule::Sourcing,
                    format!("sourcing.forging_split[{}]", s.forging_id(k)),
                    format!("split {sp} outside (0, 1)"),
                );
            }
        }
    }

    v.0
}
