use serde::{Deserialize, Serialize};

use crate::instance::{ProblemShape, SourcingMode, SupplyChainInstance};

use super::model::ModelKind;

/// Variable totals per family, plus the chromosome length the
/// meta-heuristics use for the same problem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableCount {
    pub x: usize,
    pub y_blue: usize,
    pub y_llv: usize,
    pub v: usize,
    pub u: usize,
    pub total: usize,
    pub ga_genes: usize,
}

/// Number of `(part, forging)` pairs with a nonzero yield, split by the
/// forging's kind. Only the linearized integrated model depends on it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct YieldLinks {
    pub blue: usize,
    pub llv: usize,
}

impl YieldLinks {
    pub fn of(inst: &SupplyChainInstance) -> Self {
        let mut out = YieldLinks::default();
        for links in &inst.yields {
            for &(k, _) in links {
                if inst.shape.is_llv_forging(k) {
                    out.llv += 1;
                } else {
                    out.blue += 1;
                }
            }
        }
        out
    }
}

/// Closed-form variable counts; nothing is built.
pub fn count_variables(inst: &SupplyChainInstance, kind: ModelKind, mode: SourcingMode) -> VariableCount {
    count_variables_for_shape(&inst.shape, YieldLinks::of(inst), kind, mode)
}

pub fn count_variables_for_shape(
    shape: &ProblemShape,
    links: YieldLinks,
    kind: ModelKind,
    mode: SourcingMode,
) -> VariableCount {
    let p = mode.proportions();
    let (nj, nl) = (shape.tier1_count, shape.tier2_count);
    let tier1 = matches!(
        kind,
        ModelKind::Machinist | ModelKind::Integrated | ModelKind::IntegratedLinearized
    );
    let tier2 = kind != ModelKind::Machinist;
    let mut c = VariableCount::default();
    if tier1 {
        c.x = shape.part_count() * nj * p;
        c.ga_genes += shape.part_count() * p;
    }
    if tier2 {
        c.y_blue = shape.forgings_blue * nj * nl * p;
        c.y_llv = shape.forgings_llv * nj * nl * 2 * p;
        c.v = nl;
        c.ga_genes += shape.forging_count() * nj * p;
    }
    if kind == ModelKind::IntegratedLinearized {
        c.u = (links.blue + 2 * links.llv) * nj * nl * p * p;
    }
    c.total = c.x + c.y_blue + c.y_llv + c.v + c.u;
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_item_shape_counts_only_penalty_indicators() {
        let shape = ProblemShape {
            tier1_count: 3,
            tier2_count: 4,
            parts_blue: 0,
            parts_llv: 0,
            forgings_blue: 0,
            forgings_llv: 0,
        };
        let c = count_variables_for_shape(&shape, YieldLinks::default(), ModelKind::Integrated, SourcingMode::Dual);
        assert_eq!((c.x, c.y_blue, c.y_llv, c.v, c.total), (0, 0, 0, 4, 4));
    }

    #[test]
    fn total_is_sum_of_families() {
        let shape = ProblemShape {
            tier1_count: 2,
            tier2_count: 3,
            parts_blue: 2,
            parts_llv: 1,
            forgings_blue: 1,
            forgings_llv: 2,
        };
        let links = YieldLinks { blue: 2, llv: 3 };
        for kind in [
            ModelKind::Machinist,
            ModelKind::Forger,
            ModelKind::Integrated,
            ModelKind::IntegratedLinearized,
        ] {
            for mode in [SourcingMode::Single, SourcingMode::Dual] {
                let c = count_variables_for_shape(&shape, links, kind, mode);
                assert_eq!(c.total, c.x + c.y_blue + c.y_llv + c.v + c.u);
            }
        }
    }
}
