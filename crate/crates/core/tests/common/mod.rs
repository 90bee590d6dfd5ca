//! Tiny instance corpus shared by the integration tests.
#![allow(dead_code)]

use ssoa_core::instance::{Budget, CountsPerKind, GeneratorConfig, Range};
use ssoa_core::costs::evaluate;
use ssoa_core::exact::brute_force;
use ssoa_core::milp::ModelKind;
use ssoa_core::{generate_instance, ProblemShape, SourcingMode, SupplyChainInstance};

pub struct Fixture {
    pub name: String,
    pub inst: SupplyChainInstance,
    /// No must-make, slack budgets and no penalty threshold.
    pub unconstrained: bool,
    /// Some forger threshold can be missed.
    pub penalty_active: bool,
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

fn base(shape: ProblemShape, mode: SourcingMode, seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        shape,
        forgings_per_part: Range::new(1, 2),
        must_make: CountsPerKind::default(),
        sourcing_mode: mode,
        seed,
        ..Default::default()
    }
}

/// Machining prices nearly flat across machinists and forging prices that
/// vary a lot with the machinist: the sequential approach tends to pick a
/// machinist whose forgings are expensive.
fn forging_heavy(mut c: GeneratorConfig) -> GeneratorConfig {
    c.machining_unit_cost = Range::new(100.0, 104.0);
    c.machining_transport_cost = Range::new(1.0, 2.0);
    c.forging_unit_cost = Range::new(1.0, 60.0);
    c.forging_transport_cost = Range::new(1.0, 20.0);
    c
}

fn fixture(name: &str, c: GeneratorConfig) -> Fixture {
    let inst = generate_instance(&c).unwrap_or_else(|e| panic!("{name}: {e}"));
    let unconstrained = inst.must_make_tier1.is_empty()
        && inst.must_make_tier2.is_empty()
        && c.tier1_budget == Budget::LOOSE
        && c.tier2_budget == Budget::LOOSE
        && c.penalty_threshold == 0.0;
    Fixture {
        name: name.to_string(),
        inst,
        unconstrained,
        penalty_active: c.penalty_threshold > 0.0,
    }
}

/// At least 25 instances with at most 3 suppliers per tier and 4 items per
/// kind, mixing sourcing modes, must-make, cannot-make, budgets and penalty
/// thresholds. Sizes are chosen so full enumeration of the integrated
/// problem stays small.
pub fn corpus() -> Vec<Fixture> {
    use SourcingMode::{Dual, Single};
    let mut out = Vec::new();
    let add = |out: &mut Vec<Fixture>, name: &str, c: GeneratorConfig| out.push(fixture(name, c));

    // plain, no penalty
    for (n, seed) in [(0, 101), (1, 102)] {
        let mut c = base(shape(2, 2, 2, 1, 1, 1), Single, seed);
        c.penalty_threshold = 0.0;
        add(&mut out, &format!("plain-single-{n}"), c);
        let mut c = base(shape(2, 2, 2, 1, 1, 1), Dual, seed + 10);
        c.penalty_threshold = 0.0;
        add(&mut out, &format!("plain-dual-{n}"), c);
    }
    // thresholds around typical blue spend
    for (n, threshold) in [1000.0, 3000.0, 8000.0].into_iter().enumerate() {
        let mut c = base(shape(2, 3, 1, 1, 1, 1), Single, 200 + n as u64);
        c.penalty_threshold = threshold;
        add(&mut out, &format!("penalty-single-{n}"), c);
        let mut c = base(shape(3, 2, 1, 1, 1, 1), Dual, 210 + n as u64);
        c.penalty_threshold = threshold;
        add(&mut out, &format!("penalty-dual-{n}"), c);
    }
    // must-make on both tiers
    for n in 0..3u64 {
        let mut c = base(shape(3, 2, 2, 1, 1, 1), Single, 300 + n);
        c.must_make = CountsPerKind {
            tier1_blue: 1,
            tier1_llv: 1,
            tier2_blue: 1,
            tier2_llv: 1,
        };
        add(&mut out, &format!("must-single-{n}"), c);
        let mut c = base(shape(3, 2, 1, 1, 1, 1), Dual, 310 + n);
        c.must_make = CountsPerKind::uniform(1);
        add(&mut out, &format!("must-dual-{n}"), c);
    }
    // cannot-make priced prohibitively
    for n in 0..2u64 {
        let mut c = base(shape(3, 2, 2, 1, 1, 1), Single, 400 + n);
        c.cannot_make = CountsPerKind::uniform(1);
        add(&mut out, &format!("cannot-single-{n}"), c);
        let mut c = base(shape(3, 3, 1, 1, 1, 0), Dual, 410 + n);
        c.cannot_make = CountsPerKind {
            tier1_blue: 1,
            tier1_llv: 1,
            tier2_blue: 2,
            tier2_llv: 0,
        };
        add(&mut out, &format!("cannot-dual-{n}"), c);
    }
    // binding budgets: cap the busiest machinist below its unconstrained spend
    for n in 0..2u64 {
        let c = base(shape(2, 2, 3, 0, 1, 1), Single, 500 + n);
        let mut f = fixture(&format!("budget-single-{n}"), c);
        bind_tier1_budget(&mut f.inst);
        f.unconstrained = false;
        out.push(f);
    }
    // forging-heavy pricing, where sequential solving loses
    for n in 0..4u64 {
        let mode = if n % 2 == 0 { Single } else { Dual };
        let s = if mode == Single {
            shape(3, 2, 2, 1, 1, 1)
        } else {
            shape(3, 2, 1, 1, 1, 1)
        };
        let mut c = forging_heavy(base(s, mode, 600 + n));
        c.penalty_threshold = if n < 2 { 0.0 } else { 2000.0 };
        add(&mut out, &format!("forging-heavy-{n}"), c);
    }
    // a few more shapes at the size limits of one dimension
    let unpenalized = |mut c: GeneratorConfig| {
        c.penalty_threshold = 0.0;
        c
    };
    add(&mut out, "wide-parts-single", unpenalized(base(shape(2, 2, 2, 2, 1, 1), Single, 700)));
    add(&mut out, "wide-forgings-single", unpenalized(base(shape(2, 2, 1, 1, 2, 2), Single, 701)));
    add(&mut out, "three-by-three-single", unpenalized(base(shape(3, 3, 1, 1, 1, 1), Single, 702)));
    out
}

/// Lowers the budget cap of the machinist with the largest spend in the
/// unconstrained machinist optimum until that optimum is cut off, keeping
/// the instance feasible.
fn bind_tier1_budget(inst: &mut SupplyChainInstance) {
    let solve = |inst: &SupplyChainInstance| {
        brute_force(inst, ModelKind::Machinist, inst.mode(), None).expect("small instance")
    };
    let free = solve(inst);
    let alloc = free.allocation.expect("feasible without budgets");
    let spend = evaluate(inst, &alloc).expect("feasible").per_supplier_spend_tier1;
    let (j, &top) = spend
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one machinist");
    for factor in [0.5, 0.7, 0.8, 0.9, 0.95, 0.99] {
        let mut trial = inst.clone();
        trial.tier1_budget[j].max = top * factor;
        if solve(&trial).objective.is_some() {
            *inst = trial;
            return;
        }
    }
    panic!("no binding yet feasible cap");
}

/// One part and two machinists, where the part must be made by the dearer
/// one: single sourcing pays the high price on the whole order, while a
/// split can give the must-make supplier only the small share.
pub fn must_make_dual_wins() -> SupplyChainInstance {
    let mut inst = generate_instance(&GeneratorConfig {
        shape: shape(2, 2, 1, 0, 1, 0),
        forgings_per_part: Range::new(1, 1),
        must_make: CountsPerKind::default(),
        penalty_threshold: 0.0,
        sourcing_mode: SourcingMode::Dual,
        split: 0.9,
        seed: 900,
        ..Default::default()
    })
    .expect("valid fixture");
    inst.machining_unit_cost.set(0, 0, 10.0);
    inst.machining_unit_cost.set(0, 1, 1000.0);
    inst.must_make_tier1.insert((0, 1));
    inst
}
