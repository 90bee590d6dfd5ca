//! A hand-written 2x2 instance whose optimum is worked out below, and the
//! golden LP text of its machinist model.
//!
//! Machining: PB0 costs 100*(10+1)=1100 at j0 vs 1300 at j1; PL0 costs
//! 50*(20+2)=1100 at j0 vs 850 at j1, so the machinist optimum is 1950.
//! Forging: FB0 needs 2*100=200 units at j0, 1.5*200=300 at k0 or 500 at
//! k1. FL0 needs 50 units at j1: 150 at k0, or 100 at k1 if k1 reaches its
//! blue threshold of 100, else 200. Cheapest is everything at k0: 450,
//! so the integrated optimum is 2400.

use ssoa_core::exact::{brute_force, solve_bb, SolveLimits, SolveStatus};
use ssoa_core::milp::{build_machinist, build_model, export_model, read_lp, BuildOptions, ExportFormat, ModelKind};
use ssoa_core::{evaluate, load_instance, save_instance, validate_instance, SourcingMode};

const DOC: &str = include_str!("fixtures/tiny_2x2.json");
const LP: &str = "tests/fixtures/tiny_2x2_machinist.lp";

#[test]
fn hand_written_instance_loads_and_validates() {
    let inst = load_instance(DOC).unwrap();
    assert!(validate_instance(&inst).is_empty(), "{:?}", validate_instance(&inst));
    assert_eq!(load_instance(&save_instance(&inst)).unwrap(), inst);
}

#[test]
fn hand_computed_optima() {
    let inst = load_instance(DOC).unwrap();
    let opts = BuildOptions::default();
    let m = solve_bb(&inst, &build_machinist(&inst, &opts).unwrap(), &SolveLimits::default()).unwrap();
    assert_eq!(m.status, SolveStatus::Optimal);
    assert!((m.objective.unwrap() - 1950.0).abs() < 1e-6);
    assert_eq!(m.allocation.as_ref().unwrap().tier1, vec![0, 1]);

    let il = build_model(&inst, ModelKind::IntegratedLinearized, None, &opts).unwrap();
    let r = solve_bb(&inst, &il, &SolveLimits::default()).unwrap();
    assert!((r.objective.unwrap() - 2400.0).abs() < 1e-6, "{:?}", r.objective);
    let b = evaluate(&inst, r.allocation.as_ref().unwrap()).unwrap();
    assert!((b.forging_total() - 450.0).abs() < 1e-6);
    // k1 wins no blue-chip work and is flagged, but sells nothing
    assert_eq!(b.penalty_flags, vec![false, true]);
    let oracle = brute_force(&inst, ModelKind::IntegratedLinearized, SourcingMode::Single, None).unwrap();
    assert!((oracle.objective.unwrap() - 2400.0).abs() < 1e-6);
}

#[test]
fn machinist_lp_matches_the_golden_file() {
    let inst = load_instance(DOC).unwrap();
    let model = build_machinist(&inst, &BuildOptions::default()).unwrap();
    let text = export_model(&model, ExportFormat::Lp).unwrap();
    let golden = std::fs::read_to_string(LP).expect("golden LP file");
    assert_eq!(text, golden);

    let parsed = read_lp(&golden).unwrap();
    assert_eq!(parsed.variables.len(), 4);
    let binaries = golden
        .split("Binaries")
        .nth(1)
        .expect("binary section")
        .split_whitespace()
        .take_while(|w| *w != "End")
        .count();
    assert_eq!(binaries, 4);
    // every row is named
    assert!(parsed.constraints.iter().all(|c| !c.label.is_empty()));
}
