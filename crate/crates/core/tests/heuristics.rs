mod common;

use std::time::Instant;

use ssoa_core::costs::{check_constraints, evaluate, money_eq, ConstraintViolation};
use ssoa_core::exact::{brute_force, SolveReport, SolveStatus};
use ssoa_core::heuristics::{
    aco_run_with_colony, aco_solve, ga_solve, pso_solve, AcoParams, ConvergenceTrace, GaParams, HeuristicError,
    Problem, PsoParams, RunOptions,
};
use ssoa_core::instance::{CountsPerKind, GeneratorConfig, Range};
use ssoa_core::milp::ModelKind;
use ssoa_core::{generate_instance, ProblemShape, SourcingMode, SupplyChainInstance};

type Run = Box<dyn Fn(&Problem<'_>, &RunOptions) -> Result<(SolveReport, ConvergenceTrace), HeuristicError>>;

fn solvers() -> Vec<(&'static str, Run)> {
    vec![
        (
            "ga",
            Box::new(|p: &Problem<'_>, o: &RunOptions| {
                ga_solve(p, &GaParams { population: 30, generations: 40, ..Default::default() }, o)
            }),
        ),
        (
            "pso",
            Box::new(|p: &Problem<'_>, o: &RunOptions| {
                pso_solve(p, &PsoParams { swarm: 30, iterations: 40, ..Default::default() }, o)
            }),
        ),
        (
            "aco",
            Box::new(|p: &Problem<'_>, o: &RunOptions| {
                aco_solve(p, &AcoParams { ants: 20, iterations: 20, ..Default::default() }, o)
            }),
        ),
    ]
}

fn two_machinists(costs: [f64; 2]) -> SupplyChainInstance {
    let mut inst = generate_instance(&GeneratorConfig {
        shape: ProblemShape {
            tier1_count: 2,
            tier2_count: 2,
            parts_blue: 1,
            parts_llv: 0,
            forgings_blue: 1,
            forgings_llv: 0,
        },
        forgings_per_part: Range::new(1, 1),
        must_make: CountsPerKind::default(),
        machining_transport_cost: Range::new(0.0, 0.0),
        penalty_threshold: 0.0,
        sourcing_mode: SourcingMode::Single,
        seed: 5,
        ..Default::default()
    })
    .unwrap();
    inst.machining_unit_cost.set(0, 0, costs[0]);
    inst.machining_unit_cost.set(0, 1, costs[1]);
    inst
}

#[test]
fn aco_concentrates_on_the_cheap_machinist() {
    let inst = two_machinists([10.0, 1000.0]);
    let pr = Problem::new(&inst, ModelKind::Machinist, None).unwrap();
    let params = AcoParams {
        ants: 20,
        iterations: 50,
        deposit: 1e7,
        ..Default::default()
    };
    let (rep, _, colony) = aco_run_with_colony(&pr, &params, &RunOptions::with_seed(3)).unwrap();
    let p = &colony.prob[colony.slot(0)];
    assert!(p[0] > 0.9, "selection probabilities {p:?}");
    assert_eq!(rep.allocation.unwrap().tier1, vec![0]);
}

#[test]
fn reported_solutions_are_feasible_and_costed_exactly() {
    for f in common::corpus().iter().step_by(2) {
        let inst = &f.inst;
        let Some(opt) = brute_force(inst, ModelKind::Machinist, inst.mode(), None).unwrap().allocation else {
            continue;
        };
        for (kind, tier1) in [
            (ModelKind::Machinist, None),
            (ModelKind::Forger, Some(opt.tier1.as_slice())),
            (ModelKind::Integrated, None),
        ] {
            let pr = Problem::new(inst, kind, tier1).unwrap();
            for (name, run) in solvers() {
                let (rep, trace) = run(&pr, &RunOptions::with_seed(9)).unwrap();
                assert_eq!(rep.status, SolveStatus::Feasible, "{} {kind} {name}", f.name);
                let alloc = rep.allocation.expect("feasible run");
                let b = evaluate(inst, &alloc).unwrap();
                assert!(money_eq(rep.objective.unwrap(), b.scope_total(pr.scope)), "{} {kind} {name}", f.name);
                let hard: Vec<_> = check_constraints(inst, &alloc, &b, pr.scope)
                    .into_iter()
                    .filter(|v| !matches!(v, ConstraintViolation::CannotMake { .. }))
                    .collect();
                assert!(hard.is_empty(), "{} {kind} {name}: {hard:?}", f.name);
                assert_eq!(trace.final_best(), rep.objective);
                assert!(trace.points.windows(2).all(|w| w[1].best <= w[0].best));
            }
        }
    }
}

#[test]
fn relative_cost_uses_the_reference() {
    let inst = &common::corpus()[0].inst;
    let pr = Problem::new(inst, ModelKind::Machinist, None).unwrap();
    let opts = RunOptions {
        reference: Some(1000.0),
        ..RunOptions::with_seed(1)
    };
    for (name, run) in solvers() {
        let (_, trace) = run(&pr, &opts).unwrap();
        for p in &trace.points {
            assert_eq!(p.relative, Some(p.best / 1000.0), "{name}");
        }
        assert!(trace.to_csv().starts_with("iter,best,relative\n"));
    }
}

#[test]
fn time_limit_stops_long_runs() {
    let inst = &common::corpus()[0].inst;
    let pr = Problem::new(inst, ModelKind::Integrated, None).unwrap();
    let opts = RunOptions {
        time_limit: Some(0.2),
        ..RunOptions::with_seed(1)
    };
    let t0 = Instant::now();
    ga_solve(&pr, &GaParams::default(), &opts).unwrap();
    pso_solve(&pr, &PsoParams::default(), &opts).unwrap();
    aco_solve(&pr, &AcoParams::default(), &opts).unwrap();
    assert!(t0.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn invalid_parameters_are_rejected() {
    let inst = &common::corpus()[0].inst;
    let pr = Problem::new(inst, ModelKind::Machinist, None).unwrap();
    let o = RunOptions::default();
    let bad_ga = [
        GaParams { population: 0, ..Default::default() },
        GaParams { crossover_prob: 1.5, ..Default::default() },
        GaParams { tournament_size: 0, ..Default::default() },
    ];
    for p in bad_ga {
        assert!(matches!(ga_solve(&pr, &p, &o), Err(HeuristicError::InvalidParams(_))), "{p:?}");
    }
    let p = PsoParams { swarm: 0, ..Default::default() };
    assert!(matches!(pso_solve(&pr, &p, &o), Err(HeuristicError::InvalidParams(_))));
    for p in [
        AcoParams { evaporation: 1.5, ..Default::default() },
        AcoParams { ants: 0, ..Default::default() },
    ] {
        assert!(matches!(aco_solve(&pr, &p, &o), Err(HeuristicError::InvalidParams(_))), "{p:?}");
    }
}

#[test]
fn forger_problem_needs_tier1() {
    let inst = &common::corpus()[0].inst;
    assert!(matches!(
        Problem::new(inst, ModelKind::Forger, None),
        Err(HeuristicError::Tier1(_))
    ));
}
