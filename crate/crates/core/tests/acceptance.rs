//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines appear in order on stdout; exits non-zero if any
//! criterion fails.

mod common;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::Fixture;
use ssoa_core::analysis::{sweep_penalty, sweep_sourcing, PenaltyAxis, SplitRatio};
use ssoa_core::costs::{evaluate, money_eq};
use ssoa_core::exact::{brute_force, solve_bb, solve_model, solve_two_phase, SolveLimits, SolveReport};
use ssoa_core::heuristics::{
    aco_solve, ga_solve, pso_solve, repair, tune, AcoParams, Algorithm, GaParams, ParamSet, Problem, PsoParams,
    RunOptions,
};
use ssoa_core::instance::PenaltyLevel;
use ssoa_core::milp::{
    build_forger, build_integrated_linearized, build_machinist, count_variables_for_shape, encode_allocation,
    export_model, import_model, BuildOptions, ExportFormat, LinearModel, ModelKind, ParsedModel, VarTag, YieldLinks,
};
use ssoa_core::solver::SolverChoice;
use ssoa_core::{generate_instance, save_instance, GeneratorConfig, ProblemShape, SourcingMode, SupplyChainInstance};

type Check = fn(&[Fixture]) -> Result<String, String>;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn integrated_optimum(inst: &SupplyChainInstance) -> Result<f64, String> {
    brute_force(inst, ModelKind::IntegratedLinearized, inst.mode(), None)
        .map_err(|e| e.to_string())?
        .objective
        .ok_or_else(|| "integrated problem infeasible".into())
}

fn variable_accounting(_: &[Fixture]) -> Result<String, String> {
    use ModelKind::*;
    use SourcingMode::*;
    let t0 = Instant::now();
    let shape = ProblemShape::full_scale();
    let expected = [
        (Machinist, Single, 100_000, 2_000),
        (Machinist, Dual, 200_000, 4_000),
        (Forger, Single, 3_500_020, 150_000),
        (Forger, Dual, 7_000_020, 300_000),
        (Integrated, Single, 3_600_020, 152_000),
        (Integrated, Dual, 7_200_020, 304_000),
    ];
    for (kind, mode, mp, ga) in expected {
        let c = count_variables_for_shape(&shape, YieldLinks::default(), kind, mode);
        ensure(c.total == mp && c.ga_genes == ga, || {
            format!("{kind} {mode:?}: {} / {} instead of {mp} / {ga}", c.total, c.ga_genes)
        })?;
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure(secs < 1.0, || format!("took {secs:.3}s"))?;
    Ok("12 of 12 entries exact".into())
}

fn oracle_equivalence(corpus: &[Fixture]) -> Result<String, String> {
    let t0 = Instant::now();
    let limits = SolveLimits::default();
    let opts = BuildOptions::default();
    let mut compared = 0;
    let cmp = |what: &str, bb: &SolveReport, bf: &SolveReport| -> Result<(), String> {
        ensure(bb.status == bf.status, || format!("{what}: {:?} vs {:?}", bb.status, bf.status))?;
        if let (Some(a), Some(b)) = (bb.objective, bf.objective) {
            ensure(rel_close(a, b, 1e-6), || format!("{what}: bb {a} vs brute {b}"))?;
        }
        Ok(())
    };
    for f in corpus {
        for mode in [SourcingMode::Single, SourcingMode::Dual] {
            let inst = f.inst.with_mode(mode);
            let m = build_machinist(&inst, &opts).map_err(|e| e.to_string())?;
            let bb = solve_bb(&inst, &m, &limits).map_err(|e| e.to_string())?;
            let bf = brute_force(&inst, ModelKind::Machinist, mode, None).map_err(|e| e.to_string())?;
            cmp(&format!("{} M_{mode:?}", f.name), &bb, &bf)?;
            compared += 1;
            let Some(a) = bf.allocation else { continue };
            let m = build_forger(&inst, &a.tier1, &opts).map_err(|e| e.to_string())?;
            let bb = solve_bb(&inst, &m, &limits).map_err(|e| e.to_string())?;
            let bf = brute_force(&inst, ModelKind::Forger, mode, Some(&a.tier1)).map_err(|e| e.to_string())?;
            cmp(&format!("{} F_{mode:?}", f.name), &bb, &bf)?;
            compared += 1;
        }
        let m = build_integrated_linearized(&f.inst, &opts).map_err(|e| e.to_string())?;
        let bb = solve_bb(&f.inst, &m, &limits).map_err(|e| e.to_string())?;
        let bf = brute_force(&f.inst, ModelKind::IntegratedLinearized, f.inst.mode(), None)
            .map_err(|e| e.to_string())?;
        cmp(&format!("{} integrated", f.name), &bb, &bf)?;
        compared += 1;
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{} instances, {compared} optima equal, {secs:.1}s", corpus.len()))
}

fn decomposition_dominance(corpus: &[Fixture]) -> Result<String, String> {
    let mut strict = Vec::new();
    for f in corpus {
        let opt = integrated_optimum(&f.inst)?;
        let tp = solve_two_phase(&f.inst, &SolveLimits::default(), &BuildOptions::default())
            .map_err(|e| e.to_string())?;
        let Some(c) = tp.combined else {
            continue;
        };
        ensure(c.total >= opt - 1e-6 * opt.abs().max(1.0), || {
            format!("{}: two-phase {} below integrated optimum {opt}", f.name, c.total)
        })?;
        if c.total > opt * (1.0 + 1e-9) {
            strict.push(format!("{} (+{:.3}%)", f.name, (c.total / opt - 1.0) * 100.0));
        }
    }
    ensure(!strict.is_empty(), || "no instance where two-phase is strictly worse".into())?;
    Ok(format!("strictly worse on {}: {}", strict.len(), strict.join(", ")))
}

fn check_penalty_consistency(f: &Fixture) -> Result<usize, String> {
    let inst = &f.inst;
    let model = build_integrated_linearized(inst, &BuildOptions::default()).map_err(|e| e.to_string())?;
    let out = solve_model(&model, &SolveLimits::default()).map_err(|e| e.to_string())?;
    let Some(values) = out.values else {
        return Ok(0);
    };
    let alloc = ssoa_core::milp::decode_allocation(&model, inst, &values).map_err(|e| e.to_string())?;
    let b = evaluate(inst, &alloc).map_err(|e| e.to_string())?;
    // A slot with no demand has a free level in the linearized model, so
    // only slots carrying a product term are checked.
    let flowing: std::collections::HashSet<_> = model
        .variables
        .iter()
        .zip(&values)
        .filter_map(|(var, &x)| match var.tag {
            Some(VarTag::U { forging, tier1, tier2, level, proportion, .. }) if x > 0.5 => {
                Some((forging, tier1, tier2, level, proportion))
            }
            _ => None,
        })
        .collect();
    let mut checked = 0;
    for (var, &x) in model.variables.iter().zip(&values) {
        match var.tag {
            Some(VarTag::V { tier2 }) => {
                let v = x > 0.5;
                let missed = b.per_supplier_blue_forging_spend_tier2[tier2] < inst.penalty.threshold[tier2];
                ensure(v == missed, || {
                    format!("{}: v_{tier2} = {v} but blue spend misses threshold = {missed}", f.name)
                })?;
                checked += 1;
            }
            Some(VarTag::Y { forging, tier1, tier2, level, proportion })
                if x > 0.5
                    && inst.shape.is_llv_forging(forging)
                    && flowing.contains(&(forging, tier1, tier2, level, proportion)) =>
            {
                let v = values[model
                    .variables
                    .iter()
                    .position(|w| w.tag == Some(VarTag::V { tier2 }))
                    .expect("one indicator per forger")]
                    > 0.5;
                ensure(level == PenaltyLevel::from_flag(v), || {
                    format!("{}: LLV assignment at level {level:?} with v_{tier2} = {v}", f.name)
                })?;
                checked += 1;
            }
            _ => {}
        }
    }
    Ok(checked)
}

fn non_decreasing(costs: &[f64]) -> bool {
    costs.windows(2).all(|w| w[1] >= w[0] - 1e-6 * w[0].abs().max(1.0))
}

fn penalty_semantics(corpus: &[Fixture]) -> Result<String, String> {
    let active: Vec<&Fixture> = corpus.iter().filter(|f| f.penalty_active).collect();
    let mut checked = 0;
    for f in &active {
        checked += check_penalty_consistency(f)?;
    }
    let limits = SolveLimits::default();
    let factors = [1.0, 1.5, 2.0, 3.0, 5.0, 8.0];
    let thresholds = [0.0, 500.0, 1000.0, 2000.0, 5000.0, 1e4, 1e5];
    let mut points = 0;
    let mut absorbed = 0;
    let mut avoided = 0;
    for f in &active {
        for (axis, values) in [(PenaltyAxis::Factor, &factors[..]), (PenaltyAxis::Threshold, &thresholds[..])] {
            let run = |solver: SolverChoice| {
                sweep_penalty(&f.inst, axis, 0, values, ModelKind::Integrated, &solver, &limits)
            };
            let bb = run(SolverChoice::BranchAndBound)?;
            let bf = run(SolverChoice::BruteForce)?;
            let mut costs = Vec::new();
            for (p, q) in bb.points.iter().zip(&bf.points) {
                let (a, b) = (
                    p.total_cost.ok_or_else(|| format!("{}: no optimum at {}", f.name, p.label))?,
                    q.total_cost.ok_or_else(|| format!("{}: brute force found nothing at {}", f.name, q.label))?,
                );
                ensure(rel_close(a, b, 1e-6), || format!("{} {axis:?}={}: bb {a} vs brute {b}", f.name, p.label))?;
                match p.designated_penalized {
                    Some(true) => absorbed += 1,
                    Some(false) => avoided += 1,
                    None => {}
                }
                costs.push(a);
                points += 1;
            }
            ensure(non_decreasing(&costs), || format!("{} {axis:?}: costs {costs:?} decrease", f.name))?;
        }
    }
    Ok(format!(
        "{} instances, {checked} indicator/level checks, {points} sweep points monotone ({absorbed} absorb, {avoided} avoid)",
        active.len()
    ))
}

fn sourcing_sweep(corpus: &[Fixture]) -> Result<String, String> {
    let limits = SolveLimits::default();
    let ratios = SplitRatio::standard();
    let mut n = 0;
    for f in corpus.iter().filter(|f| f.unconstrained) {
        for kind in [ModelKind::Machinist, ModelKind::Integrated] {
            let res = sweep_sourcing(&f.inst, &ratios, kind, &SolverChoice::BruteForce, &limits);
            let single = res
                .points
                .iter()
                .find(|p| p.label == "100:0")
                .and_then(|p| p.total_cost)
                .ok_or("missing 100:0 point")?;
            for p in &res.points {
                let c = p.total_cost.ok_or_else(|| format!("{}: {} unsolved", f.name, p.label))?;
                ensure(single <= c + 1e-6 * c.abs().max(1.0), || {
                    format!("{} {kind}: 100:0 costs {single}, {} costs {c}", f.name, p.label)
                })?;
            }
        }
        n += 1;
    }
    ensure(n > 0, || "no unconstrained instance".into())?;
    let inst = common::must_make_dual_wins();
    let res = sweep_sourcing(&inst, &ratios, ModelKind::Machinist, &SolverChoice::BruteForce, &limits);
    let single = res.points.last().and_then(|p| p.total_cost).ok_or("fixture unsolved")?;
    let best_dual = res.points[..res.points.len() - 1]
        .iter()
        .filter_map(|p| p.total_cost.map(|c| (c, p.label.clone())))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or("no dual point")?;
    ensure(best_dual.0 < single, || format!("best dual {} does not beat single {single}", best_dual.0))?;
    Ok(format!(
        "single cheapest on {n} unconstrained instances; must-make fixture: {} costs {:.0} vs single {single:.0}",
        best_dual.1, best_dual.0
    ))
}

fn scaled_ga() -> GaParams {
    GaParams {
        generations: 200,
        ..Default::default()
    }
}

fn ga_optimality(corpus: &[Fixture]) -> Result<String, String> {
    let mut slowest: f64 = 0.0;
    for f in corpus {
        let inst = f.inst.with_mode(SourcingMode::Single);
        let exact = brute_force(&inst, ModelKind::Machinist, SourcingMode::Single, None)
            .map_err(|e| e.to_string())?
            .objective
            .ok_or("machinist problem infeasible")?;
        let pr = Problem::new(&inst, ModelKind::Machinist, None).map_err(|e| e.to_string())?;
        let t0 = Instant::now();
        let (rep, _) = ga_solve(&pr, &scaled_ga(), &RunOptions::with_seed(1)).map_err(|e| e.to_string())?;
        let secs = t0.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        let got = rep.objective.ok_or("GA found nothing")?;
        ensure(rel_close(got, exact, 1e-9), || format!("{}: GA {got} vs optimum {exact}", f.name))?;
        ensure(secs < 60.0, || format!("{}: {secs:.1}s", f.name))?;
    }
    Ok(format!("cost/best = 1.00000 on {} instances, slowest {slowest:.2}s", corpus.len()))
}

fn heuristic_ordering(corpus: &[Fixture]) -> Result<String, String> {
    let opts = RunOptions::with_seed(7);
    let pso = PsoParams {
        iterations: 200,
        ..Default::default()
    };
    let aco = AcoParams {
        iterations: 50,
        ..Default::default()
    };
    let (mut ga_aco, mut ga_pso, mut aco_pso) = (0, 0, 0);
    let (mut sum_ga, mut sum_aco, mut sum_pso) = (0.0, 0.0, 0.0);
    for f in corpus {
        let opt = integrated_optimum(&f.inst)?;
        let pr = Problem::new(&f.inst, ModelKind::Integrated, None).map_err(|e| e.to_string())?;
        let cost = |r: Result<(SolveReport, _), _>| -> Result<f64, String> {
            let (rep, _) = r.map_err(|e: ssoa_core::heuristics::HeuristicError| e.to_string())?;
            rep.objective.ok_or_else(|| "no solution".to_string())
        };
        let g = cost(ga_solve(&pr, &scaled_ga(), &opts))? / opt;
        let a = cost(aco_solve(&pr, &aco, &opts))? / opt;
        let p = cost(pso_solve(&pr, &pso, &opts))? / opt;
        ga_aco += (g <= a + 1e-12) as usize;
        ga_pso += (g <= p + 1e-12) as usize;
        aco_pso += (a <= p + 1e-12) as usize;
        sum_ga += g;
        sum_aco += a;
        sum_pso += p;
    }
    let n = corpus.len();
    let detail = format!(
        "mean cost/optimum GA {:.5}, ACO {:.5}, PSO {:.5}; GA<=ACO on {ga_aco}/{n}, GA<=PSO on {ga_pso}/{n}, ACO<=PSO on {aco_pso}/{n}",
        sum_ga / n as f64,
        sum_aco / n as f64,
        sum_pso / n as f64
    );
    let need = (0.7 * n as f64).ceil() as usize;
    ensure(ga_aco >= need && ga_pso >= need, || detail.clone())?;
    Ok(detail)
}

fn determinism(corpus: &[Fixture]) -> Result<String, String> {
    let json = |r: &SolveReport| serde_json::to_string(&r.without_timing()).expect("serializable");
    let cfg = GeneratorConfig {
        shape: ProblemShape {
            tier1_count: 5,
            tier2_count: 4,
            parts_blue: 8,
            parts_llv: 3,
            forgings_blue: 6,
            forgings_llv: 2,
        },
        seed: 42,
        ..Default::default()
    };
    let a = generate_instance(&cfg).map_err(|e| e.to_string())?;
    let b = generate_instance(&cfg).map_err(|e| e.to_string())?;
    ensure(save_instance(&a) == save_instance(&b), || "generator output differs".into())?;

    let limits = SolveLimits::default();
    let small_ga = GaParams {
        population: 20,
        generations: 20,
        mutation_prob: 0.02,
        ..Default::default()
    };
    let small_pso = PsoParams {
        swarm: 20,
        iterations: 20,
        ..Default::default()
    };
    let small_aco = AcoParams {
        ants: 20,
        iterations: 10,
        ..Default::default()
    };
    let mut runs = 0;
    for f in corpus.iter().step_by(3) {
        let inst = &f.inst;
        let pr = Problem::new(inst, ModelKind::Integrated, None).map_err(|e| e.to_string())?;
        let opts = RunOptions::with_seed(11);
        let twice = |run: &dyn Fn() -> Result<String, String>, what: &str| -> Result<(), String> {
            let (x, y) = (run()?, run()?);
            ensure(x == y, || format!("{}: {what} differs between runs", f.name))
        };
        let model = build_integrated_linearized(inst, &BuildOptions::default()).map_err(|e| e.to_string())?;
        twice(&|| solve_bb(inst, &model, &limits).map(|r| json(&r)).map_err(|e| e.to_string()), "branch and bound")?;
        twice(
            &|| {
                brute_force(inst, ModelKind::IntegratedLinearized, inst.mode(), None)
                    .map(|r| json(&r))
                    .map_err(|e| e.to_string())
            },
            "brute force",
        )?;
        twice(
            &|| {
                let t = solve_two_phase(inst, &limits, &BuildOptions::default()).map_err(|e| e.to_string())?;
                Ok(format!(
                    "{}{}{}",
                    json(&t.machinist),
                    t.forger.as_ref().map(json).unwrap_or_default(),
                    serde_json::to_string(&t.combined).expect("serializable")
                ))
            },
            "two-phase",
        )?;
        twice(
            &|| {
                ga_solve(&pr, &small_ga, &opts)
                    .map(|(r, t)| json(&r) + &t.to_csv())
                    .map_err(|e| e.to_string())
            },
            "GA",
        )?;
        twice(
            &|| {
                pso_solve(&pr, &small_pso, &opts)
                    .map(|(r, t)| json(&r) + &t.to_csv())
                    .map_err(|e| e.to_string())
            },
            "PSO",
        )?;
        twice(
            &|| {
                aco_solve(&pr, &small_aco, &opts)
                    .map(|(r, t)| json(&r) + &t.to_csv())
                    .map_err(|e| e.to_string())
            },
            "ACO",
        )?;
        twice(
            &|| {
                let mut ranges = ssoa_core::heuristics::default_ranges(Algorithm::Aco);
                ranges.insert("ants".into(), (5.0, 10.0));
                tune(&pr, ParamSet::Aco(small_aco), &ranges, 3, 2, 5, &RunOptions::default())
                    .map(|r| serde_json::to_string(&r).expect("serializable"))
                    .map_err(|e| e.to_string())
            },
            "tuning",
        )?;
        runs += 7;
    }
    Ok(format!("generator and {runs} solver runs repeat bit-identically"))
}

/// Random feasible allocation of `kind` via random genes plus repair.
fn random_feasible(pr: &Problem<'_>, rng: &mut ChaCha8Rng) -> Result<ssoa_core::Allocation, String> {
    let c = repair(pr, pr.random_chromosome(rng), rng).map_err(|e| e.to_string())?;
    Ok(pr.decode(&c))
}

fn model_fidelity(corpus: &[Fixture]) -> Result<String, String> {
    const SAMPLES: usize = 1000;
    let opts = BuildOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut models: Vec<(&Fixture, ModelKind, LinearModel, Option<Vec<usize>>)> = Vec::new();
    for f in corpus {
        let inst = &f.inst;
        let m1 = Problem::new(inst, ModelKind::Machinist, None).map_err(|e| e.to_string())?;
        let tier1 = random_feasible(&m1, &mut rng)?.tier1;
        models.push((f, ModelKind::Machinist, build_machinist(inst, &opts).map_err(|e| e.to_string())?, None));
        models.push((
            f,
            ModelKind::Forger,
            build_forger(inst, &tier1, &opts).map_err(|e| e.to_string())?,
            Some(tier1),
        ));
        models.push((
            f,
            ModelKind::IntegratedLinearized,
            build_integrated_linearized(inst, &opts).map_err(|e| e.to_string())?,
            None,
        ));
    }
    let mut done = 0;
    let mut worst: f64 = 0.0;
    'outer: loop {
        for (f, kind, model, tier1) in &models {
            if done == SAMPLES {
                break 'outer;
            }
            let pr = Problem::new(&f.inst, *kind, tier1.as_deref()).map_err(|e| e.to_string())?;
            let alloc = random_feasible(&pr, &mut rng)?;
            let values = encode_allocation(model, &f.inst, &alloc);
            let bad = model.violated_rows(&values, 1e-9);
            ensure(bad.is_empty(), || format!("{} {kind}: rows {:?} violated", f.name, &bad[..bad.len().min(3)]))?;
            let b = evaluate(&f.inst, &alloc).map_err(|e| e.to_string())?;
            let expect = b.scope_total(pr.scope);
            let got = model.objective_value(&values);
            ensure(money_eq(got, expect), || format!("{} {kind}: objective {got} vs evaluate {expect}", f.name))?;
            worst = worst.max((got - expect).abs());
            done += 1;
        }
    }
    for (f, kind, model, _) in &models {
        let reference = ParsedModel::from_model(model);
        for format in [ExportFormat::Lp, ExportFormat::Mps] {
            let text = export_model(model, format).map_err(|e| e.to_string())?;
            let back = import_model(&text, format).map_err(|e| e.to_string())?;
            reference
                .compare(&back, 1e-9)
                .map_err(|e| format!("{} {kind} {format:?}: {e}", f.name))?;
        }
    }
    Ok(format!(
        "{SAMPLES} plug-ins feasible, max |objective - evaluate| = {worst:.2e}; {} models round-trip through LP and MPS",
        models.len()
    ))
}

fn main() {
    let corpus = common::corpus();
    let checks: [(&str, Check); 9] = [
        ("variable accounting", variable_accounting),
        ("oracle equivalence", oracle_equivalence),
        ("decomposition dominance", decomposition_dominance),
        ("penalty semantics", penalty_semantics),
        ("sourcing sweep", sourcing_sweep),
        ("GA optimality at tiny scale", ga_optimality),
        ("meta-heuristic ordering trend", heuristic_ordering),
        ("determinism", determinism),
        ("model/export fidelity", model_fidelity),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let t0 = Instant::now();
        let outcome = check(&corpus);
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} [{secs:.2}s]: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} [{secs:.2}s]: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 9 acceptance criteria passed");
}
