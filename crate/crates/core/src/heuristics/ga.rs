use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::exact::SolveReport;

use super::{
    check_probability, map_indexed, repair, stream, thread_pool, Chromosome, ConvergenceTrace,
    HeuristicError, Problem, RunOptions, Tracker,
};

/// Attempts at drawing a repairable initial individual before giving up.
const INIT_ATTEMPTS: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub population: usize,
    pub generations: u64,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Offspring per generation as a percentage of the population.
    pub replacement_percent: f64,
    pub tournament_size: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 100,
            generations: 50_000,
            crossover_prob: 1.0,
            mutation_prob: 0.001,
            replacement_percent: 90.0,
            tournament_size: 5,
        }
    }
}

impl GaParams {
    /// Zero crossover and mutation probabilities are accepted so the
    /// operators can be switched off.
    pub fn validate(&self) -> Result<(), HeuristicError> {
        if self.population < 2 {
            return Err(HeuristicError::InvalidParams("population must be at least 2".into()));
        }
        if self.tournament_size < 2 {
            return Err(HeuristicError::InvalidParams("tournament size must be at least 2".into()));
        }
        check_probability("crossover_prob", self.crossover_prob, false, false)?;
        check_probability("mutation_prob", self.mutation_prob, false, true)?;
        if !(0.0..=100.0).contains(&self.replacement_percent) {
            return Err(HeuristicError::InvalidParams(format!(
                "replacement_percent = {} out of [0, 100]",
                self.replacement_percent
            )));
        }
        Ok(())
    }

    pub fn offspring(&self) -> usize {
        (self.replacement_percent / 100.0 * self.population as f64).round() as usize
    }
}

struct Individual {
    genes: Chromosome,
    cost: f64,
}

fn tournament(pop: &[Individual], size: usize, rng: &mut impl Rng) -> usize {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..size {
        let c = rng.random_range(0..pop.len());
        if pop[c].cost < pop[best].cost || (pop[c].cost == pop[best].cost && c < best) {
            best = c;
        }
    }
    best
}

/// Genetic algorithm: tournament selection, uniform crossover, uniform
/// mutation, repair before every evaluation, and elitist survivor selection
/// of the best `population` out of parents plus offspring.
pub fn ga_solve(
    problem: &Problem<'_>,
    params: &GaParams,
    opts: &RunOptions,
) -> Result<(SolveReport, ConvergenceTrace), HeuristicError> {
    params.validate()?;
    let pool = thread_pool(opts.threads);
    let mut tracker = Tracker::new(opts);
    let seed = opts.seed;

    let init = map_indexed(pool.as_ref(), params.population, |i| {
        let mut rng = stream(seed, 0, i as u64);
        let mut last = None;
        for _ in 0..INIT_ATTEMPTS {
            let raw = problem.random_chromosome(&mut rng);
            match repair(problem, raw, &mut rng) {
                Ok(genes) => {
                    let cost = problem.cost(&genes);
                    return Ok(Individual { genes, cost });
                }
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    });
    let mut pop = Vec::with_capacity(params.population);
    for ind in init {
        let ind = ind?;
        tracker.evaluations += 1;
        tracker.offer(ind.cost, &ind.genes);
        pop.push(ind);
    }
    tracker.record(0);

    let pairs = params.offspring().div_ceil(2);
    let mut generation = 0;
    while generation < params.generations && !tracker.out_of_time() {
        generation += 1;
        let pop_ref = &pop;
        let children = map_indexed(pool.as_ref(), pairs, |n| {
            let mut rng = stream(seed, generation, n as u64);
            let a = &pop_ref[tournament(pop_ref, params.tournament_size, &mut rng)].genes;
            let b = &pop_ref[tournament(pop_ref, params.tournament_size, &mut rng)].genes;
            let (mut c1, mut c2) = (a.clone(), b.clone());
            if params.crossover_prob > 0.0 && rng.random_bool(params.crossover_prob) {
                for g in 0..c1.len() {
                    if rng.random_bool(0.5) {
                        let (x, y) = (c1.gene(g), c2.gene(g));
                        *c1.gene_mut(g) = y;
                        *c2.gene_mut(g) = x;
                    }
                }
            }
            let mut out = Vec::with_capacity(2);
            for (child, parent) in [(c1, a), (c2, b)] {
                let mut child = child;
                if params.mutation_prob > 0.0 {
                    for g in 0..child.len() {
                        if rng.random_bool(params.mutation_prob) {
                            *child.gene_mut(g) = rng.random_range(0..problem.gene_range(g));
                        }
                    }
                }
                // an unrepairable child falls back to its (feasible) parent
                let genes = repair(problem, child, &mut rng).unwrap_or_else(|_| parent.clone());
                let cost = problem.cost(&genes);
                out.push(Individual { genes, cost });
            }
            out
        });
        for ind in children.into_iter().flatten().take(params.offspring()) {
            tracker.evaluations += 1;
            tracker.offer(ind.cost, &ind.genes);
            pop.push(ind);
        }
        // stable sort keeps older individuals ahead on ties
        pop.sort_by(|x, y| x.cost.total_cmp(&y.cost));
        pop.truncate(params.population);
        tracker.record(generation);
    }
    Ok(tracker.finish(problem, "ga", generation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::brute_force;
    use crate::instance::{generate_instance, GeneratorConfig, ProblemShape, SourcingMode};
    use crate::milp::ModelKind;

    fn inst() -> crate::SupplyChainInstance {
        generate_instance(&GeneratorConfig {
            shape: ProblemShape {
                tier1_count: 3,
                tier2_count: 2,
                parts_blue: 2,
                parts_llv: 2,
                forgings_blue: 1,
                forgings_llv: 1,
            },
            must_make: Default::default(),
            sourcing_mode: SourcingMode::Single,
            seed: 17,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn disabled_operators_keep_the_initial_population() {
        let inst = inst();
        let pr = Problem::new(&inst, ModelKind::Integrated, None).unwrap();
        let params = GaParams {
            population: 10,
            generations: 20,
            crossover_prob: 0.0,
            mutation_prob: 0.0,
            replacement_percent: 0.0,
            ..Default::default()
        };
        let (rep, trace) = ga_solve(&pr, &params, &RunOptions::with_seed(3)).unwrap();
        let initial = trace.points[0].best;
        assert!(trace.points.iter().all(|p| p.best == initial));
        assert_eq!(rep.objective, Some(initial));
        assert_eq!(rep.nodes, 10);
    }

    #[test]
    fn best_cost_never_increases() {
        let inst = inst();
        let pr = Problem::new(&inst, ModelKind::Integrated, None).unwrap();
        let params = GaParams {
            population: 20,
            generations: 50,
            mutation_prob: 0.05,
            ..Default::default()
        };
        let (_, trace) = ga_solve(&pr, &params, &RunOptions::with_seed(1)).unwrap();
        assert_eq!(trace.points.len(), 51);
        assert!(trace.points.windows(2).all(|w| w[1].best <= w[0].best));
    }

    #[test]
    fn reaches_the_machinist_optimum() {
        let inst = inst();
        let pr = Problem::new(&inst, ModelKind::Machinist, None).unwrap();
        let exact = brute_force(&inst, ModelKind::Machinist, SourcingMode::Single, None)
            .unwrap()
            .objective
            .unwrap();
        let params = GaParams {
            generations: 200,
            ..Default::default()
        };
        let opts = RunOptions {
            seed: 2,
            reference: Some(exact),
            ..Default::default()
        };
        let (rep, trace) = ga_solve(&pr, &params, &opts).unwrap();
        assert!((rep.objective.unwrap() - exact).abs() <= 1e-6 * exact);
        assert!((trace.points.last().unwrap().relative.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn thread_budget_does_not_change_results() {
        let inst = inst();
        let pr = Problem::new(&inst, ModelKind::Integrated, None).unwrap();
        let params = GaParams {
            population: 16,
            generations: 15,
            mutation_prob: 0.05,
            ..Default::default()
        };
        let one = ga_solve(&pr, &params, &RunOptions::with_seed(4)).unwrap();
        let four = ga_solve(
            &pr,
            &params,
            &RunOptions {
                seed: 4,
                threads: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(one.0.without_timing(), four.0.without_timing());
        assert_eq!(one.1, four.1);
    }

    #[test]
    fn rejects_bad_params() {
        for p in [
            GaParams { tournament_size: 1, ..Default::default() },
            GaParams { mutation_prob: 1.0, ..Default::default() },
            GaParams { crossover_prob: 1.5, ..Default::default() },
            GaParams { replacement_percent: 120.0, ..Default::default() },
        ] {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }
}
