use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::exact::SolveReport;
use crate::instance::PenaltyLevel;

use super::{
    check_probability, map_indexed, repair, stream, thread_pool, Chromosome, ConvergenceTrace,
    HeuristicError, Problem, RunOptions, Tracker,
};

/// Pheromone never drops below this, so no supplier becomes unreachable.
pub const TAU_MIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcoParams {
    pub ants: usize,
    pub alpha: f64,
    pub beta: f64,
    pub evaporation: f64,
    /// Deposit constant: each ant adds `Q / L` to the edges it used. It must
    /// be of the order of the tour costs or deposits vanish next to `TAU_MIN`.
    pub deposit: f64,
    pub iterations: u64,
    /// Upper end of the uniform initial pheromone.
    pub tau0_max: f64,
}

impl Default for AcoParams {
    fn default() -> Self {
        AcoParams {
            ants: 100,
            alpha: 1.0,
            beta: 1.5,
            evaporation: 0.2,
            deposit: 1e7,
            iterations: 5000,
            tau0_max: 1e-3,
        }
    }
}

impl AcoParams {
    pub fn validate(&self) -> Result<(), HeuristicError> {
        if self.ants == 0 {
            return Err(HeuristicError::InvalidParams("ants must be at least 1".into()));
        }
        check_probability("evaporation", self.evaporation, false, false)?;
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("deposit", self.deposit),
            ("tau0_max", self.tau0_max),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(HeuristicError::InvalidParams(format!("{name} = {v} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Pheromone, visibility and selection probabilities per gene slot.
pub struct Colony {
    pub ranges: Vec<usize>,
    offsets: Vec<usize>,
    pub tau: Vec<f64>,
    ln_eta: Vec<f64>,
    pub prob: Vec<f64>,
}

impl Colony {
    fn new(problem: &Problem<'_>, params: &AcoParams, rng: &mut impl Rng) -> Self {
        let n = problem.gene_count();
        let props = problem.inst.proportions();
        let ranges: Vec<usize> = (0..n).map(|g| problem.gene_range(g)).collect();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for r in &ranges {
            offsets.push(offsets.last().unwrap() + r);
        }
        let cm = &problem.cm;
        let mut ln_eta = Vec::with_capacity(offsets[n]);
        for (g, &r) in ranges.iter().enumerate() {
            let grp = &problem.groups[problem.group_of(g)];
            let p = g % props;
            for s in 0..r {
                // per-unit cost of the slot; forging quantities depend on
                // the Tier1 choices and are left out
                let d = if grp.tier == 1 {
                    cm.machining_cost(grp.part, s, p)
                } else {
                    cm.forging_unit(grp.forging, grp.tier1, s, PenaltyLevel::Base)
                        * problem.inst.forging_fraction(grp.forging, p)
                };
                ln_eta.push(-d.max(1e-12).ln());
            }
        }
        let hi = params.tau0_max;
        let tau = (0..offsets[n])
            .map(|_| if hi > 0.0 { rng.random_range(0.0..=hi) } else { 0.0 }.max(TAU_MIN))
            .collect();
        let mut c = Colony {
            ranges,
            offsets,
            tau,
            ln_eta,
            prob: Vec::new(),
        };
        c.update_probabilities(params);
        c
    }

    pub fn slot(&self, g: usize) -> std::ops::Range<usize> {
        self.offsets[g]..self.offsets[g + 1]
    }

    /// `p ∝ tau^alpha * eta^beta`, normalised in log space.
    fn update_probabilities(&mut self, params: &AcoParams) {
        self.prob.resize(self.tau.len(), 0.0);
        for g in 0..self.ranges.len() {
            let r = self.slot(g);
            let w: Vec<f64> = r
                .clone()
                .map(|e| params.alpha * self.tau[e].ln() + params.beta * self.ln_eta[e])
                .collect();
            let m = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = w.iter().map(|x| (x - m).exp()).sum();
            for (e, x) in r.zip(w) {
                self.prob[e] = (x - m).exp() / sum;
            }
        }
    }

    fn evaporate_and_deposit(&mut self, params: &AcoParams, tours: &[(f64, Chromosome)]) {
        for t in &mut self.tau {
            *t *= 1.0 - params.evaporation;
        }
        for (cost, c) in tours {
            let amount = params.deposit / cost.max(1e-12);
            for g in 0..self.ranges.len() {
                self.tau[self.offsets[g] + c.gene(g)] += amount;
            }
        }
        for t in &mut self.tau {
            *t = t.max(TAU_MIN);
        }
        self.update_probabilities(params);
    }

    /// One tour: every slot sampled from its probabilities, skipping
    /// suppliers already used by another proportion of the same item.
    fn sample(&self, problem: &Problem<'_>, rng: &mut impl Rng) -> Chromosome {
        let props = problem.inst.proportions();
        let mut c = Chromosome {
            tier1_genes: vec![0; problem.n_tier1],
            tier2_genes: vec![0; problem.n_tier2],
        };
        for g in 0..self.ranges.len() {
            let taken: Vec<usize> = (g - g % props..g).map(|q| c.gene(q)).collect();
            let r = self.slot(g);
            let total: f64 = r
                .clone()
                .enumerate()
                .filter(|(s, _)| !taken.contains(s))
                .map(|(_, e)| self.prob[e])
                .sum();
            let mut u = rng.random::<f64>() * total;
            let mut pick = None;
            for (s, e) in r.enumerate() {
                if taken.contains(&s) {
                    continue;
                }
                pick = Some(s);
                u -= self.prob[e];
                if u <= 0.0 {
                    break;
                }
            }
            *c.gene_mut(g) = pick.unwrap_or(0);
        }
        c
    }
}

/// Ant colony over the bipartite item-supplier graph. Every iteration each
/// ant builds a tour from the slot probabilities, the tour is repaired and
/// costed, pheromone evaporates, and each ant deposits `Q / L` on its edges.
pub fn aco_solve(
    problem: &Problem<'_>,
    params: &AcoParams,
    opts: &RunOptions,
) -> Result<(SolveReport, ConvergenceTrace), HeuristicError> {
    params.validate()?;
    let (report, trace, _) = run(problem, params, opts)?;
    Ok((report, trace))
}

/// [`aco_solve`] that also returns the final colony state.
pub fn aco_run_with_colony(
    problem: &Problem<'_>,
    params: &AcoParams,
    opts: &RunOptions,
) -> Result<(SolveReport, ConvergenceTrace, Colony), HeuristicError> {
    params.validate()?;
    run(problem, params, opts)
}

fn run(
    problem: &Problem<'_>,
    params: &AcoParams,
    opts: &RunOptions,
) -> Result<(SolveReport, ConvergenceTrace, Colony), HeuristicError> {
    let pool = thread_pool(opts.threads);
    let mut tracker = Tracker::new(opts);
    let seed = opts.seed;
    let mut colony = Colony::new(problem, params, &mut stream(seed, 0, u64::MAX));
    let mut last_error = None;
    let mut iter = 0;
    while iter < params.iterations && !tracker.out_of_time() {
        iter += 1;
        let col = &colony;
        let tours = map_indexed(pool.as_ref(), params.ants, |a| {
            let mut rng = stream(seed, iter, a as u64);
            let raw = col.sample(problem, &mut rng);
            repair(problem, raw, &mut rng).map(|g| (problem.cost(&g), g))
        });
        let mut ok = Vec::with_capacity(tours.len());
        for t in tours {
            tracker.evaluations += 1;
            match t {
                Ok((cost, genes)) => {
                    tracker.offer(cost, &genes);
                    ok.push((cost, genes));
                }
                Err(e) => last_error = Some(e),
            }
        }
        colony.evaporate_and_deposit(params, &ok);
        tracker.record(iter);
    }
    if tracker.best.is_none() {
        if let Some(e) = last_error {
            return Err(e.into());
        }
    }
    let (report, trace) = tracker.finish(problem, "aco", iter);
    Ok((report, trace, colony))
}
