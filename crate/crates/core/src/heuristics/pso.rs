use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::exact::SolveReport;

use super::{
    map_indexed, repair, stream, thread_pool, Chromosome, ConvergenceTrace, HeuristicError, Problem,
    RunOptions, Tracker,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoParams {
    pub swarm: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub iterations: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            swarm: 200,
            inertia: 0.4,
            cognitive: 3.0,
            social: 1.0,
            iterations: 50_000,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<(), HeuristicError> {
        if self.swarm == 0 {
            return Err(HeuristicError::InvalidParams("swarm must be non-empty".into()));
        }
        for (name, v) in [
            ("inertia", self.inertia),
            ("cognitive", self.cognitive),
            ("social", self.social),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(HeuristicError::InvalidParams(format!("{name} = {v} must be >= 0")));
            }
        }
        Ok(())
    }
}

struct Particle {
    x: Vec<f64>,
    v: Vec<f64>,
    best_x: Vec<f64>,
    best_cost: f64,
}

/// Nearest integer, wrapped into `0..range`.
fn to_gene(x: f64, range: usize) -> usize {
    (x.round() as i64).rem_euclid(range as i64) as usize
}

fn to_chromosome(problem: &Problem<'_>, x: &[f64]) -> Chromosome {
    let n1 = problem.n_tier1;
    Chromosome {
        tier1_genes: x[..n1].iter().map(|&v| to_gene(v, problem.gene_range(0))).collect(),
        tier2_genes: x[n1..]
            .iter()
            .map(|&v| to_gene(v, problem.gene_range(n1)))
            .collect(),
    }
}

/// Particle swarm over continuous positions. Each evaluation rounds the
/// position to the nearest gene, wraps it into the supplier range and
/// repairs it; the repaired genes become the remembered best positions.
/// Velocities are clamped to the gene range so positions stay finite.
pub fn pso_solve(
    problem: &Problem<'_>,
    params: &PsoParams,
    opts: &RunOptions,
) -> Result<(SolveReport, ConvergenceTrace), HeuristicError> {
    params.validate()?;
    let pool = thread_pool(opts.threads);
    let mut tracker = Tracker::new(opts);
    let seed = opts.seed;
    let n = problem.gene_count();
    let ranges: Vec<f64> = (0..n).map(|g| problem.gene_range(g) as f64).collect();

    let mut swarm: Vec<Particle> = (0..params.swarm)
        .map(|i| {
            let mut rng = stream(seed, 0, i as u64);
            let x: Vec<f64> = ranges.iter().map(|&r| rng.random_range(0.0..r)).collect();
            let v: Vec<f64> = ranges.iter().map(|&r| rng.random_range(-r..r) * 0.5).collect();
            Particle {
                best_x: x.clone(),
                x,
                v,
                best_cost: f64::INFINITY,
            }
        })
        .collect();
    let mut global: Option<(f64, Vec<f64>)> = None;
    let mut last_error = None;

    let mut k = 0;
    loop {
        // step i: enforce constraints and evaluate every particle
        let sw = &swarm;
        let scored = map_indexed(pool.as_ref(), sw.len(), |i| {
            let mut rng = stream(seed, 2 * k + 1, i as u64);
            let raw = to_chromosome(problem, &sw[i].x);
            repair(problem, raw, &mut rng).map(|g| (problem.cost(&g), g))
        });
        for (p, s) in swarm.iter_mut().zip(scored) {
            tracker.evaluations += 1;
            let (cost, genes) = match s {
                Ok(v) => v,
                Err(e) => {
                    last_error = Some(e);
                    continue;
                }
            };
            tracker.offer(cost, &genes);
            let pos: Vec<f64> = genes
                .tier1_genes
                .iter()
                .chain(&genes.tier2_genes)
                .map(|&g| g as f64)
                .collect();
            // steps ii and iii
            if cost < p.best_cost {
                p.best_cost = cost;
                p.best_x = pos.clone();
            }
            if global.as_ref().is_none_or(|(b, _)| cost < *b) {
                global = Some((cost, pos));
            }
        }
        tracker.record(k);
        if k >= params.iterations || tracker.out_of_time() {
            break;
        }
        let Some((_, gx)) = global.as_ref() else {
            // nothing feasible yet; keep drifting
            k += 1;
            continue;
        };
        // step iv
        for (i, p) in swarm.iter_mut().enumerate() {
            let mut rng = stream(seed, 2 * k + 2, i as u64);
            for d in 0..n {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let vmax = ranges[d];
                let v = params.inertia * p.v[d]
                    + params.cognitive * r1 * (p.best_x[d] - p.x[d])
                    + params.social * r2 * (gx[d] - p.x[d]);
                p.v[d] = v.clamp(-vmax, vmax);
                p.x[d] += p.v[d];
            }
        }
        k += 1;
    }
    if tracker.best.is_none() {
        if let Some(e) = last_error {
            return Err(e.into());
        }
    }
    Ok(tracker.finish(problem, "pso", k))
}
