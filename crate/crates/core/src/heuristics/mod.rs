//! GA, PSO and ACO over the two-layer integer encoding.
//!
//! All three share [`Problem`], which fixes what is being optimised (one
//! tier or both), decodes chromosomes into allocations and repairs them.
//! Randomness is drawn from per-individual ChaCha streams derived from the
//! run seed, so results do not depend on the thread budget.

mod aco;
mod ga;
mod pso;
mod repair;
mod tune;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use aco::{aco_run_with_colony, aco_solve, AcoParams, Colony, TAU_MIN};
pub use ga::{ga_solve, GaParams};
pub use pso::{pso_solve, PsoParams};
pub use repair::{repair, RepairError};
pub use tune::{default_ranges, tune, Algorithm, ParamSet, SearchRanges, TrialRecord, TuneResult};

use crate::costs::{derive_penalty_levels, evaluate_unchecked, Allocation, CostModel, Scope, Tier2Choice};
use crate::exact::{SolveReport, SolveStatus, TracePoint};
use crate::instance::SupplyChainInstance;
use crate::milp::ModelKind;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HeuristicError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("a fixed Tier1 allocation is required: {0}")]
    Tier1(String),
    #[error(transparent)]
    Repair(#[from] RepairError),
}

/// Supplier genes: one per proportion of every part, then one per
/// proportion of every `(forging, tier1)` slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome {
    pub tier1_genes: Vec<usize>,
    pub tier2_genes: Vec<usize>,
}

impl Chromosome {
    pub fn len(&self) -> usize {
        self.tier1_genes.len() + self.tier2_genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn gene(&self, g: usize) -> usize {
        let n1 = self.tier1_genes.len();
        if g < n1 {
            self.tier1_genes[g]
        } else {
            self.tier2_genes[g - n1]
        }
    }

    pub fn gene_mut(&mut self, g: usize) -> &mut usize {
        let n1 = self.tier1_genes.len();
        if g < n1 {
            &mut self.tier1_genes[g]
        } else {
            &mut self.tier2_genes[g - n1]
        }
    }
}

/// One item's genes: `props` consecutive positions sharing eligibility and
/// must-make sets.
#[derive(Clone, Debug)]
pub(crate) struct Group {
    pub tier: u8,
    /// First gene position in the flat chromosome.
    pub start: usize,
    pub suppliers: usize,
    pub eligible: Vec<usize>,
    pub must: Vec<usize>,
    /// Part index for tier 1; `(forging, tier1)` for tier 2.
    pub part: usize,
    pub forging: usize,
    pub tier1: usize,
}

/// What a meta-heuristic optimises: the machinist tier, the forger tier
/// under a fixed Tier1 allocation, or both tiers together.
pub struct Problem<'a> {
    pub inst: &'a SupplyChainInstance,
    pub kind: ModelKind,
    pub scope: Scope,
    pub fixed_tier1: Option<Vec<usize>>,
    pub(crate) cm: CostModel<'a>,
    pub(crate) groups: Vec<Group>,
    pub(crate) n_tier1: usize,
    pub(crate) n_tier2: usize,
}

impl<'a> Problem<'a> {
    /// `tier1` is required for [`ModelKind::Forger`] and ignored otherwise.
    pub fn new(
        inst: &'a SupplyChainInstance,
        kind: ModelKind,
        tier1: Option<&[usize]>,
    ) -> Result<Self, HeuristicError> {
        let scope = match kind {
            ModelKind::Machinist => Scope::Machinist,
            ModelKind::Forger => Scope::Forger,
            ModelKind::Integrated | ModelKind::IntegratedLinearized => Scope::Integrated,
        };
        let props = inst.proportions();
        let shape = inst.shape;
        let nj = shape.tier1_count;
        let fixed_tier1 = if scope == Scope::Forger {
            let t = tier1.ok_or_else(|| HeuristicError::Tier1("none given".into()))?;
            if t.len() != inst.part_count() * props || t.iter().any(|&j| j >= nj) {
                return Err(HeuristicError::Tier1(format!(
                    "{} entries, expected {}",
                    t.len(),
                    inst.part_count() * props
                )));
            }
            Some(t.to_vec())
        } else {
            None
        };
        let mut groups = Vec::new();
        if scope != Scope::Forger {
            for i in 0..inst.part_count() {
                groups.push(Group {
                    tier: 1,
                    start: i * props,
                    suppliers: nj,
                    eligible: inst.eligible_tier1(i),
                    must: inst.must_make_tier1_of(i),
                    part: i,
                    forging: 0,
                    tier1: 0,
                });
            }
        }
        let n_tier1 = groups.len() * props;
        if scope != Scope::Machinist {
            for k in 0..inst.forging_count() {
                for j in 0..nj {
                    groups.push(Group {
                        tier: 2,
                        start: n_tier1 + (k * nj + j) * props,
                        suppliers: shape.tier2_count,
                        eligible: inst.eligible_tier2(k, j),
                        must: inst.must_make_tier2_of(k, j),
                        part: 0,
                        forging: k,
                        tier1: j,
                    });
                }
            }
        }
        let n_tier2 = if scope == Scope::Machinist {
            0
        } else {
            inst.forging_count() * nj * props
        };
        Ok(Problem {
            inst,
            kind,
            scope,
            fixed_tier1,
            cm: CostModel::new(inst),
            groups,
            n_tier1,
            n_tier2,
        })
    }

    pub fn gene_count(&self) -> usize {
        self.n_tier1 + self.n_tier2
    }

    /// Number of suppliers gene `g` ranges over.
    pub fn gene_range(&self, g: usize) -> usize {
        if g < self.n_tier1 {
            self.inst.shape.tier1_count
        } else {
            self.inst.shape.tier2_count
        }
    }

    pub(crate) fn group_of(&self, g: usize) -> usize {
        g / self.inst.proportions()
    }

    pub fn random_chromosome(&self, rng: &mut ChaCha8Rng) -> Chromosome {
        use rand::Rng;
        let nj = self.inst.shape.tier1_count;
        let nl = self.inst.shape.tier2_count;
        Chromosome {
            tier1_genes: (0..self.n_tier1).map(|_| rng.random_range(0..nj)).collect(),
            tier2_genes: (0..self.n_tier2).map(|_| rng.random_range(0..nl)).collect(),
        }
    }

    /// Allocation encoded by `c`, with penalty levels derived from spend.
    pub fn decode(&self, c: &Chromosome) -> Allocation {
        let tier1 = match &self.fixed_tier1 {
            Some(t) => t.clone(),
            None => c.tier1_genes.clone(),
        };
        let mut alloc = Allocation {
            mode: self.inst.mode(),
            tier1,
            tier2: c.tier2_genes.iter().map(|&l| Tier2Choice::base(l)).collect(),
        };
        derive_penalty_levels(&self.cm, &mut alloc);
        alloc
    }

    /// Chromosome of an allocation, the inverse of [`Problem::decode`].
    pub fn encode(&self, alloc: &Allocation) -> Chromosome {
        Chromosome {
            tier1_genes: if self.scope == Scope::Forger {
                Vec::new()
            } else {
                alloc.tier1.clone()
            },
            tier2_genes: if self.scope == Scope::Machinist {
                Vec::new()
            } else {
                alloc.tier2.iter().map(|c| c.supplier).collect()
            },
        }
    }

    /// Fitness: the cost of the optimised scope.
    pub fn cost(&self, c: &Chromosome) -> f64 {
        let alloc = self.decode(c);
        evaluate_unchecked(&self.cm, &alloc).scope_total(self.scope)
    }
}

/// Run controls shared by the three meta-heuristics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    pub seed: u64,
    /// Worker threads for fitness evaluation; results do not depend on it.
    pub threads: usize,
    /// Wall-clock cap in seconds, checked once per generation/iteration.
    pub time_limit: Option<f64>,
    /// Optimum used for the relative-cost column of the trace.
    pub reference: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            threads: 1,
            time_limit: None,
            reference: None,
        }
    }
}

impl RunOptions {
    pub fn with_seed(seed: u64) -> Self {
        RunOptions {
            seed,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub iteration: u64,
    pub best: f64,
    /// `best / reference` when a reference optimum was supplied.
    pub relative: Option<f64>,
}

/// Best cost after every generation or iteration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub points: Vec<ConvergencePoint>,
}

impl ConvergenceTrace {
    fn push(&mut self, iteration: u64, best: f64, reference: Option<f64>) {
        self.points.push(ConvergencePoint {
            iteration,
            best,
            relative: reference.map(|r| best / r),
        });
    }

    pub fn final_best(&self) -> Option<f64> {
        self.points.last().map(|p| p.best)
    }

    /// `iter,best,relative` CSV; `relative` is empty without a reference.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["iter", "best", "relative"]).expect("in-memory write");
        for p in &self.points {
            w.write_record([
                p.iteration.to_string(),
                p.best.to_string(),
                p.relative.map(|r| r.to_string()).unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Independent stream for one individual of one generation.
pub(crate) fn stream(seed: u64, generation: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(generation.wrapping_mul(1 << 32).wrapping_add(index));
    rng
}

/// Maps `f` over `0..n`, in parallel when more than one thread is allowed.
/// Output order never depends on scheduling.
pub(crate) fn map_indexed<T, F>(pool: Option<&rayon::ThreadPool>, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match pool {
        Some(p) => p.install(|| (0..n).into_par_iter().map(&f).collect()),
        None => (0..n).map(f).collect(),
    }
}

pub(crate) fn thread_pool(threads: usize) -> Option<rayon::ThreadPool> {
    if threads <= 1 {
        return None;
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok()
}

/// Bookkeeping common to the three solvers: elapsed time, improvements and
/// the final report.
pub(crate) struct Tracker {
    start: Instant,
    opts: RunOptions,
    pub best: Option<(f64, Chromosome)>,
    pub trace: ConvergenceTrace,
    improvements: Vec<TracePoint>,
    pub evaluations: u64,
}

impl Tracker {
    pub fn new(opts: &RunOptions) -> Self {
        Tracker {
            start: Instant::now(),
            opts: *opts,
            best: None,
            trace: ConvergenceTrace::default(),
            improvements: Vec::new(),
            evaluations: 0,
        }
    }

    pub fn offer(&mut self, cost: f64, c: &Chromosome) {
        if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
            self.best = Some((cost, c.clone()));
            self.improvements.push(TracePoint {
                time: self.start.elapsed().as_secs_f64(),
                incumbent: cost,
            });
        }
    }

    pub fn record(&mut self, iteration: u64) {
        if let Some((b, _)) = &self.best {
            self.trace.push(iteration, *b, self.opts.reference);
        }
    }

    pub fn out_of_time(&self) -> bool {
        self.opts
            .time_limit
            .is_some_and(|t| self.start.elapsed().as_secs_f64() >= t)
    }

    pub fn finish(
        self,
        problem: &Problem<'_>,
        solver: &str,
        iterations: u64,
    ) -> (SolveReport, ConvergenceTrace) {
        let (objective, allocation) = match &self.best {
            Some((cost, c)) => (Some(*cost), Some(problem.decode(c))),
            None => (None, None),
        };
        let report = SolveReport {
            solver: solver.into(),
            model: problem.kind,
            status: if objective.is_some() {
                SolveStatus::Feasible
            } else {
                SolveStatus::TimeLimit
            },
            objective,
            allocation,
            best_bound: None,
            relative_gap: match (objective, self.opts.reference) {
                (Some(o), Some(r)) => Some(((o - r) / r.abs().max(1e-9)).max(0.0)),
                _ => None,
            },
            nodes: self.evaluations,
            iterations,
            wall_time: self.start.elapsed().as_secs_f64(),
            trace: self.improvements,
            certificate: Vec::new(),
        };
        (report, self.trace)
    }
}

pub(crate) fn check_probability(name: &str, v: f64, open_low: bool, open_high: bool) -> Result<(), HeuristicError> {
    let low_ok = if open_low { v > 0.0 } else { v >= 0.0 };
    let high_ok = if open_high { v < 1.0 } else { v <= 1.0 };
    if v.is_finite() && low_ok && high_ok {
        Ok(())
    } else {
        Err(HeuristicError::InvalidParams(format!("{name} = {v} out of range")))
    }
}
