use std::collections::BTreeMap;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{aco_solve, ga_solve, pso_solve, AcoParams, GaParams, HeuristicError, Problem, PsoParams, RunOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ga,
    Pso,
    Aco,
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ga" => Ok(Algorithm::Ga),
            "pso" => Ok(Algorithm::Pso),
            "aco" => Ok(Algorithm::Aco),
            other => Err(format!("unknown algorithm `{other}` (expected ga, pso or aco)")),
        }
    }
}

/// Parameters of one algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum ParamSet {
    Ga(GaParams),
    Pso(PsoParams),
    Aco(AcoParams),
}

impl ParamSet {
    pub fn defaults(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Ga => ParamSet::Ga(GaParams::default()),
            Algorithm::Pso => ParamSet::Pso(PsoParams::default()),
            Algorithm::Aco => ParamSet::Aco(AcoParams::default()),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            ParamSet::Ga(_) => Algorithm::Ga,
            ParamSet::Pso(_) => Algorithm::Pso,
            ParamSet::Aco(_) => Algorithm::Aco,
        }
    }

    /// Sets a named parameter; integer parameters are rounded.
    pub fn set(&mut self, name: &str, v: f64) -> Result<(), HeuristicError> {
        let n = || v.round().max(0.0) as usize;
        match (self, name) {
            (ParamSet::Ga(p), "population") => p.population = n(),
            (ParamSet::Ga(p), "generations") => p.generations = n() as u64,
            (ParamSet::Ga(p), "crossover_prob") => p.crossover_prob = v,
            (ParamSet::Ga(p), "mutation_prob") => p.mutation_prob = v,
            (ParamSet::Ga(p), "replacement_percent") => p.replacement_percent = v,
            (ParamSet::Ga(p), "tournament_size") => p.tournament_size = n(),
            (ParamSet::Pso(p), "swarm") => p.swarm = n(),
            (ParamSet::Pso(p), "inertia") => p.inertia = v,
            (ParamSet::Pso(p), "cognitive") => p.cognitive = v,
            (ParamSet::Pso(p), "social") => p.social = v,
            (ParamSet::Pso(p), "iterations") => p.iterations = n() as u64,
            (ParamSet::Aco(p), "ants") => p.ants = n(),
            (ParamSet::Aco(p), "alpha") => p.alpha = v,
            (ParamSet::Aco(p), "beta") => p.beta = v,
            (ParamSet::Aco(p), "evaporation") => p.evaporation = v,
            (ParamSet::Aco(p), "deposit") => p.deposit = v,
            (ParamSet::Aco(p), "iterations") => p.iterations = n() as u64,
            (ParamSet::Aco(p), "tau0_max") => p.tau0_max = v,
            (s, _) => {
                return Err(HeuristicError::InvalidParams(format!(
                    "{:?} has no parameter `{name}`",
                    s.algorithm()
                )))
            }
        }
        Ok(())
    }

    pub fn run(
        &self,
        problem: &Problem<'_>,
        opts: &RunOptions,
    ) -> Result<(crate::exact::SolveReport, super::ConvergenceTrace), HeuristicError> {
        match self {
            ParamSet::Ga(p) => ga_solve(problem, p, opts),
            ParamSet::Pso(p) => pso_solve(problem, p, opts),
            ParamSet::Aco(p) => aco_solve(problem, p, opts),
        }
    }
}

/// Closed intervals per parameter name.
pub type SearchRanges = BTreeMap<String, (f64, f64)>;

/// The published search box of each algorithm.
pub fn default_ranges(algorithm: Algorithm) -> SearchRanges {
    let pairs: &[(&str, f64, f64)] = match algorithm {
        Algorithm::Ga => &[
            ("population", 50.0, 300.0),
            ("crossover_prob", 0.6, 1.0),
            ("mutation_prob", 1e-4, 0.1),
            ("generations", 100.0, 1000.0),
            ("replacement_percent", 90.0, 100.0),
        ],
        Algorithm::Pso => &[
            ("swarm", 50.0, 200.0),
            ("inertia", 0.3, 0.8),
            ("cognitive", 1.0, 4.0),
            ("social", 1.0, 4.0),
        ],
        Algorithm::Aco => &[
            ("ants", 20.0, 120.0),
            ("alpha", 0.5, 1.5),
            ("beta", 0.5, 2.0),
            ("evaporation", 0.1, 0.4),
        ],
    };
    pairs
        .iter()
        .map(|&(n, lo, hi)| (n.to_string(), (lo, hi)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub params: ParamSet,
    /// Final cost per seed; `null` in JSON when a run found nothing.
    #[serde(with = "unbounded::many")]
    pub costs: Vec<f64>,
    #[serde(with = "unbounded")]
    pub mean_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: ParamSet,
    #[serde(with = "unbounded")]
    pub best_mean: f64,
    /// Every trial in sampling order.
    pub leaderboard: Vec<TrialRecord>,
}

/// `+inf` costs travel as `null`, which JSON cannot otherwise express.
mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    fn wrap(v: f64) -> Option<f64> {
        v.is_finite().then_some(v)
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_some(&wrap(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }

    pub mod many {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|&x| wrap(x)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            let v = Vec::<Option<f64>>::deserialize(d)?;
            Ok(v.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
        }
    }
}

/// Random search: each trial samples every ranged parameter uniformly
/// (starting from `base` for the rest), runs once per seed `seed + s` for
/// `s < seeds_per_trial`, and is scored by its mean final cost. Trials in
/// which some run found no solution score `+inf`.
pub fn tune(
    problem: &Problem<'_>,
    base: ParamSet,
    ranges: &SearchRanges,
    trials: usize,
    seeds_per_trial: usize,
    seed: u64,
    run_opts: &RunOptions,
) -> Result<TuneResult, HeuristicError> {
    if trials == 0 || seeds_per_trial == 0 {
        return Err(HeuristicError::InvalidParams("trials and seeds must be at least 1".into()));
    }
    for (name, &(lo, hi)) in ranges {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(HeuristicError::InvalidParams(format!("empty range for `{name}`")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut leaderboard = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut params = base;
        for (name, &(lo, hi)) in ranges {
            let v = if lo == hi { lo } else { rng.random_range(lo..=hi) };
            params.set(name, v)?;
        }
        let mut costs = Vec::with_capacity(seeds_per_trial);
        for s in 0..seeds_per_trial {
            let opts = RunOptions {
                seed: seed.wrapping_add(s as u64),
                ..*run_opts
            };
            let (rep, _) = params.run(problem, &opts)?;
            costs.push(rep.objective.unwrap_or(f64::INFINITY));
        }
        let mean_cost = costs.iter().sum::<f64>() / costs.len() as f64;
        leaderboard.push(TrialRecord {
            params,
            costs,
            mean_cost,
        });
    }
    let best = leaderboard
        .iter()
        .min_by(|a, b| a.mean_cost.total_cmp(&b.mean_cost))
        .expect("at least one trial");
    Ok(TuneResult {
        best: best.params,
        best_mean: best.mean_cost,
        leaderboard,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, GeneratorConfig, ProblemShape};
    use crate::milp::ModelKind;

    fn inst() -> crate::SupplyChainInstance {
        generate_instance(&GeneratorConfig {
            shape: ProblemShape {
                tier1_count: 3,
                tier2_count: 2,
                parts_blue: 2,
                parts_llv: 1,
                forgings_blue: 1,
                forgings_llv: 1,
            },
            seed: 4,
            ..Default::default()
        })
        .unwrap()
    }

    fn small(alg: Algorithm) -> ParamSet {
        match alg {
            Algorithm::Ga => ParamSet::Ga(GaParams {
                population: 10,
                generations: 10,
                ..Default::default()
            }),
            Algorithm::Pso => ParamSet::Pso(PsoParams {
                swarm: 10,
                iterations: 10,
                ..Default::default()
            }),
            Algorithm::Aco => ParamSet::Aco(AcoParams {
                ants: 10,
                iterations: 10,
                ..Default::default()
            }),
        }
    }

    #[test]
    fn point_ranges_return_that_point() {
        let inst = inst();
        let pr = Problem::new(&inst, ModelKind::Integrated, None).unwrap();
        let ranges: SearchRanges = [("alpha".to_string(), (0.7, 0.7)), ("beta".to_string(), (1.2, 1.2))].into();
        let res = tune(&pr, small(Algorithm::Aco), &ranges, 3, 1, 5, &RunOptions::default()).unwrap();
        let ParamSet::Aco(p) = res.best else { panic!() };
        assert_eq!((p.alpha, p.beta), (0.7, 1.2));
        assert!(res.leaderboard.iter().all(|t| t.mean_cost == res.best_mean));
    }

    #[test]
    fn single_trial_is_returned() {
        let inst = inst();
        let pr = Problem::new(&inst, ModelKind::Integrated, None).unwrap();
        let ranges = default_ranges(Algorithm::Pso);
        let mut base = small(Algorithm::Pso);
        let res = tune(&pr, base, &ranges, 1, 2, 9, &RunOptions::default()).unwrap();
        assert_eq!(res.leaderboard.len(), 1);
        assert_eq!(res.best, res.leaderboard[0].params);
        base.set("swarm", 10.0).unwrap();
        assert!(base.set("alpha", 1.0).is_err());
    }

    #[test]
    fn best_is_the_argmin_of_the_leaderboard() {
        let inst = inst();
        let pr = Problem::new(&inst, ModelKind::Integrated, None).unwrap();
        let mut ranges = default_ranges(Algorithm::Ga);
        ranges.insert("population".into(), (4.0, 12.0));
        ranges.insert("generations".into(), (2.0, 10.0));
        let res = tune(&pr, small(Algorithm::Ga), &ranges, 20, 2, 1, &RunOptions::default()).unwrap();
        assert_eq!(res.leaderboard.len(), 20);
        assert!(res.leaderboard.iter().all(|t| res.best_mean <= t.mean_cost));
    }

    #[test]
    fn unsolved_trials_survive_json() {
        let t = TrialRecord {
            params: small(Algorithm::Aco),
            costs: vec![3.0, f64::INFINITY],
            mean_cost: f64::INFINITY,
        };
        let text = serde_json::to_string(&t).unwrap();
        assert!(text.contains("[3.0,null]"));
        assert_eq!(serde_json::from_str::<TrialRecord>(&text).unwrap(), t);
    }
}
