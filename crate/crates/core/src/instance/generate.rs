//! Random instance generation.
//!
//! Sampling uses ChaCha8 (`rand_chacha`) seeded with `seed_from_u64`, and
//! draws happen in a fixed order, so a `(config, seed)` pair always
//! produces the same instance on every platform.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    Budget, Grid2, Grid3, InstanceError, PenaltyPolicy, ProblemShape, SourcingMode,
    SourcingPolicy, SupplyChainInstance,
};

const MAX_RESAMPLES: usize = 100;

/// Closed sampling interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range<T> {
    pub min: T,
    pub max: T,
}

impl<T> Range<T> {
    pub const fn new(min: T, max: T) -> Self {
        Range { min, max }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CountsPerKind {
    pub tier1_blue: usize,
    pub tier1_llv: usize,
    pub tier2_blue: usize,
    pub tier2_llv: usize,
}

impl CountsPerKind {
    pub const fn uniform(n: usize) -> Self {
        CountsPerKind {
            tier1_blue: n,
            tier1_llv: n,
            tier2_blue: n,
            tier2_llv: n,
        }
    }
}

/// Generator settings. Defaults reproduce the case-study recipe; only the
/// shape and seed normally need to be set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub shape: ProblemShape,
    pub order: Range<u64>,
    pub yield_per_part: Range<u32>,
    /// Number of distinct forgings each part consumes.
    pub forgings_per_part: Range<usize>,
    pub machining_unit_cost: Range<f64>,
    pub machining_transport_cost: Range<f64>,
    pub forging_unit_cost: Range<f64>,
    pub forging_transport_cost: Range<f64>,
    pub tier1_budget: Budget,
    pub tier2_budget: Budget,
    pub must_make: CountsPerKind,
    pub cannot_make: CountsPerKind,
    pub penalty_threshold: f64,
    pub penalty_factor: f64,
    pub epsilon: f64,
    pub sourcing_mode: SourcingMode,
    /// First proportion used for every item.
    pub split: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            shape: ProblemShape::full_scale(),
            order: Range::new(100, 500),
            yield_per_part: Range::new(1, 3),
            forgings_per_part: Range::new(1, 3),
            machining_unit_cost: Range::new(5000.0, 10000.0),
            machining_transport_cost: Range::new(2.0, 100.0),
            forging_unit_cost: Range::new(1.0, 10.0),
            forging_transport_cost: Range::new(1.0, 5.0),
            tier1_budget: Budget::LOOSE,
            tier2_budget: Budget::LOOSE,
            must_make: CountsPerKind::uniform(5),
            cannot_make: CountsPerKind::default(),
            penalty_threshold: 1000.0,
            penalty_factor: 5.0,
            epsilon: 1e-3,
            sourcing_mode: SourcingMode::Dual,
            split: 0.7,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn with_shape(shape: ProblemShape) -> Self {
        GeneratorConfig {
            shape,
            ..Default::default()
        }
    }

    fn check(&self) -> Result<(), InstanceError> {
        let bad = |what: &str| Err(InstanceError::InfeasibleConfig(format!("empty range for {what}")));
        if self.order.min > self.order.max {
            return bad("order");
        }
        if self.yield_per_part.min == 0 || self.yield_per_part.min > self.yield_per_part.max {
            return bad("yield_per_part (must be >= 1)");
        }
        if self.forgings_per_part.min == 0 || self.forgings_per_part.min > self.forgings_per_part.max
        {
            return bad("forgings_per_part (must be >= 1)");
        }
        for (name, r) in [
            ("machining_unit_cost", self.machining_unit_cost),
            ("machining_transport_cost", self.machining_transport_cost),
            ("forging_unit_cost", self.forging_unit_cost),
            ("forging_transport_cost", self.forging_transport_cost),
        ] {
            if !(r.min.is_finite() && r.max.is_finite()) || r.min < 0.0 || r.min > r.max {
                return bad(name);
            }
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(InstanceError::InfeasibleConfig(format!(
                "split {} outside (0, 1)",
                self.split
            )));
        }
        let s = &self.shape;
        if s.part_count() > 0 && s.forging_count() == 0 {
            return Err(InstanceError::InfeasibleConfig(
                "parts need at least one forging".into(),
            ));
        }
        let need = self.sourcing_mode.proportions();
        if s.part_count() > 0 && s.tier1_count < need {
            return Err(InstanceError::InfeasibleConfig(format!(
                "{:?} sourcing needs at least {need} Tier1 suppliers",
                self.sourcing_mode
            )));
        }
        if s.forging_count() > 0 && s.tier1_count > 0 && s.tier2_count < need {
            return Err(InstanceError::InfeasibleConfig(format!(
                "{:?} sourcing needs at least {need} Tier2 suppliers",
                self.sourcing_mode
            )));
        }
        Ok(())
    }
}

fn cents(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn uniform_money(rng: &mut ChaCha8Rng, r: Range<f64>) -> f64 {
    if r.min == r.max {
        r.min
    } else {
        cents(rng.random_range(r.min..=r.max))
    }
}

/// Generates a random instance from `config`.
pub fn generate_instance(config: &GeneratorConfig) -> Result<SupplyChainInstance, InstanceError> {
    config.check()?;
    let shape = config.shape;
    let (nj, nl) = (shape.tier1_count, shape.tier2_count);
    let np = shape.part_count();
    let nf = shape.forging_count();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let part_orders: Vec<u64> = (0..np)
        .map(|_| rng.random_range(config.order.min..=config.order.max))
        .collect();

    let mut yields: Vec<Vec<(usize, u32)>> = vec![Vec::new(); np];
    if np > 0 {
        for links in yields.iter_mut() {
            let hi = config.forgings_per_part.max.min(nf);
            let lo = config.forgings_per_part.min.min(hi);
            let count = rng.random_range(lo..=hi);
            for k in sample(&mut rng, nf, count).into_iter() {
                let y = rng.random_range(config.yield_per_part.min..=config.yield_per_part.max);
                links.push((k, y));
            }
        }
        // every forging is demanded by at least one part
        let mut used = vec![false; nf];
        for links in &yields {
            for &(k, _) in links {
                used[k] = true;
            }
        }
        for (k, used) in used.into_iter().enumerate() {
            if !used {
                let i = rng.random_range(0..np);
                let y = rng.random_range(config.yield_per_part.min..=config.yield_per_part.max);
                yields[i].push((k, y));
            }
        }
        for links in yields.iter_mut() {
            links.sort_unstable();
        }
    }

    let mut machining_unit_cost = Grid2::filled(np, nj, 0.0);
    let mut machining_transport_cost = Grid2::filled(np, nj, 0.0);
    for i in 0..np {
        for j in 0..nj {
            machining_unit_cost.set(i, j, uniform_money(&mut rng, config.machining_unit_cost));
            machining_transport_cost.set(
                i,
                j,
                uniform_money(&mut rng, config.machining_transport_cost),
            );
        }
    }
    let mut forging_unit_cost = Grid3::filled(nf, nj, nl, 0.0);
    let mut forging_transport_cost = Grid3::filled(nf, nj, nl, 0.0);
    for k in 0..nf {
        for j in 0..nj {
            for l in 0..nl {
                forging_unit_cost.set(k, j, l, uniform_money(&mut rng, config.forging_unit_cost));
                forging_transport_cost.set(
                    k,
                    j,
                    l,
                    uniform_money(&mut rng, config.forging_transport_cost),
                );
            }
        }
    }

    let need = config.sourcing_mode.proportions();
    let (cannot_make_tier1, cannot_make_tier2) = sample_cannot_make(&mut rng, config, need)?;
    let must_make_tier1 = sample_must_make_tier1(&mut rng, config, &cannot_make_tier1);
    let must_make_tier2 = sample_must_make_tier2(&mut rng, config, &cannot_make_tier2);

    Ok(SupplyChainInstance {
        shape,
        part_orders,
        yields,
        machining_unit_cost,
        machining_transport_cost,
        forging_unit_cost,
        forging_transport_cost,
        tier1_budget: vec![config.tier1_budget; nj],
        tier2_budget: vec![config.tier2_budget; nl],
        must_make_tier1,
        must_make_tier2,
        cannot_make_tier1,
        cannot_make_tier2,
        penalty: PenaltyPolicy {
            threshold: vec![config.penalty_threshold; nl],
            factor: vec![config.penalty_factor; nl],
            big_m: None,
            epsilon: config.epsilon,
        },
        sourcing: SourcingPolicy {
            mode: config.sourcing_mode,
            part_split: vec![config.split; np],
            forging_split: vec![config.split; nf],
        },
        bid_round: 0,
    })
}

type Tier1Set = BTreeSet<(usize, usize)>;
type Tier2Set = BTreeSet<(usize, usize, usize)>;

/// Samples cannot-make pairs, resampling whenever an item would be left with
/// fewer eligible suppliers than the sourcing mode needs.
fn sample_cannot_make(
    rng: &mut ChaCha8Rng,
    config: &GeneratorConfig,
    need: usize,
) -> Result<(Tier1Set, Tier2Set), InstanceError> {
    let s = config.shape;
    let (nj, nl) = (s.tier1_count, s.tier2_count);
    let c = config.cannot_make;
    if c == CountsPerKind::default() {
        return Ok((BTreeSet::new(), BTreeSet::new()));
    }
    for _ in 0..MAX_RESAMPLES {
        let mut t1 = BTreeSet::new();
        for (offset, count, n) in [(0, c.tier1_blue, s.parts_blue), (s.parts_blue, c.tier1_llv, s.parts_llv)] {
            let pool = n * nj;
            for flat in sample(rng, pool, count.min(pool)).into_iter() {
                t1.insert((offset + flat / nj, flat % nj));
            }
        }
        let mut t2 = BTreeSet::new();
        for (offset, count, n) in [
            (0, c.tier2_blue, s.forgings_blue),
            (s.forgings_blue, c.tier2_llv, s.forgings_llv),
        ] {
            let pool = n * nj * nl;
            for flat in sample(rng, pool, count.min(pool)).into_iter() {
                t2.insert((offset + flat / (nj * nl), (flat / nl) % nj, flat % nl));
            }
        }
        let tier1_ok = (0..s.part_count())
            .all(|i| (0..nj).filter(|&j| !t1.contains(&(i, j))).count() >= need);
        let tier2_ok = (0..s.forging_count()).all(|k| {
            (0..nj).all(|j| (0..nl).filter(|&l| !t2.contains(&(k, j, l))).count() >= need)
        });
        if tier1_ok && tier2_ok {
            return Ok((t1, t2));
        }
    }
    Err(InstanceError::InfeasibleConfig(format!(
        "could not place cannot-make pairs leaving {need} eligible suppliers per item after {MAX_RESAMPLES} attempts"
    )))
}

/// One must-make pair per sampled part, on a supplier that is not barred.
fn sample_must_make_tier1(rng: &mut ChaCha8Rng, config: &GeneratorConfig, cannot: &Tier1Set) -> Tier1Set {
    let s = config.shape;
    let mut out = BTreeSet::new();
    if s.tier1_count == 0 {
        return out;
    }
    for (offset, count, n) in [
        (0, config.must_make.tier1_blue, s.parts_blue),
        (s.parts_blue, config.must_make.tier1_llv, s.parts_llv),
    ] {
        for idx in sample(rng, n, count.min(n)).into_iter() {
            let i = offset + idx;
            let eligible: Vec<usize> = (0..s.tier1_count)
                .filter(|&j| !cannot.contains(&(i, j)))
                .collect();
            let j = eligible[rng.random_range(0..eligible.len())];
            out.insert((i, j));
        }
    }
    out
}

/// One must-make triple per sampled `(forging, tier1)` slot.
fn sample_must_make_tier2(rng: &mut ChaCha8Rng, config: &GeneratorConfig, cannot: &Tier2Set) -> Tier2Set {
    let s = config.shape;
    let (nj, nl) = (s.tier1_count, s.tier2_count);
    let mut out = BTreeSet::new();
    if nj == 0 || nl == 0 {
        return out;
    }
    for (offset, count, n) in [
        (0, config.must_make.tier2_blue, s.forgings_blue),
        (s.forgings_blue, config.must_make.tier2_llv, s.forgings_llv),
    ] {
        let pool = n * nj;
        for flat in sample(rng, pool, count.min(pool)).into_iter() {
            let (k, j) = (offset + flat / nj, flat % nj);
            let eligible: Vec<usize> = (0..nl).filter(|&l| !cannot.contains(&(k, j, l))).collect();
            let l = eligible[rng.random_range(0..eligible.len())];
            out.insert((k, j, l));
        }
    }
    out
}
