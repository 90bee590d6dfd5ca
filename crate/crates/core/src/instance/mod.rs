//! Domain types for the two-tier problem, validation, generation and
//! the instance document format.

mod bids;
mod document;
mod generate;
mod ids;
mod validate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use bids::{apply_bid_round, BidDelta, CostOverride, CostTable};
pub use document::{load_instance, save_instance, InstanceDocument, SCHEMA_VERSION};
pub use generate::{generate_instance, CountsPerKind, GeneratorConfig, Range};
pub use ids::{ItemId, ItemKind, ParseItemIdError, ProblemShape};
pub use validate::{validate_instance, Rule, Violation};

/// Multiplier applied to the largest genuine cost of a table to price a
/// cannot-make pair.
pub const PROHIBITIVE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InstanceError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("infeasible generator config: {0}")]
    InfeasibleConfig(String),
    #[error("unknown cost key {0}")]
    UnknownKey(String),
    #[error("negative or non-finite cost {value} for {key}")]
    NegativeCost { key: String, value: f64 },
}

impl InstanceError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        InstanceError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Dense row-major table indexed by `(row, col)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Grid2 {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Grid2 {
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Grid2 {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Dense table indexed by `(forging, tier1, tier2)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Grid3 {
    pub dims: [usize; 3],
    pub data: Vec<f64>,
}

impl Grid3 {
    pub fn filled(a: usize, b: usize, c: usize, value: f64) -> Self {
        Grid3 {
            dims: [a, b, c],
            data: vec![value; a * b * c],
        }
    }

    #[inline]
    fn offset(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.dims[1] + b) * self.dims[2] + c
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[self.offset(a, b, c)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        let o = self.offset(a, b, c);
        self.data[o] = v;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub min: f64,
    pub max: f64,
}

impl Budget {
    pub const LOOSE: Budget = Budget { min: 0.0, max: 1e12 };

    pub fn contains(&self, spend: f64) -> bool {
        spend >= self.min - crate::MONEY_TOL && spend <= self.max + crate::MONEY_TOL
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourcingMode {
    Single,
    Dual,
}

impl SourcingMode {
    /// Number of proportions each item is split into.
    pub fn proportions(self) -> usize {
        match self {
            SourcingMode::Single => 1,
            SourcingMode::Dual => 2,
        }
    }
}

/// Sourcing strategy. Splits are kept for every item even in single mode so
/// the same instance can be re-solved under either strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct SourcingPolicy {
    pub mode: SourcingMode,
    /// First proportion `s` per flat part index; the second is `1 - s`.
    pub part_split: Vec<f64>,
    /// First proportion per flat forging index.
    pub forging_split: Vec<f64>,
}

/// Penalty on LLV forging prices charged by a forger whose blue-chip orders
/// fall below its threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyPolicy {
    /// Blue-chip spend threshold per Tier2 supplier.
    pub threshold: Vec<f64>,
    /// LLV unit-price multiplier applied when the threshold is missed.
    pub factor: Vec<f64>,
    /// Big-M override; `None` lets the model builder pick a tight value.
    pub big_m: Option<f64>,
    pub epsilon: f64,
}

/// Penalty level of an LLV forging assignment: base price or penalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PenaltyLevel {
    #[serde(rename = "1")]
    Base,
    #[serde(rename = "2")]
    Penalized,
}

impl PenaltyLevel {
    pub fn from_flag(penalized: bool) -> Self {
        if penalized {
            PenaltyLevel::Penalized
        } else {
            PenaltyLevel::Base
        }
    }

    pub fn number(self) -> u8 {
        match self {
            PenaltyLevel::Base => 1,
            PenaltyLevel::Penalized => 2,
        }
    }
}

/// The full two-tier problem.
///
/// Parts and forgings use flat indices (blue-chip first, then LLV, see
/// [`ProblemShape::part_index`]). Instances are plain values: every
/// operation that changes data returns a new instance.
#[derive(Clone, Debug, PartialEq)]
pub struct SupplyChainInstance {
    pub shape: ProblemShape,
    /// Units ordered per part.
    pub part_orders: Vec<u64>,
    /// Per part, `(forging, yield)` pairs sorted by forging, yields >= 1.
    pub yields: Vec<Vec<(usize, u32)>>,
    /// `[part, tier1]`
    pub machining_unit_cost: Grid2,
    pub machining_transport_cost: Grid2,
    /// `[forging, tier1, tier2]`
    pub forging_unit_cost: Grid3,
    pub forging_transport_cost: Grid3,
    pub tier1_budget: Vec<Budget>,
    pub tier2_budget: Vec<Budget>,
    pub must_make_tier1: BTreeSet<(usize, usize)>,
    pub must_make_tier2: BTreeSet<(usize, usize, usize)>,
    pub cannot_make_tier1: BTreeSet<(usize, usize)>,
    pub cannot_make_tier2: BTreeSet<(usize, usize, usize)>,
    pub penalty: PenaltyPolicy,
    pub sourcing: SourcingPolicy,
    /// Number of bid rounds applied since the instance was created.
    pub bid_round: u32,
}

/// Unit prices used in place of genuine costs for cannot-make pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProhibitiveCosts {
    pub machining_unit: f64,
    pub forging_unit: f64,
}

impl SupplyChainInstance {
    pub fn mode(&self) -> SourcingMode {
        self.sourcing.mode
    }

    pub fn proportions(&self) -> usize {
        self.sourcing.mode.proportions()
    }

    pub fn part_count(&self) -> usize {
        self.shape.part_count()
    }

    pub fn forging_count(&self) -> usize {
        self.shape.forging_count()
    }

    /// Same data under a different sourcing strategy.
    pub fn with_mode(&self, mode: SourcingMode) -> Self {
        let mut out = self.clone();
        out.sourcing.mode = mode;
        out
    }

    /// Fraction of part `i`'s order carried by proportion `p` (0-based).
    #[inline]
    pub fn part_fraction(&self, part: usize, proportion: usize) -> f64 {
        split_fraction(self.sourcing.mode, self.sourcing.part_split[part], proportion)
    }

    #[inline]
    pub fn forging_fraction(&self, forging: usize, proportion: usize) -> f64 {
        split_fraction(
            self.sourcing.mode,
            self.sourcing.forging_split[forging],
            proportion,
        )
    }

    /// Prices for cannot-make pairs: a fixed multiple of the largest genuine
    /// unit cost in the machining and forging tables.
    pub fn prohibitive_costs(&self) -> ProhibitiveCosts {
        let mut max_m = 0.0f64;
        for i in 0..self.part_count() {
            for j in 0..self.shape.tier1_count {
                if !self.cannot_make_tier1.contains(&(i, j)) {
                    max_m = max_m.max(self.machining_unit_cost.get(i, j));
                }
            }
        }
        let mut max_f = 0.0f64;
        let [nk, nj, nl] = self.forging_unit_cost.dims;
        for k in 0..nk {
            for j in 0..nj {
                for l in 0..nl {
                    if !self.cannot_make_tier2.contains(&(k, j, l)) {
                        max_f = max_f.max(self.forging_unit_cost.get(k, j, l));
                    }
                }
            }
        }
        ProhibitiveCosts {
            machining_unit: PROHIBITIVE_FACTOR * max_m.max(1.0),
            forging_unit: PROHIBITIVE_FACTOR * max_f.max(1.0),
        }
    }

    /// Number of `(part, forging)` pairs with a nonzero yield.
    pub fn yield_links(&self) -> usize {
        self.yields.iter().map(Vec::len).sum()
    }

    /// Parts consuming each forging, as `(part, yield)` lists.
    pub fn forging_consumers(&self) -> Vec<Vec<(usize, u32)>> {
        let mut out = vec![Vec::new(); self.forging_count()];
        for (i, links) in self.yields.iter().enumerate() {
            for &(k, y) in links {
                out[k].push((i, y));
            }
        }
        out
    }

    /// Tier1 suppliers not barred from machining part `i`.
    pub fn eligible_tier1(&self, part: usize) -> Vec<usize> {
        (0..self.shape.tier1_count)
            .filter(|&j| !self.cannot_make_tier1.contains(&(part, j)))
            .collect()
    }

    /// Tier2 suppliers not barred from supplying forging `k` to Tier1 `j`.
    pub fn eligible_tier2(&self, forging: usize, tier1: usize) -> Vec<usize> {
        (0..self.shape.tier2_count)
            .filter(|&l| !self.cannot_make_tier2.contains(&(forging, tier1, l)))
            .collect()
    }

    /// Must-make Tier1 suppliers of part `i`, ascending.
    pub fn must_make_tier1_of(&self, part: usize) -> Vec<usize> {
        self.must_make_tier1
            .range((part, 0)..(part + 1, 0))
            .map(|&(_, j)| j)
            .collect()
    }

    /// Must-make Tier2 suppliers of forging slot `(k, j)`, ascending.
    pub fn must_make_tier2_of(&self, forging: usize, tier1: usize) -> Vec<usize> {
        self.must_make_tier2
            .range((forging, tier1, 0)..(forging, tier1 + 1, 0))
            .map(|&(_, _, l)| l)
            .collect()
    }

    /// Content hash of the instance document, hex encoded.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let doc = save_instance(self);
        let digest = Sha256::digest(doc.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[inline]
fn split_fraction(mode: SourcingMode, s: f64, proportion: usize) -> f64 {
    match (mode, proportion) {
        (SourcingMode::Single, _) => 1.0,
        (SourcingMode::Dual, 0) => s,
        (SourcingMode::Dual, _) => 1.0 - s,
    }
}
