use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{
    Budget, Grid2, Grid3, InstanceError, ItemId, PenaltyPolicy, ProblemShape, SourcingMode,
    SourcingPolicy, SupplyChainInstance,
};

pub const SCHEMA_VERSION: u32 = 1;
const SCHEMA_NAME: &str = "ssoa.instance";

fn default_schema() -> String {
    SCHEMA_NAME.to_string()
}

/// On-disk JSON form of an instance. Maps are keyed by item ids so the
/// document reads naturally; tables are nested arrays indexed by supplier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub schema_version: u32,
    pub tier1_count: usize,
    pub tier2_count: usize,
    pub item_counts: ItemCounts,
    pub part_orders: BTreeMap<ItemId, u64>,
    #[serde(rename = "yield")]
    pub yields: BTreeMap<ItemId, BTreeMap<ItemId, u32>>,
    /// `part -> [tier1]`
    pub machining_unit_cost: BTreeMap<ItemId, Vec<f64>>,
    pub machining_transport_cost: BTreeMap<ItemId, Vec<f64>>,
    /// `forging -> [tier1][tier2]`
    pub forging_unit_cost: BTreeMap<ItemId, Vec<Vec<f64>>>,
    pub forging_transport_cost: BTreeMap<ItemId, Vec<Vec<f64>>>,
    pub tier1_budget: Vec<Budget>,
    pub tier2_budget: Vec<Budget>,
    #[serde(default)]
    pub must_make_tier1: Vec<Tier1Pair>,
    #[serde(default)]
    pub must_make_tier2: Vec<Tier2Triple>,
    #[serde(default)]
    pub cannot_make_tier1: Vec<Tier1Pair>,
    #[serde(default)]
    pub cannot_make_tier2: Vec<Tier2Triple>,
    pub penalty: PenaltyDocument,
    pub sourcing: SourcingDocument,
    #[serde(default)]
    pub bid_round: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemCounts {
    pub parts_blue: usize,
    pub parts_llv: usize,
    pub forgings_blue: usize,
    pub forgings_llv: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tier1Pair {
    pub item: ItemId,
    pub tier1: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tier2Triple {
    pub item: ItemId,
    pub tier1: usize,
    pub tier2: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyDocument {
    pub threshold: Vec<f64>,
    pub factor: Vec<f64>,
    #[serde(default)]
    pub big_m: Option<f64>,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcingDocument {
    pub mode: SourcingMode,
    pub part_split: BTreeMap<ItemId, f64>,
    pub forging_split: BTreeMap<ItemId, f64>,
}

/// Serializes an instance to its JSON document. Output is deterministic.
pub fn save_instance(inst: &SupplyChainInstance) -> String {
    let doc = InstanceDocument::from(inst);
    let mut s = serde_json::to_string_pretty(&doc).expect("instance documents always serialize");
    s.push('\n');
    s
}

/// Parses and schema-checks an instance document. Invariant checks beyond
/// the schema are left to [`super::validate_instance`].
pub fn load_instance(text: &str) -> Result<SupplyChainInstance, InstanceError> {
    let doc: InstanceDocument = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    doc.into_instance()
}

impl From<&SupplyChainInstance> for InstanceDocument {
    fn from(inst: &SupplyChainInstance) -> Self {
        let shape = inst.shape;
        let np = shape.part_count();
        let nf = shape.forging_count();
        let part = |i: usize| shape.part_id(i);
        let forging = |k: usize| shape.forging_id(k);

        let grid3_rows = |g: &Grid3, k: usize| -> Vec<Vec<f64>> {
            (0..shape.tier1_count)
                .map(|j| (0..shape.tier2_count).map(|l| g.get(k, j, l)).collect())
                .collect()
        };

        InstanceDocument {
            schema: SCHEMA_NAME.to_string(),
            schema_version: SCHEMA_VERSION,
            tier1_count: shape.tier1_count,
            tier2_count: shape.tier2_count,
            item_counts: ItemCounts {
                parts_blue: shape.parts_blue,
                parts_llv: shape.parts_llv,
                forgings_blue: shape.forgings_blue,
                forgings_llv: shape.forgings_llv,
            },
            part_orders: (0..np).map(|i| (part(i), inst.part_orders[i])).collect(),
            yields: (0..np)
                .map(|i| {
                    let links = inst.yields[i].iter().map(|&(k, y)| (forging(k), y)).collect();
                    (part(i), links)
                })
                .collect(),
            machining_unit_cost: (0..np)
                .map(|i| (part(i), inst.machining_unit_cost.row(i).to_vec()))
                .collect(),
            machining_transport_cost: (0..np)
                .map(|i| (part(i), inst.machining_transport_cost.row(i).to_vec()))
                .collect(),
            forging_unit_cost: (0..nf)
                .map(|k| (forging(k), grid3_rows(&inst.forging_unit_cost, k)))
                .collect(),
            forging_transport_cost: (0..nf)
                .map(|k| (forging(k), grid3_rows(&inst.forging_transport_cost, k)))
                .collect(),
            tier1_budget: inst.tier1_budget.clone(),
            tier2_budget: inst.tier2_budget.clone(),
            must_make_tier1: pairs_out(&inst.must_make_tier1, &shape),
            must_make_tier2: triples_out(&inst.must_make_tier2, &shape),
            cannot_make_tier1: pairs_out(&inst.cannot_make_tier1, &shape),
            cannot_make_tier2: triples_out(&inst.cannot_make_tier2, &shape),
            penalty: PenaltyDocument {
                threshold: inst.penalty.threshold.clone(),
                factor: inst.penalty.factor.clone(),
                big_m: inst.penalty.big_m,
                epsilon: inst.penalty.epsilon,
            },
            sourcing: SourcingDocument {
                mode: inst.sourcing.mode,
                part_split: (0..np).map(|i| (part(i), inst.sourcing.part_split[i])).collect(),
                forging_split: (0..nf)
                    .map(|k| (forging(k), inst.sourcing.forging_split[k]))
                    .collect(),
            },
            bid_round: inst.bid_round,
        }
    }
}

fn pairs_out(set: &BTreeSet<(usize, usize)>, shape: &ProblemShape) -> Vec<Tier1Pair> {
    set.iter()
        .map(|&(i, j)| Tier1Pair {
            item: shape.part_id(i),
            tier1: j,
        })
        .collect()
}

fn triples_out(set: &BTreeSet<(usize, usize, usize)>, shape: &ProblemShape) -> Vec<Tier2Triple> {
    set.iter()
        .map(|&(k, j, l)| Tier2Triple {
            item: shape.forging_id(k),
            tier1: j,
            tier2: l,
        })
        .collect()
}

impl InstanceDocument {
    pub fn into_instance(self) -> Result<SupplyChainInstance, InstanceError> {
        if self.schema != SCHEMA_NAME {
            return Err(InstanceError::schema(
                "schema",
                format!("expected `{SCHEMA_NAME}`, found `{}`", self.schema),
            ));
        }
        if self.schema_version != SCHEMA_VERSION {
            return Err(InstanceError::schema(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        let shape = ProblemShape {
            tier1_count: self.tier1_count,
            tier2_count: self.tier2_count,
            parts_blue: self.item_counts.parts_blue,
            parts_llv: self.item_counts.parts_llv,
            forgings_blue: self.item_counts.forgings_blue,
            forgings_llv: self.item_counts.forgings_llv,
        };
        let (nj, nl) = (shape.tier1_count, shape.tier2_count);
        let np = shape.part_count();
        let nf = shape.forging_count();

        let part_orders = dense_parts(&shape, "part_orders", &self.part_orders)?;

        let mut yields = vec![Vec::new(); np];
        check_part_keys(&shape, "yield", self.yields.keys())?;
        for (pid, links) in &self.yields {
            let i = shape.part_index(*pid).expect("checked above");
            for (fid, &y) in links {
                let k = shape.forging_index(*fid).ok_or_else(|| {
                    InstanceError::schema(format!("yield.{pid}.{fid}"), "not a declared forging")
                })?;
                if y > 0 {
                    yields[i].push((k, y));
                }
            }
            yields[i].sort_unstable();
        }

        let machining_unit_cost =
            grid2_in(&shape, "machining_unit_cost", &self.machining_unit_cost)?;
        let machining_transport_cost =
            grid2_in(&shape, "machining_transport_cost", &self.machining_transport_cost)?;
        let forging_unit_cost = grid3_in(&shape, "forging_unit_cost", &self.forging_unit_cost)?;
        let forging_transport_cost =
            grid3_in(&shape, "forging_transport_cost", &self.forging_transport_cost)?;

        expect_len("tier1_budget", self.tier1_budget.len(), nj)?;
        expect_len("tier2_budget", self.tier2_budget.len(), nl)?;
        expect_len("penalty.threshold", self.penalty.threshold.len(), nl)?;
        expect_len("penalty.factor", self.penalty.factor.len(), nl)?;

        let must_make_tier1 = pairs_in(&shape, "must_make_tier1", &self.must_make_tier1)?;
        let cannot_make_tier1 = pairs_in(&shape, "cannot_make_tier1", &self.cannot_make_tier1)?;
        let must_make_tier2 = triples_in(&shape, "must_make_tier2", &self.must_make_tier2)?;
        let cannot_make_tier2 = triples_in(&shape, "cannot_make_tier2", &self.cannot_make_tier2)?;

        let part_split = dense_parts(&shape, "sourcing.part_split", &self.sourcing.part_split)?;
        check_forging_keys(&shape, "sourcing.forging_split", self.sourcing.forging_split.keys())?;
        let mut forging_split = vec![0.0; nf];
        for (fid, &s) in &self.sourcing.forging_split {
            forging_split[shape.forging_index(*fid).expect("checked")] = s;
        }

        Ok(SupplyChainInstance {
            shape,
            part_orders,
            yields,
            machining_unit_cost,
            machining_transport_cost,
            forging_unit_cost,
            forging_transport_cost,
            tier1_budget: self.tier1_budget,
            tier2_budget: self.tier2_budget,
            must_make_tier1,
            must_make_tier2,
            cannot_make_tier1,
            cannot_make_tier2,
            penalty: PenaltyPolicy {
                threshold: self.penalty.threshold,
                factor: self.penalty.factor,
                big_m: self.penalty.big_m,
                epsilon: self.penalty.epsilon,
            },
            sourcing: SourcingPolicy {
                mode: self.sourcing.mode,
                part_split,
                forging_split,
            },
            bid_round: self.bid_round,
        })
    }
}

fn expect_len(path: &str, found: usize, expected: usize) -> Result<(), InstanceError> {
    if found != expected {
        return Err(InstanceError::schema(
            path,
            format!("expected {expected} entries, found {found}"),
        ));
    }
    Ok(())
}

fn check_part_keys<'a>(
    shape: &ProblemShape,
    path: &str,
    keys: impl Iterator<Item = &'a ItemId>,
) -> Result<(), InstanceError> {
    let mut seen = 0;
    for id in keys {
        if shape.part_index(*id).is_none() {
            return Err(InstanceError::schema(
                format!("{path}.{id}"),
                "not a declared part",
            ));
        }
        seen += 1;
    }
    expect_len(path, seen, shape.part_count())
}

fn check_forging_keys<'a>(
    shape: &ProblemShape,
    path: &str,
    keys: impl Iterator<Item = &'a ItemId>,
) -> Result<(), InstanceError> {
    let mut seen = 0;
    for id in keys {
        if shape.forging_index(*id).is_none() {
            return Err(InstanceError::schema(
                format!("{path}.{id}"),
                "not a declared forging",
            ));
        }
        seen += 1;
    }
    expect_len(path, seen, shape.forging_count())
}

fn dense_parts<T: Copy + Default>(
    shape: &ProblemShape,
    path: &str,
    map: &BTreeMap<ItemId, T>,
) -> Result<Vec<T>, InstanceError> {
    check_part_keys(shape, path, map.keys())?;
    let mut out = vec![T::default(); shape.part_count()];
    for (id, &v) in map {
        out[shape.part_index(*id).expect("checked")] = v;
    }
    Ok(out)
}

fn grid2_in(
    shape: &ProblemShape,
    path: &str,
    map: &BTreeMap<ItemId, Vec<f64>>,
) -> Result<Grid2, InstanceError> {
    check_part_keys(shape, path, map.keys())?;
    let mut g = Grid2::filled(shape.part_count(), shape.tier1_count, 0.0);
    for (id, row) in map {
        expect_len(&format!("{path}.{id}"), row.len(), shape.tier1_count)?;
        let i = shape.part_index(*id).expect("checked");
        for (j, &v) in row.iter().enumerate() {
            g.set(i, j, v);
        }
    }
    Ok(g)
}

fn grid3_in(
    shape: &ProblemShape,
    path: &str,
    map: &BTreeMap<ItemId, Vec<Vec<f64>>>,
) -> Result<Grid3, InstanceError> {
    check_forging_keys(shape, path, map.keys())?;
    let mut g = Grid3::filled(
        shape.forging_count(),
        shape.tier1_count,
        shape.tier2_count,
        0.0,
    );
    for (id, rows) in map {
        expect_len(&format!("{path}.{id}"), rows.len(), shape.tier1_count)?;
        let k = shape.forging_index(*id).expect("checked");
        for (j, row) in rows.iter().enumerate() {
            expect_len(&format!("{path}.{id}[{j}]"), row.len(), shape.tier2_count)?;
            for (l, &v) in row.iter().enumerate() {
                g.set(k, j, l, v);
            }
        }
    }
    Ok(g)
}

fn pairs_in(
    shape: &ProblemShape,
    path: &str,
    pairs: &[Tier1Pair],
) -> Result<BTreeSet<(usize, usize)>, InstanceError> {
    pairs
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let i = shape.part_index(p.item).ok_or_else(|| {
                InstanceError::schema(format!("{path}[{n}].item"), "not a declared part")
            })?;
            if p.tier1 >= shape.tier1_count {
                return Err(InstanceError::schema(
                    format!("{path}[{n}].tier1"),
                    "supplier index out of range",
                ));
            }
            Ok((i, p.tier1))
        })
        .collect()
}

fn triples_in(
    shape: &ProblemShape,
    path: &str,
    triples: &[Tier2Triple],
) -> Result<BTreeSet<(usize, usize, usize)>, InstanceError> {
    triples
        .iter()
        .enumerate()
        .map(|(n, t)| {
            let k = shape.forging_index(t.item).ok_or_else(|| {
                InstanceError::schema(format!("{path}[{n}].item"), "not a declared forging")
            })?;
            if t.tier1 >= shape.tier1_count {
                return Err(InstanceError::schema(
                    format!("{path}[{n}].tier1"),
                    "supplier index out of range",
                ));
            }
            if t.tier2 >= shape.tier2_count {
                return Err(InstanceError::schema(
                    format!("{path}[{n}].tier2"),
                    "supplier index out of range",
                ));
            }
            Ok((k, t.tier1, t.tier2))
        })
        .collect()
}
