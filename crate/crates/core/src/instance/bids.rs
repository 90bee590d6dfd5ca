use serde::{Deserialize, Serialize};

use super::{InstanceError, ItemId, SupplyChainInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostTable {
    MachiningUnit,
    MachiningTransport,
    ForgingUnit,
    ForgingTransport,
}

/// New price for one cost-table entry. Forging tables need `tier2`,
/// machining tables must leave it out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostOverride {
    pub table: CostTable,
    pub item: ItemId,
    pub tier1: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier2: Option<usize>,
    pub value: f64,
}

impl CostOverride {
    fn key(&self) -> String {
        match self.tier2 {
            Some(l) => format!("{:?}[{}][{}][{}]", self.table, self.item, self.tier1, l),
            None => format!("{:?}[{}][{}]", self.table, self.item, self.tier1),
        }
    }
}

/// Price changes submitted in one bidding round.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BidDelta {
    #[serde(default)]
    pub overrides: Vec<CostOverride>,
}

impl BidDelta {
    pub fn is_empty(&self) -> bool {
        self.overrides.is_empty()
    }
}

/// Returns a copy of `inst` with the overridden prices and the round counter
/// advanced. The input is never modified; later overrides of the same key
/// win.
pub fn apply_bid_round(
    inst: &SupplyChainInstance,
    delta: &BidDelta,
) -> Result<SupplyChainInstance, InstanceError> {
    let shape = inst.shape;
    let mut out = inst.clone();
    for o in &delta.overrides {
        if !(o.value.is_finite() && o.value >= 0.0) {
            return Err(InstanceError::NegativeCost {
                key: o.key(),
                value: o.value,
            });
        }
        let unknown = || InstanceError::UnknownKey(o.key());
        match o.table {
            CostTable::MachiningUnit | CostTable::MachiningTransport => {
                let i = shape.part_index(o.item).ok_or_else(unknown)?;
                if o.tier1 >= shape.tier1_count || o.tier2.is_some() {
                    return Err(unknown());
                }
                let grid = if o.table == CostTable::MachiningUnit {
                    &mut out.machining_unit_cost
                } else {
                    &mut out.machining_transport_cost
                };
                grid.set(i, o.tier1, o.value);
            }
            CostTable::ForgingUnit | CostTable::ForgingTransport => {
                let k = shape.forging_index(o.item).ok_or_else(unknown)?;
                let l = o.tier2.ok_or_else(unknown)?;
                if o.tier1 >= shape.tier1_count || l >= shape.tier2_count {
                    return Err(unknown());
                }
                let grid = if o.table == CostTable::ForgingUnit {
                    &mut out.forging_unit_cost
                } else {
                    &mut out.forging_transport_cost
                };
                grid.set(k, o.tier1, l, o.value);
            }
        }
    }
    out.bid_round = inst.bid_round + 1;
    Ok(out)
}
