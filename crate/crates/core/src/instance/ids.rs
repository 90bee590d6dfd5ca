use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Item category. Parts are machined by Tier1 suppliers, forgings are
/// supplied by Tier2 suppliers to Tier1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    PartBlue,
    PartLlv,
    ForgingBlue,
    ForgingLlv,
}

impl ItemKind {
    pub fn is_part(self) -> bool {
        matches!(self, ItemKind::PartBlue | ItemKind::PartLlv)
    }

    pub fn is_llv(self) -> bool {
        matches!(self, ItemKind::PartLlv | ItemKind::ForgingLlv)
    }

    fn prefix(self) -> &'static str {
        match self {
            ItemKind::PartBlue => "PB",
            ItemKind::PartLlv => "PL",
            ItemKind::ForgingBlue => "FB",
            ItemKind::ForgingLlv => "FL",
        }
    }
}

/// Identifier of a part or forging, rendered as `PB3`, `PL0`, `FB12`, `FL1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemId {
    pub kind: ItemKind,
    pub index: usize,
}

impl ItemId {
    pub fn new(kind: ItemKind, index: usize) -> Self {
        ItemId { kind, index }
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.prefix(), self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid item id `{0}` (expected PB<n>, PL<n>, FB<n> or FL<n>)")]
pub struct ParseItemIdError(pub String);

impl FromStr for ItemId {
    type Err = ParseItemIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseItemIdError(s.to_string());
        if s.len() < 3 || !s.is_char_boundary(2) {
            return Err(err());
        }
        let (prefix, digits) = s.split_at(2);
        let kind = match prefix {
            "PB" => ItemKind::PartBlue,
            "PL" => ItemKind::PartLlv,
            "FB" => ItemKind::ForgingBlue,
            "FL" => ItemKind::ForgingLlv,
            _ => return Err(err()),
        };
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let index = digits.parse().map_err(|_| err())?;
        Ok(ItemId { kind, index })
    }
}

impl Serialize for ItemId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ItemId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dimensions of an instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemShape {
    pub tier1_count: usize,
    pub tier2_count: usize,
    pub parts_blue: usize,
    pub parts_llv: usize,
    pub forgings_blue: usize,
    pub forgings_llv: usize,
}

impl ProblemShape {
    /// Size of the case-study supply chain (20 forgers, 50 machinists).
    pub fn full_scale() -> Self {
        ProblemShape {
            tier1_count: 50,
            tier2_count: 20,
            parts_blue: 1500,
            parts_llv: 500,
            forgings_blue: 2500,
            forgings_llv: 500,
        }
    }

    pub fn part_count(&self) -> usize {
        self.parts_blue + self.parts_llv
    }

    pub fn forging_count(&self) -> usize {
        self.forgings_blue + self.forgings_llv
    }

    /// Flat part index: blue-chip parts first, then LLV.
    pub fn part_index(&self, id: ItemId) -> Option<usize> {
        match id.kind {
            ItemKind::PartBlue if id.index < self.parts_blue => Some(id.index),
            ItemKind::PartLlv if id.index < self.parts_llv => Some(self.parts_blue + id.index),
            _ => None,
        }
    }

    /// Flat forging index: blue-chip forgings first, then LLV.
    pub fn forging_index(&self, id: ItemId) -> Option<usize> {
        match id.kind {
            ItemKind::ForgingBlue if id.index < self.forgings_blue => Some(id.index),
            ItemKind::ForgingLlv if id.index < self.forgings_llv => {
                Some(self.forgings_blue + id.index)
            }
            _ => None,
        }
    }

    pub fn part_id(&self, flat: usize) -> ItemId {
        if flat < self.parts_blue {
            ItemId::new(ItemKind::PartBlue, flat)
        } else {
            ItemId::new(ItemKind::PartLlv, flat - self.parts_blue)
        }
    }

    pub fn forging_id(&self, flat: usize) -> ItemId {
        if flat < self.forgings_blue {
            ItemId::new(ItemKind::ForgingBlue, flat)
        } else {
            ItemId::new(ItemKind::ForgingLlv, flat - self.forgings_blue)
        }
    }

    pub fn is_llv_part(&self, flat: usize) -> bool {
        flat >= self.parts_blue
    }

    pub fn is_llv_forging(&self, flat: usize) -> bool {
        flat >= self.forgings_blue
    }

    pub fn count_of(&self, kind: ItemKind) -> usize {
        match kind {
            ItemKind::PartBlue => self.parts_blue,
            ItemKind::PartLlv => self.parts_llv,
            ItemKind::ForgingBlue => self.forgings_blue,
            ItemKind::ForgingLlv => self.forgings_llv,
        }
    }
}
