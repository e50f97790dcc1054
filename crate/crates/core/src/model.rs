//! Shared domain types: the classified set of contacts and their weights.

use serde::{Deserialize, Serialize};

/// Virtual time in milliseconds since the scenario epoch.
pub type Millis = u64;

pub const MINUTE_MS: Millis = 60_000;

/// Importance class of a contact. A is the closest circle (family),
/// D covers unknown numbers and promotional callers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    A,
    B,
    C,
    D,
}

impl Group {
    pub const ALL: [Group; 4] = [Group::A, Group::B, Group::C, Group::D];

    /// Weight used by every group-parameterized rule: A=4, B=3, C=2, D=1.
    pub fn weight(self) -> u32 {
        match self {
            Group::A => 4,
            Group::B => 3,
            Group::C => 2,
            Group::D => 1,
        }
    }
}

/// Free-function form of [`Group::weight`].
pub fn group_weight(group: Group) -> u32 {
    group.weight()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contact {
    pub id: String,
    pub name: String,
    pub group: Group,
    /// Caller should always get through a suppression session.
    pub temp_important: bool,
}

impl Contact {
    pub fn new(id: impl Into<String>, name: impl Into<String>, group: Group) -> Self {
        Contact {
            id: id.into(),
            name: name.into(),
            group,
            temp_important: false,
        }
    }

    /// The record used for a caller with no contact entry.
    pub fn unknown(id: impl Into<String>) -> Self {
        let id = id.into();
        Contact {
            name: id.clone(),
            id,
            group: Group::D,
            temp_important: false,
        }
    }
}

/// What a missed item was.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Call,
    Message,
}

impl ItemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ItemKind::Call => "call",
            ItemKind::Message => "message",
        }
    }
}
