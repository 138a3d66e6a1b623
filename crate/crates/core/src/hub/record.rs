use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::gep::{AgentId, Asset, AssetId, AssetKind};
use crate::scoring::{GdiComponents, UsageCounters};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetStatus {
    Candidate,
    Promoted,
    Revoked,
    Archived,
    Flagged,
    Stale,
}

impl AssetStatus {
    pub const ALL: [AssetStatus; 6] = [
        AssetStatus::Candidate,
        AssetStatus::Promoted,
        AssetStatus::Revoked,
        AssetStatus::Archived,
        AssetStatus::Flagged,
        AssetStatus::Stale,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AssetStatus::Candidate => "candidate",
            AssetStatus::Promoted => "promoted",
            AssetStatus::Revoked => "revoked",
            AssetStatus::Archived => "archived",
            AssetStatus::Flagged => "flagged",
            AssetStatus::Stale => "stale",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.as_str() == s)
    }

    /// Whether `self -> to` is a legal lifecycle step. Administrative moves to
    /// archived or revoked are always allowed; nothing returns to candidate.
    pub fn can_become(self, to: AssetStatus) -> bool {
        use AssetStatus::*;
        match (self, to) {
            (_, Archived | Revoked) => true,
            (Candidate, Promoted) | (Stale, Promoted) => true,
            (Promoted, Stale | Flagged) => true,
            _ => false,
        }
    }
}

impl fmt::Display for AssetStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteDirection {
    Up,
    Down,
}

/// A published asset with its hub-side state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetRecord {
    pub id: AssetId,
    pub kind: AssetKind,
    pub body: Asset,
    pub status: AssetStatus,
    pub counters: UsageCounters,
    pub components: GdiComponents,
    pub gdi: f64,
    pub author: AgentId,
    pub published_at: DateTime<Utc>,
    /// Commands a reuse report is measured against.
    #[serde(default)]
    pub validations: Vec<String>,
    #[serde(default)]
    pub promotion_rewarded: bool,
    #[serde(default)]
    pub reports_total: u64,
    #[serde(default)]
    pub reports_succeeded: u64,
    #[serde(default)]
    pub votes: BTreeMap<AgentId, VoteDirection>,
}

impl AssetRecord {
    /// Only promoted assets are discoverable.
    pub fn is_fetchable(&self) -> bool {
        self.status == AssetStatus::Promoted
    }
}
