//! Genome Evolution Protocol asset model.
//!
//! Three asset kinds travel between agents and the hub:
//!
//! * [`Gene`]: an abstract blueprint for a task category (preconditions,
//!   constraints, validation commands).
//! * [`Capsule`]: a concrete solution keyed by a trigger signature and carrying
//!   self-reported [`IntrinsicSignals`].
//! * [`EvolutionEvent`]: a digest-sealed record binding a committed capsule to
//!   the genes that guided it.
//!
//! Every asset is identified by the SHA-256 of its canonical serialization
//! (see [`canonical`]).

pub mod canonical;
mod lineage;
mod signals;
mod signer;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use canonical::{canonical_bytes, hash_asset};
pub use lineage::{link_event, verify_lineage, Change, EventKind, EvolutionEvent, Lineage, LineageVerdict};
pub use signals::{IntrinsicSignals, DEFAULT_REPUTATION};
pub use signer::{KeyedHashSigner, Signer};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GepError {
    #[error("asset id must be 64 hex characters, got {0:?}")]
    MalformedAssetId(String),
    #[error("signal `{field}` out of domain: {value}")]
    SignalOutOfDomain { field: &'static str, value: f64 },
    #[error("repair of capsule {0} has no prior version in the lineage")]
    RepairWithoutHistory(AssetId),
}

/// Lowercase hex SHA-256 digest identifying an asset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AssetId(String);

impl AssetId {
    pub fn parse(hex: &str) -> Result<Self, GepError> {
        if hex.len() == 64 && hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            Ok(Self(hex.to_ascii_lowercase()))
        } else {
            Err(GepError::MalformedAssetId(hex.to_string()))
        }
    }

    pub(crate) fn from_digest(digest: &[u8]) -> Self {
        use std::fmt::Write;
        let mut hex = String::with_capacity(64);
        for b in digest {
            let _ = write!(hex, "{b:02x}");
        }
        Self(hex)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AssetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for AssetId {
    type Err = GepError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl TryFrom<String> for AssetId {
    type Error = GepError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::parse(&s)
    }
}

impl From<AssetId> for String {
    fn from(id: AssetId) -> Self {
        id.0
    }
}

/// Node identifier of an agent, as assigned by the hub.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Abstract behavioral blueprint for a class of tasks.
///
/// Validation commands are stored byte-exact; a gene may legally carry none.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Gene {
    #[serde(default)]
    pub preconditions: Vec<String>,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default)]
    pub validations: Vec<String>,
    #[serde(default)]
    pub summary: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default)]
    pub author: AgentId,
}

impl Gene {
    pub fn id(&self) -> AssetId {
        hash_asset(&canonical_bytes(self))
    }
}

/// Concrete solution for one scenario, retrievable by its trigger text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capsule {
    pub content: String,
    pub trigger_text: String,
    pub signals: IntrinsicSignals,
    #[serde(default)]
    pub parent_genes: Vec<AssetId>,
    #[serde(default)]
    pub summary: String,
    pub author: AgentId,
}

impl Capsule {
    pub fn id(&self) -> AssetId {
        hash_asset(&canonical_bytes(self))
    }

    /// A capsule can be shared only when it has a retrieval key.
    pub fn is_publishable(&self) -> bool {
        !self.trigger_text.trim().is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetKind {
    Gene,
    Capsule,
    Event,
}

impl AssetKind {
    /// Type label used in dataset files.
    pub fn dataset_label(self) -> &'static str {
        match self {
            AssetKind::Gene => "Gene",
            AssetKind::Capsule => "Capsule",
            AssetKind::Event => "EvolutionEvent",
        }
    }

    pub fn from_dataset_label(label: &str) -> Option<Self> {
        match label {
            "Gene" => Some(AssetKind::Gene),
            "Capsule" => Some(AssetKind::Capsule),
            "EvolutionEvent" => Some(AssetKind::Event),
            _ => None,
        }
    }
}

/// Any publishable asset body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Asset {
    Gene(Gene),
    Capsule(Capsule),
    Event(EvolutionEvent),
}

impl Asset {
    pub fn kind(&self) -> AssetKind {
        match self {
            Asset::Gene(_) => AssetKind::Gene,
            Asset::Capsule(_) => AssetKind::Capsule,
            Asset::Event(_) => AssetKind::Event,
        }
    }

    pub fn id(&self) -> AssetId {
        match self {
            Asset::Gene(g) => g.id(),
            Asset::Capsule(c) => c.id(),
            // Events are addressed by their own digest.
            Asset::Event(e) => e.digest.clone(),
        }
    }

    pub fn summary(&self) -> &str {
        match self {
            Asset::Gene(g) => &g.summary,
            Asset::Capsule(c) => &c.summary,
            Asset::Event(_) => "",
        }
    }

    pub fn trigger_text(&self) -> &str {
        match self {
            Asset::Capsule(c) => &c.trigger_text,
            _ => "",
        }
    }
}
