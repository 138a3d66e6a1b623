//! Evolution events and the auditable lineage they form.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{canonical_bytes, hash_asset, AssetId, Capsule, Gene, GepError, IntrinsicSignals};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Innovation,
    Repair,
}

/// What kind of change produced a capsule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Change {
    /// A new capsule for a novel task.
    Innovation,
    /// A new capsule version superseding `of`.
    Repair { of: AssetId },
}

/// Digest-sealed record linking a committed capsule to its guiding genes.
///
/// The event references assets by id only. `digest` covers every other field
/// except the detached `signature`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionEvent {
    pub capsule: AssetId,
    pub parent_genes: Vec<AssetId>,
    pub metrics: IntrinsicSignals,
    pub kind: EventKind,
    /// Prior capsule version, present exactly for repairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repairs: Option<AssetId>,
    pub timestamp: DateTime<Utc>,
    pub digest: AssetId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<String>,
}

#[derive(Serialize)]
struct SealedFields<'a> {
    capsule: &'a AssetId,
    parent_genes: &'a [AssetId],
    metrics: &'a IntrinsicSignals,
    kind: EventKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    repairs: Option<&'a AssetId>,
    timestamp: &'a DateTime<Utc>,
}

impl EvolutionEvent {
    pub fn compute_digest(&self) -> AssetId {
        hash_asset(&canonical_bytes(&SealedFields {
            capsule: &self.capsule,
            parent_genes: &self.parent_genes,
            metrics: &self.metrics,
            kind: self.kind,
            repairs: self.repairs.as_ref(),
            timestamp: &self.timestamp,
        }))
    }

    pub fn is_sealed(&self) -> bool {
        self.compute_digest() == self.digest
    }
}

/// Build the event recording that `capsule` was committed under `genes`.
///
/// A repair must name a capsule that already appears in `lineage`.
pub fn link_event(
    capsule: &Capsule,
    genes: &[Gene],
    change: Change,
    timestamp: DateTime<Utc>,
    lineage: &Lineage,
) -> Result<EvolutionEvent, GepError> {
    let (kind, repairs) = match change {
        Change::Innovation => (EventKind::Innovation, None),
        Change::Repair { of } => {
            if !lineage.contains_capsule(&of) {
                return Err(GepError::RepairWithoutHistory(of));
            }
            (EventKind::Repair, Some(of))
        }
    };
    let mut event = EvolutionEvent {
        capsule: capsule.id(),
        parent_genes: genes.iter().map(Gene::id).collect(),
        metrics: capsule.signals,
        kind,
        repairs,
        timestamp,
        digest: hash_asset(b""),
        signature: None,
    };
    event.digest = event.compute_digest();
    Ok(event)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LineageVerdict {
    Intact,
    BrokenAt { index: usize },
}

/// Check a timestamp-ordered event list: every digest must recompute and every
/// repair must supersede a capsule committed by an earlier event.
pub fn verify_lineage(events: &[EvolutionEvent]) -> LineageVerdict {
    let mut seen = BTreeSet::new();
    for (index, event) in events.iter().enumerate() {
        if !event.is_sealed() {
            return LineageVerdict::BrokenAt { index };
        }
        let repair_ok = match (event.kind, &event.repairs) {
            (EventKind::Innovation, None) => true,
            (EventKind::Repair, Some(prior)) => seen.contains(prior),
            _ => false,
        };
        if !repair_ok {
            return LineageVerdict::BrokenAt { index };
        }
        seen.insert(&event.capsule);
    }
    LineageVerdict::Intact
}

/// Append-only event log for one agent or hub.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Lineage {
    events: Vec<EvolutionEvent>,
    #[serde(skip)]
    capsules: BTreeSet<AssetId>,
}

impl Lineage {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains_capsule(&self, id: &AssetId) -> bool {
        self.capsules.contains(id) || self.events.iter().any(|e| &e.capsule == id)
    }

    pub fn push(&mut self, event: EvolutionEvent) {
        self.capsules.insert(event.capsule.clone());
        self.events.push(event);
    }

    pub fn events(&self) -> &[EvolutionEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}
