//! Bounty market types and single-winner scoring.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::record::AssetRecord;
use super::similarity::key_tokens;
use crate::gep::{AgentId, Asset, AssetId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BountyId(pub String);

impl std::fmt::Display for BountyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BountyStatus {
    Open,
    Matched,
    Expired,
    Accepted,
    Settled,
}

impl BountyStatus {
    /// Escrow is still held.
    pub fn is_live(self) -> bool {
        matches!(self, BountyStatus::Open | BountyStatus::Matched)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmissionStatus {
    Pending,
    Accepted,
    Rejected,
    RunnerUp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub submitter: AgentId,
    pub asset: AssetId,
    pub status: SubmissionStatus,
    pub created_at: DateTime<Utc>,
    /// Weighted score assigned at resolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounty {
    pub id: BountyId,
    pub poster: AgentId,
    pub title: String,
    pub signals: Vec<String>,
    pub amount: i64,
    pub status: BountyStatus,
    pub created_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
    pub submissions: Vec<Submission>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted_at: Option<DateTime<Utc>>,
}

impl Bounty {
    pub fn winner(&self) -> Option<&Submission> {
        self.submissions.iter().find(|s| s.status == SubmissionStatus::Accepted)
    }
}

/// Quality judgement of a submitted asset against a bounty, in `[0, 1]`.
pub trait Evaluator {
    fn evaluate(&self, bounty: &Bounty, asset: &AssetRecord) -> f64;
}

/// Fraction of the bounty's signal tokens present in the asset's text.
#[derive(Debug, Clone, Copy, Default)]
pub struct KeywordOverlap;

impl Evaluator for KeywordOverlap {
    fn evaluate(&self, bounty: &Bounty, asset: &AssetRecord) -> f64 {
        let wanted = key_tokens(&bounty.signals.join(" "));
        if wanted.is_empty() {
            return 0.0;
        }
        let text = match &asset.body {
            Asset::Capsule(c) => format!("{} {} {}", c.trigger_text, c.summary, c.content),
            Asset::Gene(g) => format!("{} {} {}", g.summary, g.preconditions.join(" "), g.tags.join(" ")),
            Asset::Event(_) => String::new(),
        };
        let have = key_tokens(&text);
        wanted.intersection(&have).count() as f64 / wanted.len() as f64
    }
}

pub const EVALUATOR_WEIGHT: f64 = 0.4;
pub const GDI_WEIGHT: f64 = 0.3;
pub const HISTORY_WEIGHT: f64 = 0.2;
pub const SOCIAL_WEIGHT: f64 = 0.1;

/// Weighted submission score; every term is clamped to `[0, 1]`.
pub fn submission_score(evaluator: f64, gdi: f64, exec_history: f64, social: f64) -> f64 {
    EVALUATOR_WEIGHT * evaluator.clamp(0.0, 1.0)
        + GDI_WEIGHT * (gdi / 100.0).clamp(0.0, 1.0)
        + HISTORY_WEIGHT * exec_history.clamp(0.0, 1.0)
        + SOCIAL_WEIGHT * social.clamp(0.0, 1.0)
}

/// Index of the winning score; ties go to the earliest submission.
pub fn pick_winner(scored: &[(f64, DateTime<Utc>)]) -> Option<usize> {
    (0..scored.len()).reduce(|best, i| {
        let (s, t) = scored[i];
        let (bs, bt) = scored[best];
        if s > bs || (s == bs && t < bt) {
            i
        } else {
            best
        }
    })
}
