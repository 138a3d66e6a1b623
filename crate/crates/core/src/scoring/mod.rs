//! Genetic Desirability Index.
//!
//! Four sub-scores in `[0, 1]` (intrinsic, usage, social, freshness) are
//! combined linearly and multiplied by 100, so the promotion threshold of 25
//! and typical scores of 20-50 live on the familiar 0-100 scale.
//!
//! * Intrinsic: mean of six normalized publication-time signals.
//! * Usage: `1 - exp(-(calls + 2 * reuses) / 20)`.
//! * Social: Wilson lower bound (z = 1.96) of the upvote proportion.
//! * Freshness: exponential decay with a 30 day half-life since last activity.

mod ablation;
mod regression;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::gep::IntrinsicSignals;

pub use ablation::{forgery_ablation, intrinsic_ablation, sensitivity_sweep, Ablation, Degradation, SignalField};
pub use regression::{refit_weights, synthesize_samples, Refit, MIN_REFIT_SAMPLES};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoringError {
    #[error("GDI component `{name}` = {value} is outside [0, 1]")]
    ComponentOutOfRange { name: &'static str, value: f64 },
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("refit needs at least {MIN_REFIT_SAMPLES} samples, got {0}")]
    InsufficientSamples(usize),
    #[error("unknown signal field `{0}`")]
    UnknownField(String),
    #[error("value {value} outside the domain of `{field}`")]
    DomainViolation { field: &'static str, value: f64 },
    #[error("invalid weights configuration: {0}")]
    InvalidWeights(String),
}

/// Promotion threshold on the composite scale.
pub const PROMOTION_THRESHOLD: f64 = 25.0;

const USAGE_SCALE: f64 = 20.0;
const REUSE_WEIGHT: f64 = 2.0;
const WILSON_Z: f64 = 1.96;
const FRESHNESS_HALF_LIFE_DAYS: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdiComponents {
    pub intrinsic: f64,
    pub usage: f64,
    pub social: f64,
    pub freshness: f64,
}

impl GdiComponents {
    pub fn new(intrinsic: f64, usage: f64, social: f64, freshness: f64) -> Result<Self, ScoringError> {
        for (name, value) in [
            ("intrinsic", intrinsic),
            ("usage", usage),
            ("social", social),
            ("freshness", freshness),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ScoringError::ComponentOutOfRange { name, value });
            }
        }
        Ok(Self { intrinsic, usage, social, freshness })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.intrinsic, self.usage, self.social, self.freshness]
    }
}

/// Linear weights over the four components plus an intercept on the 0-100 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdiWeights {
    pub intrinsic: f64,
    pub usage: f64,
    pub social: f64,
    pub freshness: f64,
    #[serde(default)]
    pub intercept: f64,
}

impl GdiWeights {
    /// Documented formula.
    pub const OFFICIAL: GdiWeights = GdiWeights {
        intrinsic: 0.35,
        usage: 0.30,
        social: 0.20,
        freshness: 0.15,
        intercept: 0.0,
    };

    /// Weights recovered by regressing observed platform scores.
    pub const REFITTED: GdiWeights = GdiWeights {
        intrinsic: 0.35,
        usage: 0.29,
        social: 0.17,
        freshness: 0.10,
        intercept: -1.38,
    };

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "official" => Some(Self::OFFICIAL),
            "refitted" => Some(Self::REFITTED),
            _ => None,
        }
    }

    /// Parse a weights file.
    ///
    /// Either names a preset (`preset = "refitted"`) or spells out
    /// `intrinsic`, `usage`, `social`, `freshness` and optionally `intercept`.
    pub fn from_toml_str(text: &str) -> Result<Self, ScoringError> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum File {
            Preset { preset: String },
            Explicit(GdiWeights),
        }
        match toml::from_str::<File>(text).map_err(|e| ScoringError::InvalidWeights(e.to_string()))? {
            File::Preset { preset } => {
                Self::preset(&preset).ok_or_else(|| ScoringError::InvalidWeights(format!("unknown preset `{preset}`")))
            }
            File::Explicit(w) => {
                if w.as_array().iter().chain([&w.intercept]).all(|v| v.is_finite()) {
                    Ok(w)
                } else {
                    Err(ScoringError::InvalidWeights("weights must be finite".into()))
                }
            }
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.intrinsic, self.usage, self.social, self.freshness]
    }
}

impl Default for GdiWeights {
    fn default() -> Self {
        Self::OFFICIAL
    }
}

/// Hub-side activity counters for one asset.
///
/// `reuse_count` is not bounded by `call_count`; the two are independent events.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageCounters {
    pub call_count: u64,
    pub view_count: u64,
    pub reuse_count: u64,
    pub upvotes: u64,
    pub downvotes: u64,
    pub fork_count: u64,
    pub last_activity: DateTime<Utc>,
    pub created_at: DateTime<Utc>,
}

impl UsageCounters {
    pub fn new(created_at: DateTime<Utc>) -> Self {
        Self {
            call_count: 0,
            view_count: 0,
            reuse_count: 0,
            upvotes: 0,
            downvotes: 0,
            fork_count: 0,
            last_activity: created_at,
            created_at,
        }
    }

    /// Record activity at `at`; never moves `last_activity` backwards.
    pub fn touch(&mut self, at: DateTime<Utc>) {
        if at > self.last_activity {
            self.last_activity = at;
        }
    }
}

/// The six normalized terms of the intrinsic score, in the order
/// confidence, streak, blast radius, trigger specificity, summary length,
/// reputation.
pub fn intrinsic_terms(s: &IntrinsicSignals) -> [f64; 6] {
    let blast = s.files_modified as f64 * s.lines_modified as f64;
    [
        s.confidence.clamp(0.0, 1.0),
        (s.success_streak as f64 / 10.0).min(1.0),
        (1.0 - blast / 1000.0).max(0.0),
        (s.trigger_count as f64 / 5.0).min(1.0),
        (s.summary_length as f64 / 200.0).min(1.0),
        (s.reputation / 100.0).clamp(0.0, 1.0),
    ]
}

pub fn intrinsic_score(s: &IntrinsicSignals) -> f64 {
    intrinsic_terms(s).iter().sum::<f64>() / 6.0
}

pub fn usage_score(c: &UsageCounters) -> f64 {
    let activity = c.call_count as f64 + REUSE_WEIGHT * c.reuse_count as f64;
    1.0 - (-activity / USAGE_SCALE).exp()
}

/// Wilson score lower bound on the upvote proportion; zero without votes.
pub fn social_score(upvotes: u64, downvotes: u64) -> f64 {
    let n = (upvotes + downvotes) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = upvotes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let centre = p + z2 / (2.0 * n);
    let margin = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - margin) / (1.0 + z2 / n)).clamp(0.0, 1.0)
}

/// Exponential decay since the last activity. `now` earlier than the last
/// activity counts as zero elapsed time.
pub fn freshness_score(now: DateTime<Utc>, c: &UsageCounters) -> f64 {
    let elapsed_days = (now - c.last_activity).num_milliseconds().max(0) as f64 / 86_400_000.0;
    (-std::f64::consts::LN_2 * elapsed_days / FRESHNESS_HALF_LIFE_DAYS).exp()
}

pub fn composite_gdi(c: &GdiComponents, w: &GdiWeights) -> f64 {
    100.0 * (w.intrinsic * c.intrinsic + w.usage * c.usage + w.social * c.social + w.freshness * c.freshness)
        + w.intercept
}

/// Recompute the dynamic components of an asset whose intrinsic score was
/// frozen at publication.
pub fn components_at(intrinsic: f64, counters: &UsageCounters, now: DateTime<Utc>) -> GdiComponents {
    GdiComponents {
        intrinsic: intrinsic.clamp(0.0, 1.0),
        usage: usage_score(counters),
        social: social_score(counters.upvotes, counters.downvotes),
        freshness: freshness_score(now, counters),
    }
}
