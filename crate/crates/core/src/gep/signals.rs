use serde::{Deserialize, Serialize};

use super::GepError;

/// Reputation assigned to a freshly registered agent.
pub const DEFAULT_REPUTATION: f64 = 50.0;

/// Self-reported capsule metadata feeding the intrinsic score.
///
/// Confidence lives in `[0, 1]` and reputation in `[0, 100]`; every other
/// field is a non-negative count. Values are validated on construction and on
/// deserialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSignals")]
pub struct IntrinsicSignals {
    pub confidence: f64,
    pub success_streak: u64,
    pub files_modified: u64,
    pub lines_modified: u64,
    pub trigger_count: u64,
    pub summary_length: u64,
    pub reputation: f64,
}

#[derive(Deserialize)]
struct RawSignals {
    confidence: f64,
    success_streak: u64,
    files_modified: u64,
    lines_modified: u64,
    trigger_count: u64,
    summary_length: u64,
    #[serde(default = "default_reputation")]
    reputation: f64,
}

fn default_reputation() -> f64 {
    DEFAULT_REPUTATION
}

impl TryFrom<RawSignals> for IntrinsicSignals {
    type Error = GepError;
    fn try_from(r: RawSignals) -> Result<Self, Self::Error> {
        IntrinsicSignals::new(
            r.confidence,
            r.success_streak,
            r.files_modified,
            r.lines_modified,
            r.trigger_count,
            r.summary_length,
            r.reputation,
        )
    }
}

impl IntrinsicSignals {
    pub fn new(
        confidence: f64,
        success_streak: u64,
        files_modified: u64,
        lines_modified: u64,
        trigger_count: u64,
        summary_length: u64,
        reputation: f64,
    ) -> Result<Self, GepError> {
        check_unit("confidence", confidence, 1.0)?;
        check_unit("reputation", reputation, 100.0)?;
        Ok(Self {
            confidence,
            success_streak,
            files_modified,
            lines_modified,
            trigger_count,
            summary_length,
            reputation,
        })
    }

    pub fn with_reputation(self, reputation: f64) -> Result<Self, GepError> {
        check_unit("reputation", reputation, 100.0)?;
        Ok(Self { reputation, ..self })
    }

    /// Blast radius as the product of files and lines touched.
    pub fn blast(&self) -> u64 {
        self.files_modified.saturating_mul(self.lines_modified)
    }
}

fn check_unit(field: &'static str, value: f64, upper: f64) -> Result<(), GepError> {
    if value.is_finite() && (0.0..=upper).contains(&value) {
        Ok(())
    } else {
        Err(GepError::SignalOutOfDomain { field, value })
    }
}
