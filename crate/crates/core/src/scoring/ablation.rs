//! One-signal-at-a-time analyses of the intrinsic score.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{intrinsic_score, ScoringError};
use crate::gep::IntrinsicSignals;

/// The five self-reported signals an agent controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalField {
    Confidence,
    Streak,
    /// Files times lines modified.
    Blast,
    Trigger,
    Summary,
}

impl SignalField {
    pub const ALL: [SignalField; 5] = [
        SignalField::Confidence,
        SignalField::Streak,
        SignalField::Blast,
        SignalField::Trigger,
        SignalField::Summary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SignalField::Confidence => "confidence",
            SignalField::Streak => "streak",
            SignalField::Blast => "blast",
            SignalField::Trigger => "trigger",
            SignalField::Summary => "summary",
        }
    }
}

impl fmt::Display for SignalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SignalField {
    type Err = ScoringError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "c" | "conf" | "confidence" => Ok(SignalField::Confidence),
            "s" | "streak" | "success_streak" => Ok(SignalField::Streak),
            "blast" | "fl" | "f,l" | "blast_radius" => Ok(SignalField::Blast),
            "t" | "trig" | "trigger" | "trigger_count" | "triggers" => Ok(SignalField::Trigger),
            "l_sum" | "sum" | "summary" | "summary_length" => Ok(SignalField::Summary),
            _ => Err(ScoringError::UnknownField(s.to_string())),
        }
    }
}

/// Replacement value for one signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degradation {
    Confidence(f64),
    Streak(u64),
    Blast { files: u64, lines: u64 },
    Trigger(u64),
    Summary(u64),
}

impl Degradation {
    /// Value that minimizes the field's contribution, as used by the forgery
    /// study's worst configuration.
    pub fn worst(field: SignalField) -> Self {
        match field {
            SignalField::Confidence => Degradation::Confidence(0.10),
            SignalField::Streak => Degradation::Streak(0),
            SignalField::Blast => Degradation::Blast { files: 8, lines: 300 },
            SignalField::Trigger => Degradation::Trigger(1),
            SignalField::Summary => Degradation::Summary(50),
        }
    }

    pub fn field(&self) -> SignalField {
        match self {
            Degradation::Confidence(_) => SignalField::Confidence,
            Degradation::Streak(_) => SignalField::Streak,
            Degradation::Blast { .. } => SignalField::Blast,
            Degradation::Trigger(_) => SignalField::Trigger,
            Degradation::Summary(_) => SignalField::Summary,
        }
    }

    pub fn apply(&self, base: &IntrinsicSignals) -> Result<IntrinsicSignals, ScoringError> {
        let mut s = *base;
        match *self {
            Degradation::Confidence(c) => {
                if !(c.is_finite() && (0.0..=1.0).contains(&c)) {
                    return Err(ScoringError::DomainViolation { field: "confidence", value: c });
                }
                s.confidence = c;
            }
            Degradation::Streak(v) => s.success_streak = v,
            Degradation::Blast { files, lines } => {
                s.files_modified = files;
                s.lines_modified = lines;
            }
            Degradation::Trigger(v) => s.trigger_count = v,
            Degradation::Summary(v) => s.summary_length = v,
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub field: SignalField,
    pub score_base: f64,
    pub score_degraded: f64,
    pub delta: f64,
}

pub fn intrinsic_ablation(base: &IntrinsicSignals, degrade: Degradation) -> Result<Ablation, ScoringError> {
    let score_base = intrinsic_score(base);
    let score_degraded = intrinsic_score(&degrade.apply(base)?);
    Ok(Ablation {
        field: degrade.field(),
        score_base,
        score_degraded,
        delta: score_degraded - score_base,
    })
}

/// Leave-one-out ablation of every field to its worst value.
pub fn forgery_ablation(base: &IntrinsicSignals) -> Vec<Ablation> {
    SignalField::ALL
        .iter()
        .map(|&f| intrinsic_ablation(base, Degradation::worst(f)).expect("worst values are in domain"))
        .collect()
}

/// Evaluate the intrinsic score with one field replaced by each value.
///
/// Count fields need non-negative integral values. A blast value is taken as
/// the product `F * L` (encoded as one file with that many lines).
pub fn sensitivity_sweep(
    base: &IntrinsicSignals,
    field: SignalField,
    values: &[f64],
) -> Result<Vec<(f64, f64)>, ScoringError> {
    values
        .iter()
        .map(|&v| {
            let degradation = match field {
                SignalField::Confidence => Degradation::Confidence(v),
                SignalField::Streak => Degradation::Streak(count(field, v)?),
                SignalField::Blast => Degradation::Blast { files: 1, lines: count(field, v)? },
                SignalField::Trigger => Degradation::Trigger(count(field, v)?),
                SignalField::Summary => Degradation::Summary(count(field, v)?),
            };
            Ok((v, intrinsic_score(&degradation.apply(base)?)))
        })
        .collect()
}

fn count(field: SignalField, v: f64) -> Result<u64, ScoringError> {
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(ScoringError::DomainViolation { field: field.name(), value: v })
    }
}
