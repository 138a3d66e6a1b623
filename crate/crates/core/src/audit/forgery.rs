//! Metadata-forgery harness: publish capsules whose self-reported signals
//! are chosen by the attacker and record how the hub scores them.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::gep::{Asset, AssetId, Capsule, IntrinsicSignals, DEFAULT_REPUTATION};
use crate::hub::{AssetStatus, HubApi, HubError};
use crate::scoring::{Degradation, SignalField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForgeGroup {
    Reference,
    LeaveOneOut,
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgeConfig {
    pub name: String,
    pub group: ForgeGroup,
    pub signals: IntrinsicSignals,
}

fn sig(c: f64, s: u64, f: u64, l: u64, t: u64, len: u64) -> IntrinsicSignals {
    IntrinsicSignals::new(c, s, f, l, t, len, DEFAULT_REPUTATION).expect("reference values are in domain")
}

pub fn s_median() -> IntrinsicSignals {
    sig(0.93, 323, 2, 30, 3, 139)
}

pub fn s_worst() -> IntrinsicSignals {
    sig(0.10, 0, 8, 300, 1, 50)
}

pub fn s_opt() -> IntrinsicSignals {
    sig(0.99, 10, 1, 5, 5, 200)
}

/// Reference points, leave-one-out variants of the optimum, then the
/// one-signal sweeps around the median.
pub fn forge_configurations() -> Vec<ForgeConfig> {
    let mut out = vec![
        ForgeConfig { name: "s_median".into(), group: ForgeGroup::Reference, signals: s_median() },
        ForgeConfig { name: "s_worst".into(), group: ForgeGroup::Reference, signals: s_worst() },
        ForgeConfig { name: "s_opt".into(), group: ForgeGroup::Reference, signals: s_opt() },
    ];
    for field in SignalField::ALL {
        let signals = Degradation::worst(field).apply(&s_opt()).expect("worst values are in domain");
        out.push(ForgeConfig { name: format!("s_opt\\{field}"), group: ForgeGroup::LeaveOneOut, signals });
    }
    let median = s_median();
    let sweeps: [(SignalField, [Degradation; 3]); 4] = [
        (SignalField::Streak, [Degradation::Streak(1), Degradation::Streak(4), Degradation::Streak(13)]),
        (SignalField::Trigger, [Degradation::Trigger(2), Degradation::Trigger(3), Degradation::Trigger(5)]),
        (SignalField::Summary, [Degradation::Summary(60), Degradation::Summary(108), Degradation::Summary(175)]),
        (
            SignalField::Confidence,
            [Degradation::Confidence(0.89), Degradation::Confidence(0.95), Degradation::Confidence(0.97)],
        ),
    ];
    for (field, steps) in sweeps {
        for (pct, d) in ["p25", "p50", "p75"].iter().zip(steps) {
            out.push(ForgeConfig {
                name: format!("sweep_{field}_{pct}"),
                group: ForgeGroup::Sweep,
                signals: d.apply(&median).expect("sweep values are in domain"),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgeryRow {
    pub config: String,
    pub signals: IntrinsicSignals,
    pub asset_id: AssetId,
    pub intrinsic: f64,
    pub gdi: f64,
    pub promoted: bool,
}

/// Payload whose every token carries the seed, so no two seeds share a shingle.
fn payload(seed: usize) -> String {
    let words: Vec<String> = (0..16).map(|i| format!("f{seed}t{i}")).collect();
    format!("forgery payload {}", words.join(" "))
}

/// Publish one capsule per configuration from a freshly registered agent,
/// recompute at `now`, and read back each record.
pub fn run_forgery_study<H: HubApi + ?Sized>(
    hub: &mut H,
    configs: &[ForgeConfig],
    now: DateTime<Utc>,
) -> Result<Vec<ForgeryRow>, HubError> {
    let mut published = Vec::with_capacity(configs.len());
    for (seed, config) in configs.iter().enumerate() {
        let agent = hub.register_agent(&format!("forger-{seed}"))?;
        let capsule = Capsule {
            content: payload(seed),
            trigger_text: format!("test forgery {} {seed}", config.name),
            signals: config.signals,
            parent_genes: vec![],
            summary: format!("forged metadata probe {seed}"),
            author: agent.clone(),
        };
        let receipt = hub.publish(&agent, &Asset::Capsule(capsule))?;
        published.push((config, receipt.asset_id));
    }
    hub.recompute(now)?;
    published
        .into_iter()
        .map(|(config, id)| {
            let record = hub.asset(&id)?;
            Ok(ForgeryRow {
                config: config.name.clone(),
                signals: config.signals,
                asset_id: id,
                intrinsic: record.components.intrinsic,
                gdi: record.gdi,
                promoted: record.status == AssetStatus::Promoted,
            })
        })
        .collect()
}
