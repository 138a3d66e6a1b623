//! Deterministic multi-agent economy simulator.
//!
//! Agents of several strategies act against one in-process hub. A tick is one
//! shuffled action round followed by a hub recompute; ledger conservation is
//! checked after every tick. Everything random flows from one seeded ChaCha
//! stream, so a config fully determines metrics and trace.

mod scenario;
mod stats;

use serde::{Deserialize, Serialize};

use crate::evolver::EvolverError;
use crate::hub::{HubConfig, HubError};

pub use scenario::{run_scenario, Action, SimOutcome, TraceEvent};
pub use stats::{gini, top_share};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario config: {0}")]
    ConfigInvalid(String),
    #[error("ledger conservation violated at tick {tick}: {reason}")]
    ConservationViolated { tick: u32, reason: String },
    #[error("unexpected hub error: {0}")]
    Hub(#[from] HubError),
    #[error("evolver failure: {0}")]
    Evolver(#[from] EvolverError),
    #[error("every balance is zero")]
    AllZero,
    #[error("empty population")]
    EmptyPopulation,
    #[error("balances must be finite and non-negative")]
    NegativeBalance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Honest,
    CreditFarmer,
    MetadataForger,
    Reuser,
    BountyHunter,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Honest,
        StrategyKind::CreditFarmer,
        StrategyKind::MetadataForger,
        StrategyKind::Reuser,
        StrategyKind::BountyHunter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Honest => "honest",
            StrategyKind::CreditFarmer => "credit_farmer",
            StrategyKind::MetadataForger => "metadata_forger",
            StrategyKind::Reuser => "reuser",
            StrategyKind::BountyHunter => "bounty_hunter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalMode {
    /// Blast radius from the diff, confidence from the pass rate.
    Measured,
    /// Signals pinned to the forged optimum.
    ForgedOptimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyParams {
    /// Expected tasks (or, for farmers, publications) per tick. The integer
    /// part always happens; the fraction is a coin flip.
    pub publication_rate: f64,
    pub signals: SignalMode,
    /// Probability of consulting the hub before generating.
    pub fetch_propensity: f64,
    /// Per-tick probability of posting a bounty (honest) or submitting to
    /// one (bounty hunters).
    pub bounty_participation: f64,
    /// Probability that an attempted change fails its validations.
    pub failure_rate: f64,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams::for_kind(StrategyKind::Honest)
    }
}

impl StrategyParams {
    pub fn for_kind(kind: StrategyKind) -> Self {
        let base = StrategyParams {
            publication_rate: 0.3,
            signals: SignalMode::Measured,
            fetch_propensity: 1.0,
            bounty_participation: 0.02,
            failure_rate: 0.1,
        };
        match kind {
            StrategyKind::Honest => base,
            StrategyKind::CreditFarmer => StrategyParams {
                publication_rate: 8.0,
                signals: SignalMode::ForgedOptimal,
                fetch_propensity: 0.0,
                bounty_participation: 0.0,
                failure_rate: 0.0,
            },
            StrategyKind::MetadataForger => {
                StrategyParams { signals: SignalMode::ForgedOptimal, bounty_participation: 0.0, ..base }
            }
            StrategyKind::Reuser => {
                StrategyParams { publication_rate: 0.0, fetch_propensity: 0.8, bounty_participation: 0.0, ..base }
            }
            StrategyKind::BountyHunter => StrategyParams { publication_rate: 0.1, bounty_participation: 0.5, ..base },
        }
    }

    fn validate(&self, kind: StrategyKind) -> Result<(), SimError> {
        let unit = |name: &str, v: f64| {
            if v.is_finite() && (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(SimError::ConfigInvalid(format!("{}.{name} must lie in [0, 1], got {v}", kind.name())))
            }
        };
        if !(self.publication_rate.is_finite() && self.publication_rate >= 0.0) {
            return Err(SimError::ConfigInvalid(format!("{}.publication_rate must be non-negative", kind.name())));
        }
        unit("fetch_propensity", self.fetch_propensity)?;
        unit("bounty_participation", self.bounty_participation)?;
        unit("failure_rate", self.failure_rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentMix {
    pub honest: usize,
    pub credit_farmer: usize,
    pub metadata_forger: usize,
    pub reuser: usize,
    pub bounty_hunter: usize,
}

impl Default for AgentMix {
    fn default() -> Self {
        AgentMix { honest: 100, credit_farmer: 10, metadata_forger: 10, reuser: 30, bounty_hunter: 0 }
    }
}

impl AgentMix {
    pub fn count(&self, kind: StrategyKind) -> usize {
        match kind {
            StrategyKind::Honest => self.honest,
            StrategyKind::CreditFarmer => self.credit_farmer,
            StrategyKind::MetadataForger => self.metadata_forger,
            StrategyKind::Reuser => self.reuser,
            StrategyKind::BountyHunter => self.bounty_hunter,
        }
    }

    pub fn total(&self) -> usize {
        StrategyKind::ALL.iter().map(|&k| self.count(k)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyTable {
    pub honest: StrategyParams,
    pub credit_farmer: StrategyParams,
    pub metadata_forger: StrategyParams,
    pub reuser: StrategyParams,
    pub bounty_hunter: StrategyParams,
}

impl Default for StrategyTable {
    fn default() -> Self {
        StrategyTable {
            honest: StrategyParams::for_kind(StrategyKind::Honest),
            credit_farmer: StrategyParams::for_kind(StrategyKind::CreditFarmer),
            metadata_forger: StrategyParams::for_kind(StrategyKind::MetadataForger),
            reuser: StrategyParams::for_kind(StrategyKind::Reuser),
            bounty_hunter: StrategyParams::for_kind(StrategyKind::BountyHunter),
        }
    }
}

impl StrategyTable {
    pub fn get(&self, kind: StrategyKind) -> &StrategyParams {
        match kind {
            StrategyKind::Honest => &self.honest,
            StrategyKind::CreditFarmer => &self.credit_farmer,
            StrategyKind::MetadataForger => &self.metadata_forger,
            StrategyKind::Reuser => &self.reuser,
            StrategyKind::BountyHunter => &self.bounty_hunter,
        }
    }
}

/// Task demand: Zipf-distributed popular topics plus a singleton tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DemandConfig {
    pub topics: usize,
    pub zipf_exponent: f64,
    /// Share of drawn signatures that are fresh one-offs.
    pub unique_fraction: f64,
}

impl Default for DemandConfig {
    fn default() -> Self {
        DemandConfig { topics: 500, zipf_exponent: 1.1, unique_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub seed: u64,
    pub ticks: u32,
    /// Scales the farmers' publication rate.
    pub farming_multiplier: u32,
    pub mix: AgentMix,
    pub strategies: StrategyTable,
    pub demand: DemandConfig,
    pub bounty_amount: i64,
    /// Bounty lifetime in ticks.
    pub bounty_ttl: u32,
    /// Ticks a poster waits for competing submissions before resolving.
    pub bounty_resolve_after: u32,
    pub hub: HubConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            ticks: 200,
            farming_multiplier: 1,
            mix: AgentMix::default(),
            strategies: StrategyTable::default(),
            demand: DemandConfig::default(),
            bounty_amount: 20,
            bounty_ttl: 48,
            bounty_resolve_after: 6,
            hub: HubConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let config: SimConfig = toml::from_str(text).map_err(|e| SimError::ConfigInvalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.hub.validate().map_err(|e| SimError::ConfigInvalid(e.to_string()))?;
        for kind in StrategyKind::ALL {
            self.strategies.get(kind).validate(kind)?;
        }
        if self.demand.topics == 0 {
            return Err(SimError::ConfigInvalid("demand.topics must be positive".into()));
        }
        if !(self.demand.zipf_exponent.is_finite() && self.demand.zipf_exponent > 0.0) {
            return Err(SimError::ConfigInvalid("demand.zipf_exponent must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.demand.unique_fraction) {
            return Err(SimError::ConfigInvalid("demand.unique_fraction must lie in [0, 1]".into()));
        }
        if self.bounty_amount < 0 {
            return Err(SimError::ConfigInvalid("bounty_amount must be non-negative".into()));
        }
        if self.bounty_ttl == 0 {
            return Err(SimError::ConfigInvalid("bounty_ttl must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StrategyStats {
    pub agents: usize,
    pub assets: usize,
    pub mean_gdi: f64,
    pub mean_intrinsic: f64,
    pub mean_balance: f64,
}

/// End-of-run summary. Undefined ratios are reported as zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub ticks: u32,
    pub assets: usize,
    pub never_called_fraction: f64,
    pub promotion_rate: f64,
    pub top_decile_credit_share: f64,
    pub gini: f64,
    pub bounties_posted: usize,
    pub bounty_resolution_rate: f64,
    pub mean_intrinsic: f64,
    pub per_strategy: Vec<(StrategyKind, StrategyStats)>,
}

impl SimMetrics {
    pub fn strategy(&self, kind: StrategyKind) -> Option<&StrategyStats> {
        self.per_strategy.iter().find(|(k, _)| *k == kind).map(|(_, s)| s)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Metric | Value |\n|---|---:|\n");
        for (name, value) in [
            ("Assets", self.assets as f64),
            ("Never-called fraction", self.never_called_fraction),
            ("Promotion rate", self.promotion_rate),
            ("Top-decile credit share", self.top_decile_credit_share),
            ("Credit Gini", self.gini),
            ("Bounties posted", self.bounties_posted as f64),
            ("Bounty resolution rate", self.bounty_resolution_rate),
            ("Mean intrinsic score", self.mean_intrinsic),
        ] {
            out.push_str(&format!("| {name} | {value:.4} |\n"));
        }
        out.push_str("\n| Strategy | Agents | Assets | Mean GDI | Mean intrinsic | Mean balance |\n|---|---:|---:|---:|---:|---:|\n");
        for (kind, s) in &self.per_strategy {
            out.push_str(&format!(
                "| {} | {} | {} | {:.2} | {:.4} | {:.1} |\n",
                kind.name(),
                s.agents,
                s.assets,
                s.mean_gdi,
                s.mean_intrinsic,
                s.mean_balance
            ));
        }
        out
    }
}
