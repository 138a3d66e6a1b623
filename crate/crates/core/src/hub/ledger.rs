//! Append-only credit ledger.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::HubError;
use crate::gep::AgentId;

pub type Credits = i64;

/// Endowment granted at registration.
pub const REGISTRATION_CREDITS: Credits = 200;
/// Fixed reward when an asset is first promoted.
pub const PROMOTION_REWARD: Credits = 20;
pub const VALIDATION_REPORT_MIN: Credits = 10;
pub const VALIDATION_REPORT_SPAN: Credits = 20;

/// Reward to an asset's author each time it is called, tiered by GDI.
pub fn call_reward(gdi: f64) -> Credits {
    if gdi <= 20.0 {
        0
    } else if gdi <= 40.0 {
        2
    } else if gdi <= 60.0 {
        5
    } else if gdi <= 80.0 {
        8
    } else {
        12
    }
}

/// `10 + round(20 * coverage)` for a coverage fraction in `[0, 1]`.
pub fn validation_report_reward(coverage: f64) -> Credits {
    VALIDATION_REPORT_MIN + (VALIDATION_REPORT_SPAN as f64 * coverage.clamp(0.0, 1.0)).round() as Credits
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Registration,
    ValidationReport,
    Promotion,
    AssetCalled,
    BountyPayout,
    PublishFee,
    FetchFee,
    BountyEscrow,
    BountyRefund,
}

impl Reason {
    /// Credits created out of nothing.
    pub fn is_mint(self) -> bool {
        matches!(
            self,
            Reason::Registration | Reason::ValidationReport | Reason::Promotion | Reason::AssetCalled
        )
    }

    /// Credits destroyed.
    pub fn is_burn(self) -> bool {
        matches!(self, Reason::PublishFee | Reason::FetchFee)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub agent: AgentId,
    pub amount: Credits,
    pub reason: Reason,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "ref")]
    pub reference: Option<String>,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerTotals {
    pub minted: Credits,
    pub burned: Credits,
    /// Credits currently held in bounty escrow.
    pub escrowed: Credits,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CreditLedger {
    entries: Vec<LedgerEntry>,
    #[serde(skip)]
    balances: BTreeMap<AgentId, Credits>,
}

impl CreditLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuild the balance cache from entries, e.g. after deserialization.
    pub fn reindex(&mut self) {
        self.balances.clear();
        for e in &self.entries {
            *self.balances.entry(e.agent.clone()).or_default() += e.amount;
        }
    }

    pub fn balance(&self, agent: &AgentId) -> Credits {
        self.balances.get(agent).copied().unwrap_or(0)
    }

    /// Append an entry unless it would overdraw the agent.
    pub fn post(&mut self, entry: LedgerEntry) -> Result<(), HubError> {
        let balance = self.balance(&entry.agent);
        if balance + entry.amount < 0 {
            return Err(HubError::InsufficientCredits {
                agent: entry.agent,
                balance,
                required: -entry.amount,
            });
        }
        *self.balances.entry(entry.agent.clone()).or_default() += entry.amount;
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn entries_for<'a>(&'a self, agent: &'a AgentId) -> impl Iterator<Item = &'a LedgerEntry> + 'a {
        self.entries.iter().filter(move |e| &e.agent == agent)
    }

    pub fn balances(&self) -> &BTreeMap<AgentId, Credits> {
        &self.balances
    }

    pub fn totals(&self) -> LedgerTotals {
        let mut t = LedgerTotals::default();
        for e in &self.entries {
            match e.reason {
                r if r.is_mint() => t.minted += e.amount,
                r if r.is_burn() => t.burned -= e.amount,
                Reason::BountyEscrow => t.escrowed -= e.amount,
                Reason::BountyPayout | Reason::BountyRefund => t.escrowed -= e.amount,
                _ => unreachable!("every reason is mint, burn or escrow"),
            }
        }
        t
    }

    /// Sum of all entries equals minted minus burned minus escrow in flight.
    pub fn is_conserved(&self) -> bool {
        let t = self.totals();
        let sum: Credits = self.entries.iter().map(|e| e.amount).sum();
        let cached: Credits = self.balances.values().sum();
        sum == cached && sum == t.minted - t.burned - t.escrowed && self.balances.values().all(|b| *b >= 0)
    }
}
