//! The central registry.
//!
//! A [`Hub`] owns every published asset, the credit ledger and the bounty
//! market. It never reads the wall clock: time only moves when the caller
//! passes an instant to [`Hub::recompute_and_promote`] or [`Hub::advance_clock`].
//! All collections iterate in a fixed order so that identical operation
//! sequences produce identical state.

mod api;
pub mod bounty;
pub mod ledger;
pub mod record;
pub mod similarity;
pub mod wire;

use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::gep::{hash_asset, AgentId, Asset, AssetId, AssetKind, IntrinsicSignals, DEFAULT_REPUTATION};
use crate::scoring::{components_at, composite_gdi, intrinsic_score, social_score, GdiWeights, PROMOTION_THRESHOLD};

pub use api::HubApi;
pub use bounty::{Bounty, BountyId, BountyStatus, Evaluator, KeywordOverlap, Submission, SubmissionStatus};
pub use ledger::{call_reward, validation_report_reward, CreditLedger, Credits, LedgerEntry, LedgerTotals, Reason};
pub use record::{AssetRecord, AssetStatus, VoteDirection};
pub use similarity::{EmbeddingIndex, FeatureHashEmbedder, ShingleIndex, SimilarityIndex};

use similarity::KeyIndex;

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum HubError {
    #[error("unknown agent {agent}")]
    UnknownAgent { agent: AgentId },
    #[error("unknown asset {asset}")]
    UnknownAsset { asset: AssetId },
    #[error("unknown bounty {bounty}")]
    UnknownBounty { bounty: BountyId },
    #[error("agent {agent} holds {balance} credits, needs {required}")]
    InsufficientCredits { agent: AgentId, balance: Credits, required: Credits },
    #[error("asset duplicates {existing} (similarity {similarity:.3})")]
    DuplicateAsset { existing: AssetId, similarity: f64 },
    #[error("authors cannot vote on their own assets")]
    SelfVote,
    #[error("bounty has no submissions")]
    NoSubmissions,
    #[error("bounty already settled")]
    AlreadySettled,
    #[error("bounty expired")]
    Expired,
    #[error("illegal status transition {from} -> {to}")]
    IllegalTransition { from: AssetStatus, to: AssetStatus },
    #[error("invalid request: {reason}")]
    InvalidRequest { reason: String },
    #[error("hub unavailable: {reason}")]
    Unavailable { reason: String },
}

impl HubError {
    pub fn code(&self) -> &'static str {
        match self {
            HubError::UnknownAgent { .. } => "unknown_agent",
            HubError::UnknownAsset { .. } => "unknown_asset",
            HubError::UnknownBounty { .. } => "unknown_bounty",
            HubError::InsufficientCredits { .. } => "insufficient_credits",
            HubError::DuplicateAsset { .. } => "duplicate_asset",
            HubError::SelfVote => "self_vote",
            HubError::NoSubmissions => "no_submissions",
            HubError::AlreadySettled => "already_settled",
            HubError::Expired => "expired",
            HubError::IllegalTransition { .. } => "illegal_transition",
            HubError::InvalidRequest { .. } => "invalid_request",
            HubError::Unavailable { .. } => "unavailable",
        }
    }

    fn invalid(reason: impl Into<String>) -> Self {
        HubError::InvalidRequest { reason: reason.into() }
    }
}

fn default_epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 2, 1, 0, 0, 0).unwrap()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HubConfig {
    pub publish_fee: Credits,
    pub fetch_fee: Credits,
    pub promotion_threshold: f64,
    pub duplicate_threshold: f64,
    /// Lowest query-to-trigger similarity a fetch will return.
    pub min_query_similarity: f64,
    pub fetch_limit: usize,
    pub weights: GdiWeights,
    /// Initial value of the logical clock.
    pub epoch: DateTime<Utc>,
}

impl Default for HubConfig {
    fn default() -> Self {
        Self {
            publish_fee: 2,
            fetch_fee: 1,
            promotion_threshold: PROMOTION_THRESHOLD,
            duplicate_threshold: similarity::DEFAULT_DUPLICATE_THRESHOLD,
            min_query_similarity: 0.5,
            fetch_limit: 3,
            weights: GdiWeights::OFFICIAL,
            epoch: default_epoch(),
        }
    }
}

impl HubConfig {
    pub fn validate(&self) -> Result<(), HubError> {
        if self.publish_fee < 0 || self.fetch_fee < 0 {
            return Err(HubError::invalid("fees must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.duplicate_threshold) || !(0.0..=1.0).contains(&self.min_query_similarity) {
            return Err(HubError::invalid("similarity thresholds must lie in [0, 1]"));
        }
        if !self.promotion_threshold.is_finite() {
            return Err(HubError::invalid("promotion threshold must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub name: String,
    pub registered_at: DateTime<Utc>,
    /// Reuse reports filed against this agent's assets.
    pub reports_total: u64,
    pub reports_succeeded: u64,
}

impl Agent {
    /// Success rate of reports on the agent's assets, scaled to 0..=100.
    pub fn reputation(&self) -> f64 {
        if self.reports_total == 0 {
            DEFAULT_REPUTATION
        } else {
            100.0 * self.reports_succeeded as f64 / self.reports_total as f64
        }
    }

    /// Success rate in `[0, 1]`, 0.5 without history.
    pub fn exec_history(&self) -> f64 {
        self.reputation() / 100.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishReceipt {
    pub asset_id: AssetId,
    pub status: AssetStatus,
    pub intrinsic: f64,
    pub gdi: f64,
    pub fee: Credits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FetchHit {
    pub asset_id: AssetId,
    pub kind: AssetKind,
    pub author: AgentId,
    pub similarity: f64,
    pub gdi: f64,
    pub body: Asset,
    pub validations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuseReceipt {
    pub coverage: f64,
    pub reward: Credits,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecomputeReport {
    pub recomputed: usize,
    pub promoted: Vec<AssetId>,
    pub demoted: Vec<AssetId>,
    pub expired_bounties: Vec<BountyId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub bounty: BountyId,
    pub winner: AgentId,
    pub asset: AssetId,
    pub payout: Credits,
    pub scores: Vec<f64>,
}

/// Serializable hub state; indexes are rebuilt on restore.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubSnapshot {
    pub config: HubConfig,
    pub clock: DateTime<Utc>,
    pub agents: BTreeMap<AgentId, Agent>,
    pub records: Vec<AssetRecord>,
    pub ledger: CreditLedger,
    pub bounties: Vec<Bounty>,
}

pub struct Hub {
    config: HubConfig,
    clock: DateTime<Utc>,
    agents: BTreeMap<AgentId, Agent>,
    records: Vec<AssetRecord>,
    by_id: HashMap<AssetId, usize>,
    ledger: CreditLedger,
    bounties: Vec<Bounty>,
    bounty_index: HashMap<BountyId, usize>,
    duplicates: Box<dyn SimilarityIndex>,
    keys: KeyIndex,
}

impl std::fmt::Debug for Hub {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hub")
            .field("clock", &self.clock)
            .field("agents", &self.agents.len())
            .field("records", &self.records.len())
            .field("bounties", &self.bounties.len())
            .finish()
    }
}

impl Default for Hub {
    fn default() -> Self {
        Self::new(HubConfig::default())
    }
}

/// Text compared by the duplicate check: content and summary.
fn duplicate_text(asset: &Asset) -> Option<String> {
    match asset {
        Asset::Capsule(c) => Some(format!("{}\n{}", c.content, c.summary)),
        Asset::Gene(g) => Some(
            [g.preconditions.join("\n"), g.constraints.join("\n"), g.validations.join("\n"), g.summary.clone()]
                .join("\n"),
        ),
        Asset::Event(_) => None,
    }
}

/// Text matched against fetch queries.
fn key_text(asset: &Asset) -> Option<String> {
    match asset {
        Asset::Capsule(c) => Some(c.trigger_text.clone()),
        Asset::Gene(g) => Some(format!("{} {}", g.preconditions.join(" "), g.tags.join(" "))),
        Asset::Event(_) => None,
    }
}

/// Signals scored at publication. Genes carry no self-reported metrics, so
/// theirs are derived from structure: one trigger per precondition and the
/// summary length, with no confidence, streak or blast radius claimed.
fn publication_signals(asset: &Asset, reputation: f64) -> Result<IntrinsicSignals, HubError> {
    let signals = match asset {
        Asset::Capsule(c) => c.signals,
        Asset::Event(e) => e.metrics,
        Asset::Gene(g) => IntrinsicSignals::new(
            0.0,
            0,
            0,
            0,
            g.preconditions.len() as u64,
            g.summary.chars().count() as u64,
            reputation,
        )
        .map_err(|e| HubError::invalid(e.to_string()))?,
    };
    signals.with_reputation(reputation).map_err(|e| HubError::invalid(e.to_string()))
}

impl Hub {
    pub fn new(config: HubConfig) -> Self {
        let index = ShingleIndex::new(config.duplicate_threshold);
        Self::with_index(config, Box::new(index))
    }

    /// Hub with a caller-supplied duplicate detector.
    pub fn with_index(config: HubConfig, duplicates: Box<dyn SimilarityIndex>) -> Self {
        Self {
            clock: config.epoch,
            config,
            agents: BTreeMap::new(),
            records: Vec::new(),
            by_id: HashMap::new(),
            ledger: CreditLedger::new(),
            bounties: Vec::new(),
            bounty_index: HashMap::new(),
            duplicates,
            keys: KeyIndex::default(),
        }
    }

    pub fn snapshot(&self) -> HubSnapshot {
        HubSnapshot {
            config: self.config.clone(),
            clock: self.clock,
            agents: self.agents.clone(),
            records: self.records.clone(),
            ledger: self.ledger.clone(),
            bounties: self.bounties.clone(),
        }
    }

    pub fn restore(snapshot: HubSnapshot) -> Self {
        let mut hub = Hub::new(snapshot.config);
        hub.clock = snapshot.clock;
        hub.agents = snapshot.agents;
        hub.ledger = snapshot.ledger;
        hub.ledger.reindex();
        for record in snapshot.records {
            hub.index_record(record);
        }
        for bounty in snapshot.bounties {
            hub.bounty_index.insert(bounty.id.clone(), hub.bounties.len());
            hub.bounties.push(bounty);
        }
        hub
    }

    pub fn config(&self) -> &HubConfig {
        &self.config
    }

    pub fn clock(&self) -> DateTime<Utc> {
        self.clock
    }

    /// Move the logical clock forward; earlier instants are ignored.
    pub fn advance_clock(&mut self, now: DateTime<Utc>) {
        if now > self.clock {
            self.clock = now;
        }
    }

    pub fn ledger(&self) -> &CreditLedger {
        &self.ledger
    }

    pub fn balance(&self, agent: &AgentId) -> Credits {
        self.ledger.balance(agent)
    }

    pub fn agent(&self, id: &AgentId) -> Option<&Agent> {
        self.agents.get(id)
    }

    pub fn agents(&self) -> impl Iterator<Item = &Agent> {
        self.agents.values()
    }

    pub fn record(&self, id: &AssetId) -> Option<&AssetRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[AssetRecord] {
        &self.records
    }

    pub fn bounty(&self, id: &BountyId) -> Option<&Bounty> {
        self.bounty_index.get(id).map(|&i| &self.bounties[i])
    }

    pub fn bounties(&self) -> &[Bounty] {
        &self.bounties
    }

    fn require_agent(&self, id: &AgentId) -> Result<&Agent, HubError> {
        self.agents.get(id).ok_or_else(|| HubError::UnknownAgent { agent: id.clone() })
    }

    fn record_index(&self, id: &AssetId) -> Result<usize, HubError> {
        self.by_id.get(id).copied().ok_or_else(|| HubError::UnknownAsset { asset: id.clone() })
    }

    fn bounty_slot(&self, id: &BountyId) -> Result<usize, HubError> {
        self.bounty_index.get(id).copied().ok_or_else(|| HubError::UnknownBounty { bounty: id.clone() })
    }

    fn post(&mut self, agent: &AgentId, amount: Credits, reason: Reason, reference: Option<String>) -> Result<(), HubError> {
        self.ledger.post(LedgerEntry { agent: agent.clone(), amount, reason, reference, timestamp: self.clock })
    }

    fn index_record(&mut self, record: AssetRecord) {
        let key = self.records.len();
        if let Some(text) = duplicate_text(&record.body) {
            self.duplicates.insert(key, record.kind, &text);
        }
        if let Some(text) = key_text(&record.body) {
            self.keys.insert(key, &text);
        }
        self.by_id.insert(record.id.clone(), key);
        self.records.push(record);
    }

    pub fn register_agent(&mut self, name: &str) -> Result<AgentId, HubError> {
        if name.trim().is_empty() {
            return Err(HubError::invalid("agent name must be non-empty"));
        }
        let seq = self.agents.len();
        let digest = hash_asset(format!("{seq}:{name}").as_bytes());
        let id = AgentId::new(format!("node_{}", &digest.as_str()[..16]));
        self.agents.insert(
            id.clone(),
            Agent {
                id: id.clone(),
                name: name.to_string(),
                registered_at: self.clock,
                reports_total: 0,
                reports_succeeded: 0,
            },
        );
        self.post(&id, ledger::REGISTRATION_CREDITS, Reason::Registration, None)?;
        Ok(id)
    }

    /// Validation commands inherited from the genes an asset references.
    fn inherited_validations(&self, asset: &Asset) -> Vec<String> {
        let parents = match asset {
            Asset::Gene(g) => return g.validations.clone(),
            Asset::Capsule(c) => &c.parent_genes,
            Asset::Event(e) => &e.parent_genes,
        };
        let mut out: Vec<String> = Vec::new();
        for id in parents {
            if let Some(Asset::Gene(g)) = self.record(id).map(|r| &r.body) {
                for v in &g.validations {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }

    pub fn publish(&mut self, author: &AgentId, asset: Asset) -> Result<PublishReceipt, HubError> {
        let reputation = self.require_agent(author)?.reputation();
        match &asset {
            Asset::Capsule(c) if !c.is_publishable() => return Err(HubError::invalid("capsule has no trigger text")),
            Asset::Capsule(c) if &c.author != author => return Err(HubError::invalid("capsule author differs from publisher")),
            Asset::Gene(g) if &g.author != author => return Err(HubError::invalid("gene author differs from publisher")),
            Asset::Event(e) if !e.is_sealed() => return Err(HubError::invalid("event digest does not match its fields")),
            _ => {}
        }
        let id = asset.id();
        if self.by_id.contains_key(&id) {
            return Err(HubError::DuplicateAsset { existing: id, similarity: 1.0 });
        }
        if let Some(text) = duplicate_text(&asset) {
            if let Some((key, similarity)) = self.duplicates.most_similar(asset.kind(), &text) {
                return Err(HubError::DuplicateAsset { existing: self.records[key].id.clone(), similarity });
            }
        }
        let intrinsic = intrinsic_score(&publication_signals(&asset, reputation)?);

        let fee = self.config.publish_fee;
        if fee > 0 {
            self.post(author, -fee, Reason::PublishFee, Some(id.to_string()))?;
        }
        let counters = crate::scoring::UsageCounters::new(self.clock);
        let components = components_at(intrinsic, &counters, self.clock);
        let gdi = composite_gdi(&components, &self.config.weights);
        let record = AssetRecord {
            id: id.clone(),
            kind: asset.kind(),
            validations: self.inherited_validations(&asset),
            body: asset,
            status: AssetStatus::Candidate,
            counters,
            components,
            gdi,
            author: author.clone(),
            published_at: self.clock,
            promotion_rewarded: false,
            reports_total: 0,
            reports_succeeded: 0,
            votes: BTreeMap::new(),
        };
        self.index_record(record);
        Ok(PublishReceipt { asset_id: id, status: AssetStatus::Candidate, intrinsic, gdi, fee })
    }

    /// Batch rescoring at `now`: refresh every live record's dynamic
    /// components, apply promotion and staleness transitions, and expire
    /// overdue bounties.
    pub fn recompute_and_promote(&mut self, now: DateTime<Utc>) -> RecomputeReport {
        self.advance_clock(now);
        let now = self.clock;
        let threshold = self.config.promotion_threshold;
        let mut report = RecomputeReport::default();
        let mut rewards = Vec::new();
        for record in &mut self.records {
            if record.status == AssetStatus::Archived {
                continue;
            }
            record.components = components_at(record.components.intrinsic, &record.counters, now);
            record.gdi = composite_gdi(&record.components, &self.config.weights);
            report.recomputed += 1;
            match record.status {
                AssetStatus::Candidate | AssetStatus::Stale if record.gdi >= threshold => {
                    record.status = AssetStatus::Promoted;
                    report.promoted.push(record.id.clone());
                    if !record.promotion_rewarded {
                        record.promotion_rewarded = true;
                        rewards.push((record.author.clone(), record.id.to_string()));
                    }
                }
                AssetStatus::Promoted if record.gdi < threshold => {
                    record.status = AssetStatus::Stale;
                    report.demoted.push(record.id.clone());
                }
                _ => {}
            }
        }
        for (author, reference) in rewards {
            self.post(&author, ledger::PROMOTION_REWARD, Reason::Promotion, Some(reference))
                .expect("credits never overdraw");
        }
        for slot in 0..self.bounties.len() {
            if self.expire_if_due(slot) {
                report.expired_bounties.push(self.bounties[slot].id.clone());
            }
        }
        report
    }

    /// Administrative status change. Promotion is reserved for recompute.
    pub fn set_status(&mut self, id: &AssetId, to: AssetStatus) -> Result<(), HubError> {
        let i = self.record_index(id)?;
        let from = self.records[i].status;
        if to == AssetStatus::Promoted || !from.can_become(to) {
            return Err(HubError::IllegalTransition { from, to });
        }
        self.records[i].status = to;
        Ok(())
    }

    /// Promoted assets ranked by query similarity, then GDI, then age. Every
    /// hit counts as a call and pays its author by GDI tier. The fee is
    /// charged even when nothing matches.
    pub fn fetch(&mut self, caller: &AgentId, query: &str, limit: Option<usize>) -> Result<Vec<FetchHit>, HubError> {
        self.require_agent(caller)?;
        let fee = self.config.fetch_fee;
        if fee > 0 {
            self.post(caller, -fee, Reason::FetchFee, None)?;
        }
        let limit = limit.unwrap_or(self.config.fetch_limit);
        let mut hits: Vec<(usize, f64)> = self
            .keys
            .matches(query, self.config.min_query_similarity)
            .into_iter()
            .filter(|&(i, _)| self.records[i].is_fetchable())
            .collect();
        hits.sort_by(|&(a, sa), &(b, sb)| {
            let (ra, rb) = (&self.records[a], &self.records[b]);
            sb.total_cmp(&sa)
                .then(rb.gdi.total_cmp(&ra.gdi))
                .then(ra.published_at.cmp(&rb.published_at))
                .then(a.cmp(&b))
        });
        hits.truncate(limit);

        let now = self.clock;
        let mut out = Vec::with_capacity(hits.len());
        for (i, similarity) in hits {
            let record = &mut self.records[i];
            record.counters.call_count += 1;
            record.counters.touch(now);
            let reward = call_reward(record.gdi);
            let author = record.author.clone();
            out.push(FetchHit {
                asset_id: record.id.clone(),
                kind: record.kind,
                author: author.clone(),
                similarity,
                gdi: record.gdi,
                body: record.body.clone(),
                validations: record.validations.clone(),
            });
            if reward > 0 {
                let reference = Some(out.last().expect("just pushed").asset_id.to_string());
                self.post(&author, reward, Reason::AssetCalled, reference)?;
            }
        }
        Ok(out)
    }

    /// Record a validation report on a reused asset. The reporter is paid by
    /// how many of the asset's commands the report covers.
    pub fn report_reuse(
        &mut self,
        caller: &AgentId,
        asset: &AssetId,
        success: bool,
        reported_commands: &[String],
    ) -> Result<ReuseReceipt, HubError> {
        let i = self.record_index(asset)?;
        self.require_agent(caller)?;
        let now = self.clock;
        let record = &mut self.records[i];
        let coverage = if record.validations.is_empty() {
            1.0
        } else {
            let covered = record.validations.iter().filter(|v| reported_commands.contains(v)).count();
            covered as f64 / record.validations.len() as f64
        };
        record.reports_total += 1;
        if success {
            record.reports_succeeded += 1;
            record.counters.reuse_count += 1;
        }
        record.counters.touch(now);
        let author = record.author.clone();
        if let Some(a) = self.agents.get_mut(&author) {
            a.reports_total += 1;
            a.reports_succeeded += u64::from(success);
        }
        let reward = validation_report_reward(coverage);
        self.post(caller, reward, Reason::ValidationReport, Some(asset.to_string()))?;
        Ok(ReuseReceipt { coverage, reward })
    }

    /// One vote per voter and asset; a later vote replaces the earlier one.
    pub fn vote(&mut self, voter: &AgentId, asset: &AssetId, direction: VoteDirection) -> Result<(), HubError> {
        self.require_agent(voter)?;
        let i = self.record_index(asset)?;
        let record = &mut self.records[i];
        if &record.author == voter {
            return Err(HubError::SelfVote);
        }
        record.votes.insert(voter.clone(), direction);
        let up = record.votes.values().filter(|d| **d == VoteDirection::Up).count() as u64;
        record.counters.upvotes = up;
        record.counters.downvotes = record.votes.len() as u64 - up;
        Ok(())
    }

    pub fn post_bounty(
        &mut self,
        poster: &AgentId,
        title: &str,
        signals: Vec<String>,
        amount: Credits,
        expires_at: DateTime<Utc>,
    ) -> Result<BountyId, HubError> {
        self.require_agent(poster)?;
        if amount < 0 {
            return Err(HubError::invalid("bounty amount must be non-negative"));
        }
        let id = BountyId(format!("bounty_{:06}", self.bounties.len() + 1));
        let live = expires_at > self.clock;
        if live && amount > 0 {
            self.post(poster, -amount, Reason::BountyEscrow, Some(id.to_string()))?;
        }
        self.bounty_index.insert(id.clone(), self.bounties.len());
        self.bounties.push(Bounty {
            id: id.clone(),
            poster: poster.clone(),
            title: title.to_string(),
            signals,
            amount,
            status: if live { BountyStatus::Open } else { BountyStatus::Expired },
            created_at: self.clock,
            expires_at,
            submissions: Vec::new(),
            accepted_at: None,
        });
        Ok(id)
    }

    /// Expire a live bounty whose deadline has passed, refunding escrow.
    fn expire_if_due(&mut self, slot: usize) -> bool {
        let b = &mut self.bounties[slot];
        if !(b.status.is_live() && self.clock >= b.expires_at) {
            return false;
        }
        b.status = BountyStatus::Expired;
        let (poster, amount, reference) = (b.poster.clone(), b.amount, b.id.to_string());
        if amount > 0 {
            self.post(&poster, amount, Reason::BountyRefund, Some(reference)).expect("refund is a credit");
        }
        true
    }

    fn require_live(&mut self, slot: usize) -> Result<(), HubError> {
        self.expire_if_due(slot);
        match self.bounties[slot].status {
            BountyStatus::Open | BountyStatus::Matched => Ok(()),
            BountyStatus::Expired => Err(HubError::Expired),
            BountyStatus::Accepted | BountyStatus::Settled => Err(HubError::AlreadySettled),
        }
    }

    pub fn submit(&mut self, bounty: &BountyId, submitter: &AgentId, asset: &AssetId) -> Result<usize, HubError> {
        let slot = self.bounty_slot(bounty)?;
        self.require_agent(submitter)?;
        self.record_index(asset)?;
        self.require_live(slot)?;
        let b = &mut self.bounties[slot];
        b.submissions.push(Submission {
            submitter: submitter.clone(),
            asset: asset.clone(),
            status: SubmissionStatus::Pending,
            created_at: self.clock,
            score: None,
        });
        b.status = BountyStatus::Matched;
        Ok(b.submissions.len() - 1)
    }

    /// Score every submission, accept exactly one, pay it the escrow.
    pub fn resolve_bounty(&mut self, bounty: &BountyId, evaluator: &dyn Evaluator) -> Result<Resolution, HubError> {
        let slot = self.bounty_slot(bounty)?;
        self.require_live(slot)?;
        let b = &self.bounties[slot];
        if b.submissions.is_empty() {
            return Err(HubError::NoSubmissions);
        }
        let mut scored = Vec::with_capacity(b.submissions.len());
        for s in &b.submissions {
            let record = self.record(&s.asset).expect("submissions reference stored assets");
            let history = self.agents.get(&s.submitter).map_or(0.5, Agent::exec_history);
            let score = bounty::submission_score(
                evaluator.evaluate(b, record),
                record.gdi,
                history,
                social_score(record.counters.upvotes, record.counters.downvotes),
            );
            scored.push((score, s.created_at));
        }
        let winner = bounty::pick_winner(&scored).expect("non-empty");
        let runner_up = bounty::pick_winner(
            &scored.iter().enumerate().map(|(i, &(s, t))| if i == winner { (f64::NEG_INFINITY, t) } else { (s, t) }).collect::<Vec<_>>(),
        )
        .filter(|&i| i != winner);

        let b = &mut self.bounties[slot];
        for (i, (s, (score, _))) in b.submissions.iter_mut().zip(&scored).enumerate() {
            s.score = Some(*score);
            s.status = if i == winner {
                SubmissionStatus::Accepted
            } else if Some(i) == runner_up {
                SubmissionStatus::RunnerUp
            } else {
                SubmissionStatus::Rejected
            };
        }
        b.status = BountyStatus::Settled;
        b.accepted_at = Some(self.clock);
        let (payee, asset, payout) = (b.submissions[winner].submitter.clone(), b.submissions[winner].asset.clone(), b.amount);
        self.post(&payee, payout, Reason::BountyPayout, Some(bounty.to_string()))?;
        Ok(Resolution {
            bounty: bounty.clone(),
            winner: payee,
            asset,
            payout,
            scores: scored.into_iter().map(|p| p.0).collect(),
        })
    }

    /// Ledger conservation, no overdraft, and escrow matching live bounties.
    pub fn check_conservation(&self) -> Result<(), String> {
        if !self.ledger.is_conserved() {
            return Err(format!("ledger not conserved: {:?}", self.ledger.totals()));
        }
        let held: Credits = self
            .bounties
            .iter()
            .filter(|b| b.status.is_live())
            .map(|b| b.amount)
            .sum();
        let escrowed = self.ledger.totals().escrowed;
        if held != escrowed {
            return Err(format!("escrow {escrowed} differs from live bounty total {held}"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
