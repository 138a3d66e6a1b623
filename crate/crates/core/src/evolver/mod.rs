//! Agent-side engine: local store, retrieval cascade and validation-gated
//! application of capsules.

mod executor;
mod sandbox;
mod state;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::gep::{link_event, AgentId, Asset, AssetId, Capsule, Change, EvolutionEvent, Gene, GepError, IntrinsicSignals, Lineage};
use crate::hub::similarity::key_tokens;
use crate::hub::{HubApi, HubError, PublishReceipt};

pub use executor::{CommandResult, Executor, ExecutorError, MockExecutor, NOT_FOUND};
pub use sandbox::{SandboxExecutor, DEFAULT_TIMEOUT, TIMEOUT_STATUS};
pub use state::{DiffStats, Patch, Undo, WorkingState};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvolverError {
    #[error("hub unavailable: {0}")]
    HubUnavailable(String),
    #[error(transparent)]
    Hub(HubError),
    #[error(transparent)]
    ExecutorFailure(#[from] ExecutorError),
    #[error(transparent)]
    Lineage(#[from] GepError),
}

impl From<HubError> for EvolverError {
    fn from(e: HubError) -> Self {
        match e {
            HubError::Unavailable { reason } => EvolverError::HubUnavailable(reason),
            other => EvolverError::Hub(other),
        }
    }
}

/// Assets held by one agent, with an exact-trigger index over capsules.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LocalStore {
    assets: BTreeMap<AssetId, Asset>,
    triggers: BTreeMap<String, AssetId>,
}

fn trigger_key(trigger: &str) -> String {
    trigger.trim().to_string()
}

impl LocalStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Store an asset; a capsule becomes the entry for its trigger.
    pub fn insert(&mut self, asset: Asset) -> AssetId {
        let id = asset.id();
        if let Asset::Capsule(c) = &asset {
            self.triggers.insert(trigger_key(&c.trigger_text), id.clone());
        }
        self.assets.insert(id.clone(), asset);
        id
    }

    pub fn get(&self, id: &AssetId) -> Option<&Asset> {
        self.assets.get(id)
    }

    pub fn lookup(&self, trigger: &str) -> Option<(&AssetId, &Capsule)> {
        let id = self.triggers.get(&trigger_key(trigger))?;
        match self.assets.get(id) {
            Some(Asset::Capsule(c)) => Some((id, c)),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    /// Every indexed trigger points at a stored capsule with that trigger.
    pub fn is_consistent(&self) -> bool {
        self.triggers.iter().all(|(key, id)| {
            matches!(self.assets.get(id), Some(Asset::Capsule(c)) if &trigger_key(&c.trigger_text) == key)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Local,
    Hub,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Retrieved {
    pub source: Source,
    pub capsule: Capsule,
    /// Hub id of a fetched capsule.
    pub hub_id: Option<AssetId>,
    pub validations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationOutcome {
    pub results: Vec<CommandResult>,
    pub passed: bool,
    /// No commands were run.
    pub vacuous: bool,
}

/// Run every command; the outcome passes iff all of them exit zero.
pub fn run_validations(
    commands: &[String],
    state: &WorkingState,
    executor: &dyn Executor,
) -> Result<ValidationOutcome, ExecutorError> {
    let results = commands.iter().map(|c| executor.run(c, state)).collect::<Result<Vec<_>, _>>()?;
    Ok(ValidationOutcome {
        passed: results.iter().all(CommandResult::passed),
        vacuous: results.is_empty(),
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "signals")]
pub enum SignalPolicy {
    /// Derive blast radius from the diff and confidence from the pass rate.
    Measured,
    /// Report these values whatever happened.
    Forged(IntrinsicSignals),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolverConfig {
    pub sharing: bool,
    pub signal_policy: SignalPolicy,
    /// Signals of placeholder capsules created when nothing is found.
    pub generated_signals: IntrinsicSignals,
    /// Re-run validations before committing a capsule fetched from the hub.
    pub revalidate_fetched: bool,
}

impl Default for EvolverConfig {
    fn default() -> Self {
        Self {
            sharing: true,
            signal_policy: SignalPolicy::Measured,
            generated_signals: IntrinsicSignals::new(0.5, 0, 0, 0, 0, 0, crate::gep::DEFAULT_REPUTATION)
                .expect("in domain"),
            revalidate_fetched: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "result")]
pub enum Application {
    Committed { capsule: Capsule, event: EvolutionEvent, outcome: ValidationOutcome },
    Reverted { outcome: ValidationOutcome },
}

/// One agent's evolver. Single-threaded; talks to other agents only via the hub.
#[derive(Debug, Clone)]
pub struct Evolver {
    pub agent: AgentId,
    pub config: EvolverConfig,
    store: LocalStore,
    working: WorkingState,
    streaks: BTreeMap<String, u64>,
    attempts: u64,
    passes: u64,
    lineage: Lineage,
}

impl Evolver {
    pub fn new(agent: AgentId, config: EvolverConfig) -> Self {
        Self {
            agent,
            config,
            store: LocalStore::new(),
            working: WorkingState::new(),
            streaks: BTreeMap::new(),
            attempts: 0,
            passes: 0,
            lineage: Lineage::new(),
        }
    }

    pub fn with_working_state(mut self, state: WorkingState) -> Self {
        self.working = state;
        self
    }

    pub fn store(&self) -> &LocalStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut LocalStore {
        &mut self.store
    }

    pub fn working(&self) -> &WorkingState {
        &self.working
    }

    pub fn lineage(&self) -> &Lineage {
        &self.lineage
    }

    pub fn streak(&self, trigger: &str) -> u64 {
        self.streaks.get(&trigger_key(trigger)).copied().unwrap_or(0)
    }

    fn local_validations(&self, capsule: &Capsule) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for id in &capsule.parent_genes {
            if let Some(Asset::Gene(g)) = self.store.get(id) {
                for v in &g.validations {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }

    /// Local exact-trigger match, else the hub's best match, else a
    /// generated placeholder. Without a hub the cascade skips that stage.
    pub fn retrieve<H: HubApi + ?Sized>(&mut self, signature: &str, hub: Option<&mut H>) -> Result<Retrieved, EvolverError> {
        if let Some((_, capsule)) = self.store.lookup(signature) {
            let capsule = capsule.clone();
            let validations = self.local_validations(&capsule);
            return Ok(Retrieved { source: Source::Local, capsule, hub_id: None, validations });
        }
        if let Some(hub) = hub {
            let hits = hub.fetch(&self.agent, signature, Some(1))?;
            if let Some(hit) = hits.into_iter().next() {
                if let Asset::Capsule(capsule) = hit.body {
                    return Ok(Retrieved {
                        source: Source::Hub,
                        capsule,
                        hub_id: Some(hit.asset_id),
                        validations: hit.validations,
                    });
                }
            }
        }
        Ok(Retrieved { source: Source::Generated, capsule: self.generate(signature), hub_id: None, validations: vec![] })
    }

    /// Placeholder capsule for a task nothing matched.
    pub fn generate(&self, signature: &str) -> Capsule {
        Capsule {
            content: format!("generated change for: {signature}"),
            trigger_text: signature.to_string(),
            signals: self.config.generated_signals,
            parent_genes: vec![],
            summary: String::new(),
            author: self.agent.clone(),
        }
    }

    fn measured_signals(&self, capsule: &Capsule, streak: u64, diff: DiffStats) -> IntrinsicSignals {
        IntrinsicSignals {
            // Laplace-smoothed pass rate.
            confidence: (self.passes + 1) as f64 / (self.attempts + 2) as f64,
            success_streak: streak,
            files_modified: diff.files,
            lines_modified: diff.lines,
            trigger_count: key_tokens(&capsule.trigger_text).len() as u64,
            summary_length: capsule.summary.chars().count() as u64,
            reputation: capsule.signals.reputation,
        }
    }

    /// Apply `patch` for `capsule`, run the genes' validations, and either
    /// commit (streak +1, event emitted, capsule stored) or restore the
    /// working state exactly (streak reset).
    pub fn apply_with_validation(
        &mut self,
        capsule: &Capsule,
        patch: &Patch,
        genes: &[Gene],
        executor: &dyn Executor,
        now: DateTime<Utc>,
    ) -> Result<Application, EvolverError> {
        let mut commands: Vec<String> = Vec::new();
        for g in genes {
            for v in &g.validations {
                if !commands.contains(v) {
                    commands.push(v.clone());
                }
            }
        }
        let undo = self.working.apply_undoable(patch);
        let outcome = match run_validations(&commands, &self.working, executor) {
            Ok(o) => o,
            Err(e) => {
                self.working.undo(undo);
                return Err(e.into());
            }
        };
        self.attempts += 1;
        let key = trigger_key(&capsule.trigger_text);
        if !outcome.passed {
            self.working.undo(undo);
            self.streaks.insert(key, 0);
            return Ok(Application::Reverted { outcome });
        }
        self.passes += 1;
        let streak = {
            let s = self.streaks.entry(key).or_insert(0);
            *s += 1;
            *s
        };
        let diff = self.working.diff_since(&undo);
        let signals = match &self.config.signal_policy {
            SignalPolicy::Measured => self.measured_signals(capsule, streak, diff),
            SignalPolicy::Forged(s) => *s,
        };
        let committed = Capsule {
            signals,
            parent_genes: genes.iter().map(Gene::id).collect(),
            author: self.agent.clone(),
            ..capsule.clone()
        };
        let change = match self.store.lookup(&committed.trigger_text) {
            Some((prior, _)) if self.lineage.contains_capsule(prior) && *prior != committed.id() => {
                Change::Repair { of: prior.clone() }
            }
            _ => Change::Innovation,
        };
        let event = link_event(&committed, genes, change, now, &self.lineage)?;
        self.lineage.push(event.clone());
        for g in genes {
            self.store.insert(Asset::Gene(g.clone()));
        }
        self.store.insert(Asset::Capsule(committed.clone()));
        Ok(Application::Committed { capsule: committed, event, outcome })
    }

    /// Forward to the hub iff sharing is on. The local copy is kept either way.
    pub fn publish_if_sharing<H: HubApi + ?Sized>(
        &self,
        hub: &mut H,
        asset: &Asset,
    ) -> Result<Option<PublishReceipt>, HubError> {
        if !self.config.sharing {
            return Ok(None);
        }
        hub.publish(&self.agent, asset).map(Some)
    }
}
