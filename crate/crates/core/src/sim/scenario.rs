use std::collections::BTreeMap;

use chrono::{DateTime, Duration, Utc};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use super::{SignalMode, SimConfig, SimError, SimMetrics, StrategyKind, StrategyParams, StrategyStats};
use crate::audit::forgery::s_opt;
use crate::evolver::{
    Application, Evolver, EvolverConfig, EvolverError, MockExecutor, Patch, SignalPolicy, Source, WorkingState,
};
use crate::gep::{hash_asset, AgentId, Asset, AssetId, AssetKind, Capsule, Gene};
use crate::hub::similarity::key_tokens;
use crate::hub::{BountyId, BountyStatus, Hub, HubError, KeywordOverlap, VoteDirection};

const KINDS: [&str; 8] = ["TypeError", "RangeError", "ENOENT", "ECONNRESET", "SyntaxError", "ReferenceError", "Timeout", "EACCES"];
const VERBS: [&str; 8] = ["reading", "parsing", "opening", "resolving", "calling", "writing", "loading", "binding"];
const NOUNS: [&str; 8] = ["config", "socket", "token", "buffer", "schema", "cache", "stream", "handle"];
const MODULES: [&str; 8] = ["loader", "client", "router", "worker", "parser", "store", "auth", "queue"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Published { asset: AssetId, kind: AssetKind, gdi: f64 },
    Rejected { code: String },
    Reused { asset: AssetId, success: bool, reward: i64 },
    LocalReuse,
    Reverted,
    Missed,
    BountyPosted { bounty: BountyId },
    Submitted { bounty: BountyId, asset: AssetId },
    BountyResolved { bounty: BountyId, winner: AgentId, payout: i64 },
    Recompute { promoted: usize, demoted: usize, expired: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub tick: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<AgentId>,
    #[serde(flatten)]
    pub action: Action,
}

#[derive(Debug)]
pub struct SimOutcome {
    pub metrics: SimMetrics,
    pub trace: Vec<TraceEvent>,
    /// Ticks after which conservation was checked and held.
    pub conservation_checks: u32,
    pub hub: Hub,
    pub strategies: BTreeMap<AgentId, StrategyKind>,
}

impl SimOutcome {
    /// One JSON record per line.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.trace {
            out.push_str(&serde_json::to_string(e).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }
}

struct Demand {
    topics: Vec<String>,
    zipf: Zipf<f64>,
    unique_fraction: f64,
    next_unique: u64,
}

fn signature(rng: &mut ChaCha8Rng, id: &str) -> String {
    format!(
        "{} {} {}_{id} {}_{id}",
        KINDS.choose(rng).expect("non-empty"),
        VERBS.choose(rng).expect("non-empty"),
        NOUNS.choose(rng).expect("non-empty"),
        MODULES.choose(rng).expect("non-empty"),
    )
}

impl Demand {
    fn new(config: &super::DemandConfig, rng: &mut ChaCha8Rng) -> Result<Self, SimError> {
        let topics = (0..config.topics).map(|k| signature(rng, &format!("t{k}"))).collect();
        let zipf = Zipf::new(config.topics as f64, config.zipf_exponent)
            .map_err(|e| SimError::ConfigInvalid(format!("demand: {e}")))?;
        Ok(Demand { topics, zipf, unique_fraction: config.unique_fraction, next_unique: 0 })
    }

    fn unique(&mut self, rng: &mut ChaCha8Rng) -> String {
        self.next_unique += 1;
        signature(rng, &format!("u{}", self.next_unique))
    }

    fn draw(&mut self, rng: &mut ChaCha8Rng) -> String {
        if rng.random_bool(self.unique_fraction) {
            return self.unique(rng);
        }
        let rank = self.zipf.sample(rng) as usize;
        self.topics[rank.clamp(1, self.topics.len()) - 1].clone()
    }
}

struct SimAgent {
    id: AgentId,
    kind: StrategyKind,
    params: StrategyParams,
    evolver: Evolver,
    gene: Gene,
    gene_published: bool,
    published: u64,
    template: Vec<String>,
}

/// Integer part always, fractional part with that probability.
fn occurrences(rate: f64, rng: &mut ChaCha8Rng) -> u64 {
    let whole = rate.floor();
    whole as u64 + u64::from(rng.random_bool(rate - whole))
}

fn random_words(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|_| format!("w{}", rng.random_range(0..1_000_000u32))).collect::<Vec<_>>().join(" ")
}

/// A change for `signature`: a test that requires the task's module, plus
/// the module itself unless the attempt is a failing one.
fn make_patch(signature: &str, lines: usize, fail: bool) -> Patch {
    let slug = format!("m{}", &hash_asset(signature.as_bytes()).as_str()[..12]);
    let test = format!("require('../src/{slug}'); process.exit(0)\n");
    let body: String = (0..lines).map(|i| format!("exports.step{i} = () => {i};\n")).collect();
    let module = if fail { format!("src/{slug}_wip.js") } else { format!("src/{slug}.js") };
    Patch::default().write("test/run.js", test).write(module, body)
}

fn project() -> WorkingState {
    WorkingState::new()
        .with_file("package.json", r#"{"scripts":{"test":"node test/run.js"}}"#)
        .with_file("test/run.js", "process.exit(0)\n")
}

struct Sim<'a> {
    config: &'a SimConfig,
    hub: Hub,
    rng: ChaCha8Rng,
    agents: Vec<SimAgent>,
    demand: Demand,
    trace: Vec<TraceEvent>,
    executor: MockExecutor,
    posted: Vec<(BountyId, usize, u32)>,
    tick: u32,
}

impl Sim<'_> {
    fn now(&self) -> DateTime<Utc> {
        self.hub.clock()
    }

    fn log(&mut self, agent: usize, action: Action) {
        let agent = Some(self.agents[agent].id.clone());
        self.trace.push(TraceEvent { tick: self.tick, agent, action });
    }

    fn publish(&mut self, idx: usize, asset: Asset) -> Result<Option<AssetId>, SimError> {
        let id = self.agents[idx].id.clone();
        match self.hub.publish(&id, asset) {
            Ok(r) => {
                let kind = self.hub.record(&r.asset_id).map_or(AssetKind::Capsule, |rec| rec.kind);
                self.log(idx, Action::Published { asset: r.asset_id.clone(), kind, gdi: r.gdi });
                Ok(Some(r.asset_id))
            }
            Err(e @ (HubError::DuplicateAsset { .. } | HubError::InsufficientCredits { .. })) => {
                self.log(idx, Action::Rejected { code: e.code().to_string() });
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    }

    fn ensure_gene(&mut self, idx: usize) -> Result<(), SimError> {
        if !self.agents[idx].gene_published {
            let gene = self.agents[idx].gene.clone();
            if self.publish(idx, Asset::Gene(gene))?.is_some() {
                self.agents[idx].gene_published = true;
            }
        }
        Ok(())
    }

    /// Work one task through the retrieval cascade. Returns the id of a
    /// newly published capsule, if any.
    fn solve(&mut self, idx: usize, sig: &str, consult_hub: bool, share: bool) -> Result<Option<AssetId>, SimError> {
        let fail = self.rng.random_bool(self.agents[idx].params.failure_rate);
        let lines = self.rng.random_range(3..40usize);
        let content = random_words(&mut self.rng, 12);
        let summary_words = self.rng.random_range(3..20usize);
        let summary = format!("fix {}", random_words(&mut self.rng, summary_words));

        let agent = &mut self.agents[idx];
        let retrieved = if consult_hub {
            match agent.evolver.retrieve(sig, Some(&mut self.hub)) {
                Err(EvolverError::Hub(HubError::InsufficientCredits { .. })) => agent.evolver.retrieve(sig, None::<&mut Hub>)?,
                other => other?,
            }
        } else {
            agent.evolver.retrieve(sig, None::<&mut Hub>)?
        };
        let patch = make_patch(sig, lines, fail);
        let (capsule, genes) = match retrieved.source {
            Source::Hub => {
                let gene = Gene { validations: retrieved.validations.clone(), author: agent.id.clone(), ..Gene::default() };
                (retrieved.capsule.clone(), vec![gene])
            }
            Source::Local => (retrieved.capsule.clone(), vec![agent.gene.clone()]),
            Source::Generated => {
                let capsule = Capsule { content, summary, ..retrieved.capsule.clone() };
                (capsule, vec![agent.gene.clone()])
            }
        };
        let now = self.hub.clock();
        let app = agent.evolver.apply_with_validation(&capsule, &patch, &genes, &self.executor, now)?;
        let id = agent.id.clone();
        match (retrieved.source, app) {
            (Source::Hub, app) => {
                let success = matches!(app, Application::Committed { .. });
                let asset = retrieved.hub_id.expect("hub results carry an id");
                let receipt = self.hub.report_reuse(&id, &asset, success, &retrieved.validations)?;
                if self.rng.random_bool(0.5) {
                    let direction = if success { VoteDirection::Up } else { VoteDirection::Down };
                    match self.hub.vote(&id, &asset, direction) {
                        Ok(()) | Err(HubError::SelfVote) => {}
                        Err(e) => return Err(e.into()),
                    }
                }
                self.log(idx, Action::Reused { asset, success, reward: receipt.reward });
                Ok(None)
            }
            (_, Application::Reverted { .. }) => {
                self.log(idx, Action::Reverted);
                Ok(None)
            }
            (Source::Local, Application::Committed { .. }) => {
                self.log(idx, Action::LocalReuse);
                Ok(None)
            }
            (Source::Generated, Application::Committed { capsule, .. }) => {
                if !share {
                    self.log(idx, Action::Missed);
                    return Ok(None);
                }
                self.ensure_gene(idx)?;
                self.publish(idx, Asset::Capsule(capsule))
            }
        }
    }

    fn farm(&mut self, idx: usize) -> Result<(), SimError> {
        self.ensure_gene(idx)?;
        let agent = &mut self.agents[idx];
        let n = agent.published;
        agent.published += 1;
        // Every third word is replaced, starting with the first and ending with
        // the last, so no shingle survives from the template or spans into the
        // summary.
        let words: Vec<String> = agent
            .template
            .iter()
            .enumerate()
            .map(|(i, w)| if i % 3 == 0 { format!("v{}", self.rng.random_range(0..1_000_000u32)) } else { w.clone() })
            .collect();
        let capsule = Capsule {
            content: words.join(" "),
            trigger_text: format!("farm{idx}q{n} boost{idx}q{n}"),
            signals: s_opt(),
            parent_genes: vec![agent.gene.id()],
            summary: format!("optimized asset {n}"),
            author: agent.id.clone(),
        };
        self.publish(idx, Asset::Capsule(capsule))?;
        Ok(())
    }

    fn post_bounty(&mut self, idx: usize) -> Result<(), SimError> {
        let amount = self.config.bounty_amount;
        let id = self.agents[idx].id.clone();
        if self.hub.balance(&id) < amount {
            return Ok(());
        }
        let title = self.demand.unique(&mut self.rng);
        let signals = key_tokens(&title).into_iter().collect();
        let expires = self.now() + Duration::hours(i64::from(self.config.bounty_ttl));
        let bounty = self.hub.post_bounty(&id, &title, signals, amount, expires)?;
        self.posted.push((bounty.clone(), idx, self.tick));
        self.log(idx, Action::BountyPosted { bounty });
        Ok(())
    }

    fn hunt(&mut self, idx: usize) -> Result<(), SimError> {
        let me = self.agents[idx].id.clone();
        let now = self.now();
        let open: Vec<(BountyId, String)> = self
            .hub
            .bounties()
            .iter()
            .filter(|b| b.status.is_live() && b.poster != me && b.expires_at > now)
            .filter(|b| b.submissions.iter().all(|s| s.submitter != me))
            .map(|b| (b.id.clone(), b.title.clone()))
            .collect();
        let Some((bounty, title)) = open.choose(&mut self.rng).cloned() else {
            return Ok(());
        };
        if let Some(asset) = self.solve(idx, &title, false, true)? {
            self.hub.submit(&bounty, &me, &asset)?;
            self.log(idx, Action::Submitted { bounty, asset });
        }
        Ok(())
    }

    fn resolve_due(&mut self) -> Result<(), SimError> {
        let mut keep = Vec::new();
        for (bounty, poster, posted_at) in std::mem::take(&mut self.posted) {
            let Some(b) = self.hub.bounty(&bounty) else { continue };
            if !b.status.is_live() {
                continue;
            }
            if b.submissions.is_empty() || self.tick - posted_at < self.config.bounty_resolve_after {
                keep.push((bounty, poster, posted_at));
                continue;
            }
            let r = self.hub.resolve_bounty(&bounty, &KeywordOverlap)?;
            self.log(poster, Action::BountyResolved { bounty, winner: r.winner, payout: r.payout });
        }
        self.posted = keep;
        Ok(())
    }

    fn act(&mut self, idx: usize) -> Result<(), SimError> {
        let (kind, params) = (self.agents[idx].kind, self.agents[idx].params);
        match kind {
            StrategyKind::Honest | StrategyKind::MetadataForger | StrategyKind::BountyHunter => {
                for _ in 0..occurrences(params.publication_rate, &mut self.rng) {
                    let sig = self.demand.draw(&mut self.rng);
                    let consult = self.rng.random_bool(params.fetch_propensity);
                    self.solve(idx, &sig, consult, true)?;
                }
                if self.rng.random_bool(params.bounty_participation) {
                    if kind == StrategyKind::BountyHunter {
                        self.hunt(idx)?;
                    } else {
                        self.post_bounty(idx)?;
                    }
                }
            }
            StrategyKind::CreditFarmer => {
                let rate = params.publication_rate * f64::from(self.config.farming_multiplier);
                for _ in 0..occurrences(rate, &mut self.rng) {
                    self.farm(idx)?;
                }
            }
            StrategyKind::Reuser => {
                if self.rng.random_bool(params.fetch_propensity) {
                    let sig = self.demand.draw(&mut self.rng);
                    self.solve(idx, &sig, true, false)?;
                }
            }
        }
        Ok(())
    }
}

/// Run one scenario to completion.
pub fn run_scenario(config: &SimConfig) -> Result<SimOutcome, SimError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut hub = Hub::new(config.hub.clone());
    let demand = Demand::new(&config.demand, &mut rng)?;
    let mut agents = Vec::with_capacity(config.mix.total());
    for kind in StrategyKind::ALL {
        let params = *config.strategies.get(kind);
        for i in 0..config.mix.count(kind) {
            let id = hub.register_agent(&format!("{}-{i}", kind.name()))?;
            let signal_policy = match params.signals {
                SignalMode::Measured => SignalPolicy::Measured,
                SignalMode::ForgedOptimal => SignalPolicy::Forged(s_opt()),
            };
            let evolver_config = EvolverConfig {
                sharing: kind != StrategyKind::Reuser,
                signal_policy,
                ..EvolverConfig::default()
            };
            let validations = if kind == StrategyKind::CreditFarmer { vec!["echo ok".to_string()] } else { vec!["npm test".to_string()] };
            let gene = Gene {
                preconditions: vec!["node project with npm scripts".into()],
                validations,
                summary: format!("validation suite of {} {i}", kind.name()),
                author: id.clone(),
                ..Gene::default()
            };
            agents.push(SimAgent {
                evolver: Evolver::new(id.clone(), evolver_config).with_working_state(project()),
                id,
                kind,
                params,
                gene,
                gene_published: false,
                published: 0,
                template: random_words(&mut rng, 25).split(' ').map(str::to_string).collect(),
            });
        }
    }

    let epoch = hub.clock();
    let mut sim = Sim {
        config,
        hub,
        rng,
        agents,
        demand,
        trace: Vec::new(),
        executor: MockExecutor::new(),
        posted: Vec::new(),
        tick: 0,
    };
    let mut checks = 0;
    for tick in 0..config.ticks {
        sim.tick = tick;
        sim.hub.advance_clock(epoch + Duration::hours(i64::from(tick)));
        let mut order: Vec<usize> = (0..sim.agents.len()).collect();
        order.shuffle(&mut sim.rng);
        for idx in order {
            sim.act(idx)?;
        }
        sim.resolve_due()?;
        let report = sim.hub.recompute_and_promote(epoch + Duration::hours(i64::from(tick) + 1));
        sim.trace.push(TraceEvent {
            tick,
            agent: None,
            action: Action::Recompute {
                promoted: report.promoted.len(),
                demoted: report.demoted.len(),
                expired: report.expired_bounties.len(),
            },
        });
        sim.hub.check_conservation().map_err(|reason| SimError::ConservationViolated { tick, reason })?;
        checks += 1;
    }

    let strategies: BTreeMap<AgentId, StrategyKind> = sim.agents.iter().map(|a| (a.id.clone(), a.kind)).collect();
    let metrics = metrics(config, &sim.hub, &strategies);
    Ok(SimOutcome { metrics, trace: sim.trace, conservation_checks: checks, hub: sim.hub, strategies })
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Call and promotion ratios cover every asset; score means cover capsules.
fn metrics(config: &SimConfig, hub: &Hub, strategies: &BTreeMap<AgentId, StrategyKind>) -> SimMetrics {
    let records = hub.records();
    let capsules = || records.iter().filter(|r| r.kind == AssetKind::Capsule);
    let balances: Vec<f64> = strategies.keys().map(|a| hub.balance(a) as f64).collect();
    let bounties = hub.bounties();
    let per_strategy = StrategyKind::ALL
        .iter()
        .filter(|&&k| config.mix.count(k) > 0)
        .map(|&kind| {
            let own = || capsules().filter(move |r| strategies.get(&r.author) == Some(&kind));
            let members = strategies.iter().filter(|(_, k)| **k == kind);
            let stats = StrategyStats {
                agents: config.mix.count(kind),
                assets: records.iter().filter(|r| strategies.get(&r.author) == Some(&kind)).count(),
                mean_gdi: mean(own().map(|r| r.gdi)),
                mean_intrinsic: mean(own().map(|r| r.components.intrinsic)),
                mean_balance: mean(members.map(|(a, _)| hub.balance(a) as f64)),
            };
            (kind, stats)
        })
        .collect();
    SimMetrics {
        ticks: config.ticks,
        assets: records.len(),
        never_called_fraction: ratio(records.iter().filter(|r| r.counters.call_count == 0).count(), records.len()),
        promotion_rate: ratio(records.iter().filter(|r| r.promotion_rewarded).count(), records.len()),
        top_decile_credit_share: if balances.is_empty() { 0.0 } else { super::top_share(&balances, 0.1).unwrap_or(0.0) },
        gini: super::gini(&balances).unwrap_or(0.0),
        bounties_posted: bounties.len(),
        bounty_resolution_rate: ratio(bounties.iter().filter(|b| b.status == BountyStatus::Settled).count(), bounties.len()),
        mean_intrinsic: mean(capsules().map(|r| r.components.intrinsic)),
        per_strategy,
    }
}
