use chrono::Duration;
use proptest::prelude::*;

use super::*;
use crate::gep::{Capsule, Gene};
use crate::scoring::GdiComponents;

fn signals(c: f64, s: u64, f: u64, l: u64, t: u64, len: u64) -> IntrinsicSignals {
    IntrinsicSignals::new(c, s, f, l, t, len, 50.0).unwrap()
}

fn opt() -> IntrinsicSignals {
    signals(0.99, 10, 1, 5, 5, 200)
}

fn worst() -> IntrinsicSignals {
    signals(0.10, 0, 8, 300, 1, 50)
}

fn capsule(author: &AgentId, seed: u32, trigger: &str, sig: IntrinsicSignals) -> Asset {
    Asset::Capsule(Capsule {
        content: format!("patch {seed}: rewrite handler {seed} to retry with jitter and bounded attempts ({seed})"),
        trigger_text: trigger.to_string(),
        signals: sig,
        parent_genes: vec![],
        summary: format!("fix number {seed}"),
        author: author.clone(),
    })
}

/// Weights that make the composite equal to `100 * I`.
fn intrinsic_only() -> HubConfig {
    HubConfig {
        weights: GdiWeights { intrinsic: 1.0, usage: 0.0, social: 0.0, freshness: 0.0, intercept: 0.0 },
        promotion_threshold: 0.0,
        ..HubConfig::default()
    }
}

fn later(hub: &Hub, minutes: i64) -> DateTime<Utc> {
    hub.clock() + Duration::minutes(minutes)
}

#[test]
fn registration_endowment() {
    let mut hub = Hub::default();
    let a = hub.register_agent("a").unwrap();
    let b = hub.register_agent("a").unwrap();
    assert_ne!(a, b);
    assert_eq!(hub.balance(&a), 200);
    assert_eq!(hub.agent(&a).unwrap().reputation(), 50.0);
    assert!(matches!(hub.register_agent("  "), Err(HubError::InvalidRequest { .. })));
}

#[test]
fn duplicate_publication_is_free_and_rejected() {
    let mut hub = Hub::default();
    let a = hub.register_agent("a").unwrap();
    let asset = capsule(&a, 1, "TypeError x", opt());
    let receipt = hub.publish(&a, asset.clone()).unwrap();
    assert_eq!(receipt.status, AssetStatus::Candidate);
    assert!((receipt.intrinsic - 0.914_166_666_666_666_6).abs() < 1e-12);
    assert_eq!(hub.balance(&a), 198);

    let err = hub.publish(&a, asset).unwrap_err();
    assert_eq!(err, HubError::DuplicateAsset { existing: receipt.asset_id.clone(), similarity: 1.0 });

    // Same body text with a different trigger is still a near-duplicate.
    let Asset::Capsule(mut c) = capsule(&a, 1, "other trigger", opt()) else { unreachable!() };
    c.trigger_text = "other".into();
    assert!(matches!(hub.publish(&a, Asset::Capsule(c)), Err(HubError::DuplicateAsset { .. })));
    assert_eq!(hub.balance(&a), 198);
    assert_eq!(hub.records().len(), 1);
}

#[test]
fn publish_without_funds_stores_nothing() {
    let mut hub = Hub::new(HubConfig { publish_fee: 201, ..HubConfig::default() });
    let a = hub.register_agent("a").unwrap();
    let err = hub.publish(&a, capsule(&a, 1, "t", opt())).unwrap_err();
    assert!(matches!(err, HubError::InsufficientCredits { balance: 200, required: 201, .. }));
    assert!(hub.records().is_empty());
    assert_eq!(hub.balance(&a), 200);
}

#[test]
fn publisher_reputation_replaces_claimed_reputation() {
    let mut hub = Hub::default();
    let a = hub.register_agent("a").unwrap();
    let claimed = opt().with_reputation(100.0).unwrap();
    let r = hub.publish(&a, capsule(&a, 1, "t", claimed)).unwrap();
    assert!((r.intrinsic - 0.914_166_666_666_666_6).abs() < 1e-12);
}

#[test]
fn unknown_author_and_foreign_author_are_rejected() {
    let mut hub = Hub::default();
    let a = hub.register_agent("a").unwrap();
    let ghost = AgentId::new("ghost");
    assert!(matches!(hub.publish(&ghost, capsule(&ghost, 1, "t", opt())), Err(HubError::UnknownAgent { .. })));
    assert!(matches!(hub.publish(&a, capsule(&ghost, 1, "t", opt())), Err(HubError::InvalidRequest { .. })));
    assert!(matches!(hub.publish(&a, capsule(&a, 1, "  ", opt())), Err(HubError::InvalidRequest { .. })));
}

#[test]
fn recompute_promotes_over_threshold_only() {
    let mut hub = Hub::default();
    let a = hub.register_agent("a").unwrap();
    let good = hub.publish(&a, capsule(&a, 1, "t one", opt())).unwrap().asset_id;
    let bad = hub.publish(&a, capsule(&a, 2, "t two", worst())).unwrap().asset_id;
    let report = hub.recompute_and_promote(hub.clock());
    assert_eq!(report.promoted, vec![good.clone()]);
    assert!((hub.record(&good).unwrap().gdi - 46.995_833_333_333_33).abs() < 1e-9);
    assert!((hub.record(&bad).unwrap().gdi - 21.125).abs() < 1e-9);
    assert_eq!(hub.record(&bad).unwrap().status, AssetStatus::Candidate);
    assert_eq!(hub.balance(&a), 200 - 4 + 20);
}

#[test]
fn idle_promoted_asset_goes_stale_and_recovers_without_second_reward() {
    let mut hub = Hub::default();
    let a = hub.register_agent("a").unwrap();
    let reader = hub.register_agent("r").unwrap();
    // Terms 0.4 + 0 + 1 + 0.4 + 0.1 + 0.5 = 2.4, so I = 0.40.
    let id = hub.publish(&a, capsule(&a, 1, "t", signals(0.4, 0, 0, 0, 2, 20))).unwrap().asset_id;
    let start = hub.clock();
    hub.recompute_and_promote(start);
    assert_eq!(hub.record(&id).unwrap().status, AssetStatus::Promoted);

    let report = hub.recompute_and_promote(start + Duration::days(14));
    assert_eq!(report.demoted, vec![id.clone()]);
    let rec = hub.record(&id).unwrap();
    assert_eq!(rec.status, AssetStatus::Stale);
    assert!((rec.gdi - 24.854_519_280_802_833).abs() < 1e-6, "{}", rec.gdi);

    hub.report_reuse(&reader, &id, true, &[]).unwrap();
    let report = hub.recompute_and_promote(hub.clock());
    assert_eq!(report.promoted, vec![id.clone()]);
    let promotions = hub.ledger().entries_for(&a).filter(|e| e.reason == Reason::Promotion).count();
    assert_eq!(promotions, 1);
}

#[test]
fn fetch_pays_authors_by_tier() {
    let mut hub = Hub::new(intrinsic_only());
    let author = hub.register_agent("author").unwrap();
    let caller = hub.register_agent("caller").unwrap();
    // (confidence, streak, files, lines, triggers, summary) giving 100*I = target.
    let cases = [
        (20.0, signals(0.7, 0, 1, 1000, 0, 0), 0),
        (30.0, signals(0.3, 10, 1, 1000, 0, 0), 2),
        (45.0, signals(0.2, 10, 0, 0, 0, 0), 5),
        (70.0, signals(0.7, 10, 0, 0, 5, 0), 8),
        (85.0, signals(0.6, 10, 0, 0, 5, 200), 12),
    ];
    let mut ids = Vec::new();
    for (i, (_, sig, _)) in cases.iter().enumerate() {
        let trigger = format!("errsig_{i}");
        ids.push(hub.publish(&author, capsule(&author, i as u32, &trigger, *sig)).unwrap().asset_id);
    }
    hub.recompute_and_promote(hub.clock());
    for (i, (gdi, _, reward)) in cases.iter().enumerate() {
        assert_eq!(hub.record(&ids[i]).unwrap().gdi, *gdi);
        let before = hub.balance(&author);
        let caller_before = hub.balance(&caller);
        let hits = hub.fetch(&caller, &format!("errsig_{i}"), None).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].asset_id, ids[i]);
        assert_eq!(hub.balance(&author) - before, *reward, "gdi {gdi}");
        assert_eq!(caller_before - hub.balance(&caller), 1);
        assert_eq!(hub.record(&ids[i]).unwrap().counters.call_count, 1);
    }
}

#[test]
fn empty_hub_fetch_still_charges() {
    let mut hub = Hub::default();
    let a = hub.register_agent("a").unwrap();
    assert!(hub.fetch(&a, "anything", None).unwrap().is_empty());
    assert_eq!(hub.balance(&a), 199);
}

#[test]
fn fetch_ranks_and_hides_non_promoted() {
    let mut hub = Hub::new(intrinsic_only());
    let a = hub.register_agent("a").unwrap();
    let c = hub.register_agent("c").unwrap();
    let low = hub.publish(&a, capsule(&a, 1, "timeout in fetch", signals(0.3, 10, 1, 1000, 0, 0))).unwrap().asset_id;
    let high = hub.publish(&a, capsule(&a, 2, "timeout in fetch", opt())).unwrap().asset_id;
    let partial = hub.publish(&a, capsule(&a, 3, "timeout in fetch retry", opt())).unwrap().asset_id;
    let hidden = hub.publish(&a, capsule(&a, 4, "timeout in fetch", opt())).unwrap().asset_id;
    hub.recompute_and_promote(hub.clock());
    hub.set_status(&hidden, AssetStatus::Flagged).unwrap();
    let hits: Vec<_> = hub.fetch(&c, "Timeout in FETCH", Some(10)).unwrap().into_iter().map(|h| h.asset_id).collect();
    assert_eq!(hits, vec![high, low, partial]);
}

#[test]
fn admin_cannot_promote_or_reopen() {
    let mut hub = Hub::default();
    let a = hub.register_agent("a").unwrap();
    let id = hub.publish(&a, capsule(&a, 1, "t", worst())).unwrap().asset_id;
    assert!(matches!(hub.set_status(&id, AssetStatus::Promoted), Err(HubError::IllegalTransition { .. })));
    hub.set_status(&id, AssetStatus::Archived).unwrap();
    assert!(matches!(hub.set_status(&id, AssetStatus::Candidate), Err(HubError::IllegalTransition { .. })));
}

fn gene(author: &AgentId, validations: &[&str]) -> Asset {
    Asset::Gene(Gene {
        preconditions: vec!["fetch timeout".into()],
        validations: validations.iter().map(|s| s.to_string()).collect(),
        summary: "retry gene".into(),
        author: author.clone(),
        ..Gene::default()
    })
}

#[test]
fn reuse_report_rewards_by_coverage() {
    let mut hub = Hub::default();
    let a = hub.register_agent("a").unwrap();
    let r = hub.register_agent("r").unwrap();
    let g = hub.publish(&a, gene(&a, &["npm test", "node check.js"])).unwrap().asset_id;
    let Asset::Capsule(mut c) = capsule(&a, 1, "t", opt()) else { unreachable!() };
    c.parent_genes = vec![g];
    let id = hub.publish(&a, Asset::Capsule(c)).unwrap().asset_id;
    assert_eq!(hub.record(&id).unwrap().validations, vec!["npm test", "node check.js"]);

    let all = vec!["npm test".to_string(), "node check.js".to_string()];
    assert_eq!(hub.report_reuse(&r, &id, true, &all).unwrap().reward, 30);
    assert_eq!(hub.report_reuse(&r, &id, true, &[]).unwrap().reward, 10);
    assert_eq!(hub.report_reuse(&r, &id, true, &all[..1]).unwrap().reward, 20);
    assert_eq!(hub.record(&id).unwrap().counters.reuse_count, 3);

    let before = hub.record(&id).unwrap().counters.clone();
    hub.advance_clock(later(&hub, 60));
    assert_eq!(hub.report_reuse(&r, &id, false, &all).unwrap().reward, 30);
    let after = &hub.record(&id).unwrap().counters;
    assert_eq!(after.reuse_count, before.reuse_count);
    assert_eq!(after.call_count, before.call_count);
    assert!(after.last_activity > before.last_activity);
    assert_eq!(hub.agent(&a).unwrap().reputation(), 75.0);
}

#[test]
fn reuse_of_asset_without_commands_pays_full() {
    let mut hub = Hub::default();
    let a = hub.register_agent("a").unwrap();
    let r = hub.register_agent("r").unwrap();
    let id = hub.publish(&a, capsule(&a, 1, "t", opt())).unwrap().asset_id;
    assert_eq!(hub.report_reuse(&r, &id, true, &[]).unwrap(), ReuseReceipt { coverage: 1.0, reward: 30 });
    let missing = AssetId::parse(&"0".repeat(64)).unwrap();
    assert!(matches!(hub.report_reuse(&r, &missing, true, &[]), Err(HubError::UnknownAsset { .. })));
}

#[test]
fn voting_rules() {
    let mut hub = Hub::default();
    let a = hub.register_agent("a").unwrap();
    let id = hub.publish(&a, capsule(&a, 1, "t", opt())).unwrap().asset_id;
    assert_eq!(hub.vote(&a, &id, VoteDirection::Up), Err(HubError::SelfVote));

    let voters: Vec<_> = (0..10).map(|i| hub.register_agent(&format!("v{i}")).unwrap()).collect();
    for v in &voters {
        hub.vote(v, &id, VoteDirection::Up).unwrap();
    }
    hub.recompute_and_promote(hub.clock());
    assert!((hub.record(&id).unwrap().components.social - 0.722_459_831_233_383_4).abs() < 1e-9);

    hub.vote(&voters[0], &id, VoteDirection::Down).unwrap();
    let c = &hub.record(&id).unwrap().counters;
    assert_eq!((c.upvotes, c.downvotes), (9, 1));
}

#[test]
fn bounty_escrow_and_degenerate_postings() {
    let mut hub = Hub::default();
    let p = hub.register_agent("p").unwrap();
    let deadline = later(&hub, 600);
    let b = hub.post_bounty(&p, "fix it", vec!["timeout".into()], 80, deadline).unwrap();
    assert_eq!(hub.balance(&p), 120);
    assert_eq!(hub.bounty(&b).unwrap().status, BountyStatus::Open);

    let entries = hub.ledger().entries().len();
    let free = hub.post_bounty(&p, "free", vec![], 0, deadline).unwrap();
    assert_eq!(hub.bounty(&free).unwrap().status, BountyStatus::Open);
    assert_eq!(hub.ledger().entries().len(), entries);

    let past = hub.post_bounty(&p, "late", vec![], 50, hub.clock() - Duration::hours(1)).unwrap();
    assert_eq!(hub.bounty(&past).unwrap().status, BountyStatus::Expired);
    assert_eq!(hub.balance(&p), 120);

    assert!(matches!(
        hub.post_bounty(&p, "too much", vec![], 121, deadline),
        Err(HubError::InsufficientCredits { .. })
    ));
    hub.check_conservation().unwrap();
}

struct Flat;
impl Evaluator for Flat {
    fn evaluate(&self, _: &Bounty, _: &AssetRecord) -> f64 {
        0.5
    }
}

#[test]
fn bounty_goes_to_higher_gdi() {
    let mut hub = Hub::new(intrinsic_only());
    let p = hub.register_agent("p").unwrap();
    let s1 = hub.register_agent("s1").unwrap();
    let s2 = hub.register_agent("s2").unwrap();
    // 100 * I = 38.7 and 35.5.
    let hi = hub.publish(&s1, capsule(&s1, 1, "t", signals(0.822, 10, 1, 1000, 0, 0))).unwrap().asset_id;
    let lo = hub.publish(&s2, capsule(&s2, 2, "t", signals(0.63, 10, 1, 1000, 0, 0))).unwrap().asset_id;
    hub.recompute_and_promote(hub.clock());
    assert!((hub.record(&hi).unwrap().gdi - 38.7).abs() < 1e-9);
    assert!((hub.record(&lo).unwrap().gdi - 35.5).abs() < 1e-9);

    let b = hub.post_bounty(&p, "x", vec!["x".into()], 80, later(&hub, 600)).unwrap();
    hub.submit(&b, &s2, &lo).unwrap();
    hub.advance_clock(later(&hub, 1));
    hub.submit(&b, &s1, &hi).unwrap();
    let before = hub.balance(&s1);
    let res = hub.resolve_bounty(&b, &Flat).unwrap();
    assert_eq!(res.winner, s1);
    assert_eq!(hub.balance(&s1) - before, 80);
    let bounty = hub.bounty(&b).unwrap();
    assert_eq!(bounty.status, BountyStatus::Settled);
    assert_eq!(bounty.submissions[0].status, SubmissionStatus::RunnerUp);
    assert_eq!(bounty.submissions[1].status, SubmissionStatus::Accepted);
    assert_eq!(hub.resolve_bounty(&b, &Flat), Err(HubError::AlreadySettled));
    hub.check_conservation().unwrap();
}

#[test]
fn bounty_single_submission_and_ties() {
    let mut hub = Hub::default();
    let p = hub.register_agent("p").unwrap();
    let s = hub.register_agent("s").unwrap();
    let first = hub.publish(&s, capsule(&s, 1, "t", worst())).unwrap().asset_id;
    let second = hub.publish(&s, capsule(&s, 2, "t", worst())).unwrap().asset_id;

    let lone = hub.post_bounty(&p, "x", vec![], 10, later(&hub, 600)).unwrap();
    assert_eq!(hub.resolve_bounty(&lone, &KeywordOverlap), Err(HubError::NoSubmissions));
    hub.submit(&lone, &s, &first).unwrap();
    assert_eq!(hub.resolve_bounty(&lone, &KeywordOverlap).unwrap().asset, first);

    let tied = hub.post_bounty(&p, "y", vec![], 0, later(&hub, 600)).unwrap();
    hub.submit(&tied, &s, &first).unwrap();
    hub.submit(&tied, &s, &second).unwrap();
    let res = hub.resolve_bounty(&tied, &Flat).unwrap();
    assert_eq!(res.scores[0], res.scores[1]);
    assert_eq!(res.asset, first);
    let payouts = hub.ledger().entries().iter().filter(|e| e.reason == Reason::BountyPayout).count();
    assert_eq!(payouts, 2);
    hub.check_conservation().unwrap();
}

#[test]
fn overdue_bounty_refunds_escrow() {
    let mut hub = Hub::default();
    let p = hub.register_agent("p").unwrap();
    let s = hub.register_agent("s").unwrap();
    let asset = hub.publish(&s, capsule(&s, 1, "t", worst())).unwrap().asset_id;
    let b = hub.post_bounty(&p, "x", vec![], 80, later(&hub, 60)).unwrap();
    hub.submit(&b, &s, &asset).unwrap();
    hub.advance_clock(later(&hub, 61));
    assert_eq!(hub.resolve_bounty(&b, &Flat), Err(HubError::Expired));
    assert_eq!(hub.balance(&p), 200);
    assert_eq!(hub.submit(&b, &s, &asset), Err(HubError::Expired));

    let c = hub.post_bounty(&p, "y", vec![], 30, later(&hub, 60)).unwrap();
    let report = hub.recompute_and_promote(later(&hub, 120));
    assert_eq!(report.expired_bounties, vec![c]);
    assert_eq!(hub.balance(&p), 200);
    hub.check_conservation().unwrap();
}

#[test]
fn keyword_overlap_scores_signal_coverage() {
    let mut hub = Hub::default();
    let s = hub.register_agent("s").unwrap();
    let id = hub.publish(&s, capsule(&s, 1, "TypeError fetch", opt())).unwrap().asset_id;
    let p = hub.register_agent("p").unwrap();
    let b = hub.post_bounty(&p, "x", vec!["typeerror".into(), "websocket".into()], 0, later(&hub, 60)).unwrap();
    let score = KeywordOverlap.evaluate(hub.bounty(&b).unwrap(), hub.record(&id).unwrap());
    assert_eq!(score, 0.5);
}

#[test]
fn snapshot_round_trip_rebuilds_indexes() {
    let mut hub = Hub::default();
    let a = hub.register_agent("a").unwrap();
    let asset = capsule(&a, 1, "trigger words", opt());
    hub.publish(&a, asset.clone()).unwrap();
    hub.recompute_and_promote(hub.clock());
    let json = serde_json::to_string(&hub.snapshot()).unwrap();
    let mut back = Hub::restore(serde_json::from_str(&json).unwrap());
    assert_eq!(back.snapshot(), hub.snapshot());
    assert!(matches!(back.publish(&a, asset), Err(HubError::DuplicateAsset { .. })));
    assert_eq!(back.fetch(&a, "trigger words", None).unwrap().len(), 1);
}

#[test]
fn errors_serialize_with_codes() {
    let e = HubError::InsufficientCredits { agent: AgentId::new("x"), balance: 1, required: 2 };
    let v = serde_json::to_value(&e).unwrap();
    assert_eq!(v["code"], e.code());
    assert_eq!(serde_json::from_value::<HubError>(v).unwrap(), e);
    assert_eq!(serde_json::to_value(HubError::SelfVote).unwrap()["code"], "self_vote");
}

#[derive(Debug, Clone)]
enum Op {
    Publish { agent: usize, seed: u32, conf: u8, topic: u8 },
    Fetch { agent: usize, topic: u8 },
    Reuse { agent: usize, asset: usize, success: bool },
    Vote { agent: usize, asset: usize, up: bool },
    Bounty { agent: usize, amount: u8, minutes: u16 },
    Submit { bounty: usize, agent: usize, asset: usize },
    Resolve { bounty: usize },
    Tick { minutes: u16 },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..4usize, 0..50u32, 0..=10u8, 0..4u8).prop_map(|(agent, seed, conf, topic)| Op::Publish { agent, seed, conf, topic }),
        (0..4usize, 0..4u8).prop_map(|(agent, topic)| Op::Fetch { agent, topic }),
        (0..4usize, 0..20usize, any::<bool>()).prop_map(|(agent, asset, success)| Op::Reuse { agent, asset, success }),
        (0..4usize, 0..20usize, any::<bool>()).prop_map(|(agent, asset, up)| Op::Vote { agent, asset, up }),
        (0..4usize, 0..120u8, 1..600u16).prop_map(|(agent, amount, minutes)| Op::Bounty { agent, amount, minutes }),
        (0..6usize, 0..4usize, 0..20usize).prop_map(|(bounty, agent, asset)| Op::Submit { bounty, agent, asset }),
        (0..6usize).prop_map(|bounty| Op::Resolve { bounty }),
        (1..2000u16).prop_map(|minutes| Op::Tick { minutes }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn hub_invariants_hold_under_random_operations(ops in prop::collection::vec(op(), 1..80)) {
        let mut hub = Hub::default();
        let agents: Vec<_> = (0..4).map(|i| hub.register_agent(&format!("agent{i}")).unwrap()).collect();
        let mut seen_ids = 0usize;
        for op in ops {
            let ids: Vec<AssetId> = hub.records().iter().map(|r| r.id.clone()).collect();
            let bounties: Vec<BountyId> = hub.bounties().iter().map(|b| b.id.clone()).collect();
            match op {
                Op::Publish { agent, seed, conf, topic } => {
                    let a = &agents[agent];
                    let sig = signals(conf as f64 / 10.0, seed as u64 % 12, 1, seed as u64 * 7, topic as u64, 20 * seed as u64);
                    let _ = hub.publish(a, capsule(a, seed, &format!("topic{topic}"), sig));
                }
                Op::Fetch { agent, topic } => {
                    if let Ok(hits) = hub.fetch(&agents[agent], &format!("topic{topic}"), None) {
                        for h in hits {
                            prop_assert_eq!(hub.record(&h.asset_id).unwrap().status, AssetStatus::Promoted);
                        }
                    }
                }
                Op::Reuse { agent, asset, success } => {
                    if let Some(id) = ids.get(asset) {
                        hub.report_reuse(&agents[agent], id, success, &[]).unwrap();
                    }
                }
                Op::Vote { agent, asset, up } => {
                    if let Some(id) = ids.get(asset) {
                        let dir = if up { VoteDirection::Up } else { VoteDirection::Down };
                        let _ = hub.vote(&agents[agent], id, dir);
                    }
                }
                Op::Bounty { agent, amount, minutes } => {
                    let deadline = later(&hub, minutes as i64);
                    let _ = hub.post_bounty(&agents[agent], "b", vec!["topic0".into()], amount as i64, deadline);
                }
                Op::Submit { bounty, agent, asset } => {
                    if let (Some(b), Some(id)) = (bounties.get(bounty), ids.get(asset)) {
                        let _ = hub.submit(b, &agents[agent], id);
                    }
                }
                Op::Resolve { bounty } => {
                    if let Some(b) = bounties.get(bounty) {
                        let _ = hub.resolve_bounty(b, &KeywordOverlap);
                    }
                }
                Op::Tick { minutes } => {
                    let statuses: Vec<_> = hub.records().iter().map(|r| r.status).collect();
                    hub.recompute_and_promote(later(&hub, minutes as i64));
                    for (r, before) in hub.records().iter().zip(statuses) {
                        if r.status == AssetStatus::Promoted && before != AssetStatus::Promoted {
                            prop_assert!(r.gdi >= PROMOTION_THRESHOLD);
                        }
                        prop_assert!(before == r.status || before.can_become(r.status));
                    }
                }
            }
            prop_assert!(hub.records().len() >= seen_ids);
            seen_ids = hub.records().len();
            prop_assert!(hub.check_conservation().is_ok(), "{:?}", hub.check_conservation());
            for b in hub.bounties() {
                let accepted = b.submissions.iter().filter(|s| s.status == SubmissionStatus::Accepted).count();
                prop_assert!(accepted <= 1);
                if b.status == BountyStatus::Settled {
                    prop_assert_eq!(accepted, 1);
                    let payouts = hub.ledger().entries().iter()
                        .filter(|e| e.reason == Reason::BountyPayout && e.reference.as_deref() == Some(b.id.0.as_str()))
                        .count();
                    prop_assert_eq!(payouts, 1);
                }
            }
        }
    }
}

#[test]
fn components_are_recomputed_from_counters() {
    let mut hub = Hub::default();
    let a = hub.register_agent("a").unwrap();
    let id = hub.publish(&a, capsule(&a, 1, "t", opt())).unwrap().asset_id;
    let rec = hub.record(&id).unwrap();
    assert_eq!(rec.components, GdiComponents::new(rec.components.intrinsic, 0.0, 0.0, 1.0).unwrap());
}
