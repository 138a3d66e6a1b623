//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so every line is printed whether or not
//! output capture is on. Exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::{DateTime, TimeZone, Utc};
use genehub_client::HubClient;
use genehub_core::audit::forgery::{s_median, s_opt, s_worst};
use genehub_core::audit::{audit_corpus, classify_command, forge_configurations, run_forgery_study, Label, PatternCatalogue};
use genehub_core::dataset::{read_records, synthetic_assets, write_records, AssetDetail, Record, ReplayRegistry};
use genehub_core::evolver::MockExecutor;
use genehub_core::gep::{AgentId, Asset, Capsule, Gene, IntrinsicSignals};
use genehub_core::hub::{AssetStatus, Hub, HubConfig, Reason};
use genehub_core::scoring::{composite_gdi, intrinsic_score, refit_weights, synthesize_samples, GdiComponents, GdiWeights};
use genehub_core::sim::{run_scenario, SimConfig};
use genehub_server::{RunningServer, ServerConfig};

type Check = Result<String, String>;

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("{what} took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn intrinsic_oracle() -> Check {
    // Frozen from an independent evaluation of the six-term mean.
    let cases = [("s_worst", s_worst(), 0.175), ("s_median", s_median(), 0.7775), ("s_opt", s_opt(), 0.914_166_666_666_666_7)];
    for (name, signals, expected) in cases {
        let got = intrinsic_score(&signals);
        check!(close(got, expected, 1e-9), "{name}: {got} != {expected}");
    }
    Ok("0.175 / 0.7775 / 0.9141667".into())
}

fn composite_gate() -> Check {
    let gdi = |i: f64| composite_gdi(&GdiComponents::new(i, 0.0, 0.0, 1.0).unwrap(), &GdiWeights::OFFICIAL);
    let threshold = HubConfig::default().promotion_threshold;
    let low = gdi(intrinsic_score(&s_worst()));
    let high = gdi(intrinsic_score(&s_opt()));
    check!(close(low, 21.125, 1e-6) && low < threshold, "s_worst gdi {low}");
    check!(close(high, 46.995_833_333_333_33, 1e-6) && high >= threshold, "s_opt gdi {high}");
    let boundary = (0.25 - 0.15) / 0.35;
    check!(gdi(boundary - 1e-9) < threshold && gdi(boundary + 1e-9) >= threshold, "gate not at I = {boundary}");
    Ok(format!("{low:.3} rejected, {high:.3} promoted, gate at I = {boundary:.4}"))
}

fn regression_recovery() -> Check {
    let started = Instant::now();
    let truth = GdiWeights::REFITTED;
    let params = |w: &GdiWeights| [w.intrinsic, w.usage, w.social, w.freshness, w.intercept];
    let exact = refit_weights(&synthesize_samples(&truth, 1000, 0.0, 7)).map_err(|e| e.to_string())?;
    for (got, want) in params(&exact.weights).into_iter().zip(params(&truth)) {
        check!(close(got, want, 1e-6), "noise-free parameter {got} != {want}");
    }
    check!(close(exact.r_squared, 1.0, 1e-12), "noise-free R2 {}", exact.r_squared);
    let noisy = refit_weights(&synthesize_samples(&truth, 1000, 0.5, 7)).map_err(|e| e.to_string())?;
    // Tolerance on the 0-100 scale: weights contribute 100*w per unit component.
    for (got, want) in params(&noisy.weights).into_iter().zip(params(&truth)).take(4) {
        check!(close(100.0 * got, 100.0 * want, 2.0), "noisy weight {got} vs {want}");
    }
    check!(close(noisy.weights.intercept, truth.intercept, 2.0), "noisy intercept {}", noisy.weights.intercept);
    check!(noisy.r_squared > 0.99, "noisy R2 {}", noisy.r_squared);
    within(started.elapsed(), Duration::from_secs(1), "refit")?;
    Ok(format!("exact R2 = {:.12}, noisy R2 = {:.6}", exact.r_squared, noisy.r_squared))
}

fn gene(validations: &[&str]) -> Gene {
    Gene { validations: validations.iter().map(|s| s.to_string()).collect(), author: AgentId::new("a"), ..Gene::default() }
}

fn classifier_fidelity() -> Check {
    let started = Instant::now();
    let catalogue = PatternCatalogue::default();
    let labelled = [
        ("assert.equal('x','x')", Label::Trivial),
        ("assert.ok(true)", Label::Trivial),
        ("expect(1).toBe(1)", Label::Trivial),
        ("node -e \"require('assert').ok(true)\"", Label::Trivial),
        ("console.assert(true)", Label::Trivial),
        ("console.log('ok')", Label::Trivial),
        ("node -e \"console.log('done')\"", Label::Trivial),
        ("process.exit(0)", Label::Trivial),
        ("sys.exit(0)", Label::Trivial),
        ("exit 0", Label::Trivial),
        ("node --version", Label::Trivial),
        ("node -p \"1+1\"", Label::Trivial),
        ("echo \"success\"", Label::Trivial),
        ("print(\"ok\")", Label::Trivial),
        ("console.log('pytest ok')", Label::Trivial),
        ("true", Label::Trivial),
        ("npx jest --passWithNoTests", Label::Trivial),
        ("npm run lint", Label::Trivial),
        ("", Label::Trivial),
        ("npm test", Label::Pass),
        ("npx jest --ci", Label::Pass),
    ];
    for (command, want) in labelled {
        let got = classify_command(command, &catalogue).label;
        check!(got == want, "`{command}` labelled {got:?}, expected {want:?}");
    }

    let static_trivial = ["console.log('ok')", "exit 0", "assert.ok(true)", "node --version", "npm run lint", "true"];
    let sandbox_trivial = ["node -e \"require('assert')\"", "echo running suite"];
    let legit = ["npm test", "npx jest --ci", "npx mocha test/", "npm run test:unit"];
    let mut corpus = Vec::with_capacity(1000);
    corpus.extend((0..660).map(|_| gene(&[])));
    corpus.extend((0..160).map(|i| gene(&[static_trivial[i % 6], static_trivial[(i + 1) % 6]])));
    corpus.extend((0..22).map(|i| gene(&[sandbox_trivial[i % 2], "exit 0"])));
    corpus.extend((0..158).map(|i| gene(&[legit[i % 4], "console.log('ok')"])));
    let (report, _) = audit_corpus(&corpus, &catalogue, &MockExecutor::new());
    let rows = [
        (report.percent(report.no_validation), 66.0),
        (report.percent(report.trivial()), 18.2),
        (report.percent(report.trivial_static), 16.0),
        (report.percent(report.trivial_sandbox), 2.2),
        (report.percent(report.legitimate), 15.8),
    ];
    for (got, want) in rows {
        check!(close(got, want, 1e-9), "corpus row {got} != {want}");
    }
    within(started.elapsed(), Duration::from_secs(30), "audit")?;
    Ok("worked examples labelled; corpus 66.0 / 18.2 (16.0 + 2.2) / 15.8".into())
}

fn forgery_study() -> Check {
    let mut hub = Hub::new(HubConfig::default());
    let now = Utc.with_ymd_and_hms(2026, 2, 1, 0, 0, 0).unwrap();
    let rows = run_forgery_study(&mut hub, &forge_configurations(), now).map_err(|e| e.to_string())?;
    let row = |name: &str| rows.iter().find(|r| r.config == name).ok_or(format!("missing {name}"));
    let (opt, median, worst) = (row("s_opt")?, row("s_median")?, row("s_worst")?);
    check!(opt.gdi > median.gdi, "s_opt {} does not outrank s_median {}", opt.gdi, median.gdi);
    check!(!worst.promoted, "s_worst promoted");
    // Frozen from an independent evaluation of each leave-one-out configuration.
    let deltas = [("blast", -0.165_833_333), ("trigger", -0.133_333_333), ("summary", -0.125), ("streak", -0.166_666_667), ("confidence", -0.148_333_333)];
    for (term, want) in deltas {
        let got = row(&format!("s_opt\\{term}"))?.intrinsic - opt.intrinsic;
        check!(close(got, want, 1e-6), "{term} delta {got} != {want}");
    }
    hub.check_conservation()?;
    Ok(format!("s_opt {:.4} > s_median {:.4}; s_worst {:.4} held back", opt.gdi, median.gdi, worst.gdi))
}

fn economy_structure() -> Check {
    let started = Instant::now();
    let run = |k: u32| {
        let config = SimConfig { farming_multiplier: k, ..SimConfig::default() };
        run_scenario(&config).map_err(|e| e.to_string())
    };
    let base = run(1)?;
    let m = &base.metrics;
    check!(m.never_called_fraction > 0.9, "never_called {}", m.never_called_fraction);
    check!(m.top_decile_credit_share > 0.5, "top decile {}", m.top_decile_credit_share);
    check!(base.conservation_checks == 200, "conservation checked on {} ticks", base.conservation_checks);
    let again = run(1)?;
    check!(again.trace_jsonl() == base.trace_jsonl(), "traces differ between identical runs");
    let shares = [m.top_decile_credit_share, run(2)?.metrics.top_decile_credit_share, run(4)?.metrics.top_decile_credit_share];
    check!(shares[0] <= shares[1] && shares[1] <= shares[2], "top decile not monotone: {shares:?}");
    within(started.elapsed(), Duration::from_secs(30), "economy runs")?;
    Ok(format!(
        "never called {:.3}, top decile {:.3} / {:.3} / {:.3}",
        m.never_called_fraction, shares[0], shares[1], shares[2]
    ))
}

fn capsule(author: &AgentId, trigger: &str, signals: IntrinsicSignals) -> Asset {
    Asset::Capsule(Capsule {
        content: format!("handle {trigger}"),
        trigger_text: trigger.into(),
        signals,
        parent_genes: vec![],
        summary: format!("fix for {trigger}"),
        author: author.clone(),
    })
}

async fn serve(hub: HubConfig) -> Result<RunningServer, String> {
    RunningServer::start(ServerConfig { addr: "127.0.0.1:0".parse().unwrap(), hub, data_dir: None })
        .await
        .map_err(|e| e.to_string())
}

async fn protocol(epoch: DateTime<Utc>) -> Check {
    let server = serve(HubConfig { epoch, ..HubConfig::default() }).await?;
    let hub = HubClient::new(server.base_url());
    let e = |err: genehub_core::hub::HubError| err.to_string();
    let author = hub.register_agent("author").await.map_err(e)?;
    let caller = hub.register_agent("caller").await.map_err(e)?;
    check!(hub.balance(&author).await.map_err(e)? == 200, "registration grant");

    let asset = hub.publish(&author, &capsule(&author, "ECONNRESET pool exhausted", s_opt())).await.map_err(e)?.asset_id;
    check!(hub.balance(&author).await.map_err(e)? == 198, "publish fee");
    let report = hub.recompute(None).await.map_err(e)?;
    check!(report.promoted == vec![asset.clone()], "not promoted: {report:?}");
    check!(hub.asset(&asset).await.map_err(e)?.status == AssetStatus::Promoted, "status after recompute");
    check!(hub.balance(&author).await.map_err(e)? == 218, "promotion reward");

    let hits = hub.fetch(&caller, "ECONNRESET pool exhausted", None).await.map_err(e)?;
    check!(hits.len() == 1 && hits[0].asset_id == asset, "fetch hits {}", hits.len());
    check!(hub.balance(&caller).await.map_err(e)? == 199, "fetch fee");
    check!(hub.balance(&author).await.map_err(e)? == 223, "call reward at GDI {:.3}", hits[0].gdi);

    let gene_id = hub
        .publish(&author, &Asset::Gene(Gene { author: author.clone(), ..gene(&["npm test", "npx jest --ci"]) }))
        .await
        .map_err(e)?
        .asset_id;
    let reports = [
        (&asset, vec![], 30),
        (&gene_id, vec!["npm test".to_string()], 20),
        (&gene_id, vec!["npm test".to_string(), "npx jest --ci".to_string()], 30),
        (&gene_id, vec![], 10),
    ];
    let mut expected = 199;
    for (id, commands, reward) in reports {
        let receipt = hub.report_reuse(&caller, id, true, &commands).await.map_err(e)?;
        expected += reward;
        check!(receipt.reward == reward, "report reward {} != {reward}", receipt.reward);
    }
    check!(hub.balance(&caller).await.map_err(e)? == expected, "caller balance after reports");

    let ledger = hub.ledger(&author).await.map_err(e)?;
    let amounts: Vec<(Reason, i64)> = ledger.iter().map(|l| (l.reason, l.amount)).collect();
    let want = [(Reason::Registration, 200), (Reason::PublishFee, -2), (Reason::Promotion, 20), (Reason::AssetCalled, 5), (Reason::PublishFee, -2)];
    check!(amounts == want, "author ledger {amounts:?}");
    check!(hub.conservation().await.map_err(e)?.conserved, "ledger not conserved");
    server.shutdown().await.map_err(|e| e.to_string())?;

    // One hub per tier, scored by intercept alone so each GDI sits exactly on its boundary.
    for (gdi, reward) in [(20.0, 0), (30.0, 2), (45.0, 5), (70.0, 8), (85.0, 12)] {
        let weights = GdiWeights { intrinsic: 0.0, usage: 0.0, social: 0.0, freshness: 0.0, intercept: gdi };
        let server = serve(HubConfig { weights, promotion_threshold: 0.0, epoch, ..HubConfig::default() }).await?;
        let hub = HubClient::new(server.base_url());
        let author = hub.register_agent("author").await.map_err(e)?;
        let caller = hub.register_agent("caller").await.map_err(e)?;
        hub.publish(&author, &capsule(&author, "heap out of memory", s_median())).await.map_err(e)?;
        hub.recompute(None).await.map_err(e)?;
        let hits = hub.fetch(&caller, "heap out of memory", None).await.map_err(e)?;
        check!(hits.len() == 1 && hits[0].gdi == gdi, "tier {gdi}: hits {hits:?}");
        let paid = hub.balance(&author).await.map_err(e)? - 218;
        check!(paid == reward, "GDI {gdi} paid {paid}, expected {reward}");
        server.shutdown().await.map_err(|e| e.to_string())?;
    }
    Ok("register, publish, promote, fetch and report over HTTP; tiers 0/2/5/8/12".into())
}

fn protocol_round_trip() -> Check {
    let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().map_err(|e| e.to_string())?;
    runtime.block_on(protocol(Utc.with_ymd_and_hms(2026, 2, 1, 0, 0, 0).unwrap()))
}

fn persistence() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let records = synthetic_assets(500, 11);
    let mut original = Vec::new();
    write_records(&mut original, &records).map_err(|e| e.to_string())?;
    let mut registry = ReplayRegistry::new();
    registry.import_assets(original.as_slice()).map_err(|e| e.to_string())?;
    registry.export_dir(dir.path()).map_err(|e| e.to_string())?;
    let exported = std::fs::read(dir.path().join(AssetDetail::file_name())).map_err(|e| e.to_string())?;
    check!(exported == original, "export differs from import");

    let big = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = std::fs::File::create(big.path().join(AssetDetail::file_name())).map_err(|e| e.to_string())?;
    write_records(std::io::BufWriter::new(file), &synthetic_assets(100_000, 3)).map_err(|e| e.to_string())?;
    let started = Instant::now();
    let loaded = ReplayRegistry::import_dir(big.path()).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    check!(loaded.assets().len() == 100_000, "imported {}", loaded.assets().len());
    within(elapsed, Duration::from_secs(60), "100K import")?;
    let reread: Vec<AssetDetail> = read_records(exported.as_slice()).map_err(|e| e.to_string())?;
    check!(reread == records, "reread records differ");
    Ok(format!("500-record round trip byte-identical; 100K import in {elapsed:.2?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("intrinsic formula oracle", intrinsic_oracle),
        ("composite promotion gate", composite_gate),
        ("regression recovery", regression_recovery),
        ("classifier fidelity", classifier_fidelity),
        ("forgery study", forgery_study),
        ("economy structure", economy_structure),
        ("protocol round trip", protocol_round_trip),
        ("persistence", persistence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = started.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}) [{elapsed:.2?}]", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({reason}) [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
