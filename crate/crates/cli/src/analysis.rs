use std::path::PathBuf;
use std::time::Duration;

use anyhow::{Context, Result};
use chrono::{DateTime, TimeZone, Utc};
use clap::{Args, Subcommand, ValueEnum};
use genehub_client::BlockingHubClient;
use genehub_core::audit::forgery::{s_median, s_opt, s_worst};
use genehub_core::audit::{audit_corpus, forge_configurations, parse_gene_lines, run_forgery_study, CatalogueConfig, PatternCatalogue};
use genehub_core::dataset::{export_report, ReplayRegistry, ReportFormat, ReportSource};
use genehub_core::evolver::{Executor, MockExecutor, SandboxExecutor};
use genehub_core::gep::{IntrinsicSignals, DEFAULT_REPUTATION};
use genehub_core::hub::{Hub, HubConfig};
use genehub_core::scoring::{composite_gdi, intrinsic_score, intrinsic_terms, refit_weights, synthesize_samples, GdiComponents};
use genehub_core::sim::{run_scenario, SimConfig};

use crate::{parse_weights, print_json, HubOptions};

fn reference_now() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 2, 1, 0, 0, 0).unwrap()
}

#[derive(Args)]
pub struct SimulateArgs {
    /// TOML scenario file; every field is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ticks: Option<u32>,
    #[arg(long)]
    farming_multiplier: Option<u32>,
    /// Directory for metrics, trace and report tables.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => SimConfig::from_toml_str(&std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(t) = args.ticks {
        config.ticks = t;
    }
    if let Some(k) = args.farming_multiplier {
        config.farming_multiplier = k;
    }
    let outcome = run_scenario(&config)?;
    print!("{}", outcome.metrics.to_markdown());
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("metrics.json"), serde_json::to_vec_pretty(&outcome.metrics)?)?;
        std::fs::write(dir.join("trace.jsonl"), outcome.trace_jsonl())?;
        for format in [ReportFormat::Csv, ReportFormat::Markdown] {
            export_report(&ReportSource::Simulation(&outcome), format, dir)?;
        }
        eprintln!("wrote {}", dir.display());
    }
    Ok(())
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SandboxKind {
    /// Deterministic in-process interpreter of common npm/node commands.
    Mock,
    /// Real processes in an empty temporary directory with a minimal PATH.
    Process,
}

#[derive(Subcommand)]
pub enum AuditCommand {
    /// Classify every gene of a JSONL corpus.
    Corpus {
        path: PathBuf,
        /// TOML overrides for the pattern catalogue.
        #[arg(long)]
        catalogue: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "mock")]
        sandbox: SandboxKind,
        #[arg(long, default_value_t = 10)]
        timeout_secs: u64,
        /// Write per-gene verdicts as JSONL.
        #[arg(long)]
        verdicts: Option<PathBuf>,
        /// Directory for the category table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Publish the reference forgery configurations and report their scores.
    Forge {
        /// Hub URL; an in-process hub is used when absent.
        #[arg(long, env = "GENEHUB_URL")]
        hub: Option<String>,
        #[arg(long, default_value_t = reference_now())]
        now: DateTime<Utc>,
        #[arg(long)]
        json: bool,
    },
}

pub fn audit(cmd: AuditCommand) -> Result<()> {
    match cmd {
        AuditCommand::Corpus { path, catalogue, sandbox, timeout_secs, verdicts, out } => {
            let catalogue = match catalogue {
                Some(p) => CatalogueConfig::from_toml_str(&std::fs::read_to_string(&p)?)?.compile()?,
                None => PatternCatalogue::default(),
            };
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let genes = parse_gene_lines(&text)?;
            let executor: Box<dyn Executor + Sync> = match sandbox {
                SandboxKind::Mock => Box::new(MockExecutor::new()),
                SandboxKind::Process => Box::new(SandboxExecutor::new()?.with_timeout(Duration::from_secs(timeout_secs))),
            };
            let (report, per_gene) = audit_corpus(&genes, &catalogue, executor.as_ref());
            print!("{}", report.to_markdown());
            if let Some(p) = verdicts {
                let mut lines = String::new();
                for v in &per_gene {
                    lines.push_str(&serde_json::to_string(v)?);
                    lines.push('\n');
                }
                std::fs::write(p, lines)?;
            }
            if let Some(dir) = out {
                for format in [ReportFormat::Csv, ReportFormat::Markdown] {
                    export_report(&ReportSource::Audit(&report), format, &dir)?;
                }
            }
            Ok(())
        }
        AuditCommand::Forge { hub, now, json } => {
            let configs = forge_configurations();
            let rows = match hub {
                Some(url) => run_forgery_study(&mut BlockingHubClient::new(url)?, &configs, now)?,
                None => run_forgery_study(&mut Hub::new(HubConfig::default()), &configs, now)?,
            };
            if json {
                return print_json(&rows);
            }
            println!("| Configuration | Intrinsic | GDI | Promoted |\n|---|---:|---:|---|");
            for r in rows {
                println!("| {} | {:.6} | {:.4} | {} |", r.config, r.intrinsic, r.gdi, if r.promoted { "yes" } else { "no" });
            }
            Ok(())
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Reference {
    Median,
    Worst,
    Opt,
}

#[derive(Args)]
pub struct ScoreArgs {
    /// Start from a reference signal set; explicit flags override its fields.
    #[arg(long, value_enum)]
    preset: Option<Reference>,
    #[arg(long)]
    confidence: Option<f64>,
    #[arg(long)]
    streak: Option<u64>,
    #[arg(long)]
    files: Option<u64>,
    #[arg(long)]
    lines: Option<u64>,
    #[arg(long)]
    triggers: Option<u64>,
    #[arg(long)]
    summary_len: Option<u64>,
    #[arg(long)]
    reputation: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    usage: f64,
    #[arg(long, default_value_t = 0.0)]
    social: f64,
    #[arg(long, default_value_t = 1.0)]
    freshness: f64,
    #[command(flatten)]
    hub: HubOptions,
    #[arg(long)]
    json: bool,
}

#[derive(serde::Serialize)]
struct ScoreOutput {
    signals: IntrinsicSignals,
    terms: [f64; 6],
    intrinsic: f64,
    components: GdiComponents,
    gdi: f64,
    promoted: bool,
}

pub fn score(a: ScoreArgs) -> Result<()> {
    let base = match a.preset {
        Some(Reference::Median) => s_median(),
        Some(Reference::Worst) => s_worst(),
        Some(Reference::Opt) => s_opt(),
        None => IntrinsicSignals::new(0.0, 0, 0, 0, 0, 0, DEFAULT_REPUTATION)?,
    };
    let signals = IntrinsicSignals::new(
        a.confidence.unwrap_or(base.confidence),
        a.streak.unwrap_or(base.success_streak),
        a.files.unwrap_or(base.files_modified),
        a.lines.unwrap_or(base.lines_modified),
        a.triggers.unwrap_or(base.trigger_count),
        a.summary_len.unwrap_or(base.summary_length),
        a.reputation.unwrap_or(base.reputation),
    )?;
    let config = a.hub.apply(HubConfig::default())?;
    let intrinsic = intrinsic_score(&signals);
    let components = GdiComponents::new(intrinsic, a.usage, a.social, a.freshness)?;
    let gdi = composite_gdi(&components, &config.weights);
    let out = ScoreOutput {
        signals,
        terms: intrinsic_terms(&signals),
        intrinsic,
        components,
        gdi,
        promoted: gdi >= config.promotion_threshold,
    };
    if a.json {
        return print_json(&out);
    }
    println!("intrinsic  {:.10}", out.intrinsic);
    println!("gdi        {:.6}", out.gdi);
    println!("promoted   {}", if out.promoted { "yes" } else { "no" });
    Ok(())
}

#[derive(Args)]
pub struct RefitArgs {
    /// Dataset directory whose stored scores are regressed on their components.
    #[arg(long, conflicts_with = "synthetic")]
    dataset: Option<PathBuf>,
    /// Number of synthetic samples drawn from `--truth` weights.
    #[arg(long)]
    synthetic: Option<usize>,
    #[arg(long, default_value = "refitted")]
    truth: String,
    /// Standard deviation of Gaussian noise on the 0-100 scale.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn refit(a: RefitArgs) -> Result<()> {
    let samples = match (&a.dataset, a.synthetic) {
        (Some(dir), _) => ReplayRegistry::import_dir(dir)?.refit_samples(),
        (None, Some(n)) => synthesize_samples(&parse_weights(&a.truth)?, n, a.noise, a.seed),
        (None, None) => anyhow::bail!("pass --dataset <dir> or --synthetic <n>"),
    };
    let fit = refit_weights(&samples)?;
    println!("samples    {}", samples.len());
    println!(
        "weights    intrinsic={:.6} usage={:.6} social={:.6} freshness={:.6} intercept={:.6}",
        fit.weights.intrinsic, fit.weights.usage, fit.weights.social, fit.weights.freshness, fit.weights.intercept
    );
    println!("r_squared  {:.10}", fit.r_squared);
    Ok(())
}
