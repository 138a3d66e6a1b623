//! `genehub`: hub server, economy simulator, validation audit, scoring and
//! dataset tools behind one command.

mod analysis;
mod data;
mod remote;

use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use genehub_core::hub::HubConfig;
use genehub_core::scoring::GdiWeights;
use genehub_server::ServerConfig;

#[derive(Parser)]
#[command(name = "genehub", version, about = "Agent asset hub: serve, simulate, audit, score and replay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the hub HTTP service until interrupted.
    Serve(ServeArgs),
    /// Run a seeded economy scenario.
    Simulate(analysis::SimulateArgs),
    /// Validation audit tools.
    #[command(subcommand)]
    Audit(analysis::AuditCommand),
    /// Intrinsic score and composite GDI for one set of signals.
    Score(analysis::ScoreArgs),
    /// Least-squares refit of the composite weights.
    Refit(analysis::RefitArgs),
    /// Load a dataset directory and compare stored scores with the formula.
    Import(data::ImportArgs),
    /// Write report tables or dataset files.
    Export(data::ExportArgs),
    /// Generate a seeded schema-conformant asset dataset.
    Synth(data::SynthArgs),
    /// Talk to a running hub.
    Hub(remote::HubArgs),
}

/// Hub parameters shared by every command that builds a hub.
#[derive(Args, Clone)]
pub struct HubOptions {
    /// `official`, `refitted`, or a TOML weights file.
    #[arg(long, default_value = "official")]
    pub weights: String,
    #[arg(long)]
    pub publish_fee: Option<i64>,
    #[arg(long)]
    pub fetch_fee: Option<i64>,
    #[arg(long)]
    pub promotion_threshold: Option<f64>,
}

impl HubOptions {
    pub fn apply(&self, mut config: HubConfig) -> Result<HubConfig> {
        config.weights = parse_weights(&self.weights)?;
        if let Some(v) = self.publish_fee {
            config.publish_fee = v;
        }
        if let Some(v) = self.fetch_fee {
            config.fetch_fee = v;
        }
        if let Some(v) = self.promotion_threshold {
            config.promotion_threshold = v;
        }
        config.validate()?;
        Ok(config)
    }
}

pub fn parse_weights(spec: &str) -> Result<GdiWeights> {
    if let Some(w) = GdiWeights::preset(spec) {
        return Ok(w);
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("`{spec}` is neither a preset nor a readable file"))?;
    Ok(GdiWeights::from_toml_str(&text)?)
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "GENEHUB_HOST", default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    #[arg(long, env = "GENEHUB_PORT", default_value_t = 7878)]
    port: u16,
    /// Directory for the hub snapshot; restored at start, written on shutdown.
    #[arg(long, env = "GENEHUB_DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[command(flatten)]
    hub: HubOptions,
}

async fn shutdown_signal() {
    if let Err(e) = tokio::signal::ctrl_c().await {
        tracing::error!("cannot listen for interrupt: {e}");
        std::future::pending::<()>().await;
    }
    tracing::info!("shutting down");
}

fn serve(args: ServeArgs) -> Result<()> {
    let config = ServerConfig {
        addr: SocketAddr::new(args.host, args.port),
        hub: args.hub.apply(HubConfig::default())?,
        data_dir: args.data_dir,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(genehub_server::serve(config, shutdown_signal()))?;
    Ok(())
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Serve(a) => serve(a),
        Command::Simulate(a) => analysis::simulate(a),
        Command::Audit(c) => analysis::audit(c),
        Command::Score(a) => analysis::score(a),
        Command::Refit(a) => analysis::refit(a),
        Command::Import(a) => data::import(a),
        Command::Export(a) => data::export(a),
        Command::Synth(a) => data::synth(a),
        Command::Hub(a) => remote::run(a),
    }
}

/// Print as pretty JSON.
pub fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}
