use std::path::PathBuf;

use anyhow::{Context, Result};
use chrono::{DateTime, Utc};
use clap::{Args, Subcommand, ValueEnum};
use genehub_client::HubClient;
use genehub_core::gep::{AgentId, Asset, AssetId};
use genehub_core::hub::{BountyId, VoteDirection};

use crate::print_json;

#[derive(Args)]
pub struct HubArgs {
    #[arg(long, env = "GENEHUB_URL", default_value = "http://127.0.0.1:7878")]
    url: String,
    #[command(subcommand)]
    command: HubCommand,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Up,
    Down,
}

#[derive(Subcommand)]
enum HubCommand {
    Health,
    Register { name: String },
    Balance { agent: String },
    Ledger { agent: String },
    /// Publish an asset read from a JSON file (`-` for stdin).
    Publish {
        #[arg(long)]
        author: String,
        file: PathBuf,
    },
    Assets,
    Asset { id: String },
    Fetch {
        #[arg(long)]
        caller: String,
        query: String,
        #[arg(long)]
        limit: Option<usize>,
    },
    Report {
        #[arg(long)]
        caller: String,
        asset: String,
        #[arg(long)]
        failed: bool,
        /// Commands the caller ran while reusing the asset.
        #[arg(long = "command")]
        commands: Vec<String>,
    },
    Vote {
        #[arg(long)]
        voter: String,
        asset: String,
        #[arg(value_enum)]
        direction: Direction,
    },
    Recompute {
        #[arg(long)]
        now: Option<DateTime<Utc>>,
    },
    PostBounty {
        #[arg(long)]
        poster: String,
        #[arg(long)]
        title: String,
        #[arg(long = "signal")]
        signals: Vec<String>,
        #[arg(long)]
        amount: i64,
        #[arg(long)]
        expires_at: DateTime<Utc>,
    },
    Bounties,
    Submit {
        #[arg(long)]
        submitter: String,
        bounty: String,
        asset: String,
    },
    Resolve { bounty: String },
    Conservation,
    Snapshot,
}

fn asset_id(s: &str) -> Result<AssetId> {
    AssetId::parse(s).with_context(|| format!("`{s}` is not an asset id"))
}

fn read_asset(path: &PathBuf) -> Result<Asset> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    Ok(serde_json::from_str(&text)?)
}

pub fn run(a: HubArgs) -> Result<()> {
    let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build()?;
    runtime.block_on(dispatch(HubClient::new(a.url), a.command))
}

async fn dispatch(client: HubClient, command: HubCommand) -> Result<()> {
    match command {
        HubCommand::Health => {
            client.health().await?;
            println!("ok");
        }
        HubCommand::Register { name } => println!("{}", client.register_agent(&name).await?),
        HubCommand::Balance { agent } => println!("{}", client.balance(&AgentId::new(agent)).await?),
        HubCommand::Ledger { agent } => print_json(&client.ledger(&AgentId::new(agent)).await?)?,
        HubCommand::Publish { author, file } => {
            let asset = read_asset(&file)?;
            print_json(&client.publish(&AgentId::new(author), &asset).await?)?;
        }
        HubCommand::Assets => print_json(&client.assets().await?)?,
        HubCommand::Asset { id } => print_json(&client.asset(&asset_id(&id)?).await?)?,
        HubCommand::Fetch { caller, query, limit } => print_json(&client.fetch(&AgentId::new(caller), &query, limit).await?)?,
        HubCommand::Report { caller, asset, failed, commands } => {
            print_json(&client.report_reuse(&AgentId::new(caller), &asset_id(&asset)?, !failed, &commands).await?)?
        }
        HubCommand::Vote { voter, asset, direction } => {
            let direction = match direction {
                Direction::Up => VoteDirection::Up,
                Direction::Down => VoteDirection::Down,
            };
            client.vote(&AgentId::new(voter), &asset_id(&asset)?, direction).await?;
        }
        HubCommand::Recompute { now } => print_json(&client.recompute(now).await?)?,
        HubCommand::PostBounty { poster, title, signals, amount, expires_at } => {
            println!("{}", client.post_bounty(&AgentId::new(poster), &title, signals, amount, expires_at).await?)
        }
        HubCommand::Bounties => print_json(&client.bounties().await?)?,
        HubCommand::Submit { submitter, bounty, asset } => {
            let index = client.submit(&BountyId(bounty), &AgentId::new(submitter), &asset_id(&asset)?).await?;
            println!("{index}");
        }
        HubCommand::Resolve { bounty } => print_json(&client.resolve(&BountyId(bounty)).await?)?,
        HubCommand::Conservation => print_json(&client.conservation().await?)?,
        HubCommand::Snapshot => client.snapshot().await?,
    }
    Ok(())
}
