use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use genehub_core::dataset::{export_report, synthetic_assets, write_records, AssetDetail, Record, ReplayRegistry, ReportFormat, ReportSource};
use genehub_core::hub::Hub;

use crate::parse_weights;

#[derive(Clone, Copy, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Md,
    /// Dataset tables as JSONL, in the import layout.
    Jsonl,
}

#[derive(Args)]
pub struct ImportArgs {
    /// Directory holding `<table>.jsonl` files.
    dir: PathBuf,
    /// Weights for the recompute column.
    #[arg(long, default_value = "official")]
    weights: String,
    /// Largest absolute difference tolerated between stored and recomputed scores.
    #[arg(long)]
    max_deviation: Option<f64>,
}

pub fn import(a: ImportArgs) -> Result<()> {
    let started = std::time::Instant::now();
    let registry = ReplayRegistry::import_dir(&a.dir)?;
    let weights = parse_weights(&a.weights)?;
    let comparisons = registry.comparisons(&weights);
    let deviations: Vec<f64> = comparisons.iter().filter_map(|c| c.imported.map(|i| (i - c.recomputed).abs())).collect();
    let worst = deviations.iter().copied().fold(0.0, f64::max);
    let mean = if deviations.is_empty() { 0.0 } else { deviations.iter().sum::<f64>() / deviations.len() as f64 };
    println!("assets       {}", registry.assets().len());
    println!("bounties     {}", registry.bounties().len());
    println!("submissions  {}", registry.submissions().len());
    println!("scored       {} of {}", comparisons.len(), registry.assets().len());
    println!("deviation    mean={mean:.6} max={worst:.6}");
    eprintln!("imported in {:.2?}", started.elapsed());
    if let Some(limit) = a.max_deviation {
        if worst > limit {
            bail!("stored scores deviate from the recompute by up to {worst:.6} (limit {limit})");
        }
    }
    Ok(())
}

#[derive(Args)]
pub struct ExportArgs {
    /// Dataset directory to export from.
    #[arg(long, conflicts_with = "hub_data")]
    dataset: Option<PathBuf>,
    /// Server data directory whose snapshot is exported.
    #[arg(long)]
    hub_data: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    #[arg(long)]
    out: PathBuf,
}

pub fn export(a: ExportArgs) -> Result<()> {
    let registry = match (&a.dataset, &a.hub_data) {
        (Some(dir), _) => ReplayRegistry::import_dir(dir)?,
        (None, Some(dir)) => {
            let snapshot = genehub_server::load_snapshot(dir)?.with_context(|| format!("no hub snapshot in {}", dir.display()))?;
            ReplayRegistry::from_hub(&Hub::restore(snapshot))
        }
        (None, None) => bail!("pass --dataset <dir> or --hub-data <dir>"),
    };
    let written = match a.format {
        OutputFormat::Jsonl => {
            registry.export_dir(&a.out)?;
            vec![a.out.clone()]
        }
        OutputFormat::Csv => export_report(&ReportSource::Registry(&registry), ReportFormat::Csv, &a.out)?,
        OutputFormat::Md => export_report(&ReportSource::Registry(&registry), ReportFormat::Markdown, &a.out)?,
    };
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    records: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; the asset table is written under its usual name.
    #[arg(long)]
    out: PathBuf,
}

pub fn synth(a: SynthArgs) -> Result<()> {
    std::fs::create_dir_all(&a.out)?;
    let path = a.out.join(AssetDetail::file_name());
    let records = synthetic_assets(a.records, a.seed);
    write_records(BufWriter::new(File::create(&path)?), &records)?;
    println!("{}", path.display());
    Ok(())
}
