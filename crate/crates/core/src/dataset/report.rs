use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{value, DatasetError, Record, ReplayRegistry};
use crate::audit::AuditReport;
use crate::scoring::GdiWeights;
use crate::sim::SimOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format `{other}`, expected csv or markdown")),
        }
    }
}

/// A named rectangular table of pre-rendered cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, headers: &[&str]) -> Self {
        Table { name: name.to_string(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("cells are UTF-8")
    }

    pub fn to_markdown(&self) -> String {
        let line = |cells: &[String]| format!("| {} |\n", cells.iter().map(|c| c.replace('|', "\\|")).collect::<Vec<_>>().join(" | "));
        let mut out = line(&self.headers);
        out.push_str(&format!("|{}\n", "---|".repeat(self.headers.len())));
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Markdown => self.to_markdown(),
        }
    }
}

/// Empirical CDF: each distinct value with the fraction of samples at or
/// below it. Non-finite samples are dropped.
pub fn ecdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *v => last.1 = frac,
            _ => out.push((*v, frac)),
        }
    }
    out
}

fn ecdf_table(name: &str, column: &str, values: &[f64]) -> Table {
    let mut t = Table::new(name, &[column, "ecdf"]);
    t.rows = ecdf(values).into_iter().map(|(v, f)| vec![v.to_string(), f.to_string()]).collect();
    t
}

fn cell<T: ToString>(v: Option<&T>) -> String {
    v.map(ToString::to_string).unwrap_or_default()
}

pub enum ReportSource<'a> {
    Registry(&'a ReplayRegistry),
    Simulation(&'a SimOutcome),
    Audit(&'a AuditReport),
}

/// The tables a source is reported as. Layout never depends on content, so
/// empty input yields the same tables with headers only.
pub fn report_tables(source: &ReportSource<'_>) -> Vec<Table> {
    match source {
        ReportSource::Registry(reg) => {
            let mut assets = Table::new(
                "assets",
                &["asset_id", "asset_type", "status", "gdi_score", "recomputed_gdi", "call_count", "reuse_count"],
            );
            for r in reg.assets() {
                let recomputed = ReplayRegistry::components(r).map(|c| crate::scoring::composite_gdi(&c, &GdiWeights::OFFICIAL));
                assets.rows.push(vec![
                    r.key().unwrap_or_default().to_string(),
                    cell(value(&r.asset_type)),
                    cell(value(&r.status)),
                    cell(value(&r.gdi_score)),
                    cell(recomputed.as_ref()),
                    cell(value(&r.call_count)),
                    cell(value(&r.reuse_count)),
                ]);
            }
            let gdi: Vec<f64> = reg.assets().iter().filter_map(|r| value(&r.gdi_score).copied()).collect();
            let calls: Vec<f64> = reg.assets().iter().filter_map(|r| value(&r.call_count).map(|&c| c as f64)).collect();
            vec![assets, ecdf_table("gdi_ecdf", "gdi_score", &gdi), ecdf_table("call_count_ecdf", "call_count", &calls)]
        }
        ReportSource::Simulation(out) => {
            let m = &out.metrics;
            let mut metrics = Table::new("metrics", &["metric", "value"]);
            for (name, v) in [
                ("ticks", f64::from(m.ticks)),
                ("assets", m.assets as f64),
                ("never_called_fraction", m.never_called_fraction),
                ("promotion_rate", m.promotion_rate),
                ("top_decile_credit_share", m.top_decile_credit_share),
                ("gini", m.gini),
                ("bounties_posted", m.bounties_posted as f64),
                ("bounty_resolution_rate", m.bounty_resolution_rate),
                ("mean_intrinsic", m.mean_intrinsic),
            ] {
                metrics.rows.push(vec![name.to_string(), v.to_string()]);
            }
            let mut strategies =
                Table::new("strategies", &["strategy", "agents", "assets", "mean_gdi", "mean_intrinsic", "mean_balance"]);
            for (kind, s) in &m.per_strategy {
                strategies.rows.push(vec![
                    kind.name().to_string(),
                    s.agents.to_string(),
                    s.assets.to_string(),
                    s.mean_gdi.to_string(),
                    s.mean_intrinsic.to_string(),
                    s.mean_balance.to_string(),
                ]);
            }
            let balances: Vec<f64> = out.strategies.keys().map(|a| out.hub.balance(a) as f64).collect();
            let calls: Vec<f64> = out.hub.records().iter().map(|r| r.counters.call_count as f64).collect();
            vec![
                metrics,
                strategies,
                ecdf_table("credit_ecdf", "balance", &balances),
                ecdf_table("call_count_ecdf", "call_count", &calls),
            ]
        }
        ReportSource::Audit(report) => {
            let mut t = Table::new("audit", &["category", "count", "percent"]);
            for row in report.rows() {
                t.rows.push(vec![row.category.clone(), row.count.to_string(), format!("{:.1}", row.percent)]);
            }
            vec![t]
        }
    }
}

/// Write each table of `source` to `dir/<name>.<ext>`. Returns the paths in
/// table order.
pub fn export_report(source: &ReportSource<'_>, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    std::fs::create_dir_all(dir)?;
    report_tables(source)
        .into_iter()
        .map(|t| {
            let path = dir.join(format!("{}.{}", t.name, format.extension()));
            std::fs::write(&path, t.render(format))?;
            Ok(path)
        })
        .collect()
}
