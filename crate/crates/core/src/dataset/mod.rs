//! Line-delimited dataset records in the marketplace crawl schemas.
//!
//! Three tables are supported: asset detail, bounty detail and bounty
//! submissions. Every column is optional and nullable, and absent, `null` and
//! present stay distinguishable so that import followed by export reproduces
//! the input byte for byte when the input was written in column order.
//! Columns outside the schema are carried through untouched after the known
//! ones.

mod report;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::gep::canonical_bytes;
use crate::hub::Hub;
use crate::scoring::{composite_gdi, GdiComponents, GdiWeights};

pub use report::{ecdf, export_report, report_tables, ReportFormat, ReportSource, Table};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("record {index} (line {line}): {reason}")]
    SchemaViolation { index: usize, line: usize, reason: String },
    #[error("i/o failure: {0}")]
    IoFailure(String),
}

impl From<std::io::Error> for DatasetError {
    fn from(e: std::io::Error) -> Self {
        DatasetError::IoFailure(e.to_string())
    }
}

/// A nullable column: `None` when absent, `Some(None)` when `null`.
pub type Column<T> = Option<Option<T>>;

/// The column's value, if present and not null.
pub fn value<T>(column: &Column<T>) -> Option<&T> {
    column.as_ref().and_then(Option::as_ref)
}

fn present<'de, D: Deserializer<'de>, T: Deserialize<'de>>(d: D) -> Result<Column<T>, D::Error> {
    Option::<T>::deserialize(d).map(Some)
}

fn set<T>(v: T) -> Column<T> {
    Some(Some(v))
}

macro_rules! schema_record {
    ($(#[$meta:meta])* $name:ident, table = $table:literal, key = $key:ident { $($field:ident: $ty:ty,)* }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        pub struct $name {
            $(
                #[serde(default, deserialize_with = "present", skip_serializing_if = "Option::is_none")]
                pub $field: Column<$ty>,
            )*
            /// Columns outside the schema.
            #[serde(flatten)]
            pub extra: BTreeMap<String, Value>,
        }

        impl Record for $name {
            const TABLE: &'static str = $table;
            const COLUMNS: &'static [&'static str] = &[$(stringify!($field)),*];
            const KEY: &'static str = stringify!($key);

            fn key(&self) -> Option<&str> {
                value(&self.$key).map(String::as_str).filter(|k| !k.is_empty())
            }
        }
    };
}

/// One schema table.
pub trait Record: Serialize + DeserializeOwned {
    /// File stem of the table.
    const TABLE: &'static str;
    /// Known columns in schema order.
    const COLUMNS: &'static [&'static str];
    /// Column that must be present and non-empty.
    const KEY: &'static str;

    fn key(&self) -> Option<&str>;

    fn file_name() -> String {
        format!("{}.jsonl", Self::TABLE)
    }
}

schema_record! {
    /// One asset as observed on the marketplace.
    AssetDetail, table = "evomap_asset_detail", key = asset_id {
        asset_id: String,
        asset_type: String,
        status: String,
        source_node_id: String,
        trigger_text: String,
        related_asset_id: String,
        author: String,
        tags: String,
        signature: String,
        chain_id: String,
        model_name: String,
        short_title: String,
        nl_summary: String,
        trust_tier: String,
        asset_created_at: String,
        compute_saved: String,
        confidence: f64,
        success_streak: i64,
        call_count: i64,
        view_count: i64,
        reuse_count: i64,
        gdi_score: f64,
        gdi_score_mean: f64,
        gdi_intrinsic: f64,
        gdi_usage: f64,
        gdi_usage_lower: f64,
        gdi_social: f64,
        gdi_social_lower: f64,
        gdi_freshness: f64,
        upvotes: i64,
        downvotes: i64,
        agent_rating_avg: f64,
        agent_rating_count: i64,
        fork_count: i64,
        iteration_count: i64,
        payload_json: String,
        lineage_json: String,
        bundle_capsule_json: String,
        bundle_events_json: String,
        rawtext: String,
    }
}

schema_record! {
    /// One agent's answer to a bounty.
    BountySubmission, table = "bounty_submissions", key = submission_id {
        bounty_id: String,
        submission_id: String,
        node_id: String,
        asset_id: String,
        status: String,
        created_at: String,
        summary: String,
        content: String,
    }
}

schema_record! {
    /// One posted bounty and its lifecycle state.
    BountyDetail, table = "bounty_details", key = bounty_id {
        bounty_id: String,
        question_id: String,
        user_id: String,
        amount: f64,
        status: String,
        title: String,
        signals: String,
        boost_level: i64,
        matched_asset_id: String,
        matched_node_id: String,
        accepted_at: String,
        expires_at: String,
        created_at: String,
        task_id: String,
        task_status: String,
        task_claimed_by: String,
        task_claimed_at: String,
        submission_count: i64,
        promoted_submission_count: i64,
        competition_status: String,
        review_status: String,
        updated_at: String,
    }
}

/// Stream records from line-delimited JSON. Blank lines are skipped and do
/// not count towards the record index.
pub fn read_records<T: Record, R: BufRead>(reader: R) -> Result<Vec<T>, DatasetError> {
    Ok(read_numbered(reader)?.into_iter().map(|(_, r)| r).collect())
}

/// Records paired with their 1-based line numbers.
fn read_numbered<T: Record, R: BufRead>(reader: R) -> Result<Vec<(usize, T)>, DatasetError> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let violation = |reason: String| DatasetError::SchemaViolation { index: out.len(), line: n + 1, reason };
        let record: T = serde_json::from_str(&line).map_err(|e| violation(e.to_string()))?;
        if record.key().is_none() {
            return Err(violation(format!("missing `{}`", T::KEY)));
        }
        out.push((n + 1, record));
    }
    Ok(out)
}

/// One compact JSON object per line, known columns first in schema order.
pub fn write_records<T: Record, W: Write>(mut writer: W, records: &[T]) -> Result<(), DatasetError> {
    for r in records {
        serde_json::to_writer(&mut writer, r).map_err(|e| DatasetError::IoFailure(e.to_string()))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// An imported asset's stored score next to the documented-formula recompute.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GdiComparison {
    pub asset_id: String,
    pub imported: Option<f64>,
    pub recomputed: f64,
}

/// Read-only view over imported tables.
#[derive(Debug, Clone, Default)]
pub struct ReplayRegistry {
    assets: Vec<AssetDetail>,
    by_id: HashMap<String, usize>,
    bounties: Vec<BountyDetail>,
    submissions: Vec<BountySubmission>,
}

impl ReplayRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Import assets. A repeated `asset_id` is a schema violation and leaves
    /// the registry unchanged.
    pub fn import_assets<R: BufRead>(&mut self, reader: R) -> Result<usize, DatasetError> {
        let records: Vec<(usize, AssetDetail)> = read_numbered(reader)?;
        let base = self.assets.len();
        let mut fresh = HashMap::with_capacity(records.len());
        for (i, (line, r)) in records.iter().enumerate() {
            let id = r.key().expect("read_numbered checks the key");
            if self.by_id.contains_key(id) || fresh.insert(id.to_string(), base + i).is_some() {
                return Err(DatasetError::SchemaViolation { index: i, line: *line, reason: format!("duplicate asset_id {id}") });
            }
        }
        let n = records.len();
        self.by_id.extend(fresh);
        self.assets.extend(records.into_iter().map(|(_, r)| r));
        Ok(n)
    }

    pub fn import_bounties<R: BufRead>(&mut self, reader: R) -> Result<usize, DatasetError> {
        let records: Vec<BountyDetail> = read_records(reader)?;
        let n = records.len();
        self.bounties.extend(records);
        Ok(n)
    }

    pub fn import_submissions<R: BufRead>(&mut self, reader: R) -> Result<usize, DatasetError> {
        let records: Vec<BountySubmission> = read_records(reader)?;
        let n = records.len();
        self.submissions.extend(records);
        Ok(n)
    }

    /// Import whichever of the three table files exist in `dir`.
    pub fn import_dir(dir: &Path) -> Result<Self, DatasetError> {
        let mut reg = Self::new();
        let open = |name: String| -> Result<Option<BufReader<File>>, DatasetError> {
            let path = dir.join(name);
            if path.exists() {
                Ok(Some(BufReader::new(File::open(path)?)))
            } else {
                Ok(None)
            }
        };
        if let Some(r) = open(AssetDetail::file_name())? {
            reg.import_assets(r)?;
        }
        if let Some(r) = open(BountyDetail::file_name())? {
            reg.import_bounties(r)?;
        }
        if let Some(r) = open(BountySubmission::file_name())? {
            reg.import_submissions(r)?;
        }
        Ok(reg)
    }

    /// Write all three tables into `dir`, creating it if needed.
    pub fn export_dir(&self, dir: &Path) -> Result<(), DatasetError> {
        std::fs::create_dir_all(dir)?;
        let create = |name: String| -> Result<BufWriter<File>, DatasetError> { Ok(BufWriter::new(File::create(dir.join(name))?)) };
        write_records(create(AssetDetail::file_name())?, &self.assets)?;
        write_records(create(BountyDetail::file_name())?, &self.bounties)?;
        write_records(create(BountySubmission::file_name())?, &self.submissions)?;
        Ok(())
    }

    pub fn assets(&self) -> &[AssetDetail] {
        &self.assets
    }

    pub fn bounties(&self) -> &[BountyDetail] {
        &self.bounties
    }

    pub fn submissions(&self) -> &[BountySubmission] {
        &self.submissions
    }

    pub fn asset(&self, id: &str) -> Option<&AssetDetail> {
        self.by_id.get(id).map(|&i| &self.assets[i])
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty() && self.bounties.is_empty() && self.submissions.is_empty()
    }

    /// The four stored components, when all are present and in range.
    pub fn components(record: &AssetDetail) -> Option<GdiComponents> {
        GdiComponents::new(
            *value(&record.gdi_intrinsic)?,
            *value(&record.gdi_usage)?,
            *value(&record.gdi_social)?,
            *value(&record.gdi_freshness)?,
        )
        .ok()
    }

    pub fn recompute(&self, id: &str, weights: &GdiWeights) -> Option<f64> {
        Self::components(self.asset(id)?).map(|c| composite_gdi(&c, weights))
    }

    /// Every asset with usable components, in import order.
    pub fn comparisons(&self, weights: &GdiWeights) -> Vec<GdiComparison> {
        self.assets
            .iter()
            .filter_map(|r| {
                let c = Self::components(r)?;
                Some(GdiComparison {
                    asset_id: r.key()?.to_string(),
                    imported: value(&r.gdi_score).copied(),
                    recomputed: composite_gdi(&c, weights),
                })
            })
            .collect()
    }

    /// `(components, stored gdi_score)` pairs for weight regression.
    pub fn refit_samples(&self) -> Vec<(GdiComponents, f64)> {
        self.assets
            .iter()
            .filter_map(|r| Some((Self::components(r)?, *value(&r.gdi_score)?)))
            .collect()
    }

    /// Express a live hub in the dataset schemas.
    pub fn from_hub(hub: &Hub) -> Self {
        let mut reg = Self::new();
        for r in hub.records() {
            let signals = match &r.body {
                crate::gep::Asset::Capsule(c) => Some(c.signals),
                crate::gep::Asset::Event(e) => Some(e.metrics),
                crate::gep::Asset::Gene(_) => None,
            };
            let tags = match &r.body {
                crate::gep::Asset::Gene(g) => Some(g.tags.join(",")),
                _ => None,
            };
            let lineage = match &r.body {
                crate::gep::Asset::Event(e) => Some(String::from_utf8(canonical_bytes(&e.parent_genes)).expect("JSON is UTF-8")),
                _ => None,
            };
            let detail = AssetDetail {
                asset_id: set(r.id.to_string()),
                asset_type: set(r.kind.dataset_label().to_string()),
                status: set(serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()),
                source_node_id: set(r.author.to_string()),
                trigger_text: set(r.body.trigger_text().to_string()),
                author: set(hub.agent(&r.author).map_or_else(|| r.author.to_string(), |a| a.name.clone())),
                tags: tags.map(Some),
                nl_summary: set(r.body.summary().to_string()),
                asset_created_at: set(r.published_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
                confidence: signals.map(|s| Some(s.confidence)),
                success_streak: signals.map(|s| Some(s.success_streak as i64)),
                call_count: set(r.counters.call_count as i64),
                view_count: set(r.counters.view_count as i64),
                reuse_count: set(r.counters.reuse_count as i64),
                gdi_score: set(r.gdi),
                gdi_intrinsic: set(r.components.intrinsic),
                gdi_usage: set(r.components.usage),
                gdi_social: set(r.components.social),
                gdi_freshness: set(r.components.freshness),
                upvotes: set(r.counters.upvotes as i64),
                downvotes: set(r.counters.downvotes as i64),
                fork_count: set(r.counters.fork_count as i64),
                payload_json: set(String::from_utf8(canonical_bytes(&r.body)).expect("JSON is UTF-8")),
                lineage_json: lineage.map(Some),
                ..AssetDetail::default()
            };
            reg.by_id.insert(r.id.to_string(), reg.assets.len());
            reg.assets.push(detail);
        }
        for b in hub.bounties() {
            let ts = |t: chrono::DateTime<chrono::Utc>| t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
            let label = |v: Value| v.as_str().map(str::to_string).unwrap_or_default();
            let winner = b.winner();
            reg.bounties.push(BountyDetail {
                bounty_id: set(b.id.to_string()),
                user_id: set(b.poster.to_string()),
                amount: set(b.amount as f64),
                status: set(label(serde_json::to_value(b.status).unwrap_or(Value::Null))),
                title: set(b.title.clone()),
                signals: set(b.signals.join(",")),
                matched_asset_id: winner.map(|w| Some(w.asset.to_string())),
                matched_node_id: winner.map(|w| Some(w.submitter.to_string())),
                accepted_at: b.accepted_at.map(|t| Some(ts(t))),
                expires_at: set(ts(b.expires_at)),
                created_at: set(ts(b.created_at)),
                submission_count: set(b.submissions.len() as i64),
                ..BountyDetail::default()
            });
            for (i, s) in b.submissions.iter().enumerate() {
                reg.submissions.push(BountySubmission {
                    bounty_id: set(b.id.to_string()),
                    submission_id: set(format!("{}-{i}", b.id)),
                    node_id: set(s.submitter.to_string()),
                    asset_id: set(s.asset.to_string()),
                    status: set(label(serde_json::to_value(s.status).unwrap_or(Value::Null))),
                    created_at: set(ts(s.created_at)),
                    summary: hub.record(&s.asset).map(|r| Some(r.body.summary().to_string())),
                    ..BountySubmission::default()
                });
            }
        }
        reg
    }
}

/// Seeded schema-conformant asset records with every column filled, for
/// round-trip and scale checks. Scores follow the documented formula.
pub fn synthetic_assets(n: usize, seed: u64) -> Vec<AssetDetail> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let types = ["Gene", "Capsule", "EvolutionEvent"];
    let statuses = ["promoted", "candidate", "revoked", "archived", "flagged", "stale"];
    (0..n)
        .map(|i| {
            let c = GdiComponents {
                intrinsic: rng.random(),
                usage: rng.random(),
                social: rng.random(),
                freshness: rng.random(),
            };
            let calls: i64 = rng.random_range(0..500);
            let node = format!("node_{:016x}", rng.random::<u64>());
            AssetDetail {
                asset_id: set(crate::gep::hash_asset(format!("{seed}/{i}").as_bytes()).to_string()),
                asset_type: set(types[i % 3].to_string()),
                status: set(statuses[rng.random_range(0..statuses.len())].to_string()),
                source_node_id: set(node.clone()),
                trigger_text: set(format!("TypeError: cannot read property_{i} of undefined")),
                related_asset_id: Some(None),
                author: set(format!("agent-{}", rng.random_range(0..1000))),
                tags: set("timeout,retry".to_string()),
                signature: set(format!("{:064x}", rng.random::<u128>())),
                chain_id: set("main".to_string()),
                model_name: set("model-x".to_string()),
                short_title: set(format!("Fix {i}")),
                nl_summary: set(format!("Wrap call {i} in a bounded retry with \"quoted\" note \u{e9}")),
                trust_tier: set("normal".to_string()),
                asset_created_at: set(format!("2026-01-{:02}T{:02}:00:00Z", 1 + i % 28, i % 24)),
                compute_saved: set(r#"{"tokens":1200}"#.to_string()),
                confidence: set(rng.random()),
                success_streak: set(rng.random_range(0..400)),
                call_count: set(calls),
                view_count: set(calls * 3),
                reuse_count: set(rng.random_range(0..50)),
                gdi_score: set(composite_gdi(&c, &GdiWeights::OFFICIAL)),
                gdi_score_mean: set(rng.random::<f64>() * 100.0),
                gdi_intrinsic: set(c.intrinsic),
                gdi_usage: set(c.usage),
                gdi_usage_lower: set(c.usage * 0.9),
                gdi_social: set(c.social),
                gdi_social_lower: set(c.social * 0.8),
                gdi_freshness: set(c.freshness),
                upvotes: set(rng.random_range(0..40)),
                downvotes: set(rng.random_range(0..10)),
                agent_rating_avg: set(rng.random::<f64>() * 5.0),
                agent_rating_count: set(rng.random_range(0..20)),
                fork_count: set(rng.random_range(0..5)),
                iteration_count: set(rng.random_range(0..9)),
                payload_json: set(format!(r#"{{"kind":"capsule","n":{i}}}"#)),
                lineage_json: set("[]".to_string()),
                bundle_capsule_json: Some(None),
                bundle_events_json: set("[]".to_string()),
                rawtext: set(format!("asset {i} by {node}")),
                extra: BTreeMap::new(),
            }
        })
        .collect()
}
