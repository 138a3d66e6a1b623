//! Validation-triviality audit and the metadata-forgery harness.
//!
//! Classification runs in two phases. The static phase is a conservative
//! pattern check per command and yields a lower bound on trivial genes. Genes
//! it cannot settle are run in an environment holding only the runtime; a
//! sequence that still passes there cannot depend on the capsule and is
//! trivial, which yields the upper bound.

pub mod catalogue;
pub mod forgery;
pub mod shell;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::evolver::{CommandResult, Executor, ExecutorError, WorkingState};
use crate::gep::Gene;

pub use catalogue::{CatalogueConfig, NamedPattern, PatternCatalogue};
pub use forgery::{forge_configurations, run_forgery_study, ForgeConfig, ForgeryRow};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AuditError {
    #[error("pattern catalogue: {0}")]
    Catalogue(String),
    #[error(transparent)]
    ExecutorFailure(#[from] ExecutorError),
    #[error("corpus line {line}: {reason}")]
    Corpus { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Trivial,
    Pass,
}

/// The step of the decision procedure that produced a label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "step", content = "detail")]
pub enum Rule {
    Empty,
    TrivialAssertion(String),
    GeneralPattern(String),
    EvasiveFlag,
    Maintenance,
    TestKeyword(String),
    ShortHead(String),
    Default,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Empty => f.write_str("empty"),
            Rule::TrivialAssertion(n) | Rule::GeneralPattern(n) => f.write_str(n),
            Rule::EvasiveFlag => f.write_str("evasive-flag"),
            Rule::Maintenance => f.write_str("maintenance"),
            Rule::TestKeyword(k) => write!(f, "test-keyword:{k}"),
            Rule::ShortHead(h) => write!(f, "short-head:{h}"),
            Rule::Default => f.write_str("default"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandVerdict {
    pub label: Label,
    pub rule: Rule,
    /// Invokes a program outside the whitelist. Independent of `label`.
    pub unauthorized: bool,
}

fn first_match(patterns: &[(String, fancy_regex::Regex)], command: &str) -> Option<String> {
    patterns
        .iter()
        .find(|(_, re)| re.is_match(command).unwrap_or(false))
        .map(|(name, _)| name.clone())
}

/// Label one command. Steps run strictly in order: empty, trivial patterns
/// (including evasive flags and maintenance scripts), test keyword outside
/// quoted literals, short command with a trivial head, default pass.
pub fn classify_command(command: &str, catalogue: &PatternCatalogue) -> CommandVerdict {
    let c = command.trim();
    let head = shell::head(c).to_lowercase();
    let unauthorized = !head.is_empty() && !catalogue.whitelist.contains(&head);
    let verdict = |label, rule| CommandVerdict { label, rule, unauthorized };

    if c.is_empty() {
        return verdict(Label::Trivial, Rule::Empty);
    }
    if let Some(name) = first_match(&catalogue.trivial_assertions, c) {
        return verdict(Label::Trivial, Rule::TrivialAssertion(name));
    }
    if let Some(name) = first_match(&catalogue.general, c) {
        return verdict(Label::Trivial, Rule::GeneralPattern(name));
    }
    if catalogue.evasive.as_ref().is_some_and(|re| re.is_match(c).unwrap_or(false)) {
        return verdict(Label::Trivial, Rule::EvasiveFlag);
    }
    if catalogue.maintenance.as_ref().is_some_and(|re| re.is_match(c).unwrap_or(false)) {
        return verdict(Label::Trivial, Rule::Maintenance);
    }
    let stripped = shell::strip_quoted(c).to_lowercase();
    if let Some(kw) = stripped
        .split(|ch: char| !ch.is_alphanumeric())
        .find(|tok| catalogue.test_keywords.contains(*tok))
    {
        return verdict(Label::Pass, Rule::TestKeyword(kw.to_string()));
    }
    if c.chars().count() < catalogue.short_length && catalogue.trivial_heads.contains(&head) {
        return verdict(Label::Trivial, Rule::ShortHead(head));
    }
    verdict(Label::Pass, Rule::Default)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneLabel {
    NoValidation,
    Trivial,
    Undetermined,
    Legitimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Static,
    Sandbox,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneVerdict {
    pub label: GeneLabel,
    /// Phase that settled the label; `None` while undetermined or when there
    /// is nothing to check.
    pub phase: Option<Phase>,
    pub commands: Vec<(String, CommandVerdict)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sandbox_results: Vec<CommandResult>,
}

impl GeneVerdict {
    pub fn unauthorized(&self) -> bool {
        self.commands.iter().any(|(_, v)| v.unauthorized)
    }
}

/// Static phase. Never yields `Legitimate`.
pub fn classify_gene_static(gene: &Gene, catalogue: &PatternCatalogue) -> GeneVerdict {
    let commands: Vec<(String, CommandVerdict)> = gene
        .validations
        .iter()
        .flat_map(|entry| shell::split_commands(entry))
        .map(|c| {
            let v = classify_command(&c, catalogue);
            (c, v)
        })
        .collect();
    let (label, phase) = if commands.is_empty() {
        (GeneLabel::NoValidation, None)
    } else if commands.iter().all(|(_, v)| v.label == Label::Trivial) {
        (GeneLabel::Trivial, Some(Phase::Static))
    } else {
        (GeneLabel::Undetermined, None)
    };
    GeneVerdict { label, phase, commands, sandbox_results: vec![] }
}

/// Run the gene's validation entries in order in an environment holding no
/// capsule artifacts. All pass: trivial. Any failure: legitimate.
pub fn sandbox_phase(gene: &Gene, executor: &dyn Executor) -> Result<(GeneLabel, Vec<CommandResult>), ExecutorError> {
    let empty = WorkingState::new();
    let mut results = Vec::new();
    for entry in &gene.validations {
        let r = executor.run(entry, &empty)?;
        let failed = !r.passed();
        results.push(r);
        if failed {
            return Ok((GeneLabel::Legitimate, results));
        }
    }
    Ok((GeneLabel::Trivial, results))
}

/// Both phases. An executor failure leaves the gene undetermined.
pub fn classify_gene(gene: &Gene, catalogue: &PatternCatalogue, executor: &dyn Executor) -> GeneVerdict {
    let mut verdict = classify_gene_static(gene, catalogue);
    if verdict.label == GeneLabel::Undetermined {
        if let Ok((label, results)) = sandbox_phase(gene, executor) {
            verdict.label = label;
            verdict.phase = Some(Phase::Sandbox);
            verdict.sandbox_results = results;
        }
    }
    verdict
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub total: usize,
    pub no_validation: usize,
    pub trivial_static: usize,
    pub trivial_sandbox: usize,
    pub legitimate: usize,
    /// Genes the sandbox could not run.
    pub undetermined: usize,
    /// Genes with at least one command outside the whitelist.
    pub unauthorized: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub category: String,
    pub count: usize,
    pub percent: f64,
}

impl AuditReport {
    pub fn trivial(&self) -> usize {
        self.trivial_static + self.trivial_sandbox
    }

    /// Share of the corpus in percent; zero for an empty corpus.
    pub fn percent(&self, count: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            (100 * count) as f64 / self.total as f64
        }
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        let mut rows = vec![
            ("No Validation", self.no_validation),
            ("Trivial Validation", self.trivial()),
            ("  static phase", self.trivial_static),
            ("  sandbox phase", self.trivial_sandbox),
            ("Legitimate Validation", self.legitimate),
        ];
        if self.undetermined > 0 {
            rows.push(("Undetermined", self.undetermined));
        }
        rows.into_iter()
            .map(|(category, count)| ReportRow { category: category.to_string(), count, percent: self.percent(count) })
            .collect()
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Category | Count | Percent |\n|---|---:|---:|\n");
        for row in self.rows() {
            out.push_str(&format!("| {} | {} | {:.1}% |\n", row.category, row.count, row.percent));
        }
        out.push_str(&format!("\nTotal genes: {}. Genes with unauthorized commands: {}.\n", self.total, self.unauthorized));
        out
    }

    fn add(&mut self, v: &GeneVerdict) {
        self.total += 1;
        match (v.label, v.phase) {
            (GeneLabel::NoValidation, _) => self.no_validation += 1,
            (GeneLabel::Trivial, Some(Phase::Sandbox)) => self.trivial_sandbox += 1,
            (GeneLabel::Trivial, _) => self.trivial_static += 1,
            (GeneLabel::Legitimate, _) => self.legitimate += 1,
            (GeneLabel::Undetermined, _) => self.undetermined += 1,
        }
        if v.unauthorized() {
            self.unauthorized += 1;
        }
    }
}

/// Full two-phase audit, parallel across genes.
pub fn audit_corpus(genes: &[Gene], catalogue: &PatternCatalogue, executor: &dyn Executor) -> (AuditReport, Vec<GeneVerdict>) {
    let verdicts: Vec<GeneVerdict> = genes.par_iter().map(|g| classify_gene(g, catalogue, executor)).collect();
    let mut report = AuditReport::default();
    for v in &verdicts {
        report.add(v);
    }
    (report, verdicts)
}

/// Parse line-delimited JSON genes; blank lines are skipped.
pub fn parse_gene_lines(text: &str) -> Result<Vec<Gene>, AuditError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| AuditError::Corpus { line: i + 1, reason: e.to_string() }))
        .collect()
}
