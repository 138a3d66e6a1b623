//! Regular-expression catalogue for the static triviality check.
//!
//! Patterns are matched case-insensitively. A pattern may reference the
//! trust-word alternation with the placeholder `{trust}`.

use std::collections::BTreeSet;

use fancy_regex::Regex;
use serde::{Deserialize, Serialize};

use super::AuditError;

/// Literal operand in a constant-identity assertion.
const LITERAL: &str = r#"(?:'[^']*'|"[^"]*"|-?\d+(?:\.\d+)?|true|false|null|undefined)"#;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedPattern {
    pub name: String,
    pub pattern: String,
}

impl NamedPattern {
    fn new(name: &str, pattern: impl Into<String>) -> Self {
        Self { name: name.to_string(), pattern: pattern.into() }
    }
}

/// Uncompiled catalogue; every field may be overridden from TOML.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CatalogueConfig {
    pub trivial_assertion_patterns: Vec<NamedPattern>,
    pub general_patterns: Vec<NamedPattern>,
    pub trust_words: Vec<String>,
    pub trivial_heads: Vec<String>,
    /// Step-four length bound, exclusive.
    pub short_length: usize,
    pub test_keywords: Vec<String>,
    pub whitelist: Vec<String>,
    pub evasive_flags: Vec<String>,
    pub maintenance_scripts: Vec<String>,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for CatalogueConfig {
    fn default() -> Self {
        Self {
            trivial_assertion_patterns: vec![
                NamedPattern::new(
                    "assert-constant-identity",
                    format!(r"\bassert\s*\.\s*(?:equal|strictEqual|deepEqual|deepStrictEqual)\s*\(\s*({LITERAL})\s*,\s*\1\s*\)"),
                ),
                NamedPattern::new(
                    "assert-tautology",
                    r"\bassert(?:\s*\.\s*ok)?\s*\(\s*(?:true|1|!0)\s*\)|\bassert\s*\.\s*(?:equal|strictEqual)\s*\(\s*true\s*,\s*(?:true|1|!0)\s*\)",
                ),
                NamedPattern::new(
                    "expect-constant-identity",
                    format!(r"\bexpect\s*\(\s*({LITERAL})\s*\)\s*\.\s*(?:toBe|toEqual|toStrictEqual)\s*\(\s*\1\s*\)|\bexpect\s*\(\s*(?:true|1)\s*\)\s*\.\s*toBeTruthy\s*\(\s*\)"),
                ),
                NamedPattern::new(
                    "inline-require-assert",
                    r#"\brequire\s*\(\s*['"]assert['"]\s*\)\s*(?:\.\s*ok\s*)?\(\s*(?:true|1)\s*\)"#,
                ),
                NamedPattern::new("console-assert-tautology", r"\bconsole\s*\.\s*assert\s*\(\s*(?:true|1|!0)\s*\)"),
            ],
            general_patterns: vec![
                NamedPattern::new(
                    "console-trust-word",
                    r#"\bconsole\s*\.\s*\w+\s*\(\s*(?:(['"`])[^'"`]*?\b{trust}\b[^'"`]*?\1|{trust})\s*\)"#,
                ),
                NamedPattern::new("node-eval-console", r"\bnode\s+(?:-e|--eval)\b.*\bconsole\s*\."),
                NamedPattern::new("unconditional-exit", r"\b(?:process|sys|os)\s*\.\s*_?exit\s*\(\s*0?\s*\)"),
                NamedPattern::new("version-help-print-flag", r"(?:^|\s)(?:--version|-v|--help|-p|--print|--eval)(?=\s|=|$)"),
                NamedPattern::new("echo-trust-word", r#"\becho\b(?:\s+-[neE]+)*\s+['"]?[^'"]*?\b{trust}\b"#),
                NamedPattern::new("print-trust-word", r#"\bprint\s*\(\s*(?:(['"])[^'"]*?\b{trust}\b[^'"]*?\1|{trust})\s*\)"#),
            ],
            trust_words: strings(&["ok", "pass", "passed", "done", "success", "true", "reviewed", "approved", "0", "1"]),
            trivial_heads: strings(&["true", "exit", ":"]),
            short_length: 10,
            test_keywords: strings(&["test", "tests", "jest", "mocha", "vitest", "assert", "expect", "spec"]),
            whitelist: strings(&["node", "npm", "npx"]),
            evasive_flags: strings(&["--passWithNoTests"]),
            maintenance_scripts: strings(&["lint", "format", "prettier"]),
        }
    }
}

impl CatalogueConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, AuditError> {
        toml::from_str(text).map_err(|e| AuditError::Catalogue(e.to_string()))
    }

    pub fn compile(&self) -> Result<PatternCatalogue, AuditError> {
        let trust = format!(
            "(?:{})",
            self.trust_words.iter().map(|w| fancy_regex::escape(w)).collect::<Vec<_>>().join("|")
        );
        let compile_all = |patterns: &[NamedPattern]| -> Result<Vec<(String, Regex)>, AuditError> {
            patterns
                .iter()
                .map(|p| {
                    let source = format!("(?i){}", p.pattern.replace("{trust}", &trust));
                    Regex::new(&source)
                        .map(|re| (p.name.clone(), re))
                        .map_err(|e| AuditError::Catalogue(format!("pattern {}: {e}", p.name)))
                })
                .collect()
        };
        let alternation = |items: &[String]| items.iter().map(|w| fancy_regex::escape(w)).collect::<Vec<_>>().join("|");
        let evasive = if self.evasive_flags.is_empty() {
            None
        } else {
            let source = format!(r"(?i)(?:^|\s)(?:{})(?=\s|=|$)", alternation(&self.evasive_flags));
            Some(Regex::new(&source).map_err(|e| AuditError::Catalogue(e.to_string()))?)
        };
        let maintenance = if self.maintenance_scripts.is_empty() {
            None
        } else {
            let source = format!(r"(?i)\b(?:npm\s+run|yarn|pnpm(?:\s+run)?|npx)\s+(?:{})\b", alternation(&self.maintenance_scripts));
            Some(Regex::new(&source).map_err(|e| AuditError::Catalogue(e.to_string()))?)
        };
        let lower = |items: &[String]| items.iter().map(|s| s.to_lowercase()).collect::<BTreeSet<_>>();
        Ok(PatternCatalogue {
            trivial_assertions: compile_all(&self.trivial_assertion_patterns)?,
            general: compile_all(&self.general_patterns)?,
            evasive,
            maintenance,
            trivial_heads: lower(&self.trivial_heads),
            short_length: self.short_length,
            test_keywords: lower(&self.test_keywords),
            whitelist: lower(&self.whitelist),
        })
    }
}

/// Compiled catalogue.
#[derive(Debug, Clone)]
pub struct PatternCatalogue {
    pub(super) trivial_assertions: Vec<(String, Regex)>,
    pub(super) general: Vec<(String, Regex)>,
    pub(super) evasive: Option<Regex>,
    pub(super) maintenance: Option<Regex>,
    pub(super) trivial_heads: BTreeSet<String>,
    pub(super) short_length: usize,
    pub(super) test_keywords: BTreeSet<String>,
    pub(super) whitelist: BTreeSet<String>,
}

impl Default for PatternCatalogue {
    fn default() -> Self {
        CatalogueConfig::default().compile().expect("built-in patterns compile")
    }
}
