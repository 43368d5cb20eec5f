//! Text and JSON renderings plus the exit-code contract.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::checks::{AuditReport, Severity};
use crate::config::AuditConfig;
use crate::scoring::{render_profile, Dimension, ScoreProfile};
use crate::spotcheck::{OutcomeStatus, SpotCheckOutcome};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "repro-audit";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedReport {
    pub format: Format,
    pub body: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: TOOL_NAME.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// The machine-readable document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub report: AuditReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ScoreProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spotcheck: Option<Vec<SpotCheckOutcome>>,
    /// Effective configuration, echoed for transparency.
    pub config: AuditConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
}

impl StructuredReport {
    pub fn new(report: AuditReport, config: AuditConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: ToolInfo::default(),
            report,
            profile: None,
            spotcheck: None,
            config,
            generated_at_unix: None,
        }
    }
}

/// Machine-readable spot-check results.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpotCheckDocument {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub manifest: String,
    pub selection: String,
    pub outcomes: Vec<SpotCheckOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
}

fn sort_keys(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(
                entries
                    .into_iter()
                    .map(|(k, v)| (k, sort_keys(v)))
                    .collect::<Map<_, _>>(),
            )
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn render_structured(doc: &StructuredReport) -> String {
    render_json(doc)
}

/// [`render_structured`] for any serializable document.
pub fn render_json<T: Serialize>(doc: &T) -> String {
    let value = serde_json::to_value(doc).expect("report types serialize to JSON");
    let mut out = serde_json::to_string_pretty(&sort_keys(value)).expect("JSON values serialize");
    out.push('\n');
    out
}

pub fn parse_structured(text: &str) -> Result<StructuredReport, serde_json::Error> {
    serde_json::from_str(text)
}

fn summary_line(counts: &BTreeMap<Severity, usize>, total: usize) -> String {
    if total == 0 {
        return "0 findings".to_string();
    }
    let parts: Vec<String> = [
        Severity::Fail,
        Severity::Warn,
        Severity::Info,
        Severity::Pass,
        Severity::NotApplicable,
    ]
    .iter()
    .map(|s| format!("{} {}", counts.get(s).copied().unwrap_or(0), s.label()))
    .collect();
    format!("{total} findings: {}", parts.join(", "))
}

/// One line per finding, in report order, then a summary line.
pub fn render_text(report: &AuditReport) -> String {
    let mut out = String::new();
    for f in &report.findings {
        let location = f.location.as_ref().map_or_else(|| ".".to_string(), ToString::to_string);
        out.push_str(&format!(
            "{} {} {} \u{2014} {} [{}]\n",
            f.severity.label(),
            f.check,
            location,
            f.message,
            f.guideline
        ));
    }
    out.push_str(&summary_line(&report.counts, report.findings.len()));
    out.push('\n');
    out
}

/// Badge line followed by one row per dimension.
pub fn render_profile_text(profile: &ScoreProfile, reasons: &BTreeMap<Dimension, String>) -> String {
    let mut out = render_profile(profile);
    out.push('\n');
    for d in Dimension::ALL {
        let evidence = match d.evidence() {
            crate::scoring::Evidence::Computed => "computed",
            crate::scoring::Evidence::Attested => "attested",
            crate::scoring::Evidence::Mixed => "mixed",
        };
        out.push_str(&format!(
            "{d}{}  {:<26} {:<9} {}\n",
            profile.level(d),
            d.title(),
            evidence,
            reasons.get(&d).map_or("", String::as_str)
        ));
    }
    out
}

pub fn render_spotcheck_text(outcomes: &[SpotCheckOutcome]) -> String {
    let mut out = String::new();
    let mut counts: BTreeMap<OutcomeStatus, usize> = BTreeMap::new();
    for o in outcomes {
        *counts.entry(o.status).or_default() += 1;
        out.push_str(&format!("{:<15} {} {}", o.status.as_str(), o.id, o.expected_output));
        if !o.detail.is_empty() {
            out.push_str(&format!(" \u{2014} {}", o.detail));
        }
        out.push('\n');
    }
    let parts: Vec<String> = counts.iter().map(|(s, n)| format!("{n} {}", s.as_str())).collect();
    if parts.is_empty() {
        out.push_str("0 replications checked\n");
    } else {
        out.push_str(&format!(
            "{} replications checked: {}\n",
            outcomes.len(),
            parts.join(", ")
        ));
    }
    out
}

/// 1 if any finding is at or above `fail_on`, else 0.
pub fn audit_exit_code(report: &AuditReport, fail_on: Severity) -> i32 {
    let threshold = fail_on.max(Severity::Info);
    if report.findings.iter().any(|f| f.severity >= threshold) {
        EXIT_FINDINGS
    } else {
        EXIT_OK
    }
}

/// 0 iff every selected replication matched.
pub fn spotcheck_exit_code(outcomes: &[SpotCheckOutcome]) -> i32 {
    if outcomes.iter().all(|o| o.status == OutcomeStatus::Match) {
        EXIT_OK
    } else {
        EXIT_FINDINGS
    }
}
