//! Guideline check catalog, findings and the audit report.

mod engine;
mod linkage;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::supplement::{ArtifactLabel, FileClass};

pub use engine::{is_synthetic, run_checks, uses_synthetic_only};
pub use linkage::{build_linkage, LinkageReport, Producer, ProducerKind};

macro_rules! check_ids {
    ($($variant:ident => $code:literal),* $(,)?) => {
        /// Stable check identifier. Variants are declared in lexicographic order
        /// of their codes, so the derived ordering matches string ordering.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum CheckId {
            $($variant),*
        }

        impl CheckId {
            pub const ALL: &'static [CheckId] = &[$(CheckId::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(CheckId::$variant => $code),*
                }
            }
        }

        impl FromStr for CheckId {
            type Err = UnknownCheck;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim().to_ascii_uppercase().as_str() {
                    $($code => Ok(CheckId::$variant),)*
                    _ => Err(UnknownCheck(s.to_string())),
                }
            }
        }
    };
}

check_ids! {
    Code01 => "CODE-01",
    Code02 => "CODE-02",
    Code03 => "CODE-03",
    Code04 => "CODE-04",
    Code05 => "CODE-05",
    Code06 => "CODE-06",
    Code07 => "CODE-07",
    Code08 => "CODE-08",
    Code09 => "CODE-09",
    Code10 => "CODE-10",
    Code11 => "CODE-11",
    Intr01 => "INTR-01",
    Intr02 => "INTR-02",
    Link01 => "LINK-01",
    Link02 => "LINK-02",
    Readme01 => "README-01",
    Readme02 => "README-02",
    Readme03 => "README-03",
    Readme04 => "README-04",
    Struct01 => "STRUCT-01",
    Struct02 => "STRUCT-02",
    Struct03 => "STRUCT-03",
    Struct04 => "STRUCT-04",
    Struct05 => "STRUCT-05",
    Struct06 => "STRUCT-06",
    Synt01 => "SYNT-01",
    Synt02 => "SYNT-02",
}

impl CheckId {
    /// Checks whose severity may never be configured below Info.
    pub fn has_info_floor(self) -> bool {
        matches!(self, CheckId::Code01 | CheckId::Code03)
    }

    /// Severity a violation reports before overrides.
    pub fn default_severity(self) -> Severity {
        catalog_entry(self).default_severity
    }

    pub fn family(self) -> &'static str {
        self.as_str().split('-').next().unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown check id {0:?}")]
pub struct UnknownCheck(pub String);

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for CheckId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CheckId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Outcome severity. `NotApplicable` sorts lowest and is excluded from
/// pass-rate denominators; the rest are ordered Pass < Info < Warn < Fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    NotApplicable,
    Pass,
    Info,
    Warn,
    Fail,
}

impl Severity {
    pub const ALL: [Severity; 5] = [
        Severity::NotApplicable,
        Severity::Pass,
        Severity::Info,
        Severity::Warn,
        Severity::Fail,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Severity::NotApplicable => "N/A",
            Severity::Pass => "PASS",
            Severity::Info => "INFO",
            Severity::Warn => "WARN",
            Severity::Fail => "FAIL",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown severity {0:?}: expected pass, info, warn, fail or not_applicable")]
pub struct UnknownSeverity(pub String);

impl FromStr for Severity {
    type Err = UnknownSeverity;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pass" => Ok(Severity::Pass),
            "info" => Ok(Severity::Info),
            "warn" | "warning" => Ok(Severity::Warn),
            "fail" => Ok(Severity::Fail),
            "not_applicable" | "n/a" | "na" => Ok(Severity::NotApplicable),
            _ => Err(UnknownSeverity(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

impl Location {
    pub fn file(path: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            line: None,
        }
    }

    pub fn at(path: impl Into<String>, line: usize) -> Self {
        Self {
            path: path.into(),
            line: Some(line),
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{line}", self.path),
            None => f.write_str(&self.path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub check: CheckId,
    pub severity: Severity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
    pub message: String,
    pub guideline: String,
}

impl Finding {
    fn sort_key(&self) -> (CheckId, &Option<Location>, &str, Severity) {
        (self.check, &self.location, &self.message, self.severity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Check {
    pub id: CheckId,
    pub description: &'static str,
    pub default_severity: Severity,
    pub guideline: &'static str,
}

const fn check(id: CheckId, default_severity: Severity, description: &'static str, guideline: &'static str) -> Check {
    Check {
        id,
        description,
        default_severity,
        guideline,
    }
}

use CheckId::*;
use Severity::{Fail, Info, Warn};

static CATALOG: [Check; 27] = [
    check(
        Code01,
        Fail,
        "No absolute file paths in scripts",
        "code: paths relative to the supplement root",
    ),
    check(
        Code02,
        Warn,
        "No IDE-specific APIs",
        "code: runs outside any particular editor",
    ),
    check(
        Code03,
        Fail,
        "Random seed set before random number use",
        "seeds: fix the generator seed",
    ),
    check(
        Code04,
        Fail,
        "Parallel code uses reproducible per-worker streams",
        "seeds: deterministic parallel streams",
    ),
    check(
        Code05,
        Info,
        "Fork-based parallelism is platform dependent",
        "code: portable parallelization",
    ),
    check(
        Code06,
        Info,
        "Spaces after commas and around operators",
        "style: consistent spacing",
    ),
    check(
        Code07,
        Warn,
        "Long function definitions live in separate scripts",
        "style: helper functions in their own scripts",
    ),
    check(
        Code08,
        Info,
        "Few, widely used dependencies",
        "code: limited dependency footprint",
    ),
    check(
        Code09,
        Warn,
        "Imported packages covered by environment documentation",
        "readme: package versions documented",
    ),
    check(
        Code10,
        Warn,
        "No manual edits required before running",
        "code: runs without manual changes",
    ),
    check(
        Code11,
        Info,
        "Self-written functions document inputs and outputs",
        "style: documented functions",
    ),
    check(
        Intr01,
        Warn,
        "Long-running analyses store intermediate results",
        "intermediate: save raw replication results",
    ),
    check(
        Intr02,
        Warn,
        "Generation and evaluation of results in separate scripts",
        "intermediate: separate evaluation script",
    ),
    check(
        Link01,
        Fail,
        "Every declared figure and table is produced",
        "linkage: code produces every reported result",
    ),
    check(
        Link02,
        Info,
        "Output files follow figure_<n>/table_<n> naming",
        "linkage: output names match manuscript numbers",
    ),
    check(
        Readme01,
        Warn,
        "README gives the script execution order",
        "readme: execution order",
    ),
    check(
        Readme02,
        Warn,
        "README or spec file documents the software environment",
        "readme: software environment",
    ),
    check(
        Readme03,
        Warn,
        "README gives an overview of all files",
        "readme: file overview",
    ),
    check(
        Readme04,
        Warn,
        "README gives runtimes for long-running scripts",
        "readme: approximate runtimes",
    ),
    check(
        Struct01,
        Warn,
        "Top-level folders for data, code and results",
        "structure: clear top-level folders",
    ),
    check(
        Struct02,
        Warn,
        "Results split into figures, tables and intermediate subfolders",
        "structure: results subfolders",
    ),
    check(
        Struct03,
        Fail,
        "README present at the supplement root",
        "structure: a root README",
    ),
    check(
        Struct04,
        Warn,
        "No spaces in file or folder names",
        "structure: portable file names",
    ),
    check(
        Struct05,
        Warn,
        "Codebook provided when data are included",
        "structure: documented variables",
    ),
    check(
        Struct06,
        Info,
        "Related functionality consolidated into few files",
        "structure: consolidated scripts",
    ),
    check(
        Synt01,
        Warn,
        "Synthetic data provided when real data are restricted",
        "restricted data: synthetic stand-in",
    ),
    check(
        Synt02,
        Warn,
        "Real-data results shipped alongside synthetic runs",
        "restricted data: original results included",
    ),
];

/// The fixed check catalog, ordered by id.
pub fn builtin_catalog() -> &'static [Check] {
    &CATALOG
}

pub fn catalog_entry(id: CheckId) -> &'static Check {
    CATALOG
        .iter()
        .find(|c| c.id == id)
        .expect("catalog covers every check id")
}

/// The manuscript's empirical figures and tables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclaredLabels {
    pub labels: BTreeSet<ArtifactLabel>,
}

impl DeclaredLabels {
    pub fn new(labels: impl IntoIterator<Item = ArtifactLabel>) -> Self {
        Self {
            labels: labels.into_iter().collect(),
        }
    }

    /// Parses a comma-separated list such as `"Figure 1,Table 2"`.
    pub fn parse_list(list: &str) -> Result<Self, crate::supplement::InvalidLabel> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<BTreeSet<_>, _>>()
            .map(|labels| Self { labels })
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Thresholds behind the heuristic checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckThresholds {
    /// Runtime above which a script counts as heavy.
    pub heavy_minutes: f64,
    pub consolidation_min_files: usize,
    pub consolidation_min_pairs: usize,
    pub long_function_lines: usize,
    pub max_imports: usize,
}

impl Default for CheckThresholds {
    fn default() -> Self {
        Self {
            heavy_minutes: 60.0,
            consolidation_min_files: 15,
            consolidation_min_pairs: 3,
            long_function_lines: 50,
            max_imports: 15,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub severity_overrides: BTreeMap<CheckId, Severity>,
    pub thresholds: CheckThresholds,
    /// Paths (relative to the root) left out of the README file-overview check.
    pub overview_exempt: BTreeSet<String>,
}

impl CheckConfig {
    /// The override for `id` after applying the Info floor.
    pub fn effective_override(&self, id: CheckId) -> Option<Severity> {
        self.severity_overrides.get(&id).map(|&sev| {
            if id.has_info_floor() && sev < Severity::Info {
                Severity::Info
            } else {
                sev
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InventorySummary {
    pub root: String,
    pub total_files: usize,
    pub class_counts: BTreeMap<FileClass, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readme: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub inventory: InventorySummary,
    pub findings: Vec<Finding>,
    pub linkage: LinkageReport,
    pub counts: BTreeMap<Severity, usize>,
    pub tables_version: u32,
}

impl AuditReport {
    pub fn findings_for(&self, id: CheckId) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(move |f| f.check == id)
    }

    /// Worst severity reported for `id`; `None` if the check never ran.
    pub fn worst(&self, id: CheckId) -> Option<Severity> {
        self.findings_for(id).map(|f| f.severity).max()
    }

    pub fn count(&self, severity: Severity) -> usize {
        self.counts.get(&severity).copied().unwrap_or(0)
    }

    /// Highest severity among all findings.
    pub fn max_severity(&self) -> Option<Severity> {
        self.findings.iter().map(|f| f.severity).max()
    }

    /// True when every structure and README check produced an outcome.
    pub fn completeness_pass_done(&self) -> bool {
        CheckId::ALL
            .iter()
            .filter(|id| matches!(id.family(), "STRUCT" | "README"))
            .all(|id| self.worst(*id).is_some())
    }
}

pub(crate) fn severity_counts(findings: &[Finding]) -> BTreeMap<Severity, usize> {
    let mut counts: BTreeMap<Severity, usize> = Severity::ALL.iter().map(|s| (*s, 0)).collect();
    for f in findings {
        *counts.entry(f.severity).or_default() += 1;
    }
    counts
}
