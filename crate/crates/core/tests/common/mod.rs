//! Fixture helpers shared by the core and CLI integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use repro_audit::audit::{audit_supplement, AuditRun};
use repro_audit::checks::{AuditReport, CheckId, Severity};
use repro_audit::config::{resolve_config_path, AuditConfig};
use serde::Deserialize;

pub mod props;
pub mod spot;

pub const FIXTURES: [&str; 7] = [
    "fix_abs_path",
    "fix_code_only",
    "fix_compliant",
    "fix_missing_seed",
    "fix_no_readme",
    "fix_synthetic_only",
    "fix_unlinked_table",
];

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

/// Config the CLI would pick up for a fixture, ignoring the environment.
pub fn fixture_config(root: &Path) -> (AuditConfig, Option<PathBuf>) {
    match resolve_config_path(None, None, root) {
        Some(p) => (AuditConfig::load(&p).unwrap(), Some(p)),
        None => (AuditConfig::default(), None),
    }
}

pub fn audit_fixture(name: &str) -> AuditRun {
    let root = fixture(name);
    let (config, path) = fixture_config(&root);
    audit_supplement(&root, &config, path.as_deref()).unwrap()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedFinding {
    pub check: CheckId,
    pub severity: Severity,
    pub path: Option<String>,
    pub line: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub pass: BTreeSet<CheckId>,
    pub not_applicable: BTreeSet<CheckId>,
    #[serde(default)]
    pub finding: Vec<ExpectedFinding>,
}

pub fn expected(name: &str) -> Expected {
    let path = fixtures_dir().join("expected").join(format!("{name}.toml"));
    toml::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

type Key = (CheckId, Severity, Option<String>, Option<usize>);

/// Differences between a report and the annotated expectation; empty when
/// they agree exactly.
pub fn diff_expected(report: &AuditReport, exp: &Expected) -> Vec<String> {
    let mut problems = Vec::new();
    let with = |sev: Severity| -> BTreeSet<CheckId> {
        report
            .findings
            .iter()
            .filter(|f| f.severity == sev)
            .map(|f| f.check)
            .collect()
    };
    for (label, sev, want) in [
        ("PASS", Severity::Pass, &exp.pass),
        ("N/A", Severity::NotApplicable, &exp.not_applicable),
    ] {
        let got = with(sev);
        for id in got.difference(want) {
            problems.push(format!("unexpected {label} for {id}"));
        }
        for id in want.difference(&got) {
            problems.push(format!("missing {label} for {id}"));
        }
    }
    let mut got: Vec<Key> = report
        .findings
        .iter()
        .filter(|f| f.severity >= Severity::Info)
        .map(|f| {
            (
                f.check,
                f.severity,
                f.location.as_ref().map(|l| l.path.clone()),
                f.location.as_ref().and_then(|l| l.line),
            )
        })
        .collect();
    let mut want: Vec<Key> = exp
        .finding
        .iter()
        .map(|f| (f.check, f.severity, f.path.clone(), f.line))
        .collect();
    got.sort();
    want.sort();
    // multiset difference in both directions
    let mut rest = want.clone();
    for g in &got {
        match rest.iter().position(|w| w == g) {
            Some(i) => {
                rest.remove(i);
            }
            None => problems.push(format!("unexpected finding {g:?}")),
        }
    }
    for w in rest {
        problems.push(format!("missing finding {w:?}"));
    }
    problems
}
