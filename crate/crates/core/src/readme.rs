//! README analysis: execution order, environment evidence, runtime notes,
//! file overview coverage and the data-availability statement.
//!
//! Everything here is a pure function of text plus the inventory; reading the
//! README and spec files from disk is left to the caller.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::labels::find_label_mentions;
use crate::supplement::{file_name_of, ArtifactLabel, FileClass, FileEntry, SupplementInventory};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionStep {
    pub position: usize,
    pub script_ref: String,
    pub produces: Vec<ArtifactLabel>,
    /// README line the step starts on.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeclaredPackage {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvironmentEvidence {
    pub session_block_present: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_block_span: Option<(usize, usize)>,
    pub spec_files: Vec<String>,
    pub declared_packages: Vec<DeclaredPackage>,
}

impl EnvironmentEvidence {
    pub fn is_empty(&self) -> bool {
        !self.session_block_present && self.spec_files.is_empty()
    }

    pub fn declares(&self, package: &str) -> bool {
        self.declared_packages
            .iter()
            .any(|p| p.name.eq_ignore_ascii_case(package) || normalize_package(&p.name) == normalize_package(package))
    }
}

/// Python distribution names treat `-`, `_` and `.` as equivalent.
fn normalize_package(name: &str) -> String {
    name.to_ascii_lowercase().replace(['-', '.'], "_")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeNote {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script_ref: Option<String>,
    pub duration_minutes: f64,
    pub hardware_hint: String,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataAvailability {
    Open,
    RestrictedWithSynthetic,
    Restricted,
    #[default]
    Unstated,
}

impl DataAvailability {
    pub fn is_restricted(self) -> bool {
        matches!(self, Self::Restricted | Self::RestrictedWithSynthetic)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReadmeModel {
    pub steps: Vec<ExecutionStep>,
    pub environment: EnvironmentEvidence,
    pub runtime_notes: Vec<RuntimeNote>,
    pub mentioned_files: BTreeSet<String>,
    /// Inventory directories named in the text ("data/", "`results`").
    pub mentioned_dirs: BTreeSet<String>,
    pub data_availability: DataAvailability,
}

impl ReadmeModel {
    /// A file counts as described when it is named directly or its directory is.
    pub fn covers(&self, rel_path: &str) -> bool {
        if self.mentioned_files.contains(rel_path) {
            return true;
        }
        rel_path
            .rsplit_once('/')
            .is_some_and(|(dir, _)| self.mentioned_dirs.contains(dir))
    }

    /// Runtime notes attributed to `rel_path`.
    pub fn runtime_for<'a>(&'a self, rel_path: &'a str) -> impl Iterator<Item = &'a RuntimeNote> {
        self.runtime_notes
            .iter()
            .filter(move |n| n.script_ref.as_deref().is_some_and(|s| same_script(s, rel_path)))
    }
}

/// Compares a path as written in prose with an inventory path.
pub fn same_script(written: &str, rel_path: &str) -> bool {
    let written = written.trim_start_matches("./").replace('\\', "/");
    written == rel_path || (!written.contains('/') && written == file_name_of(rel_path))
}

/// Decodes README bytes, replacing invalid sequences.
pub fn decode_text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

/// The authoritative README: the first root-level one in path order.
pub fn find_readme(inventory: &SupplementInventory) -> Option<&FileEntry> {
    inventory.of_class(FileClass::Readme).next()
}

static CODE_PATH: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)[A-Za-z0-9_./\\-]*[A-Za-z0-9_]\.(?:r|py|sh|bash|rmd|qmd|jl)\b").unwrap());
static STEP: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*(?:[-*+]\s+)?(?:step\s*)?([0-9]+)[.):]\s+(.+)$").unwrap());

fn code_paths(line: &str) -> impl Iterator<Item = regex::Match<'_>> {
    CODE_PATH
        .find_iter(line)
        .filter(move |m| !line[m.end()..].starts_with(|c: char| c.is_alphanumeric() || c == '_'))
}

/// Parses the README into a [`ReadmeModel`]. Never fails; missing structure
/// just leaves fields empty.
pub fn parse_readme(text: &str, inventory: &SupplementInventory) -> ReadmeModel {
    let lines: Vec<&str> = text.lines().collect();
    let (session_block_span, declared_packages) = find_session_block(&lines);
    ReadmeModel {
        steps: extract_steps(&lines),
        environment: EnvironmentEvidence {
            session_block_present: session_block_span.is_some(),
            session_block_span,
            spec_files: Vec::new(),
            declared_packages,
        },
        runtime_notes: extract_runtime_notes(text),
        mentioned_files: inventory
            .entries
            .iter()
            .filter(|e| mentions(text, &e.rel_path))
            .map(|e| e.rel_path.clone())
            .collect(),
        mentioned_dirs: inventory
            .directories
            .iter()
            .filter(|d| mentions_dir(text, d))
            .cloned()
            .collect(),
        data_availability: data_availability(text),
    }
}

fn extract_steps(lines: &[&str]) -> Vec<ExecutionStep> {
    let mut steps = Vec::new();
    let mut idx = 0;
    while idx < lines.len() {
        let Some(caps) = STEP.captures(lines[idx]) else {
            idx += 1;
            continue;
        };
        let item = caps.get(2).unwrap().as_str();
        let Some(path) = code_paths(item).next() else {
            idx += 1;
            continue;
        };
        let mut produces = find_label_mentions(item);
        let start = idx;
        idx += 1;
        // indented continuation lines belong to the same item
        while idx < lines.len()
            && !lines[idx].trim().is_empty()
            && lines[idx].starts_with([' ', '\t'])
            && !STEP.is_match(lines[idx])
        {
            for label in find_label_mentions(lines[idx]) {
                if !produces.contains(&label) {
                    produces.push(label);
                }
            }
            idx += 1;
        }
        steps.push(ExecutionStep {
            position: steps.len() + 1,
            script_ref: path.as_str().to_string(),
            produces,
            line: start + 1,
        });
    }
    steps
}

fn is_path_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.' | b'/' | b'\\')
}

/// True when `needle` occurs in `text` as a whole path, not as part of a
/// longer one. A trailing `.` is allowed as sentence punctuation.
fn mentions(text: &str, needle: &str) -> bool {
    let bytes = text.as_bytes();
    text.match_indices(needle).any(|(i, _)| {
        let end = i + needle.len();
        let before_ok = i == 0 || !is_path_byte(bytes[i - 1]) || (i >= 2 && &text[i - 2..i] == "./");
        let after_ok = match bytes.get(end) {
            None => true,
            Some(b'.') => !bytes.get(end + 1).is_some_and(|b| is_path_byte(*b)),
            Some(b) => !is_path_byte(*b) || (*b == b'/' && needle.ends_with('/')),
        };
        before_ok && after_ok
    })
}

fn mentions_dir(text: &str, dir: &str) -> bool {
    mentions(text, &format!("{dir}/"))
        || text.contains(&format!("`{dir}`"))
        || (dir.contains('/') && mentions(text, dir))
}

static PY_PACKAGE_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*([A-Za-z][\w.\-]*)\s+v?([0-9][\w.+\-]*)\s*$").unwrap());
static R_PACKAGE_TOKEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^([A-Za-z][A-Za-z0-9.]*)_([0-9][0-9A-Za-z.\-]*)$").unwrap());

const SESSION_BLOCK_MAX_LINES: usize = 200;

/// Locates a pasted session dump and returns its 1-based line span plus the
/// attached packages it lists.
fn find_session_block(lines: &[&str]) -> (Option<(usize, usize)>, Vec<DeclaredPackage>) {
    for (i, line) in lines.iter().enumerate() {
        let trimmed = line.trim_start();
        let r_block = trimmed.starts_with("R version ");
        let py_block = {
            let lower = trimmed.to_ascii_lowercase();
            lower.starts_with("session information") || lower.starts_with("session_info")
        };
        if !r_block && !py_block {
            continue;
        }
        let end = block_end(lines, i);
        let body = &lines[i..=end];
        let packages = if r_block {
            if !body.iter().any(|l| {
                let t = l.trim_start();
                t.starts_with("attached base packages:") || t.starts_with("other attached packages:")
            }) {
                continue;
            }
            r_session_packages(body)
        } else {
            let packages: Vec<DeclaredPackage> = body[1..]
                .iter()
                .filter_map(|l| PY_PACKAGE_LINE.captures(l))
                .map(|c| DeclaredPackage {
                    name: c[1].to_string(),
                    version: Some(c[2].to_string()),
                })
                .collect();
            if packages.is_empty() {
                continue;
            }
            packages
        };
        return (Some((i + 1, end + 1)), dedup_packages(packages));
    }
    (None, Vec::new())
}

/// Last line index of a block starting at `start`: stops before a code fence,
/// heading, or two consecutive blank lines, and after at most 200 lines.
fn block_end(lines: &[&str], start: usize) -> usize {
    let limit = (start + SESSION_BLOCK_MAX_LINES).min(lines.len());
    let mut last = start;
    let mut blanks = 0;
    for (j, line) in lines.iter().enumerate().take(limit).skip(start + 1) {
        let t = line.trim_start();
        if t.starts_with("```") || t.starts_with("~~~") || line.starts_with('#') {
            break;
        }
        if t.is_empty() {
            blanks += 1;
            if blanks == 2 {
                break;
            }
            continue;
        }
        blanks = 0;
        last = j;
    }
    last
}

fn r_session_packages(body: &[&str]) -> Vec<DeclaredPackage> {
    let mut out = Vec::new();
    let mut inside = false;
    for line in body {
        let t = line.trim();
        if t.starts_with("other attached packages:") {
            inside = true;
            continue;
        }
        if !inside {
            continue;
        }
        if t.is_empty() || t.ends_with(':') {
            break;
        }
        for tok in t.split_whitespace() {
            if let Some(c) = R_PACKAGE_TOKEN.captures(tok) {
                out.push(DeclaredPackage {
                    name: c[1].to_string(),
                    version: Some(c[2].to_string()),
                });
            }
        }
    }
    out
}

/// Deduplicates by name, keeping the last occurrence, sorted by name.
fn dedup_packages(packages: Vec<DeclaredPackage>) -> Vec<DeclaredPackage> {
    let map: BTreeMap<String, Option<String>> = packages.into_iter().map(|p| (p.name, p.version)).collect();
    map.into_iter()
        .map(|(name, version)| DeclaredPackage { name, version })
        .collect()
}

/// Merges README session evidence with the inventory's environment spec files.
///
/// `spec_texts` maps spec-file paths to their contents; files missing from it
/// still count as evidence but contribute no packages.
pub fn detect_environment_evidence(
    readme: &ReadmeModel,
    inventory: &SupplementInventory,
    spec_texts: &BTreeMap<String, String>,
) -> EnvironmentEvidence {
    let spec_files: Vec<String> = inventory
        .of_class(FileClass::EnvironmentSpec)
        .map(|e| e.rel_path.clone())
        .collect();
    let mut packages = readme.environment.declared_packages.clone();
    for path in &spec_files {
        if let Some(text) = spec_texts.get(path) {
            packages.extend(parse_spec_packages(file_name_of(path), text));
        }
    }
    EnvironmentEvidence {
        session_block_present: readme.environment.session_block_present,
        session_block_span: readme.environment.session_block_span,
        spec_files,
        declared_packages: dedup_packages(packages),
    }
}

static DCF_PACKAGE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"(?m)^\s*"?Package"?\s*:\s*"?([A-Za-z][\w.\-]*)"?"#).unwrap());
static DCF_VERSION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"^\s*"?Version"?\s*:\s*"?([0-9][\w.\-]*)"?"#).unwrap());
static PINNED: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\s*(?:-\s*)?([A-Za-z][\w.\-]*)(?:\[[^\]]*\])?\s*(?:(?:==|>=|<=|~=|!=|=|>|<)\s*([0-9][\w.\-*+]*))?\s*(?:[;#].*)?$")
        .unwrap()
});
static R_DEPENDENCY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*([A-Za-z][A-Za-z0-9.]*)\s*(?:\(\s*[<>=]*\s*([0-9][\w.\-]*)\s*\))?\s*$").unwrap());
static R_INSTALL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"install(?:\.packages|_version|_github)?\s*\(\s*(?:c\s*\()?\s*['"]([A-Za-z][A-Za-z0-9.]*)['"](?:\s*,\s*(?:version\s*=\s*)?['"]([0-9][\w.\-]*)['"])?"#).unwrap()
});

/// Package declarations in one environment spec file.
pub fn parse_spec_packages(file_name: &str, text: &str) -> Vec<DeclaredPackage> {
    let lower = file_name.to_ascii_lowercase();
    let mut out = Vec::new();
    match lower.as_str() {
        "renv.lock" => out.extend(lockfile_packages(text)),
        "description" => out.extend(description_packages(text)),
        "requirements.txt" => {
            for line in text.lines() {
                let t = line.trim();
                if t.is_empty() || t.starts_with('#') || t.starts_with('-') {
                    continue;
                }
                out.extend(pinned(t));
            }
        }
        "environment.yml" => {
            for line in text.lines() {
                let t = line.trim_start();
                if !t.starts_with('-') || t.trim_end().ends_with(':') {
                    continue;
                }
                let item = t.trim_start_matches('-').trim();
                let item = item.rsplit("::").next().unwrap_or(item);
                out.extend(pinned(item));
            }
        }
        "dockerfile" => {
            for line in text.lines() {
                for c in R_INSTALL.captures_iter(line) {
                    out.push(DeclaredPackage {
                        name: c[1].to_string(),
                        version: c.get(2).map(|m| m.as_str().to_string()),
                    });
                }
                if let Some((_, rest)) = line.split_once("pip install") {
                    for tok in rest.split_whitespace() {
                        if tok.starts_with('-') || tok == "&&" || tok == "\\" {
                            if tok == "&&" {
                                break;
                            }
                            continue;
                        }
                        out.extend(pinned(tok));
                    }
                }
            }
        }
        _ => {}
    }
    if out.is_empty() {
        out.extend(dcf_pairs(text));
    }
    out
}

fn pinned(item: &str) -> Option<DeclaredPackage> {
    let c = PINNED.captures(item)?;
    Some(DeclaredPackage {
        name: c[1].to_string(),
        version: c.get(2).map(|m| m.as_str().to_string()),
    })
}

fn lockfile_packages(text: &str) -> Vec<DeclaredPackage> {
    let Ok(value) = serde_json::from_str::<serde_json::Value>(text) else {
        return dcf_pairs(text);
    };
    let Some(packages) = value.get("Packages").and_then(|p| p.as_object()) else {
        return Vec::new();
    };
    packages
        .iter()
        .map(|(key, record)| DeclaredPackage {
            name: record
                .get("Package")
                .and_then(|v| v.as_str())
                .unwrap_or(key)
                .to_string(),
            version: record.get("Version").and_then(|v| v.as_str()).map(str::to_string),
        })
        .collect()
}

/// `Package:` lines, each paired with the next `Version:` line before the
/// following `Package:`.
fn dcf_pairs(text: &str) -> Vec<DeclaredPackage> {
    let mut out: Vec<DeclaredPackage> = Vec::new();
    for line in text.lines() {
        if let Some(c) = DCF_PACKAGE.captures(line) {
            out.push(DeclaredPackage {
                name: c[1].to_string(),
                version: None,
            });
        } else if let Some(c) = DCF_VERSION.captures(line) {
            if let Some(last) = out.last_mut() {
                last.version.get_or_insert_with(|| c[1].to_string());
            }
        }
    }
    out
}

fn description_packages(text: &str) -> Vec<DeclaredPackage> {
    let mut out = Vec::new();
    let mut field = String::new();
    let mut value = String::new();
    let flush = |field: &str, value: &str, out: &mut Vec<DeclaredPackage>| {
        if matches!(field, "Imports" | "Depends" | "LinkingTo") {
            for dep in value.split(',') {
                if let Some(c) = R_DEPENDENCY.captures(dep) {
                    if &c[1] != "R" {
                        out.push(DeclaredPackage {
                            name: c[1].to_string(),
                            version: c.get(2).map(|m| m.as_str().to_string()),
                        });
                    }
                }
            }
        }
    };
    for line in text.lines() {
        if line.starts_with([' ', '\t']) {
            value.push(' ');
            value.push_str(line.trim());
        } else if let Some((k, v)) = line.split_once(':') {
            flush(&field, &value, &mut out);
            field = k.trim().to_string();
            value = v.trim().to_string();
        }
    }
    flush(&field, &value, &mut out);
    out
}

static DURATION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)(?:(?:~|approx\.?|approximately|about|around|roughly|ca\.)\s*)?\b([0-9]+(?:\.[0-9]+)?)\s*(seconds?|secs?|minutes?|mins?|hours?|hrs?)\b")
        .unwrap()
});
static HARDWARE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*(?:on|using)\s+([^.;),]*)").unwrap());

/// Finds "<n> seconds|minutes|hours" runtime statements, in order.
pub fn extract_runtime_notes(text: &str) -> Vec<RuntimeNote> {
    let lines: Vec<&str> = text.lines().collect();
    let mut notes = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        for caps in DURATION.captures_iter(line) {
            let whole = caps.get(0).unwrap();
            let value: f64 = caps[1].parse().unwrap_or(0.0);
            let unit = caps[2].to_ascii_lowercase();
            let duration_minutes = if unit.starts_with('s') {
                value / 60.0
            } else if unit.starts_with('h') {
                value * 60.0
            } else {
                value
            };
            let hardware_hint = HARDWARE
                .captures(&line[whole.end()..])
                .map(|c| c[1].trim().to_string())
                .unwrap_or_default();
            let script_ref = code_paths(&line[..whole.start()])
                .last()
                .or_else(|| i.checked_sub(1).and_then(|p| code_paths(lines[p]).last()))
                .map(|m| m.as_str().to_string());
            notes.push(RuntimeNote {
                script_ref,
                duration_minutes,
                hardware_hint,
                line: i + 1,
            });
        }
    }
    notes
}

const RESTRICTED: &[&str] = &[
    "cannot be shared",
    "can not be shared",
    "cannot be made available",
    "cannot be made public",
    "can't be shared",
    "not be shared",
    "not publicly available",
    "not openly available",
    "restricted",
    "confidential",
    "proprietary",
];
const SYNTHETIC: &[&str] = &["synthetic", "pseudo data", "pseudo-data", "pseudodata"];
const OPEN: &[&str] = &[
    "openly available",
    "publicly available",
    "freely available",
    "open data",
    "data are included",
    "data is included",
];

/// Keyword-based reading of the data availability statement.
pub fn data_availability(text: &str) -> DataAvailability {
    let lower = text.to_lowercase();
    let has = |words: &[&str]| words.iter().any(|w| lower.contains(w));
    if has(RESTRICTED) {
        if has(SYNTHETIC) {
            DataAvailability::RestrictedWithSynthetic
        } else {
            DataAvailability::Restricted
        }
    } else if has(OPEN) {
        DataAvailability::Open
    } else {
        DataAvailability::Unstated
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::supplement::classify_entry;

    fn inventory(paths: &[&str], dirs: &[&str]) -> SupplementInventory {
        SupplementInventory::from_entries(
            "/x",
            paths.iter().map(|p| classify_entry(p.to_string(), 1, None)).collect(),
            dirs.iter().map(|d| d.to_string()).collect(),
        )
    }

    #[test]
    fn ordered_steps() {
        let m = parse_readme(
            "1. code/01_sim.R\n2. code/02_figs.R (creates Figure 1, Table 1)",
            &inventory(&[], &[]),
        );
        let steps: Vec<_> = m
            .steps
            .iter()
            .map(|s| (s.position, s.script_ref.as_str(), s.produces.clone()))
            .collect();
        assert_eq!(
            steps,
            vec![
                (1, "code/01_sim.R", vec![]),
                (
                    2,
                    "code/02_figs.R",
                    vec![ArtifactLabel::figure(1).unwrap(), ArtifactLabel::table(1).unwrap()]
                ),
            ]
        );
    }

    #[test]
    fn step_variants_and_continuations() {
        let text = "Step 1: run `code/a.py`\n   which makes Table 2\n- 2) code/b.R\n3. Read the notes\n10. sh run.sh\n";
        let m = parse_readme(text, &inventory(&[], &[]));
        let refs: Vec<_> = m
            .steps
            .iter()
            .map(|s| (s.position, s.script_ref.as_str(), s.line))
            .collect();
        assert_eq!(refs, [(1, "code/a.py", 1), (2, "code/b.R", 3), (3, "run.sh", 5)]);
        assert_eq!(m.steps[0].produces, vec![ArtifactLabel::table(2).unwrap()]);
        for s in &m.steps {
            assert!(text.contains(&s.script_ref));
        }
    }

    #[test]
    fn r_session_block() {
        let text = "# Env\n\n```\nR version 4.3.1 (2023-06-16)\nPlatform: x86_64-pc-linux-gnu\n\nattached base packages:\n[1] stats     graphics  utils     methods   base\n\nother attached packages:\n[1] ggplot2_3.4.1 dplyr_1.1.2\n[3] data.table_1.14.8\n\nloaded via a namespace (and not attached):\n[1] rlang_1.1.1\n```\n";
        let m = parse_readme(text, &inventory(&[], &[]));
        assert!(m.environment.session_block_present);
        assert_eq!(m.environment.session_block_span, Some((4, 15)));
        let names: Vec<_> = m
            .environment
            .declared_packages
            .iter()
            .map(|p| (p.name.as_str(), p.version.as_deref()))
            .collect();
        assert_eq!(
            names,
            [
                ("data.table", Some("1.14.8")),
                ("dplyr", Some("1.1.2")),
                ("ggplot2", Some("3.4.1"))
            ]
        );
    }

    #[test]
    fn version_line_without_packages_is_not_a_block() {
        let m = parse_readme("Tested with R version 4.2 or later.\n", &inventory(&[], &[]));
        assert!(!m.environment.session_block_present);
        assert_eq!(m.environment.session_block_span, None);
    }

    #[test]
    fn python_session_info() {
        let text = "Session information\n-----\nnumpy      1.24.2\npandas     2.0.1\n-----\nPython 3.11.4\n";
        let m = parse_readme(text, &inventory(&[], &[]));
        assert!(m.environment.session_block_present);
        assert!(m.environment.declares("numpy"));
        assert!(m.environment.declares("pandas"));
    }

    #[test]
    fn runtime_notes() {
        let n = extract_runtime_notes("Runtime: ~5 minutes on a standard laptop");
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].duration_minutes, 5.0);
        assert_eq!(n[0].hardware_hint, "a standard laptop");
        assert_eq!(n[0].script_ref, None);

        let n = extract_runtime_notes("code/01_sim.R: ~2 hours on a 32-core server");
        assert_eq!(n[0].script_ref.as_deref(), Some("code/01_sim.R"));
        assert_eq!(n[0].duration_minutes, 120.0);
        assert_eq!(n[0].hardware_hint, "a 32-core server");

        let n = extract_runtime_notes("takes about 30 seconds");
        assert_eq!(
            (
                n[0].script_ref.clone(),
                n[0].duration_minutes,
                n[0].hardware_hint.as_str()
            ),
            (None, 0.5, "")
        );

        assert!(extract_runtime_notes("no durations here, 1000 replications").is_empty());
    }

    #[test]
    fn runtime_previous_line_attribution() {
        let n = extract_runtime_notes("* code/02_fit.py\n  runs for approx. 90 min.\n");
        assert_eq!(n[0].script_ref.as_deref(), Some("code/02_fit.py"));
        assert_eq!(n[0].duration_minutes, 90.0);
    }

    #[test]
    fn mentioned_files_and_dirs() {
        let inv = inventory(
            &["code/01_sim.R", "code/01_sim.Rmd", "data/d.csv", "data/d.csv.bak"],
            &["code", "data", "results", "results/intermediate"],
        );
        let m = parse_readme(
            "Run code/01_sim.R. Data in data/d.csv; `results` holds output, results/intermediate too.",
            &inv,
        );
        assert_eq!(
            m.mentioned_files.iter().map(String::as_str).collect::<Vec<_>>(),
            ["code/01_sim.R", "data/d.csv"]
        );
        assert_eq!(
            m.mentioned_dirs.iter().map(String::as_str).collect::<Vec<_>>(),
            ["results", "results/intermediate"]
        );
        assert!(m.covers("results/intermediate/rep_1.rds"));
        assert!(!m.covers("code/01_sim.Rmd"));
        for f in &m.mentioned_files {
            assert!(inv.contains(f));
        }
    }

    #[test]
    fn empty_readme() {
        let m = parse_readme("", &inventory(&["code/a.R"], &["code"]));
        assert_eq!(m, ReadmeModel::default());
        assert_eq!(m.data_availability, DataAvailability::Unstated);
    }

    #[test]
    fn availability_keywords() {
        assert_eq!(
            data_availability("All data are openly available."),
            DataAvailability::Open
        );
        assert_eq!(
            data_availability("The data are not publicly available."),
            DataAvailability::Restricted
        );
        assert_eq!(
            data_availability("The data cannot be shared; we provide synthetic data instead."),
            DataAvailability::RestrictedWithSynthetic
        );
        assert_eq!(data_availability("Hello"), DataAvailability::Unstated);
    }

    #[test]
    fn spec_file_parsers() {
        let lock =
            r#"{"R": {"Version": "4.3.1"}, "Packages": {"ggplot2": {"Package": "ggplot2", "Version": "3.4.1"}}}"#;
        assert_eq!(
            parse_spec_packages("renv.lock", lock),
            vec![DeclaredPackage {
                name: "ggplot2".into(),
                version: Some("3.4.1".into())
            }]
        );
        let req = "numpy==1.24.2\n# comment\npandas>=2.0\nscipy\n-r other.txt\n";
        let got: Vec<_> = parse_spec_packages("requirements.txt", req)
            .into_iter()
            .map(|p| (p.name, p.version))
            .collect();
        assert_eq!(
            got,
            [
                ("numpy".to_string(), Some("1.24.2".to_string())),
                ("pandas".to_string(), Some("2.0".to_string())),
                ("scipy".to_string(), None)
            ]
        );
        let desc = "Package: sim\nVersion: 0.1\nDepends: R (>= 4.0)\nImports: dplyr (>= 1.1.0),\n    ggplot2\n";
        let names: Vec<_> = parse_spec_packages("DESCRIPTION", desc)
            .into_iter()
            .map(|p| p.name)
            .collect();
        assert_eq!(names, ["dplyr", "ggplot2"]);
        let env =
            "name: x\ndependencies:\n  - python=3.11\n  - conda-forge::numpy=1.26\n  - pip:\n    - seaborn==0.13.0\n";
        let names: Vec<_> = parse_spec_packages("environment.yml", env)
            .into_iter()
            .map(|p| p.name)
            .collect();
        assert_eq!(names, ["python", "numpy", "seaborn"]);
        let docker =
            "FROM rocker/r-ver:4.3.1\nRUN R -e \"install.packages('dplyr')\"\nRUN pip install numpy==1.26 && echo ok\n";
        let names: Vec<_> = parse_spec_packages("Dockerfile", docker)
            .into_iter()
            .map(|p| p.name)
            .collect();
        assert_eq!(names, ["dplyr", "numpy"]);
    }

    #[test]
    fn environment_merge_last_wins() {
        let inv = inventory(&["renv.lock", "code/a.R"], &["code"]);
        let mut readme = parse_readme("", &inv);
        readme.environment.declared_packages = vec![DeclaredPackage {
            name: "ggplot2".into(),
            version: Some("3.0.0".into()),
        }];
        let mut texts = BTreeMap::new();
        texts.insert(
            "renv.lock".to_string(),
            r#"{"Packages": {"ggplot2": {"Package": "ggplot2", "Version": "3.4.1"}}}"#.to_string(),
        );
        let ev = detect_environment_evidence(&readme, &inv, &texts);
        assert!(!ev.session_block_present);
        assert_eq!(ev.spec_files, ["renv.lock"]);
        assert_eq!(ev.declared_packages[0].version.as_deref(), Some("3.4.1"));
        let none = detect_environment_evidence(
            &parse_readme("", &inventory(&[], &[])),
            &inventory(&[], &[]),
            &BTreeMap::new(),
        );
        assert!(none.is_empty());
    }

    #[test]
    fn readme_discovery() {
        let inv = inventory(&["README.txt", "README.md", "code/README.md"], &["code"]);
        assert_eq!(find_readme(&inv).unwrap().rel_path, "README.md");
    }
}
