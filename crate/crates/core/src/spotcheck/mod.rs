//! Spot checks: re-run a few replications and compare their fresh output
//! with the stored intermediate results.
//!
//! Manifest format (UTF-8, tab separated):
//!
//! ```text
//! spotcheck v1
//! # comment
//! n_full=1000
//! working_dir=code
//! rep_0001	101	numeric_table	1e-8	0	results/intermediate/rep_0001.csv	Rscript sim.R {id} {seed} {out}
//! [reduced]
//! red_0001	101	bitwise	0	0	results/reduced/rep_0001.rds	Rscript sim.R --reduced {id} {seed} {out}
//! ```

#![allow(clippy::tabs_in_doc_comments)]

mod compare;
mod run;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ManifestError, SelectionError};

pub use compare::{compare_outputs, Comparison};
pub use run::{
    run_spotcheck, summarize, CommandRunner, OutcomeStatus, Planned, RunOptions, RunOutput, RunStatus, ScriptedRunner,
    ShellRunner, SpotCheckOutcome, DEFAULT_TIMEOUT_SECS,
};

pub const MANIFEST_HEADER: &str = "spotcheck v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    Bitwise,
    NumericTable,
}

impl FromStr for Comparator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bitwise" => Ok(Comparator::Bitwise),
            "numeric_table" => Ok(Comparator::NumericTable),
            _ => Err(format!("unknown comparator {s:?}; expected bitwise or numeric_table")),
        }
    }
}

/// Integer seed or a named random-number stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seed {
    Int(i64),
    Stream(String),
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Seed::Int(n) => write!(f, "{n}"),
            Seed::Stream(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationEntry {
    pub id: String,
    pub seed: Seed,
    pub command_template: String,
    pub expected_output: String,
    pub comparator: Comparator,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl ReplicationEntry {
    /// Fills `{id}`, `{seed}` and `{out}` in the command template.
    pub fn command(&self, out: &str) -> String {
        let mut cmd = String::with_capacity(self.command_template.len() + out.len());
        let mut rest = self.command_template.as_str();
        while let Some(open) = rest.find('{') {
            cmd.push_str(&rest[..open]);
            let close = open + rest[open..].find('}').expect("placeholders validated at parse time");
            match &rest[open + 1..close] {
                "id" => cmd.push_str(&self.id),
                "seed" => cmd.push_str(&self.seed.to_string()),
                "out" => cmd.push_str(out),
                other => unreachable!("placeholder {other} rejected at parse time"),
            }
            rest = &rest[close + 1..];
        }
        cmd.push_str(rest);
        cmd
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotCheckManifest {
    pub entries: Vec<ReplicationEntry>,
    pub working_dir: String,
    pub n_full: Option<u64>,
    pub reduced_entries: Option<Vec<ReplicationEntry>>,
}

impl SpotCheckManifest {
    pub fn entry(&self, id: &str) -> Option<&ReplicationEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Manifest position of `entry`: main entries first, then the reduced set.
    pub(crate) fn position(&self, entry: &ReplicationEntry) -> usize {
        if let Some(i) = self.entries.iter().position(|e| e == entry) {
            return i;
        }
        self.reduced_entries
            .iter()
            .flatten()
            .position(|e| e == entry)
            .map_or(usize::MAX, |i| self.entries.len() + i)
    }
}

fn malformed(line: usize, message: impl Into<String>) -> ManifestError {
    ManifestError::Malformed {
        line,
        message: message.into(),
    }
}

fn check_placeholders(template: &str, line: usize) -> Result<(), ManifestError> {
    let mut rest = template;
    let mut has_out = false;
    loop {
        let open = rest.find('{');
        let close = rest.find('}');
        match (open, close) {
            (None, None) => break,
            (Some(o), Some(c)) if o < c => {
                let name = &rest[o + 1..c];
                if name.contains('{') {
                    return Err(malformed(line, "nested '{' in command template"));
                }
                match name {
                    "out" => has_out = true,
                    "id" | "seed" => {}
                    _ => return Err(malformed(line, format!("unknown placeholder {{{name}}}"))),
                }
                rest = &rest[c + 1..];
            }
            _ => return Err(malformed(line, "unbalanced braces in command template")),
        }
    }
    if !has_out {
        return Err(malformed(line, "command template must contain {out}"));
    }
    Ok(())
}

fn parse_tol(field: &str, name: &str, line: usize) -> Result<f64, ManifestError> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| malformed(line, format!("{name} {field:?} is not a number")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(malformed(line, format!("{name} must be finite and >= 0, got {field}")));
    }
    Ok(v)
}

fn parse_rel_path(field: &str, name: &str, line: usize) -> Result<String, ManifestError> {
    let p = field.trim().replace('\\', "/");
    if p.is_empty() {
        return Err(malformed(line, format!("{name} is empty")));
    }
    if p.starts_with('/') || p.split('/').any(|s| s == "..") || p.as_bytes().get(1) == Some(&b':') {
        return Err(malformed(
            line,
            format!("{name} {field:?} must be relative to the supplement root"),
        ));
    }
    Ok(p)
}

fn parse_entry(raw: &str, line: usize) -> Result<ReplicationEntry, ManifestError> {
    let fields: Vec<&str> = raw.splitn(7, '\t').collect();
    if fields.len() != 7 {
        return Err(malformed(
            line,
            format!("expected 7 tab-separated fields, found {}", fields.len()),
        ));
    }
    let id = fields[0].trim();
    if id.is_empty() || id.chars().any(char::is_whitespace) {
        return Err(malformed(line, format!("invalid replication id {:?}", fields[0])));
    }
    let seed_text = fields[1].trim();
    if seed_text.is_empty() {
        return Err(malformed(line, "seed is empty"));
    }
    let seed = seed_text
        .parse::<i64>()
        .map_or_else(|_| Seed::Stream(seed_text.to_string()), Seed::Int);
    let comparator = fields[2].trim().parse().map_err(|e: String| malformed(line, e))?;
    let abs_tol = parse_tol(fields[3], "abs_tol", line)?;
    let rel_tol = parse_tol(fields[4], "rel_tol", line)?;
    let expected_output = parse_rel_path(fields[5], "expected_output", line)?;
    let command_template = fields[6].trim().to_string();
    if command_template.is_empty() {
        return Err(malformed(line, "command template is empty"));
    }
    check_placeholders(&command_template, line)?;
    Ok(ReplicationEntry {
        id: id.to_string(),
        seed,
        command_template,
        expected_output,
        comparator,
        abs_tol,
        rel_tol,
    })
}

/// Parses and validates a manifest. Ids must be unique within each section.
pub fn parse_manifest(text: &str) -> Result<SpotCheckManifest, ManifestError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut header_seen = false;
    let mut entries = Vec::new();
    let mut reduced: Option<Vec<ReplicationEntry>> = None;
    let mut reduced_line = 0;
    let mut working_dir = None;
    let mut n_full = None;
    let mut seen_main = std::collections::BTreeSet::new();
    let mut seen_reduced = std::collections::BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !header_seen {
            if trimmed != MANIFEST_HEADER {
                return Err(malformed(line, format!("expected header {MANIFEST_HEADER:?}")));
            }
            header_seen = true;
            continue;
        }
        if trimmed == "[reduced]" {
            if reduced.is_some() {
                return Err(malformed(line, "second [reduced] section"));
            }
            reduced = Some(Vec::new());
            reduced_line = line;
            continue;
        }
        if let Some(v) = trimmed.strip_prefix("n_full=") {
            if n_full.is_some() {
                return Err(malformed(line, "n_full given twice"));
            }
            n_full = Some(
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| malformed(line, format!("n_full {v:?} is not a nonnegative integer")))?,
            );
            continue;
        }
        if let Some(v) = trimmed.strip_prefix("working_dir=") {
            if working_dir.is_some() {
                return Err(malformed(line, "working_dir given twice"));
            }
            working_dir = Some(if v.trim() == "." {
                ".".to_string()
            } else {
                parse_rel_path(v, "working_dir", line)?
            });
            continue;
        }
        let entry = parse_entry(raw, line)?;
        let (seen, list) = match reduced.as_mut() {
            Some(r) => (&mut seen_reduced, r),
            None => (&mut seen_main, &mut entries),
        };
        if !seen.insert(entry.id.clone()) {
            return Err(ManifestError::DuplicateId { line, id: entry.id });
        }
        list.push(entry);
    }
    if !header_seen {
        return Err(malformed(1, format!("missing header {MANIFEST_HEADER:?}")));
    }
    if reduced.as_ref().is_some_and(Vec::is_empty) {
        return Err(malformed(reduced_line, "[reduced] section has no entries"));
    }
    if let Some(n) = n_full {
        if (n as usize) < entries.len() {
            return Err(malformed(
                0,
                format!("n_full={n} is smaller than the {} listed replications", entries.len()),
            ));
        }
    }
    Ok(SpotCheckManifest {
        entries,
        working_dir: working_dir.unwrap_or_else(|| ".".to_string()),
        n_full,
        reduced_entries: reduced,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    Explicit(Vec<String>),
    Random { k: usize, audit_seed: u64 },
    Reduced,
    All,
}

/// SplitMix64 generator used for random selection.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Indices chosen by a partial Fisher-Yates shuffle of `0..n`, where the
/// swap partner for slot `i` is `i + next % (n - i)`. Returned sorted.
pub fn random_indices(n: usize, k: usize, audit_seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = SplitMix64::new(audit_seed);
    for i in 0..k.min(n) {
        let j = i + (rng.next_u64() % (n - i) as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(k.min(n));
    idx.sort_unstable();
    idx
}

/// Picks the replications to re-run. Random picks come back in manifest order.
pub fn select_replications(
    manifest: &SpotCheckManifest,
    selection: &Selection,
) -> Result<Vec<ReplicationEntry>, SelectionError> {
    match selection {
        Selection::All => Ok(manifest.entries.clone()),
        Selection::Explicit(ids) => ids
            .iter()
            .map(|id| {
                manifest
                    .entry(id)
                    .or_else(|| manifest.reduced_entries.iter().flatten().find(|e| &e.id == id))
                    .cloned()
                    .ok_or_else(|| SelectionError::UnknownId(id.clone()))
            })
            .collect(),
        Selection::Random { k, audit_seed } => {
            let n = manifest.entries.len();
            if *k > n {
                return Err(SelectionError::KTooLarge { k: *k, available: n });
            }
            Ok(random_indices(n, *k, *audit_seed)
                .into_iter()
                .map(|i| manifest.entries[i].clone())
                .collect())
        }
        Selection::Reduced => manifest.reduced_entries.clone().ok_or(SelectionError::NoReducedSet),
    }
}
