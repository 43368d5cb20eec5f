//! Supplement inventory: a deterministic, classified listing of every file
//! under a supplement root.
//!
//! Classification is purely name based. The rules are applied in a fixed
//! precedence order (see [`classify_file`]) so every path maps to exactly one
//! [`FileClass`].

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Component, Path, PathBuf};
use std::str::FromStr;
use std::sync::LazyLock;

use globset::{Glob, GlobSet, GlobSetBuilder};
use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use walkdir::WalkDir;

use crate::error::ScanError;

/// Version-control metadata directories skipped by default.
pub const DEFAULT_IGNORE_GLOBS: &[&str] = &["**/.git", "**/.hg", "**/.svn", "**/.bzr"];

const DEFAULT_SNIFF_BYTES: u64 = 1_048_576;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanConfig {
    pub root: PathBuf,
    pub ignore_globs: Vec<String>,
    pub follow_symlinks: bool,
    /// Extensionless files up to this size are read to look for a shebang.
    pub max_file_bytes_for_content_sniff: u64,
}

impl ScanConfig {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            ignore_globs: DEFAULT_IGNORE_GLOBS.iter().map(|s| s.to_string()).collect(),
            follow_symlinks: false,
            max_file_bytes_for_content_sniff: DEFAULT_SNIFF_BYTES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FileClass {
    Code,
    Data,
    Readme,
    Codebook,
    FigureOutput,
    TableOutput,
    IntermediateResult,
    EnvironmentSpec,
    Document,
    Other,
}

impl FileClass {
    pub const ALL: [FileClass; 10] = [
        FileClass::Code,
        FileClass::Data,
        FileClass::Readme,
        FileClass::Codebook,
        FileClass::FigureOutput,
        FileClass::TableOutput,
        FileClass::IntermediateResult,
        FileClass::EnvironmentSpec,
        FileClass::Document,
        FileClass::Other,
    ];
}

/// Script dialect of a code file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    R,
    Py,
    Shell,
    Unknown,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dialect::R => "r",
            Dialect::Py => "py",
            Dialect::Shell => "shell",
            Dialect::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArtifactKind {
    Figure,
    Table,
}

impl ArtifactKind {
    fn file_prefix(self) -> &'static str {
        match self {
            ArtifactKind::Figure => "figure",
            ArtifactKind::Table => "table",
        }
    }
}

/// A manuscript-facing result identifier such as "Figure 1" or "Table 12".
///
/// Serialized as its display string so it can key JSON maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArtifactLabel {
    pub kind: ArtifactKind,
    number: u32,
}

impl ArtifactLabel {
    /// Returns `None` when `number` is zero.
    pub fn new(kind: ArtifactKind, number: u32) -> Option<Self> {
        (number >= 1).then_some(Self { kind, number })
    }

    pub fn figure(number: u32) -> Option<Self> {
        Self::new(ArtifactKind::Figure, number)
    }

    pub fn table(number: u32) -> Option<Self> {
        Self::new(ArtifactKind::Table, number)
    }

    pub fn number(&self) -> u32 {
        self.number
    }

    /// Conventional output file name, e.g. `figure_1.pdf`.
    pub fn file_name(&self, ext: &str) -> String {
        format!("{}_{}.{}", self.kind.file_prefix(), self.number, ext)
    }
}

impl fmt::Display for ArtifactLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ArtifactKind::Figure => "Figure",
            ArtifactKind::Table => "Table",
        };
        write!(f, "{kind} {}", self.number)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid artifact label {0:?}: expected \"Figure <n>\" or \"Table <n>\" with n >= 1")]
pub struct InvalidLabel(pub String);

impl FromStr for ArtifactLabel {
    type Err = InvalidLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let (kind, rest) = trimmed
            .split_once(char::is_whitespace)
            .ok_or_else(|| InvalidLabel(s.to_string()))?;
        let kind = match kind.to_ascii_lowercase().as_str() {
            "figure" | "fig." | "fig" => ArtifactKind::Figure,
            "table" | "tab." | "tab" => ArtifactKind::Table,
            _ => return Err(InvalidLabel(s.to_string())),
        };
        let number: u32 = rest.trim().parse().map_err(|_| InvalidLabel(s.to_string()))?;
        ArtifactLabel::new(kind, number).ok_or_else(|| InvalidLabel(s.to_string()))
    }
}

impl Serialize for ArtifactLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ArtifactLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the supplement root, `/`-separated.
    pub rel_path: String,
    pub size: u64,
    pub class: FileClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dialect: Option<Dialect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact_label: Option<ArtifactLabel>,
}

impl FileEntry {
    pub fn file_name(&self) -> &str {
        file_name_of(&self.rel_path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupplementInventory {
    pub root: PathBuf,
    pub entries: Vec<FileEntry>,
    /// Every non-ignored directory below the root, sorted. Empty directories
    /// matter for structure checks on freshly scaffolded trees.
    pub directories: Vec<String>,
    pub class_counts: BTreeMap<FileClass, usize>,
}

impl SupplementInventory {
    /// Builds an inventory from already-classified entries, sorting them and
    /// recomputing the class counts.
    pub fn from_entries(root: impl Into<PathBuf>, mut entries: Vec<FileEntry>, mut directories: Vec<String>) -> Self {
        entries.sort_by(|a, b| a.rel_path.as_bytes().cmp(b.rel_path.as_bytes()));
        entries.dedup_by(|a, b| a.rel_path == b.rel_path);
        directories.sort();
        directories.dedup();
        let mut class_counts: BTreeMap<FileClass, usize> = FileClass::ALL.iter().map(|c| (*c, 0)).collect();
        for entry in &entries {
            *class_counts.entry(entry.class).or_default() += 1;
        }
        Self {
            root: root.into(),
            entries,
            directories,
            class_counts,
        }
    }

    pub fn get(&self, rel_path: &str) -> Option<&FileEntry> {
        self.entries
            .binary_search_by(|e| e.rel_path.as_bytes().cmp(rel_path.as_bytes()))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn contains(&self, rel_path: &str) -> bool {
        self.get(rel_path).is_some()
    }

    pub fn of_class(&self, class: FileClass) -> impl Iterator<Item = &FileEntry> {
        self.entries.iter().filter(move |e| e.class == class)
    }

    pub fn count(&self, class: FileClass) -> usize {
        self.class_counts.get(&class).copied().unwrap_or(0)
    }

    /// Names of directories directly below the root.
    pub fn top_level_dirs(&self) -> impl Iterator<Item = &str> {
        self.directories.iter().filter(|d| !d.contains('/')).map(String::as_str)
    }

    /// Returns a copy without `rel_path`, as if the file had been deleted.
    pub fn without(&self, rel_path: &str) -> Self {
        let entries = self
            .entries
            .iter()
            .filter(|e| e.rel_path != rel_path)
            .cloned()
            .collect();
        Self::from_entries(self.root.clone(), entries, self.directories.clone())
    }
}

/// Walks `config.root` and classifies every regular file that is not ignored.
pub fn scan_supplement(config: &ScanConfig) -> Result<SupplementInventory, ScanError> {
    let root = &config.root;
    if !root.is_dir() {
        return Err(ScanError::RootMissing(root.clone()));
    }
    let ignore = build_globset(&config.ignore_globs)?;

    let mut entries = Vec::new();
    let mut directories = Vec::new();
    let walker = WalkDir::new(root)
        .follow_links(config.follow_symlinks)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| {
            let rel = relative_string(root, e.path());
            rel.is_empty() || !ignore.is_match(&rel)
        });
    for item in walker {
        let item = item.map_err(|err| {
            let path = err.path().map(Path::to_path_buf).unwrap_or_else(|| root.clone());
            ScanError::Io {
                path,
                source: err
                    .into_io_error()
                    .unwrap_or_else(|| std::io::Error::other("filesystem loop")),
            }
        })?;
        if item.depth() == 0 {
            continue;
        }
        let rel_path = relative_string(root, item.path());
        let file_type = item.file_type();
        if file_type.is_symlink() {
            continue;
        }
        if file_type.is_dir() {
            directories.push(rel_path);
            continue;
        }
        if !file_type.is_file() {
            continue;
        }
        let size = item
            .metadata()
            .map_err(|err| ScanError::Io {
                path: item.path().to_path_buf(),
                source: err
                    .into_io_error()
                    .unwrap_or_else(|| std::io::Error::other("metadata unavailable")),
            })?
            .len();
        let head = if needs_sniff(&rel_path) && size <= config.max_file_bytes_for_content_sniff {
            Some(read_head(item.path())?)
        } else {
            None
        };
        entries.push(classify_entry(rel_path, size, head.as_deref()));
    }
    Ok(SupplementInventory::from_entries(root.clone(), entries, directories))
}

fn build_globset(patterns: &[String]) -> Result<GlobSet, ScanError> {
    let mut builder = GlobSetBuilder::new();
    for pattern in patterns {
        let glob = Glob::new(pattern).map_err(|err| ScanError::BadIgnoreGlob {
            pattern: pattern.clone(),
            reason: err.to_string(),
        })?;
        builder.add(glob);
    }
    builder.build().map_err(|err| ScanError::BadIgnoreGlob {
        pattern: patterns.join(","),
        reason: err.to_string(),
    })
}

fn read_head(path: &Path) -> Result<Vec<u8>, ScanError> {
    let mut buf = Vec::with_capacity(256);
    fs::File::open(path)
        .and_then(|f| f.take(256).read_to_end(&mut buf))
        .map_err(|source| ScanError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(buf)
}

/// Normalized `/`-separated relative path. Never starts with a separator and
/// never contains `..`.
fn relative_string(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    let parts: Vec<String> = rel
        .components()
        .filter_map(|c| match c {
            Component::Normal(s) => Some(s.to_string_lossy().into_owned()),
            _ => None,
        })
        .collect();
    parts.join("/")
}

fn needs_sniff(rel_path: &str) -> bool {
    extension_of(file_name_of(rel_path)).is_none()
}

/// Classifies an entry and fills in its dialect and artifact label.
pub fn classify_entry(rel_path: String, size: u64, content_head: Option<&[u8]>) -> FileEntry {
    let class = classify_file(&rel_path, content_head);
    let name = file_name_of(&rel_path);
    let dialect = (class == FileClass::Code).then(|| dialect_for(name, content_head));
    let artifact_label = match class {
        FileClass::FigureOutput | FileClass::TableOutput => extract_artifact_label(name),
        _ => None,
    };
    FileEntry {
        rel_path,
        size,
        class,
        dialect,
        artifact_label,
    }
}

const ENVIRONMENT_SPEC_NAMES: &[&str] = &[
    "renv.lock",
    "environment.yml",
    "requirements.txt",
    "description",
    "dockerfile",
];

const CODE_EXTENSIONS: &[&str] = &["r", "py", "sh", "bash", "rmd", "qmd", "jl"];

const DATA_EXTENSIONS: &[&str] = &["csv", "tsv", "rds", "rda", "parquet", "json", "xlsx", "dta", "sav"];

const DOCUMENT_EXTENSIONS: &[&str] = &["pdf", "md", "docx", "html"];

/// Assigns exactly one class to a relative path.
///
/// Precedence, first match wins:
/// 1. root-level `README` / `README.*` is [`FileClass::Readme`]
/// 2. a name containing "codebook" is [`FileClass::Codebook`]
/// 3. environment spec names (`renv.lock`, `environment.yml`, ...)
/// 4. code extensions, plus extensionless files with an R/Python/shell shebang
/// 5. `figure_<n>.<ext>` / `table_<n>.<ext>` outputs
/// 6. anything below a directory named `intermediate`
/// 7. data extensions
/// 8. document extensions
///
/// Everything else is [`FileClass::Other`]. Name matching is case-insensitive.
pub fn classify_file(rel_path: &str, content_head: Option<&[u8]>) -> FileClass {
    let name = file_name_of(rel_path);
    let lower = name.to_ascii_lowercase();
    let ext = extension_of(&lower);
    let at_root = !rel_path.contains('/');

    if at_root && (lower == "readme" || lower.starts_with("readme.")) {
        return FileClass::Readme;
    }
    if lower.contains("codebook") {
        return FileClass::Codebook;
    }
    if ENVIRONMENT_SPEC_NAMES.contains(&lower.as_str()) {
        return FileClass::EnvironmentSpec;
    }
    match ext {
        Some(e) if CODE_EXTENSIONS.contains(&e) => return FileClass::Code,
        None if shebang_dialect(content_head).is_some() => return FileClass::Code,
        _ => {}
    }
    if let Some(label) = extract_artifact_label(name) {
        return match label.kind {
            ArtifactKind::Figure => FileClass::FigureOutput,
            ArtifactKind::Table => FileClass::TableOutput,
        };
    }
    if dir_segments(rel_path).any(|s| s.eq_ignore_ascii_case("intermediate")) {
        return FileClass::IntermediateResult;
    }
    match ext {
        Some(e) if DATA_EXTENSIONS.contains(&e) => FileClass::Data,
        Some(e) if DOCUMENT_EXTENSIONS.contains(&e) => FileClass::Document,
        _ => FileClass::Other,
    }
}

fn dialect_for(name: &str, content_head: Option<&[u8]>) -> Dialect {
    match extension_of(&name.to_ascii_lowercase()) {
        Some("r") => Dialect::R,
        Some("py") => Dialect::Py,
        Some("sh") | Some("bash") => Dialect::Shell,
        Some(_) => Dialect::Unknown,
        None => shebang_dialect(content_head).unwrap_or(Dialect::Unknown),
    }
}

fn shebang_dialect(head: Option<&[u8]>) -> Option<Dialect> {
    let head = head?;
    let first = head.split(|b| *b == b'\n').next()?;
    let line = String::from_utf8_lossy(first);
    let rest = line.strip_prefix("#!")?;
    let interpreter = rest
        .split_whitespace()
        .find(|tok| !tok.ends_with("/env") && !tok.starts_with('-'))?;
    let base = interpreter.rsplit('/').next().unwrap_or(interpreter);
    if base == "Rscript" || base == "R" {
        Some(Dialect::R)
    } else if base.starts_with("python") {
        Some(Dialect::Py)
    } else if matches!(base, "sh" | "bash" | "zsh" | "dash") {
        Some(Dialect::Shell)
    } else {
        None
    }
}

static ARTIFACT_NAME: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^(figure|table)_([0-9]+)\.[A-Za-z0-9]+$").unwrap());

/// Parses `figure_<n>.<ext>` / `table_<n>.<ext>` (case-insensitive, n >= 1).
pub fn extract_artifact_label(file_name: &str) -> Option<ArtifactLabel> {
    let caps = ARTIFACT_NAME.captures(file_name)?;
    let kind = if caps[1].eq_ignore_ascii_case("figure") {
        ArtifactKind::Figure
    } else {
        ArtifactKind::Table
    };
    let number: u32 = caps[2].parse().ok()?;
    ArtifactLabel::new(kind, number)
}

pub fn file_name_of(rel_path: &str) -> &str {
    rel_path.rsplit('/').next().unwrap_or(rel_path)
}

fn extension_of(name: &str) -> Option<&str> {
    let (stem, ext) = name.rsplit_once('.')?;
    (!stem.is_empty() && !ext.is_empty()).then_some(ext)
}

/// Directory segments of a relative path, excluding the file name.
pub fn dir_segments(rel_path: &str) -> impl Iterator<Item = &str> {
    let dir = rel_path.rsplit_once('/').map(|(d, _)| d).unwrap_or("");
    dir.split('/').filter(|s| !s.is_empty())
}
