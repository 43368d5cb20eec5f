//! Lexical script analysis.
//!
//! [`scan_script`] runs every detector over one comment/string-aware pass of a
//! script and returns its [`ScriptFacts`]. String contents are only inspected
//! for path literals and output targets; comments only for artifact labels and
//! manual-edit markers; everything else looks at code.

pub mod lexer;
pub mod style;
pub mod tables;

use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::labels::find_label_mentions;
use crate::supplement::{extract_artifact_label, file_name_of, ArtifactLabel, Dialect, FileEntry};
use lexer::SourceView;
pub use style::StyleMetrics;
pub use tables::{pattern_tables, DetectorTables, MatchKind, Pattern, TABLES_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptFacts {
    pub rel_path: String,
    pub dialect: Dialect,
    pub imports: Vec<ImportRef>,
    pub seed_calls: Vec<SeedCall>,
    pub rng_uses: Vec<TokenUse>,
    pub path_literals: Vec<PathLiteral>,
    pub output_writes: Vec<OutputWrite>,
    pub artifact_comments: Vec<ArtifactComment>,
    pub parallel_uses: Vec<ParallelUse>,
    pub ide_api_uses: Vec<TokenUse>,
    pub manual_edit_markers: Vec<TokenUse>,
    pub function_defs: Vec<FunctionDef>,
    pub style: StyleMetrics,
    /// Set when the content could not be decoded; all other lists are empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub io_note: Option<String>,
}

impl ScriptFacts {
    pub fn empty(rel_path: impl Into<String>, dialect: Dialect) -> Self {
        Self {
            rel_path: rel_path.into(),
            dialect,
            imports: Vec::new(),
            seed_calls: Vec::new(),
            rng_uses: Vec::new(),
            path_literals: Vec::new(),
            output_writes: Vec::new(),
            artifact_comments: Vec::new(),
            parallel_uses: Vec::new(),
            ide_api_uses: Vec::new(),
            manual_edit_markers: Vec::new(),
            function_defs: Vec::new(),
            style: StyleMetrics::default(),
            io_note: None,
        }
    }

    /// True when an output write targets a path below an `intermediate` directory.
    pub fn writes_intermediates(&self) -> bool {
        self.output_writes.iter().any(OutputWrite::targets_intermediate)
    }

    /// Total lines spanned by top-level function definitions.
    pub fn function_lines(&self) -> usize {
        self.function_defs.iter().map(|f| f.lines).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUse {
    pub line: usize,
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedCall {
    pub line: usize,
    pub pattern: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argument_literal: Option<String>,
}

impl SeedCall {
    /// A seed with no argument does not fix anything (`default_rng()`).
    pub fn is_seeded(&self) -> bool {
        self.argument_literal.is_some()
    }

    /// True when the argument is a numeric or quoted constant, optionally
    /// passed by keyword (`seed = 42`).
    pub fn has_literal_argument(&self) -> bool {
        let Some(arg) = &self.argument_literal else {
            return false;
        };
        let value = match arg.split_once('=') {
            Some((key, value)) if is_identifier(key.trim()) => value.trim(),
            _ => arg.trim(),
        };
        let numeric = value.trim_end_matches('L');
        numeric.parse::<f64>().is_ok()
            || (value.len() >= 2
                && ((value.starts_with('"') && value.ends_with('"'))
                    || (value.starts_with('\'') && value.ends_with('\''))))
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
        && !s.starts_with(|c: char| c.is_ascii_digit())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbsoluteKind {
    PosixRoot,
    HomeTilde,
    DriveLetter,
    Unc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathLiteral {
    pub line: usize,
    pub value: String,
    pub absolute: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<AbsoluteKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportRef {
    pub line: usize,
    pub package: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputWrite {
    pub line: usize,
    pub writer_token: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_literal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inferred_label: Option<ArtifactLabel>,
}

impl OutputWrite {
    pub fn targets_intermediate(&self) -> bool {
        self.target_literal.as_deref().is_some_and(|t| {
            t.split(['/', '\\'])
                .rev()
                .skip(1)
                .any(|seg| seg.eq_ignore_ascii_case("intermediate"))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactComment {
    pub line: usize,
    pub label: ArtifactLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelUse {
    pub line: usize,
    pub construct_token: String,
    /// A safe-stream marker appears somewhere in the same file.
    pub safe_stream_evidence: bool,
    pub fork_based: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionDef {
    pub line: usize,
    pub name: String,
    pub lines: usize,
    /// An adjacent comment block or docstring exists.
    pub documented: bool,
}

/// Classifies a string literal as an absolute path.
///
/// Absolute means a leading `/`, a leading `~`, a drive letter (`C:\`, `C:/`)
/// or a UNC prefix (`\\`). Anything with a URL scheme is never absolute.
pub fn detect_absolute(value: &str) -> (bool, Option<AbsoluteKind>) {
    if value.contains("://") {
        return (false, None);
    }
    let b = value.as_bytes();
    let kind = if value.starts_with("\\\\") {
        Some(AbsoluteKind::Unc)
    } else if b.len() >= 3 && b[0].is_ascii_alphabetic() && b[1] == b':' && (b[2] == b'/' || b[2] == b'\\') {
        Some(AbsoluteKind::DriveLetter)
    } else if value.starts_with('/') {
        Some(AbsoluteKind::PosixRoot)
    } else if value.starts_with('~') {
        Some(AbsoluteKind::HomeTilde)
    } else {
        None
    };
    (kind.is_some(), kind)
}

static FILE_LIKE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[\w.%\-]+\.[A-Za-z][A-Za-z0-9]{0,5}$").unwrap());

/// Decides whether a string literal is worth recording as a path.
fn path_candidate(value: &str) -> Option<PathLiteral> {
    if value.is_empty() || value.contains('\n') || !value.chars().any(|c| c.is_alphanumeric()) || value.contains("://")
    {
        return None;
    }
    let (absolute, kind) = detect_absolute(value);
    if absolute {
        // "~ x" is a formula, "/ 2" prose; a path continues right after its root.
        let after_root = match kind {
            Some(AbsoluteKind::Unc) => &value[2..],
            Some(AbsoluteKind::DriveLetter) => &value[3..],
            _ => &value[1..],
        };
        if after_root.starts_with(char::is_whitespace) {
            return None;
        }
    } else if value.contains(char::is_whitespace)
        || !(value.contains('/') || value.contains('\\') || FILE_LIKE.is_match(value))
    {
        return None;
    }
    Some(PathLiteral {
        line: 0,
        value: value.to_string(),
        absolute,
        kind,
    })
}

/// Decodes raw file content and scans it. Content with NUL bytes or invalid
/// UTF-8 yields empty facts carrying an `io_note`.
pub fn scan_script_bytes(entry: &FileEntry, bytes: &[u8]) -> ScriptFacts {
    let dialect = entry.dialect.unwrap_or(Dialect::Unknown);
    if bytes.contains(&0) {
        let mut facts = ScriptFacts::empty(&entry.rel_path, dialect);
        facts.io_note = Some("binary content; not scanned".to_string());
        return facts;
    }
    match std::str::from_utf8(bytes) {
        Ok(text) => scan_script(entry, text),
        Err(err) => {
            let mut facts = ScriptFacts::empty(&entry.rel_path, dialect);
            facts.io_note = Some(format!("not valid UTF-8 ({err}); not scanned"));
            facts
        }
    }
}

/// Extracts all facts from one script.
pub fn scan_script(entry: &FileEntry, text: &str) -> ScriptFacts {
    let dialect = entry.dialect.unwrap_or(Dialect::Unknown);
    let view = SourceView::new(text, dialect);
    let mut facts = ScriptFacts::empty(&entry.rel_path, dialect);

    facts.path_literals = view
        .strings
        .iter()
        .filter_map(|s| {
            path_candidate(&s.value).map(|mut p| {
                p.line = s.line;
                p
            })
        })
        .collect();

    let tables = pattern_tables(dialect).ok();
    if let Some(tables) = tables {
        for comment in &view.comments {
            for label in find_label_mentions(&comment.text) {
                facts.artifact_comments.push(ArtifactComment {
                    line: comment.line,
                    label,
                });
            }
            if MANUAL_EDIT.iter().any(|re| re.is_match(&comment.text)) {
                facts.manual_edit_markers.push(TokenUse {
                    line: comment.line,
                    token: comment.text.trim().to_string(),
                });
            }
        }
        detect_code_patterns(&view, tables, &mut facts);
        facts.imports = detect_imports(&view, dialect);
        facts.function_defs = match dialect {
            Dialect::R => r_functions(&view),
            Dialect::Py => py_functions(&view),
            _ => Vec::new(),
        };
    }

    facts.style = style::measure(&view, dialect);
    facts.style.longest_function_lines = facts.function_defs.iter().map(|f| f.lines).max().unwrap_or(0);
    facts
}

fn detect_code_patterns(view: &SourceView<'_>, tables: &DetectorTables, facts: &mut ScriptFacts) {
    let dialect = tables.dialect;
    let mut safe_evidence = false;
    let mut parallel = Vec::new();

    for line in 1..=view.line_count() {
        let (line_offset, masked) = view.masked_line(line);
        if masked.trim().is_empty() {
            continue;
        }

        let mut seeds: Vec<(usize, &Pattern, usize)> = Vec::new();
        for p in tables.seed {
            for m in p.find_in(dialect, masked) {
                seeds.push((m.start, p, m.end));
            }
        }
        seeds.sort_by_key(|(start, _, _)| *start);
        for (_, p, end) in &seeds {
            facts.seed_calls.push(SeedCall {
                line,
                pattern: p.token.to_string(),
                argument_literal: call_argument(view, line_offset + end),
            });
        }

        let mut rng: Vec<(usize, &str)> = Vec::new();
        for p in tables.rng_use {
            for m in p.find_in(dialect, masked) {
                // `np.random.seed(` and `np.random.default_rng(` configure, not draw.
                let feeds_seed = seeds.iter().any(|(start, _, _)| *start == m.end);
                let is_seed = seeds.iter().any(|(start, _, _)| *start == m.start);
                if !feeds_seed && !is_seed {
                    rng.push((m.start, p.token));
                }
            }
        }
        rng.sort();
        rng.dedup_by(|a, b| a.1 == b.1);
        facts.rng_uses.extend(rng.into_iter().map(|(_, t)| TokenUse {
            line,
            token: t.to_string(),
        }));

        if tables
            .safe_stream
            .iter()
            .any(|p| !p.find_in(dialect, masked).is_empty())
        {
            safe_evidence = true;
        }

        let mut par: Vec<(usize, &str)> = tables
            .parallel
            .iter()
            .flat_map(|p| p.find_in(dialect, masked).into_iter().map(move |m| (m.start, p.token)))
            .collect();
        par.sort();
        parallel.extend(par.into_iter().map(|(_, token)| (line, token)));

        let mut ide: Vec<(usize, &str)> = tables
            .ide
            .iter()
            .flat_map(|p| p.find_in(dialect, masked).into_iter().map(move |m| (m.start, p.token)))
            .collect();
        ide.sort();
        facts.ide_api_uses.extend(ide.into_iter().map(|(_, t)| TokenUse {
            line,
            token: t.to_string(),
        }));

        let mut writes: Vec<(usize, &Pattern, usize)> = Vec::new();
        for p in tables.writers {
            for m in p.find_in(dialect, masked) {
                writes.push((m.start, p, m.end));
            }
        }
        writes.sort_by_key(|(start, _, _)| *start);
        for (_, p, end) in writes {
            let target_literal = write_target(view, tables, line_offset + end);
            let inferred_label = target_literal
                .as_deref()
                .and_then(|t| extract_artifact_label(file_name_of(&t.replace('\\', "/"))));
            facts.output_writes.push(OutputWrite {
                line,
                writer_token: p.token.to_string(),
                target_literal,
                inferred_label,
            });
        }
    }

    facts.parallel_uses = parallel
        .into_iter()
        .map(|(line, token)| ParallelUse {
            line,
            construct_token: token.to_string(),
            safe_stream_evidence: safe_evidence,
            fork_based: tables.fork.contains(&token),
        })
        .collect();
}

/// Source text between the parentheses of a call whose `(` is at `open`.
fn call_argument(view: &SourceView<'_>, open: usize) -> Option<String> {
    let close = view.matching_paren(open)?;
    let arg = view.src[open + 1..close].trim();
    (!arg.is_empty()).then(|| arg.to_string())
}

/// Best guess at the file a writer call targets.
///
/// Inside a path-joining call (`file.path`, `os.path.join`, ...) all string
/// components are joined with `/`; otherwise the first literal that looks like
/// a file name wins, falling back to the first literal.
fn write_target(view: &SourceView<'_>, tables: &DetectorTables, open: usize) -> Option<String> {
    let close = view.matching_paren(open)?;
    let literals: Vec<&str> = view.strings_between(open, close).map(|s| s.value.as_str()).collect();
    if literals.is_empty() {
        return None;
    }
    let span = &view.masked[open..close];
    let joined = tables
        .path_joiners
        .iter()
        .any(|p| !p.find_in(tables.dialect, span).is_empty());
    if joined && literals.len() > 1 {
        let parts: Vec<&str> = literals
            .iter()
            .map(|s| s.trim_matches('/'))
            .filter(|s| !s.is_empty())
            .collect();
        return Some(parts.join("/"));
    }
    literals
        .iter()
        .find(|s| FILE_LIKE.is_match(file_name_of(&s.replace('\\', "/"))))
        .or(literals.first())
        .map(|s| s.to_string())
}

static MANUAL_EDIT: LazyLock<Vec<Regex>> = LazyLock::new(|| {
    [
        r"(?i)^\s*(?:todo|fixme|note|important)?[:\s!-]*(?:please\s+)?(?:change|edit|adjust|modify|replace|set|update|insert|enter)\b.{0,40}\b(?:paths?|directory|dir|folder|working directory|wd)\b",
        r"(?i)\b(?:todo|fixme)\b.{0,60}\b(?:paths?|directory|dir|folder|wd)\b",
        r"(?i)\bchange\s+(?:me|this)\b",
        r"(?i)\b(?:edit|adjust)\s+(?:here|this|below)\b",
    ]
    .iter()
    .map(|p| Regex::new(p).unwrap())
    .collect()
});

static R_LOADER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:^|[^\w.])(library|require|requireNamespace)\s*\(").unwrap());
static R_NAMESPACE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:^|[^\w.])([A-Za-z][A-Za-z0-9.]*):::?[A-Za-z._]").unwrap());
static R_PACKAGE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z][A-Za-z0-9.]*$").unwrap());
static PY_IMPORT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*import\s+(.+)$").unwrap());
static PY_FROM: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*from\s+([\w.]+)\s+import\b").unwrap());

fn detect_imports(view: &SourceView<'_>, dialect: Dialect) -> Vec<ImportRef> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |line: usize, package: &str| {
        if !package.is_empty() && seen.insert(package.to_string()) {
            out.push(ImportRef {
                line,
                package: package.to_string(),
            });
        }
    };
    for line in 1..=view.line_count() {
        let (offset, masked) = view.masked_line(line);
        match dialect {
            Dialect::R => {
                let mut found: Vec<(usize, String)> = Vec::new();
                for caps in R_LOADER.captures_iter(masked) {
                    let open = caps.get(0).unwrap().end() - 1;
                    let Some(arg) = call_argument(view, offset + open) else {
                        continue;
                    };
                    if arg.contains("character.only") {
                        continue;
                    }
                    let first = arg.split(',').next().unwrap_or("").trim();
                    let name = first.trim_matches(|c| c == '"' || c == '\'');
                    if R_PACKAGE.is_match(name) {
                        found.push((open, name.to_string()));
                    }
                }
                for caps in R_NAMESPACE.captures_iter(masked) {
                    let m = caps.get(1).unwrap();
                    found.push((m.start(), m.as_str().to_string()));
                }
                found.sort();
                for (_, name) in found {
                    push(line, &name);
                }
            }
            Dialect::Py => {
                if let Some(caps) = PY_FROM.captures(masked) {
                    let module = &caps[1];
                    if !module.starts_with('.') {
                        push(line, module.split('.').next().unwrap_or(module));
                    }
                } else if let Some(caps) = PY_IMPORT.captures(masked) {
                    for part in caps[1].split(',') {
                        let module = part.split_whitespace().next().unwrap_or("");
                        push(line, module.split('.').next().unwrap_or(module));
                    }
                }
            }
            _ => {}
        }
    }
    out
}

static R_FUNCTION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*([A-Za-z.][\w.]*)\s*(?:<<-|<-|=)\s*function\b").unwrap());
static PY_FUNCTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(?:async\s+)?def\s+(\w+)\s*\(").unwrap());

fn is_comment_only(view: &SourceView<'_>, line: usize) -> bool {
    view.masked_line(line).1.trim().is_empty() && view.comments.iter().any(|c| c.line == line)
}

fn r_functions(view: &SourceView<'_>) -> Vec<FunctionDef> {
    let mut defs = Vec::new();
    let mut depth: i64 = 0;
    let mut line = 1;
    let total = view.line_count();
    while line <= total {
        let (offset, masked) = view.masked_line(line);
        if depth == 0 {
            if let Some(caps) = R_FUNCTION.captures(masked) {
                let name = caps[1].to_string();
                let fn_pos = offset + caps.get(0).unwrap().end();
                let (end_line, body_start) = r_function_extent(view, fn_pos, line);
                let documented = (line > 1 && is_comment_only(view, line - 1))
                    || body_start.is_some_and(|b| b <= end_line && is_comment_only(view, b));
                defs.push(FunctionDef {
                    line,
                    name,
                    lines: end_line - line + 1,
                    documented,
                });
                line = end_line + 1;
                continue;
            }
        }
        for b in masked.bytes() {
            match b {
                b'{' => depth += 1,
                b'}' => depth -= 1,
                _ => {}
            }
        }
        line += 1;
    }
    defs
}

/// Returns (last line, first body line) of an R function whose `function`
/// keyword ends at `after_keyword`.
fn r_function_extent(view: &SourceView<'_>, after_keyword: usize, def_line: usize) -> (usize, Option<usize>) {
    let bytes = view.masked.as_bytes();
    let mut i = after_keyword;
    // skip the parameter list
    while i < bytes.len() && bytes[i] != b'(' {
        i += 1;
    }
    if let Some(close) = view.matching_paren(i) {
        i = close + 1;
    }
    while i < bytes.len() && (bytes[i] == b' ' || bytes[i] == b'\t' || bytes[i] == b'\r' || bytes[i] == b'\n') {
        i += 1;
    }
    if bytes.get(i) != Some(&b'{') {
        return (view.line_of(i.min(bytes.len().saturating_sub(1))).max(def_line), None);
    }
    let open_line = view.line_of(i);
    let mut depth = 0i64;
    for (j, b) in bytes.iter().enumerate().skip(i) {
        match b {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return (view.line_of(j), Some(open_line + 1));
                }
            }
            _ => {}
        }
    }
    (view.line_count(), Some(open_line + 1))
}

fn py_functions(view: &SourceView<'_>) -> Vec<FunctionDef> {
    let mut defs = Vec::new();
    let total = view.line_count();
    let mut line = 1;
    while line <= total {
        let masked = view.masked_line(line).1;
        let Some(caps) = PY_FUNCTION.captures(masked) else {
            line += 1;
            continue;
        };
        let name = caps[1].to_string();
        let mut end = line;
        let mut first_body = None;
        let mut next = line + 1;
        while next <= total {
            let m = view.masked_line(next).1;
            if !m.trim().is_empty() {
                if !m.starts_with(char::is_whitespace) && !m.trim_start().starts_with(')') {
                    break;
                }
                first_body.get_or_insert(next);
                end = next;
            }
            next += 1;
        }
        let docstring = first_body.is_some_and(|b| {
            let stmt = view.masked_line(b).1.trim_start();
            let stmt = stmt.trim_start_matches(['r', 'R', 'u', 'U', 'b', 'B', 'f', 'F']);
            stmt.starts_with('"') || stmt.starts_with('\'')
        });
        let mut above = line;
        while above > 1 && view.masked_line(above - 1).1.trim_start().starts_with('@') {
            above -= 1;
        }
        let documented = docstring || (above > 1 && is_comment_only(view, above - 1));
        defs.push(FunctionDef {
            line,
            name,
            lines: end - line + 1,
            documented,
        });
        line = end + 1;
    }
    defs
}
