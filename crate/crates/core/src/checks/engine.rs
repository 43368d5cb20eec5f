use std::collections::{BTreeMap, BTreeSet};

use super::{
    build_linkage, catalog_entry, severity_counts, AuditReport, CheckConfig, CheckId, DeclaredLabels, Finding,
    InventorySummary, Location, Severity,
};
use crate::error::CheckError;
use crate::readme::{find_readme, same_script, ReadmeModel};
use crate::script::{AbsoluteKind, ScriptFacts, TABLES_VERSION};
use crate::supplement::{dir_segments, file_name_of, Dialect, FileClass, SupplementInventory};

const CODE_DIRS: &[&str] = &[
    "code", "src", "scripts", "script", "r", "python", "analysis", "programs",
];
const DATA_DIRS: &[&str] = &["data", "dat", "raw_data", "rawdata"];
const RESULTS_DIRS: &[&str] = &["results", "result", "output", "outputs"];
const FIGURE_DIRS: &[&str] = &["figures", "figure", "figs", "plots"];
const TABLE_DIRS: &[&str] = &["tables", "table", "tabs"];

const R_BASE_PACKAGES: &[&str] = &[
    "base",
    "compiler",
    "datasets",
    "graphics",
    "grDevices",
    "grid",
    "methods",
    "parallel",
    "splines",
    "stats",
    "stats4",
    "tcltk",
    "tools",
    "utils",
];
const PY_STDLIB: &[&str] = &[
    "__future__",
    "abc",
    "argparse",
    "array",
    "ast",
    "asyncio",
    "atexit",
    "base64",
    "bisect",
    "builtins",
    "bz2",
    "calendar",
    "cmath",
    "codecs",
    "collections",
    "concurrent",
    "configparser",
    "contextlib",
    "copy",
    "csv",
    "ctypes",
    "dataclasses",
    "datetime",
    "decimal",
    "difflib",
    "enum",
    "errno",
    "fnmatch",
    "fractions",
    "functools",
    "gc",
    "getpass",
    "gettext",
    "glob",
    "gzip",
    "hashlib",
    "heapq",
    "hmac",
    "html",
    "http",
    "importlib",
    "inspect",
    "io",
    "ipaddress",
    "itertools",
    "json",
    "locale",
    "logging",
    "lzma",
    "math",
    "multiprocessing",
    "numbers",
    "operator",
    "os",
    "pathlib",
    "pickle",
    "pkgutil",
    "platform",
    "pprint",
    "queue",
    "random",
    "re",
    "secrets",
    "select",
    "shelve",
    "shlex",
    "shutil",
    "signal",
    "socket",
    "sqlite3",
    "statistics",
    "string",
    "struct",
    "subprocess",
    "sys",
    "sysconfig",
    "tarfile",
    "tempfile",
    "textwrap",
    "threading",
    "time",
    "timeit",
    "tomllib",
    "traceback",
    "types",
    "typing",
    "unittest",
    "urllib",
    "uuid",
    "warnings",
    "weakref",
    "xml",
    "zipfile",
    "zlib",
];
/// Import names whose distribution is published under another name.
const PY_DISTRIBUTIONS: &[(&str, &str)] = &[
    ("sklearn", "scikit-learn"),
    ("skimage", "scikit-image"),
    ("cv2", "opencv-python"),
    ("PIL", "Pillow"),
    ("yaml", "PyYAML"),
    ("bs4", "beautifulsoup4"),
    ("dateutil", "python-dateutil"),
];

/// Evaluates the whole catalog.
///
/// `readme.environment` is expected to already merge environment-file evidence (see
/// [`crate::readme::detect_environment_evidence`]); a missing README is
/// passed as [`ReadmeModel::default`].
pub fn run_checks(
    inventory: &SupplementInventory,
    readme: &ReadmeModel,
    facts: &[ScriptFacts],
    declared: Option<&DeclaredLabels>,
    config: &CheckConfig,
) -> Result<AuditReport, CheckError> {
    for f in facts {
        match inventory.get(&f.rel_path) {
            Some(e) if e.class == FileClass::Code => {}
            _ => return Err(CheckError::InconsistentInput(f.rel_path.clone())),
        }
    }
    let mut sorted: Vec<&ScriptFacts> = facts.iter().collect();
    sorted.sort_by(|a, b| a.rel_path.cmp(&b.rel_path));
    let declared = declared.filter(|d| !d.is_empty());
    let linkage = build_linkage(inventory, facts, declared.unwrap_or(&DeclaredLabels::default()));
    let readme_path = find_readme(inventory).map(|e| e.rel_path.clone());

    let mut ctx = Ctx {
        inventory,
        readme,
        readme_path: readme_path.clone(),
        facts: sorted,
        declared,
        config,
        findings: Vec::new(),
        has_code: inventory.count(FileClass::Code) > 0,
    };
    ctx.structure();
    ctx.readme_checks();
    ctx.code_checks();
    ctx.link_checks(&linkage);
    ctx.intermediate_checks();
    ctx.synthetic_checks();

    let mut findings = ctx.findings;
    apply_overrides(&mut findings, config);
    findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    findings.dedup();

    Ok(AuditReport {
        inventory: InventorySummary {
            root: inventory.root.display().to_string(),
            total_files: inventory.entries.len(),
            class_counts: inventory.class_counts.clone(),
            readme: readme_path,
        },
        counts: severity_counts(&findings),
        findings,
        linkage,
        tables_version: TABLES_VERSION,
    })
}

/// Replaces default severities with configured ones. Findings already below
/// their default keep the lower of the two; CODE-01/CODE-03 never drop below Info.
fn apply_overrides(findings: &mut [Finding], config: &CheckConfig) {
    for f in findings {
        if matches!(f.severity, Severity::Pass | Severity::NotApplicable) {
            continue;
        }
        let Some(over) = config.effective_override(f.check) else {
            continue;
        };
        let default = catalog_entry(f.check).default_severity;
        f.severity = if f.severity == default {
            over
        } else {
            f.severity.min(over)
        };
        if f.check.has_info_floor() && f.severity < Severity::Info {
            f.severity = Severity::Info;
        }
    }
}

struct Ctx<'a> {
    inventory: &'a SupplementInventory,
    readme: &'a ReadmeModel,
    readme_path: Option<String>,
    facts: Vec<&'a ScriptFacts>,
    declared: Option<&'a DeclaredLabels>,
    config: &'a CheckConfig,
    findings: Vec<Finding>,
    has_code: bool,
}

/// Paths naming synthetic or pseudo data.
pub fn is_synthetic(rel_path: &str) -> bool {
    let lower = rel_path.to_ascii_lowercase();
    lower.contains("synthetic") || lower.contains("pseudo")
}

fn has_segment(rel_path: &str, names: &[&str]) -> bool {
    dir_segments(rel_path).any(|s| names.iter().any(|n| s.eq_ignore_ascii_case(n)))
}

fn abs_kind_name(kind: Option<AbsoluteKind>) -> &'static str {
    match kind {
        Some(AbsoluteKind::PosixRoot) => "root-anchored",
        Some(AbsoluteKind::HomeTilde) => "home-relative",
        Some(AbsoluteKind::DriveLetter) => "drive letter",
        Some(AbsoluteKind::Unc) => "network share",
        None => "relative",
    }
}

/// Name stem used to spot near-duplicate scripts: numbering prefixes,
/// extensions and trailing counters are dropped.
fn name_stem(file_name: &str) -> String {
    let lower = file_name.to_ascii_lowercase();
    let stem = lower.rsplit_once('.').map_or(lower.as_str(), |(s, _)| s);
    let stem = stem.trim_start_matches(|c: char| c.is_ascii_digit());
    let stem = stem.trim_start_matches(['_', '-']);
    stem.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_' || c == '-')
        .to_string()
}

impl<'a> Ctx<'a> {
    fn emit(&mut self, check: CheckId, severity: Severity, location: Option<Location>, message: impl Into<String>) {
        self.findings.push(Finding {
            check,
            severity,
            location,
            message: message.into(),
            guideline: catalog_entry(check).guideline.to_string(),
        });
    }

    /// Emits Pass unless `check` already has a finding.
    fn pass_if_silent(&mut self, check: CheckId, message: &str) {
        if !self.findings.iter().any(|f| f.check == check) {
            self.emit(check, Severity::Pass, None, message);
        }
    }

    fn readme_location(&self, line: Option<usize>) -> Option<Location> {
        self.readme_path.as_ref().map(|p| Location { path: p.clone(), line })
    }

    fn structure(&mut self) {
        let inv = self.inventory;
        let top: Vec<&str> = inv.top_level_dirs().collect();
        let has_role = |names: &[&str]| top.iter().any(|d| names.iter().any(|n| d.eq_ignore_ascii_case(n)));
        let data_needed = !(self.readme.data_availability.is_restricted() && inv.count(FileClass::Data) == 0);
        for (role, names, needed) in [
            ("code", CODE_DIRS, true),
            ("data", DATA_DIRS, data_needed),
            ("results", RESULTS_DIRS, true),
        ] {
            if needed && !has_role(names) {
                self.emit(
                    CheckId::Struct01,
                    Severity::Warn,
                    None,
                    format!("no top-level {role} folder"),
                );
            }
        }
        self.pass_if_silent(CheckId::Struct01, "top-level code, data and results folders present");

        let has_results = has_role(RESULTS_DIRS);
        let outputs: Vec<_> = inv
            .entries
            .iter()
            .filter(|e| matches!(e.class, FileClass::FigureOutput | FileClass::TableOutput))
            .collect();
        if !has_results && outputs.is_empty() {
            self.emit(
                CheckId::Struct02,
                Severity::NotApplicable,
                None,
                "no results folder or labeled outputs",
            );
        } else {
            for e in outputs {
                let (dirs, what) = if e.class == FileClass::FigureOutput {
                    (FIGURE_DIRS, "figures")
                } else {
                    (TABLE_DIRS, "tables")
                };
                if !has_segment(&e.rel_path, dirs) {
                    self.emit(
                        CheckId::Struct02,
                        Severity::Warn,
                        Some(Location::file(&e.rel_path)),
                        format!("output is not stored in a {what} subfolder"),
                    );
                }
            }
            self.pass_if_silent(CheckId::Struct02, "outputs sorted into results subfolders");
        }

        match &self.readme_path {
            Some(path) => {
                let path = path.clone();
                self.emit(
                    CheckId::Struct03,
                    Severity::Pass,
                    Some(Location::file(&path)),
                    "README present",
                );
                let extras: Vec<String> = inv
                    .of_class(FileClass::Readme)
                    .filter(|e| e.rel_path != path)
                    .map(|e| e.rel_path.clone())
                    .collect();
                for extra in extras {
                    self.emit(
                        CheckId::Struct03,
                        Severity::Info,
                        Some(Location::file(extra)),
                        format!("additional root README; {path} is used"),
                    );
                }
            }
            None => self.emit(
                CheckId::Struct03,
                Severity::Fail,
                None,
                "no README at the supplement root",
            ),
        }

        let spaced: Vec<String> = inv
            .directories
            .iter()
            .chain(inv.entries.iter().map(|e| &e.rel_path))
            .filter(|p| file_name_of(p).contains(char::is_whitespace))
            .cloned()
            .collect();
        for path in spaced {
            self.emit(
                CheckId::Struct04,
                Severity::Warn,
                Some(Location::file(path)),
                "name contains spaces",
            );
        }
        self.pass_if_silent(CheckId::Struct04, "no spaces in file or folder names");

        if inv.count(FileClass::Data) == 0 {
            self.emit(CheckId::Struct05, Severity::NotApplicable, None, "no data files");
        } else if inv.count(FileClass::Codebook) == 0 {
            self.emit(
                CheckId::Struct05,
                Severity::Warn,
                None,
                "data files present but no codebook",
            );
        } else {
            self.emit(CheckId::Struct05, Severity::Pass, None, "codebook present");
        }

        let code: Vec<_> = inv.of_class(FileClass::Code).collect();
        if code.is_empty() {
            self.emit(CheckId::Struct06, Severity::NotApplicable, None, "no code files");
        } else {
            let mut groups: BTreeMap<String, usize> = BTreeMap::new();
            for e in &code {
                let stem = name_stem(e.file_name());
                if !stem.is_empty() {
                    *groups.entry(stem).or_default() += 1;
                }
            }
            let pairs: usize = groups.values().map(|g| g * (g - 1) / 2).sum();
            let t = &self.config.thresholds;
            if code.len() > t.consolidation_min_files && pairs >= t.consolidation_min_pairs {
                self.emit(
                    CheckId::Struct06,
                    Severity::Info,
                    None,
                    format!(
                        "{} code files with {pairs} pairs of similarly named scripts; consider consolidating",
                        code.len()
                    ),
                );
            } else {
                self.emit(
                    CheckId::Struct06,
                    Severity::Pass,
                    None,
                    format!("{} code files", code.len()),
                );
            }
        }
    }

    fn code_path_for(&self, written: &str) -> Option<&'a str> {
        self.inventory
            .of_class(FileClass::Code)
            .find(|e| same_script(written, &e.rel_path))
            .map(|e| e.rel_path.as_str())
    }

    fn readme_checks(&mut self) {
        let readme = self.readme;
        if !self.has_code {
            self.emit(CheckId::Readme01, Severity::NotApplicable, None, "no code files");
            self.emit(CheckId::Readme02, Severity::NotApplicable, None, "no code files");
        } else {
            if readme.steps.is_empty() {
                let loc = self.readme_location(None);
                self.emit(
                    CheckId::Readme01,
                    Severity::Warn,
                    loc,
                    "no script execution order given",
                );
            }
            for step in &readme.steps {
                if self.code_path_for(&step.script_ref).is_none() {
                    let loc = self.readme_location(Some(step.line));
                    self.emit(
                        CheckId::Readme01,
                        Severity::Warn,
                        loc,
                        format!(
                            "step {} names {}, which is not in the supplement",
                            step.position, step.script_ref
                        ),
                    );
                }
            }
            self.pass_if_silent(CheckId::Readme01, "execution order documented");

            let env = &readme.environment;
            if env.is_empty() {
                let loc = self.readme_location(None);
                self.emit(
                    CheckId::Readme02,
                    Severity::Warn,
                    loc,
                    "no session information or environment spec file",
                );
            } else {
                let mut parts = Vec::new();
                if env.session_block_present {
                    parts.push("session information".to_string());
                }
                parts.extend(env.spec_files.iter().cloned());
                self.emit(
                    CheckId::Readme02,
                    Severity::Pass,
                    None,
                    format!("environment documented: {}", parts.join(", ")),
                );
            }
        }

        let exempt = &self.config.overview_exempt;
        let uncovered: Vec<String> = self
            .inventory
            .entries
            .iter()
            .filter(|e| e.class != FileClass::Readme && !exempt.contains(&e.rel_path))
            .filter(|e| !readme.covers(&e.rel_path))
            .map(|e| e.rel_path.clone())
            .collect();
        for path in uncovered {
            self.emit(
                CheckId::Readme03,
                Severity::Warn,
                Some(Location::file(path)),
                "file not described in the README",
            );
        }
        self.pass_if_silent(CheckId::Readme03, "all files described in the README");

        let writers: Vec<&str> = self
            .facts
            .iter()
            .filter(|f| f.writes_intermediates())
            .map(|f| f.rel_path.as_str())
            .collect();
        if writers.is_empty() && readme.runtime_notes.is_empty() {
            self.emit(
                CheckId::Readme04,
                Severity::NotApplicable,
                None,
                "no long-running scripts detected",
            );
            return;
        }
        for path in writers {
            if readme.runtime_for(path).next().is_none() {
                self.emit(
                    CheckId::Readme04,
                    Severity::Warn,
                    Some(Location::file(path)),
                    "script stores intermediate results but the README gives no runtime for it",
                );
            }
        }
        for note in &readme.runtime_notes {
            if note.hardware_hint.is_empty() {
                let loc = self.readme_location(Some(note.line));
                self.emit(
                    CheckId::Readme04,
                    Severity::Info,
                    loc,
                    "runtime given without the hardware it was measured on",
                );
            }
        }
        self.pass_if_silent(CheckId::Readme04, "runtimes documented");
    }

    /// Code paths in README step order, without repeats.
    fn execution_order(&self) -> Vec<&'a str> {
        let mut order: Vec<&str> = Vec::new();
        for step in &self.readme.steps {
            if let Some(path) = self.code_path_for(&step.script_ref) {
                if !order.contains(&path) {
                    order.push(path);
                }
            }
        }
        order
    }

    fn facts_for(&self, path: &str) -> Option<&'a ScriptFacts> {
        self.facts.iter().find(|f| f.rel_path == path).copied()
    }

    fn third_party_imports(&self, f: &ScriptFacts) -> Vec<(usize, String)> {
        let local: BTreeSet<String> = self
            .inventory
            .of_class(FileClass::Code)
            .map(|e| name_stem_exact(e.file_name()))
            .collect();
        f.imports
            .iter()
            .filter(|i| match f.dialect {
                Dialect::R => !R_BASE_PACKAGES.contains(&i.package.as_str()),
                Dialect::Py => !PY_STDLIB.contains(&i.package.as_str()) && !local.contains(&i.package),
                _ => false,
            })
            .map(|i| (i.line, i.package.clone()))
            .collect()
    }

    fn code_checks(&mut self) {
        const CODE_IDS: [CheckId; 11] = [
            CheckId::Code01,
            CheckId::Code02,
            CheckId::Code03,
            CheckId::Code04,
            CheckId::Code05,
            CheckId::Code06,
            CheckId::Code07,
            CheckId::Code08,
            CheckId::Code09,
            CheckId::Code10,
            CheckId::Code11,
        ];
        if !self.has_code {
            for id in CODE_IDS {
                self.emit(id, Severity::NotApplicable, None, "no code files");
            }
            return;
        }
        let facts = self.facts.clone();

        for f in &facts {
            if let Some(note) = &f.io_note {
                self.emit(
                    CheckId::Code01,
                    Severity::Info,
                    Some(Location::file(&f.rel_path)),
                    format!("script not scanned: {note}"),
                );
            }
            for p in f.path_literals.iter().filter(|p| p.absolute) {
                self.emit(
                    CheckId::Code01,
                    Severity::Fail,
                    Some(Location::at(&f.rel_path, p.line)),
                    format!("absolute path \"{}\" ({})", p.value, abs_kind_name(p.kind)),
                );
            }
            for u in &f.ide_api_uses {
                self.emit(
                    CheckId::Code02,
                    Severity::Warn,
                    Some(Location::at(&f.rel_path, u.line)),
                    format!("IDE-specific API {}", u.token),
                );
            }
        }
        self.pass_if_silent(CheckId::Code01, "only relative paths");
        self.pass_if_silent(CheckId::Code02, "no IDE-specific APIs");

        let order = self.execution_order();
        let mut any_rng = false;
        for f in &facts {
            let Some(first_rng) = f.rng_uses.first() else {
                continue;
            };
            any_rng = true;
            let upstream: Vec<&ScriptFacts> = match order.iter().position(|p| *p == f.rel_path) {
                Some(idx) => order[..=idx].iter().filter_map(|p| self.facts_for(p)).collect(),
                None => vec![*f],
            };
            let seeds: Vec<_> = upstream
                .iter()
                .flat_map(|s| s.seed_calls.iter())
                .filter(|s| s.is_seeded())
                .collect();
            let loc = Some(Location::at(&f.rel_path, first_rng.line));
            if seeds.is_empty() {
                self.emit(
                    CheckId::Code03,
                    Severity::Fail,
                    loc,
                    format!(
                        "random numbers drawn ({}) but no seed is set in this script or an earlier step",
                        first_rng.token
                    ),
                );
            } else if !seeds.iter().any(|s| s.has_literal_argument()) {
                self.emit(
                    CheckId::Code03,
                    Severity::Warn,
                    loc,
                    format!(
                        "seed set only from an expression ({}); its value may not be fixed",
                        seeds[0].argument_literal.as_deref().unwrap_or("")
                    ),
                );
            }
        }
        self.pass_if_silent(
            CheckId::Code03,
            if any_rng {
                "seed set before random number use"
            } else {
                "no random number generation detected"
            },
        );

        for f in &facts {
            for p in f.parallel_uses.iter().filter(|p| !p.safe_stream_evidence) {
                let severity = if f.rng_uses.is_empty() {
                    Severity::Warn
                } else {
                    Severity::Fail
                };
                self.emit(
                    CheckId::Code04,
                    severity,
                    Some(Location::at(&f.rel_path, p.line)),
                    format!("{} without a parallel-safe random number stream", p.construct_token),
                );
            }
            for p in f.parallel_uses.iter().filter(|p| p.fork_based) {
                self.emit(
                    CheckId::Code05,
                    Severity::Info,
                    Some(Location::at(&f.rel_path, p.line)),
                    format!(
                        "{} relies on forking, which is unavailable on Windows",
                        p.construct_token
                    ),
                );
            }
            let s = &f.style;
            if s.violations() > 0 {
                self.emit(
                    CheckId::Code06,
                    Severity::Info,
                    Some(Location {
                        path: f.rel_path.clone(),
                        line: s.first_violation_line,
                    }),
                    format!(
                        "{} comma and {} operator spacing issues",
                        s.comma_space_violations, s.operator_space_violations
                    ),
                );
            }
            let limit = self.config.thresholds.long_function_lines;
            if !f.output_writes.is_empty() && f.function_lines() > limit {
                self.emit(
                    CheckId::Code07,
                    Severity::Warn,
                    f.function_defs.first().map(|d| Location::at(&f.rel_path, d.line)),
                    format!(
                        "{} lines of function definitions in a script that writes outputs; move them to a separate script",
                        f.function_lines()
                    ),
                );
            }
            for m in &f.manual_edit_markers {
                self.emit(
                    CheckId::Code10,
                    Severity::Warn,
                    Some(Location::at(&f.rel_path, m.line)),
                    format!("manual edit requested: {}", m.token),
                );
            }
            for d in f.function_defs.iter().filter(|d| !d.documented) {
                self.emit(
                    CheckId::Code11,
                    Severity::Info,
                    Some(Location::at(&f.rel_path, d.line)),
                    format!("function {} has no documentation comment", d.name),
                );
            }
        }
        self.pass_if_silent(
            CheckId::Code04,
            "parallel code uses reproducible streams or none is present",
        );
        self.pass_if_silent(CheckId::Code05, "no fork-based parallelism");
        self.pass_if_silent(CheckId::Code06, "spacing consistent");
        self.pass_if_silent(CheckId::Code07, "no long function definitions mixed with output code");
        self.pass_if_silent(CheckId::Code10, "no manual edits requested");
        self.pass_if_silent(CheckId::Code11, "all functions documented");

        let imports: Vec<(&ScriptFacts, Vec<(usize, String)>)> =
            facts.iter().map(|f| (*f, self.third_party_imports(f))).collect();
        let distinct: BTreeSet<&str> = imports
            .iter()
            .flat_map(|(_, list)| list.iter().map(|(_, p)| p.as_str()))
            .collect();
        if distinct.len() > self.config.thresholds.max_imports {
            self.emit(
                CheckId::Code08,
                Severity::Info,
                None,
                format!("{} distinct packages imported", distinct.len()),
            );
        } else {
            self.emit(
                CheckId::Code08,
                Severity::Pass,
                None,
                format!("{} distinct packages imported", distinct.len()),
            );
        }

        let env = &self.readme.environment;
        if !distinct.is_empty() && !env.is_empty() && env.declared_packages.is_empty() {
            self.emit(
                CheckId::Code09,
                Severity::Info,
                None,
                "environment documented but no package list could be read; imports not verified",
            );
        } else {
            for (f, list) in &imports {
                for (line, package) in list {
                    let distribution = PY_DISTRIBUTIONS
                        .iter()
                        .find(|(import, _)| import == package)
                        .map(|(_, d)| *d);
                    let declared = env.declares(package) || distribution.is_some_and(|d| env.declares(d));
                    if !declared {
                        self.emit(
                            CheckId::Code09,
                            Severity::Warn,
                            Some(Location::at(&f.rel_path, *line)),
                            format!("package {package} is not listed in the environment documentation"),
                        );
                    }
                }
            }
        }
        self.pass_if_silent(CheckId::Code09, "all imported packages documented");
    }

    fn link_checks(&mut self, linkage: &super::LinkageReport) {
        let Some(declared) = self.declared else {
            self.emit(
                CheckId::Link01,
                Severity::NotApplicable,
                None,
                "no declared figures or tables",
            );
            self.emit(
                CheckId::Link02,
                Severity::NotApplicable,
                None,
                "no declared figures or tables",
            );
            return;
        };
        for label in &linkage.unlinked_labels {
            self.emit(
                CheckId::Link01,
                Severity::Fail,
                None,
                format!("{label} is declared but no output file, write or comment produces it"),
            );
        }
        self.pass_if_silent(
            CheckId::Link01,
            &format!(
                "all {} declared labels produced; saved tables should keep the manuscript's row and column order and rounding",
                declared.labels.len()
            ),
        );

        let misnamed: Vec<String> = self
            .inventory
            .entries
            .iter()
            .filter(|e| e.artifact_label.is_none() && e.class != FileClass::IntermediateResult)
            .filter(|e| has_segment(&e.rel_path, FIGURE_DIRS) || has_segment(&e.rel_path, TABLE_DIRS))
            .map(|e| e.rel_path.clone())
            .collect();
        for path in misnamed {
            self.emit(
                CheckId::Link02,
                Severity::Info,
                Some(Location::file(path)),
                "output name does not follow figure_<n>/table_<n>",
            );
        }
        for path in &linkage.orphan_outputs {
            self.emit(
                CheckId::Link02,
                Severity::Info,
                Some(Location::file(path)),
                "labeled output does not match any declared figure or table",
            );
        }
        self.pass_if_silent(CheckId::Link02, "output names follow the labeling convention");
    }

    fn intermediate_checks(&mut self) {
        let threshold = self.config.thresholds.heavy_minutes;
        let heavy: Vec<(&str, f64)> = self
            .inventory
            .of_class(FileClass::Code)
            .filter_map(|e| {
                self.readme
                    .runtime_for(&e.rel_path)
                    .map(|n| n.duration_minutes)
                    .filter(|m| *m > threshold)
                    .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.max(m))))
                    .map(|m| (e.rel_path.as_str(), m))
            })
            .collect();
        if heavy.is_empty() {
            self.emit(
                CheckId::Intr01,
                Severity::NotApplicable,
                None,
                "no script documented as long-running",
            );
        } else {
            for (path, minutes) in heavy {
                let writes = self.facts_for(path).is_some_and(|f| f.writes_intermediates());
                if !writes {
                    self.emit(
                        CheckId::Intr01,
                        Severity::Warn,
                        Some(Location::file(path)),
                        format!("runs about {minutes} minutes but stores no intermediate results"),
                    );
                }
            }
            self.pass_if_silent(CheckId::Intr01, "long-running scripts store intermediate results");
        }

        let writers: Vec<&ScriptFacts> = self
            .facts
            .iter()
            .copied()
            .filter(|f| f.writes_intermediates())
            .collect();
        if writers.is_empty() {
            self.emit(
                CheckId::Intr02,
                Severity::NotApplicable,
                None,
                "no script stores intermediate results",
            );
            return;
        }
        for f in writers {
            if let Some(w) = f.output_writes.iter().find(|w| w.inferred_label.is_some()) {
                self.emit(
                    CheckId::Intr02,
                    Severity::Warn,
                    Some(Location::at(&f.rel_path, w.line)),
                    "script both generates intermediate results and writes final figures or tables",
                );
            }
        }
        self.pass_if_silent(CheckId::Intr02, "generation and evaluation are separate");
    }

    fn synthetic_checks(&mut self) {
        let inv = self.inventory;
        let synthetic_data = inv.of_class(FileClass::Data).any(|e| is_synthetic(&e.rel_path));
        if self.readme.data_availability.is_restricted() {
            if synthetic_data {
                self.emit(
                    CheckId::Synt01,
                    Severity::Pass,
                    None,
                    "synthetic data provided for restricted data",
                );
            } else {
                self.emit(
                    CheckId::Synt01,
                    Severity::Warn,
                    None,
                    "data are restricted but no synthetic data are provided",
                );
            }
        } else {
            self.emit(
                CheckId::Synt01,
                Severity::NotApplicable,
                None,
                "data not declared restricted",
            );
        }

        if !synthetic_data {
            self.emit(CheckId::Synt02, Severity::NotApplicable, None, "no synthetic data");
            return;
        }
        let real_results = inv.entries.iter().any(|e| {
            matches!(
                e.class,
                FileClass::FigureOutput | FileClass::TableOutput | FileClass::IntermediateResult
            ) && !is_synthetic(&e.rel_path)
        });
        if real_results {
            self.emit(
                CheckId::Synt02,
                Severity::Pass,
                None,
                "results from the original data included",
            );
        } else {
            self.emit(
                CheckId::Synt02,
                Severity::Warn,
                None,
                "only synthetic data results; include results from the original data",
            );
        }
    }
}

/// File name without extension, for matching local module imports.
fn name_stem_exact(file_name: &str) -> String {
    file_name.rsplit_once('.').map_or(file_name, |(s, _)| s).to_string()
}

/// True when data files exist and all of them are synthetic.
pub fn uses_synthetic_only(inventory: &SupplementInventory) -> bool {
    let mut data = inventory.of_class(FileClass::Data).peekable();
    data.peek().is_some() && data.all(|e| is_synthetic(&e.rel_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::readme::parse_readme;
    use crate::script::scan_script;
    use crate::supplement::classify_entry;

    fn inv(paths: &[&str], dirs: &[&str]) -> SupplementInventory {
        SupplementInventory::from_entries(
            "/x",
            paths.iter().map(|p| classify_entry(p.to_string(), 1, None)).collect(),
            dirs.iter().map(|d| d.to_string()).collect(),
        )
    }

    fn facts(inv: &SupplementInventory, sources: &[(&str, &str)]) -> Vec<ScriptFacts> {
        sources
            .iter()
            .map(|(p, src)| scan_script(inv.get(p).unwrap(), src))
            .collect()
    }

    fn severities(report: &AuditReport, id: CheckId) -> Vec<Severity> {
        report.findings_for(id).map(|f| f.severity).collect()
    }

    #[test]
    fn inconsistent_input() {
        let i = inv(&["code/a.R"], &["code"]);
        let f = ScriptFacts::empty("code/b.R", Dialect::R);
        let err = run_checks(&i, &ReadmeModel::default(), &[f], None, &CheckConfig::default()).unwrap_err();
        assert_eq!(err, CheckError::InconsistentInput("code/b.R".into()));
    }

    #[test]
    fn every_check_reported() {
        let i = inv(&[], &[]);
        let r = run_checks(&i, &ReadmeModel::default(), &[], None, &CheckConfig::default()).unwrap();
        for id in CheckId::ALL {
            assert!(r.worst(*id).is_some(), "{id}");
        }
        assert_eq!(r.worst(CheckId::Link01), Some(Severity::NotApplicable));
        assert_eq!(r.worst(CheckId::Struct03), Some(Severity::Fail));
    }

    #[test]
    fn seed_in_upstream_step() {
        let i = inv(&["README.md", "code/01_setup.R", "code/02_sim.R"], &["code"]);
        let src = [
            ("code/01_setup.R", "set.seed(1)\n"),
            ("code/02_sim.R", "x <- rnorm(3)\n"),
        ];
        let f = facts(&i, &src);
        let ordered = parse_readme("1. code/01_setup.R\n2. code/02_sim.R\n", &i);
        let r = run_checks(&i, &ordered, &f, None, &CheckConfig::default()).unwrap();
        assert_eq!(severities(&r, CheckId::Code03), [Severity::Pass]);

        let reversed = parse_readme("1. code/02_sim.R\n2. code/01_setup.R\n", &i);
        let r = run_checks(&i, &reversed, &f, None, &CheckConfig::default()).unwrap();
        assert_eq!(severities(&r, CheckId::Code03), [Severity::Fail]);

        let none = ReadmeModel::default();
        let r = run_checks(&i, &none, &f, None, &CheckConfig::default()).unwrap();
        let fail = r.findings_for(CheckId::Code03).next().unwrap();
        assert_eq!(fail.location, Some(Location::at("code/02_sim.R", 1)));
    }

    #[test]
    fn non_literal_seed_is_warn() {
        let i = inv(&["code/a.R"], &["code"]);
        let f = facts(&i, &[("code/a.R", "set.seed(my_seed)\nx <- runif(1)\n")]);
        let r = run_checks(&i, &ReadmeModel::default(), &f, None, &CheckConfig::default()).unwrap();
        assert_eq!(severities(&r, CheckId::Code03), [Severity::Warn]);
    }

    #[test]
    fn overrides_respect_floor() {
        let i = inv(&["code/a.R"], &["code"]);
        let f = facts(&i, &[("code/a.R", "setwd(\"/home/a\")\nx<-rnorm(1)\n")]);
        let mut cfg = CheckConfig::default();
        cfg.severity_overrides.insert(CheckId::Code01, Severity::Pass);
        cfg.severity_overrides.insert(CheckId::Code03, Severity::Warn);
        cfg.severity_overrides.insert(CheckId::Code06, Severity::Pass);
        let r = run_checks(&i, &ReadmeModel::default(), &f, None, &cfg).unwrap();
        assert_eq!(severities(&r, CheckId::Code01), [Severity::Info]);
        assert_eq!(severities(&r, CheckId::Code03), [Severity::Warn]);
        assert_eq!(severities(&r, CheckId::Code06), [Severity::Pass]);
    }

    #[test]
    fn parallel_streams() {
        let i = inv(&["code/a.R", "code/b.R"], &["code"]);
        let f = facts(
            &i,
            &[
                ("code/a.R", "set.seed(1)\nr <- mclapply(1:4, function(i) rnorm(1))\n"),
                ("code/b.R", "r <- parLapply(cl, 1:4, f)\n"),
            ],
        );
        let r = run_checks(&i, &ReadmeModel::default(), &f, None, &CheckConfig::default()).unwrap();
        assert_eq!(severities(&r, CheckId::Code04), [Severity::Fail, Severity::Warn]);
        assert_eq!(severities(&r, CheckId::Code05), [Severity::Info]);
    }

    #[test]
    fn imports_against_environment() {
        let i = inv(&["code/a.py", "code/helpers.py", "requirements.txt"], &["code"]);
        let f = facts(
            &i,
            &[
                (
                    "code/a.py",
                    "import os\nimport numpy as np\nimport helpers\nfrom sklearn import svm\nimport pandas\n",
                ),
                ("code/helpers.py", ""),
            ],
        );
        let mut readme = ReadmeModel::default();
        readme.environment.spec_files = vec!["requirements.txt".into()];
        readme.environment.declared_packages =
            crate::readme::parse_spec_packages("requirements.txt", "numpy==1.26\nscikit-learn==1.4\n");
        let r = run_checks(&i, &readme, &f, None, &CheckConfig::default()).unwrap();
        let warns: Vec<_> = r.findings_for(CheckId::Code09).map(|f| f.message.clone()).collect();
        assert_eq!(warns, ["package pandas is not listed in the environment documentation"]);
    }

    #[test]
    fn consolidation_heuristic() {
        let names: Vec<String> = (1..=16).map(|n| format!("code/sim_{n}.R")).collect();
        let paths: Vec<&str> = names.iter().map(String::as_str).collect();
        let i = inv(&paths, &["code"]);
        let r = run_checks(&i, &ReadmeModel::default(), &[], None, &CheckConfig::default()).unwrap();
        assert_eq!(severities(&r, CheckId::Struct06), [Severity::Info]);
        assert_eq!(name_stem("01_sim_scenario2.R"), "sim_scenario");
    }

    #[test]
    fn synthetic_and_restricted() {
        let i = inv(
            &[
                "data/synthetic_data.csv",
                "results/tables/table_1.csv",
                "results/synthetic/tables/table_1.csv",
            ],
            &["data", "results"],
        );
        let readme = parse_readme("The data cannot be shared. We provide synthetic data.", &i);
        let r = run_checks(&i, &readme, &[], None, &CheckConfig::default()).unwrap();
        assert_eq!(severities(&r, CheckId::Synt01), [Severity::Pass]);
        assert_eq!(severities(&r, CheckId::Synt02), [Severity::Pass]);
        assert!(uses_synthetic_only(&i));
        let only_synth = i.without("results/tables/table_1.csv");
        let r = run_checks(&only_synth, &readme, &[], None, &CheckConfig::default()).unwrap();
        assert_eq!(severities(&r, CheckId::Synt02), [Severity::Warn]);
    }

    #[test]
    fn heavy_scripts_need_intermediates() {
        let i = inv(&["README.md", "code/sim.R"], &["code"]);
        let f = facts(&i, &[("code/sim.R", "set.seed(1)\nx <- rnorm(1e6)\n")]);
        let readme = parse_readme("1. code/sim.R: about 3 hours on a laptop\n", &i);
        let r = run_checks(&i, &readme, &f, None, &CheckConfig::default()).unwrap();
        assert_eq!(severities(&r, CheckId::Intr01), [Severity::Warn]);
        assert_eq!(severities(&r, CheckId::Intr02), [Severity::NotApplicable]);
    }

    #[test]
    fn findings_sorted_and_counted() {
        let i = inv(&["code/a b.R", "data/x.csv"], &["code", "data"]);
        let r = run_checks(&i, &ReadmeModel::default(), &[], None, &CheckConfig::default()).unwrap();
        let keys: Vec<_> = r.findings.iter().map(|f| (f.check, f.location.clone())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        let total: usize = r.counts.values().sum();
        assert_eq!(total, r.findings.len());
    }
}
