//! Command-line front end. [`run`] is the whole program minus process exit,
//! so tests can drive it in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use repro_audit::audit::{audit_supplement, score_run};
use repro_audit::checks::{builtin_catalog, Severity};
use repro_audit::config::{load_config, AuditConfig};
use repro_audit::init::init_skeleton;
use repro_audit::report::{
    audit_exit_code, render_json, render_profile_text, render_spotcheck_text, render_structured, render_text,
    spotcheck_exit_code, SpotCheckDocument, StructuredReport, ToolInfo, EXIT_INTERNAL, EXIT_OK, SCHEMA_VERSION,
};
use repro_audit::scoring::{
    Dimension, PolicyKind, ReproducibilityScope, SpotCheckEvidence, VerificationScope, VerificationSource,
};
use repro_audit::spotcheck::{
    parse_manifest, run_spotcheck, select_replications, summarize, RunOptions, Selection, ShellRunner,
    SpotCheckOutcome, DEFAULT_TIMEOUT_SECS,
};

#[derive(Debug, Parser)]
#[command(
    name = "repro-audit",
    version,
    about = "Audit the reproducibility of a code and data supplement"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every check and list the findings.
    Audit(AuditArgs),
    /// Audit, then derive the A-E profile.
    Score(ScoreArgs),
    /// Re-run selected replications and compare them with stored results.
    Spotcheck(SpotcheckArgs),
    /// Create an empty supplement skeleton.
    Init(InitArgs),
    /// Print the check catalog.
    Checklist(ChecklistArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FailOn {
    Info,
    Warn,
    Fail,
}

impl FailOn {
    fn severity(self) -> Severity {
        match self {
            FailOn::Info => Severity::Info,
            FailOn::Warn => Severity::Warn,
            FailOn::Fail => Severity::Fail,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Supplement root directory.
    #[arg(long, default_value = ".")]
    pub root: PathBuf,
    /// Config file; falls back to $REPRO_AUDIT_CONFIG, then <root>/repro-audit.toml.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Manuscript labels, e.g. "Figure 1,Table 1,Table 2".
    #[arg(long)]
    pub declared_labels: Option<String>,
    /// Omit the generation timestamp (the default).
    #[arg(long, conflicts_with = "emit_timestamp")]
    pub no_timestamp: bool,
    /// Include the generation time in JSON output.
    #[arg(long)]
    pub emit_timestamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Lowest severity that makes the exit code 1.
    #[arg(long, value_enum, default_value_t = FailOn::Fail)]
    pub fail_on: FailOn,
}

#[derive(Debug, Clone, Args)]
pub struct SelectionArgs {
    /// Spot-check manifest; defaults to `spotcheck_manifest` from the config.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Replication ids to run, comma separated.
    #[arg(long, conflicts_with_all = ["random", "reduced"])]
    pub ids: Option<String>,
    /// Run k randomly chosen replications.
    #[arg(long, conflicts_with = "reduced")]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0, requires = "random")]
    pub audit_seed: u64,
    /// Run the manifest's reduced replication set.
    #[arg(long)]
    pub reduced: bool,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Per-replication timeout in seconds.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT_SECS)]
    pub timeout: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub attestation_source: Option<VerificationSource>,
    #[arg(long)]
    pub attestation_scope: Option<VerificationScope>,
    #[arg(long)]
    pub attestation_repro: Option<ReproducibilityScope>,
    /// Aggregation weights, e.g. "A=1,B=1,C=1,D=2,E=1".
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub policy: Option<PolicyKind>,
    /// Also run spot checks from this manifest and use them as evidence.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SpotcheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub selection: SelectionArgs,
}

#[derive(Debug, Clone, Args)]
pub struct InitArgs {
    /// Directory to create; must be empty or absent.
    #[arg(default_value = ".")]
    pub target: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ChecklistArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

/// Parses `A=1,B=2` into per-dimension weights.
pub fn parse_weights(text: &str) -> Result<Vec<(Dimension, f64)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .with_context(|| format!("weight {pair:?} is not DIM=VALUE"))?;
            let mut chars = k.trim().chars();
            let dim = match (chars.next().and_then(Dimension::from_letter), chars.next()) {
                (Some(d), None) => d,
                _ => bail!("unknown dimension {k:?}"),
            };
            let w: f64 = v
                .trim()
                .parse()
                .with_context(|| format!("weight {v:?} is not a number"))?;
            Ok((dim, w))
        })
        .collect()
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

struct Loaded {
    root: PathBuf,
    config: AuditConfig,
    config_path: Option<PathBuf>,
}

fn load(common: &CommonArgs) -> Result<Loaded> {
    let root = &common.root;
    if !root.is_dir() {
        bail!(
            "supplement root {} does not exist or is not a directory",
            root.display()
        );
    }
    let (mut config, config_path) = load_config(common.config.as_deref(), root)?;
    if let Some(labels) = &common.declared_labels {
        config.declared_labels = labels
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
    }
    if common.emit_timestamp {
        config.emit_timestamp = true;
    }
    if common.no_timestamp {
        config.emit_timestamp = false;
    }
    config.validate()?;
    Ok(Loaded {
        root: root.clone(),
        config,
        config_path,
    })
}

fn cmd_audit(args: &AuditArgs, out: &mut dyn Write) -> Result<i32> {
    let loaded = load(&args.common)?;
    let run = audit_supplement(&loaded.root, &loaded.config, loaded.config_path.as_deref())?;
    let code = audit_exit_code(&run.report, args.fail_on.severity());
    match args.common.format {
        OutputFormat::Text => out.write_all(render_text(&run.report).as_bytes())?,
        OutputFormat::Json => {
            let mut doc = StructuredReport::new(run.report, loaded.config.clone());
            doc.generated_at_unix = loaded.config.emit_timestamp.then(now_unix);
            out.write_all(render_structured(&doc).as_bytes())?;
        }
    }
    Ok(code)
}

fn selection(args: &SelectionArgs) -> Result<Selection> {
    Ok(if let Some(ids) = &args.ids {
        let ids: Vec<String> = ids
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        if ids.is_empty() {
            bail!("--ids lists no replication ids");
        }
        Selection::Explicit(ids)
    } else if let Some(k) = args.random {
        Selection::Random {
            k,
            audit_seed: args.audit_seed,
        }
    } else if args.reduced {
        Selection::Reduced
    } else {
        Selection::All
    })
}

fn manifest_path(explicit: Option<&Path>, loaded: &Loaded) -> Result<PathBuf> {
    match (explicit, &loaded.config.spotcheck_manifest) {
        (Some(p), _) => Ok(p.to_path_buf()),
        (None, Some(rel)) => Ok(loaded.root.join(rel)),
        (None, None) => bail!("no spot-check manifest: pass --manifest or set spotcheck_manifest in the config"),
    }
}

fn spot_check(
    loaded: &Loaded,
    manifest: &Path,
    selection: &Selection,
    jobs: usize,
    timeout: u64,
) -> Result<Vec<SpotCheckOutcome>> {
    let text = std::fs::read_to_string(manifest).with_context(|| format!("cannot read {}", manifest.display()))?;
    let manifest = parse_manifest(&text)?;
    let selected = select_replications(&manifest, selection)?;
    let options = RunOptions {
        timeout: Duration::from_secs(timeout),
        jobs,
        scratch_base: None,
    };
    Ok(run_spotcheck(
        &loaded.root,
        &manifest,
        &selected,
        &ShellRunner,
        &options,
    ))
}

fn selection_label(s: &Selection) -> String {
    match s {
        Selection::All => "all".into(),
        Selection::Reduced => "reduced".into(),
        Selection::Explicit(ids) => format!("ids {}", ids.join(",")),
        Selection::Random { k, audit_seed } => format!("random {k} (audit seed {audit_seed})"),
    }
}

fn cmd_spotcheck(args: &SpotcheckArgs, out: &mut dyn Write) -> Result<i32> {
    let loaded = load(&args.common)?;
    let path = manifest_path(args.selection.manifest.as_deref(), &loaded)?;
    let sel = selection(&args.selection)?;
    let outcomes = spot_check(&loaded, &path, &sel, args.selection.jobs, args.selection.timeout)?;
    let code = spotcheck_exit_code(&outcomes);
    match args.common.format {
        OutputFormat::Text => out.write_all(render_spotcheck_text(&outcomes).as_bytes())?,
        OutputFormat::Json => {
            let doc = SpotCheckDocument {
                schema_version: SCHEMA_VERSION,
                tool: ToolInfo::default(),
                manifest: path.display().to_string(),
                selection: selection_label(&sel),
                outcomes,
                generated_at_unix: loaded.config.emit_timestamp.then(now_unix),
            };
            out.write_all(render_json(&doc).as_bytes())?;
        }
    }
    Ok(code)
}

fn cmd_score(args: &ScoreArgs, out: &mut dyn Write) -> Result<i32> {
    let mut loaded = load(&args.common)?;
    let att = &mut loaded.config.attestation;
    if let Some(s) = args.attestation_source {
        att.verification_source = s;
    }
    if let Some(s) = args.attestation_scope {
        att.verification_scope = s;
    }
    if let Some(s) = args.attestation_repro {
        att.reproducibility_scope = s;
    }
    if let Some(p) = args.policy {
        loaded.config.scoring.policy = p;
    }
    if let Some(w) = &args.weights {
        loaded.config.scoring.weights.extend(parse_weights(w)?);
    }
    loaded.config.validate()?;
    let run = audit_supplement(&loaded.root, &loaded.config, loaded.config_path.as_deref())?;
    let outcomes = match &args.manifest {
        Some(m) => Some(spot_check(&loaded, m, &Selection::All, 1, DEFAULT_TIMEOUT_SECS)?),
        None => None,
    };
    let evidence: Option<SpotCheckEvidence> = outcomes.as_deref().map(|o| summarize(o, false));
    let explained = score_run(&run, &loaded.config, evidence.as_ref())?;
    match args.common.format {
        OutputFormat::Text => out.write_all(render_profile_text(&explained.profile, &explained.reasons).as_bytes())?,
        OutputFormat::Json => {
            let mut doc = StructuredReport::new(run.report, loaded.config.clone());
            doc.profile = Some(explained.profile);
            doc.spotcheck = outcomes;
            doc.generated_at_unix = loaded.config.emit_timestamp.then(now_unix);
            out.write_all(render_structured(&doc).as_bytes())?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_init(args: &InitArgs, out: &mut dyn Write) -> Result<i32> {
    for path in init_skeleton(&args.target)? {
        writeln!(out, "created {}", path.display())?;
    }
    Ok(EXIT_OK)
}

fn cmd_checklist(args: &ChecklistArgs, out: &mut dyn Write) -> Result<i32> {
    match args.format {
        OutputFormat::Text => {
            for c in builtin_catalog() {
                writeln!(
                    out,
                    "{:<10} {:<5} {} [{}]",
                    c.id.as_str(),
                    c.default_severity.label(),
                    c.description,
                    c.guideline
                )?;
            }
        }
        OutputFormat::Json => {
            let items: Vec<serde_json::Value> = builtin_catalog()
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "id": c.id,
                        "description": c.description,
                        "default_severity": c.default_severity,
                        "guideline": c.guideline,
                    })
                })
                .collect();
            out.write_all(render_json(&items).as_bytes())?;
        }
    }
    Ok(EXIT_OK)
}

/// Runs the program on `args` (including the program name) and returns the
/// exit code: 0 clean, 1 findings or failed spot checks, 2 internal error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INTERNAL,
            };
        }
    };
    let result = match &cli.command {
        Command::Audit(a) => cmd_audit(a, out),
        Command::Score(a) => cmd_score(a, out),
        Command::Spotcheck(a) => cmd_spotcheck(a, out),
        Command::Init(a) => cmd_init(a, out),
        Command::Checklist(a) => cmd_checklist(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_INTERNAL
        }
    }
}
