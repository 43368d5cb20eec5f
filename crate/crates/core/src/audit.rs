//! End-to-end pipeline: scan, README, scripts, checks and scoring.

use std::collections::BTreeMap;
use std::path::Path;

use crate::checks::{run_checks, AuditReport};
use crate::config::AuditConfig;
use crate::error::{AuditError, ScanError};
use crate::readme::{decode_text, detect_environment_evidence, find_readme, parse_readme, ReadmeModel};
use crate::scoring::{aggregate, explain_profile, ExplainedProfile, SpotCheckEvidence};
use crate::script::{scan_script_bytes, ScriptFacts};
use crate::supplement::{scan_supplement, FileClass, ScanConfig, SupplementInventory};

/// Everything the pipeline learned about one supplement.
#[derive(Debug, Clone)]
pub struct AuditRun {
    pub inventory: SupplementInventory,
    pub readme: ReadmeModel,
    pub facts: Vec<ScriptFacts>,
    pub report: AuditReport,
}

fn read(root: &Path, rel: &str) -> Result<Vec<u8>, ScanError> {
    let path = root.join(rel);
    std::fs::read(&path).map_err(|source| ScanError::Io { path, source })
}

/// Runs every check on the supplement at `root`.
///
/// `config_path`, when it lies inside the root, is left out of the README
/// file-overview check.
pub fn audit_supplement(root: &Path, config: &AuditConfig, config_path: Option<&Path>) -> Result<AuditRun, AuditError> {
    config.validate()?;
    let mut scan = ScanConfig::new(root);
    scan.ignore_globs.extend(config.ignore_globs.iter().cloned());
    let inventory = scan_supplement(&scan)?;

    let mut readme = match find_readme(&inventory) {
        Some(entry) => parse_readme(&decode_text(&read(root, &entry.rel_path)?), &inventory),
        None => ReadmeModel::default(),
    };
    let mut spec_texts = BTreeMap::new();
    for entry in inventory.of_class(FileClass::EnvironmentSpec) {
        spec_texts.insert(entry.rel_path.clone(), decode_text(&read(root, &entry.rel_path)?));
    }
    readme.environment = detect_environment_evidence(&readme, &inventory, &spec_texts);

    let mut facts = Vec::new();
    for entry in inventory.of_class(FileClass::Code) {
        facts.push(scan_script_bytes(entry, &read(root, &entry.rel_path)?));
    }

    let labels = config.labels()?;
    let mut check_config = config.check_config();
    if let Some(rel) = config_path.and_then(|p| relative_to(root, p)) {
        check_config.overview_exempt.insert(rel);
    }
    let report = run_checks(&inventory, &readme, &facts, Some(&labels), &check_config)?;
    Ok(AuditRun {
        inventory,
        readme,
        facts,
        report,
    })
}

fn relative_to(root: &Path, path: &Path) -> Option<String> {
    let root = root.canonicalize().ok()?;
    let path = path.canonicalize().ok()?;
    let rel = path.strip_prefix(&root).ok()?;
    Some(rel.to_string_lossy().replace('\\', "/"))
}

/// Profile for an audited supplement, aggregated per the configured policy.
pub fn score_run(
    run: &AuditRun,
    config: &AuditConfig,
    spot: Option<&SpotCheckEvidence>,
) -> Result<ExplainedProfile, AuditError> {
    let mut explained = explain_profile(
        &run.report,
        &run.inventory,
        &run.readme,
        &config.attestation,
        spot,
        &config.rubric(),
    );
    explained.profile = aggregate(&explained.profile, &config.aggregation_policy())?;
    Ok(explained)
}
