//! Property checks shared by the property suite and the acceptance target.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::sample::Index;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};
use repro_audit::audit::audit_supplement;
use repro_audit::checks::{build_linkage, AuditReport, DeclaredLabels, Severity};
use repro_audit::config::AuditConfig;
use repro_audit::scoring::{
    aggregate, derive_profile, AggregationPolicy, Attestation, Dimension, PolicyKind, RubricConfig, ScoreProfile,
    E_POOL,
};
use repro_audit::script::{detect_absolute, scan_script};
use repro_audit::supplement::{classify_entry, ArtifactKind, ArtifactLabel, SupplementInventory};

use super::{audit_fixture, fixture, fixture_config, FIXTURES};

pub const CASES: u32 = 256;
pub const SUITE_SEED: u64 = 0x5eed_0a0d;

pub fn config() -> Config {
    Config {
        cases: CASES,
        rng_seed: RngSeed::Fixed(SUITE_SEED),
        failure_persistence: None,
        ..Config::default()
    }
}

fn check<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    TestRunner::new(config())
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

fn fixture_reports() -> &'static Vec<AuditReport> {
    static REPORTS: OnceLock<Vec<AuditReport>> = OnceLock::new();
    REPORTS.get_or_init(|| FIXTURES.iter().map(|n| audit_fixture(n).report).collect())
}

fn label_strategy() -> impl Strategy<Value = ArtifactLabel> {
    (
        prop_oneof![Just(ArtifactKind::Figure), Just(ArtifactKind::Table)],
        1u32..6,
    )
        .prop_map(|(kind, n)| ArtifactLabel::new(kind, n).unwrap())
}

fn output_path(label: ArtifactLabel, variant: u8) -> String {
    let (dir, stem) = match label.kind {
        ArtifactKind::Figure => ("figures", "figure"),
        ArtifactKind::Table => ("tables", "table"),
    };
    let ext = match (label.kind, variant % 2) {
        (ArtifactKind::Figure, 0) => "pdf",
        (ArtifactKind::Figure, _) => "png",
        (ArtifactKind::Table, 0) => "csv",
        (ArtifactKind::Table, _) => "tex",
    };
    format!("results/{dir}/v{variant}/{stem}_{}.{ext}", label.number())
}

/// unlinked = declared - produced; orphan labels = output-file labels - declared.
pub fn linkage_identities() -> Result<(), String> {
    let strategy = (
        prop::collection::btree_set(label_strategy(), 0..5),
        prop::collection::vec((label_strategy(), 0u8..4), 0..6),
        prop::collection::vec(label_strategy(), 0..4),
    );
    check(strategy, |(declared, outputs, written)| {
        let mut entries: Vec<_> = outputs
            .iter()
            .map(|(l, v)| classify_entry(output_path(*l, *v), 10, None))
            .collect();
        let script: String = written
            .iter()
            .map(|l| format!("ggsave(\"{}\")\n", output_path(*l, 0)))
            .collect();
        let code = classify_entry("code/make.R".to_string(), script.len() as u64, None);
        entries.push(code.clone());
        let inventory = SupplementInventory::from_entries("/p", entries, vec![]);
        let facts = vec![scan_script(&code, &script)];
        let declared_set = DeclaredLabels::new(declared.iter().copied());
        let link = build_linkage(&inventory, &facts, &declared_set);

        let produced: BTreeSet<ArtifactLabel> = link.produced.keys().copied().collect();
        for l in outputs.iter().map(|(l, _)| l).chain(written.iter()) {
            prop_assert!(produced.contains(l), "{l} has evidence but is not in produced");
        }
        if declared.is_empty() {
            prop_assert!(link.unlinked_labels.is_empty() && link.orphan_outputs.is_empty());
            return Ok(());
        }
        let want_unlinked: BTreeSet<_> = declared.difference(&produced).copied().collect();
        prop_assert_eq!(&link.unlinked_labels, &want_unlinked);
        let want_orphans: BTreeSet<String> = outputs
            .iter()
            .filter(|(l, _)| !declared.contains(l))
            .map(|(l, v)| output_path(*l, *v))
            .collect();
        prop_assert_eq!(&link.orphan_outputs, &want_orphans);
        let orphan_labels: BTreeSet<ArtifactLabel> = link
            .orphan_outputs
            .iter()
            .map(|p| inventory.get(p).and_then(|e| e.artifact_label).unwrap())
            .collect();
        let file_labels: BTreeSet<ArtifactLabel> = outputs.iter().map(|(l, _)| *l).collect();
        prop_assert_eq!(
            orphan_labels,
            file_labels.difference(&declared).copied().collect::<BTreeSet<_>>()
        );
        Ok(())
    })
}

fn copy_tree(from: &Path, to: &Path) {
    for entry in walkdir::WalkDir::new(from) {
        let entry = entry.unwrap();
        let rel = entry.path().strip_prefix(from).unwrap();
        let dest = to.join(rel);
        if entry.file_type().is_dir() {
            std::fs::create_dir_all(&dest).unwrap();
        } else {
            std::fs::copy(entry.path(), &dest).unwrap();
        }
    }
}

fn level_a(root: &Path, config: &AuditConfig) -> u8 {
    let run = audit_supplement(root, config, None).unwrap();
    derive_profile(
        &run.report,
        &run.inventory,
        &run.readme,
        &Attestation::default(),
        None,
        &RubricConfig::default(),
    )
    .level(Dimension::A)
}

/// Deleting files from a supplement never raises A.
pub fn a_monotone_under_removal() -> Result<(), String> {
    let strategy = (0..FIXTURES.len(), prop::collection::vec(any::<bool>(), 16));
    check(strategy, |(which, mask)| {
        let src = fixture(FIXTURES[which]);
        let (config, _) = fixture_config(&src);
        let dir = tempfile::tempdir().unwrap();
        copy_tree(&src, dir.path());
        let before = level_a(dir.path(), &config);
        let files: Vec<_> = walkdir::WalkDir::new(dir.path())
            .sort_by_file_name()
            .into_iter()
            .map(|e| e.unwrap())
            .filter(|e| e.file_type().is_file())
            .map(|e| e.into_path())
            .collect();
        for (path, remove) in files.iter().zip(mask.iter().cycle()) {
            if *remove {
                std::fs::remove_file(path).unwrap();
            }
        }
        let after = level_a(dir.path(), &config);
        prop_assert!(after <= before, "A rose from {before} to {after}");
        Ok(())
    })
}

fn recount(report: &mut AuditReport) {
    report.counts.clear();
    for f in &report.findings {
        *report.counts.entry(f.severity).or_insert(0) += 1;
    }
}

fn level_e(report: &AuditReport, inventory: &SupplementInventory) -> u8 {
    derive_profile(
        report,
        inventory,
        &Default::default(),
        &Attestation::default(),
        None,
        &RubricConfig::default(),
    )
    .level(Dimension::E)
}

/// Turning an E-pool Fail into a Pass never lowers E.
pub fn e_monotone_under_flips() -> Result<(), String> {
    let sev = prop_oneof![
        Just(Severity::NotApplicable),
        Just(Severity::Pass),
        Just(Severity::Info),
        Just(Severity::Warn),
        Just(Severity::Fail),
    ];
    let strategy = (0..FIXTURES.len(), prop::collection::vec(sev, 48), any::<Index>());
    check(strategy, |(which, severities, pick)| {
        let mut report = fixture_reports()[which].clone();
        for (f, s) in report.findings.iter_mut().zip(severities) {
            f.severity = s;
        }
        recount(&mut report);
        let inventory = SupplementInventory::from_entries("/p", vec![], vec![]);
        let before = level_e(&report, &inventory);
        let fails: Vec<usize> = report
            .findings
            .iter()
            .enumerate()
            .filter(|(_, f)| f.severity == Severity::Fail && E_POOL.contains(&f.check))
            .map(|(i, _)| i)
            .collect();
        if fails.is_empty() {
            return Ok(());
        }
        report.findings[fails[pick.index(fails.len())]].severity = Severity::Pass;
        recount(&mut report);
        let after = level_e(&report, &inventory);
        prop_assert!(after >= before, "E fell from {before} to {after}");
        Ok(())
    })
}

/// min <= weighted floor <= max, and scaling every weight leaves the tier alone.
pub fn aggregate_bounds_and_scale() -> Result<(), String> {
    let strategy = (
        [0u8..4, 0u8..4, 0u8..4, 0u8..4, 0u8..4],
        [0.0f64..10.0, 0.0f64..10.0, 0.0f64..10.0, 0.0f64..10.0, 0.0f64..10.0],
        0usize..5,
        0.01f64..100.0,
    );
    check(strategy, |(levels, weights, positive, scale)| {
        let mut weights = weights;
        weights[positive] += 0.5;
        let profile = ScoreProfile::from_levels(levels);
        let tier_for = |factor: f64| {
            let mut policy = AggregationPolicy::new(PolicyKind::WeightedFloor);
            for (d, w) in Dimension::ALL.into_iter().zip(weights) {
                policy.weights.insert(d, w * factor);
            }
            aggregate(&profile, &policy).unwrap().aggregate.unwrap().tier
        };
        let lo = *levels.iter().min().unwrap();
        let hi = *levels.iter().max().unwrap();
        let min_tier = aggregate(&profile, &AggregationPolicy::new(PolicyKind::Min))
            .unwrap()
            .aggregate
            .unwrap()
            .tier;
        prop_assert_eq!(min_tier, lo);
        let tier = tier_for(1.0);
        prop_assert!(lo <= tier && tier <= hi, "tier {tier} outside [{lo}, {hi}]");
        prop_assert_eq!(tier_for(scale), tier);
        Ok(())
    })
}

/// Prefixing "/" turns any relative path into an absolute one.
pub fn absolute_path_closure() -> Result<(), String> {
    let strategy = "[A-Za-z0-9_.-][A-Za-z0-9_. -]{0,11}(/[A-Za-z0-9_. -]{1,12}){0,4}";
    check(strategy, |rel: String| {
        prop_assert!(!detect_absolute(&rel).0, "{rel:?} already absolute");
        let abs = format!("/{rel}");
        prop_assert!(detect_absolute(&abs).0, "{abs:?} not absolute");
        Ok(())
    })
}
