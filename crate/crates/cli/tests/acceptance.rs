//! Acceptance criteria, one PASS/FAIL line each.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use common::{diff_expected, expected, fixture, props, spot, FIXTURES};
use repro_audit::checks::{CheckId, Severity};
use repro_audit::report::{parse_structured, render_structured};
use repro_audit::scoring::{derive_profile, Attestation, Dimension, RubricConfig, ScoreProfile};

const GOLDEN_BUDGET: Duration = Duration::from_secs(5);
const MIN_FIXTURES: usize = 6;
const MIN_PROPERTY_CASES: u32 = 200;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repro-audit"))
        .args(args)
        .env_remove("REPRO_AUDIT_CONFIG")
        .output()
        .expect("binary runs")
}

fn audit_json(root: &Path) -> Result<Vec<u8>, String> {
    let out = cli(&[
        "audit",
        "--format",
        "json",
        "--no-timestamp",
        "--root",
        root.to_str().unwrap(),
    ]);
    match out.status.code() {
        Some(0 | 1) => Ok(out.stdout),
        code => Err(format!(
            "audit exited with {code:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        )),
    }
}

fn golden_audits() -> Outcome {
    if FIXTURES.len() < MIN_FIXTURES {
        return Err(format!("only {} fixtures", FIXTURES.len()));
    }
    let start = Instant::now();
    let mut problems = Vec::new();
    for name in FIXTURES {
        let body = audit_json(&fixture(name))?;
        let doc = parse_structured(&String::from_utf8(body).unwrap()).map_err(|e| e.to_string())?;
        problems.extend(
            diff_expected(&doc.report, &expected(name))
                .into_iter()
                .map(|p| format!("{name}: {p}")),
        );
    }
    let elapsed = start.elapsed();
    if elapsed >= GOLDEN_BUDGET {
        problems.push(format!("corpus took {elapsed:?}"));
    }
    if problems.is_empty() {
        Ok(format!("{} fixtures reproduced exactly in {elapsed:?}", FIXTURES.len()))
    } else {
        Err(problems.join("; "))
    }
}

fn determinism() -> Outcome {
    for name in FIXTURES {
        let a = audit_json(&fixture(name))?;
        let b = audit_json(&fixture(name))?;
        if a != b {
            return Err(format!("{name}: consecutive JSON reports differ"));
        }
    }
    Ok("consecutive JSON reports byte-identical".into())
}

fn profile(name: &str, attestation: &Attestation) -> ScoreProfile {
    let run = common::audit_fixture(name);
    derive_profile(
        &run.report,
        &run.inventory,
        &run.readme,
        attestation,
        None,
        &RubricConfig::default(),
    )
}

fn journal_calibration() -> Outcome {
    let cases = [
        (
            "Biometrical Journal",
            Attestation::from_journal_policy(true, "reproducible research editors"),
        ),
        (
            "Annals of Internal Medicine",
            Attestation::from_journal_policy(false, ""),
        ),
        (
            "Journal of Statistical Software",
            Attestation::from_journal_policy(true, "reviewers & replication editors"),
        ),
    ];
    for name in FIXTURES {
        for (journal, att) in &cases {
            let p = profile(name, att);
            let (b, c) = (p.level(Dimension::B), p.level(Dimension::C));
            let ok = if journal.starts_with("Annals") {
                b <= 1 && c == 0
            } else {
                b == 3 && c == 3
            };
            if !ok {
                return Err(format!("{journal} on {name}: B{b} C{c}"));
            }
        }
    }
    Ok("BJ B3 C3, Annals B<=1 C0, JSS B3 C3".into())
}

fn rubric_anchors() -> Outcome {
    let none = Attestation::default();
    let got: Vec<u8> = ["fix_code_only", "fix_no_readme", "fix_compliant"]
        .iter()
        .map(|n| profile(n, &none).level(Dimension::A))
        .collect();
    if got == [1, 2, 3] {
        Ok("code only A1, code and data A2, plus codebook and environment A3".into())
    } else {
        Err(format!("levels {got:?}"))
    }
}

fn property_suites() -> Outcome {
    if props::CASES < MIN_PROPERTY_CASES {
        return Err(format!("only {} cases", props::CASES));
    }
    props::linkage_identities().map_err(|e| format!("linkage: {e}"))?;
    props::a_monotone_under_removal().map_err(|e| format!("A monotonicity: {e}"))?;
    props::e_monotone_under_flips().map_err(|e| format!("E monotonicity: {e}"))?;
    props::aggregate_bounds_and_scale().map_err(|e| format!("aggregate: {e}"))?;
    props::absolute_path_closure().map_err(|e| format!("absolute paths: {e}"))?;
    Ok(format!(
        "5 properties, {} cases each, seed {:#x}",
        props::CASES,
        props::SUITE_SEED
    ))
}

fn spotcheck_oracle() -> Outcome {
    let planted = spot::planted_statuses()?;
    spot::tolerance_boundary()?;
    let reduced = spot::reduced_selection()?;
    Ok(format!("{planted}; boundary matches; {reduced}"))
}

fn init_self_consistency() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("supplement");
    let init = cli(&["init", target.to_str().unwrap()]);
    if !init.status.success() {
        return Err(format!("init failed: {}", String::from_utf8_lossy(&init.stderr)));
    }
    let doc = parse_structured(&String::from_utf8(audit_json(&target)?).unwrap()).map_err(|e| e.to_string())?;
    for id in [CheckId::Struct01, CheckId::Struct02, CheckId::Struct03] {
        if doc.report.worst(id) != Some(Severity::Pass) {
            return Err(format!("{id} is {:?}", doc.report.worst(id)));
        }
    }
    match doc.report.count(Severity::Fail) {
        0 => Ok("STRUCT-01/02/03 pass, no failures".into()),
        n => Err(format!("{n} failing findings")),
    }
}

fn round_trip() -> Outcome {
    for name in FIXTURES {
        let text = String::from_utf8(audit_json(&fixture(name))?).unwrap();
        let doc = parse_structured(&text).map_err(|e| format!("{name}: {e}"))?;
        let again = render_structured(&doc);
        if again != text || parse_structured(&again).map_err(|e| e.to_string())? != doc {
            return Err(format!("{name}: round trip changed the report"));
        }
    }
    Ok("parse(render(R)) = R for every fixture".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("golden fixture audits", golden_audits),
        ("determinism", determinism),
        ("journal policy calibration", journal_calibration),
        ("rubric anchors", rubric_anchors),
        ("property suites", property_suites),
        ("spot-check oracle", spotcheck_oracle),
        ("init self-consistency", init_self_consistency),
        ("structured report round trip", round_trip),
    ];
    let mut failed = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        match criterion() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
