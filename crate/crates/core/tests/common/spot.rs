//! Spot-check oracle shared by the core tests and the acceptance target.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use repro_audit::spotcheck::{
    compare_outputs, parse_manifest, run_spotcheck, select_replications, Comparator, OutcomeStatus, Planned,
    RunOptions, ScriptedRunner, Selection,
};

pub const PLAN_SEED: u64 = 20_240_611;
pub const ORACLE_BUDGET: Duration = Duration::from_secs(2);

const TABLE: &str = "param,estimate,se\nbeta0,0.5,0.125\nbeta1,-1.25,0.0625\n";
const TABLE_CLOSE: &str = "param,estimate,se\nbeta0,0.5000000001,0.125\nbeta1,-1.25,0.0625\n";
const TABLE_FAR: &str = "param,estimate,se\nbeta0,0.6,0.125\nbeta1,-1.25,0.0625\n";
const TABLE_SHORT: &str = "param,estimate,se\nbeta0,0.5,0.125\n";

struct Planted {
    id: String,
    status: OutcomeStatus,
    comparator: Comparator,
    expected: Option<Vec<u8>>,
    planned: Planned,
}

fn plant(id: String, status: OutcomeStatus, variant: usize) -> Planted {
    use OutcomeStatus::*;
    let raw = format!("raw bytes for {id}\n").into_bytes();
    let (comparator, expected, planned) = match (status, variant % 3) {
        (Match, 0) => (Comparator::Bitwise, Some(raw.clone()), Planned::Write(raw)),
        (Match, 1) => (
            Comparator::NumericTable,
            Some(TABLE.into()),
            Planned::Write(TABLE_CLOSE.into()),
        ),
        (Match, _) => (
            Comparator::NumericTable,
            Some(TABLE.into()),
            Planned::Write(TABLE.into()),
        ),
        (Mismatch, 0) => (
            Comparator::Bitwise,
            Some(raw),
            Planned::Write(b"something else\n".to_vec()),
        ),
        (Mismatch, 1) => (
            Comparator::NumericTable,
            Some(TABLE.into()),
            Planned::Write(TABLE_FAR.into()),
        ),
        (Mismatch, _) => (
            Comparator::NumericTable,
            Some(TABLE.into()),
            Planned::Write(TABLE_SHORT.into()),
        ),
        (ExecutionError, 0) => (Comparator::Bitwise, Some(raw), Planned::Exit(3)),
        (ExecutionError, 1) => (Comparator::Bitwise, Some(raw), Planned::Hang),
        (ExecutionError, _) => (Comparator::NumericTable, Some(TABLE.into()), Planned::Exit(0)),
        (MissingExpected, _) => (Comparator::Bitwise, None, Planned::Write(raw)),
    };
    Planted {
        id,
        status,
        comparator,
        expected,
        planned,
    }
}

fn manifest_line(id: &str, comparator: Comparator, prefix: &str) -> String {
    let comparator = match comparator {
        Comparator::Bitwise => "bitwise",
        Comparator::NumericTable => "numeric_table",
    };
    format!("{id}\t7\t{comparator}\t1e-6\t0\t{prefix}/{id}.out\tmock {{id}} {{out}}\n")
}

/// Plants five of each outcome across twenty entries in a seeded order and
/// checks that every classification matches the plan.
pub fn planted_statuses() -> Result<String, String> {
    let mut statuses: Vec<OutcomeStatus> = [
        OutcomeStatus::Match,
        OutcomeStatus::Mismatch,
        OutcomeStatus::ExecutionError,
        OutcomeStatus::MissingExpected,
    ]
    .into_iter()
    .flat_map(|s| std::iter::repeat_n(s, 5))
    .collect();
    statuses.shuffle(&mut ChaCha8Rng::seed_from_u64(PLAN_SEED));

    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::create_dir_all(root.join("results/intermediate")).unwrap();
    let mut manifest = String::from("spotcheck v1\n");
    let mut seen: BTreeMap<OutcomeStatus, usize> = BTreeMap::new();
    let mut planted = Vec::new();
    for (i, status) in statuses.into_iter().enumerate() {
        let n = seen.entry(status).or_default();
        let p = plant(format!("rep_{:02}", i + 1), status, *n);
        *n += 1;
        manifest.push_str(&manifest_line(&p.id, p.comparator, "results/intermediate"));
        if let Some(bytes) = &p.expected {
            std::fs::write(root.join(format!("results/intermediate/{}.out", p.id)), bytes).unwrap();
        }
        planted.push(p);
    }
    let manifest = parse_manifest(&manifest).map_err(|e| e.to_string())?;
    let selected = select_replications(&manifest, &Selection::All).map_err(|e| e.to_string())?;
    let runner = ScriptedRunner::new(planted.iter().map(|p| (p.id.clone(), p.planned.clone())));
    let scratch = tempfile::tempdir().unwrap();
    let options = RunOptions {
        timeout: Duration::from_millis(200),
        jobs: 4,
        scratch_base: Some(scratch.path().to_path_buf()),
    };
    let start = Instant::now();
    let outcomes = run_spotcheck(root, &manifest, &selected, &runner, &options);
    let elapsed = start.elapsed();

    let mut errors = String::new();
    if outcomes.len() != planted.len() {
        let _ = writeln!(errors, "{} outcomes for {} entries", outcomes.len(), planted.len());
    }
    let agreed = outcomes
        .iter()
        .zip(&planted)
        .filter(|(o, p)| {
            let ok = o.id == p.id && o.status == p.status;
            if !ok {
                let _ = writeln!(
                    errors,
                    "{}: planned {:?}, got {:?} ({})",
                    p.id, p.status, o.status, o.detail
                );
            }
            ok
        })
        .count();
    if std::fs::read_dir(scratch.path()).unwrap().next().is_some() {
        let _ = writeln!(errors, "scratch directories were left behind");
    }
    if elapsed >= ORACLE_BUDGET {
        let _ = writeln!(errors, "took {elapsed:?}, budget {ORACLE_BUDGET:?}");
    }
    if errors.is_empty() {
        Ok(format!("{agreed}/{} classifications agree, {elapsed:?}", planted.len()))
    } else {
        Err(errors)
    }
}

/// A difference of exactly `abs_tol` still matches; anything beyond does not.
pub fn tolerance_boundary() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let expected = write("expected.csv", "x,y\n0.5,1\n");
    let at = write("at.csv", "x,y\n0.75,1\n");
    let beyond = write("beyond.csv", "x,y\n0.7500001,1\n");
    let cmp = |actual: &Path| {
        compare_outputs(&expected, actual, Comparator::NumericTable, 0.25, 0.0)
            .map(|c| c.equal)
            .map_err(|e| e.to_string())
    };
    match (cmp(&at)?, cmp(&beyond)?) {
        (true, false) => Ok("|a-b| = abs_tol matches, just beyond does not".into()),
        other => Err(format!("boundary classification was {other:?}")),
    }
}

/// With n_full=1000 and ten reduced entries, reduced mode runs exactly those ten.
pub fn reduced_selection() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::create_dir_all(root.join("results/reduced")).unwrap();
    let mut manifest = String::from("spotcheck v1\nn_full=1000\n");
    for i in 1..=20 {
        manifest.push_str(&manifest_line(
            &format!("rep_{i:04}"),
            Comparator::Bitwise,
            "results/full",
        ));
    }
    manifest.push_str("[reduced]\n");
    let mut plan = Vec::new();
    for i in 1..=10 {
        let id = format!("red_{i:04}");
        manifest.push_str(&manifest_line(&id, Comparator::Bitwise, "results/reduced"));
        std::fs::write(root.join(format!("results/reduced/{id}.out")), id.as_bytes()).unwrap();
        plan.push((id.clone(), Planned::Write(id.into_bytes())));
    }
    let manifest = parse_manifest(&manifest).map_err(|e| e.to_string())?;
    if manifest.n_full != Some(1000) {
        return Err(format!("n_full parsed as {:?}", manifest.n_full));
    }
    let selected = select_replications(&manifest, &Selection::Reduced).map_err(|e| e.to_string())?;
    let outcomes = run_spotcheck(
        root,
        &manifest,
        &selected,
        &ScriptedRunner::new(plan),
        &RunOptions::default(),
    );
    let ids: Vec<&str> = outcomes.iter().map(|o| o.id.as_str()).collect();
    let want: Vec<String> = (1..=10).map(|i| format!("red_{i:04}")).collect();
    if ids != want {
        return Err(format!("ran {ids:?}"));
    }
    if !outcomes.iter().all(|o| o.status == OutcomeStatus::Match) {
        return Err("reduced replications did not all match".into());
    }
    Ok("ran 10 of n_full=1000".into())
}
