use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Comparator;
use crate::error::CompareError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub equal: bool,
    /// Empty when equal.
    pub detail: String,
}

impl Comparison {
    fn equal() -> Self {
        Self {
            equal: true,
            detail: String::new(),
        }
    }

    fn differ(detail: String) -> Self {
        Self { equal: false, detail }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CompareError> {
    std::fs::read(path).map_err(|source| CompareError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Compares a fresh output with the stored one.
///
/// `numeric_table` cells pass when `|a - b| <= abs_tol + rel_tol * |b|`,
/// with `b` taken from `expected`. Tolerances are ignored for `bitwise`.
pub fn compare_outputs(
    expected: &Path,
    actual: &Path,
    comparator: Comparator,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Comparison, CompareError> {
    let exp = read(expected)?;
    let act = read(actual)?;
    match comparator {
        Comparator::Bitwise => Ok(compare_bytes(&exp, &act)),
        Comparator::NumericTable => {
            let e = parse_table(&exp, expected)?;
            let a = parse_table(&act, actual)?;
            compare_tables(&e, &a, abs_tol, rel_tol)
        }
    }
}

fn compare_bytes(exp: &[u8], act: &[u8]) -> Comparison {
    if exp == act {
        return Comparison::equal();
    }
    let offset = exp
        .iter()
        .zip(act)
        .position(|(a, b)| a != b)
        .unwrap_or(exp.len().min(act.len()));
    Comparison::differ(format!(
        "first differing byte at offset {offset} (expected {} bytes, got {})",
        exp.len(),
        act.len()
    ))
}

#[derive(Debug)]
struct Table {
    rows: Vec<Vec<String>>,
    header: bool,
    cols: usize,
}

fn is_numeric(cell: &str) -> bool {
    cell.trim().parse::<f64>().is_ok()
}

/// Picks the candidate delimiter that occurs most often in the first
/// nonempty line; ties go to comma, then semicolon, then tab.
fn sniff_delimiter(text: &str) -> u8 {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let mut best = b',';
    let mut best_count = 0;
    for d in *b",;\t" {
        let n = first.bytes().filter(|b| *b == d).count();
        if n > best_count {
            best = d;
            best_count = n;
        }
    }
    best
}

fn parse_table(bytes: &[u8], path: &Path) -> Result<Table, CompareError> {
    let fail = |reason: String| CompareError::ParseFailure {
        path: path.to_path_buf(),
        reason,
    };
    let text = std::str::from_utf8(bytes).map_err(|e| fail(format!("not UTF-8 text ({e})")))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(text))
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| fail(e.to_string()))?;
        let row: Vec<String> = rec.iter().map(|c| c.trim().to_string()).collect();
        if row.iter().all(String::is_empty) {
            continue;
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(fail(format!("row {} has {} fields, row 1 has {cols}", i + 1, r.len())));
    }
    let header = rows
        .first()
        .is_some_and(|r| r.iter().any(|c| !c.is_empty() && !is_numeric(c)));
    Ok(Table { rows, header, cols })
}

fn cells_match(exp: &str, act: &str, abs_tol: f64, rel_tol: f64) -> (bool, Option<f64>) {
    match (exp.parse::<f64>(), act.parse::<f64>()) {
        (Ok(b), Ok(a)) => {
            if a == b || (a.is_nan() && b.is_nan()) {
                return (true, Some(0.0));
            }
            let delta = (a - b).abs();
            (delta <= abs_tol + rel_tol * b.abs(), Some(delta))
        }
        _ => (exp == act, None),
    }
}

fn compare_tables(exp: &Table, act: &Table, abs_tol: f64, rel_tol: f64) -> Result<Comparison, CompareError> {
    if exp.rows.len() != act.rows.len() || exp.cols != act.cols {
        return Err(CompareError::DimensionMismatch {
            expected_rows: exp.rows.len(),
            expected_cols: exp.cols,
            actual_rows: act.rows.len(),
            actual_cols: act.cols,
        });
    }
    let mut differing = 0usize;
    let mut first = None;
    let mut max_delta: Option<f64> = None;
    for (r, (er, ar)) in exp.rows.iter().zip(&act.rows).enumerate() {
        for (c, (e, a)) in er.iter().zip(ar).enumerate() {
            let (ok, delta) = cells_match(e, a, abs_tol, rel_tol);
            if ok {
                continue;
            }
            differing += 1;
            if let Some(d) = delta {
                max_delta = Some(max_delta.map_or(d, |m: f64| m.max(d)));
            }
            if first.is_none() {
                first = Some((r, c, e.clone(), a.clone(), delta));
            }
        }
    }
    let Some((r, c, e, a, delta)) = first else {
        return Ok(Comparison::equal());
    };
    let row_label = if exp.header {
        if r == 0 {
            "header row".to_string()
        } else {
            format!("data row {r}")
        }
    } else {
        format!("row {}", r + 1)
    };
    let mut detail = format!(
        "{differing} cell(s) differ; first at {row_label}, column {}: expected {e}, got {a}",
        c + 1
    );
    if let Some(d) = delta {
        detail.push_str(&format!(" (delta {d:e})"));
    }
    if let Some(m) = max_delta {
        detail.push_str(&format!("; max delta {m:e}"));
    }
    Ok(Comparison::differ(detail))
}
