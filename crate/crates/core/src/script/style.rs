//! Spacing metrics: a space after commas and around a small operator set.
//!
//! Works on the masked view, so strings and comments never count. Operators
//! are tokenized longest-match first, which keeps `<=` from being read as `<`
//! and R's `<-` from being read as `<` followed by unary minus.

use serde::{Deserialize, Serialize};

use super::lexer::SourceView;
use crate::supplement::Dialect;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleMetrics {
    pub lines: usize,
    pub comment_lines: usize,
    pub comma_space_violations: usize,
    pub operator_space_violations: usize,
    pub longest_function_lines: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_violation_line: Option<usize>,
}

impl StyleMetrics {
    pub fn violations(&self) -> usize {
        self.comma_space_violations + self.operator_space_violations
    }
}

const R_OPERATORS: &[&str] = &[
    "<<-", "->>", "<-", "->", "==", "!=", "<=", ">=", "&&", "||", ":::", "::", "|>", "=", "+", "-", "*", "/", "<", ">",
    "^", "!", "&", "|", "~", ":", "$", "@", "?",
];
const PY_OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "**", "//", "==", "!=", "<=", ">=", "->", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=", "@=", ":=", "<<", ">>", "=", "+", "-", "*", "/", "<", ">", "%", "&", "|", "^", "~", ":", "@",
];
const CHECKED: &[&str] = &["<-", "=", "+", "-", "*", "/", "==", "<", ">"];
const UNARY_CAPABLE: &[&str] = &["+", "-", "*"];
const KEYWORDS_BEFORE_UNARY: &[&str] = &[
    "return", "in", "if", "else", "and", "or", "not", "yield", "lambda", "print",
];

pub(crate) fn measure(view: &SourceView<'_>, dialect: Dialect) -> StyleMetrics {
    let lines = view.line_count();
    let mut comment_line_numbers: Vec<usize> = view.comments.iter().map(|c| c.line).collect();
    comment_line_numbers.dedup();
    let mut metrics = StyleMetrics {
        lines,
        comment_lines: comment_line_numbers.len(),
        ..StyleMetrics::default()
    };
    let operators = match dialect {
        Dialect::R => R_OPERATORS,
        Dialect::Py => PY_OPERATORS,
        _ => return metrics,
    };
    let mut depth: i64 = 0;
    for line in 1..=lines {
        let masked = view.masked_line(line).1;
        let (commas, ops) = line_violations(masked, dialect, operators, &mut depth);
        if commas + ops > 0 && metrics.first_violation_line.is_none() {
            metrics.first_violation_line = Some(line);
        }
        metrics.comma_space_violations += commas;
        metrics.operator_space_violations += ops;
    }
    metrics
}

fn line_violations(line: &str, dialect: Dialect, operators: &[&str], depth: &mut i64) -> (usize, usize) {
    let bytes = line.as_bytes();
    let mut commas = 0;
    let mut ops = 0;
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b'(' | b'[' | b'{' => {
                *depth += 1;
                i += 1;
                continue;
            }
            b')' | b']' | b'}' => {
                *depth = (*depth - 1).max(0);
                i += 1;
                continue;
            }
            b',' => {
                if let Some(&next) = bytes.get(i + 1) {
                    if !next.is_ascii_whitespace() && next != b')' && next != b']' && next != b',' {
                        commas += 1;
                    }
                }
                i += 1;
                continue;
            }
            b'%' if dialect == Dialect::R => {
                // user infix operators such as %in% and %>%
                match line[i + 1..].find('%') {
                    Some(close) => i += close + 2,
                    None => i += 1,
                }
                continue;
            }
            _ => {}
        }
        let Some(op) = operators.iter().find(|op| line[i..].starts_with(**op)) else {
            i += 1;
            continue;
        };
        let start = i;
        let end = i + op.len();
        i = end;
        if !CHECKED.contains(op) {
            continue;
        }
        if dialect == Dialect::Py && *op == "=" && *depth > 0 {
            continue;
        }
        if (*op == "+" || *op == "-") && scientific_exponent(bytes, start) {
            continue;
        }
        let space_before = start == 0 || bytes[start - 1].is_ascii_whitespace();
        let space_after = end == bytes.len() || bytes[end].is_ascii_whitespace();
        if space_before && space_after {
            continue;
        }
        if UNARY_CAPABLE.contains(op) && is_unary_position(line, start, operators) {
            continue;
        }
        if dialect == Dialect::Py && (*op == "*" || *op == "/") {
            // bare `*` / `/` markers in parameter lists
            let next = line[end..].trim_start().bytes().next();
            if matches!(next, Some(b',') | Some(b')')) {
                continue;
            }
        }
        ops += 1;
    }
    (commas, ops)
}

/// True for the sign in `1e-8` or `2.5E+3`.
fn scientific_exponent(bytes: &[u8], sign: usize) -> bool {
    if sign < 2 || !matches!(bytes[sign - 1], b'e' | b'E') {
        return false;
    }
    if !bytes.get(sign + 1).is_some_and(u8::is_ascii_digit) {
        return false;
    }
    let mut j = sign - 1;
    while j > 0 && (bytes[j - 1].is_ascii_alphanumeric() || bytes[j - 1] == b'.' || bytes[j - 1] == b'_') {
        j -= 1;
    }
    bytes[j].is_ascii_digit() || (bytes[j] == b'.' && bytes.get(j + 1).is_some_and(u8::is_ascii_digit))
}

/// An operator is unary when nothing value-like precedes it: start of line,
/// an opening bracket, a comma, another operator or a keyword.
fn is_unary_position(line: &str, start: usize, operators: &[&str]) -> bool {
    let before = line[..start].trim_end();
    let Some(last) = before.bytes().last() else {
        return true;
    };
    if matches!(last, b'(' | b'[' | b'{' | b',') {
        return true;
    }
    if operators.iter().any(|op| before.ends_with(*op)) {
        return true;
    }
    let word_start = before
        .rfind(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .map_or(0, |p| p + 1);
    KEYWORDS_BEFORE_UNARY.contains(&&before[word_start..])
}
