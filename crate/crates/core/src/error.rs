use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("supplement root {0} does not exist or is not a directory")]
    RootMissing(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid ignore pattern {pattern:?}: {reason}")]
    BadIgnoreGlob { pattern: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no detector tables for dialect {0}")]
pub struct UnknownDialect(pub crate::supplement::Dialect);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("script facts refer to {0}, which is not a code file in the inventory")]
    InconsistentInput(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregateError {
    #[error("aggregation weights sum to zero")]
    ZeroWeights,
    #[error("aggregation weight for dimension {dimension} is {value}; weights must be finite and >= 0")]
    InvalidWeight { dimension: char, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("manifest line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("manifest line {line}: duplicate replication id {id:?}")]
    DuplicateId { line: usize, id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectionError {
    #[error("unknown replication id {0:?}")]
    UnknownId(String),
    #[error("cannot select {k} replications from a manifest of {available}")]
    KTooLarge { k: usize, available: usize },
    #[error("manifest has no [reduced] replication set")]
    NoReducedSet,
}

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path} as a numeric table: {reason}")]
    ParseFailure { path: PathBuf, reason: String },
    #[error("table shapes differ: expected {expected_rows}x{expected_cols}, actual {actual_rows}x{actual_cols}")]
    DimensionMismatch {
        expected_rows: usize,
        expected_cols: usize,
        actual_rows: usize,
        actual_cols: usize,
    },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config value for {key}: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Debug, Error)]
pub enum InitError {
    #[error("target directory {0} is not empty")]
    TargetNotEmpty(PathBuf),
    #[error("cannot create {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum AuditError {
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
}
