//! Static reproducibility audit of research code and data supplements.
//!
//! The pipeline scans a supplement directory, reads its README and scripts,
//! evaluates a catalog of checks, and maps the findings onto a five-part
//! profile. Spot checks re-run selected replications against stored results.

pub mod audit;
pub mod checks;
pub mod config;
pub mod error;
pub mod init;
pub mod labels;
pub mod readme;
pub mod report;
pub mod scoring;
pub mod script;
pub mod spotcheck;
pub mod supplement;

pub use audit::{audit_supplement, score_run, AuditRun};
pub use checks::{
    builtin_catalog, run_checks, AuditReport, CheckConfig, CheckId, DeclaredLabels, Finding, Location, Severity,
};
pub use config::AuditConfig;
pub use readme::{parse_readme, ReadmeModel};
pub use scoring::{aggregate, derive_profile, render_profile, Attestation, Dimension, ScoreProfile};
pub use script::{scan_script, ScriptFacts};
pub use supplement::{scan_supplement, ArtifactLabel, FileClass, FileEntry, ScanConfig, SupplementInventory};
