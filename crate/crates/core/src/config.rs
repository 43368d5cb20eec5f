//! Audit configuration file (`repro-audit.toml`).
//!
//! ```toml
//! declared_labels = ["Figure 1", "Table 1"]
//! ignore_globs = ["scratch/**"]
//! emit_timestamp = false
//! spotcheck_manifest = "spotcheck.tsv"
//!
//! [severity_overrides]
//! "CODE-06" = "pass"
//!
//! [thresholds]
//! heavy_minutes = 60
//!
//! [scoring]
//! policy = "weighted-floor"
//! e_thresholds = [0.4, 0.7, 0.9]
//! weights = { A = 1, B = 1, C = 1, D = 2, E = 1 }
//!
//! [attestation]
//! verification_scope = "completeness"
//! verification_source = "author"
//! reproducibility_scope = "full-with-caveats"
//! ```

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::checks::{CheckConfig, CheckId, CheckThresholds, DeclaredLabels, Severity};
use crate::error::ConfigError;
use crate::scoring::{AggregationPolicy, Attestation, Dimension, PolicyKind, RubricConfig};
use crate::supplement::ArtifactLabel;

pub const CONFIG_FILE_NAME: &str = "repro-audit.toml";
pub const CONFIG_ENV_VAR: &str = "REPRO_AUDIT_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoringConfig {
    pub policy: PolicyKind,
    pub weights: BTreeMap<Dimension, f64>,
    pub e_thresholds: [f64; 3],
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            policy: PolicyKind::ProfileOnly,
            weights: AggregationPolicy::new(PolicyKind::ProfileOnly).weights,
            e_thresholds: RubricConfig::default().e_thresholds,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditConfig {
    pub declared_labels: Vec<String>,
    pub severity_overrides: BTreeMap<CheckId, Severity>,
    pub thresholds: CheckThresholds,
    pub scoring: ScoringConfig,
    pub attestation: Attestation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spotcheck_manifest: Option<String>,
    /// Added to the built-in ignore list.
    pub ignore_globs: Vec<String>,
    pub emit_timestamp: bool,
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

impl AuditConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: AuditConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.labels()?;
        for (id, sev) in &self.severity_overrides {
            if id.has_info_floor() && *sev < Severity::Info {
                return Err(invalid(
                    &format!("severity_overrides.{id}"),
                    format!("{id} cannot be set below info"),
                ));
            }
        }
        for (d, w) in &self.scoring.weights {
            if !w.is_finite() || *w < 0.0 {
                return Err(invalid(
                    &format!("scoring.weights.{d}"),
                    "weights must be finite and >= 0",
                ));
            }
        }
        if self.scoring.policy == PolicyKind::WeightedFloor
            && self.aggregation_policy().weights.values().sum::<f64>() <= 0.0
        {
            return Err(invalid("scoring.weights", "weights must not all be zero"));
        }
        let [a, b, c] = self.scoring.e_thresholds;
        if !(0.0 <= a && a <= b && b <= c && c <= 1.0) {
            return Err(invalid(
                "scoring.e_thresholds",
                "expected three ascending rates in [0, 1]",
            ));
        }
        let t = &self.thresholds;
        if !t.heavy_minutes.is_finite() || t.heavy_minutes < 0.0 {
            return Err(invalid("thresholds.heavy_minutes", "must be finite and >= 0"));
        }
        for g in &self.ignore_globs {
            globset::Glob::new(g).map_err(|e| invalid("ignore_globs", e.to_string()))?;
        }
        Ok(())
    }

    pub fn labels(&self) -> Result<DeclaredLabels, ConfigError> {
        let labels = self
            .declared_labels
            .iter()
            .map(|s| {
                s.parse::<ArtifactLabel>()
                    .map_err(|e| invalid("declared_labels", e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DeclaredLabels::new(labels))
    }

    pub fn check_config(&self) -> CheckConfig {
        CheckConfig {
            severity_overrides: self.severity_overrides.clone(),
            thresholds: self.thresholds.clone(),
            overview_exempt: Default::default(),
        }
    }

    pub fn rubric(&self) -> RubricConfig {
        RubricConfig {
            e_thresholds: self.scoring.e_thresholds,
            heavy_minutes: self.thresholds.heavy_minutes,
        }
    }

    /// Configured weights on top of the default of 1 per dimension.
    pub fn aggregation_policy(&self) -> AggregationPolicy {
        let mut policy = AggregationPolicy::new(self.scoring.policy);
        policy
            .weights
            .extend(self.scoring.weights.iter().map(|(d, w)| (*d, *w)));
        policy
    }
}

/// Config path by precedence: explicit flag, then the environment variable,
/// then `repro-audit.toml` under the root if it exists.
pub fn resolve_config_path(explicit: Option<&Path>, env_value: Option<OsString>, root: &Path) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return Some(p.to_path_buf());
    }
    if let Some(v) = env_value.filter(|v| !v.is_empty()) {
        return Some(PathBuf::from(v));
    }
    let default = root.join(CONFIG_FILE_NAME);
    default.is_file().then_some(default)
}

/// Loads the resolved config, or the defaults when none applies.
pub fn load_config(explicit: Option<&Path>, root: &Path) -> Result<(AuditConfig, Option<PathBuf>), ConfigError> {
    match resolve_config_path(explicit, std::env::var_os(CONFIG_ENV_VAR), root) {
        Some(path) => Ok((AuditConfig::load(&path)?, Some(path))),
        None => Ok((AuditConfig::default(), None)),
    }
}
