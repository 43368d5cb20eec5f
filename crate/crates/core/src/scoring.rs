//! Five-dimension reproducibility profile and its optional aggregation.
//!
//! | dim | meaning                 | evidence |
//! |-----|-------------------------|----------|
//! | A   | availability            | computed |
//! | B   | verification scope      | mixed    |
//! | C   | verification source     | attested |
//! | D   | scope of reproducibility| mixed    |
//! | E   | code quality            | computed |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::checks::{uses_synthetic_only, AuditReport, CheckId, Severity};
use crate::error::AggregateError;
use crate::readme::ReadmeModel;
use crate::supplement::{FileClass, SupplementInventory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    A,
    B,
    C,
    D,
    E,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [Dimension::A, Dimension::B, Dimension::C, Dimension::D, Dimension::E];

    pub fn letter(self) -> char {
        match self {
            Dimension::A => 'A',
            Dimension::B => 'B',
            Dimension::C => 'C',
            Dimension::D => 'D',
            Dimension::E => 'E',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'A' => Some(Dimension::A),
            'B' => Some(Dimension::B),
            'C' => Some(Dimension::C),
            'D' => Some(Dimension::D),
            'E' => Some(Dimension::E),
            _ => None,
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Dimension::A => "availability of materials",
            Dimension::B => "verification scope",
            Dimension::C => "verification source",
            Dimension::D => "scope of reproducibility",
            Dimension::E => "code quality",
        }
    }

    pub fn evidence(self) -> Evidence {
        match self {
            Dimension::A | Dimension::E => Evidence::Computed,
            Dimension::C => Evidence::Attested,
            Dimension::B | Dimension::D => Evidence::Mixed,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl Serialize for Dimension {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dimension {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let mut chars = s.chars();
        match (chars.next().and_then(Dimension::from_letter), chars.next()) {
            (Some(d), None) => Ok(d),
            _ => Err(serde::de::Error::custom(format!("unknown dimension {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    Computed,
    Attested,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionLevel {
    pub dimension: Dimension,
    pub level: u8,
    pub evidence: Evidence,
}

macro_rules! ordinal_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident = $text:literal),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            #[default]
            $($variant),*
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),*
                }
            }

            /// Position in the declared order, weakest first.
            pub fn rank(self) -> u8 {
                self as u8
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let norm = s.trim().to_ascii_lowercase().replace('_', "-");
                $(if norm == $text { return Ok($name::$variant); })*
                Err(format!(
                    "unknown value {s:?}; expected one of {}",
                    [$($text),*].join(", ")
                ))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

ordinal_enum!(
    /// How deeply the materials were checked.
    VerificationScope {
        None = "none",
        Completeness = "completeness",
        Quality = "quality",
        Computational = "computational",
    }
);

ordinal_enum!(
    /// Who checked the materials.
    VerificationSource {
        None = "none",
        Author = "author",
        Teammate = "teammate",
        Journal = "journal",
    }
);

ordinal_enum!(
    /// How much of the results can be reproduced.
    ReproducibilityScope {
        None = "none",
        Partial = "partial",
        FullWithCaveats = "full-with-caveats",
        Full = "full",
    }
);

/// Declared, unverified claims about how the materials were checked.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Attestation {
    pub verification_scope: VerificationScope,
    pub verification_source: VerificationSource,
    pub reproducibility_scope: ReproducibilityScope,
    /// The reduced-replication run uses the same code as the full run.
    pub reduced_run_same_code: bool,
    pub notes: String,
}

impl Attestation {
    /// Encodes a journal's reproducibility policy: an independent,
    /// execution-based check on the journal side attests computational
    /// verification by the journal; otherwise nothing is attested.
    pub fn from_journal_policy(independent_check: bool, verification_through: &str) -> Self {
        if independent_check {
            Self {
                verification_scope: VerificationScope::Computational,
                verification_source: VerificationSource::Journal,
                notes: format!("journal check by {verification_through}"),
                ..Self::default()
            }
        } else {
            Self::default()
        }
    }
}

/// Summary of spot-check outcomes for scoring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpotCheckEvidence {
    pub selected: usize,
    pub matched: usize,
    /// Outcomes come from a reduced-replication run.
    pub reduced: bool,
}

impl SpotCheckEvidence {
    pub fn all_match(&self) -> bool {
        self.selected > 0 && self.matched == self.selected
    }
}

/// Calibration knobs for the rubric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RubricConfig {
    /// Lower pass-rate bounds for E1, E2 and E3.
    pub e_thresholds: [f64; 3],
    pub heavy_minutes: f64,
}

impl Default for RubricConfig {
    fn default() -> Self {
        Self {
            e_thresholds: [0.4, 0.7, 0.9],
            heavy_minutes: 60.0,
        }
    }
}

/// Checks contributing to the code-quality pass rate.
pub const E_POOL: [CheckId; 21] = [
    CheckId::Code01,
    CheckId::Code02,
    CheckId::Code03,
    CheckId::Code04,
    CheckId::Code05,
    CheckId::Code06,
    CheckId::Code07,
    CheckId::Code08,
    CheckId::Code09,
    CheckId::Code10,
    CheckId::Code11,
    CheckId::Intr01,
    CheckId::Intr02,
    CheckId::Link01,
    CheckId::Link02,
    CheckId::Readme01,
    CheckId::Readme02,
    CheckId::Readme03,
    CheckId::Readme04,
    CheckId::Struct04,
    CheckId::Struct06,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "profile")]
    ProfileOnly,
    #[serde(rename = "min")]
    Min,
    #[serde(rename = "weighted-floor")]
    WeightedFloor,
}

impl PolicyKind {
    pub fn id(self) -> &'static str {
        match self {
            PolicyKind::ProfileOnly => "profile",
            PolicyKind::Min => "min",
            PolicyKind::WeightedFloor => "weighted-floor",
        }
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "profile" | "profile-only" => Ok(PolicyKind::ProfileOnly),
            "min" => Ok(PolicyKind::Min),
            "weighted-floor" => Ok(PolicyKind::WeightedFloor),
            _ => Err(format!("unknown policy {s:?}; expected profile, min or weighted-floor")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationPolicy {
    pub kind: PolicyKind,
    pub weights: BTreeMap<Dimension, f64>,
}

impl AggregationPolicy {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            weights: Dimension::ALL.iter().map(|d| (*d, 1.0)).collect(),
        }
    }

    pub fn weight(&self, d: Dimension) -> f64 {
        self.weights.get(&d).copied().unwrap_or(1.0)
    }
}

impl Default for AggregationPolicy {
    fn default() -> Self {
        Self::new(PolicyKind::ProfileOnly)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregate {
    pub policy: PolicyKind,
    pub tier: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreProfile {
    pub levels: BTreeMap<Dimension, DimensionLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<Aggregate>,
}

impl ScoreProfile {
    /// Profile with the given levels (clamped to 0..=3) and no aggregate.
    pub fn from_levels(levels: [u8; 5]) -> Self {
        Self {
            levels: Dimension::ALL
                .iter()
                .zip(levels)
                .map(|(d, l)| {
                    (
                        *d,
                        DimensionLevel {
                            dimension: *d,
                            level: l.min(3),
                            evidence: d.evidence(),
                        },
                    )
                })
                .collect(),
            aggregate: None,
        }
    }

    pub fn level(&self, d: Dimension) -> u8 {
        self.levels.get(&d).map_or(0, |l| l.level)
    }

    pub fn level_values(&self) -> [u8; 5] {
        Dimension::ALL.map(|d| self.level(d))
    }
}

/// A derived profile together with a one-line reason per dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplainedProfile {
    pub profile: ScoreProfile,
    pub reasons: BTreeMap<Dimension, String>,
}

/// Applies the rubric. `spot` carries spot-check outcomes when they exist.
pub fn derive_profile(
    report: &AuditReport,
    inventory: &SupplementInventory,
    readme: &ReadmeModel,
    attestation: &Attestation,
    spot: Option<&SpotCheckEvidence>,
    rubric: &RubricConfig,
) -> ScoreProfile {
    explain_profile(report, inventory, readme, attestation, spot, rubric).profile
}

pub fn explain_profile(
    report: &AuditReport,
    inventory: &SupplementInventory,
    readme: &ReadmeModel,
    attestation: &Attestation,
    spot: Option<&SpotCheckEvidence>,
    rubric: &RubricConfig,
) -> ExplainedProfile {
    let (a, ra) = level_a(inventory, readme);
    let (b, rb) = level_b(report, attestation, spot);
    let c = attestation.verification_source.rank();
    let rc = format!("verification source: {}", attestation.verification_source);
    let (d, rd) = level_d(report, inventory, readme, attestation, spot, rubric);
    let (e, re) = level_e(report, rubric);
    let profile = ScoreProfile::from_levels([a, b, c, d, e]);
    let reasons = Dimension::ALL.into_iter().zip([ra, rb, rc, rd, re]).collect();
    ExplainedProfile { profile, reasons }
}

fn level_a(inventory: &SupplementInventory, readme: &ReadmeModel) -> (u8, String) {
    let code = inventory.count(FileClass::Code) > 0;
    let data = inventory.count(FileClass::Data) > 0;
    let codebook = inventory.count(FileClass::Codebook) > 0;
    let environment = !readme.environment.is_empty();
    match (code, data, codebook && environment) {
        (false, _, _) => (0, "no code".into()),
        (true, false, _) => (1, "code only".into()),
        (true, true, false) => (2, "code and data".into()),
        (true, true, true) => (3, "code, data, codebook and environment description".into()),
    }
}

fn level_b(report: &AuditReport, attestation: &Attestation, spot: Option<&SpotCheckEvidence>) -> (u8, String) {
    let (computed, why) = if spot.is_some_and(SpotCheckEvidence::all_match) {
        (3, "spot checks reproduced stored results")
    } else if report.completeness_pass_done() {
        (1, "completeness pass done by the audit")
    } else {
        (0, "no completeness pass")
    };
    let attested = match attestation.verification_scope {
        VerificationScope::None => 0,
        VerificationScope::Completeness => 1,
        VerificationScope::Quality if report.count(Severity::Fail) == 0 => 2,
        VerificationScope::Quality => 1,
        VerificationScope::Computational => 3,
    };
    if attested > computed {
        (
            attested,
            format!("attested {} verification", attestation.verification_scope),
        )
    } else {
        (computed, why.to_string())
    }
}

fn level_d(
    report: &AuditReport,
    inventory: &SupplementInventory,
    readme: &ReadmeModel,
    attestation: &Attestation,
    spot: Option<&SpotCheckEvidence>,
    rubric: &RubricConfig,
) -> (u8, String) {
    let attested = attestation.reproducibility_scope.rank();
    let floor = if spot.is_some_and(SpotCheckEvidence::all_match) {
        1
    } else {
        0
    };
    let seed_failure = [CheckId::Code03, CheckId::Code04]
        .iter()
        .any(|id| report.worst(*id) == Some(Severity::Fail));
    let heavy = readme
        .runtime_notes
        .iter()
        .any(|n| n.duration_minutes > rubric.heavy_minutes);
    let heavy_without_intermediates = heavy && report.worst(CheckId::Intr01) == Some(Severity::Warn);
    let (cap, why) = if uses_synthetic_only(inventory) {
        (1, "only synthetic data")
    } else if seed_failure {
        (1, "random number handling is not reproducible")
    } else if heavy_without_intermediates {
        (1, "long-running analysis without stored intermediate results")
    } else if heavy {
        (2, "long-running analysis")
    } else if spot.is_some_and(|s| s.reduced && s.all_match()) {
        (2, "reduced-replication evidence only")
    } else {
        (3, "no limiting factor found")
    };
    let level = attested.max(floor).min(cap);
    (
        level,
        format!("attested {}, capped at {cap}: {why}", attestation.reproducibility_scope),
    )
}

/// Pass rate over the applicable E-pool checks, and whether any is Fail.
pub fn e_pool_pass_rate(report: &AuditReport) -> (f64, bool) {
    let mut applicable = 0usize;
    let mut passed = 0usize;
    let mut any_fail = false;
    for id in E_POOL {
        match report.worst(id) {
            None | Some(Severity::NotApplicable) => {}
            Some(sev) => {
                applicable += 1;
                passed += usize::from(sev == Severity::Pass);
                any_fail |= sev == Severity::Fail;
            }
        }
    }
    let rate = if applicable == 0 {
        0.0
    } else {
        passed as f64 / applicable as f64
    };
    (rate, any_fail)
}

fn level_e(report: &AuditReport, rubric: &RubricConfig) -> (u8, String) {
    let (rate, any_fail) = e_pool_pass_rate(report);
    let [t1, t2, t3] = rubric.e_thresholds;
    let level = if rate >= t3 && !any_fail {
        3
    } else if rate >= t2 {
        2
    } else if rate >= t1 {
        1
    } else {
        0
    };
    (level, format!("pass rate {:.0}% over quality checks", rate * 100.0))
}

/// Adds (or removes) the aggregate tier according to `policy`.
pub fn aggregate(profile: &ScoreProfile, policy: &AggregationPolicy) -> Result<ScoreProfile, AggregateError> {
    let levels = profile.level_values();
    let lo = *levels.iter().min().unwrap_or(&0);
    let hi = *levels.iter().max().unwrap_or(&0);
    let tier = match policy.kind {
        PolicyKind::ProfileOnly => None,
        PolicyKind::Min => Some(lo),
        PolicyKind::WeightedFloor => {
            let mut num = 0.0;
            let mut den = 0.0;
            for d in Dimension::ALL {
                let w = policy.weight(d);
                if !w.is_finite() || w < 0.0 {
                    return Err(AggregateError::InvalidWeight {
                        dimension: d.letter(),
                        value: w,
                    });
                }
                num += w * f64::from(profile.level(d));
                den += w;
            }
            if den <= 0.0 {
                return Err(AggregateError::ZeroWeights);
            }
            // the epsilon keeps exact quotients such as 2.0 from flooring to 1
            let tier = (num / den + 1e-9).floor() as u8;
            Some(tier.clamp(lo, hi))
        }
    };
    Ok(ScoreProfile {
        levels: profile.levels.clone(),
        aggregate: tier.map(|tier| Aggregate {
            policy: policy.kind,
            tier,
        }),
    })
}

/// Canonical badge such as `A2 B1 C0 D1 E2 | tier 0 (min)`.
pub fn render_profile(profile: &ScoreProfile) -> String {
    let mut out = Dimension::ALL
        .iter()
        .map(|d| format!("{d}{}", profile.level(*d)))
        .collect::<Vec<_>>()
        .join(" ");
    if let Some(agg) = profile.aggregate {
        out.push_str(&format!(" | tier {} ({})", agg.tier, agg.policy.id()));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid profile badge {0:?}")]
pub struct BadgeError(pub String);

/// Parses a badge produced by [`render_profile`].
pub fn parse_profile(badge: &str) -> Result<ScoreProfile, BadgeError> {
    let err = || BadgeError(badge.to_string());
    let (levels_part, tier_part) = match badge.split_once(" | ") {
        Some((l, t)) => (l, Some(t)),
        None => (badge, None),
    };
    let tokens: Vec<&str> = levels_part.split(' ').collect();
    if tokens.len() != 5 {
        return Err(err());
    }
    let mut levels = [0u8; 5];
    for (i, (tok, d)) in tokens.iter().zip(Dimension::ALL).enumerate() {
        let mut chars = tok.chars();
        if chars.next() != Some(d.letter()) {
            return Err(err());
        }
        let level: u8 = chars.as_str().parse().map_err(|_| err())?;
        if level > 3 {
            return Err(err());
        }
        levels[i] = level;
    }
    let mut profile = ScoreProfile::from_levels(levels);
    if let Some(t) = tier_part {
        let rest = t.strip_prefix("tier ").ok_or_else(err)?;
        let (tier, policy) = rest.split_once(' ').ok_or_else(err)?;
        let policy = policy
            .strip_prefix('(')
            .and_then(|p| p.strip_suffix(')'))
            .ok_or_else(err)?;
        let tier: u8 = tier.parse().map_err(|_| err())?;
        let policy: PolicyKind = policy.parse().map_err(|_| err())?;
        if tier > 3 || policy == PolicyKind::ProfileOnly {
            return Err(err());
        }
        profile.aggregate = Some(Aggregate { policy, tier });
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_floor_example() {
        let p = ScoreProfile::from_levels([3, 1, 1, 2, 2]);
        let agg = aggregate(&p, &AggregationPolicy::new(PolicyKind::WeightedFloor)).unwrap();
        assert_eq!(agg.aggregate.unwrap().tier, 1);
        let agg = aggregate(&p, &AggregationPolicy::new(PolicyKind::Min)).unwrap();
        assert_eq!(agg.aggregate.unwrap().tier, 1);
        let agg = aggregate(&p, &AggregationPolicy::new(PolicyKind::ProfileOnly)).unwrap();
        assert_eq!(agg.aggregate, None);
    }

    #[test]
    fn all_threes() {
        let p = ScoreProfile::from_levels([3; 5]);
        for kind in [PolicyKind::Min, PolicyKind::WeightedFloor] {
            assert_eq!(
                aggregate(&p, &AggregationPolicy::new(kind))
                    .unwrap()
                    .aggregate
                    .unwrap()
                    .tier,
                3
            );
        }
    }

    #[test]
    fn weight_errors() {
        let p = ScoreProfile::from_levels([1; 5]);
        let mut policy = AggregationPolicy::new(PolicyKind::WeightedFloor);
        for d in Dimension::ALL {
            policy.weights.insert(d, 0.0);
        }
        assert_eq!(aggregate(&p, &policy).unwrap_err(), AggregateError::ZeroWeights);
        policy.weights.insert(Dimension::B, -1.0);
        assert!(matches!(
            aggregate(&p, &policy).unwrap_err(),
            AggregateError::InvalidWeight { dimension: 'B', .. }
        ));
    }

    #[test]
    fn badges() {
        let p = ScoreProfile::from_levels([2, 1, 0, 1, 2]);
        assert_eq!(render_profile(&p), "A2 B1 C0 D1 E2");
        let m = aggregate(&p, &AggregationPolicy::new(PolicyKind::Min)).unwrap();
        assert_eq!(render_profile(&m), "A2 B1 C0 D1 E2 | tier 0 (min)");
        assert_eq!(render_profile(&ScoreProfile::from_levels([0; 5])), "A0 B0 C0 D0 E0");
        assert_eq!(parse_profile(&render_profile(&m)).unwrap(), m);
        assert_eq!(parse_profile("A2 B1 C0 D1 E2").unwrap(), p);
        assert!(parse_profile("A2 B1 C0 D1").is_err());
        assert!(parse_profile("A4 B1 C0 D1 E2").is_err());
        assert!(parse_profile("A2 B1 C0 D1 E2 | tier 1 (max)").is_err());
    }

    #[test]
    fn ordinal_parsing() {
        assert_eq!(
            "full-with-caveats".parse::<ReproducibilityScope>().unwrap(),
            ReproducibilityScope::FullWithCaveats
        );
        assert_eq!(
            "full_with_caveats".parse::<ReproducibilityScope>().unwrap(),
            ReproducibilityScope::FullWithCaveats
        );
        assert_eq!("journal".parse::<VerificationSource>().unwrap().rank(), 3);
        assert!("editor".parse::<VerificationSource>().is_err());
        let a = Attestation::default();
        assert_eq!(a.verification_scope, VerificationScope::None);
        assert_eq!(a.reproducibility_scope, ReproducibilityScope::None);
    }

    #[test]
    fn journal_policies() {
        let bj = Attestation::from_journal_policy(true, "reproducible research editors");
        assert_eq!(bj.verification_source, VerificationSource::Journal);
        assert_eq!(bj.verification_scope, VerificationScope::Computational);
        let annals = Attestation::from_journal_policy(false, "not applicable");
        assert_eq!(annals, Attestation::default());
    }

    #[test]
    fn policy_serde_ids() {
        assert_eq!(
            serde_json::to_string(&PolicyKind::WeightedFloor).unwrap(),
            "\"weighted-floor\""
        );
        let p = ScoreProfile::from_levels([1, 2, 3, 0, 1]);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<ScoreProfile>(&json).unwrap(), p);
    }
}
