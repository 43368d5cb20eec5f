//! Detector token tables, one set per supported dialect.
//!
//! Tables are plain data; [`Pattern::find_in`] gives each entry its matching
//! semantics.

use crate::error::UnknownDialect;
use crate::supplement::Dialect;

/// Bump when any table entry changes; echoed in structured reports.
pub const TABLES_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchKind {
    /// Identifier followed by optional whitespace and `(`.
    Call,
    /// Identifier with identifier boundaries on both sides.
    Ident,
    /// Raw substring of the masked line.
    Literal,
    /// Raw substring of the masked line with all whitespace removed.
    Compact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pattern {
    pub token: &'static str,
    pub kind: MatchKind,
}

const fn call(token: &'static str) -> Pattern {
    Pattern {
        token,
        kind: MatchKind::Call,
    }
}
const fn ident(token: &'static str) -> Pattern {
    Pattern {
        token,
        kind: MatchKind::Ident,
    }
}
const fn literal(token: &'static str) -> Pattern {
    Pattern {
        token,
        kind: MatchKind::Literal,
    }
}
const fn compact(token: &'static str) -> Pattern {
    Pattern {
        token,
        kind: MatchKind::Compact,
    }
}

#[derive(Debug)]
pub struct DetectorTables {
    pub dialect: Dialect,
    pub seed: &'static [Pattern],
    pub rng_use: &'static [Pattern],
    pub parallel: &'static [Pattern],
    /// Subset of `parallel` that relies on process forking.
    pub fork: &'static [&'static str],
    pub safe_stream: &'static [Pattern],
    pub ide: &'static [Pattern],
    pub writers: &'static [Pattern],
    /// Calls whose string arguments are path components to be joined.
    pub path_joiners: &'static [Pattern],
}

static R_TABLES: DetectorTables = DetectorTables {
    dialect: Dialect::R,
    seed: &[call("set.seed")],
    rng_use: &[
        call("rnorm"),
        call("runif"),
        call("rbinom"),
        call("sample"),
        call("rexp"),
        call("rpois"),
        call("rgamma"),
        call("rbeta"),
        call("rt"),
        call("rchisq"),
        call("rlnorm"),
        call("rmultinom"),
        call("rnbinom"),
        call("sample.int"),
    ],
    parallel: &[
        call("mclapply"),
        call("mcmapply"),
        call("pvec"),
        call("mcparallel"),
        call("makeForkCluster"),
        call("parLapply"),
        call("parSapply"),
        call("future_lapply"),
        call("future_sapply"),
        call("future_map"),
        literal("%dopar%"),
        literal("%dorng%"),
    ],
    fork: &["mclapply", "mcmapply", "pvec", "mcparallel", "makeForkCluster"],
    safe_stream: &[
        ident("registerDoRNG"),
        ident("doRNG"),
        literal("%dorng%"),
        call("clusterSetRNGStream"),
        compact("future.seed=TRUE"),
        compact("furrr_options(seed=TRUE"),
    ],
    ide: &[ident("rstudioapi"), call("readClipboard"), call("writeClipboard")],
    writers: &[
        call("ggsave"),
        call("pdf"),
        call("png"),
        call("jpeg"),
        call("svg"),
        call("tiff"),
        call("write.csv"),
        call("write.csv2"),
        call("write.table"),
        call("write_csv"),
        call("saveRDS"),
        call("save"),
        call("write_rds"),
    ],
    path_joiners: &[call("file.path"), call("here"), call("paste0")],
};

static PY_TABLES: DetectorTables = DetectorTables {
    dialect: Dialect::Py,
    seed: &[
        call("default_rng"),
        call("seed"),
        call("SeedSequence"),
        call("manual_seed"),
    ],
    rng_use: &[
        literal(".random."),
        call("normal"),
        call("choice"),
        call("shuffle"),
        call("uniform"),
        call("integers"),
        call("permutation"),
        call("randint"),
        call("binomial"),
        call("poisson"),
        call("standard_normal"),
    ],
    parallel: &[
        call("Pool"),
        ident("ProcessPoolExecutor"),
        call("Parallel"),
        call("fork"),
    ],
    fork: &["fork"],
    safe_stream: &[ident("SeedSequence"), literal("spawn("), compact("default_rng(child")],
    ide: &[call("get_ipython")],
    writers: &[
        call("savefig"),
        call("to_csv"),
        call("to_parquet"),
        call("to_excel"),
        call("to_latex"),
        call("save"),
    ],
    path_joiners: &[call("join"), call("Path")],
};

/// Returns the detector tables for `dialect`.
pub fn pattern_tables(dialect: Dialect) -> Result<&'static DetectorTables, UnknownDialect> {
    match dialect {
        Dialect::R => Ok(&R_TABLES),
        Dialect::Py => Ok(&PY_TABLES),
        other => Err(UnknownDialect(other)),
    }
}

pub(crate) fn is_ident_byte(dialect: Dialect, b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || (dialect == Dialect::R && b == b'.')
}

/// A match of a pattern inside one masked line. `end` is the byte just past
/// the token (for calls, the position of the opening parenthesis).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternMatch {
    pub start: usize,
    pub end: usize,
}

impl Pattern {
    pub fn find_in(&self, dialect: Dialect, line: &str) -> Vec<PatternMatch> {
        match self.kind {
            MatchKind::Literal => line
                .match_indices(self.token)
                .map(|(i, _)| PatternMatch {
                    start: i,
                    end: i + self.token.len(),
                })
                .collect(),
            MatchKind::Compact => {
                let squeezed: String = line.chars().filter(|c| !c.is_whitespace()).collect();
                if squeezed.contains(self.token) {
                    vec![PatternMatch { start: 0, end: 0 }]
                } else {
                    Vec::new()
                }
            }
            MatchKind::Ident | MatchKind::Call => {
                let bytes = line.as_bytes();
                let mut out = Vec::new();
                for (i, _) in line.match_indices(self.token) {
                    let end = i + self.token.len();
                    if i > 0 && is_ident_byte(dialect, bytes[i - 1]) {
                        continue;
                    }
                    if end < bytes.len() && is_ident_byte(dialect, bytes[end]) {
                        continue;
                    }
                    if self.kind == MatchKind::Call {
                        let mut j = end;
                        while j < bytes.len() && (bytes[j] == b' ' || bytes[j] == b'\t') {
                            j += 1;
                        }
                        if bytes.get(j) != Some(&b'(') {
                            continue;
                        }
                        out.push(PatternMatch { start: i, end: j });
                    } else {
                        out.push(PatternMatch { start: i, end });
                    }
                }
                out
            }
        }
    }
}
