//! Skeleton generator for a new supplement.

use std::path::{Path, PathBuf};

use crate::error::InitError;

pub const SKELETON_DIRS: [&str; 5] = [
    "data",
    "code",
    "results/intermediate",
    "results/figures",
    "results/tables",
];

pub const README_TEMPLATE: &str = "\
# Code and data supplement

## File overview

- `data/`: input data sets, with a codebook describing every variable
- `code/`: analysis scripts, numbered in the order they are run
- `results/intermediate/`: stored raw results of long-running computations
- `results/figures/`: figures, named after the manuscript (figure_1.pdf, ...)
- `results/tables/`: tables, named after the manuscript (table_1.csv, ...)

## Execution order

1. `code/01_prepare_data.R` prepares the analysis data set
2. `code/02_analysis.R` runs the analysis and writes results/intermediate/
3. `code/03_figures_tables.R` produces Figure 1 and Table 1

## Computational environment

Paste the output of `sessionInfo()` (R) or `pip freeze` (Python) here, or
ship a lockfile such as renv.lock or requirements.txt.

## Runtimes

- `code/02_analysis.R`: about N minutes on a laptop with K cores

## Data availability

Replace this paragraph with the data availability statement: where the
data come from, under which terms others can obtain them, and, if they
cannot be passed on, which stand-in data in `data/synthetic/` to use.
";

/// Creates the skeleton below `target`, which must be empty or absent.
/// Returns the created paths, directories first.
pub fn init_skeleton(target: &Path) -> Result<Vec<PathBuf>, InitError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| InitError::Io { path, source }
    };
    if target.exists() {
        let mut entries = std::fs::read_dir(target).map_err(io(target))?;
        if entries.next().is_some() {
            return Err(InitError::TargetNotEmpty(target.to_path_buf()));
        }
    }
    let mut created = Vec::new();
    for dir in SKELETON_DIRS {
        let path = target.join(dir);
        std::fs::create_dir_all(&path).map_err(io(&path))?;
        created.push(path);
    }
    let readme = target.join("README.md");
    std::fs::write(&readme, README_TEMPLATE).map_err(io(&readme))?;
    created.push(readme);
    Ok(created)
}
