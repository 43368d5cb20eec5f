//! Inputs for the criterion benchmarks under `benches/`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Directory holding the committed fixture supplements.
pub fn fixtures_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

/// An R analysis script of roughly `lines` lines with seeds, reads, writes
/// and documented helper functions.
pub fn r_script(index: usize, lines: usize) -> String {
    let mut s = format!("# Step {index}\nset.seed({index})\nlibrary(stats)\n");
    s.push_str(&format!("dat <- read.csv(\"data/input_{}.csv\")\n", index % 7));
    let mut i = 0;
    while s.lines().count() < lines {
        s.push_str(&format!(
            "# Fits model {i}\nfit_{i} <- function(d) {{\n  x <- rnorm(nrow(d))\n  lm(y ~ x, data = d)  # \"quoted\" comment\n}}\n"
        ));
        i += 1;
    }
    s.push_str(&format!(
        "saveRDS(fit_0(dat), \"results/intermediate/step_{index}.rds\")\n"
    ));
    s
}

/// Writes a supplement with `scripts` code files, matching data and a README.
pub fn synthetic_supplement(root: &Path, scripts: usize) -> io::Result<()> {
    for dir in ["code", "data", "results/intermediate", "results/tables"] {
        fs::create_dir_all(root.join(dir))?;
    }
    let mut readme = String::from("# Supplement\n\n## File overview\n\n- `code/`: analysis scripts\n- `data/`: inputs\n- `results/`: outputs\n\n## Execution order\n\n");
    for i in 0..scripts {
        let name = format!("code/{i:03}_step.R");
        fs::write(root.join(&name), r_script(i, 60))?;
        readme.push_str(&format!("{}. Run `{name}`\n", i + 1));
    }
    for i in 0..7 {
        fs::write(root.join(format!("data/input_{i}.csv")), numeric_table(50, 4, 0.0))?;
    }
    fs::write(root.join("data/codebook.md"), "# Codebook\n\n- y: outcome\n")?;
    fs::write(root.join("results/tables/table_1.csv"), numeric_table(10, 3, 0.0))?;
    fs::write(root.join("README.md"), readme)
}

/// A CSV table with a header row; `shift` perturbs every value.
pub fn numeric_table(rows: usize, cols: usize, shift: f64) -> String {
    let header: Vec<String> = (0..cols).map(|c| format!("v{c}")).collect();
    let mut s = header.join(",");
    s.push('\n');
    for r in 0..rows {
        let row: Vec<String> = (0..cols)
            .map(|c| format!("{}", (r * cols + c) as f64 * 0.37 + shift))
            .collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
