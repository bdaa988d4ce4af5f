//! Plain-text summary of a run directory.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::RunResult;
use crate::output::{Manifest, SeriesTable};

/// Summarizes the manifest and the last row of every observable table.
pub fn summarize(dir: &Path) -> RunResult<String> {
    let m = Manifest::load(dir)?;
    let mut s = String::new();
    let _ = writeln!(s, "run directory   {}", dir.display());
    let _ = writeln!(s, "experiment      {}", m.experiment);
    let _ = writeln!(s, "tool version    {} (schema {})", m.tool_version, m.schema_version);
    let _ = writeln!(s, "seed            {}", m.seed);
    let _ = writeln!(s, "workers         {}", m.workers);
    let _ = writeln!(s, "wall time       {:.3} s", m.wall_time_seconds);
    let _ = writeln!(s, "model           {:?}, L = {}", m.config.model.name, m.config.model.l);
    for w in &m.warnings {
        let _ = writeln!(s, "warning         {w}");
    }
    for file in &m.tables {
        let path = dir.join(file);
        let is_table = file.ends_with(".csv") && file != "trajectories.csv" && file != "oracle_report.csv";
        if !is_table {
            let _ = writeln!(s, "{file:<24} present");
            continue;
        }
        let t = SeriesTable::read(&path)?;
        match t.x.len() {
            0 => {
                let _ = writeln!(s, "{file:<24} empty");
            }
            k => {
                let label = if t.profile { "L_A" } else { "t" };
                let peak = t.mean.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let _ = writeln!(
                    s,
                    "{file:<24} {k} rows, n = {}, last {label} = {:.4}: {:.6} ± {:.6}, max {:.6}",
                    t.n,
                    t.x[k - 1],
                    t.mean[k - 1],
                    t.stderr[k - 1],
                    peak
                );
            }
        }
    }
    if m.tables.iter().any(|f| f == "oracle_report.csv") {
        let mut r = csv::Reader::from_path(dir.join("oracle_report.csv"))?;
        for row in r.records() {
            let row = row?;
            let _ = writeln!(
                s,
                "oracle {:<28} n = {:<2} max error {} (tol {}) passed = {}",
                &row[0], &row[1], &row[3], &row[4], &row[5]
            );
        }
    }
    Ok(s)
}
