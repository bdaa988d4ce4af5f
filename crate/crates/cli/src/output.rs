//! Run artifacts: manifest, observable tables, per-sample rows and state snapshots.
//!
//! Layout of a run directory:
//!
//! - `manifest.toml`: schema version, tool version, seed, wall time, table
//!   list and the fully resolved configuration under `[config]`.
//! - `<observable>.csv`: columns `time,mean,stderr,n`.
//! - `entropy_profile.csv`: columns `l_a,mean,stderr,n`.
//! - `trajectories.csv`: columns `time,sample_index,observable,value`.
//! - `oracle_report.csv`: columns `check,n_modes,cases,max_error,tolerance,passed`.
//! - `final_state.json`: a [`StateSnapshot`].
//!
//! Floating-point values are written with 17 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use fgsim_core::matkit::AntisymMatrix;
use fgsim_core::CovarianceState;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{RunError, RunResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const TRAJECTORY_FILE: &str = "trajectories.csv";
pub const SNAPSHOT_FILE: &str = "final_state.json";

/// Columns of each table kind, recorded in the manifest.
pub const SERIES_COLUMNS: [&str; 4] = ["time", "mean", "stderr", "n"];
pub const PROFILE_COLUMNS: [&str; 4] = ["l_a", "mean", "stderr", "n"];
pub const TRAJECTORY_COLUMNS: [&str; 4] = ["time", "sample_index", "observable", "value"];
pub const ORACLE_COLUMNS: [&str; 6] = ["check", "n_modes", "cases", "max_error", "tolerance", "passed"];

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// `mean ± stderr` over `n` samples at each abscissa.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTable {
    pub name: String,
    /// Time for time series, subsystem size for profiles.
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n: usize,
    pub profile: bool,
}

impl SeriesTable {
    pub fn time_series(name: impl Into<String>, x: Vec<f64>, mean: Vec<f64>, stderr: Vec<f64>, n: usize) -> Self {
        Self { name: name.into(), x, mean, stderr, n, profile: false }
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn write(&self, dir: &Path) -> RunResult<PathBuf> {
        let path = dir.join(self.file_name());
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(if self.profile { PROFILE_COLUMNS } else { SERIES_COLUMNS })?;
        for i in 0..self.x.len() {
            let x = if self.profile { format!("{}", self.x[i] as usize) } else { fmt_f64(self.x[i]) };
            w.write_record([x, fmt_f64(self.mean[i]), fmt_f64(self.stderr[i]), self.n.to_string()])?;
        }
        w.flush().map_err(|e| RunError::io(&path, e))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> RunResult<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let profile = r.headers()?.get(0) == Some("l_a");
        let mut t = SeriesTable {
            name: path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string(),
            x: Vec::new(),
            mean: Vec::new(),
            stderr: Vec::new(),
            n: 0,
            profile,
        };
        for row in r.records() {
            let row = row?;
            let num = |i: usize| -> RunResult<f64> {
                row.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| RunError::Other(format!("{}: malformed row {row:?}", path.display())))
            };
            t.x.push(num(0)?);
            t.mean.push(num(1)?);
            t.stderr.push(num(2)?);
            t.n = num(3)? as usize;
        }
        Ok(t)
    }
}

/// One value of one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub time: f64,
    pub sample_index: u64,
    pub observable: String,
    pub value: f64,
}

pub fn write_trajectory_rows(dir: &Path, rows: &[TrajectoryRow]) -> RunResult<PathBuf> {
    let path = dir.join(TRAJECTORY_FILE);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(TRAJECTORY_COLUMNS)?;
    for r in rows {
        w.write_record([fmt_f64(r.time), r.sample_index.to_string(), r.observable.clone(), fmt_f64(r.value)])?;
    }
    w.flush().map_err(|e| RunError::io(&path, e))?;
    Ok(path)
}

/// Outcome of one identity check of the oracle suite.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRow {
    pub check: String,
    pub n_modes: usize,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl OracleRow {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

pub fn write_oracle_rows(dir: &Path, rows: &[OracleRow]) -> RunResult<PathBuf> {
    let path = dir.join("oracle_report.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(ORACLE_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.check.clone(),
            r.n_modes.to_string(),
            r.cases.to_string(),
            fmt_f64(r.max_error),
            fmt_f64(r.tolerance),
            r.passed().to_string(),
        ])?;
    }
    w.flush().map_err(|e| RunError::io(&path, e))?;
    Ok(path)
}

/// Self-describing state record: `n_modes`, row-major `V` and `ln|P|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub schema_version: u32,
    pub n_modes: usize,
    /// Row-major `2n×2n` covariance matrix.
    pub covariance: Vec<f64>,
    pub log_weight: f64,
}

impl StateSnapshot {
    pub fn from_state(s: &CovarianceState) -> Self {
        let v = s.covariance();
        let covariance = (0..v.nrows()).flat_map(|i| (0..v.ncols()).map(move |j| v[(i, j)])).collect();
        Self { schema_version: SCHEMA_VERSION, n_modes: s.n_modes(), covariance, log_weight: s.log_weight() }
    }

    pub fn to_state(&self) -> RunResult<CovarianceState> {
        let dim = 2 * self.n_modes;
        if self.covariance.len() != dim * dim {
            return Err(RunError::config(format!(
                "snapshot holds {} entries, expected {} for {} modes",
                self.covariance.len(),
                dim * dim,
                self.n_modes
            )));
        }
        let v = DMatrix::from_row_slice(dim, dim, &self.covariance);
        let a = AntisymMatrix::new(v)?;
        let s = CovarianceState::from_parts(a, self.log_weight);
        if !s.check_physical().is_physical() {
            return Err(RunError::config("snapshot covariance violates VᵀV ≤ I"));
        }
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> RunResult<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| RunError::Other(e.to_string()))?;
        fs::write(path, text).map_err(|e| RunError::io(path, e))
    }

    pub fn load(path: &Path) -> RunResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| RunError::config(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schemas {
    pub series: Vec<String>,
    pub profile: Vec<String>,
    pub trajectories: Vec<String>,
    pub oracle: Vec<String>,
}

impl Default for Schemas {
    fn default() -> Self {
        let own = |c: &[&str]| c.iter().map(|s| s.to_string()).collect();
        Self {
            series: own(&SERIES_COLUMNS),
            profile: own(&PROFILE_COLUMNS),
            trajectories: own(&TRAJECTORY_COLUMNS),
            oracle: own(&ORACLE_COLUMNS),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub experiment: String,
    pub seed: u64,
    pub workers: usize,
    pub wall_time_seconds: f64,
    pub tables: Vec<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub schemas: Schemas,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn save(&self, dir: &Path) -> RunResult<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let text = toml::to_string(self).map_err(|e| RunError::Other(e.to_string()))?;
        fs::write(&path, text).map_err(|e| RunError::io(&path, e))?;
        Ok(path)
    }

    pub fn load(dir: &Path) -> RunResult<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| RunError::io(&path, e))?;
        toml::from_str(&text).map_err(|e| RunError::Other(format!("{}: {}", path.display(), e.message())))
    }
}
