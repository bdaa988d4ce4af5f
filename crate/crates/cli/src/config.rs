//! Experiment configuration: a TOML document plus command-line overrides.
//!
//! Rates are the dimensionless ratios used for the models: Hatano-Nelson
//! chains are measured in units of `J`, Kitaev chains in units of `Δ`. Times
//! are given either in those units (`t_max`, `dt`) or in units of `1/γ`
//! (`t_max_gamma`, `dt_gamma`).
//!
//! ```toml
//! experiment = "trajectories"
//!
//! [model]
//! name = "hatano_nelson_dissipative"
//! L = 6
//! gamma_over_j = 0.5
//!
//! [time]
//! t_max_gamma = 4.0
//! dt_gamma = 0.01
//! record_every = 10
//!
//! [ensemble]
//! samples = 500
//! seed = 7
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{RunError, RunResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum ExperimentKind {
    LindbladDirect,
    Trajectories,
    Circuit,
    Monitor,
    OracleCheck,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::LindbladDirect => "lindblad_direct",
            ExperimentKind::Trajectories => "trajectories",
            ExperimentKind::Circuit => "circuit",
            ExperimentKind::Monitor => "monitor",
            ExperimentKind::OracleCheck => "oracle_check",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum ModelName {
    Kitaev,
    HatanoNelsonDissipative,
    HatanoNelsonProjective,
    CustomQuadratic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum InitialState {
    #[default]
    Neel,
    Vacuum,
    Filled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpKindName {
    Dissipative,
    Projective,
    /// The complementary pair `n`, `1 − n`.
    Monitor,
}

/// One Lindblad channel of a custom model acting on a bare mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomJump {
    pub mode: usize,
    pub rate: f64,
    pub kind: JumpKindName,
}

/// `Ĥ = Σ h_ij a_i†a_j + ½ Σ (Δ_ij a_i†a_j† + h.c.)` with real matrices.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomQuadratic {
    pub hopping: Vec<Vec<f64>>,
    #[serde(default)]
    pub pairing: Vec<Vec<f64>>,
    #[serde(default)]
    pub jumps: Vec<CustomJump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: ModelName,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(default = "one")]
    pub j_over_delta: f64,
    #[serde(default = "default_mu")]
    pub mu_over_delta: f64,
    #[serde(default = "default_gamma_delta")]
    pub gamma_over_delta: f64,
    #[serde(default = "default_gamma_j")]
    pub gamma_over_j: f64,
    #[serde(default)]
    pub initial: InitialState,
    /// Start from a saved state snapshot instead of `initial`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_snapshot: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomQuadratic>,
}

fn one() -> f64 {
    1.0
}
fn default_mu() -> f64 {
    0.2
}
fn default_gamma_delta() -> f64 {
    0.1
}
fn default_gamma_j() -> f64 {
    0.5
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            name: ModelName::HatanoNelsonDissipative,
            l: 6,
            j_over_delta: one(),
            mu_over_delta: default_mu(),
            gamma_over_delta: default_gamma_delta(),
            gamma_over_j: default_gamma_j(),
            initial: InitialState::Neel,
            initial_snapshot: None,
            custom: None,
        }
    }
}

impl ModelConfig {
    /// The monitoring or dissipation rate in model units.
    pub fn rate(&self) -> f64 {
        match self.name {
            ModelName::Kitaev => self.gamma_over_delta,
            ModelName::HatanoNelsonDissipative | ModelName::HatanoNelsonProjective => self.gamma_over_j,
            ModelName::CustomQuadratic => self
                .custom
                .as_ref()
                .map(|c| c.jumps.iter().map(|j| j.rate).fold(0.0, f64::max))
                .unwrap_or(0.0),
        }
    }
}

/// With no final time or step given, runs use `t_max_gamma = 4` and
/// `dt_gamma = 0.01`, or the same numbers in model units when the model has
/// no rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_gamma: Option<f64>,
    #[serde(default = "one_usize")]
    pub record_every: usize,
}

fn one_usize() -> usize {
    1
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { t_max: None, t_max_gamma: None, dt: None, dt_gamma: None, record_every: 1 }
    }
}

pub const DEFAULT_T_MAX_GAMMA: f64 = 4.0;
pub const DEFAULT_DT_GAMMA: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(default = "one_usize")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Write one row per sample, time and observable.
    #[serde(default)]
    pub per_trajectory: bool,
    /// Also integrate the Lindblad covariance equation for comparison.
    #[serde(default = "yes")]
    pub compare_lindblad: bool,
    /// Also run the no-jump (post-selected) evolution.
    #[serde(default)]
    pub postselected: bool,
    /// Record the entropy of every prefix `0..L_A` at the final time.
    #[serde(default)]
    pub entropy_profile: bool,
}

fn yes() -> bool {
    true
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            samples: 1,
            seed: 0,
            per_trajectory: false,
            compare_lindblad: true,
            postselected: false,
            entropy_profile: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    /// Modes of subsystem A; default is the first `L/2` modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitSetup {
    /// Kitaev layers with uniformly distributed interaction time.
    #[default]
    KitaevUniform,
    /// Kitaev layers with exponential interaction time and `p = 1/L`.
    KitaevExponential,
    /// Independent random quadratic generator per layer.
    RandomEnsemble,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauName {
    Uniform,
    Exponential,
    TruncatedExponential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    #[serde(default)]
    pub setup: CircuitSetup,
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default = "default_p")]
    pub measure_probability: f64,
    /// `E_max` in units of `J`.
    #[serde(default = "one")]
    pub e_max_over_j: f64,
    /// Override of the interaction-time law of the setup.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<TauName>,
    #[serde(default = "one")]
    pub ensemble_scale: f64,
    /// Dissipate every bare mode once per layer.
    #[serde(default)]
    pub dissipate_all: bool,
}

fn default_layers() -> usize {
    50
}
fn default_p() -> f64 {
    0.1
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            setup: CircuitSetup::KitaevUniform,
            layers: default_layers(),
            measure_probability: default_p(),
            e_max_over_j: 1.0,
            tau: None,
            ensemble_scale: 1.0,
            dissipate_all: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_max_modes")]
    pub max_modes: usize,
    #[serde(default = "default_cases")]
    pub cases: usize,
}

fn default_max_modes() -> usize {
    4
}
fn default_cases() -> usize {
    100
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { max_modes: default_max_modes(), cases: default_cases() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("runs/latest") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default)]
    pub circuit: CircuitConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Values supplied on the command line; each `Some` replaces the file value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<ExperimentKind>,
    pub model: Option<ModelName>,
    pub l: Option<usize>,
    pub gamma_over_j: Option<f64>,
    pub mu_over_delta: Option<f64>,
    pub j_over_delta: Option<f64>,
    pub gamma_over_delta: Option<f64>,
    pub initial: Option<InitialState>,
    pub t_max: Option<f64>,
    pub t_max_gamma: Option<f64>,
    pub dt: Option<f64>,
    pub dt_gamma: Option<f64>,
    pub record_every: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub per_trajectory: bool,
    pub layers: Option<usize>,
    pub measure_probability: Option<f64>,
    pub max_modes: Option<usize>,
    pub cases: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Resolved integration grid in model time units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolvedTime {
    pub t_max: f64,
    pub dt: f64,
    pub record_every: usize,
}

/// A validation failure tied to a key of the document.
struct Invalid {
    section: Option<&'static str>,
    key: &'static str,
    message: String,
}

fn invalid(section: Option<&'static str>, key: &'static str, message: impl Into<String>) -> Invalid {
    Invalid { section, key, message: message.into() }
}

/// 1-based line of `offset` in `src`.
fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Line of `key = …` inside `[section]` (or at top level), if present.
fn locate(src: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = Some(header.trim().to_string());
            continue;
        }
        let Some((k, _)) = line.split_once('=') else { continue };
        let k = k.trim().trim_matches('"');
        let in_section = match (section, current.as_deref()) {
            (None, None) => true,
            (Some(s), Some(c)) => s == c,
            _ => false,
        };
        if in_section && k == key {
            return Some(i + 1);
        }
    }
    None
}

/// Accepts either a bare config or a run manifest with a `[config]` table.
fn parse_document(src: &str) -> Result<ExperimentConfig, (Option<usize>, String)> {
    let value: toml::Table = toml::from_str(src).map_err(|e| (e.span().map(|s| line_of(src, s.start)), e.message().to_string()))?;
    if value.contains_key("schema_version") {
        if let Some(cfg) = value.get("config") {
            return cfg.clone().try_into().map_err(|e: toml::de::Error| (None, format!("manifest config: {}", e.message())));
        }
    }
    toml::from_str(src).map_err(|e| (e.span().map(|s| line_of(src, s.start)), e.message().to_string()))
}

impl ExperimentConfig {
    /// Defaults for `experiment` when no file is given.
    pub fn for_experiment(experiment: ExperimentKind) -> Self {
        let mut model = ModelConfig::default();
        if experiment == ExperimentKind::Monitor || experiment == ExperimentKind::Circuit {
            model.name = ModelName::Kitaev;
        }
        Self {
            experiment,
            model,
            time: TimeConfig::default(),
            ensemble: EnsembleConfig::default(),
            partition: PartitionConfig::default(),
            circuit: CircuitConfig::default(),
            oracle: OracleConfig::default(),
            output: OutputConfig { dir: PathBuf::from(format!("runs/{}", experiment.as_str())) },
        }
    }

    pub fn from_toml_str(src: &str) -> RunResult<Self> {
        parse_document(src).map_err(|(line, message)| RunError::Config { path: None, line, message })
    }

    /// Reads `path`, applies `overrides` and validates. Errors carry the
    /// line of the offending key when it came from the file.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> RunResult<Self> {
        let (src, mut cfg) = match path {
            Some(p) => {
                let src = std::fs::read_to_string(p).map_err(|e| RunError::io(p, e))?;
                let cfg = parse_document(&src).map_err(|(line, message)| RunError::Config {
                    path: Some(p.to_path_buf()),
                    line,
                    message,
                })?;
                (Some(src), cfg)
            }
            None => {
                let kind = overrides
                    .experiment
                    .ok_or_else(|| RunError::config("no config file given and no --experiment selected"))?;
                (None, Self::for_experiment(kind))
            }
        };
        cfg.apply(overrides);
        cfg.fill_time_defaults();
        if let Err(bad) = cfg.check() {
            let line = src.as_deref().and_then(|s| locate(s, bad.section, bad.key));
            let key = match bad.section {
                Some(s) => format!("{s}.{}", bad.key),
                None => bad.key.to_string(),
            };
            return Err(RunError::Config {
                path: path.map(Path::to_path_buf),
                line,
                message: format!("{key}: {}", bad.message),
            });
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(e) = o.experiment {
            self.experiment = e;
        }
        let m = &mut self.model;
        if let Some(v) = o.model {
            m.name = v;
        }
        if let Some(v) = o.l {
            m.l = v;
        }
        if let Some(v) = o.gamma_over_j {
            m.gamma_over_j = v;
        }
        if let Some(v) = o.mu_over_delta {
            m.mu_over_delta = v;
        }
        if let Some(v) = o.j_over_delta {
            m.j_over_delta = v;
        }
        if let Some(v) = o.gamma_over_delta {
            m.gamma_over_delta = v;
        }
        if let Some(v) = o.initial {
            m.initial = v;
        }
        let t = &mut self.time;
        // A flag for one form of a quantity replaces both forms from the file.
        if o.t_max.is_some() || o.t_max_gamma.is_some() {
            t.t_max = o.t_max;
            t.t_max_gamma = o.t_max_gamma;
        }
        if o.dt.is_some() || o.dt_gamma.is_some() {
            t.dt = o.dt;
            t.dt_gamma = o.dt_gamma;
        }
        if let Some(v) = o.record_every {
            t.record_every = v;
        }
        if let Some(v) = o.samples {
            self.ensemble.samples = v;
        }
        if let Some(v) = o.seed {
            self.ensemble.seed = v;
        }
        if o.per_trajectory {
            self.ensemble.per_trajectory = true;
        }
        if let Some(v) = o.layers {
            self.circuit.layers = v;
        }
        if let Some(v) = o.measure_probability {
            self.circuit.measure_probability = v;
        }
        if let Some(v) = o.max_modes {
            self.oracle.max_modes = v;
        }
        if let Some(v) = o.cases {
            self.oracle.cases = v;
        }
        if let Some(v) = &o.out {
            self.output.dir = v.clone();
        }
    }

    fn check(&self) -> Result<(), Invalid> {
        let m = &self.model;
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let non_negative = |x: f64| x >= 0.0 && x.is_finite();
        if self.experiment == ExperimentKind::OracleCheck {
            if !(1..=fgsim_core::oracle::MAX_MODES).contains(&self.oracle.max_modes) {
                return Err(invalid(
                    Some("oracle"),
                    "max_modes",
                    format!("must lie in 1..={}", fgsim_core::oracle::MAX_MODES),
                ));
            }
            if self.oracle.cases == 0 {
                return Err(invalid(Some("oracle"), "cases", "must be at least 1"));
            }
            return Ok(());
        }
        if m.l < 2 {
            return Err(invalid(Some("model"), "L", format!("chain length must be at least 2, got {}", m.l)));
        }
        match m.name {
            ModelName::Kitaev => {
                if !non_negative(m.gamma_over_delta) {
                    return Err(invalid(Some("model"), "gamma_over_delta", "must be non-negative and finite"));
                }
                if !m.j_over_delta.is_finite() || !m.mu_over_delta.is_finite() {
                    return Err(invalid(Some("model"), "mu_over_delta", "Kitaev parameters must be finite"));
                }
            }
            ModelName::HatanoNelsonDissipative | ModelName::HatanoNelsonProjective => {
                if !non_negative(m.gamma_over_j) {
                    return Err(invalid(Some("model"), "gamma_over_j", "must be non-negative and finite"));
                }
            }
            ModelName::CustomQuadratic => {
                let Some(c) = &m.custom else {
                    return Err(invalid(Some("model"), "name", "custom_quadratic requires a [model.custom] table"));
                };
                let square = |rows: &Vec<Vec<f64>>| rows.len() == m.l && rows.iter().all(|r| r.len() == m.l);
                if !square(&c.hopping) {
                    return Err(invalid(Some("model.custom"), "hopping", format!("must be an {0}x{0} matrix", m.l)));
                }
                if !c.pairing.is_empty() && !square(&c.pairing) {
                    return Err(invalid(Some("model.custom"), "pairing", format!("must be an {0}x{0} matrix", m.l)));
                }
                if let Some(j) = c.jumps.iter().find(|j| j.mode >= m.l || !non_negative(j.rate)) {
                    return Err(invalid(
                        Some("model.custom"),
                        "jumps",
                        format!("jump on mode {} with rate {} is out of range", j.mode, j.rate),
                    ));
                }
            }
        }
        if let Some(modes) = &self.partition.modes {
            if let Some(k) = modes.iter().find(|&&k| k >= m.l) {
                return Err(invalid(Some("partition"), "modes", format!("mode {k} is outside the chain of length {}", m.l)));
            }
        }
        if self.experiment == ExperimentKind::Monitor && m.name != ModelName::Kitaev {
            return Err(invalid(Some("model"), "name", "the monitor experiment requires the kitaev model"));
        }
        if self.experiment == ExperimentKind::Circuit {
            let c = &self.circuit;
            if c.layers == 0 {
                return Err(invalid(Some("circuit"), "layers", "must be at least 1"));
            }
            if !(0.0..=1.0).contains(&c.measure_probability) {
                return Err(invalid(Some("circuit"), "measure_probability", "must lie in [0, 1]"));
            }
            if !positive(c.e_max_over_j) {
                return Err(invalid(Some("circuit"), "e_max_over_j", "must be positive"));
            }
            if !positive(c.ensemble_scale) {
                return Err(invalid(Some("circuit"), "ensemble_scale", "must be positive"));
            }
        } else {
            self.resolve_time().map_err(|(key, msg)| invalid(Some("time"), key, msg))?;
        }
        if self.experiment != ExperimentKind::LindbladDirect && self.ensemble.samples == 0 {
            return Err(invalid(Some("ensemble"), "samples", "must be at least 1"));
        }
        Ok(())
    }

    /// Writes the default final time and step into the config so that a
    /// saved copy does not depend on them.
    pub fn fill_time_defaults(&mut self) {
        let gamma = self.model.rate() > 0.0;
        let t = &mut self.time;
        if t.t_max.is_none() && t.t_max_gamma.is_none() {
            if gamma {
                t.t_max_gamma = Some(DEFAULT_T_MAX_GAMMA);
            } else {
                t.t_max = Some(DEFAULT_T_MAX_GAMMA);
            }
        }
        if t.dt.is_none() && t.dt_gamma.is_none() {
            if gamma {
                t.dt_gamma = Some(DEFAULT_DT_GAMMA);
            } else {
                t.dt = Some(DEFAULT_DT_GAMMA);
            }
        }
    }

    /// `(t_max, dt)` in model units.
    pub fn resolve_time(&self) -> Result<ResolvedTime, (&'static str, String)> {
        let t = &self.time;
        let rate = self.model.rate();
        let per_gamma = |v: f64, key: &'static str| -> Result<f64, (&'static str, String)> {
            if !(rate > 0.0) {
                return Err((key, "times in units of 1/γ need a positive rate".to_string()));
            }
            Ok(v / rate)
        };
        let t_max = match (t.t_max, t.t_max_gamma) {
            (Some(v), None) => v,
            (None, Some(v)) => per_gamma(v, "t_max_gamma")?,
            (None, None) if rate > 0.0 => DEFAULT_T_MAX_GAMMA / rate,
            (None, None) => DEFAULT_T_MAX_GAMMA,
            (Some(_), Some(_)) => return Err(("t_max", "give only one of t_max and t_max_gamma".into())),
        };
        let dt = match (t.dt, t.dt_gamma) {
            (Some(v), None) => v,
            (None, Some(v)) => per_gamma(v, "dt_gamma")?,
            (None, None) if rate > 0.0 => DEFAULT_DT_GAMMA / rate,
            (None, None) => DEFAULT_DT_GAMMA,
            (Some(_), Some(_)) => return Err(("dt", "give only one of dt and dt_gamma".into())),
        };
        if !(t_max >= 0.0) || !t_max.is_finite() {
            return Err(("t_max", format!("must be non-negative, got {t_max}")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(("dt", format!("must be positive, got {dt}")));
        }
        if t.record_every == 0 {
            return Err(("record_every", "must be at least 1".into()));
        }
        Ok(ResolvedTime { t_max, dt, record_every: t.record_every })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }
}
