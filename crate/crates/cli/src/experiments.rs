//! Experiment drivers: build the model, run it and collect tables.

use std::fs;
use std::time::Instant;

use fgsim_core::circuits::{
    kitaev_exponential_schedule, kitaev_uniform_schedule, run_circuit, CircuitSchedule, TauDistribution,
    UnitarySource,
};
use fgsim_core::dynamics::{
    lindblad_covariance_dissipative, lindblad_covariance_projective, Jump, JumpKind, LindbladModel,
    NonHermitianPropagator,
};
use fgsim_core::entanglement::{entanglement_entropy, entropy_from_covariance, log_negativity, Bipartition};
use fgsim_core::grassmann::gaussian_integral_check;
use fgsim_core::models::{
    hatano_nelson_dissipative, hatano_nelson_projective, kitaev_monitoring, to_majorana, QuadraticSpec,
};
use fgsim_core::oracle::sweep::{negativity_calibration, operation_sweep};
use fgsim_core::seed::sample_rng;
use fgsim_core::superop::measure_dressed;
use fgsim_core::trajectory::{
    simulate_trajectory, Observable, TimeGrid, TrajectoryOptions, TrajectoryRecord, TrajectoryStepper,
};
use fgsim_core::{matkit, AntisymMatrix, CovarianceState, DressedMode, Occupation};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::config::{
    CircuitSetup, ExperimentConfig, ExperimentKind, InitialState, JumpKindName, ModelConfig, ModelName, TauName,
};
use crate::ensemble::{run_ensemble, sample_error, EnsembleSpec};
use crate::error::{RunError, RunResult};
use crate::output::{
    write_oracle_rows, write_trajectory_rows, Manifest, OracleRow, Schemas, SeriesTable, StateSnapshot, TrajectoryRow,
    SCHEMA_VERSION, SNAPSHOT_FILE,
};

/// Tolerances of the oracle suite.
pub const SWEEP_TOL: f64 = 1e-8;
pub const NEGATIVITY_TOL: f64 = 1e-7;
pub const GRASSMANN_TOL: f64 = 1e-12;
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Everything a run produces before it is written to disk.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub tables: Vec<SeriesTable>,
    pub rows: Vec<TrajectoryRow>,
    pub oracle: Vec<OracleRow>,
    pub final_state: Option<CovarianceState>,
    pub warnings: Vec<String>,
}

impl RunOutput {
    pub fn table(&self, name: &str) -> Option<&SeriesTable> {
        self.tables.iter().find(|t| t.name == name)
    }
}

pub fn build_model(m: &ModelConfig) -> RunResult<LindbladModel> {
    Ok(match m.name {
        ModelName::HatanoNelsonDissipative => hatano_nelson_dissipative(m.l, 1.0, m.gamma_over_j)?,
        ModelName::HatanoNelsonProjective => hatano_nelson_projective(m.l, 1.0, m.gamma_over_j)?,
        ModelName::Kitaev => kitaev_monitoring(m.l, m.mu_over_delta, m.j_over_delta, 1.0, m.gamma_over_delta)?,
        ModelName::CustomQuadratic => {
            let c = m.custom.as_ref().ok_or_else(|| RunError::config("custom_quadratic requires [model.custom]"))?;
            let real = |rows: &[Vec<f64>]| {
                DMatrix::from_fn(m.l, m.l, |i, j| {
                    Complex64::new(rows.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0.0), 0.0)
                })
            };
            let spec = QuadraticSpec::new(real(&c.hopping), real(&c.pairing))?;
            let (h, _) = to_majorana(&spec)?;
            let mut jumps = Vec::new();
            for j in &c.jumps {
                let mode = DressedMode::bare(j.mode, m.l)?;
                match j.kind {
                    JumpKindName::Dissipative => jumps.push(Jump { rate: j.rate, mode, kind: JumpKind::Dissipative }),
                    JumpKindName::Projective => jumps.push(Jump { rate: j.rate, mode, kind: JumpKind::Projective }),
                    JumpKindName::Monitor => {
                        jumps.push(Jump { rate: j.rate, mode: mode.clone(), kind: JumpKind::Projective });
                        jumps.push(Jump { rate: j.rate, mode: mode.conjugate(), kind: JumpKind::Projective });
                    }
                }
            }
            LindbladModel::new(h, jumps)?
        }
    })
}

pub fn initial_state(m: &ModelConfig) -> RunResult<CovarianceState> {
    if let Some(path) = &m.initial_snapshot {
        let s = StateSnapshot::load(path)?.to_state()?;
        if s.n_modes() != m.l {
            return Err(RunError::config(format!("snapshot has {} modes, model has {}", s.n_modes(), m.l)));
        }
        return Ok(s);
    }
    Ok(match m.initial {
        InitialState::Neel => CovarianceState::neel(m.l)?,
        InitialState::Vacuum => CovarianceState::vacuum(m.l)?,
        InitialState::Filled => CovarianceState::filled(m.l)?,
    })
}

pub fn partition(cfg: &ExperimentConfig) -> RunResult<Bipartition> {
    Ok(match &cfg.partition.modes {
        Some(modes) => Bipartition::new(modes, cfg.model.l)?,
        None => Bipartition::first_half(cfg.model.l),
    })
}

fn time_grid(cfg: &ExperimentConfig) -> RunResult<TimeGrid> {
    let t = cfg.resolve_time().map_err(|(key, msg)| RunError::config(format!("time.{key}: {msg}")))?;
    Ok(TimeGrid::new(t.t_max, t.dt, t.record_every)?)
}

/// Deterministic covariance solution of the Lindblad equation on the recorded grid.
pub fn lindblad_series(model: &LindbladModel, init: &CovarianceState, grid: &TimeGrid) -> RunResult<Vec<CovarianceState>> {
    let kind = model
        .kind()
        .ok_or_else(|| RunError::config("the covariance Lindblad solver needs jumps of a single kind"))?;
    let times = grid.times();
    let mut out = Vec::with_capacity(times.len());
    let mut s = init.clone().normalized();
    let mut prev = 0.0;
    for &t in &times {
        if t > prev {
            s = match kind {
                JumpKind::Dissipative => lindblad_covariance_dissipative(&s, model, t - prev, grid.dt),
                JumpKind::Projective => lindblad_covariance_projective(&s, model, t - prev, grid.dt),
            }
            .map_err(|e| sample_error("Lindblad solution", e))?;
            prev = t;
        }
        out.push(s.clone());
    }
    Ok(out)
}

/// No-jump evolution, renormalized after every step, on the recorded grid.
pub fn postselected_series(
    model: &LindbladModel,
    init: &CovarianceState,
    grid: &TimeGrid,
) -> RunResult<Vec<CovarianceState>> {
    let prop = NonHermitianPropagator::new(&model.no_jump_generator(), grid.dt)?;
    let pure = init.is_pure();
    let mut s = init.clone().normalized();
    let mut out = Vec::with_capacity(grid.times().len());
    for step in 0..=grid.steps {
        if step > 0 {
            s = prop.apply(&s)?.normalized();
            if pure {
                s = CovarianceState::from_parts(AntisymMatrix::project(matkit::purify_antisym(s.covariance())), 0.0);
            }
        }
        if grid.is_recorded(step) {
            out.push(s.clone());
        }
    }
    Ok(out)
}

fn deterministic_table(name: &str, times: &[f64], values: Vec<f64>) -> SeriesTable {
    SeriesTable::time_series(name, times.to_vec(), values, vec![0.0; times.len()], 1)
}

fn states_table<F>(name: &str, times: &[f64], states: &[CovarianceState], f: F) -> RunResult<SeriesTable>
where
    F: Fn(&CovarianceState) -> fgsim_core::Result<f64>,
{
    let values = states.iter().map(f).collect::<fgsim_core::Result<Vec<_>>>()?;
    Ok(deterministic_table(name, times, values))
}

fn run_lindblad(cfg: &ExperimentConfig) -> RunResult<RunOutput> {
    let model = build_model(&cfg.model)?;
    let init = initial_state(&cfg.model)?;
    let grid = time_grid(cfg)?;
    let p = partition(cfg)?;
    let times = grid.times();
    let states = lindblad_series(&model, &init, &grid)?;
    Ok(RunOutput {
        tables: vec![
            states_table("mixed_ln", &times, &states, |s| log_negativity(s, &p))?,
            states_table("mixed_ee", &times, &states, |s| entanglement_entropy(s, &p))?,
            states_table("n_total", &times, &states, |s| Ok(s.total_occupation()))?,
        ],
        final_state: states.last().cloned(),
        ..Default::default()
    })
}

fn records_to_rows(records: &[TrajectoryRecord], names: &[String], out: &mut Vec<TrajectoryRow>) {
    for rec in records {
        for (k, series) in rec.series.iter().enumerate() {
            let Some(name) = names.get(k) else { continue };
            for (t, &value) in rec.times.iter().zip(series) {
                out.push(TrajectoryRow { time: *t, sample_index: rec.sample_index, observable: name.clone(), value });
            }
        }
    }
}

fn run_trajectories(cfg: &ExperimentConfig, workers: usize) -> RunResult<RunOutput> {
    let model = build_model(&cfg.model)?;
    let init = initial_state(&cfg.model)?;
    let grid = time_grid(cfg)?;
    let p = partition(cfg)?;
    let times = grid.times();
    let mut out = RunOutput::default();
    if let Some(g) = TrajectoryStepper::new(&model, grid.dt)?.coarse_step() {
        out.warnings.push(format!("dt·max γ = {g} is large; the first-order unraveling may be inaccurate"));
    }
    let names = vec!["ln".to_string(), "ee".to_string(), "n_total".to_string()];
    let mut observables = vec![
        Observable::LogNegativity(p.clone()),
        Observable::EntanglementEntropy(p.clone()),
        Observable::TotalOccupation,
    ];
    let l = cfg.model.l;
    if cfg.ensemble.entropy_profile {
        for la in 1..l {
            observables.push(Observable::EntanglementEntropy(Bipartition::new(&(0..la).collect::<Vec<_>>(), l)?));
        }
    }
    let options = TrajectoryOptions { observables, keep_covariances: true };
    let spec = EnsembleSpec {
        n_samples: cfg.ensemble.samples,
        times: times.clone(),
        n_observables: options.observables.len(),
        track_covariance: true,
        keep_records: cfg.ensemble.per_trajectory,
    };
    let seed = cfg.ensemble.seed;
    let ens = run_ensemble(&spec, workers, |i| simulate_trajectory(&model, &init, &grid, &options, seed, i))?;
    let acc = &ens.accumulator;
    let n = acc.n_samples();
    for (k, name) in names.iter().enumerate() {
        out.tables.push(SeriesTable::time_series(name.clone(), times.clone(), acc.mean(k), acc.stderr(k), n));
    }
    let (v, e) = acc.mixed_log_negativity(&p)?;
    out.tables.push(SeriesTable::time_series("mixed_ln", times.clone(), v, e, n));
    let (v, e) = acc.mixed_estimate(|c| entropy_from_covariance(c, &p))?;
    out.tables.push(SeriesTable::time_series("mixed_ee", times.clone(), v, e, n));
    if cfg.ensemble.entropy_profile {
        let last = times.len() - 1;
        let mut prof = SeriesTable {
            name: "entropy_profile".into(),
            x: vec![0.0],
            mean: vec![0.0],
            stderr: vec![0.0],
            n,
            profile: true,
        };
        for la in 1..l {
            prof.x.push(la as f64);
            prof.mean.push(acc.mean(names.len() + la - 1)[last]);
            prof.stderr.push(acc.stderr(names.len() + la - 1)[last]);
        }
        prof.x.push(l as f64);
        prof.mean.push(0.0);
        prof.stderr.push(0.0);
        out.tables.push(prof);
    }
    if cfg.ensemble.compare_lindblad && model.kind().is_some() {
        let states = lindblad_series(&model, &init, &grid)?;
        out.tables.push(states_table("lindblad_ln", &times, &states, |s| log_negativity(s, &p))?);
        out.final_state = states.last().cloned();
    }
    if cfg.ensemble.postselected {
        let states = postselected_series(&model, &init, &grid)?;
        out.tables.push(states_table("postselected_ln", &times, &states, |s| log_negativity(s, &p))?);
        out.tables.push(states_table("postselected_ee", &times, &states, |s| entanglement_entropy(s, &p))?);
    }
    records_to_rows(&ens.records, &names, &mut out.rows);
    Ok(out)
}

pub fn circuit_schedule(cfg: &ExperimentConfig) -> RunResult<CircuitSchedule> {
    let m = &cfg.model;
    let c = &cfg.circuit;
    let l = m.l;
    let seed = cfg.ensemble.seed;
    let (j, mu) = (m.j_over_delta, m.mu_over_delta);
    let mut schedule = match c.setup {
        CircuitSetup::KitaevUniform => {
            kitaev_uniform_schedule(l, mu, j, 1.0, c.e_max_over_j * j.abs(), c.measure_probability, c.layers, seed)?
        }
        CircuitSetup::KitaevExponential => {
            kitaev_exponential_schedule(l, mu, j, 1.0, m.gamma_over_delta, c.layers, seed)?
        }
        CircuitSetup::RandomEnsemble => CircuitSchedule {
            n_layers: c.layers,
            unitary: UnitarySource::RandomEnsemble { scale: c.ensemble_scale },
            measure_probability: c.measure_probability,
            dissipation: Vec::new(),
            seed,
        },
    };
    if let (Some(name), UnitarySource::Model { tau, .. }) = (c.tau, &mut schedule.unitary) {
        let max = 2.0 * std::f64::consts::PI * l as f64 / (c.e_max_over_j * j.abs());
        let rate = l as f64 * m.gamma_over_delta;
        *tau = match name {
            TauName::Uniform => TauDistribution::Uniform { max },
            TauName::Exponential => TauDistribution::Exponential { rate },
            TauName::TruncatedExponential => TauDistribution::TruncatedExponential { rate, max },
        };
    }
    if c.dissipate_all {
        schedule.dissipation = (0..l).map(|k| DressedMode::bare(k, l)).collect::<fgsim_core::Result<_>>()?;
    }
    schedule.validate(l)?;
    Ok(schedule)
}

fn run_circuits(cfg: &ExperimentConfig, workers: usize) -> RunResult<RunOutput> {
    let schedule = circuit_schedule(cfg)?;
    let init = initial_state(&cfg.model)?;
    let p = partition(cfg)?;
    let names = vec!["ee".to_string(), "ln".to_string(), "n_total".to_string()];
    let observables = vec![
        Observable::EntanglementEntropy(p.clone()),
        Observable::LogNegativity(p.clone()),
        Observable::TotalOccupation,
    ];
    let times: Vec<f64> = (0..=schedule.n_layers).map(|k| k as f64).collect();
    let spec = EnsembleSpec {
        n_samples: cfg.ensemble.samples,
        times: times.clone(),
        n_observables: observables.len(),
        track_covariance: false,
        keep_records: cfg.ensemble.per_trajectory,
    };
    let ens = run_ensemble(&spec, workers, |i| run_circuit(&schedule, &init, &observables, i))?;
    let acc = &ens.accumulator;
    let mut out = RunOutput::default();
    for (k, name) in names.iter().enumerate() {
        out.tables.push(SeriesTable::time_series(name.clone(), times.clone(), acc.mean(k), acc.stderr(k), acc.n_samples()));
    }
    records_to_rows(&ens.records, &names, &mut out.rows);
    Ok(out)
}

fn random_complex_antisym<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i + 1..m {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            a[(i, j)] = z;
            a[(j, i)] = -z;
        }
    }
    a
}

/// Identity checks against the dense oracle and the Grassmann expansion.
pub fn oracle_rows(max_modes: usize, cases: usize, seed: u64) -> RunResult<Vec<OracleRow>> {
    let mut rows = Vec::new();
    for n in 1..=max_modes {
        let r = operation_sweep(n, cases, 8, seed.wrapping_add(n as u64))?;
        rows.push(OracleRow {
            check: "operation_sweep".into(),
            n_modes: n,
            cases,
            max_error: r.max_covariance_error.max(r.max_weight_error),
            tolerance: SWEEP_TOL,
        });
    }
    let mut rng = sample_rng(seed, 1 << 32);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.random_range(1..=max_modes.max(1));
        let s = CovarianceState::random_mixed(n, &mut rng)?;
        let b = DressedMode::random(n, &mut rng)?;
        let p0 = measure_dressed(&s, &b, Occupation::Empty)?.weight;
        let p1 = measure_dressed(&s, &b, Occupation::Occupied)?.weight;
        worst = worst.max((p0 + p1 - 1.0).abs());
    }
    rows.push(OracleRow {
        check: "measurement_normalization".into(),
        n_modes: max_modes,
        cases,
        max_error: worst,
        tolerance: NORMALIZATION_TOL,
    });
    if max_modes >= 2 {
        let c = negativity_calibration(max_modes.min(5), cases, seed)?;
        let ln2 = std::f64::consts::LN_2;
        let err = c.max_error.max((c.bell_pair - ln2).abs()).max((c.bell_pair_exact - ln2).abs());
        rows.push(OracleRow {
            check: "negativity_calibration".into(),
            n_modes: max_modes.min(5),
            cases,
            max_error: err,
            tolerance: NEGATIVITY_TOL,
        });
    }
    for half in 1..=3 {
        let m = 2 * half;
        let mut worst = 0.0f64;
        for _ in 0..cases {
            let a = random_complex_antisym(m, &mut rng);
            worst = worst.max(gaussian_integral_check(&a, false)?.difference);
            worst = worst.max(gaussian_integral_check(&a, true)?.difference);
        }
        rows.push(OracleRow {
            check: "grassmann_gaussian_integral".into(),
            n_modes: half,
            cases,
            max_error: worst,
            tolerance: GRASSMANN_TOL,
        });
    }
    Ok(rows)
}

/// Runs the experiment without touching the file system.
pub fn execute(cfg: &ExperimentConfig, workers: usize) -> RunResult<RunOutput> {
    match cfg.experiment {
        ExperimentKind::LindbladDirect => run_lindblad(cfg),
        ExperimentKind::Trajectories | ExperimentKind::Monitor => run_trajectories(cfg, workers),
        ExperimentKind::Circuit => run_circuits(cfg, workers),
        ExperimentKind::OracleCheck => Ok(RunOutput {
            oracle: oracle_rows(cfg.oracle.max_modes, cfg.oracle.cases, cfg.ensemble.seed)?,
            ..Default::default()
        }),
    }
}

/// Runs the experiment and writes all artifacts into `cfg.output.dir`.
/// A failed oracle check still writes its report before returning an error.
pub fn run(cfg: &ExperimentConfig, workers: usize) -> RunResult<Manifest> {
    let start = Instant::now();
    let out = execute(cfg, workers)?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let mut files = Vec::new();
    for t in &out.tables {
        t.write(dir)?;
        files.push(t.file_name());
    }
    if cfg.ensemble.per_trajectory && !out.rows.is_empty() {
        write_trajectory_rows(dir, &out.rows)?;
        files.push(crate::output::TRAJECTORY_FILE.to_string());
    }
    if !out.oracle.is_empty() {
        write_oracle_rows(dir, &out.oracle)?;
        files.push("oracle_report.csv".to_string());
    }
    if let Some(s) = &out.final_state {
        StateSnapshot::from_state(s).save(&dir.join(SNAPSHOT_FILE))?;
        files.push(SNAPSHOT_FILE.to_string());
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: cfg.experiment.as_str().to_string(),
        seed: cfg.ensemble.seed,
        workers,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        tables: files,
        warnings: out.warnings.clone(),
        schemas: Schemas::default(),
        config: cfg.clone(),
    };
    manifest.save(dir)?;
    let failed: Vec<String> = out
        .oracle
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{} (n = {}): {:e} > {:e}", r.check, r.n_modes, r.max_error, r.tolerance))
        .collect();
    if !failed.is_empty() {
        return Err(RunError::OracleFailure(failed.join("; ")));
    }
    Ok(manifest)
}
