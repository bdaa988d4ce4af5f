//! Randomized cross-checks of the covariance path against the dense oracle.

use alloc::vec::Vec;

use rand::Rng;

use super::{covariance_of, oracle_apply, DenseOp, DenseState};
use crate::dynamics::{evolve_nonhermitian, evolve_unitary, QuadraticGenerator};
use crate::entanglement::{log_negativity, Bipartition};
use crate::error::Result;
use crate::matkit::{self, AntisymMatrix};
use crate::seed::sample_rng;
use crate::state::CovarianceState;
use crate::superop::{dissipate, measure_bare, measure_dressed, DressedMode, Occupation};

/// Step used for the covariance-side non-Hermitian integration in sweeps.
pub const SWEEP_DT: f64 = 0.0025;

/// Kinds of operations drawn by [`operation_sweep`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepOp {
    Unitary,
    NonHermitian,
    BareMeasurement,
    DressedMeasurement,
    Dissipation,
}

impl SweepOp {
    pub const ALL: [SweepOp; 5] = [
        SweepOp::Unitary,
        SweepOp::NonHermitian,
        SweepOp::BareMeasurement,
        SweepOp::DressedMeasurement,
        SweepOp::Dissipation,
    ];
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub n_modes: usize,
    pub cases: usize,
    pub operations: usize,
    /// Largest `‖V_cov − V_dense‖_max` seen after any operation.
    pub max_covariance_error: f64,
    /// Largest `|P_cov − P_dense| / |P_dense|` seen after any operation.
    pub max_weight_error: f64,
}

impl SweepReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_covariance_error <= tol && self.max_weight_error <= tol
    }
}

fn pick_outcome<R: Rng + ?Sized>(p1: f64, rng: &mut R) -> Occupation {
    let mut outcome = if rng.random::<f64>() < p1 {
        Occupation::Occupied
    } else {
        Occupation::Empty
    };
    // Avoid branches too unlikely to compare meaningfully.
    let p = if outcome == Occupation::Occupied { p1 } else { 1.0 - p1 };
    if p < 1e-4 {
        outcome = if outcome == Occupation::Occupied {
            Occupation::Empty
        } else {
            Occupation::Occupied
        };
    }
    outcome
}

fn random_generator<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<QuadraticGenerator> {
    let h = matkit::random_antisym(2 * n, 1.0, rng);
    let mut gamma = nalgebra::DMatrix::zeros(2 * n, 2 * n);
    let mut gamma0 = 0.0;
    for _ in 0..2 {
        let rate: f64 = rng.random_range(0.2..1.0);
        let mode = DressedMode::random(n, rng)?;
        gamma += mode.number_generator() * (0.5 * rate);
        gamma0 += 0.25 * rate;
    }
    QuadraticGenerator::new(h, AntisymMatrix::project(gamma), gamma0)
}

/// Runs `cases` random sequences of `ops_per_case` operations on `n` modes.
pub fn operation_sweep(n: usize, cases: usize, ops_per_case: usize, seed: u64) -> Result<SweepReport> {
    let mut report = SweepReport {
        n_modes: n,
        cases,
        operations: 0,
        max_covariance_error: 0.0,
        max_weight_error: 0.0,
    };
    for case in 0..cases {
        let mut rng = sample_rng(seed, case as u64);
        let mut cov = if rng.random::<bool>() {
            CovarianceState::random_pure(n, &mut rng)?
        } else {
            CovarianceState::random_mixed(n, &mut rng)?
        };
        let mut dense = DenseState::from_covariance(&cov)?;
        for _ in 0..ops_per_case {
            let op = SweepOp::ALL[rng.random_range(0..SweepOp::ALL.len())];
            let next = match op {
                SweepOp::Unitary => {
                    let h = matkit::random_antisym(2 * n, 1.0, &mut rng);
                    let t: f64 = rng.random_range(0.0..1.0);
                    let c = evolve_unitary(&cov, &h, t)?;
                    let d = oracle_apply(&dense, &DenseOp::Unitary { h: &h, t })?;
                    Some((c, d))
                }
                SweepOp::NonHermitian => {
                    let g = random_generator(n, &mut rng)?;
                    let t: f64 = rng.random_range(0.0..0.5);
                    let c = evolve_nonhermitian(&cov, &g, t, SWEEP_DT)?;
                    let d = oracle_apply(&dense, &DenseOp::NonHermitian { g: &g, t })?;
                    Some((c, d))
                }
                SweepOp::BareMeasurement => {
                    let k = rng.random_range(0..n);
                    let outcome = pick_outcome(cov.occupation(k), &mut rng);
                    let mode = DressedMode::bare(k, n)?;
                    match measure_bare(&cov, k, outcome)?.state {
                        Some(c) => Some((c, oracle_apply(&dense, &DenseOp::Measure { mode: &mode, outcome })?)),
                        None => None,
                    }
                }
                SweepOp::DressedMeasurement => {
                    let mode = DressedMode::random(n, &mut rng)?;
                    let outcome = pick_outcome(cov.occupation_of_mode(&mode)?, &mut rng);
                    match measure_dressed(&cov, &mode, outcome)?.state {
                        Some(c) => Some((c, oracle_apply(&dense, &DenseOp::Measure { mode: &mode, outcome })?)),
                        None => None,
                    }
                }
                SweepOp::Dissipation => {
                    let mode = DressedMode::random(n, &mut rng)?;
                    if cov.occupation_of_mode(&mode)? < 1e-4 {
                        None
                    } else {
                        match dissipate(&cov, &mode)?.state {
                            Some(c) => Some((c, oracle_apply(&dense, &DenseOp::Dissipate { mode: &mode })?)),
                            None => None,
                        }
                    }
                }
            };
            let Some((c, d)) = next else { continue };
            let from_dense = covariance_of(&d)?;
            let verr = matkit::max_abs_diff(c.covariance(), from_dense.covariance());
            let pd = d.trace().norm();
            let werr = (c.weight() - pd).abs() / pd;
            report.max_covariance_error = report.max_covariance_error.max(verr);
            report.max_weight_error = report.max_weight_error.max(werr);
            report.operations += 1;
            cov = c;
            dense = d;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationReport {
    pub cases: usize,
    pub max_error: f64,
    /// Covariance-path value for the one-pair Bell state.
    pub bell_pair: f64,
    /// Dense-oracle value for the one-pair Bell state.
    pub bell_pair_exact: f64,
}

impl CalibrationReport {
    pub fn passed(&self, tol: f64) -> bool {
        let ln2 = core::f64::consts::LN_2;
        self.max_error <= tol
            && (self.bell_pair - ln2).abs() <= tol
            && (self.bell_pair_exact - ln2).abs() <= tol
    }
}

fn random_partition<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Bipartition> {
    loop {
        let modes: Vec<usize> = (0..n).filter(|_| rng.random::<bool>()).collect();
        if !modes.is_empty() && modes.len() < n {
            return Bipartition::new(&modes, n);
        }
    }
}

/// Compares the covariance-path logarithmic negativity with the trace norm of
/// the partially time-reversed density matrix on random pure and mixed states
/// with `2..=max_modes` modes.
pub fn negativity_calibration(max_modes: usize, cases: usize, seed: u64) -> Result<CalibrationReport> {
    let bell = CovarianceState::bell_pair(1)?;
    let bell_p = Bipartition::new(&[0], 2)?;
    let mut report = CalibrationReport {
        cases,
        max_error: 0.0,
        bell_pair: log_negativity(&bell, &bell_p)?,
        bell_pair_exact: super::log_negativity_exact(&DenseState::from_covariance(&bell)?, &bell_p)?,
    };
    let sizes: Vec<usize> = (2..=max_modes.max(2)).collect();
    for case in 0..cases {
        let mut rng = sample_rng(seed, case as u64);
        let n = sizes[case % sizes.len()];
        let s = if case % 2 == 0 {
            CovarianceState::random_pure(n, &mut rng)?
        } else {
            CovarianceState::random_mixed(n, &mut rng)?
        };
        let p = random_partition(n, &mut rng)?;
        let fast = log_negativity(&s, &p)?;
        let exact = super::log_negativity_exact(&DenseState::from_covariance(&s)?, &p)?;
        report.max_error = report.max_error.max((fast - exact).abs());
    }
    Ok(report)
}
