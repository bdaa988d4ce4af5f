//! Random Gaussian circuits: unitary layers alternating with measurement and
//! dissipation layers.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::dynamics::evolve_unitary;
use crate::error::{invalid, Result};
use crate::matkit::AntisymMatrix;
use crate::models::{kitaev_chain, to_majorana};
use crate::seed::{derive_seed, sample_rng};
use crate::state::CovarianceState;
use crate::superop::{dissipate, measure_bare, DressedMode, Occupation};
use crate::trajectory::{Observable, TrajectoryRecord};

/// Distribution of the interaction time of a model-generated layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TauDistribution {
    Uniform { max: f64 },
    Exponential { rate: f64 },
    /// Exponential with the given rate, conditioned on `τ ≤ max`.
    TruncatedExponential { rate: f64, max: f64 },
}

impl TauDistribution {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            TauDistribution::Uniform { max } => max > 0.0 && max.is_finite(),
            TauDistribution::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            TauDistribution::TruncatedExponential { rate, max } => {
                rate > 0.0 && rate.is_finite() && max > 0.0 && max.is_finite()
            }
        };
        if !ok {
            return Err(invalid!("invalid interaction-time distribution {self:?}"));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            TauDistribution::Uniform { max } => rng.random_range(0.0..max),
            TauDistribution::Exponential { rate } => Exp::new(rate).map(|d| d.sample(rng)).unwrap_or(0.0),
            TauDistribution::TruncatedExponential { rate, max } => {
                // Inverse CDF of the truncated law.
                let u: f64 = rng.random();
                let z = 1.0 - libm::exp(-rate * max);
                -libm::log1p(-u * z) / rate
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            TauDistribution::Uniform { max } => 0.5 * max,
            TauDistribution::Exponential { rate } => 1.0 / rate,
            TauDistribution::TruncatedExponential { rate, max } => {
                let e = libm::exp(-rate * max);
                1.0 / rate - max * e / (1.0 - e)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum UnitarySource {
    /// `exp(−iτĤ)` with `τ` drawn per layer.
    Model { h: AntisymMatrix, tau: TauDistribution },
    /// A fresh generator from [`random_antisym_generator`] per layer, applied for unit time.
    RandomEnsemble { scale: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitSchedule {
    pub n_layers: usize,
    pub unitary: UnitarySource,
    /// Probability that each bare mode is measured in a layer.
    pub measure_probability: f64,
    /// Modes dissipated (`ρ ↦ bρb†`) once per layer, after the measurements.
    pub dissipation: Vec<DressedMode>,
    pub seed: u64,
}

impl CircuitSchedule {
    pub fn validate(&self, n_modes: usize) -> Result<()> {
        let p = self.measure_probability;
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid!("measurement probability must lie in [0, 1], got {p}"));
        }
        match &self.unitary {
            UnitarySource::Model { h, tau } => {
                if h.dim() != 2 * n_modes {
                    return Err(invalid!("layer Hamiltonian is {0}x{0}, expected {1}", h.dim(), 2 * n_modes));
                }
                tau.validate()?;
            }
            UnitarySource::RandomEnsemble { scale } => {
                if !(*scale > 0.0) || !scale.is_finite() {
                    return Err(invalid!("ensemble scale must be positive, got {scale}"));
                }
            }
        }
        if let Some(m) = self.dissipation.iter().find(|m| m.n_modes() != n_modes) {
            return Err(invalid!("dissipated mode acts on {} modes, circuit has {n_modes}", m.n_modes()));
        }
        Ok(())
    }
}

/// Kitaev-chain layers with `τ` uniform on `[0, 2πL/E_max]`.
pub fn kitaev_uniform_schedule(
    l: usize,
    mu: f64,
    j: f64,
    delta: f64,
    e_max: f64,
    p: f64,
    n_layers: usize,
    seed: u64,
) -> Result<CircuitSchedule> {
    if !(e_max > 0.0) {
        return Err(invalid!("E_max must be positive, got {e_max}"));
    }
    let (h, _) = to_majorana(&kitaev_chain(l, mu, j, delta)?)?;
    let max = 2.0 * core::f64::consts::PI * l as f64 / e_max;
    Ok(CircuitSchedule {
        n_layers,
        unitary: UnitarySource::Model { h, tau: TauDistribution::Uniform { max } },
        measure_probability: p,
        dissipation: Vec::new(),
        seed,
    })
}

/// Kitaev-chain layers with `P(τ) ∝ exp(−Lγτ)` and `p = 1/L`.
pub fn kitaev_exponential_schedule(
    l: usize,
    mu: f64,
    j: f64,
    delta: f64,
    gamma: f64,
    n_layers: usize,
    seed: u64,
) -> Result<CircuitSchedule> {
    let (h, _) = to_majorana(&kitaev_chain(l, mu, j, delta)?)?;
    let tau = TauDistribution::Exponential { rate: l as f64 * gamma };
    tau.validate()?;
    Ok(CircuitSchedule {
        n_layers,
        unitary: UnitarySource::Model { h, tau },
        measure_probability: 1.0 / l as f64,
        dissipation: Vec::new(),
        seed,
    })
}

/// Antisymmetric `2n×2n` matrix with independent `N(0, scale²)` upper-triangle entries.
pub fn random_antisym_generator<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> AntisymMatrix {
    let dim = 2 * n;
    let mut m = nalgebra::DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i + 1..dim {
            let x: f64 = rng.sample(StandardNormal);
            m[(i, j)] = scale * x;
            m[(j, i)] = -scale * x;
        }
    }
    AntisymMatrix::project(m)
}

fn sample_measurement<R: Rng + ?Sized>(s: CovarianceState, k: usize, rng: &mut R) -> Result<CovarianceState> {
    let p1 = s.occupation(k);
    let u: f64 = rng.random();
    // Eigenstates of the measured mode are left untouched.
    if p1 <= 0.0 || p1 >= 1.0 {
        return Ok(s);
    }
    let outcome = if u < p1 { Occupation::Occupied } else { Occupation::Empty };
    let out = measure_bare(&s, k, outcome)?;
    Ok(out.state.map(CovarianceState::normalized).unwrap_or(s))
}

/// Runs realization `sample_index` of the circuit. Observables are recorded
/// before the first layer and after each layer; `times` holds layer indices.
pub fn run_circuit(
    schedule: &CircuitSchedule,
    init: &CovarianceState,
    observables: &[Observable],
    sample_index: u64,
) -> Result<TrajectoryRecord> {
    let n = init.n_modes();
    schedule.validate(n)?;
    let mut rng = sample_rng(schedule.seed, sample_index);
    let mut state = init.clone().normalized();
    let mut series: Vec<Vec<f64>> = observables.iter().map(|_| Vec::with_capacity(schedule.n_layers + 1)).collect();
    let record = |s: &CovarianceState, series: &mut Vec<Vec<f64>>| -> Result<()> {
        for (obs, out) in observables.iter().zip(series.iter_mut()) {
            out.push(obs.evaluate(s)?);
        }
        Ok(())
    };
    record(&state, &mut series)?;
    let mut events = 0;
    for _ in 0..schedule.n_layers {
        state = match &schedule.unitary {
            UnitarySource::Model { h, tau } => {
                let t = tau.sample(&mut rng);
                evolve_unitary(&state, h, t)?
            }
            UnitarySource::RandomEnsemble { scale } => {
                let h = random_antisym_generator(n, *scale, &mut rng);
                evolve_unitary(&state, &h, 1.0)?
            }
        };
        for k in 0..n {
            if rng.random::<f64>() < schedule.measure_probability {
                state = sample_measurement(state, k, &mut rng)?;
                events += 1;
            }
        }
        for mode in &schedule.dissipation {
            // An empty mode annihilates the state; that branch carries no weight and is skipped.
            if let Some(next) = dissipate(&state, mode)?.state {
                state = next.normalized();
                events += 1;
            }
        }
        record(&state, &mut series)?;
    }
    Ok(TrajectoryRecord {
        seed: derive_seed(schedule.seed, sample_index),
        sample_index,
        times: (0..=schedule.n_layers).map(|l| l as f64).collect(),
        series,
        covariances: None,
        jumps: events,
    })
}
