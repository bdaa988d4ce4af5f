//! Quantum-trajectory unraveling of a Lindblad model and ensemble reducers.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;

use crate::dynamics::{check_stability, JumpKind, LindbladModel, NonHermitianPropagator};
use crate::entanglement::{entanglement_entropy, log_negativity, log_negativity_from_covariance, Bipartition};
use crate::error::{dim_err, invalid, Error, Result};
use crate::matkit::{self, AntisymMatrix};
use crate::seed::{derive_seed, sample_rng};
use crate::state::CovarianceState;
use crate::superop::{dissipate, measure_dressed, Occupation};

/// Occupations below this are treated as zero jump probability; the
/// conditional state would be numerically meaningless.
pub const MIN_JUMP_OCCUPATION: f64 = 5e-7;
/// `dt·max γ` above which the first-order unraveling is considered coarse.
pub const COARSE_STEP: f64 = 0.1;
/// Number of groups used by the jackknife error of nonlinear ensemble estimators.
pub const JACKKNIFE_GROUPS: usize = 25;

const SPECTRAL_CHECK_INTERVAL: usize = 64;
const PURE_START_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    EntanglementEntropy(Bipartition),
    /// Logarithmic negativity of the individual trajectory state.
    LogNegativity(Bipartition),
    Occupation(usize),
    TotalOccupation,
    /// `max |V Vᵀ − I|`.
    PurityDefect,
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::EntanglementEntropy(p) => alloc::format!("ee_{}", p.modes().len()),
            Observable::LogNegativity(p) => alloc::format!("ln_{}", p.modes().len()),
            Observable::Occupation(k) => alloc::format!("n_{k}"),
            Observable::TotalOccupation => "n_total".into(),
            Observable::PurityDefect => "purity_defect".into(),
        }
    }

    pub fn evaluate(&self, s: &CovarianceState) -> Result<f64> {
        match self {
            Observable::EntanglementEntropy(p) => entanglement_entropy(s, p),
            Observable::LogNegativity(p) => log_negativity(s, p),
            Observable::Occupation(k) => {
                if *k >= s.n_modes() {
                    return Err(invalid!("mode {k} out of range for {} modes", s.n_modes()));
                }
                Ok(s.occupation(*k))
            }
            Observable::TotalOccupation => Ok(s.total_occupation()),
            Observable::PurityDefect => Ok(s.check_physical().purity_defect),
        }
    }
}

/// Uniform grid `0, dt, …, steps·dt`, recorded every `record_every` steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, dt: f64, record_every: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid!("time step must be positive, got {dt}"));
        }
        if !(t_max >= 0.0) || !t_max.is_finite() {
            return Err(invalid!("t_max must be non-negative, got {t_max}"));
        }
        if record_every == 0 {
            return Err(invalid!("record_every must be at least 1"));
        }
        let steps = libm::round(t_max / dt) as usize;
        Ok(Self { dt, steps, record_every })
    }

    pub fn t_max(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn is_recorded(&self, step: usize) -> bool {
        step % self.record_every == 0 || step == self.steps
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps)
            .filter(|&s| self.is_recorded(s))
            .map(|s| s as f64 * self.dt)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepEvent {
    NoJump,
    Jump(usize),
}

/// Precomputed data for repeated steps of one model.
#[derive(Clone, Debug)]
pub struct TrajectoryStepper<'a> {
    model: &'a LindbladModel,
    propagator: NonHermitianPropagator,
    dt: f64,
    steps_taken: usize,
    /// Set from the first state seen; pure trajectories are re-purified after each step.
    pure: Option<bool>,
}

impl<'a> TrajectoryStepper<'a> {
    pub fn new(model: &'a LindbladModel, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid!("time step must be positive, got {dt}"));
        }
        Ok(Self {
            model,
            propagator: NonHermitianPropagator::new(&model.no_jump_generator(), dt)?,
            dt,
            steps_taken: 0,
            pure: None,
        })
    }

    /// `dt·max γ` when it exceeds [`COARSE_STEP`].
    pub fn coarse_step(&self) -> Option<f64> {
        let g = self.model.jumps().iter().map(|j| j.rate).fold(0.0, f64::max) * self.dt;
        (g > COARSE_STEP).then_some(g)
    }

    /// Jump probabilities `p_μ = dt γ_μ ⟨b_μ†b_μ⟩`.
    pub fn probabilities(&self, s: &CovarianceState) -> Result<Vec<f64>> {
        if s.dim() != self.model.dim() {
            return Err(dim_err!("model has {} Majoranas, state has {}", self.model.dim(), s.dim()));
        }
        let mut out = Vec::with_capacity(self.model.jumps().len());
        for j in self.model.jumps() {
            let occ = s.occupation_of_mode(&j.mode)?;
            out.push(if occ < MIN_JUMP_OCCUPATION { 0.0 } else { self.dt * j.rate * occ });
        }
        let total: f64 = out.iter().sum();
        if total > 1.0 {
            return Err(Error::StepSize { total });
        }
        Ok(out)
    }

    /// Draws one event and returns the normalized post-event state.
    pub fn step<R: Rng + ?Sized>(&mut self, s: &CovarianceState, rng: &mut R) -> Result<(CovarianceState, StepEvent)> {
        let probs = self.probabilities(s)?;
        let pure = *self.pure.get_or_insert_with(|| purity_defect(s.covariance()) <= PURE_START_TOL);
        self.steps_taken += 1;
        let r: f64 = rng.random();
        let mut acc = 0.0;
        for (mu, p) in probs.iter().enumerate() {
            acc += p;
            if r < acc {
                let jump = &self.model.jumps()[mu];
                let out = match jump.kind {
                    JumpKind::Dissipative => dissipate(s, &jump.mode)?,
                    JumpKind::Projective => measure_dressed(s, &jump.mode, Occupation::Occupied)?,
                };
                let next = out.state.ok_or_else(|| {
                    invalid!("jump {mu} selected on a zero-probability branch")
                })?;
                return Ok((finish(next, pure), StepEvent::Jump(mu)));
            }
        }
        let next = self.propagator.apply(s)?;
        let full = self.steps_taken % SPECTRAL_CHECK_INTERVAL == 0;
        check_stability(next.covariance(), self.steps_taken, full)?;
        Ok((finish(next, pure), StepEvent::NoJump))
    }

    /// Weight of the no-jump branch after one step, `p₀ = ‖F₀ψ‖²`.
    pub fn no_jump_probability(&self, s: &CovarianceState) -> Result<f64> {
        let out = self.propagator.apply(&s.clone().normalized())?;
        Ok(out.weight())
    }
}

fn purity_defect(v: &DMatrix<f64>) -> f64 {
    let mut g = v * v;
    for i in 0..g.nrows() {
        g[(i, i)] += 1.0;
    }
    matkit::max_abs(&g)
}

fn finish(s: CovarianceState, pure: bool) -> CovarianceState {
    let s = s.normalized();
    if !pure {
        return s;
    }
    let v = matkit::purify_antisym(s.covariance());
    CovarianceState::from_parts(AntisymMatrix::project(v), 0.0)
}

/// One stochastic step of the unraveled master equation.
pub fn trajectory_step<R: Rng + ?Sized>(
    s: &CovarianceState,
    model: &LindbladModel,
    dt: f64,
    rng: &mut R,
) -> Result<(CovarianceState, StepEvent)> {
    TrajectoryStepper::new(model, dt)?.step(s, rng)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub sample_index: u64,
    pub times: Vec<f64>,
    /// `series[k][t]` is observable `k` at recorded time `t`.
    pub series: Vec<Vec<f64>>,
    /// Covariance at each recorded time, when requested.
    pub covariances: Option<Vec<DMatrix<f64>>>,
    pub jumps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryOptions {
    pub observables: Vec<Observable>,
    pub keep_covariances: bool,
}

/// Runs sample `sample_index` of the ensemble seeded by `seed`.
pub fn simulate_trajectory(
    model: &LindbladModel,
    init: &CovarianceState,
    grid: &TimeGrid,
    options: &TrajectoryOptions,
    seed: u64,
    sample_index: u64,
) -> Result<TrajectoryRecord> {
    let mut rng = sample_rng(seed, sample_index);
    let mut stepper = TrajectoryStepper::new(model, grid.dt)?;
    let mut state = init.clone().normalized();
    let n_rec = grid.times().len();
    let mut series: Vec<Vec<f64>> = options.observables.iter().map(|_| Vec::with_capacity(n_rec)).collect();
    let mut covs = options.keep_covariances.then(|| Vec::with_capacity(n_rec));
    let mut jumps = 0;
    for step in 0..=grid.steps {
        if step > 0 {
            let (next, event) = stepper.step(&state, &mut rng)?;
            if event != StepEvent::NoJump {
                jumps += 1;
            }
            state = next;
        }
        if grid.is_recorded(step) {
            for (obs, out) in options.observables.iter().zip(series.iter_mut()) {
                out.push(obs.evaluate(&state)?);
            }
            if let Some(c) = covs.as_mut() {
                c.push(state.covariance().clone());
            }
        }
    }
    Ok(TrajectoryRecord {
        seed: derive_seed(seed, sample_index),
        sample_index,
        times: grid.times(),
        series,
        covariances: covs,
        jumps,
    })
}

/// Mean and standard error of each observable at each recorded time, plus
/// the ensemble-averaged covariance used for mixed-state quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleAccumulator {
    times: Vec<f64>,
    n: usize,
    sum: Vec<Vec<f64>>,
    sum_sq: Vec<Vec<f64>>,
    /// `group_cov[g][t]`: summed covariance of group `g`.
    group_cov: Option<Vec<Vec<DMatrix<f64>>>>,
    group_n: Vec<usize>,
}

impl EnsembleAccumulator {
    pub fn new(times: Vec<f64>, n_observables: usize, track_covariance: bool) -> Self {
        let nt = times.len();
        Self {
            n: 0,
            sum: alloc::vec![alloc::vec![0.0; nt]; n_observables],
            sum_sq: alloc::vec![alloc::vec![0.0; nt]; n_observables],
            group_cov: track_covariance.then(|| alloc::vec![Vec::new(); JACKKNIFE_GROUPS]),
            group_n: alloc::vec![0; JACKKNIFE_GROUPS],
            times,
        }
    }

    pub fn add(&mut self, rec: &TrajectoryRecord) -> Result<()> {
        if rec.times.len() != self.times.len() || rec.series.len() != self.sum.len() {
            return Err(dim_err!("record shape does not match the accumulator"));
        }
        for (k, s) in rec.series.iter().enumerate() {
            for (t, x) in s.iter().enumerate() {
                self.sum[k][t] += x;
                self.sum_sq[k][t] += x * x;
            }
        }
        let g = (rec.sample_index % JACKKNIFE_GROUPS as u64) as usize;
        if let Some(groups) = self.group_cov.as_mut() {
            let covs = rec
                .covariances
                .as_ref()
                .ok_or_else(|| invalid!("record {} carries no covariances", rec.sample_index))?;
            if groups[g].is_empty() {
                groups[g] = covs.clone();
            } else {
                for (acc, v) in groups[g].iter_mut().zip(covs) {
                    *acc += v;
                }
            }
        }
        self.group_n[g] += 1;
        self.n += 1;
        Ok(())
    }

    /// Combines two accumulators; the result does not depend on the order.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if other.times != self.times || other.sum.len() != self.sum.len() {
            return Err(dim_err!("accumulator shapes differ"));
        }
        for k in 0..self.sum.len() {
            for t in 0..self.times.len() {
                self.sum[k][t] += other.sum[k][t];
                self.sum_sq[k][t] += other.sum_sq[k][t];
            }
        }
        if let (Some(a), Some(b)) = (self.group_cov.as_mut(), other.group_cov.as_ref()) {
            for (ga, gb) in a.iter_mut().zip(b) {
                if ga.is_empty() {
                    *ga = gb.clone();
                } else if !gb.is_empty() {
                    for (x, y) in ga.iter_mut().zip(gb) {
                        *x += y;
                    }
                }
            }
        }
        for (a, b) in self.group_n.iter_mut().zip(&other.group_n) {
            *a += b;
        }
        self.n += other.n;
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn mean(&self, k: usize) -> Vec<f64> {
        let n = self.n.max(1) as f64;
        self.sum[k].iter().map(|s| s / n).collect()
    }

    /// Standard error of the mean, `sd / √n`.
    pub fn stderr(&self, k: usize) -> Vec<f64> {
        let n = self.n as f64;
        if self.n < 2 {
            return alloc::vec![f64::NAN; self.times.len()];
        }
        self.sum[k]
            .iter()
            .zip(&self.sum_sq[k])
            .map(|(s, q)| {
                let mean = s / n;
                let var = ((q / n - mean * mean) * n / (n - 1.0)).max(0.0);
                libm::sqrt(var / n)
            })
            .collect()
    }

    /// Ensemble-averaged covariance at recorded time index `t`.
    pub fn mean_covariance(&self, t: usize) -> Result<DMatrix<f64>> {
        let groups = self.group_cov.as_ref().ok_or_else(|| invalid!("covariances were not tracked"))?;
        let mut total: Option<DMatrix<f64>> = None;
        for g in groups.iter().filter(|g| !g.is_empty()) {
            total = Some(match total {
                None => g[t].clone(),
                Some(acc) => acc + &g[t],
            });
        }
        let total = total.ok_or_else(|| invalid!("empty ensemble"))?;
        Ok(total / self.n as f64)
    }

    /// `f(V̄)` at each recorded time with a grouped jackknife standard error.
    pub fn mixed_estimate<F>(&self, mut f: F) -> Result<(Vec<f64>, Vec<f64>)>
    where
        F: FnMut(&DMatrix<f64>) -> Result<f64>,
    {
        let groups = self.group_cov.as_ref().ok_or_else(|| invalid!("covariances were not tracked"))?;
        let live: Vec<usize> = (0..JACKKNIFE_GROUPS).filter(|&g| self.group_n[g] > 0).collect();
        let mut values = Vec::with_capacity(self.times.len());
        let mut errors = Vec::with_capacity(self.times.len());
        for t in 0..self.times.len() {
            let mean = self.mean_covariance(t)?;
            values.push(f(&mean)?);
            if live.len() < 2 {
                errors.push(f64::NAN);
                continue;
            }
            let total = &mean * self.n as f64;
            let mut loo = Vec::with_capacity(live.len());
            for &g in &live {
                let rest = (&total - &groups[g][t]) / (self.n - self.group_n[g]) as f64;
                loo.push(f(&rest)?);
            }
            let m = live.len() as f64;
            let avg = loo.iter().sum::<f64>() / m;
            let var = loo.iter().map(|x| (x - avg) * (x - avg)).sum::<f64>() * (m - 1.0) / m;
            errors.push(libm::sqrt(var));
        }
        Ok((values, errors))
    }

    /// Mixed-state logarithmic negativity of the ensemble-averaged state.
    pub fn mixed_log_negativity(&self, p: &Bipartition) -> Result<(Vec<f64>, Vec<f64>)> {
        self.mixed_estimate(|v| log_negativity_from_covariance(v, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_nonhermitian, lindblad_covariance_dissipative, monitoring_model, Jump};
    use crate::models::{hatano_nelson_dissipative, hatano_nelson_projective};
    use crate::superop::DressedMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_model(n: usize, kind: JumpKind, rng: &mut ChaCha8Rng) -> LindbladModel {
        let h = matkit::random_antisym(2 * n, 1.0, rng);
        let jumps = (0..3)
            .map(|_| Jump {
                rate: rng.random_range(0.2..1.0),
                mode: DressedMode::random(n, rng).unwrap(),
                kind,
            })
            .collect();
        LindbladModel::new(h, jumps).unwrap()
    }

    #[test]
    fn probabilities_sum_to_one_to_second_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in [JumpKind::Dissipative, JumpKind::Projective] {
            let m = random_model(3, kind, &mut rng);
            let s = CovarianceState::random_pure(3, &mut rng).unwrap();
            let mut defects = Vec::new();
            for dt in [0.02, 0.01] {
                let st = TrajectoryStepper::new(&m, dt).unwrap();
                let total: f64 = st.probabilities(&s).unwrap().iter().sum::<f64>() + st.no_jump_probability(&s).unwrap();
                defects.push((total - 1.0).abs());
            }
            assert!(defects[0] < 1e-3);
            assert!(defects[1] < defects[0] / 3.0, "{defects:?}");
        }
    }

    #[test]
    fn no_jump_branch_is_the_nonhermitian_step() {
        let m = hatano_nelson_dissipative(4, 1.0, 0.3).unwrap();
        let s = CovarianceState::neel(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (next, event) = trajectory_step(&s, &m, 0.01, &mut rng).unwrap();
        assert_eq!(event, StepEvent::NoJump);
        let exact = NonHermitianPropagator::new(&m.no_jump_generator(), 0.01).unwrap().apply(&s).unwrap();
        assert_eq!(next.covariance(), &matkit::purify_antisym(exact.normalized().covariance()));
        let rk4 = evolve_nonhermitian(&s, &m.no_jump_generator(), 0.01, 0.001).unwrap();
        assert!(matkit::max_abs_diff(next.covariance(), rk4.covariance()) < 1e-10);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let b = DressedMode::bare(0, 1).unwrap();
        let m = LindbladModel::new(
            AntisymMatrix::zeros(2),
            alloc::vec![Jump { rate: 50.0, mode: b, kind: JumpKind::Dissipative }],
        )
        .unwrap();
        let s = CovarianceState::filled(1).unwrap();
        let st = TrajectoryStepper::new(&m, 0.1).unwrap();
        assert!(st.coarse_step().is_some());
        assert!(matches!(st.probabilities(&s), Err(Error::StepSize { .. })));
    }

    #[test]
    fn monitoring_probabilities_sum_to_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = DressedMode::random(2, &mut rng).unwrap();
        let m = monitoring_model(AntisymMatrix::zeros(4), &[(0.7, b)]).unwrap();
        let s = CovarianceState::random_pure(2, &mut rng).unwrap();
        let st = TrajectoryStepper::new(&m, 0.01).unwrap();
        let p: f64 = st.probabilities(&s).unwrap().iter().sum();
        assert!((p - 0.007).abs() < 1e-12);
    }

    #[test]
    fn trajectories_stay_pure_and_are_reproducible() {
        let m = hatano_nelson_projective(4, 1.0, 0.5).unwrap();
        let init = CovarianceState::neel(4).unwrap();
        let grid = TimeGrid::new(20.0, 0.02, 100).unwrap();
        let opts = TrajectoryOptions { observables: alloc::vec![Observable::TotalOccupation], keep_covariances: true };
        let a = simulate_trajectory(&m, &init, &grid, &opts, 9, 4).unwrap();
        let b = simulate_trajectory(&m, &init, &grid, &opts, 9, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.jumps > 0);
        for v in a.covariances.as_ref().unwrap() {
            let s = CovarianceState::from_parts(AntisymMatrix::project(v.clone()), 0.0);
            assert!(s.check_physical().purity_defect < 1e-7);
        }
        // Number-conserving jumps and hopping keep the particle count.
        for x in &a.series[0] {
            assert!((x - 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn long_dissipative_trajectory_stays_pure() {
        let m = hatano_nelson_dissipative(3, 1.0, 0.5).unwrap();
        let init = CovarianceState::neel(3).unwrap();
        let grid = TimeGrid::new(200.0, 0.02, 10_000).unwrap();
        assert_eq!(grid.steps, 10_000);
        let opts = TrajectoryOptions { observables: Vec::new(), keep_covariances: true };
        let rec = simulate_trajectory(&m, &init, &grid, &opts, 1, 0).unwrap();
        let v = rec.covariances.unwrap().pop().unwrap();
        let s = CovarianceState::from_parts(AntisymMatrix::project(v), 0.0);
        assert!(s.check_physical().purity_defect < 1e-7);
    }

    #[test]
    fn time_grid_records_endpoints() {
        let g = TimeGrid::new(1.0, 0.1, 3).unwrap();
        assert_eq!(g.steps, 10);
        let t = g.times();
        assert_eq!(t.len(), 5);
        assert!((t[4] - 1.0).abs() < 1e-12);
        assert!(TimeGrid::new(1.0, 0.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 0.1, 0).is_err());
    }

    #[test]
    fn accumulator_merge_is_order_insensitive() {
        let m = hatano_nelson_dissipative(3, 1.0, 0.5).unwrap();
        let init = CovarianceState::neel(3).unwrap();
        let grid = TimeGrid::new(2.0, 0.02, 25).unwrap();
        let opts = TrajectoryOptions {
            observables: alloc::vec![Observable::Occupation(0)],
            keep_covariances: true,
        };
        let recs: Vec<_> = (0..6).map(|i| simulate_trajectory(&m, &init, &grid, &opts, 3, i).unwrap()).collect();
        let mut a = EnsembleAccumulator::new(grid.times(), 1, true);
        let mut b = EnsembleAccumulator::new(grid.times(), 1, true);
        let mut c = EnsembleAccumulator::new(grid.times(), 1, true);
        for r in &recs[..3] {
            a.add(r).unwrap();
        }
        for r in &recs[3..] {
            b.add(r).unwrap();
        }
        for r in recs.iter().rev() {
            c.add(r).unwrap();
        }
        a.merge(&b).unwrap();
        assert_eq!(a.n_samples(), 6);
        for (x, y) in a.mean(0).iter().zip(c.mean(0)) {
            assert!((x - y).abs() < 1e-14);
        }
        let last = grid.times().len() - 1;
        assert!(matkit::max_abs_diff(&a.mean_covariance(last).unwrap(), &c.mean_covariance(last).unwrap()) < 1e-14);
    }

    /// Monte-Carlo error of the averaged covariance shrinks like `1/√N`.
    #[test]
    fn ensemble_covariance_converges_to_lindblad() {
        let m = hatano_nelson_dissipative(3, 1.0, 0.5).unwrap();
        let init = CovarianceState::neel(3).unwrap();
        let t = 2.0;
        let grid = TimeGrid::new(t, 0.005, 400).unwrap();
        let exact = lindblad_covariance_dissipative(&init, &m, t, 0.005).unwrap();
        let opts = TrajectoryOptions { observables: Vec::new(), keep_covariances: true };
        let err_at = |seed: u64, n: u64| {
            let mut acc = EnsembleAccumulator::new(grid.times(), 0, true);
            for i in 0..n {
                acc.add(&simulate_trajectory(&m, &init, &grid, &opts, seed, i).unwrap()).unwrap();
            }
            let v = acc.mean_covariance(grid.times().len() - 1).unwrap();
            let d = v - exact.covariance();
            libm::sqrt(d.iter().map(|x| x * x).sum::<f64>())
        };
        // Average over independent seeds to tame the error-of-the-error.
        let small: f64 = (0..4).map(|s| err_at(100 + s, 100)).sum::<f64>() / 4.0;
        let large: f64 = (0..4).map(|s| err_at(200 + s, 400)).sum::<f64>() / 4.0;
        let ratio = small / large;
        assert!(ratio > 1.4 && ratio < 2.8, "ratio {ratio}");
    }
}
