//! Covariance-matrix representation of fermionic Gaussian states.
//!
//! A state of `n` Dirac modes is described by a real antisymmetric `2n×2n`
//! covariance matrix `V` together with its trace `P`, stored as `ln|P|`.
//! Majorana operators are interleaved: Dirac mode `k` (0-based) is
//! `a_k = (c_{2k} + i c_{2k+1}) / 2`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{dim_err, invalid, Result};
use crate::matkit::{self, AntisymMatrix};
use crate::superop::DressedMode;

/// Tolerance on the physical-state condition `VᵀV ≤ I`.
pub const PHYSICAL_TOL: f64 = 1e-8;
/// Tolerance for the purity test `‖VVᵀ − I‖∞`.
pub const PURITY_TOL: f64 = 1e-8;
/// Slack allowed when clamping occupations into `[0, 1]`.
pub const OCCUPATION_SLACK: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Gaussian state `ρ[x] = (P / 2ⁿ) exp((i/2) xᵀ V x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceState {
    v: AntisymMatrix,
    log_weight: f64,
    /// Phase of `P` when known.
    phase: Option<Complex64>,
}

impl CovarianceState {
    /// Builds a normalized state after checking antisymmetry and `VᵀV ≤ I`.
    pub fn from_covariance(v: DMatrix<f64>) -> Result<Self> {
        let v = AntisymMatrix::new(v)?;
        let s = Self::from_parts(v, 0.0);
        let report = s.check_physical();
        if report.spectral_excess > PHYSICAL_TOL {
            return Err(invalid!(
                "covariance violates VᵀV ≤ I by {:e}",
                report.spectral_excess
            ));
        }
        Ok(s)
    }

    /// Assembles a state without the physicality check.
    pub fn from_parts(v: AntisymMatrix, log_weight: f64) -> Self {
        Self {
            v,
            log_weight,
            phase: Some(Complex64::new(1.0, 0.0)),
        }
    }

    pub(crate) fn with_phase(mut self, phase: Option<Complex64>) -> Self {
        self.phase = phase;
        self
    }

    pub fn n_modes(&self) -> usize {
        self.v.dim() / 2
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        self.v.as_matrix()
    }

    pub fn antisym(&self) -> &AntisymMatrix {
        &self.v
    }

    /// `ln|P|`.
    pub fn log_weight(&self) -> f64 {
        self.log_weight
    }

    /// `|P|`.
    pub fn weight(&self) -> f64 {
        libm::exp(self.log_weight)
    }

    pub fn weight_sign_valid(&self) -> bool {
        self.phase.is_some()
    }

    pub fn weight_phase(&self) -> Option<Complex64> {
        self.phase
    }

    pub fn is_normalized(&self) -> bool {
        self.log_weight == 0.0
    }

    pub fn normalized(mut self) -> Self {
        self.log_weight = 0.0;
        if self.phase.is_some() {
            self.phase = Some(Complex64::new(1.0, 0.0));
        }
        self
    }

    pub fn with_log_weight(mut self, log_weight: f64) -> Self {
        self.log_weight = log_weight;
        self
    }

    /// Vacuum of every mode: `V = ⊕ [[0, −1], [1, 0]]`.
    pub fn vacuum(n: usize) -> Result<Self> {
        Self::product(&alloc::vec![false; check_modes(n)?])
    }

    /// Every mode occupied: `V = ⊕ [[0, 1], [−1, 0]]`.
    pub fn filled(n: usize) -> Result<Self> {
        Self::product(&alloc::vec![true; check_modes(n)?])
    }

    /// `V = 0`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_modes(n)?;
        Ok(Self::from_parts(AntisymMatrix::zeros(2 * n), 0.0))
    }

    /// Product of occupation-number eigenstates.
    pub fn product(occupied: &[bool]) -> Result<Self> {
        let n = check_modes(occupied.len())?;
        let mut v = DMatrix::zeros(2 * n, 2 * n);
        for (k, &occ) in occupied.iter().enumerate() {
            let s = if occ { 1.0 } else { -1.0 };
            v[(2 * k, 2 * k + 1)] = s;
            v[(2 * k + 1, 2 * k)] = -s;
        }
        Ok(Self::from_parts(AntisymMatrix::project(v), 0.0))
    }

    /// Alternating occupation starting with an occupied first mode.
    pub fn neel(n: usize) -> Result<Self> {
        check_modes(n)?;
        let occ: Vec<bool> = (0..n).map(|k| k % 2 == 0).collect();
        Self::product(&occ)
    }

    /// Maximally entangled pure state `∏ (I + i c_j d_j) / 2^{2n}` on `2n`
    /// Dirac modes; the first `n` modes hold the `c` register.
    pub fn bell_pair(n: usize) -> Result<Self> {
        check_modes(n)?;
        let m = 2 * n;
        let mut v = DMatrix::zeros(2 * m, 2 * m);
        for j in 0..m {
            v[(j, m + j)] = 1.0;
            v[(m + j, j)] = -1.0;
        }
        Ok(Self::from_parts(AntisymMatrix::project(v), 0.0))
    }

    /// Haar-like random pure state `R V_vac Rᵀ`.
    pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let occ: Vec<bool> = (0..check_modes(n)?).map(|_| rng.random()).collect();
        let base = Self::product(&occ)?;
        let rot = random_orthogonal(2 * n, rng)?;
        let v = &rot * base.covariance() * rot.transpose();
        Ok(Self::from_parts(AntisymMatrix::project(v), 0.0))
    }

    /// Random mixed state with normal-mode eigenvalues drawn from `[-1, 1]`.
    pub fn random_mixed<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_modes(n)?;
        let mut v = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            let lam: f64 = rng.random_range(-1.0..1.0);
            v[(2 * k, 2 * k + 1)] = lam;
            v[(2 * k + 1, 2 * k)] = -lam;
        }
        let rot = random_orthogonal(2 * n, rng)?;
        let v = &rot * v * rot.transpose();
        Ok(Self::from_parts(AntisymMatrix::project(v), 0.0))
    }

    /// `C = I − iV`.
    pub fn correlation_matrix(&self) -> CorrelationMatrix {
        let dim = self.dim();
        let c = DMatrix::from_fn(dim, dim, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            Complex64::new(delta, -self.v.as_matrix()[(i, j)])
        });
        CorrelationMatrix(c)
    }

    /// `⟨c_{i₁} ⋯ c_{i₂ₖ}⟩ = i^{−k} Pf(V|_{i₁…i₂ₖ})` for distinct 0-based indices.
    pub fn correlator(&self, indices: &[usize]) -> Result<Complex64> {
        if indices.len() % 2 != 0 {
            return Err(invalid!("correlator needs an even number of indices"));
        }
        for (a, &i) in indices.iter().enumerate() {
            if i >= self.dim() {
                return Err(invalid!("Majorana index {i} out of range"));
            }
            if indices[..a].contains(&i) {
                return Err(invalid!("repeated Majorana index {i}"));
            }
        }
        if indices.is_empty() {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let k = indices.len() / 2;
        let sub = DMatrix::from_fn(indices.len(), indices.len(), |a, b| {
            self.covariance()[(indices[a], indices[b])]
        });
        let pf = matkit::pfaffian(&sub)?;
        // i^{-k} = (-i)^k
        let phase = (-I).powu(k as u32);
        Ok(phase * pf)
    }

    /// `⟨b†b⟩ = w†(I − iV)w`, clamped to `[0, 1]`.
    pub fn occupation_of_mode(&self, mode: &DressedMode) -> Result<f64> {
        if mode.dim() != self.dim() {
            return Err(dim_err!(
                "mode has {} components, state has {} Majoranas",
                mode.dim(),
                self.dim()
            ));
        }
        let occ = occupation_raw(self.covariance(), mode.coefficients());
        clamp_probability(occ)
    }

    /// Occupation of bare Dirac mode `k`: `(1 + V_{2k,2k+1}) / 2`.
    pub fn occupation(&self, k: usize) -> f64 {
        let v = self.covariance()[(2 * k, 2 * k + 1)];
        (0.5 * (1.0 + v)).clamp(0.0, 1.0)
    }

    pub fn total_occupation(&self) -> f64 {
        (0..self.n_modes()).map(|k| self.occupation(k)).sum()
    }

    pub fn check_physical(&self) -> PhysicalReport {
        let v = self.covariance();
        let sigma = matkit::spectral_norm(v);
        let dim = self.dim();
        let gram = v * v.transpose();
        let purity_defect = matkit::max_abs_diff(&gram, &DMatrix::identity(dim, dim));
        PhysicalReport {
            spectral_excess: (sigma * sigma - 1.0).max(0.0),
            antisymmetry_defect: matkit::antisymmetry_defect(v),
            purity_defect,
        }
    }

    pub fn is_pure(&self) -> bool {
        self.check_physical().purity_defect <= PURITY_TOL
    }
}

fn check_modes(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(invalid!("number of modes must be positive"));
    }
    Ok(n)
}

pub(crate) fn occupation_raw(v: &DMatrix<f64>, w: &DVector<Complex64>) -> f64 {
    // w†(I − iV)w = w†w − i w†Vw; w†Vw is purely imaginary for real antisymmetric V.
    let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    let mut wvw = Complex64::new(0.0, 0.0);
    for i in 0..w.len() {
        let wi = w[i].conj();
        if wi.norm_sqr() == 0.0 {
            continue;
        }
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..w.len() {
            row += w[j] * v[(i, j)];
        }
        wvw += wi * row;
    }
    norm + wvw.im
}

pub(crate) fn clamp_probability(p: f64) -> Result<f64> {
    if !p.is_finite() || p < -OCCUPATION_SLACK || p > 1.0 + OCCUPATION_SLACK {
        return Err(invalid!("occupation {p} outside [0, 1]"));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Random orthogonal matrix `exp(A)` with Gaussian antisymmetric `A`.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    let a = matkit::random_antisym(dim, 2.0, rng);
    matkit::expm_antisym(&a, 1.0)
}

/// Diagnostics returned by [`CovarianceState::check_physical`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalReport {
    /// `max(λ_max(VᵀV) − 1, 0)`.
    pub spectral_excess: f64,
    pub antisymmetry_defect: f64,
    /// `‖VVᵀ − I‖∞` (entrywise maximum).
    pub purity_defect: f64,
}

impl PhysicalReport {
    pub fn is_physical(&self) -> bool {
        self.spectral_excess <= PHYSICAL_TOL && self.antisymmetry_defect <= 1e-10
    }

    pub fn is_pure(&self) -> bool {
        self.purity_defect <= PURITY_TOL
    }
}

/// Two-point function `C_ij = ⟨c_i c_j⟩` (possibly unnormalized).
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix(pub DMatrix<Complex64>);

impl CorrelationMatrix {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    /// Trace of the underlying operator, read off the diagonal.
    pub fn trace_weight(&self) -> Complex64 {
        if self.0.nrows() == 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.0[(0, 0)]
    }

    /// Covariance `V = i(C/P − I)` of the normalized operator.
    pub fn to_covariance(&self) -> Result<DMatrix<f64>> {
        let p = self.trace_weight();
        if p.norm() < 1e-300 {
            return Err(invalid!("zero-trace correlation matrix"));
        }
        let dim = self.0.nrows();
        let mut v = DMatrix::zeros(dim, dim);
        let mut worst_imag = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let delta = if i == j { 1.0 } else { 0.0 };
                let z = I * (self.0[(i, j)] / p - delta);
                worst_imag = worst_imag.max(z.im.abs());
                v[(i, j)] = z.re;
            }
        }
        if worst_imag > 1e-8 {
            return Err(invalid!("covariance has imaginary part {worst_imag:e}"));
        }
        Ok(v)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        matkit::max_abs_diff(&self.0, &self.0.adjoint()) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vacuum_single_mode() {
        let s = CovarianceState::vacuum(1).unwrap();
        assert_eq!(s.covariance(), &DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        assert!(s.is_normalized());
        assert!(s.is_pure());
    }

    #[test]
    fn vacuum_three_modes_empty() {
        let s = CovarianceState::vacuum(3).unwrap();
        assert!(s.is_pure());
        for k in 0..3 {
            assert_eq!(s.occupation(k), 0.0);
            let b = DressedMode::bare(k, 3).unwrap();
            assert_eq!(s.occupation_of_mode(&b).unwrap(), 0.0);
        }
    }

    #[test]
    fn zero_modes_rejected() {
        assert!(CovarianceState::vacuum(0).is_err());
        assert!(CovarianceState::filled(0).is_err());
        assert!(CovarianceState::maximally_mixed(0).is_err());
        assert!(CovarianceState::bell_pair(0).is_err());
    }

    #[test]
    fn filled_and_mixed_occupations() {
        let f = CovarianceState::filled(1).unwrap();
        let b = DressedMode::bare(0, 1).unwrap();
        assert!((f.occupation_of_mode(&b).unwrap() - 1.0).abs() < 1e-15);
        assert!(f.is_pure());

        let m = CovarianceState::maximally_mixed(2).unwrap();
        for k in 0..2 {
            let b = DressedMode::bare(k, 2).unwrap();
            assert!((m.occupation_of_mode(&b).unwrap() - 0.5).abs() < 1e-15);
        }
        assert!(!m.is_pure());
    }

    #[test]
    fn mixed_state_occupation_is_half_for_dressed_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = CovarianceState::maximally_mixed(3).unwrap();
        for _ in 0..10 {
            let b = DressedMode::random(3, &mut rng).unwrap();
            assert!((m.occupation_of_mode(&b).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_pair_layout() {
        let s = CovarianceState::bell_pair(1).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0,
            ],
        );
        assert_eq!(s.covariance(), &expected);
        assert!(s.is_pure());
        let reduced = s.covariance().view((0, 0), (2, 2)).into_owned();
        assert_eq!(reduced, DMatrix::zeros(2, 2));
    }

    #[test]
    fn correlator_two_point() {
        let vac = CovarianceState::vacuum(1).unwrap();
        let c = vac.correlator(&[0, 1]).unwrap();
        assert!((c - I).norm() < 1e-15);
        let mixed = CovarianceState::maximally_mixed(2).unwrap();
        assert_eq!(mixed.correlator(&[0, 3]).unwrap(), Complex64::new(0.0, 0.0));
        assert!(vac.correlator(&[0, 0]).is_err());
        assert!(vac.correlator(&[0]).is_err());
    }

    #[test]
    fn correlator_satisfies_wick() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = CovarianceState::random_mixed(3, &mut rng).unwrap();
        let two = |i: usize, j: usize| s.correlator(&[i, j]).unwrap();
        let four = s.correlator(&[0, 1, 2, 3]).unwrap();
        let wick = two(0, 1) * two(2, 3) - two(0, 2) * two(1, 3) + two(0, 3) * two(1, 2);
        assert!((four - wick).norm() < 1e-12);
        let c = s.correlation_matrix();
        assert!((two(1, 4) - c.matrix()[(1, 4)]).norm() < 1e-15);
    }

    #[test]
    fn constructors_are_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let states = [
            CovarianceState::vacuum(4).unwrap(),
            CovarianceState::filled(2).unwrap(),
            CovarianceState::maximally_mixed(3).unwrap(),
            CovarianceState::bell_pair(2).unwrap(),
            CovarianceState::neel(5).unwrap(),
            CovarianceState::random_pure(4, &mut rng).unwrap(),
            CovarianceState::random_mixed(4, &mut rng).unwrap(),
        ];
        for s in &states {
            let r = s.check_physical();
            assert!(r.antisymmetry_defect <= 1e-12);
            assert!(r.spectral_excess <= 1e-10);
        }
        assert!(states[5].is_pure());
    }

    #[test]
    fn scaled_covariance_is_flagged() {
        let v = CovarianceState::vacuum(2).unwrap().covariance() * 1.5;
        let s = CovarianceState::from_parts(AntisymMatrix::project(v.clone()), 0.0);
        assert!(!s.check_physical().is_physical());
        assert!(CovarianceState::from_covariance(v).is_err());
    }

    #[test]
    fn pure_state_spectrum_is_unimodular() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = CovarianceState::random_pure(3, &mut rng).unwrap();
        let iv = s.covariance().map(|x| Complex64::new(0.0, x));
        for ev in matkit::hermitian_eigenvalues(&iv) {
            assert!((ev.abs() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn occupation_is_phase_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = CovarianceState::random_mixed(3, &mut rng).unwrap();
        let b = DressedMode::random(3, &mut rng).unwrap();
        let rotated = b.with_phase(0.83);
        let p1 = s.occupation_of_mode(&b).unwrap();
        let p2 = s.occupation_of_mode(&rotated).unwrap();
        assert!((p1 - p2).abs() < 1e-12);
    }
}
