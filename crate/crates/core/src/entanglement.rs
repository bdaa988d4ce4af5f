//! Entanglement measures computed from covariance matrices.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::matkit::{self, Lu};
use crate::state::{CovarianceState, PHYSICAL_TOL};

/// Subset `A` of the Dirac modes (0-based, sorted, distinct).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bipartition {
    n_modes: usize,
    modes: Vec<usize>,
}

impl Bipartition {
    pub fn new(modes: &[usize], n_modes: usize) -> Result<Self> {
        let mut sorted = modes.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(invalid!("mode {} listed twice", w[0]));
            }
        }
        if let Some(&last) = sorted.last() {
            if last >= n_modes {
                return Err(invalid!("mode {last} out of range for {n_modes} modes"));
            }
        }
        Ok(Self { n_modes, modes: sorted })
    }

    /// The first `⌊n/2⌋` modes.
    pub fn first_half(n_modes: usize) -> Self {
        Self {
            n_modes,
            modes: (0..n_modes / 2).collect(),
        }
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn contains(&self, mode: usize) -> bool {
        self.modes.binary_search(&mode).is_ok()
    }

    pub fn complement(&self) -> Self {
        Self {
            n_modes: self.n_modes,
            modes: (0..self.n_modes).filter(|k| !self.contains(*k)).collect(),
        }
    }

    /// Majorana indices `2k, 2k+1` of the modes in `A`.
    pub fn majorana_indices(&self) -> Vec<usize> {
        self.modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect()
    }

    fn check(&self, s: &CovarianceState) -> Result<()> {
        if self.n_modes != s.n_modes() {
            return Err(invalid!(
                "partition is over {} modes, state has {}",
                self.n_modes,
                s.n_modes()
            ));
        }
        Ok(())
    }
}

/// Restriction of `V` to the Majoranas of `A`.
pub fn subsystem_covariance(v: &DMatrix<f64>, p: &Bipartition) -> DMatrix<f64> {
    let idx = p.majorana_indices();
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| v[(idx[a], idx[b])])
}

fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * libm::log(x) };
    term(p) + term(1.0 - p)
}

/// Von Neumann entropy of the reduced state on `A`.
pub fn entanglement_entropy(s: &CovarianceState, p: &Bipartition) -> Result<f64> {
    p.check(s)?;
    entropy_from_covariance(s.covariance(), p)
}

pub fn entropy_from_covariance(v: &DMatrix<f64>, p: &Bipartition) -> Result<f64> {
    let sub = subsystem_covariance(v, p);
    let mut total = 0.0;
    for sigma in matkit::singular_values(&sub) {
        if sigma > 1.0 + PHYSICAL_TOL {
            return Err(Error::Physicality(alloc::format!(
                "subsystem singular value {sigma} exceeds 1"
            )));
        }
        total += binary_entropy(0.5 * (1.0 + sigma.min(1.0)));
    }
    Ok(0.5 * total)
}

/// Fermionic logarithmic negativity `ln ‖ρ^{R_A}‖₁` of a Gaussian state.
pub fn log_negativity(s: &CovarianceState, p: &Bipartition) -> Result<f64> {
    p.check(s)?;
    log_negativity_from_covariance(s.covariance(), p)
}

/// As [`log_negativity`], for a bare covariance matrix (e.g. an ensemble mean).
///
/// The partially time-reversed operators `O_±` are Gaussian with covariances
/// `Γ_± = i V_±`, where `V_±` flips the sign of the `AA` block and multiplies
/// the `AB`, `BA` blocks by `±i`. Their product `O_+ O_−` is Gaussian with
/// covariance `Γ_× = I − (I − Γ_−)(I + Γ_+Γ_−)⁻¹(I − Γ_+)` and trace
/// `Π ((1 + σ_k²)/2)` over normal-mode pairs of `V`.
pub fn log_negativity_from_covariance(v: &DMatrix<f64>, p: &Bipartition) -> Result<f64> {
    let dim = v.nrows();
    if p.n_modes * 2 != dim {
        return Err(invalid!("partition is over {} modes, covariance has {dim} rows", p.n_modes));
    }
    let in_a: Vec<bool> = (0..dim).map(|i| p.contains(i / 2)).collect();
    let i = Complex64::new(0.0, 1.0);
    let gamma = |sign: f64| {
        DMatrix::from_fn(dim, dim, |r, c| {
            let x = Complex64::new(v[(r, c)], 0.0);
            let vpm = match (in_a[r], in_a[c]) {
                (true, true) => -x,
                (false, false) => x,
                _ => x * i * sign,
            };
            i * vpm
        })
    };
    let gp = gamma(1.0);
    let gm = gamma(-1.0);
    let id = DMatrix::<Complex64>::identity(dim, dim);
    let lu = Lu::new(&(&id + &gp * &gm))?;
    let cond = lu.condition_estimate();
    if !(cond <= matkit::MAX_CONDITION) {
        return Err(Error::Singular { condition: cond });
    }
    let resolvent = lu.solve(&(&id - &gp))?;
    let gx = &id - (&id - &gm) * resolvent;
    let mut total = 0.0;
    for xi in matkit::hermitian_eigenvalues(&gx) {
        let xi = xi.clamp(-1.0, 1.0);
        total += 0.5 * libm::log(libm::sqrt(0.5 * (1.0 + xi)) + libm::sqrt(0.5 * (1.0 - xi)));
    }
    for sigma in matkit::singular_values(v) {
        total += 0.25 * libm::log(0.5 * (1.0 + sigma * sigma));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn partition_validation() {
        assert!(Bipartition::new(&[0, 0], 3).is_err());
        assert!(Bipartition::new(&[3], 3).is_err());
        let p = Bipartition::new(&[2, 0], 3).unwrap();
        assert_eq!(p.modes(), &[0, 2]);
        assert_eq!(p.complement().modes(), &[1]);
        assert_eq!(p.majorana_indices(), alloc::vec![0, 1, 4, 5]);
        assert_eq!(Bipartition::first_half(6).modes(), &[0, 1, 2]);
    }

    #[test]
    fn product_states_have_no_entanglement() {
        let s = CovarianceState::neel(4).unwrap();
        let p = Bipartition::first_half(4);
        assert_eq!(entanglement_entropy(&s, &p).unwrap(), 0.0);
        assert!(log_negativity(&s, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bell_pair_values() {
        let s = CovarianceState::bell_pair(1).unwrap();
        let p = Bipartition::new(&[0], 2).unwrap();
        let ln2 = core::f64::consts::LN_2;
        assert!((entanglement_entropy(&s, &p).unwrap() - ln2).abs() < 1e-12);
        assert!((log_negativity(&s, &p).unwrap() - ln2).abs() < 1e-10);
    }

    #[test]
    fn maximally_mixed_values() {
        let s = CovarianceState::maximally_mixed(4).unwrap();
        let p = Bipartition::first_half(4);
        let expected = 2.0 * core::f64::consts::LN_2;
        assert!((entanglement_entropy(&s, &p).unwrap() - expected).abs() < 1e-12);
        assert!(log_negativity(&s, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pure_state_entropy_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = CovarianceState::random_pure(5, &mut rng).unwrap();
        let p = Bipartition::new(&[0, 3], 5).unwrap();
        let a = entanglement_entropy(&s, &p).unwrap();
        let b = entanglement_entropy(&s, &p.complement()).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn pure_state_negativity_is_renyi_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = CovarianceState::random_pure(4, &mut rng).unwrap();
        let p = Bipartition::new(&[1, 2], 4).unwrap();
        let sub = subsystem_covariance(s.covariance(), &p);
        // ln Tr ρ_A^{1/2} squared
        let mut renyi = 0.0;
        for sigma in matkit::singular_values(&sub) {
            let q = 0.5 * (1.0 + sigma.min(1.0));
            renyi += 0.5 * 2.0 * libm::log(libm::sqrt(q) + libm::sqrt(1.0 - q));
        }
        let ln = log_negativity(&s, &p).unwrap();
        assert!((ln - renyi).abs() < 1e-9, "{ln} vs {renyi}");
    }
}
