//! Model builders: Dirac-form quadratic Hamiltonians and Lindblad models.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dynamics::{monitoring_model, Jump, JumpKind, LindbladModel};
use crate::error::{invalid, Result};
use crate::matkit::{self, AntisymMatrix};
use crate::superop::DressedMode;

const SPEC_TOL: f64 = 1e-12;

/// `Ĥ = Σ hop_ij a_i†a_j + ½ Σ (pair_ij a_i†a_j† + h.c.)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticSpec {
    pub hop: DMatrix<Complex64>,
    pub pair: DMatrix<Complex64>,
}

impl QuadraticSpec {
    pub fn new(hop: DMatrix<Complex64>, pair: DMatrix<Complex64>) -> Result<Self> {
        let n = hop.nrows();
        if n == 0 || hop.ncols() != n || pair.nrows() != n || pair.ncols() != n {
            return Err(invalid!("hop and pair must be square matrices of one size"));
        }
        let herm = matkit::max_abs_diff(&hop, &hop.adjoint());
        if herm > SPEC_TOL {
            return Err(invalid!("hopping matrix is not Hermitian (defect {herm:e})"));
        }
        let anti = matkit::antisymmetry_defect(&pair);
        if anti > SPEC_TOL {
            return Err(invalid!("pairing matrix is not antisymmetric (defect {anti:e})"));
        }
        Ok(Self { hop, pair })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, n), DMatrix::zeros(n, n))
    }

    pub fn n_modes(&self) -> usize {
        self.hop.nrows()
    }
}

/// Majorana coefficients `α` with `a_k = Σ_p α_kp c_p`.
fn dirac_coefficients(n: usize) -> DMatrix<Complex64> {
    let mut alpha = DMatrix::zeros(n, 2 * n);
    for k in 0..n {
        alpha[(k, 2 * k)] = Complex64::new(0.5, 0.0);
        alpha[(k, 2 * k + 1)] = Complex64::new(0.0, 0.5);
    }
    alpha
}

/// Converts to `Ĥ = (i/4) cᵀHc + constant`.
pub fn to_majorana(q: &QuadraticSpec) -> Result<(AntisymMatrix, f64)> {
    let alpha = dirac_coefficients(q.n_modes());
    let alpha_bar = alpha.map(|z| z.conj());
    let half = Complex64::new(0.5, 0.0);
    // Ĥ = Σ_pq X_pq c_p c_q
    let x = alpha_bar.transpose() * &q.hop * &alpha
        + (alpha_bar.transpose() * &q.pair * &alpha_bar) * half
        + (alpha.transpose() * q.pair.map(|z| z.conj()).transpose() * &alpha) * half;
    let constant: Complex64 = x.diagonal().iter().sum();
    let h = (&x - x.transpose()) * Complex64::new(0.0, -2.0);
    let imag = h.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if imag > 1e-10 || constant.im.abs() > 1e-10 {
        return Err(invalid!("quadratic form is not Hermitian"));
    }
    Ok((AntisymMatrix::project(h.map(|z| z.re)), constant.re))
}

fn check_chain(l: usize) -> Result<()> {
    if l < 2 {
        return Err(invalid!("chain length must be at least 2, got {l}"));
    }
    Ok(())
}

/// `−μ Σ n_i − (J/2) Σ (a_i†a_{i+1} + h.c.) − (Δ/2) Σ (a_i†a_{i+1}† + h.c.)`.
pub fn kitaev_chain(l: usize, mu: f64, j: f64, delta: f64) -> Result<QuadraticSpec> {
    check_chain(l)?;
    let mut hop = DMatrix::<Complex64>::identity(l, l) * Complex64::new(-mu, 0.0);
    let mut pair = DMatrix::zeros(l, l);
    for i in 0..l - 1 {
        hop[(i, i + 1)] = Complex64::new(-0.5 * j, 0.0);
        hop[(i + 1, i)] = Complex64::new(-0.5 * j, 0.0);
        pair[(i, i + 1)] = Complex64::new(-0.5 * delta, 0.0);
        pair[(i + 1, i)] = Complex64::new(0.5 * delta, 0.0);
    }
    QuadraticSpec::new(hop, pair)
}

/// `−J Σ (a_i†a_{i+1} + h.c.)`.
pub fn hopping_chain(l: usize, j: f64) -> Result<QuadraticSpec> {
    check_chain(l)?;
    let mut hop = DMatrix::zeros(l, l);
    for i in 0..l - 1 {
        hop[(i, i + 1)] = Complex64::new(-j, 0.0);
        hop[(i + 1, i)] = Complex64::new(-j, 0.0);
    }
    QuadraticSpec::new(hop, DMatrix::zeros(l, l))
}

/// Jump modes `b_k = (a_k + i a_{k+1})/√2` and `b_{−k} = (a_k† + i a_{k+1}†)/√2`.
pub fn hatano_nelson_modes(l: usize) -> Result<Vec<DressedMode>> {
    check_chain(l)?;
    let alpha = dirac_coefficients(l);
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::new(0.0, 1.0);
    let mut modes = Vec::with_capacity(2 * (l - 1));
    for k in 0..l - 1 {
        let ak = alpha.row(k).transpose();
        let ak1 = alpha.row(k + 1).transpose();
        let forward: DVector<Complex64> = (&ak + &ak1 * i) * Complex64::new(s, 0.0);
        let backward: DVector<Complex64> =
            (ak.map(|z| z.conj()) + ak1.map(|z| z.conj()) * i) * Complex64::new(s, 0.0);
        modes.push(DressedMode::new(forward)?);
        modes.push(DressedMode::new(backward)?);
    }
    Ok(modes)
}

fn hatano_nelson(l: usize, j: f64, gamma: f64, kind: JumpKind) -> Result<LindbladModel> {
    if !(gamma >= 0.0) {
        return Err(invalid!("rate must be non-negative, got {gamma}"));
    }
    let (h, _) = to_majorana(&hopping_chain(l, j)?)?;
    let jumps = hatano_nelson_modes(l)?
        .into_iter()
        .map(|mode| Jump { rate: gamma, mode, kind })
        .collect();
    LindbladModel::new(h, jumps)
}

/// Hopping chain with jumps `√γ b_{±k}`.
pub fn hatano_nelson_dissipative(l: usize, j: f64, gamma: f64) -> Result<LindbladModel> {
    hatano_nelson(l, j, gamma, JumpKind::Dissipative)
}

/// Hopping chain with jumps `√γ b_{±k}†b_{±k}`.
pub fn hatano_nelson_projective(l: usize, j: f64, gamma: f64) -> Result<LindbladModel> {
    hatano_nelson(l, j, gamma, JumpKind::Projective)
}

/// Kitaev chain with every site monitored through the pair `n_i`, `1 − n_i`.
pub fn kitaev_monitoring(l: usize, mu: f64, j: f64, delta: f64, gamma: f64) -> Result<LindbladModel> {
    if !(gamma >= 0.0) {
        return Err(invalid!("rate must be non-negative, got {gamma}"));
    }
    let (h, _) = to_majorana(&kitaev_chain(l, mu, j, delta)?)?;
    let modes = (0..l)
        .map(|k| DressedMode::bare(k, l).map(|m| (gamma, m)))
        .collect::<Result<Vec<_>>>()?;
    monitoring_model(h, &modes)
}

/// Largest single-particle energy of `Ĥ = (i/4) cᵀHc`, i.e. `‖H‖₂`.
pub fn max_energy(h: &AntisymMatrix) -> f64 {
    matkit::spectral_norm(h.as_matrix())
}
