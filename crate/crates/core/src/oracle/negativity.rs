use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{check_capacity, monomials, DenseState, I};
use crate::entanglement::Bipartition;
use crate::error::{invalid, Result};
use crate::matkit;

fn reversal_sign(m: usize) -> f64 {
    if (m * m.saturating_sub(1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Coefficients `κ_S` of `ρ = Σ_S κ_S c_S`, indexed by Majorana bitmask.
pub fn majorana_coefficients(d: &DenseState) -> Vec<Complex64> {
    let scale = 1.0 / (1u64 << d.n) as f64;
    monomials(d.n)
        .iter()
        .enumerate()
        .map(|(mask, mono)| {
            mono.trace_with(&d.rho) * reversal_sign(mask.count_ones() as usize) * scale
        })
        .collect()
}

fn check_partition(d: &DenseState, p: &Bipartition) -> Result<()> {
    check_capacity(d.n)?;
    if p.n_modes() != d.n {
        return Err(invalid!("partition is over {} modes, state has {}", p.n_modes(), d.n));
    }
    Ok(())
}

fn majorana_mask(p: &Bipartition) -> usize {
    p.majorana_indices().iter().fold(0, |m, &i| m | (1 << i))
}

/// Fermionic reduced state on `A`, expressed in an `|A|`-mode chain.
fn reduced_state(d: &DenseState, p: &Bipartition) -> DMatrix<Complex64> {
    let na = p.modes().len();
    let coeffs = majorana_coefficients(d);
    let a_idx = p.majorana_indices();
    let mut out = DMatrix::zeros(1 << na, 1 << na);
    let local = monomials(na);
    let factor = (1u64 << (d.n - na)) as f64;
    for (local_mask, mono) in local.iter().enumerate() {
        let global = (0..2 * na)
            .filter(|b| local_mask & (1 << b) != 0)
            .fold(0usize, |m, b| m | (1 << a_idx[b]));
        mono.add_scaled_to(&mut out, coeffs[global] * factor);
    }
    out
}

/// Von Neumann entropy of the fermionic reduced state on `A`.
pub fn entanglement_entropy_exact(d: &DenseState, p: &Bipartition) -> Result<f64> {
    check_partition(d, p)?;
    if p.modes().is_empty() {
        return Ok(0.0);
    }
    let rho_a = reduced_state(d, p);
    let rho_a = &rho_a / rho_a.trace();
    Ok(matkit::hermitian_eigenvalues(&rho_a)
        .into_iter()
        .filter(|&x| x > 1e-300)
        .map(|x| -x * libm::log(x))
        .sum())
}

/// `ln ‖ρ^{R_A}‖₁` where the partial time reversal multiplies each Majorana
/// monomial `c_S` by `i^{|S ∩ A|}`.
pub fn log_negativity_exact(d: &DenseState, p: &Bipartition) -> Result<f64> {
    check_partition(d, p)?;
    let d = d.normalized()?;
    let coeffs = majorana_coefficients(&d);
    let a_mask = majorana_mask(p);
    let mut out = DMatrix::zeros(1 << d.n, 1 << d.n);
    for (mask, mono) in monomials(d.n).iter().enumerate() {
        let c = coeffs[mask];
        if c.norm() == 0.0 {
            continue;
        }
        let k = (mask & a_mask).count_ones();
        mono.add_scaled_to(&mut out, c * I.powu(k));
    }
    Ok(libm::log(trace_norm(&out)))
}

/// Conventional qubit partial transpose on the Jordan–Wigner qubits of `A`.
/// Differs from the fermionic definition in general; kept for comparison.
pub fn log_negativity_bosonic(d: &DenseState, p: &Bipartition) -> Result<f64> {
    check_partition(d, p)?;
    let d = d.normalized()?;
    let mask = p.modes().iter().fold(0usize, |m, &k| m | (1 << k));
    let dim = 1 << d.n;
    let pt = DMatrix::from_fn(dim, dim, |r, c| {
        let r2 = (r & !mask) | (c & mask);
        let c2 = (c & !mask) | (r & mask);
        d.rho[(r2, c2)]
    });
    Ok(libm::log(trace_norm(&pt)))
}

fn trace_norm(m: &DMatrix<Complex64>) -> f64 {
    matkit::singular_values(m).iter().sum()
}
