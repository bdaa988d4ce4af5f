//! Exact density-matrix reference simulator on at most [`MAX_MODES`] modes.
//!
//! Majorana operators are built by the Jordan–Wigner chain: mode `k`
//! occupies bit `k` of the basis index, `c_{2k} = Z…Z X_k` and
//! `c_{2k+1} = Z…Z Y_k`.

mod negativity;
pub mod sweep;

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics::{JumpKind, LindbladModel, QuadraticGenerator};
use crate::error::{dim_err, invalid, Error, Result};
use crate::matkit::{self, AntisymMatrix};
use crate::models::QuadraticSpec;
use crate::state::CovarianceState;
use crate::superop::{DressedMode, Occupation};

pub use negativity::{
    entanglement_entropy_exact, log_negativity_bosonic, log_negativity_exact,
    majorana_coefficients,
};

pub const MAX_MODES: usize = 6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_MODES {
        return Err(Error::Capacity { n, max: MAX_MODES });
    }
    if n == 0 {
        return Err(invalid!("number of modes must be positive"));
    }
    Ok(())
}

/// Operator of the form `|s⟩ ↦ phase(s) |s ⊕ flip⟩`; products of Majoranas
/// stay in this form.
#[derive(Clone, Debug)]
pub(crate) struct SignedFlip {
    flip: usize,
    phase: Vec<Complex64>,
}

impl SignedFlip {
    pub(crate) fn identity(n: usize) -> Self {
        Self {
            flip: 0,
            phase: vec![ONE; 1 << n],
        }
    }

    pub(crate) fn majorana(i: usize, n: usize) -> Self {
        let k = i / 2;
        let below = (1usize << k) - 1;
        let phase = (0..1usize << n)
            .map(|s| {
                let z = if (s & below).count_ones() % 2 == 0 { ONE } else { -ONE };
                if i % 2 == 0 {
                    z
                } else if s & (1 << k) == 0 {
                    z * I
                } else {
                    -z * I
                }
            })
            .collect();
        Self { flip: 1 << k, phase }
    }

    /// `self · other`.
    pub(crate) fn mul(&self, other: &Self) -> Self {
        // self(other|s⟩) = other.phase(s) self.phase(s ⊕ other.flip) |s ⊕ other.flip ⊕ self.flip⟩
        let phase = (0..self.phase.len())
            .map(|s| other.phase[s] * self.phase[s ^ other.flip])
            .collect();
        Self {
            flip: self.flip ^ other.flip,
            phase,
        }
    }

    /// `Tr(ρ X)`.
    pub(crate) fn trace_with(&self, rho: &DMatrix<Complex64>) -> Complex64 {
        (0..self.phase.len())
            .map(|s| self.phase[s] * rho[(s, s ^ self.flip)])
            .sum()
    }

    /// Adds `coef · X` to `m`.
    pub(crate) fn add_scaled_to(&self, m: &mut DMatrix<Complex64>, coef: Complex64) {
        for s in 0..self.phase.len() {
            m[(s ^ self.flip, s)] += coef * self.phase[s];
        }
    }

    pub(crate) fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.phase.len(), self.phase.len());
        self.add_scaled_to(&mut m, ONE);
        m
    }
}

/// All Majorana monomials `c_S` (ascending products), indexed by bitmask `S`.
pub(crate) fn monomials(n: usize) -> Vec<SignedFlip> {
    let dim = 2 * n;
    let singles: Vec<SignedFlip> = (0..dim).map(|i| SignedFlip::majorana(i, n)).collect();
    let mut out: Vec<SignedFlip> = Vec::with_capacity(1 << dim);
    out.push(SignedFlip::identity(n));
    for mask in 1usize..1 << dim {
        let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        let rest = mask & !(1 << top);
        let m = out[rest].mul(&singles[top]);
        out.push(m);
    }
    out
}

/// Dense Jordan–Wigner Majorana matrix `c_i` (0-based).
pub fn majorana_matrix(i: usize, n: usize) -> Result<DMatrix<Complex64>> {
    check_capacity(n)?;
    if i >= 2 * n {
        return Err(invalid!("Majorana index {i} out of range for {n} modes"));
    }
    Ok(SignedFlip::majorana(i, n).to_dense())
}

/// Unnormalized density operator on `n` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    rho: DMatrix<Complex64>,
}

impl DenseState {
    pub fn new(rho: DMatrix<Complex64>, n: usize) -> Result<Self> {
        check_capacity(n)?;
        if rho.nrows() != 1 << n || rho.ncols() != 1 << n {
            return Err(dim_err!("density matrix must be {0}x{0}", 1 << n));
        }
        Ok(Self { n, rho })
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let mut rho = DMatrix::zeros(1 << n, 1 << n);
        rho[(0, 0)] = ONE;
        Ok(Self { n, rho })
    }

    /// Gaussian operator with the covariance and weight of `s`, assembled from
    /// its Majorana expansion `ρ = 2⁻ⁿ Σ_S Tr(c_S†ρ) c_S`.
    pub fn from_covariance(s: &CovarianceState) -> Result<Self> {
        let n = s.n_modes();
        check_capacity(n)?;
        let v = s.covariance();
        let dim = 2 * n;
        let mut rho = DMatrix::zeros(1 << n, 1 << n);
        let scale = s.weight_phase().unwrap_or(ONE) * s.weight() / (1u64 << n) as f64;
        for (mask, mono) in monomials(n).iter().enumerate() {
            let m = mask.count_ones() as usize;
            if m % 2 != 0 {
                continue;
            }
            let idx: Vec<usize> = (0..dim).filter(|b| mask & (1 << b) != 0).collect();
            let pf = if idx.is_empty() {
                ONE
            } else {
                let sub = DMatrix::from_fn(m, m, |a, b| ONE * v[(idx[a], idx[b])]);
                matkit::pfaffian(&sub)?
            };
            // ⟨c_S⟩ = i^{−m/2} Pf(V_S); c_S† = (−1)^{m(m−1)/2} c_S
            let expect = (-I).powu((m / 2) as u32) * pf;
            let rev = if (m * (m.saturating_sub(1)) / 2) % 2 == 0 { ONE } else { -ONE };
            mono.add_scaled_to(&mut rho, expect * rev * scale);
        }
        Ok(Self { n, rho })
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t.norm() < 1e-300 {
            return Err(invalid!("zero-trace density matrix"));
        }
        Ok(Self {
            n: self.n,
            rho: &self.rho / t,
        })
    }

    /// `Tr(ρ X) / Tr ρ`.
    pub fn expectation(&self, op: &DMatrix<Complex64>) -> Complex64 {
        (&self.rho * op).trace() / self.trace()
    }

    /// `⟨c_{i₁} ⋯ c_{i_m}⟩` for 0-based indices.
    pub fn correlator(&self, indices: &[usize]) -> Complex64 {
        let mut op = SignedFlip::identity(self.n);
        for &i in indices {
            op = op.mul(&SignedFlip::majorana(i, self.n));
        }
        op.trace_with(&self.rho) / self.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        matkit::max_abs_diff(&self.rho, &self.rho.adjoint())
    }

    fn with_rho(&self, rho: DMatrix<Complex64>) -> Self {
        Self { n: self.n, rho }
    }
}

/// Covariance `V = i(C − I)` with `C_ij = Tr(ρ c_i c_j)/Tr ρ`, and `ln|Tr ρ|`.
pub fn covariance_of(d: &DenseState) -> Result<CovarianceState> {
    let tr = d.trace();
    if tr.norm() < 1e-300 {
        return Err(invalid!("zero-weight density matrix"));
    }
    let dim = 2 * d.n;
    let singles: Vec<SignedFlip> = (0..dim).map(|i| SignedFlip::majorana(i, d.n)).collect();
    let mut v = DMatrix::zeros(dim, dim);
    let mut worst_imag = 0.0f64;
    for i in 0..dim {
        for j in i + 1..dim {
            let c = singles[i].mul(&singles[j]).trace_with(&d.rho) / tr;
            let x = I * c;
            worst_imag = worst_imag.max(x.im.abs());
            v[(i, j)] = x.re;
            v[(j, i)] = -x.re;
        }
    }
    if worst_imag > 1e-10 * tr.norm().max(1.0) {
        return Err(invalid!("covariance has imaginary part {worst_imag:e}"));
    }
    let s = CovarianceState::from_parts(AntisymMatrix::project(v), libm::log(tr.norm()));
    Ok(s.with_phase(Some(tr / tr.norm())))
}

/// Largest deviation of a four-point function from its Wick expansion.
pub fn wick_residual(d: &DenseState) -> f64 {
    let dim = 2 * d.n;
    let two = |i: usize, j: usize| d.correlator(&[i, j]);
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in i + 1..dim {
            for k in j + 1..dim {
                for l in k + 1..dim {
                    let four = d.correlator(&[i, j, k, l]);
                    let wick = two(i, j) * two(k, l) - two(i, k) * two(j, l) + two(i, l) * two(j, k);
                    worst = worst.max((four - wick).norm());
                }
            }
        }
    }
    worst
}

/// Dense `(i/4) Σ K_ij c_i c_j` for a complex `2n×2n` matrix `K`.
pub fn quadratic_operator(k: &DMatrix<Complex64>, n: usize) -> Result<DMatrix<Complex64>> {
    check_capacity(n)?;
    if k.nrows() != 2 * n || k.ncols() != 2 * n {
        return Err(dim_err!("quadratic form must be {0}x{0}", 2 * n));
    }
    let singles: Vec<SignedFlip> = (0..2 * n).map(|i| SignedFlip::majorana(i, n)).collect();
    let mut out = DMatrix::zeros(1 << n, 1 << n);
    for i in 0..2 * n {
        for j in 0..2 * n {
            if k[(i, j)] != ZERO {
                singles[i].mul(&singles[j]).add_scaled_to(&mut out, I * 0.25 * k[(i, j)]);
            }
        }
    }
    Ok(out)
}

/// Dense `b = Σ w_j c_j`.
pub fn mode_operator(mode: &DressedMode) -> Result<DMatrix<Complex64>> {
    let n = mode.n_modes();
    check_capacity(n)?;
    let mut out = DMatrix::zeros(1 << n, 1 << n);
    for (j, w) in mode.coefficients().iter().enumerate() {
        SignedFlip::majorana(j, n).add_scaled_to(&mut out, *w);
    }
    Ok(out)
}

/// Dense `a_k`.
pub fn annihilator(k: usize, n: usize) -> Result<DMatrix<Complex64>> {
    mode_operator(&DressedMode::bare(k, n)?)
}

/// Dense Dirac-form operator `Σ hop a†a + ½ Σ (pair a†a† + h.c.)`.
pub fn dirac_operator(q: &QuadraticSpec) -> Result<DMatrix<Complex64>> {
    let n = q.n_modes();
    check_capacity(n)?;
    let a: Vec<DMatrix<Complex64>> = (0..n).map(|k| annihilator(k, n)).collect::<Result<_>>()?;
    let mut out = DMatrix::zeros(1 << n, 1 << n);
    for i in 0..n {
        for j in 0..n {
            let ad_i = a[i].adjoint();
            out += &ad_i * &a[j] * q.hop[(i, j)];
            let pair = &ad_i * a[j].adjoint() * q.pair[(i, j)];
            out += (&pair + pair.adjoint()) * Complex64::new(0.5, 0.0);
        }
    }
    Ok(out)
}

fn hermitian_exp(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    // exp(−i t H) by eigendecomposition.
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -t * e)));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// One exact operation on a dense state.
#[derive(Clone, Debug)]
pub enum DenseOp<'a> {
    /// `ρ ↦ e^{−itĤ} ρ e^{itĤ}`, `Ĥ = (i/4) cᵀHc`.
    Unitary { h: &'a AntisymMatrix, t: f64 },
    /// `ρ ↦ e^{−itK̂} ρ e^{itK̂†}`.
    NonHermitian { g: &'a QuadraticGenerator, t: f64 },
    /// `ρ ↦ Π ρ Π` with `Π = n_b` or `1 − n_b`.
    Measure { mode: &'a DressedMode, outcome: Occupation },
    /// `ρ ↦ b ρ b†`.
    Dissipate { mode: &'a DressedMode },
    /// Lindblad evolution by RK4 on the density matrix.
    Lindblad { model: &'a LindbladModel, t: f64, dt: f64 },
}

pub fn oracle_apply(d: &DenseState, op: &DenseOp<'_>) -> Result<DenseState> {
    let n = d.n;
    match op {
        DenseOp::Unitary { h, t } => {
            let hop = quadratic_operator(&matkit::complexify(h.as_matrix()), n)?;
            let u = hermitian_exp(&hop, *t);
            Ok(d.with_rho(&u * &d.rho * u.adjoint()))
        }
        DenseOp::NonHermitian { g, t } => {
            let w = nonhermitian_propagator(g, n, *t)?;
            Ok(d.with_rho(&w * &d.rho * w.adjoint()))
        }
        DenseOp::Measure { mode, outcome } => {
            let b = mode_operator(mode)?;
            let num = b.adjoint() * &b;
            let proj = match outcome {
                Occupation::Occupied => num,
                Occupation::Empty => DMatrix::identity(1 << n, 1 << n) - num,
            };
            Ok(d.with_rho(&proj * &d.rho * &proj))
        }
        DenseOp::Dissipate { mode } => {
            let b = mode_operator(mode)?;
            Ok(d.with_rho(&b * &d.rho * b.adjoint()))
        }
        DenseOp::Lindblad { model, t, dt } => evolve_lindblad(d, model, *t, *dt),
    }
}

/// `exp(−itK̂)` with `K̂ = Ĥ − iΓ̂`.
pub fn nonhermitian_propagator(g: &QuadraticGenerator, n: usize, t: f64) -> Result<DMatrix<Complex64>> {
    if g.dim() != 2 * n {
        return Err(dim_err!("generator does not match {n} modes"));
    }
    let hop = quadratic_operator(&matkit::complexify(g.h.as_matrix()), n)?;
    let gop = quadratic_operator(&matkit::complexify(g.gamma.as_matrix()), n)?
        + DMatrix::identity(1 << n, 1 << n) * Complex64::new(g.gamma0, 0.0);
    let k = hop - gop * I;
    Ok(matkit::expm_complex(&(k * Complex64::new(0.0, -t))))
}

/// Dense jump operators `√γ L` of a model.
pub fn jump_operators(model: &LindbladModel) -> Result<Vec<DMatrix<Complex64>>> {
    model
        .jumps()
        .iter()
        .map(|j| {
            let b = mode_operator(&j.mode)?;
            let l = match j.kind {
                JumpKind::Dissipative => b,
                JumpKind::Projective => b.adjoint() * &b,
            };
            Ok(l * Complex64::new(libm::sqrt(j.rate), 0.0))
        })
        .collect()
}

/// Effective generator `Ĥ − (i/2) Σ L†L`.
pub fn effective_hamiltonian(model: &LindbladModel) -> Result<DMatrix<Complex64>> {
    let n = model.n_modes();
    let mut k = quadratic_operator(&matkit::complexify(model.hamiltonian().as_matrix()), n)?;
    for l in jump_operators(model)? {
        k -= l.adjoint() * &l * Complex64::new(0.0, 0.5);
    }
    Ok(k)
}

fn lindblad_rk4(
    rho: &DMatrix<Complex64>,
    h: &DMatrix<Complex64>,
    ls: &[DMatrix<Complex64>],
    t: f64,
    dt: f64,
) -> Result<DMatrix<Complex64>> {
    if !(dt > 0.0) || !(t >= 0.0) {
        return Err(invalid!("invalid time step {dt} or duration {t}"));
    }
    let steps = libm::ceil(t / dt - 1e-9).max(0.0) as usize;
    if steps == 0 {
        return Ok(rho.clone());
    }
    let step = t / steps as f64;
    let lds: Vec<DMatrix<Complex64>> = ls.iter().map(|l| l.adjoint()).collect();
    let mut keff = h.clone();
    for (l, ld) in ls.iter().zip(&lds) {
        keff -= ld * l * Complex64::new(0.0, 0.5);
    }
    let keff_dag = keff.adjoint();
    let f = |r: &DMatrix<Complex64>| {
        let mut out = (&keff * r - r * &keff_dag) * (-I);
        for (l, ld) in ls.iter().zip(&lds) {
            out += l * r * ld;
        }
        out
    };
    let mut r = rho.clone();
    let half = Complex64::new(0.5 * step, 0.0);
    let full = Complex64::new(step, 0.0);
    for _ in 0..steps {
        let k1 = f(&r);
        let k2 = f(&(&r + &k1 * half));
        let k3 = f(&(&r + &k2 * half));
        let k4 = f(&(&r + &k3 * full));
        let two = Complex64::new(2.0, 0.0);
        r += (k1 + k2 * two + k3 * two + k4) * Complex64::new(step / 6.0, 0.0);
    }
    Ok(r)
}

/// Lindblad evolution; the result is cross-checked against a run with half
/// the step and the finer solution is returned.
pub fn evolve_lindblad(d: &DenseState, model: &LindbladModel, t: f64, dt: f64) -> Result<DenseState> {
    if model.n_modes() != d.n {
        return Err(dim_err!("model has {} modes, state has {}", model.n_modes(), d.n));
    }
    let h = quadratic_operator(&matkit::complexify(model.hamiltonian().as_matrix()), d.n)?;
    let ls = jump_operators(model)?;
    let coarse = lindblad_rk4(&d.rho, &h, &ls, t, dt)?;
    let fine = lindblad_rk4(&d.rho, &h, &ls, t, 0.5 * dt)?;
    let gap = matkit::max_abs_diff(&coarse, &fine);
    if gap > 1e-6 * matkit::max_abs(&fine).max(1e-300) {
        return Err(Error::Calibration(alloc::format!(
            "dense Lindblad step not converged (halving changed ρ by {gap:e})"
        )));
    }
    Ok(d.with_rho(fine))
}

/// `Σ_μ γ_μ F_μ ρ F_μ†` with `F = b` or `F = b†b`.
pub fn channel_average(d: &DenseState, jumps: &[(f64, DressedMode)], kind: JumpKind) -> Result<DenseState> {
    let mut out = DMatrix::zeros(1 << d.n, 1 << d.n);
    for (rate, mode) in jumps {
        let b = mode_operator(mode)?;
        let f = match kind {
            JumpKind::Dissipative => b,
            JumpKind::Projective => b.adjoint() * &b,
        };
        out += &f * &d.rho * f.adjoint() * Complex64::new(*rate, 0.0);
    }
    Ok(d.with_rho(out))
}

/// Unnormalized two-point matrix `Tr(ρ c_i c_j)`.
pub fn two_point_matrix(d: &DenseState) -> DMatrix<Complex64> {
    let dim = 2 * d.n;
    let singles: Vec<SignedFlip> = (0..dim).map(|i| SignedFlip::majorana(i, d.n)).collect();
    DMatrix::from_fn(dim, dim, |i, j| singles[i].mul(&singles[j]).trace_with(&d.rho))
}

#[cfg(test)]
mod tests;
