//! Continuous-time evolution of covariance states.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{dim_err, invalid, Error, Result};
use crate::matkit::{self, AntisymMatrix};
use crate::state::CovarianceState;
use crate::superop::DressedMode;

/// Allowed excess of `‖V‖₂` over one during integration.
pub const INSTABILITY_TOL: f64 = 1e-6;
/// Steps between full spectral-norm checks.
const SPECTRAL_CHECK_INTERVAL: usize = 64;

/// `K̂ = Ĥ − iΓ̂` with `Ĥ = (i/4) cᵀHc` and `Γ̂ = (i/4) cᵀΓc + Γ₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticGenerator {
    pub h: AntisymMatrix,
    pub gamma: AntisymMatrix,
    pub gamma0: f64,
}

impl QuadraticGenerator {
    pub fn new(h: AntisymMatrix, gamma: AntisymMatrix, gamma0: f64) -> Result<Self> {
        if h.dim() != gamma.dim() {
            return Err(dim_err!("H is {0}x{0} but Γ is {1}x{1}", h.dim(), gamma.dim()));
        }
        if !(gamma0 >= 0.0) || !gamma0.is_finite() {
            return Err(invalid!("Γ₀ must be non-negative, got {gamma0}"));
        }
        Ok(Self { h, gamma, gamma0 })
    }

    pub fn hermitian(h: AntisymMatrix) -> Self {
        let dim = h.dim();
        Self {
            h,
            gamma: AntisymMatrix::zeros(dim),
            gamma0: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }
}

fn check_step(t: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid!("time step must be positive, got {dt}"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid!("duration must be non-negative, got {t}"));
    }
    Ok(libm::ceil(t / dt - 1e-9).max(0.0) as usize)
}

/// Fixed-step RK4 driver for `dV/dt = f(V)` with a scalar side channel `dℓ/dt = g(V)`.
fn rk4<F, G>(
    v0: &DMatrix<f64>,
    t: f64,
    dt: f64,
    mut f: F,
    mut g: G,
) -> Result<(DMatrix<f64>, f64)>
where
    F: FnMut(&DMatrix<f64>) -> DMatrix<f64>,
    G: FnMut(&DMatrix<f64>) -> f64,
{
    let steps = check_step(t, dt)?;
    let mut v = v0.clone();
    let mut ell = 0.0;
    if steps == 0 {
        return Ok((v, ell));
    }
    let h = t / steps as f64;
    for step in 1..=steps {
        let k1 = f(&v);
        let l1 = g(&v);
        let v2 = matkit::antisymmetrize(&(&v + &k1 * (0.5 * h)));
        let k2 = f(&v2);
        let l2 = g(&v2);
        let v3 = matkit::antisymmetrize(&(&v + &k2 * (0.5 * h)));
        let k3 = f(&v3);
        let l3 = g(&v3);
        let v4 = matkit::antisymmetrize(&(&v + &k3 * h));
        let k4 = f(&v4);
        let l4 = g(&v4);
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        v = matkit::antisymmetrize(&v);
        ell += (l1 + 2.0 * l2 + 2.0 * l3 + l4) * (h / 6.0);
        let full = step % SPECTRAL_CHECK_INTERVAL == 0 || step == steps;
        check_stability(&v, step, full)?;
    }
    Ok((v, ell))
}

pub(crate) fn check_stability(v: &DMatrix<f64>, step: usize, full: bool) -> Result<()> {
    let mut worst = 0.0f64;
    for x in v.iter() {
        if !x.is_finite() {
            return Err(Error::Instability { step, defect: f64::INFINITY });
        }
        worst = worst.max(x.abs());
    }
    if worst > 1.0 + INSTABILITY_TOL {
        return Err(Error::Instability { step, defect: worst - 1.0 });
    }
    if full {
        let sigma = matkit::spectral_norm(v);
        if sigma > 1.0 + INSTABILITY_TOL {
            return Err(Error::Instability { step, defect: sigma - 1.0 });
        }
    }
    Ok(())
}

/// `HV − VH` for antisymmetric `H`, `V`.
fn commutator(h: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let hv = h * v;
    let t = hv.transpose();
    hv - t
}

fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    // Tr(AB) = Σ_ij A_ij B_ji
    a.iter()
        .zip(b.transpose().iter())
        .map(|(x, y)| x * y)
        .sum()
}

fn check_state_dim(s: &CovarianceState, dim: usize) -> Result<()> {
    if s.dim() != dim {
        return Err(dim_err!("generator is {dim}x{dim}, state has {} Majoranas", s.dim()));
    }
    Ok(())
}

/// Integrates `dV/dt = [H, V] − (Γ + VΓV)` and `d ln P/dt = −2[Γ₀ − Tr(ΓV)/4]`.
pub fn evolve_nonhermitian(
    s: &CovarianceState,
    g: &QuadraticGenerator,
    t: f64,
    dt: f64,
) -> Result<CovarianceState> {
    integrate_nonhermitian(s, g, t, dt)
}

fn integrate_nonhermitian(
    s: &CovarianceState,
    g: &QuadraticGenerator,
    t: f64,
    dt: f64,
) -> Result<CovarianceState> {
    check_state_dim(s, g.dim())?;
    let h = g.h.as_matrix();
    let gam = g.gamma.as_matrix();
    let dissipative = matkit::max_abs(gam) > 0.0;
    let (v, ell) = rk4(
        s.covariance(),
        t,
        dt,
        |v| {
            let mut out = commutator(h, v);
            if dissipative {
                out -= gam + v * (gam * v);
            }
            out
        },
        |v| -2.0 * g.gamma0 + 0.5 * trace_product(gam, v),
    )?;
    Ok(CovarianceState::from_parts(AntisymMatrix::project(v), s.log_weight() + ell)
        .with_phase(s.weight_phase()))
}

/// Exact fixed-step propagator for the non-Hermitian covariance equation.
///
/// Writing `V = Y X⁻¹` linearizes the Riccati equation into
/// `d/dt [X; Y] = M [X; Y]` with `M = [[H, Γ], [−Γ, H]]`. One step is `V ↦ (Φ₂₁ + Φ₂₂V)(Φ₁₁ + Φ₁₂V)⁻¹` for
/// `Φ = exp(dt M)`, and `ln P` gains `½ ln det X − 2Γ₀ dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonHermitianPropagator {
    phi11: DMatrix<f64>,
    phi12: DMatrix<f64>,
    phi21: DMatrix<f64>,
    phi22: DMatrix<f64>,
    gamma0: f64,
    dt: f64,
}

impl NonHermitianPropagator {
    pub fn new(g: &QuadraticGenerator, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid!("time step must be positive, got {dt}"));
        }
        let n = g.dim();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(g.h.as_matrix());
        m.view_mut((n, n), (n, n)).copy_from(g.h.as_matrix());
        m.view_mut((0, n), (n, n)).copy_from(g.gamma.as_matrix());
        m.view_mut((n, 0), (n, n)).copy_from(&(-g.gamma.as_matrix()));
        let phi = matkit::expm_complex(&matkit::complexify(&(m * dt))).map(|z| z.re);
        Ok(Self {
            phi11: phi.view((0, 0), (n, n)).into_owned(),
            phi12: phi.view((0, n), (n, n)).into_owned(),
            phi21: phi.view((n, 0), (n, n)).into_owned(),
            phi22: phi.view((n, n), (n, n)).into_owned(),
            gamma0: g.gamma0,
            dt,
        })
    }

    pub fn dim(&self) -> usize {
        self.phi11.nrows()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `s` by one step (unnormalized).
    pub fn apply(&self, s: &CovarianceState) -> Result<CovarianceState> {
        check_state_dim(s, self.dim())?;
        let v = s.covariance();
        let x = &self.phi11 + &self.phi12 * v;
        let y = &self.phi21 + &self.phi22 * v;
        // V' = Y X⁻¹, i.e. V'ᵀ = X⁻ᵀ Yᵀ.
        let lu = matkit::Lu::new(&x.transpose())?;
        let det = lu.determinant();
        if !(det > 0.0) {
            return Err(Error::Singular { condition: lu.condition_estimate() });
        }
        let next = lu.solve(&y.transpose())?.transpose();
        let ell = 0.5 * libm::log(det) - 2.0 * self.gamma0 * self.dt;
        Ok(CovarianceState::from_parts(AntisymMatrix::project(next), s.log_weight() + ell)
            .with_phase(s.weight_phase()))
    }
}

/// `V ↦ R V Rᵀ` with `R = exp(tH)`.
pub fn evolve_unitary(s: &CovarianceState, h: &AntisymMatrix, t: f64) -> Result<CovarianceState> {
    check_state_dim(s, h.dim())?;
    let r = matkit::expm_antisym(h, t)?;
    let v = &r * s.covariance() * r.transpose();
    Ok(CovarianceState::from_parts(AntisymMatrix::project(v), s.log_weight())
        .with_phase(s.weight_phase()))
}

/// Kind of Lindblad operator attached to a mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JumpKind {
    /// `L = √γ b`.
    Dissipative,
    /// `L = √γ b†b`.
    Projective,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jump {
    pub rate: f64,
    pub mode: DressedMode,
    pub kind: JumpKind,
}

/// Quadratic Hamiltonian plus a list of linear or number-type jump operators.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladModel {
    h: AntisymMatrix,
    jumps: Vec<Jump>,
}

impl LindbladModel {
    pub fn new(h: AntisymMatrix, jumps: Vec<Jump>) -> Result<Self> {
        for (i, j) in jumps.iter().enumerate() {
            if j.mode.dim() != h.dim() {
                return Err(dim_err!(
                    "jump {i} has {} components, H is {}x{}",
                    j.mode.dim(),
                    h.dim(),
                    h.dim()
                ));
            }
            if !(j.rate >= 0.0) || !j.rate.is_finite() {
                return Err(invalid!("jump {i} has invalid rate {}", j.rate));
            }
        }
        Ok(Self { h, jumps })
    }

    pub fn hamiltonian(&self) -> &AntisymMatrix {
        &self.h
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn n_modes(&self) -> usize {
        self.h.dim() / 2
    }

    /// Common kind of all jumps, `None` for an empty or mixed list.
    pub fn kind(&self) -> Option<JumpKind> {
        let first = self.jumps.first()?.kind;
        self.jumps.iter().all(|j| j.kind == first).then_some(first)
    }

    /// Generator of the no-jump evolution `Ĥ − (i/2) Σ L†L`.
    ///
    /// For both jump kinds `L†L = γ(1/2 + (i/4) cᵀKc)`, so
    /// `Γ = ½ Σ γ K` and `Γ₀ = Σ γ / 4`.
    pub fn no_jump_generator(&self) -> QuadraticGenerator {
        let dim = self.dim();
        let mut gamma = DMatrix::zeros(dim, dim);
        let mut gamma0 = 0.0;
        for j in &self.jumps {
            gamma += j.mode.number_generator() * (0.5 * j.rate);
            gamma0 += 0.25 * j.rate;
        }
        QuadraticGenerator {
            h: self.h.clone(),
            gamma: AntisymMatrix::project(gamma),
            gamma0,
        }
    }

    fn require_kind(&self, kind: JumpKind) -> Result<()> {
        if self.jumps.iter().any(|j| j.kind != kind) {
            return Err(invalid!(
                "closed covariance equations need all jumps {:?}; use trajectories for mixed lists",
                kind
            ));
        }
        Ok(())
    }

    /// `(H − M − Mᵀ, 4 Im M)` with `M = Σ γ w w†`.
    fn dissipative_coefficients(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let dim = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for j in &self.jumps {
            m += j.mode.outer() * Complex64::new(j.rate, 0.0);
        }
        let x = self.h.as_matrix() - m.map(|z| 2.0 * z.re);
        let y = m.map(|z| 4.0 * z.im);
        (x, y)
    }
}

/// Expands each monitored mode into the projective pair `b†b`, `b b†`.
pub fn monitoring_model(h: AntisymMatrix, modes: &[(f64, DressedMode)]) -> Result<LindbladModel> {
    let mut jumps = Vec::with_capacity(2 * modes.len());
    for (rate, mode) in modes {
        jumps.push(Jump {
            rate: *rate,
            mode: mode.clone(),
            kind: JumpKind::Projective,
        });
        jumps.push(Jump {
            rate: *rate,
            mode: mode.conjugate(),
            kind: JumpKind::Projective,
        });
    }
    LindbladModel::new(h, jumps)
}

/// Integrates `dV/dt = XV + VXᵀ + 4 Im M` with `X = H − M − Mᵀ`.
pub fn lindblad_covariance_dissipative(
    s: &CovarianceState,
    m: &LindbladModel,
    t: f64,
    dt: f64,
) -> Result<CovarianceState> {
    check_state_dim(s, m.dim())?;
    m.require_kind(JumpKind::Dissipative)?;
    let (x, y) = m.dissipative_coefficients();
    let (v, _) = rk4(
        s.covariance(),
        t,
        dt,
        |v| {
            let xv = &x * v;
            let t = xv.transpose();
            xv - t + &y
        },
        |_| 0.0,
    )?;
    Ok(CovarianceState::from_parts(AntisymMatrix::project(v), s.log_weight()))
}

/// Integrates the covariance equation for number-type jumps,
/// `dV/dt = XV + VXᵀ + 2 Σ γ Tr[(M−Mᵀ)V](M−Mᵀ)` with `X = H − Σ γ (M + Mᵀ)`,
/// where the coefficient multiplying each term is the jump rate.
pub fn lindblad_covariance_projective(
    s: &CovarianceState,
    m: &LindbladModel,
    t: f64,
    dt: f64,
) -> Result<CovarianceState> {
    check_state_dim(s, m.dim())?;
    m.require_kind(JumpKind::Projective)?;
    let dim = m.dim();
    let mut x = m.hamiltonian().as_matrix().clone();
    // (rate, Im M_μ); (M − Mᵀ) = 2i Im M, so the trace term is −8 γ Tr(Im M V) Im M.
    let mut terms: Vec<(f64, DMatrix<f64>)> = Vec::with_capacity(m.jumps().len());
    for j in m.jumps() {
        let outer = j.mode.outer();
        x -= outer.map(|z| 2.0 * z.re) * j.rate;
        terms.push((j.rate, outer.map(|z| z.im)));
    }
    let (v, _) = rk4(
        s.covariance(),
        t,
        dt,
        |v| {
            let xv = &x * v;
            let mut out = &xv - xv.transpose();
            for (rate, im) in &terms {
                let tr = trace_product(im, v);
                out -= im * (8.0 * rate * tr);
            }
            out
        },
        |_| 0.0,
    )?;
    debug_assert_eq!(v.nrows(), dim);
    Ok(CovarianceState::from_parts(AntisymMatrix::project(v), s.log_weight()))
}

/// Stationary covariance of the dissipative equation, solving
/// `XV + VXᵀ = −4 Im M` through a complex Schur form of `X`.
pub fn lindblad_steady_state_dissipative(m: &LindbladModel) -> Result<CovarianceState> {
    m.require_kind(JumpKind::Dissipative)?;
    let (x, y) = m.dissipative_coefficients();
    let v = solve_sylvester_transpose(&x, &(-y))?;
    let state = CovarianceState::from_parts(AntisymMatrix::project(v), 0.0);
    if !state.check_physical().is_physical() {
        return Err(Error::Physicality(alloc::format!(
            "steady state violates VᵀV ≤ I by {:e}",
            state.check_physical().spectral_excess
        )));
    }
    Ok(state)
}

/// Solves `X Z + Z Xᵀ = R` for real `X` (Bartels–Stewart on a complex Schur form).
pub fn solve_sylvester_transpose(x: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    if x.ncols() != n || r.nrows() != n || r.ncols() != n {
        return Err(dim_err!("Sylvester operands must be square and equally sized"));
    }
    let xc = matkit::complexify(x);
    let schur = nalgebra::linalg::Schur::try_new(xc, 1e-14, 10_000)
        .ok_or_else(|| Error::Calibration("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    // X = Q T Q†; with Z = Q W Qᵀ the equation becomes T W + W Tᵀ = Q† R conj(Q).
    let qbar = q.map(|z| z.conj());
    let rhat = q.adjoint() * matkit::complexify(r) * &qbar;
    let mut w = DMatrix::<Complex64>::zeros(n, n);
    let scale = matkit::max_abs(&t).max(1.0);
    for i in (0..n).rev() {
        for j in (0..n).rev() {
            let mut acc = rhat[(i, j)];
            for k in i + 1..n {
                acc -= t[(i, k)] * w[(k, j)];
            }
            for k in j + 1..n {
                acc -= w[(i, k)] * t[(j, k)];
            }
            let denom = t[(i, i)] + t[(j, j)];
            if denom.norm() < 1e-13 * scale {
                return Err(Error::Singular { condition: f64::INFINITY });
            }
            w[(i, j)] = acc / denom;
        }
    }
    let z = &q * w * q.transpose();
    Ok(z.map(|c| c.re))
}
