//! Gaussian superoperators acting on covariance states.
//!
//! A map is given by its blocks `(A, B, D, f)`; the output covariance is
//! `V' = A + B (I + V D)⁻¹ V Bᵀ` and the trace gains the factor
//! `f √det(I + D V)` up to sign.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{dim_err, invalid, Result};
use crate::matkit::{self, AntisymMatrix, Lu, Scalar};
use crate::state::{clamp_probability, CorrelationMatrix, CovarianceState};

/// Below this `|det(I + D V)|` a branch is treated as having zero weight.
pub const ZERO_WEIGHT_DET: f64 = 1e-12;
/// Tolerance on the canonical conditions for a mode vector.
pub const MODE_TOL: f64 = 1e-10;

/// `b = Σ_j w_j c_j` with `w = u + i v`, `‖u‖ = ‖v‖ = 1/2`, `u ⟂ v`.
#[derive(Clone, Debug, PartialEq)]
pub struct DressedMode {
    w: DVector<Complex64>,
}

impl DressedMode {
    /// Validates the canonical anticommutation conditions `wᵀw = 0`, `w†w = 1/2`.
    pub fn new(w: DVector<Complex64>) -> Result<Self> {
        if w.is_empty() || w.len() % 2 != 0 {
            return Err(dim_err!("mode vector must have even positive length, got {}", w.len()));
        }
        let wtw: Complex64 = w.iter().map(|z| z * z).sum();
        let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        if wtw.norm() > MODE_TOL || (norm - 0.5).abs() > MODE_TOL {
            return Err(invalid!(
                "mode is not canonical: |wᵀw| = {:e}, w†w = {}",
                wtw.norm(),
                norm
            ));
        }
        Ok(Self { w })
    }

    /// Builds `w = u + i v` from real parts.
    pub fn from_parts(u: &DVector<f64>, v: &DVector<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(dim_err!("u and v differ in length"));
        }
        Self::new(DVector::from_fn(u.len(), |i, _| Complex64::new(u[i], v[i])))
    }

    /// Bare annihilator `a_k = (c_{2k} + i c_{2k+1}) / 2`.
    pub fn bare(k: usize, n_modes: usize) -> Result<Self> {
        if k >= n_modes {
            return Err(invalid!("mode {k} out of range for {n_modes} modes"));
        }
        let mut w = DVector::zeros(2 * n_modes);
        w[2 * k] = Complex64::new(0.5, 0.0);
        w[2 * k + 1] = Complex64::new(0.0, 0.5);
        Ok(Self { w })
    }

    /// Random canonical mode from a random orthogonal frame.
    pub fn random<R: Rng + ?Sized>(n_modes: usize, rng: &mut R) -> Result<Self> {
        let rot = crate::state::random_orthogonal(2 * n_modes, rng)?;
        let u = rot.column(0) * 0.5;
        let v = rot.column(1) * 0.5;
        Self::from_parts(&u.into_owned(), &v.into_owned())
    }

    /// `b†`, i.e. coefficients `w*`.
    pub fn conjugate(&self) -> Self {
        Self { w: self.w.map(|z| z.conj()) }
    }

    /// `e^{iφ} b`; represents the same physical mode.
    pub fn with_phase(&self, phi: f64) -> Self {
        let z = Complex64::from_polar(1.0, phi);
        Self { w: self.w.map(|x| x * z) }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn n_modes(&self) -> usize {
        self.w.len() / 2
    }

    pub fn coefficients(&self) -> &DVector<Complex64> {
        &self.w
    }

    pub fn u(&self) -> DVector<f64> {
        self.w.map(|z| z.re)
    }

    pub fn v(&self) -> DVector<f64> {
        self.w.map(|z| z.im)
    }

    /// `K = 4(u vᵀ − v uᵀ)`, so that `b†b = 1/2 + (i/4) cᵀ K c`.
    pub fn number_generator(&self) -> DMatrix<f64> {
        let (u, v) = (self.u(), self.v());
        (&u * v.transpose() - &v * u.transpose()) * 4.0
    }

    /// `P = 4(u uᵀ + v vᵀ)`, the projector onto the span of `u` and `v`.
    pub fn projector(&self) -> DMatrix<f64> {
        let (u, v) = (self.u(), self.v());
        (&u * u.transpose() + &v * v.transpose()) * 4.0
    }

    /// `M = w w†`.
    pub fn outer(&self) -> DMatrix<Complex64> {
        &self.w * self.w.adjoint()
    }

    /// Frame `T` with first columns `2u`, `2v`.
    pub fn frame(&self) -> Result<DMatrix<f64>> {
        matkit::householder_frame(&self.u(), &self.v())
    }
}

/// Projective outcome of a number measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Occupation {
    Empty,
    Occupied,
}

impl Occupation {
    pub fn sign(self) -> f64 {
        match self {
            Occupation::Empty => -1.0,
            Occupation::Occupied => 1.0,
        }
    }
}

/// Result of applying a (possibly trace-decreasing) map.
#[derive(Clone, Debug, PartialEq)]
pub struct MapOutcome {
    /// `None` when the branch has zero weight.
    pub state: Option<CovarianceState>,
    /// Ratio `|P'| / |P|`; for a normalized input, the branch probability.
    pub weight: f64,
}

/// Block representation `(A, B, D, f)` of a Gaussian superoperator.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSuperop {
    a: DMatrix<Complex64>,
    b: DMatrix<Complex64>,
    d: DMatrix<Complex64>,
    f: Complex64,
}

impl GaussianSuperop {
    pub fn new(
        a: DMatrix<Complex64>,
        b: DMatrix<Complex64>,
        d: DMatrix<Complex64>,
        f: Complex64,
    ) -> Result<Self> {
        let n = a.nrows();
        for (name, m) in [("A", &a), ("B", &b), ("D", &d)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(dim_err!("block {name} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols()));
            }
        }
        if n % 2 != 0 {
            return Err(dim_err!("blocks must have even dimension, got {n}"));
        }
        for (name, m) in [("A", &a), ("D", &d)] {
            let defect = matkit::antisymmetry_defect(m);
            if defect > matkit::ANTISYM_TOL * (1.0 + matkit::max_abs(m)) {
                return Err(invalid!("block {name} is not antisymmetric (defect {defect:e})"));
            }
        }
        Ok(Self { a, b, d, f })
    }

    pub fn from_real(a: DMatrix<f64>, b: DMatrix<f64>, d: DMatrix<f64>, f: f64) -> Result<Self> {
        Self::new(
            matkit::complexify(&a),
            matkit::complexify(&b),
            matkit::complexify(&d),
            Complex64::new(f, 0.0),
        )
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_real(
            DMatrix::zeros(dim, dim),
            DMatrix::identity(dim, dim),
            DMatrix::zeros(dim, dim),
            1.0,
        )
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<Complex64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<Complex64> {
        &self.b
    }

    pub fn d(&self) -> &DMatrix<Complex64> {
        &self.d
    }

    pub fn f(&self) -> Complex64 {
        self.f
    }

    /// `[[A, B], [−Bᵀ, D]]`.
    pub fn dual_covariance(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.a);
        m.view_mut((0, n), (n, n)).copy_from(&self.b);
        m.view_mut((n, 0), (n, n)).copy_from(&(-self.b.transpose()));
        m.view_mut((n, n), (n, n)).copy_from(&self.d);
        m
    }

    fn real_blocks(&self) -> Option<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        let is_real = |m: &DMatrix<Complex64>| m.iter().all(|z| z.im == 0.0);
        if is_real(&self.a) && is_real(&self.b) && is_real(&self.d) {
            Some((
                self.a.map(|z| z.re),
                self.b.map(|z| z.re),
                self.d.map(|z| z.re),
            ))
        } else {
            None
        }
    }
}

/// Outcome of [`check_complete_positivity`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpReport {
    pub passed: bool,
    /// Largest violation among `σ_max(V_F) − 1`, imaginary parts of the
    /// dual covariance and a non-positive `f`.
    pub defect: f64,
}

/// Checks that the dual state of the map is a physical Gaussian state.
pub fn check_complete_positivity(sop: &GaussianSuperop) -> CpReport {
    let dual = sop.dual_covariance();
    let imag = dual.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    let sigma = matkit::spectral_norm(&dual);
    let f_defect = if sop.f.re > 0.0 { sop.f.im.abs() } else { sop.f.norm() + 1.0 };
    let defect = (sigma - 1.0).max(0.0).max(imag).max(f_defect);
    CpReport {
        passed: defect <= 1e-10,
        defect,
    }
}

struct Update<T: Scalar> {
    v: DMatrix<T>,
    /// `det(I + V D)`.
    det: T,
}

fn update<T: Scalar>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    d: &DMatrix<T>,
    v: &DMatrix<T>,
) -> Result<Option<Update<T>>> {
    let n = v.nrows();
    let m = DMatrix::<T>::identity(n, n) + v * d;
    let lu = Lu::new(&m)?;
    let det = lu.determinant();
    if det.modulus() < ZERO_WEIGHT_DET {
        return Ok(None);
    }
    let x = lu.solve(&(v * b.transpose()))?;
    let out = a + b * x;
    Ok(Some(Update {
        v: matkit::antisymmetrize(&out),
        det,
    }))
}

fn check_dims(sop: &GaussianSuperop, s: &CovarianceState) -> Result<()> {
    if sop.dim() != s.dim() {
        return Err(dim_err!(
            "map acts on {} Majoranas, state has {}",
            sop.dim(),
            s.dim()
        ));
    }
    Ok(())
}

fn finish(
    s: &CovarianceState,
    v: DMatrix<f64>,
    log_factor: f64,
    phase: Option<Complex64>,
) -> MapOutcome {
    let state = CovarianceState::from_parts(AntisymMatrix::project(v), s.log_weight() + log_factor)
        .with_phase(phase);
    MapOutcome {
        state: Some(state),
        weight: libm::exp(log_factor),
    }
}

fn zero_branch() -> MapOutcome {
    MapOutcome {
        state: None,
        weight: 0.0,
    }
}

/// Applies `sop` through the determinant route. The sign of `P` is tracked
/// only when the map is completely positive; otherwise it is marked unknown.
pub fn apply(sop: &GaussianSuperop, s: &CovarianceState) -> Result<MapOutcome> {
    check_dims(sop, s)?;
    let cp = check_complete_positivity(sop).passed;
    let phase = if cp { s.weight_phase() } else { None };
    if let Some((a, b, d)) = sop.real_blocks() {
        return match update(&a, &b, &d, s.covariance())? {
            None => Ok(zero_branch()),
            Some(up) => {
                let log_factor = 0.5 * libm::log((sop.f * sop.f).norm() * up.det.abs());
                Ok(finish(s, up.v, log_factor, phase))
            }
        };
    }
    let v = matkit::complexify(s.covariance());
    match update(&sop.a, &sop.b, &sop.d, &v)? {
        None => Ok(zero_branch()),
        Some(up) => {
            let imag = up.v.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
            if imag > 1e-8 {
                return Err(crate::error::Error::Physicality(alloc::format!(
                    "output covariance has imaginary part {imag:e}"
                )));
            }
            let log_factor = 0.5 * libm::log((sop.f * sop.f * up.det).norm());
            Ok(finish(s, up.v.map(|z| z.re), log_factor, phase))
        }
    }
}

/// Applies `sop` and tracks the sign of `P` through
/// `P' = (−1)ⁿ f Pf(V) Pf(V⁻¹ + D) P`. Requires an invertible `V`.
pub fn apply_signed(sop: &GaussianSuperop, s: &CovarianceState) -> Result<MapOutcome> {
    check_dims(sop, s)?;
    let out = apply(sop, s)?;
    let Some(state) = out.state else {
        return Ok(out);
    };
    let dim = s.dim();
    let v = matkit::complexify(s.covariance());
    let lu = Lu::new(&v)?;
    let cond = lu.condition_estimate();
    if !(cond <= matkit::MAX_CONDITION) {
        return Err(crate::error::Error::Singular { condition: cond });
    }
    let vinv = matkit::antisymmetrize(&lu.solve(&DMatrix::identity(dim, dim))?);
    let pf_v = matkit::pfaffian(&v)?;
    let pf_w = matkit::pfaffian(&(vinv + &sop.d))?;
    let sign = if (dim / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let factor = sop.f * pf_v * pf_w * sign;
    let phase = match (s.weight_phase(), factor.norm()) {
        (Some(p), r) if r > 0.0 => Some(p * factor / r),
        _ => None,
    };
    let log_factor = libm::log(factor.norm());
    let state = state
        .with_log_weight(s.log_weight() + log_factor)
        .with_phase(phase);
    Ok(MapOutcome {
        state: Some(state),
        weight: factor.norm(),
    })
}

fn bare_generator(dim: usize, k: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(dim, dim);
    a[(2 * k, 2 * k + 1)] = 1.0;
    a[(2 * k + 1, 2 * k)] = -1.0;
    a
}

fn bare_complement(dim: usize, k: usize) -> DMatrix<f64> {
    let mut b = DMatrix::identity(dim, dim);
    b[(2 * k, 2 * k)] = 0.0;
    b[(2 * k + 1, 2 * k + 1)] = 0.0;
    b
}

/// Measurement map for outcome `x` given the generator block `A` and the
/// complement block `B`: `(±A, B, ∓A, 1/2)`.
fn measurement_superop(a: DMatrix<f64>, b: DMatrix<f64>, outcome: Occupation) -> Result<GaussianSuperop> {
    let s = outcome.sign();
    let d = &a * -s;
    GaussianSuperop::from_real(&a * s, b, d, 0.5)
}

/// Projective number measurement of bare mode `k`.
pub fn measure_bare(s: &CovarianceState, k: usize, outcome: Occupation) -> Result<MapOutcome> {
    if k >= s.n_modes() {
        return Err(invalid!("mode {k} out of range for {} modes", s.n_modes()));
    }
    let dim = s.dim();
    let mut t1 = DVector::zeros(dim);
    let mut t2 = DVector::zeros(dim);
    t1[2 * k] = 1.0;
    t2[2 * k + 1] = 1.0;
    let sign = outcome.sign();
    Ok(rank_two_update(s, &t1, &t2, sign, -sign))
}

/// Generic-path version of [`measure_bare`], kept as a cross-check.
pub fn measure_bare_generic(s: &CovarianceState, k: usize, outcome: Occupation) -> Result<MapOutcome> {
    if k >= s.n_modes() {
        return Err(invalid!("mode {k} out of range for {} modes", s.n_modes()));
    }
    let dim = s.dim();
    let sop = measurement_superop(bare_generator(dim, k), bare_complement(dim, k), outcome)?;
    apply(&sop, s)
}

/// Maps with `A = α QJQᵀ`, `D = δ QJQᵀ`, `B = I − QQᵀ`, `f = 1/2`, where
/// `Q = [t₁ t₂]` is orthonormal and `J = [[0, 1], [−1, 0]]`.
///
/// `QᵀVQ = qJ` with `q = t₁ᵀVt₂`, so the Woodbury capacitance matrix is
/// `(1 − δq) I₂` and the update costs `O(n²)`:
/// `V' = αQJQᵀ + P⊥VP⊥ + δ/(1 − δq) (r₁r₂ᵀ − r₂r₁ᵀ)` with `R = P⊥VQ`,
/// and the trace factor is `|1 − δq| / 2`.
fn rank_two_update(s: &CovarianceState, t1: &DVector<f64>, t2: &DVector<f64>, alpha: f64, delta: f64) -> MapOutcome {
    let v = s.covariance();
    let g1 = v * t1;
    let g2 = v * t2;
    let q = t1.dot(&g2);
    let c = 1.0 - delta * q;
    if c * c < ZERO_WEIGHT_DET {
        return zero_branch();
    }
    // r_i = P⊥ V t_i
    let r1 = &g1 - t1 * t1.dot(&g1) - t2 * t2.dot(&g1);
    let r2 = &g2 - t1 * t1.dot(&g2) - t2 * t2.dot(&g2);
    // P⊥VP⊥ = V − QQᵀV − VQQᵀ + QQᵀVQQᵀ, with QᵀV = −Gᵀ and QᵀVQ = qJ.
    let mut out = v.clone();
    out.ger(1.0, t1, &g1, 1.0);
    out.ger(1.0, t2, &g2, 1.0);
    out.ger(-1.0, &g1, t1, 1.0);
    out.ger(-1.0, &g2, t2, 1.0);
    out.ger(q + alpha, t1, t2, 1.0);
    out.ger(-(q + alpha), t2, t1, 1.0);
    let k = delta / c;
    out.ger(k, &r1, &r2, 1.0);
    out.ger(-k, &r2, &r1, 1.0);
    let log_factor = libm::log(c.abs() * 0.5);
    finish(s, matkit::antisymmetrize(&out), log_factor, s.weight_phase())
}

/// Projective number measurement of a dressed mode. The bare measurement
/// blocks are conjugated by the frame `T` of the mode.
pub fn measure_dressed(
    s: &CovarianceState,
    mode: &DressedMode,
    outcome: Occupation,
) -> Result<MapOutcome> {
    check_mode(s, mode)?;
    let (t1, t2) = (mode.u() * 2.0, mode.v() * 2.0);
    let sign = outcome.sign();
    Ok(rank_two_update(s, &t1, &t2, sign, -sign))
}

/// Generic-path version of [`measure_dressed`]: the bare measurement blocks
/// conjugated by the frame `T` of the mode.
pub fn measure_dressed_generic(
    s: &CovarianceState,
    mode: &DressedMode,
    outcome: Occupation,
) -> Result<MapOutcome> {
    check_mode(s, mode)?;
    let t = mode.frame()?;
    let (t1, t2) = (t.column(0), t.column(1));
    // T A Tᵀ and T B Tᵀ for the bare blocks of mode 0.
    let a = t1 * t2.transpose() - t2 * t1.transpose();
    let b = DMatrix::identity(s.dim(), s.dim()) - t1 * t1.transpose() - t2 * t2.transpose();
    apply(&measurement_superop(a, b, outcome)?, s)
}

/// Same map as [`measure_dressed`], computed by rotating the state into the
/// mode frame, measuring bare mode 0 and rotating back.
pub fn measure_dressed_via_frame(
    s: &CovarianceState,
    mode: &DressedMode,
    outcome: Occupation,
) -> Result<MapOutcome> {
    check_mode(s, mode)?;
    let t = mode.frame()?;
    let rotated = CovarianceState::from_parts(
        AntisymMatrix::project(t.transpose() * s.covariance() * &t),
        s.log_weight(),
    )
    .with_phase(s.weight_phase());
    let out = measure_bare(&rotated, 0, outcome)?;
    Ok(MapOutcome {
        state: out.state.map(|r| {
            let v = &t * r.covariance() * t.transpose();
            CovarianceState::from_parts(AntisymMatrix::project(v), r.log_weight())
                .with_phase(r.weight_phase())
        }),
        weight: out.weight,
    })
}

/// Applies the annihilator: `ρ ↦ b ρ b†`. The weight equals `⟨b†b⟩`.
pub fn dissipate(s: &CovarianceState, mode: &DressedMode) -> Result<MapOutcome> {
    check_mode(s, mode)?;
    Ok(rank_two_update(s, &(mode.u() * 2.0), &(mode.v() * 2.0), -1.0, -1.0))
}

/// Generic-path version of [`dissipate`] with blocks `(−K, I − P, −K, 1/2)`.
pub fn dissipate_generic(s: &CovarianceState, mode: &DressedMode) -> Result<MapOutcome> {
    check_mode(s, mode)?;
    let k = mode.number_generator();
    let a = -&k;
    let b = DMatrix::identity(s.dim(), s.dim()) - mode.projector();
    let sop = GaussianSuperop::from_real(a.clone(), b, a, 0.5)?;
    apply(&sop, s)
}

fn check_mode(s: &CovarianceState, mode: &DressedMode) -> Result<()> {
    if mode.dim() != s.dim() {
        return Err(dim_err!(
            "mode has {} components, state has {} Majoranas",
            mode.dim(),
            s.dim()
        ));
    }
    Ok(())
}

/// Born probability of `outcome` for a dressed-mode measurement.
pub fn outcome_probability(s: &CovarianceState, mode: &DressedMode, outcome: Occupation) -> Result<f64> {
    let p1 = s.occupation_of_mode(mode)?;
    Ok(match outcome {
        Occupation::Occupied => p1,
        Occupation::Empty => clamp_probability(1.0 - p1)?,
    })
}

/// Unnormalized two-point function of `Σ_μ γ_μ b_μ ρ b_μ†`:
/// `F(C) = P [(C M C)ᵀ − C M C + C Tr(M C)]` with `M = Σ γ_μ w_μ w_μ†`.
pub fn channel_average_dissipative(
    s: &CovarianceState,
    jumps: &[(f64, DressedMode)],
) -> Result<CorrelationMatrix> {
    let dim = s.dim();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (rate, mode) in jumps {
        check_mode(s, mode)?;
        check_rate(*rate)?;
        m += mode.outer() * Complex64::new(*rate, 0.0);
    }
    let c = s.correlation_matrix().0;
    let cmc = &c * &m * &c;
    let tr = (&m * &c).trace();
    let p = Complex64::new(s.weight(), 0.0);
    let f = (cmc.transpose() - &cmc + &c * tr) * p;
    Ok(CorrelationMatrix(f))
}

/// Unnormalized two-point function of `Σ_μ γ_μ n_μ ρ n_μ` with `n_μ = b_μ†b_μ`.
///
/// With `û = 2u`, `v̂ = 2v`, `s = ûᵀ C v̂`, `p = (1 + i s)/2` and
/// `Q = I − P` each term is
/// `Q [(1 + i s) C − i Cᵀ K C] Q / 2 + p P + (s − i) K / 2`.
pub fn channel_average_projective(
    s: &CovarianceState,
    jumps: &[(f64, DressedMode)],
) -> Result<CorrelationMatrix> {
    let dim = s.dim();
    let c = s.correlation_matrix().0;
    let i = Complex64::new(0.0, 1.0);
    let mut f = DMatrix::<Complex64>::zeros(dim, dim);
    for (rate, mode) in jumps {
        check_mode(s, mode)?;
        check_rate(*rate)?;
        if *rate == 0.0 {
            continue;
        }
        let uh = mode.u().map(|x| Complex64::new(2.0 * x, 0.0));
        let vh = mode.v().map(|x| Complex64::new(2.0 * x, 0.0));
        let sv = (uh.transpose() * &c * &vh)[(0, 0)];
        let k = matkit::complexify(&mode.number_generator());
        let p = matkit::complexify(&mode.projector());
        let q = DMatrix::<Complex64>::identity(dim, dim) - &p;
        let inner = &c * (Complex64::new(1.0, 0.0) + i * sv) - c.transpose() * &k * &c * i;
        let term = &q * inner * &q * Complex64::new(0.5, 0.0)
            + &p * ((Complex64::new(1.0, 0.0) + i * sv) * 0.5)
            + &k * ((sv - i) * 0.5);
        f += term * Complex64::new(*rate, 0.0);
    }
    Ok(CorrelationMatrix(f * Complex64::new(s.weight(), 0.0)))
}

fn check_rate(rate: f64) -> Result<()> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(invalid!("rate must be non-negative and finite, got {rate}"));
    }
    Ok(())
}

/// Pairs each jump mode with its rate; convenience for the channel averages.
pub fn weighted_modes(rates: &[f64], modes: &[DressedMode]) -> Result<Vec<(f64, DressedMode)>> {
    if rates.len() != modes.len() {
        return Err(dim_err!("{} rates for {} modes", rates.len(), modes.len()));
    }
    Ok(rates.iter().copied().zip(modes.iter().cloned()).collect())
}
