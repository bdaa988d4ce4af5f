//! Dense real/complex kernels specialized for antisymmetric structure.
//!
//! Everything here works on `nalgebra::DMatrix` values. The Pfaffian uses a
//! Parlett-Reid style skew-symmetric reduction with partial pivoting, the
//! exponential of a real antisymmetric matrix uses scaling-and-squaring, and
//! linear solves go through a pivoted LU factorization that also reports a
//! 1-norm condition estimate.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{dim_err, invalid, Error, Result};

/// Absolute antisymmetry tolerance used when validating user matrices.
pub const ANTISYM_TOL: f64 = 1e-12;

/// Largest condition number accepted by [`solve_linear`].
pub const MAX_CONDITION: f64 = 1e12;

/// Scalar types the generic kernels run on (`f64` and `Complex64`).
pub trait Scalar: ComplexField<RealField = f64> + Copy {}
impl<T: ComplexField<RealField = f64> + Copy> Scalar for T {}

/// Real antisymmetric matrix of even dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct AntisymMatrix(DMatrix<f64>);

impl AntisymMatrix {
    /// Validates `m` and stores its antisymmetric part `(m - mᵀ)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_even_square(&m)?;
        if m.iter().any(|x| !x.is_finite()) {
            return Err(invalid!("matrix has non-finite entries"));
        }
        let defect = antisymmetry_defect(&m);
        let scale = max_abs(&m).max(1.0);
        if defect > ANTISYM_TOL * scale {
            return Err(invalid!("matrix is not antisymmetric (defect {defect:e})"));
        }
        Ok(Self::project(m))
    }

    /// Stores `(m - mᵀ)/2` without a tolerance check.
    pub fn project(m: DMatrix<f64>) -> Self {
        Self(antisymmetrize(&m))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }
}

impl AsRef<DMatrix<f64>> for AntisymMatrix {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

fn check_even_square<T: nalgebra::Scalar>(m: &DMatrix<T>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(dim_err!("matrix is {}x{}, expected square", m.nrows(), m.ncols()));
    }
    if m.nrows() == 0 || m.nrows() % 2 != 0 {
        return Err(dim_err!("dimension {} is not a positive even number", m.nrows()));
    }
    Ok(())
}

/// `(m - mᵀ)/2`.
pub fn antisymmetrize<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = T::from_real(0.5);
    (m - m.transpose()) * half
}

/// One Newton–Schulz step `V(3I + V²)/2` toward the nearest orthogonal
/// antisymmetric matrix. Squares the defect `‖V² + I‖` of a near-pure covariance.
pub fn purify_antisym(v: &DMatrix<f64>) -> DMatrix<f64> {
    let n = v.nrows();
    let mut w = v * v;
    for i in 0..n {
        w[(i, i)] += 3.0;
    }
    antisymmetrize(&(v * w * 0.5))
}

/// Largest entry of `|m + mᵀ|`.
pub fn antisymmetry_defect<T: Scalar>(m: &DMatrix<T>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] + m[(j, i)]).modulus());
        }
    }
    worst
}

/// Largest entry modulus.
pub fn max_abs<T: Scalar>(m: &DMatrix<T>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.modulus()))
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((*x - *y).modulus()))
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1<T: Scalar>(m: &DMatrix<T>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Promotes a real matrix to complex.
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Pfaffian of an even-dimensional antisymmetric matrix.
pub fn pfaffian<T: Scalar>(m: &DMatrix<T>) -> Result<T> {
    check_even_square(m)?;
    let defect = antisymmetry_defect(m);
    let scale = max_abs(m).max(1.0);
    if defect > ANTISYM_TOL * scale {
        return Err(invalid!("matrix is not antisymmetric (defect {defect:e})"));
    }
    let mut work = antisymmetrize(m);
    Ok(pfaffian_in_place(&mut work))
}

/// Parlett-Reid reduction. Destroys `a`; assumes it is antisymmetric.
fn pfaffian_in_place<T: Scalar>(a: &mut DMatrix<T>) -> T {
    let n = a.nrows();
    let mut pf = T::one();
    let mut tau: Vec<T> = vec![T::zero(); n];
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].modulus();
        for i in k + 2..n {
            let m = a[(i, k)].modulus();
            if m > best {
                best = m;
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        if best == 0.0 {
            return T::zero();
        }
        let piv = a[(k, k + 1)];
        pf *= piv;
        if k + 2 < n {
            for i in k + 2..n {
                tau[i] = a[(k, i)] / piv;
            }
            for j in k + 2..n {
                let col_j = a[(j, k + 1)];
                let tau_j = tau[j];
                for i in k + 2..n {
                    let upd = tau[i] * col_j - a[(i, k + 1)] * tau_j;
                    a[(i, j)] += upd;
                }
            }
        }
        k += 2;
    }
    pf
}

/// Determinant through LU.
pub fn determinant<T: Scalar>(m: &DMatrix<T>) -> T {
    m.clone().determinant()
}

/// `exp(t·h)` for real antisymmetric `h`; the result is orthogonal.
pub fn expm_antisym(h: &AntisymMatrix, t: f64) -> Result<DMatrix<f64>> {
    if !t.is_finite() || h.as_matrix().iter().any(|x| !x.is_finite()) {
        return Err(invalid!("non-finite generator or time"));
    }
    let n = h.dim();
    let mut a = h.as_matrix() * t;
    let nrm = norm1(&a);
    let mut squarings = 0u32;
    if nrm > 0.25 {
        squarings = libm::ceil(libm::log2(nrm / 0.25)) as u32;
        a /= libm::pow(2.0, squarings as f64);
    }
    let id = DMatrix::<f64>::identity(n, n);
    // Horner form of the degree-12 Taylor polynomial.
    let mut r = id.clone();
    for k in (1..=12).rev() {
        r = &id + (&a * &r) / (k as f64);
    }
    for _ in 0..squarings {
        r = &r * &r;
    }
    for _ in 0..3 {
        let gram = r.transpose() * &r;
        if max_abs_diff(&gram, &id) <= 1e-14 {
            break;
        }
        r = &r * (&id * 3.0 - gram) * 0.5;
    }
    Ok(r)
}

/// Orthogonal `T` whose first two columns are `2u` and `2v`.
///
/// For the 2×2n matrix `M` with rows `u`, `v` this gives
/// `M·T = [diag(1/2, 1/2) | 0]`. Built from two Householder reflections, each
/// reflecting toward the positive coordinate axis.
pub fn householder_frame(u: &DVector<f64>, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = u.len();
    if v.len() != n || n < 2 || n % 2 != 0 {
        return Err(dim_err!("frame vectors must share an even length >= 2"));
    }
    const TOL: f64 = 1e-10;
    if (u.norm() - 0.5).abs() > TOL || (v.norm() - 0.5).abs() > TOL || u.dot(v).abs() > TOL {
        return Err(invalid!(
            "frame vectors violate uᵀv = 0, ‖u‖ = ‖v‖ = 1/2 (‖u‖={}, ‖v‖={}, uᵀv={})",
            u.norm(),
            v.norm(),
            u.dot(v)
        ));
    }
    let uh = u * 2.0;
    let vh = v * 2.0;
    let p1 = reflector_to_axis(&uh, 0);
    let mut z = vh.clone();
    if let Some(p) = &p1 {
        reflect_vector(p, &mut z);
    }
    z[0] = 0.0;
    let zn = z.norm();
    z /= zn;
    let p2 = reflector_to_axis(&z, 1);
    let mut t = DMatrix::<f64>::identity(n, n);
    if let Some(p) = &p2 {
        reflect_rows(p, &mut t);
    }
    if let Some(p) = &p1 {
        reflect_rows(p, &mut t);
    }
    Ok(t)
}

/// Householder vector `p` with `(I - 2ppᵀ/pᵀp) x = e_k` for unit `x`
/// (entries below `k` are assumed zero). `None` when `x` already equals `e_k`.
fn reflector_to_axis(x: &DVector<f64>, k: usize) -> Option<DVector<f64>> {
    let mut p = x.clone();
    let rest: f64 = x
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, v)| v * v)
        .sum();
    p[k] = if x[k] > 0.0 { -rest / (1.0 + x[k]) } else { x[k] - 1.0 };
    if p.norm_squared() < 1e-300 {
        None
    } else {
        Some(p)
    }
}

fn reflect_vector(p: &DVector<f64>, x: &mut DVector<f64>) {
    let s = 2.0 * p.dot(x) / p.norm_squared();
    x.axpy(-s, p, 1.0);
}

/// `m ← (I - 2ppᵀ/pᵀp) m`.
fn reflect_rows(p: &DVector<f64>, m: &mut DMatrix<f64>) {
    let pp = p.norm_squared();
    let w = m.transpose() * p;
    m.ger(-2.0 / pp, p, &w, 1.0);
}

/// Pivoted LU factorization `P·A = L·U`.
#[derive(Clone, Debug)]
pub struct Lu<T: Scalar> {
    lu: DMatrix<T>,
    perm: Vec<usize>,
    parity: bool,
    anorm1: f64,
    exact_singular: bool,
}

impl<T: Scalar> Lu<T> {
    pub fn new(a: &DMatrix<T>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(dim_err!("LU of a non-square {}x{} matrix", a.nrows(), a.ncols()));
        }
        let n = a.nrows();
        let anorm1 = norm1(a);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = false;
        let mut exact_singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].modulus();
            for i in k + 1..n {
                let m = lu[(i, k)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best == 0.0 {
                exact_singular = true;
                continue;
            }
            if p != k {
                lu.swap_rows(k, p);
                perm.swap(k, p);
                parity = !parity;
            }
            let a = lu.as_mut_slice();
            let piv = a[k * n + k];
            for f in &mut a[k * n + k + 1..(k + 1) * n] {
                *f = *f / piv;
            }
            // Column-major: column j occupies a[j*n..(j+1)*n].
            let (head, tail) = a.split_at_mut((k + 1) * n);
            let lcol = &head[k * n + k + 1..(k + 1) * n];
            for col in tail.chunks_exact_mut(n) {
                let ukj = col[k];
                if ukj.modulus() == 0.0 {
                    continue;
                }
                for (x, &l) in col[k + 1..].iter_mut().zip(lcol) {
                    *x -= l * ukj;
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            parity,
            anorm1,
            exact_singular,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    pub fn determinant(&self) -> T {
        if self.exact_singular {
            return T::zero();
        }
        let mut d = T::one();
        for i in 0..self.dim() {
            d *= self.lu[(i, i)];
        }
        if self.parity {
            -d
        } else {
            d
        }
    }

    fn solve_in_place(&self, x: &mut [T]) {
        let n = self.dim();
        let b: Vec<T> = self.perm.iter().map(|&p| x[p]).collect();
        x.copy_from_slice(&b);
        let a = self.lu.as_slice();
        for j in 0..n {
            let xj = x[j];
            for (xi, &l) in x[j + 1..].iter_mut().zip(&a[j * n + j + 1..(j + 1) * n]) {
                *xi -= l * xj;
            }
        }
        for j in (0..n).rev() {
            x[j] /= a[j * n + j];
            let xj = x[j];
            for (xi, &u) in x[..j].iter_mut().zip(&a[j * n..j * n + j]) {
                *xi -= u * xj;
            }
        }
    }

    /// Solves `Aᴴ x = b`.
    fn solve_adjoint_in_place(&self, x: &mut [T]) {
        let n = self.dim();
        // Uᴴ y = b
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(j, i)].conjugate() * x[j];
            }
            x[i] = s / self.lu[(i, i)].conjugate();
        }
        // Lᴴ z = y
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)].conjugate() * x[j];
            }
            x[i] = s;
        }
        let mut out = vec![T::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = x[k];
        }
        x.copy_from_slice(&out);
    }

    /// 1-norm condition estimate (Hager's method); infinite when singular.
    pub fn condition_estimate(&self) -> f64 {
        if self.exact_singular {
            return f64::INFINITY;
        }
        let n = self.dim();
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![T::from_real(1.0 / n as f64); n];
        let mut est = 0.0;
        for iter in 0..5 {
            let mut y = x.clone();
            self.solve_in_place(&mut y);
            let ynorm: f64 = y.iter().map(|v| v.modulus()).sum();
            if iter > 0 && ynorm <= est {
                break;
            }
            est = ynorm;
            let mut xi: Vec<T> = y
                .iter()
                .map(|v| {
                    let m = v.modulus();
                    if m == 0.0 {
                        T::one()
                    } else {
                        *v / T::from_real(m)
                    }
                })
                .collect();
            self.solve_adjoint_in_place(&mut xi);
            let (jmax, zmax) = xi
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.modulus()))
                .fold((0, -1.0), |acc, e| if e.1 > acc.1 { e } else { acc });
            let ztx: f64 = xi
                .iter()
                .zip(x.iter())
                .map(|(z, xv)| (z.conjugate() * *xv).real())
                .sum();
            if zmax <= ztx {
                break;
            }
            x = vec![T::zero(); n];
            x[jmax] = T::one();
        }
        if !est.is_finite() {
            return f64::INFINITY;
        }
        est * self.anorm1
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, rhs: &DMatrix<T>) -> Result<DMatrix<T>> {
        if rhs.nrows() != self.dim() {
            return Err(dim_err!("right-hand side has {} rows, expected {}", rhs.nrows(), self.dim()));
        }
        if self.exact_singular {
            return Err(Error::Singular { condition: f64::INFINITY });
        }
        let mut out = rhs.clone();
        if self.dim() > 0 {
            for col in out.as_mut_slice().chunks_exact_mut(self.dim()) {
                self.solve_in_place(col);
            }
        }
        Ok(out)
    }
}

/// Solves `mat · X = rhs`, rejecting systems with condition estimate above
/// [`MAX_CONDITION`].
pub fn solve_linear<T: Scalar>(mat: &DMatrix<T>, rhs: &DMatrix<T>) -> Result<DMatrix<T>> {
    let lu = Lu::new(mat)?;
    let cond = lu.condition_estimate();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::Singular { condition: cond });
    }
    lu.solve(rhs)
}

/// Eigenvalues of a Hermitian matrix, ascending. The input is Hermitized first.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let h = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Singular values, descending.
pub fn singular_values<T: Scalar>(m: &DMatrix<T>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Largest singular value.
pub fn spectral_norm<T: Scalar>(m: &DMatrix<T>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Antisymmetric matrix `scale · (G − Gᵀ) / 2` with standard normal `G`.
pub fn random_antisym<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> AntisymMatrix {
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..j {
            let x: f64 = rng.sample(StandardNormal);
            m[(i, j)] = scale * x / core::f64::consts::SQRT_2;
            m[(j, i)] = -m[(i, j)];
        }
    }
    AntisymMatrix(m)
}

/// Scaling-and-squaring Taylor exponential of a general complex matrix.
pub fn expm_complex(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let nrm = norm1(a);
    let mut squarings = 0u32;
    let mut scaled = a.clone();
    if nrm > 0.25 {
        squarings = libm::ceil(libm::log2(nrm / 0.25)) as u32;
        scaled /= Complex64::new(libm::pow(2.0, squarings as f64), 0.0);
    }
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut r = id.clone();
    for k in (1..=14).rev() {
        r = &id + (&scaled * &r) / Complex64::new(k as f64, 0.0);
    }
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_antisym(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let x: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = x;
                m[(j, i)] = -x;
            }
        }
        m
    }

    #[test]
    fn pfaffian_two_by_two() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 5.0, -5.0, 0.0]);
        assert_eq!(pfaffian(&m).unwrap(), 5.0);
    }

    #[test]
    fn pfaffian_four_by_four_cofactor() {
        let (a12, a13, a14, a23, a24, a34) = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, a12, a13, a14, -a12, 0.0, a23, a24, -a13, -a23, 0.0, a34, -a14, -a24, -a34,
                0.0,
            ],
        );
        let expected = a12 * a34 - a13 * a24 + a14 * a23;
        assert_eq!(expected, 8.0);
        assert!((pfaffian(&m).unwrap() - 8.0).abs() < 1e-14);
    }

    #[test]
    fn pfaffian_squared_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [6, 10] {
            let m = random_antisym(n, &mut rng);
            let pf = pfaffian(&m).unwrap();
            let det = determinant(&m);
            assert!((pf * pf - det).abs() <= 1e-8 * det.abs());
        }
    }

    #[test]
    fn pfaffian_rejects_bad_input() {
        let odd = DMatrix::<f64>::zeros(3, 3);
        assert!(matches!(pfaffian(&odd), Err(Error::Dimension(_))));
        let sym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(pfaffian(&sym), Err(Error::Validation(_))));
    }

    #[test]
    fn pfaffian_complex_matches_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let re = random_antisym(6, &mut rng);
        let im = random_antisym(6, &mut rng);
        let m = DMatrix::from_fn(6, 6, |i, j| Complex64::new(re[(i, j)], im[(i, j)]));
        let pf = pfaffian(&m).unwrap();
        let det = determinant(&m);
        assert!((pf * pf - det).norm() <= 1e-10 * det.norm());
    }

    #[test]
    fn expm_zero_and_rotation() {
        let z = AntisymMatrix::zeros(4);
        let r = expm_antisym(&z, 1.3).unwrap();
        assert!(max_abs_diff(&r, &DMatrix::identity(4, 4)) < 1e-15);

        let theta = 0.7;
        let h = AntisymMatrix::new(DMatrix::from_row_slice(2, 2, &[0.0, theta, -theta, 0.0])).unwrap();
        let r = expm_antisym(&h, 1.0).unwrap();
        let (c, s) = (libm::cos(theta), libm::sin(theta));
        let expected = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        assert!(max_abs_diff(&r, &expected) < 1e-14);
    }

    #[test]
    fn expm_matches_low_order_taylor_at_small_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let raw = random_antisym(10, &mut rng);
        let t = 0.37;
        // Rescale so that ‖t·h‖₁ = 0.1.
        let scale = 0.1 / (norm1(&raw) * t);
        let h = AntisymMatrix::new(raw * scale).unwrap();
        let r = expm_antisym(&h, t).unwrap();
        let a = h.as_matrix() * t;
        let mut term = DMatrix::<f64>::identity(10, 10);
        let mut sum = term.clone();
        for k in 1..=8 {
            term = &term * &a / (k as f64);
            sum += &term;
        }
        assert!(max_abs_diff(&r, &sum) < 1e-10);
        let gram = &r * r.transpose();
        assert!(max_abs_diff(&gram, &DMatrix::identity(10, 10)) <= 1e-10);
    }

    #[test]
    fn expm_rejects_non_finite() {
        let h = AntisymMatrix::zeros(2);
        assert!(expm_antisym(&h, f64::NAN).is_err());
    }

    #[test]
    fn householder_identity_case() {
        let mut u = DVector::zeros(6);
        let mut v = DVector::zeros(6);
        u[0] = 0.5;
        v[1] = 0.5;
        let t = householder_frame(&u, &v).unwrap();
        assert!(max_abs_diff(&t, &DMatrix::identity(6, 6)) < 1e-15);
    }

    #[test]
    fn householder_rejects_parallel_vectors() {
        let mut u = DVector::zeros(4);
        u[0] = 0.5;
        assert!(matches!(householder_frame(&u, &u), Err(Error::Validation(_))));
    }

    #[test]
    fn householder_random_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = DVector::from_fn(8, |_, _| rng.random_range(-1.0..1.0));
            let b = DVector::from_fn(8, |_, _| rng.random_range(-1.0..1.0));
            let u = a.normalize();
            let v = (&b - &u * u.dot(&b)).normalize();
            let (u, v) = (u * 0.5, v * 0.5);
            let t = householder_frame(&u, &v).unwrap();
            assert!(max_abs_diff(&(&t * t.transpose()), &DMatrix::identity(8, 8)) <= 1e-10);
            let mut m = DMatrix::zeros(2, 8);
            m.set_row(0, &u.transpose());
            m.set_row(1, &v.transpose());
            let mut target = DMatrix::zeros(2, 8);
            target[(0, 0)] = 0.5;
            target[(1, 1)] = 0.5;
            assert!(max_abs_diff(&(m * &t), &target) <= 1e-10);
        }
    }

    #[test]
    fn solve_identity_and_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rhs = DMatrix::from_fn(8, 3, |_, _| rng.random_range(-1.0..1.0));
        let x = solve_linear(&DMatrix::identity(8, 8), &rhs).unwrap();
        assert!(max_abs_diff(&x, &rhs) < 1e-15);

        let a = DMatrix::from_fn(8, 8, |i, j| rng.random_range(-1.0..1.0) + if i == j { 4.0 } else { 0.0 });
        let x = solve_linear(&a, &rhs).unwrap();
        let resid = max_abs_diff(&(&a * &x), &rhs) / max_abs(&rhs);
        assert!(resid <= 1e-9);
    }

    #[test]
    fn solve_singular_reports_condition() {
        let a = DMatrix::<f64>::zeros(4, 4);
        let rhs = DMatrix::<f64>::identity(4, 4);
        match solve_linear(&a, &rhs) {
            Err(Error::Singular { condition }) => assert!(condition.is_infinite()),
            other => panic!("expected singular error, got {other:?}"),
        }
        let mut near = DMatrix::<f64>::identity(3, 3);
        near[(2, 2)] = 1e-15;
        assert!(matches!(solve_linear(&near, &rhs.view((0, 0), (3, 3)).into_owned()), Err(Error::Singular { .. })));
    }

    #[test]
    fn condition_estimate_is_sane() {
        let mut a = DMatrix::<f64>::identity(5, 5);
        a[(4, 4)] = 1e-3;
        let lu = Lu::new(&a).unwrap();
        let c = lu.condition_estimate();
        assert!((c - 1e3).abs() < 1e-6);
    }
}
