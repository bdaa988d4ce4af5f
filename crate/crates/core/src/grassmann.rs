//! Exact Grassmann-algebra arithmetic and Berezin integration over at most
//! [`MAX_GENERATORS`] generators. Monomials are bitmasks of generator indices
//! in ascending order.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{dim_err, invalid, Error, Result};
use crate::matkit::{self, Lu};

pub const MAX_GENERATORS: usize = 12;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Multivector {
    n_gen: usize,
    terms: BTreeMap<u32, Complex64>,
}

/// Sign of `x_a x_b` brought to ascending order, zero if they share a generator.
fn merge_sign(a: u32, b: u32) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    // Each generator of `b` passes every larger generator of `a`.
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let k = rest.trailing_zeros();
        swaps += (a >> (k + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 { 1.0 } else { -1.0 }
}

impl Multivector {
    pub fn zero(n_gen: usize) -> Result<Self> {
        if n_gen > MAX_GENERATORS {
            return Err(Error::Capacity { n: n_gen, max: MAX_GENERATORS });
        }
        Ok(Self { n_gen, terms: BTreeMap::new() })
    }

    pub fn scalar(n_gen: usize, c: Complex64) -> Result<Self> {
        let mut m = Self::zero(n_gen)?;
        m.add_term(0, c);
        Ok(m)
    }

    pub fn generator(n_gen: usize, k: usize) -> Result<Self> {
        if k >= n_gen {
            return Err(invalid!("generator {k} out of range for {n_gen}"));
        }
        let mut m = Self::zero(n_gen)?;
        m.add_term(1 << k, Complex64::new(1.0, 0.0));
        Ok(m)
    }

    /// `x_{i₁} x_{i₂} ⋯` in the listed order; repeated indices give zero.
    pub fn monomial(n_gen: usize, indices: &[usize]) -> Result<Self> {
        let mut out = Self::scalar(n_gen, Complex64::new(1.0, 0.0))?;
        for &k in indices {
            out = gmul(&out, &Self::generator(n_gen, k)?)?;
        }
        Ok(out)
    }

    /// `Σ_k c_k x_k`.
    pub fn linear(n_gen: usize, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != n_gen {
            return Err(dim_err!("{} coefficients for {n_gen} generators", coeffs.len()));
        }
        let mut m = Self::zero(n_gen)?;
        for (k, c) in coeffs.iter().enumerate() {
            m.add_term(1 << k, *c);
        }
        Ok(m)
    }

    pub fn n_gen(&self) -> usize {
        self.n_gen
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, *c))
    }

    pub fn coefficient(&self, mask: u32) -> Complex64 {
        self.terms.get(&mask).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, mask: u32, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let e = self.terms.entry(mask).or_default();
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&mask);
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same(self, other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self { n_gen: self.n_gen, terms: BTreeMap::new() };
        for (m, x) in self.terms() {
            out.add_term(m, x * c);
        }
        out
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Left derivative `∂/∂x_k`.
    pub fn derivative(&self, k: usize) -> Result<Self> {
        if k >= self.n_gen {
            return Err(invalid!("generator {k} out of range for {}", self.n_gen));
        }
        let bit = 1u32 << k;
        let mut out = Self { n_gen: self.n_gen, terms: BTreeMap::new() };
        for (m, c) in self.terms() {
            if m & bit == 0 {
                continue;
            }
            let before = (m & (bit - 1)).count_ones();
            let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
            out.add_term(m & !bit, c * sign);
        }
        Ok(out)
    }

    /// `exp(a)` for an even element with vanishing body is a finite sum;
    /// a scalar part is factored out as `e^{a₀}`.
    pub fn exp(&self) -> Result<Self> {
        if self.terms.keys().any(|m| m.count_ones() % 2 == 1) {
            return Err(invalid!("exponential is only defined here for even elements"));
        }
        let body = self.coefficient(0);
        let mut nil = self.clone();
        nil.terms.remove(&0);
        let mut out = Self::scalar(self.n_gen, Complex64::new(1.0, 0.0))?;
        let mut power = out.clone();
        for k in 1..=self.n_gen / 2 {
            power = gmul(&power, &nil)?.scale(Complex64::new(1.0 / k as f64, 0.0));
            if power.is_zero() {
                break;
            }
            out = out.add(&power)?;
        }
        Ok(out.scale(body.exp()))
    }
}

fn check_same(a: &Multivector, b: &Multivector) -> Result<()> {
    if a.n_gen != b.n_gen {
        return Err(dim_err!("generator counts differ: {} vs {}", a.n_gen, b.n_gen));
    }
    Ok(())
}

/// Grassmann product.
pub fn gmul(a: &Multivector, b: &Multivector) -> Result<Multivector> {
    check_same(a, b)?;
    let mut out = Multivector { n_gen: a.n_gen, terms: BTreeMap::new() };
    for (ma, ca) in a.terms() {
        for (mb, cb) in b.terms() {
            let s = merge_sign(ma, mb);
            if s != 0.0 {
                out.add_term(ma | mb, ca * cb * s);
            }
        }
    }
    Ok(out)
}

/// Applies `∂/∂x_k` for each `k` in `order`, first entry first.
pub fn berezin_integrate(a: &Multivector, order: &[usize]) -> Result<Multivector> {
    for (i, k) in order.iter().enumerate() {
        if order[..i].contains(k) {
            return Err(invalid!("generator {k} listed twice"));
        }
    }
    let mut out = a.clone();
    for &k in order {
        out = out.derivative(k)?;
    }
    Ok(out)
}

/// Derivative order realizing the measure `dx_{lo} dx_{lo+1} ⋯ dx_{hi−1}`
/// (the rightmost differential acts first).
pub fn measure(lo: usize, hi: usize) -> Vec<usize> {
    (lo..hi).rev().collect()
}

/// `∫dx₁⋯dx_m f`.
pub fn integrate_full(a: &Multivector) -> Result<Complex64> {
    Ok(berezin_integrate(a, &measure(0, a.n_gen))?.coefficient(0))
}

/// `x ↦ Ux` applied to every generator.
pub fn substitute(a: &Multivector, u: &DMatrix<Complex64>) -> Result<Multivector> {
    let n = a.n_gen;
    if u.nrows() != n || u.ncols() != n {
        return Err(dim_err!("substitution is {}x{}, algebra has {n} generators", u.nrows(), u.ncols()));
    }
    let images: Vec<Multivector> = (0..n)
        .map(|i| Multivector::linear(n, &u.row(i).iter().copied().collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let mut out = Multivector::zero(n)?;
    for (m, c) in a.terms() {
        let mut term = Multivector::scalar(n, c)?;
        let mut rest = m;
        while rest != 0 {
            let k = rest.trailing_zeros() as usize;
            term = gmul(&term, &images[k])?;
            rest &= rest - 1;
        }
        out = out.add(&term)?;
    }
    Ok(out)
}

/// `exp((i/2) Σ_{jk} A_{jk} x_j x_k)` on the first `A.nrows()` generators of an `n_gen` algebra.
fn gaussian_exponent(a: &DMatrix<Complex64>, n_gen: usize) -> Result<Multivector> {
    let m = a.nrows();
    let mut q = Multivector::zero(n_gen)?;
    for j in 0..m {
        for k in j + 1..m {
            // (i/2)(A_jk x_j x_k + A_kj x_k x_j) = i A_jk x_j x_k
            q.add_term((1 << j) | (1 << k), I * a[(j, k)]);
        }
    }
    Ok(q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianCheck {
    /// Integral of the exact finite expansion, as a polynomial in the sources.
    pub expansion: Multivector,
    /// Closed form `(−i)ⁿ Pf(A) exp((i/2) yᵀA⁻¹y)`.
    pub closed_form: Multivector,
    pub difference: f64,
}

/// Expands `exp((i/2)xᵀAx + i x·y)`, integrates over `x` with the full measure
/// and compares with the Pfaffian closed form. Sources `y` occupy generators
/// `2n..4n`; pass `with_sources = false` for the sourceless identity.
pub fn gaussian_integral_check(a: &DMatrix<Complex64>, with_sources: bool) -> Result<GaussianCheck> {
    let m = a.nrows();
    if a.ncols() != m || m % 2 != 0 {
        return Err(dim_err!("expected an even square matrix, got {}x{}", m, a.ncols()));
    }
    if matkit::antisymmetry_defect(a) > 1e-12 * (1.0 + matkit::max_abs(a)) {
        return Err(invalid!("matrix is not antisymmetric"));
    }
    let n_gen = if with_sources { 2 * m } else { m };
    if n_gen > MAX_GENERATORS {
        return Err(Error::Capacity { n: n_gen, max: MAX_GENERATORS });
    }
    let mut exponent = gaussian_exponent(a, n_gen)?;
    if with_sources {
        for j in 0..m {
            exponent.add_term((1 << j) | (1 << (m + j)), I);
        }
    }
    let expansion = berezin_integrate(&exponent.exp()?, &measure(0, m))?;
    let n = m / 2;
    let pf = pfaffian_complex(a)?;
    let prefactor = (-I).powu(n as u32) * pf;
    let closed_form = if with_sources {
        let lu = Lu::new(a)?;
        let inv = lu.solve(&DMatrix::identity(m, m))?;
        // (i/2) yᵀ A⁻¹ y on the source block.
        let mut q = Multivector::zero(n_gen)?;
        for j in 0..m {
            for k in j + 1..m {
                q.add_term((1 << (m + j)) | (1 << (m + k)), I * inv[(j, k)]);
            }
        }
        q.exp()?.scale(prefactor)
    } else {
        Multivector::scalar(n_gen, prefactor)?
    };
    let difference = expansion.sub(&closed_form)?.max_abs();
    Ok(GaussianCheck { expansion, closed_form, difference })
}

/// Pfaffian of a complex antisymmetric matrix by expansion along the first row.
/// Exponential cost; intended for the small matrices of this module.
pub fn pfaffian_complex(a: &DMatrix<Complex64>) -> Result<Complex64> {
    let m = a.nrows();
    if m % 2 != 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if m > MAX_GENERATORS {
        return Err(Error::Capacity { n: m, max: MAX_GENERATORS });
    }
    let idx: Vec<usize> = (0..m).collect();
    Ok(pf_rec(a, &idx))
}

fn pf_rec(a: &DMatrix<Complex64>, idx: &[usize]) -> Complex64 {
    if idx.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    let first = idx[0];
    let mut total = Complex64::new(0.0, 0.0);
    for j in 1..idx.len() {
        let rest: Vec<usize> = idx[1..].iter().copied().filter(|&k| k != idx[j]).collect();
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        total += a[(first, idx[j])] * pf_rec(a, &rest) * sign;
    }
    total
}

/// `δ(x − y) = (x_{n−1} − y_{n−1}) ⋯ (x_0 − y_0)` with `x_k` on generator `k`
/// and `y_k` on generator `n + k`; sifts `∫dx_0⋯dx_{n−1} δ(x−y) f(x) = f(y)`.
pub fn delta(n: usize) -> Result<Multivector> {
    let n_gen = 2 * n;
    let mut out = Multivector::scalar(n_gen, Complex64::new(1.0, 0.0))?;
    for k in (0..n).rev() {
        let diff = Multivector::generator(n_gen, k)?.sub(&Multivector::generator(n_gen, n + k)?)?;
        out = gmul(&out, &diff)?;
    }
    Ok(out)
}

/// Renames generator `k` to `n + k` for `k < n` in a `2n`-generator element
/// supported on the first block.
pub fn shift_block(a: &Multivector, n: usize) -> Result<Multivector> {
    if a.n_gen != 2 * n {
        return Err(dim_err!("expected {} generators, got {}", 2 * n, a.n_gen));
    }
    let low = (1u32 << n) - 1;
    let mut out = Multivector::zero(a.n_gen)?;
    for (m, c) in a.terms() {
        if m & !low != 0 {
            return Err(invalid!("element is not supported on the first block"));
        }
        out.add_term(m << n, c);
    }
    Ok(out)
}
