//! Small dense and banded kernels: LU with partial pivoting over real or
//! complex scalars, a banded LU for structured-grid operators, and complex
//! eigenvalues by shifted QR.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::Float;

use crate::{Error, Result, C64};

/// Field operations needed by the dense solvers.
pub trait Scalar:
    Copy
    + PartialEq
    + core::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        Float::abs(self)
    }
    fn is_finite_value(self) -> bool {
        Float::is_finite(self)
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Relative pivot threshold below which a matrix is reported singular.
const PIVOT_TOL: f64 = 1e-14;

/// LU factorization `PA = LU` of a dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> DenseLu<T> {
    /// Factor the `n × n` row-major matrix `a`.
    pub fn factor(n: usize, mut a: Vec<T>) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: a.len() });
        }
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.modulus()));
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Singular);
        }
        let tol = PIVOT_TOL * scale;
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].modulus();
            for r in (k + 1)..n {
                let v = a[r * n + k].modulus();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > tol) {
                return Err(Error::Singular);
            }
            piv[k] = p;
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
            }
            let d = a[k * n + k];
            for r in (k + 1)..n {
                let l = a[r * n + k] / d;
                a[r * n + k] = l;
                if l != T::zero() {
                    for c in (k + 1)..n {
                        let u = a[k * n + c];
                        a[r * n + c] -= l * u;
                    }
                }
            }
        }
        Ok(Self { n, lu: a, piv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Overwrite `b` with `A⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [T]) -> Result<()> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for r in 0..n {
            let mut s = b[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * b[c];
            }
            b[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = b[r];
            for c in (r + 1)..n {
                s -= self.lu[r * n + c] * b[c];
            }
            b[r] = s / self.lu[r * n + r];
        }
        Ok(())
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }
}

/// Solve the dense system `a x = b` in one call.
pub fn dense_solve<T: Scalar>(n: usize, a: Vec<T>, b: &[T]) -> Result<Vec<T>> {
    DenseLu::factor(n, a)?.solve(b)
}

/// Banded LU with partial pivoting (row interchanges), real entries.
///
/// Row `r` stores columns `r - kl ..= r + kl + ku`, which leaves room for the
/// fill produced by pivoting.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    /// Factor from a closure enumerating the nonzeros `(row, col, value)`.
    pub fn factor_from_entries<I>(n: usize, kl: usize, ku: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let width = 2 * kl + ku + 1;
        let mut data = vec![0.0; n * width];
        let mut scale = 0.0f64;
        for (r, c, v) in entries {
            if r >= n || c >= n || c + kl < r || c > r + ku {
                return Err(Error::InvalidParameter("entry outside declared band"));
            }
            data[r * width + (c + kl - r)] += v;
            scale = scale.max(Float::abs(v));
        }
        if !(scale > 0.0) {
            return Err(Error::Singular);
        }
        let tol = PIVOT_TOL * scale;
        let at = |r: usize, c: usize| r * width + (c + kl - r);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = Float::abs(data[at(k, k)]);
            for r in (k + 1)..=last_row {
                let v = Float::abs(data[at(r, k)]);
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > tol) {
                return Err(Error::Singular);
            }
            piv[k] = p;
            if p != k {
                for c in k..=last_col {
                    data.swap(at(k, c), at(p, c));
                }
            }
            let d = data[at(k, k)];
            for r in (k + 1)..=last_row {
                let l = data[at(r, k)] / d;
                data[at(r, k)] = l;
                if l != 0.0 {
                    for c in (k + 1)..=last_col {
                        let u = data[at(k, c)];
                        data[at(r, c)] -= l * u;
                    }
                }
            }
        }
        Ok(Self { n, kl, ku, width, data, piv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        let (kl, ku, width) = (self.kl, self.ku, self.width);
        let at = |r: usize, c: usize| r * width + (c + kl - r);
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            if bk != 0.0 {
                for r in (k + 1)..=(k + kl).min(n - 1) {
                    b[r] -= self.data[at(r, k)] * bk;
                }
            }
        }
        for r in (0..n).rev() {
            let mut s = b[r];
            for c in (r + 1)..=(r + kl + ku).min(n - 1) {
                s -= self.data[at(r, c)] * b[c];
            }
            b[r] = s / self.data[at(r, r)];
        }
        Ok(())
    }
}

/// Eigenvalues of a dense complex `n × n` row-major matrix.
///
/// Householder reduction to Hessenberg form followed by single-shift QR
/// with Wilkinson shifts and deflation.
pub fn eigenvalues(n: usize, a: &[C64]) -> Result<Vec<C64>> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: a.len() });
    }
    let mut h = a.to_vec();
    hessenberg(n, &mut h);
    let idx = |r: usize, c: usize| r * n + c;
    let mut eig = vec![C64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut since_deflation = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[idx(0, 0)];
            break;
        }
        // locate the start of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let sub = h[idx(lo, lo - 1)].norm();
            let diag = h[idx(lo, lo)].norm() + h[idx(lo - 1, lo - 1)].norm();
            if sub <= f64::EPSILON * diag || sub < f64::MIN_POSITIVE {
                h[idx(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[idx(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        iter += 1;
        since_deflation += 1;
        if iter > 100 * n.max(4) {
            return Err(Error::Singular);
        }
        let mu = if since_deflation % 11 == 10 {
            // exceptional shift
            h[idx(hi, hi)] + C64::new(h[idx(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h[idx(hi - 1, hi - 1)], h[idx(hi - 1, hi)], h[idx(hi, hi - 1)], h[idx(hi, hi)])
        };
        qr_step(n, &mut h, lo, hi, mu);
    }
    Ok(eig)
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(n: usize, a: &[C64]) -> Result<f64> {
    Ok(eigenvalues(n, a)?.iter().fold(0.0f64, |m, z| m.max(z.norm())))
}

fn hessenberg(n: usize, h: &mut [C64]) {
    let idx = |r: usize, c: usize| r * n + c;
    for k in 0..n.saturating_sub(2) {
        let mut norm2 = 0.0;
        for r in (k + 1)..n {
            norm2 += h[idx(r, k)].norm_sqr();
        }
        let x0 = h[idx(k + 1, k)];
        let norm = Float::sqrt(norm2);
        if norm == 0.0 {
            continue;
        }
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let mut v = vec![C64::new(0.0, 0.0); n];
        for r in (k + 1)..n {
            v[r] = h[idx(r, k)];
        }
        v[k + 1] += phase * norm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H <- (I - 2vv^H/|v|^2) H (I - 2vv^H/|v|^2)
        for c in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for r in (k + 1)..n {
                s += v[r].conj() * h[idx(r, c)];
            }
            let s = s * (2.0 / vnorm2);
            for r in (k + 1)..n {
                h[idx(r, c)] -= v[r] * s;
            }
        }
        for r in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for c in (k + 1)..n {
                s += h[idx(r, c)] * v[c];
            }
            let s = s * (2.0 / vnorm2);
            for c in (k + 1)..n {
                h[idx(r, c)] -= s * v[c].conj();
            }
        }
        for r in (k + 2)..n {
            h[idx(r, k)] = C64::new(0.0, 0.0);
        }
    }
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_step(n: usize, h: &mut [C64], lo: usize, hi: usize, mu: C64) {
    let idx = |r: usize, c: usize| r * n + c;
    for k in lo..=hi {
        h[idx(k, k)] -= mu;
    }
    let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let x = h[idx(k, k)];
        let y = h[idx(k + 1, k)];
        let r = Float::sqrt(x.norm_sqr() + y.norm_sqr());
        let (c, s) = if r == 0.0 {
            (1.0, C64::new(0.0, 0.0))
        } else if x.norm() == 0.0 {
            (0.0, C64::new(1.0, 0.0))
        } else {
            let xn = x.norm();
            (xn / r, (x / xn) * y.conj() / r)
        };
        for col in k..=hi {
            let p = h[idx(k, col)];
            let q = h[idx(k + 1, col)];
            h[idx(k, col)] = p * c + s * q;
            h[idx(k + 1, col)] = -s.conj() * p + q * c;
        }
        rots.push((c, s));
    }
    for (j, &(c, s)) in rots.iter().enumerate() {
        let k = lo + j;
        for row in lo..=(k + 1).min(hi) {
            let p = h[idx(row, k)];
            let q = h[idx(row, k + 1)];
            h[idx(row, k)] = p * c + q * s.conj();
            h[idx(row, k + 1)] = -p * s + q * c;
        }
    }
    for k in lo..=hi {
        h[idx(k, k)] += mu;
    }
}
