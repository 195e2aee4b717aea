//! Closed-form small-ε results for maximally overlapped `ℓ×1` blocks and
//! related constants, used as oracles for the numerical symbols.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::model::Discretization;
use crate::{Error, Result, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn cis(t: f64) -> C64 {
    C64::from_polar(1.0, t)
}

/// Per-frequency quantities shared by the `ℓ×1` expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryContext {
    pub ell: usize,
    /// `e^{iω₁}`.
    pub a: C64,
    /// `−1 + ā`.
    pub f: C64,
    /// `½ e^{−iω₂}(cos ω₁ − 1)`.
    pub delta0: C64,
    /// `−e^{−iω₂}(cos ω₁ + 2)`.
    pub delta1: C64,
    /// First component of `B₀⁻¹ D 1`.
    pub z1: C64,
}

impl TheoryContext {
    pub fn new(ell: usize, w1: f64, w2: f64) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidParameter("block length must be positive"));
        }
        let a = cis(w1);
        let e = cis(-w2);
        Ok(Self {
            ell,
            a,
            f: a.conj() - 1.0,
            delta0: e * (0.5 * (Float::cos(w1) - 1.0)),
            delta1: -e * (Float::cos(w1) + 2.0),
            z1: z1(ell, a),
        })
    }
}

/// The `ℓ×ℓ` matrix `B₀`: second-difference tridiagonal with first row
/// `(−1, 1, 0, …)`. Row-major.
pub fn b0_matrix(ell: usize) -> Vec<f64> {
    let mut m = vec![0.0; ell * ell];
    for r in 0..ell {
        m[r * ell + r] = -2.0;
        if r > 0 {
            m[r * ell + r - 1] = 1.0;
        }
        if r + 1 < ell {
            m[r * ell + r + 1] = 1.0;
        }
    }
    m[0] = -1.0;
    m
}

/// Right-hand sides with closed-form solutions of `B₀ x = b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaCase {
    /// `b = e₁`.
    FirstUnit,
    /// `b = e_ℓ`.
    LastUnit,
    /// `b = 1`.
    Ones,
    /// `b = k = (1, 2, …, ℓ)`.
    Ramp,
    /// `b = D 1 = (1, a, …, a^{ℓ−1})`.
    Phases,
}

impl LemmaCase {
    pub const ALL: [LemmaCase; 5] =
        [LemmaCase::FirstUnit, LemmaCase::LastUnit, LemmaCase::Ones, LemmaCase::Ramp, LemmaCase::Phases];

    /// Cases are numbered 1 to 5.
    pub fn from_index(k: usize) -> Result<Self> {
        Self::ALL.get(k.wrapping_sub(1)).copied().ok_or(Error::InvalidParameter("case must be 1..=5"))
    }

    pub fn rhs(&self, ell: usize, a: C64) -> Vec<C64> {
        (1..=ell)
            .map(|k| match self {
                LemmaCase::FirstUnit => c(if k == 1 { 1.0 } else { 0.0 }),
                LemmaCase::LastUnit => c(if k == ell { 1.0 } else { 0.0 }),
                LemmaCase::Ones => c(1.0),
                LemmaCase::Ramp => c(k as f64),
                LemmaCase::Phases => a.powu(k as u32 - 1),
            })
            .collect()
    }
}

/// Closed-form solution of `B₀ x = b` and its first component.
pub fn lemma_b1_solve(case: LemmaCase, ell: usize, a: C64) -> Result<(Vec<C64>, C64)> {
    if ell == 0 {
        return Err(Error::InvalidParameter("block length must be positive"));
    }
    let l = ell as f64;
    let x: Vec<C64> = match case {
        LemmaCase::FirstUnit => (1..=ell).map(|k| c(k as f64 - (l + 1.0))).collect(),
        LemmaCase::LastUnit => vec![c(-1.0); ell],
        LemmaCase::Ones => (1..=ell).map(|k| ones_solution(k as f64, l)).collect(),
        LemmaCase::Ramp => (1..=ell)
            .map(|k| {
                let k = k as f64;
                c(k * k * k / 6.0 - k / 6.0 - l * (l + 1.0) * (l + 2.0) / 6.0)
            })
            .collect(),
        LemmaCase::Phases => {
            if (a - 1.0).norm() < NEAR_ONE {
                phases_by_sums(ell, a)
            } else {
                let am1 = a - 1.0;
                let ce = a / (am1 * am1);
                let c1 = -am1.inv();
                let c0 = am1.inv() * (1.0 + l - a.powu(ell as u32 + 1) / am1);
                (1..=ell).map(|k| ce * a.powu(k as u32 - 1) + c1 * k as f64 + c0).collect()
            }
        }
    };
    let first = x[0];
    Ok((x, first))
}

/// Below this `|a − 1|` the `(a − 1)⁻²` forms lose too many digits.
const NEAR_ONE: f64 = 0.25;

/// `x_k = −Σ_{j≥k} Σ_{i≤j} a^{i−1}`, free of cancellation near `a = 1`.
fn phases_by_sums(ell: usize, a: C64) -> Vec<C64> {
    let mut partial = Vec::with_capacity(ell);
    let (mut p, mut s) = (c(1.0), c(0.0));
    for _ in 0..ell {
        s += p;
        partial.push(s);
        p *= a;
    }
    let mut x = vec![c(0.0); ell];
    let mut acc = c(0.0);
    for k in (0..ell).rev() {
        acc -= partial[k];
        x[k] = acc;
    }
    x
}

fn ones_solution(k: f64, l: f64) -> C64 {
    c(0.5 * k * k - 0.5 * k - 0.5 * l * (l + 1.0))
}

/// `z₁(a) = (B₀⁻¹ D 1)₁ = (ℓ(a − 1) + a(1 − a^ℓ)) / (a − 1)²`, with the
/// `a = 1` limit `−½ℓ(ℓ+1)`.
pub fn z1(ell: usize, a: C64) -> C64 {
    let l = ell as f64;
    let am1 = a - 1.0;
    if am1.norm() < NEAR_ONE {
        return phases_by_sums(ell, a)[0];
    }
    (am1 * l + a * (c(1.0) - a.powu(ell as u32))) / (am1 * am1)
}

/// Solve `[B₀ + (f e₁ + δ₀ D 1) e₁ᵀ] η = ξ` by Sherman–Morrison, with
/// `D = diag(1, a, …, a^{ℓ−1})`.
pub fn sherman_morrison_solve(ell: usize, a: C64, f: C64, delta0: C64, xi: &[C64]) -> Result<Vec<C64>> {
    if xi.len() != ell {
        return Err(Error::DimensionMismatch { expected: ell, found: xi.len() });
    }
    let y = b0_inverse_apply(ell, xi);
    let (w, w1) = lemma_b1_solve(LemmaCase::FirstUnit, ell, a)?;
    let (z, zz1) = lemma_b1_solve(LemmaCase::Phases, ell, a)?;
    let den = c(1.0) + f * w1 + delta0 * zz1;
    if den.norm() < 1e-14 {
        return Err(Error::Singular);
    }
    let scale = -y[0] / den;
    Ok((0..ell).map(|k| y[k] + scale * (f * w[k] + delta0 * z[k])).collect())
}

/// `B₀⁻¹ ξ` through the factorization `B₀ = −L₀ L₀ᵀ` with unit-bidiagonal
/// `L₀` (lower, subdiagonal `−1`).
pub fn b0_inverse_apply(ell: usize, xi: &[C64]) -> Vec<C64> {
    // L₀ y = ξ: y_1 = ξ_1, y_k = ξ_k + y_{k−1}
    let mut y = xi.to_vec();
    for k in 1..ell {
        let prev = y[k - 1];
        y[k] += prev;
    }
    // L₀ᵀ x = −y: x_ℓ = −y_ℓ, x_k = −y_k + x_{k+1}
    let mut x = vec![c(0.0); ell];
    x[ell - 1] = -y[ell - 1];
    for k in (0..ell - 1).rev() {
        x[k] = -y[k] + x[k + 1];
    }
    x
}

/// Leading term of the FD `ℓ×1` symbol, `a^ℓ / (1 + ℓ − ℓā)`.
pub fn s0_fd(ell: usize, w1: f64) -> C64 {
    let a = cis(w1);
    let l = ell as f64;
    a.powu(ell as u32) / (c(1.0 + l) - a.conj() * l)
}

/// First-order FD term: `s̃ = s̃₀ + ε s̃₁ + O(ε²)`.
pub fn s1_fd(ell: usize, w1: f64, w2: f64) -> C64 {
    let a = cis(w1);
    let l = ell as f64;
    let s0 = s0_fd(ell, w1);
    let ab = a.conj();
    let poly = (ab * 3.0 + (c(1.0) - ab) * (l + 2.0)) * (l * (l + 1.0) / 3.0);
    -a.powi(-(ell as i32)) * s0 * (poly * s0 + (cis(w2) + s0 * cis(-w2)) * z1(ell, a))
}

/// Leading term of the FE `ℓ×1` symbol.
pub fn s0_fe(ell: usize, w1: f64, w2: f64) -> C64 {
    let t = TheoryContext::new(ell.max(1), w1, w2).expect("ell >= 1");
    let l = ell as f64;
    (t.a.powu(ell as u32) - t.delta0.conj() * t.z1) / (c(1.0 + l) - t.a.conj() * l + t.delta0 * t.z1)
}

/// First-order FE term on the line `ω₁ = 0`, `−3/2 ℓ(ℓ+1)(1 − e^{−iω₂})`.
///
/// The numerical symbol is real on this line to `O(ε²)`: it reproduces the
/// real part `−3/2 ℓ(ℓ+1)(1 − cos ω₂)`, hence `|s̃|` to first order, but
/// not the imaginary part.
pub fn s1_fe_at_zero(ell: usize, w2: f64) -> C64 {
    let l = ell as f64;
    (c(1.0) - cis(-w2)) * (-1.5 * l * (l + 1.0))
}

/// Shape of the maximally overlapped block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockShape {
    OneByOne,
    TwoByTwo,
    EllByOne,
}

/// `1 − cε` linearized smoothing factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSmoothing {
    pub coefficient: f64,
    pub value: f64,
    /// Proven only as a lower bound; observed to hold with equality.
    pub lower_bound: bool,
}

pub fn mu_linear(disc: Discretization, block: BlockShape, ell: usize, epsilon: f64) -> LinearSmoothing {
    let l = ell as f64;
    let (coefficient, lower_bound) = match (disc, block) {
        (Discretization::Fd, BlockShape::OneByOne) => (2.0, false),
        (Discretization::Fe, BlockShape::OneByOne) => (3.0, false),
        (Discretization::Fd, BlockShape::TwoByTwo) => (12.0, false),
        (Discretization::Fe, BlockShape::TwoByTwo) => (19.2, false),
        (Discretization::Fd, BlockShape::EllByOne) => (l * (l + 1.0), false),
        (Discretization::Fe, BlockShape::EllByOne) => (1.5 * l * (l + 1.0), true),
    };
    LinearSmoothing { coefficient, value: 1.0 - coefficient * epsilon, lower_bound }
}

/// Block length `⌈√(1 − μ*) / √ε⌉` for a target smoothing factor `μ*`.
pub fn ell_star(mu_star: f64, epsilon: f64) -> Result<usize> {
    if !(mu_star > 0.0 && mu_star < 1.0) {
        return Err(Error::InvalidParameter("target smoothing factor must lie in (0, 1)"));
    }
    if !(epsilon > 0.0) || epsilon > 1.0 {
        return Err(Error::InvalidParameter("epsilon must lie in (0, 1]"));
    }
    let v = Float::ceil(Float::sqrt(1.0 - mu_star) / Float::sqrt(epsilon));
    Ok((v as usize).max(1))
}

/// Upper bound `(1 + |δ₀z₁|)² / (|1 + ℓ − ℓā| − |δ₀z₁|)²` on `|s̃₀^FE|²`.
pub fn fe_s0_upper_bound(ell: usize, w1: f64, w2: f64) -> Result<f64> {
    let t = TheoryContext::new(ell, w1, w2)?;
    let l = ell as f64;
    let dz = (t.delta0 * t.z1).norm();
    let den = (c(1.0 + l) - t.a.conj() * l).norm() - dz;
    if !(den > 1e-14) {
        return Err(Error::Singular);
    }
    Ok((1.0 + dz) * (1.0 + dz) / (den * den))
}

/// Staged power-series solve for the 2×2 block at `(0, 3π/2)`.
///
/// With the grid-aligned symmetry `s_ne = s_nw`, `s_e = s_w`, `s_s = s_n`
/// the system is `𝒜(ε) α = b(ε)`; writing `𝒜 = 𝒜₀ + ε𝒜₁`, `b = b₀ + εb₁`,
/// `α = α₀ + εα₁ + …` gives `𝒜₀α₀ = b₀` and `𝒜₀α₁ = b₁ − 𝒜₁α₀`.
pub fn two_by_two_series(disc: Discretization) -> Result<([C64; 4], [C64; 4])> {
    // stencil entries as (value at ε=0, derivative in ε)
    let (nw, n, w, cc) = match disc {
        Discretization::Fd => ((0.0, 0.0), (0.0, -1.0), (-1.0, 0.0), (2.0, 2.0)),
        Discretization::Fe => {
            ((-1.0 / 6.0, -1.0 / 6.0), (1.0 / 3.0, -2.0 / 3.0), (-2.0 / 3.0, 1.0 / 3.0), (4.0 / 3.0, 4.0 / 3.0))
        }
    };
    let build = |nw: f64, n: f64, w: f64, cc: f64| -> ([C64; 16], [C64; 4]) {
        let i = C64::new(0.0, 1.0);
        let m = [
            -c(cc + w) - i * (2.0 * nw + n),
            c(-w),
            i * (n + nw),
            i * nw,
            c(-w) - i * (2.0 * nw + n),
            c(-cc),
            c(-w) + i * nw,
            i * n,
            c(-n - nw),
            c(-nw),
            i * (cc + w),
            i * w,
            c(-nw),
            c(-n),
            c(-nw) + i * w,
            i * cc,
        ];
        let b = [c(0.0), -(i * nw), c(-(2.0 * nw + n)), -(c(2.0 * nw + n) + i * w)];
        (m, b)
    };
    // the system is affine in the stencil entries, hence in ε
    let (m0, b0) = build(nw.0, n.0, w.0, cc.0);
    let (m1f, b1f) = build(nw.0 + nw.1, n.0 + n.1, w.0 + w.1, cc.0 + cc.1);
    let m1: Vec<C64> = (0..16).map(|k| m1f[k] - m0[k]).collect();
    let b1: Vec<C64> = (0..4).map(|k| b1f[k] - b0[k]).collect();
    let lu = crate::linalg::DenseLu::factor(4, m0.to_vec())?;
    let a0 = lu.solve(&b0)?;
    let mut rhs = b1.clone();
    for r in 0..4 {
        for k in 0..4 {
            rhs[r] -= m1[r * 4 + k] * a0[k];
        }
    }
    let a1 = lu.solve(&rhs)?;
    Ok(([a0[0], a0[1], a0[2], a0[3]], [a1[0], a1[1], a1[2], a1[3]]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_solve;
    use core::f64::consts::PI;

    #[test]
    fn closed_form_examples() {
        let (x, x1) = lemma_b1_solve(LemmaCase::FirstUnit, 7, c(1.0)).unwrap();
        assert_eq!(x1, c(-7.0));
        assert_eq!(x[6], c(-1.0));
        let (_, x1) = lemma_b1_solve(LemmaCase::Ramp, 3, c(1.0)).unwrap();
        assert_eq!(x1, c(-10.0));
        let a = cis(PI / 3.0);
        let (x, _) = lemma_b1_solve(LemmaCase::Phases, 6, a).unwrap();
        let m: Vec<C64> = b0_matrix(6).into_iter().map(c).collect();
        let want = dense_solve(6, m, &LemmaCase::Phases.rhs(6, a)).unwrap();
        for k in 0..6 {
            assert!((x[k] - want[k]).norm() < 1e-12);
        }
        assert!(LemmaCase::from_index(0).is_err() && LemmaCase::from_index(6).is_err());
    }

    #[test]
    fn z1_matches_phase_case_and_limit() {
        for ell in 1..8 {
            let a = cis(0.9);
            assert!((z1(ell, a) - lemma_b1_solve(LemmaCase::Phases, ell, a).unwrap().1).norm() < 1e-12);
            let l = ell as f64;
            assert_eq!(z1(ell, c(1.0)), c(-0.5 * l * (l + 1.0)));
        }
    }

    #[test]
    fn unperturbed_sherman_morrison() {
        let xi: Vec<C64> = (0..5).map(|k| C64::new(k as f64, 1.0)).collect();
        let eta = sherman_morrison_solve(5, cis(0.4), c(0.0), c(0.0), &xi).unwrap();
        let plain = b0_inverse_apply(5, &xi);
        for k in 0..5 {
            assert!((eta[k] - plain[k]).norm() < 1e-13);
        }
        let f = cis(-0.4) - 1.0;
        let el = LemmaCase::LastUnit.rhs(5, c(1.0));
        let eta = sherman_morrison_solve(5, cis(0.4), f, c(0.0), &el).unwrap();
        let want = -(c(1.0) - f * 5.0).inv();
        assert!((eta[0] - want).norm() < 1e-13);
    }

    #[test]
    fn leading_terms() {
        for ell in 1..10 {
            assert!((s0_fd(ell, 0.0) - 1.0).norm() < 1e-15);
            assert!((s0_fe(ell, 0.0, 2.0) - 1.0).norm() < 1e-15);
        }
        // ε-coefficient of the 1×1 symbol at the worst frequency
        let s1 = s1_fd(1, 0.0, 1.5 * PI);
        assert!(((s0_fd(1, 0.0) + s1 * 1e-6).norm() - (1.0 - 2e-6)).abs() < 1e-10);
        let s1 = s1_fe_at_zero(3, 1.5 * PI);
        assert!((s1 - C64::new(-18.0, 0.0) * (c(1.0) - cis(-1.5 * PI))).norm() < 1e-12);
    }

    #[test]
    fn mu_linear_table() {
        let v = mu_linear(Discretization::Fd, BlockShape::EllByOne, 2, 1e-3);
        assert!((v.value - 0.994).abs() < 1e-15 && !v.lower_bound);
        assert!((mu_linear(Discretization::Fd, BlockShape::TwoByTwo, 0, 1e-4).value - 0.9988).abs() < 1e-15);
        assert!(mu_linear(Discretization::Fe, BlockShape::EllByOne, 3, 0.0).lower_bound);
        for d in [Discretization::Fd, Discretization::Fe] {
            for b in [BlockShape::OneByOne, BlockShape::TwoByTwo, BlockShape::EllByOne] {
                assert_eq!(mu_linear(d, b, 4, 0.0).value, 1.0);
            }
        }
    }

    #[test]
    fn ell_star_examples() {
        assert_eq!(ell_star(0.75, 1e-2).unwrap(), 5);
        assert_eq!(ell_star(1.0 - 1e-12, 0.5).unwrap(), 1);
        assert!(ell_star(1.0, 0.1).is_err() && ell_star(0.0, 0.1).is_err());
    }

    #[test]
    fn fe_bound() {
        assert!((fe_s0_upper_bound(3, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        let b = fe_s0_upper_bound(1, PI, 0.3).unwrap();
        let s = s0_fe(1, PI, 0.3).norm_sqr();
        assert!((b - 1.0).abs() < 1e-12 && s < 1.0);
    }

    #[test]
    fn series_coefficients() {
        let (a0, a1) = two_by_two_series(Discretization::Fd).unwrap();
        for z in a0 {
            assert!((z - 1.0).norm() < 1e-12);
        }
        let want = [-12.0, -10.0, -6.0, -4.0];
        for k in 0..4 {
            assert!((a1[k] - want[k]).norm() < 1e-10);
        }
        let (_, fe) = two_by_two_series(Discretization::Fe).unwrap();
        assert!((fe[0] - (-19.2)).norm() < 1e-10);
    }
}
