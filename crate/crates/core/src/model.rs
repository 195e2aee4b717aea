//! PDE coefficients, the finite-difference and finite-element 9-point
//! stencils, and Fourier symbols of 9-point stencils.

use core::f64::consts::FRAC_PI_2;

use num_traits::Float;

use crate::lfa::Frequency;
use crate::{Error, Result, C64};

/// Coefficients of `−∇·(K∇u)` for the diffusion tensor rotated by `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeCoefficients {
    pub epsilon: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Build coefficients from the anisotropy ratio and the rotation angle.
pub fn pde_coefficients(epsilon: f64, theta: f64) -> Result<PdeCoefficients> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter("epsilon must lie in [0, 1]"));
    }
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidParameter("theta must lie in [0, pi/2]"));
    }
    let (s, c) = Float::sin_cos(theta);
    Ok(PdeCoefficients {
        epsilon,
        theta,
        alpha: c * c + epsilon * s * s,
        beta: epsilon * c * c + s * s,
        gamma: 2.0 * (1.0 - epsilon) * c * s,
    })
}

/// Offsets `(dx, dy)` of the nine stencil legs, north = `+y`, in the order
/// `nw, n, ne, w, c, e, sw, s, se`.
pub const OFFSETS: [(i32, i32); 9] = [(-1, 1), (0, 1), (1, 1), (-1, 0), (0, 0), (1, 0), (-1, -1), (0, -1), (1, -1)];

/// A constant-coefficient 9-point stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil9 {
    pub nw: f64,
    pub n: f64,
    pub ne: f64,
    pub w: f64,
    pub c: f64,
    pub e: f64,
    pub sw: f64,
    pub s: f64,
    pub se: f64,
}

impl Stencil9 {
    /// Entries in [`OFFSETS`] order.
    pub fn to_array(&self) -> [f64; 9] {
        [self.nw, self.n, self.ne, self.w, self.c, self.e, self.sw, self.s, self.se]
    }

    pub fn from_array(v: [f64; 9]) -> Self {
        Self { nw: v[0], n: v[1], ne: v[2], w: v[3], c: v[4], e: v[5], sw: v[6], s: v[7], se: v[8] }
    }

    /// Coefficient at offset `(dx, dy)`, zero outside the 3×3 footprint.
    pub fn at(&self, dx: i32, dy: i32) -> f64 {
        match (dx, dy) {
            (-1, 1) => self.nw,
            (0, 1) => self.n,
            (1, 1) => self.ne,
            (-1, 0) => self.w,
            (0, 0) => self.c,
            (1, 0) => self.e,
            (-1, -1) => self.sw,
            (0, -1) => self.s,
            (1, -1) => self.se,
            _ => 0.0,
        }
    }

    pub fn entry_sum(&self) -> f64 {
        self.to_array().iter().sum()
    }

    /// Multiply every entry by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self::from_array(self.to_array().map(|v| v * k))
    }
}

/// Discretization selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Discretization {
    Fd,
    Fe,
}

impl Discretization {
    pub fn stencil(self, coeffs: &PdeCoefficients) -> Stencil9 {
        match self {
            Discretization::Fd => fd_stencil(coeffs),
            Discretization::Fe => fe_stencil(coeffs),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Discretization::Fd => "fd",
            Discretization::Fe => "fe",
        }
    }
}

/// Finite-difference stencil with upwinded mixed derivative, multiplied by `h²`.
pub fn fd_stencil(k: &PdeCoefficients) -> Stencil9 {
    let (a, b, g) = (k.alpha, k.beta, k.gamma);
    Stencil9 {
        nw: 0.0,
        n: -b + 0.5 * g,
        ne: -0.5 * g,
        w: -a + 0.5 * g,
        c: 2.0 * a + 2.0 * b - g,
        e: -a + 0.5 * g,
        sw: -0.5 * g,
        s: -b + 0.5 * g,
        se: 0.0,
    }
}

/// Bilinear finite-element stencil (no `h` scaling needed in 2D).
pub fn fe_stencil(k: &PdeCoefficients) -> Stencil9 {
    let (a, b, g) = (k.alpha, k.beta, k.gamma);
    let corner = -(a + b) / 6.0;
    Stencil9 {
        nw: corner + 0.25 * g,
        n: a / 3.0 - 2.0 * b / 3.0,
        ne: corner - 0.25 * g,
        w: -2.0 * a / 3.0 + b / 3.0,
        c: 4.0 * (a + b) / 3.0,
        e: -2.0 * a / 3.0 + b / 3.0,
        sw: corner - 0.25 * g,
        s: a / 3.0 - 2.0 * b / 3.0,
        se: corner + 0.25 * g,
    }
}

/// Stencil entries multiplied by their Fourier phases at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierStencil {
    /// `ĉ` in [`OFFSETS`] order.
    pub entries: [C64; 9],
    /// Mesh width, kept as metadata only.
    pub h: f64,
}

impl FourierStencil {
    pub fn nw(&self) -> C64 {
        self.entries[0]
    }
    pub fn n(&self) -> C64 {
        self.entries[1]
    }
    pub fn ne(&self) -> C64 {
        self.entries[2]
    }
    pub fn w(&self) -> C64 {
        self.entries[3]
    }
    pub fn c(&self) -> C64 {
        self.entries[4]
    }
    pub fn e(&self) -> C64 {
        self.entries[5]
    }
    pub fn sw(&self) -> C64 {
        self.entries[6]
    }
    pub fn s(&self) -> C64 {
        self.entries[7]
    }
    pub fn se(&self) -> C64 {
        self.entries[8]
    }

    pub fn sum(&self) -> C64 {
        self.entries.iter().sum()
    }
}

/// `ĉ_pq = s_pq e^{i(p ω₁ + q ω₂)}` for every leg.
pub fn fourier_stencil(stencil: &Stencil9, omega: Frequency) -> FourierStencil {
    fourier_stencil_with_h(stencil, omega, 1.0)
}

pub fn fourier_stencil_with_h(stencil: &Stencil9, omega: Frequency, h: f64) -> FourierStencil {
    let s = stencil.to_array();
    let mut entries = [C64::new(0.0, 0.0); 9];
    for (k, &(dx, dy)) in OFFSETS.iter().enumerate() {
        let phase = dx as f64 * omega.w1 + dy as f64 * omega.w2;
        entries[k] = C64::from_polar(s[k], phase);
    }
    FourierStencil { entries, h }
}

/// Symbol `Σ ĉ_pq` of a stencil at `omega`.
pub fn stencil_symbol(stencil: &Stencil9, omega: Frequency) -> C64 {
    fourier_stencil(stencil, omega).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_4, PI};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn coefficient_examples() {
        let k = pde_coefficients(1.0, 0.3).unwrap();
        assert!(close(k.alpha, 1.0, 1e-15) && close(k.beta, 1.0, 1e-15) && close(k.gamma, 0.0, 1e-15));
        let k = pde_coefficients(0.01, 0.0).unwrap();
        assert_eq!((k.alpha, k.beta, k.gamma), (1.0, 0.01, 0.0));
        let k = pde_coefficients(0.0, FRAC_PI_4).unwrap();
        assert!(close(k.alpha, 0.5, 1e-15) && close(k.beta, 0.5, 1e-15) && close(k.gamma, 1.0, 1e-15));
    }

    #[test]
    fn coefficient_range_checks() {
        assert!(pde_coefficients(-0.1, 0.0).is_err());
        assert!(pde_coefficients(1.1, 0.0).is_err());
        assert!(pde_coefficients(0.5, -0.01).is_err());
        assert!(pde_coefficients(0.5, 1.6).is_err());
        assert!(pde_coefficients(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn fd_grid_aligned() {
        let eps = 0.37;
        let s = fd_stencil(&pde_coefficients(eps, 0.0).unwrap());
        assert_eq!(s.to_array(), [0.0, -eps, 0.0, -1.0, 2.0 * (1.0 + eps), -1.0, 0.0, -eps, 0.0]);
        let lap = fd_stencil(&pde_coefficients(1.0, 0.0).unwrap());
        assert_eq!(lap.to_array(), [0.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn fd_rotated_hand_values() {
        // alpha = beta = 1/2, gamma = 1
        let s = fd_stencil(&pde_coefficients(0.0, FRAC_PI_4).unwrap());
        let want = [0.0, 0.0, -0.5, 0.0, 1.0, 0.0, -0.5, 0.0, 0.0];
        for (a, b) in s.to_array().iter().zip(want) {
            assert!(close(*a, b, 1e-15));
        }
    }

    #[test]
    fn fe_examples() {
        let eps = 0.2;
        let s = fe_stencil(&pde_coefficients(eps, 0.0).unwrap());
        assert!(close(s.nw, -1.0 / 6.0 - eps / 6.0, 1e-15));
        assert!(close(s.n, 1.0 / 3.0 - 2.0 * eps / 3.0, 1e-15));
        assert!(close(s.w, -2.0 / 3.0 + eps / 3.0, 1e-15));
        assert!(close(s.c, 4.0 / 3.0 + 4.0 * eps / 3.0, 1e-15));
        let iso = fe_stencil(&pde_coefficients(1.0, 0.0).unwrap());
        for (k, v) in iso.to_array().iter().enumerate() {
            let want = if k == 4 { 8.0 / 3.0 } else { -1.0 / 3.0 };
            assert!(close(*v, want, 1e-15));
        }
    }

    #[test]
    fn symbol_examples() {
        let lap = fd_stencil(&pde_coefficients(1.0, 0.0).unwrap());
        assert!(stencil_symbol(&lap, Frequency::new(0.0, 0.0)).norm() < 1e-15);
        assert!((stencil_symbol(&lap, Frequency::new(PI, PI)) - 8.0).norm() < 1e-13);
        let s = fd_stencil(&pde_coefficients(1e-3, 0.0).unwrap());
        assert!((stencil_symbol(&s, Frequency::new(PI, 0.0)) - 4.0).norm() < 1e-13);
    }

    #[test]
    fn fourier_stencil_center_and_moduli() {
        let s = fe_stencil(&pde_coefficients(0.3, 0.7).unwrap());
        let f = fourier_stencil(&s, Frequency::new(0.4, -1.1));
        assert_eq!(f.c(), C64::new(s.c, 0.0));
        for (z, v) in f.entries.iter().zip(s.to_array()) {
            assert!((z.norm() - v.abs()).abs() < 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn alpha_plus_beta(eps in 0.0f64..=1.0, theta in 0.0f64..=FRAC_PI_2) {
            let k = pde_coefficients(eps, theta).unwrap();
            prop_assert!((k.alpha + k.beta - 1.0 - eps).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn isotropic_has_no_mixed_term(theta in 0.0f64..=FRAC_PI_2) {
            let k = pde_coefficients(1.0, theta).unwrap();
            prop_assert!((k.alpha - 1.0).abs() < 1e-15 && (k.beta - 1.0).abs() < 1e-15);
            prop_assert!(k.gamma.abs() < 1e-15);
        }

        #[test]
        fn stencils_have_zero_sum(eps in 0.0f64..=1.0, theta in 0.0f64..=FRAC_PI_2) {
            let k = pde_coefficients(eps, theta).unwrap();
            prop_assert!(fd_stencil(&k).entry_sum().abs() < 1e-13);
            prop_assert!(fe_stencil(&k).entry_sum().abs() < 1e-13);
        }

        #[test]
        fn fe_point_symmetric(eps in 0.0f64..=1.0, theta in 0.0f64..=FRAC_PI_2) {
            let s = fe_stencil(&pde_coefficients(eps, theta).unwrap());
            prop_assert_eq!(s.nw, s.se);
            prop_assert_eq!(s.n, s.s);
            prop_assert_eq!(s.w, s.e);
        }

        #[test]
        fn symbol_is_periodic(eps in 0.0f64..=1.0, theta in 0.0f64..=FRAC_PI_2,
                              w1 in -PI..PI, w2 in -PI..PI, fe in any::<bool>()) {
            let k = pde_coefficients(eps, theta).unwrap();
            let s = if fe { fe_stencil(&k) } else { fd_stencil(&k) };
            let base = stencil_symbol(&s, Frequency::new(w1, w2));
            let a = stencil_symbol(&s, Frequency::new(w1 + 2.0 * PI, w2));
            let b = stencil_symbol(&s, Frequency::new(w1, w2 + 2.0 * PI));
            prop_assert!((base - a).norm() < 1e-12);
            prop_assert!((base - b).norm() < 1e-12);
        }

        #[test]
        fn fe_symbol_real_when_aligned(eps in 0.0f64..=1.0, w1 in -PI..PI, w2 in -PI..PI) {
            let s = fe_stencil(&pde_coefficients(eps, 0.0).unwrap());
            prop_assert!(stencil_symbol(&s, Frequency::new(w1, w2)).im.abs() < 1e-13);
        }
    }
}
