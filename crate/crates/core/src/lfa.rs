//! Local Fourier analysis of multiplicative Schwarz smoothers: per-frequency
//! symbols, two-grid symbols, and their maxima over frequency boxes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_traits::Float;

use crate::linalg::{spectral_radius, DenseLu};
use crate::model::{fourier_stencil, stencil_symbol, Stencil9};
use crate::transfer::interp_symbol_unchecked;
use crate::{Error, Result, C64};

/// A frequency `(ω₁, ω₂)`; values outside `[−π/2, 3π/2)²` are allowed and
/// act by periodicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    pub w1: f64,
    pub w2: f64,
}

impl Frequency {
    pub const fn new(w1: f64, w2: f64) -> Self {
        Self { w1, w2 }
    }

    /// Both components in `[−π/2, π/2)`.
    pub fn is_low(&self) -> bool {
        let low = |w: f64| (-FRAC_PI_2..FRAC_PI_2).contains(&w);
        low(self.w1) && low(self.w2)
    }

    /// In `[−π/2, 3π/2)²` but not low.
    pub fn is_high(&self) -> bool {
        let inside = |w: f64| (-FRAC_PI_2..1.5 * PI).contains(&w);
        inside(self.w1) && inside(self.w2) && !self.is_low()
    }

    /// `ω, ω+(π,π), ω+(π,0), ω+(0,π)`.
    pub fn harmonics(&self) -> [Frequency; 4] {
        let (a, b) = (self.w1, self.w2);
        [Self::new(a, b), Self::new(a + PI, b + PI), Self::new(a + PI, b), Self::new(a, b + PI)]
    }
}

/// Complex system `𝒜 α = b` whose first solution component is a smoother
/// symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSystem {
    pub size: usize,
    /// Row-major `𝒜`.
    pub matrix: Vec<C64>,
    pub rhs: Vec<C64>,
    /// Diagonal of the relative-phase matrix `D`.
    pub phases: Vec<C64>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn cis(t: f64) -> C64 {
    C64::from_polar(1.0, t)
}

impl SymbolSystem {
    /// Assemble `𝒜 = (A/w) D (U − I) − D C` and `b = D c − (A/w) D e_last`
    /// from the block matrix `A`, the phase diagonal and `(C, c)`.
    fn from_parts(size: usize, block: &[f64], weight: f64, phases: Vec<C64>, cmat: &[C64], cvec: &[C64]) -> Self {
        let mut matrix = vec![zero(); size * size];
        let mut rhs = vec![zero(); size];
        for r in 0..size {
            for col in 0..size {
                // (A D (U − I))[r][col] = −A[r][col] d_col + A[r][col−1] d_{col−1}
                let mut v = -phases[col] * (block[r * size + col] / weight);
                if col > 0 {
                    v += phases[col - 1] * (block[r * size + col - 1] / weight);
                }
                matrix[r * size + col] = v - phases[r] * cmat[r * size + col];
            }
            rhs[r] = phases[r] * cvec[r] - phases[size - 1] * (block[r * size + size - 1] / weight);
        }
        Self { size, matrix, rhs, phases }
    }

    /// System for maximally overlapped 2×2 blocks, local order
    /// `(0,0), (1,0), (0,1), (1,1)`, with `A_ij` scaled by `1/w`.
    pub fn two_by_two(stencil: &Stencil9, omega: Frequency, weight: f64) -> Self {
        let s = stencil;
        let f = fourier_stencil(stencil, omega);
        let (a, b) = (cis(omega.w1), cis(omega.w2));
        let phases = vec![C64::new(1.0, 0.0), a, b, a * b];
        let block = [
            s.c, s.e, s.n, s.ne, //
            s.w, s.c, s.nw, s.n, //
            s.s, s.se, s.c, s.e, //
            s.sw, s.s, s.w, s.c,
        ];
        let south = f.sw() + f.s() + f.se();
        let cmat = [
            south + f.w(),
            f.c(),
            f.e() + f.nw(),
            f.n(),
            south,
            f.w(),
            f.c() + f.e(),
            f.nw(),
            f.sw(),
            f.s(),
            f.se() + f.w(),
            f.c(),
            zero(),
            f.sw(),
            f.s() + f.se(),
            f.w(),
        ];
        let cvec = [f.ne(), f.n() + f.ne(), f.e() + f.nw() + f.n() + f.ne(), f.c() + f.e() + f.nw() + f.n() + f.ne()];
        Self::from_parts(4, &block, weight, phases, &cmat, &cvec)
    }

    /// System for maximally overlapped `ℓ×1` blocks.
    pub fn ell_by_one(stencil: &Stencil9, omega: Frequency, ell: usize, weight: f64) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidParameter("block length must be positive"));
        }
        let s = stencil;
        let f = fourier_stencil(stencil, omega);
        let a = cis(omega.w1);
        let mut phases = Vec::with_capacity(ell);
        let mut p = C64::new(1.0, 0.0);
        for _ in 0..ell {
            phases.push(p);
            p *= a;
        }
        let mut block = vec![0.0; ell * ell];
        for r in 0..ell {
            block[r * ell + r] = s.c;
            if r > 0 {
                block[r * ell + r - 1] = s.w;
            }
            if r + 1 < ell {
                block[r * ell + r + 1] = s.e;
            }
        }
        // Row r collects the west/centre/east legs at coefficient index
        // r, r+1, r+2; indices past the block feed the right-hand side.
        let mut cmat = vec![zero(); ell * ell];
        let mut cvec = vec![zero(); ell];
        for r in 0..ell {
            for (coef, col) in [(f.w(), r), (f.c(), r + 1), (f.e(), r + 2)] {
                if col < ell {
                    cmat[r * ell + col] += coef;
                } else {
                    cvec[r] += coef;
                }
            }
            cmat[r * ell] += f.sw() + f.s() + f.se();
            cvec[r] += f.nw() + f.n() + f.ne();
        }
        Ok(Self::from_parts(ell, &block, weight, phases, &cmat, &cvec))
    }

    pub fn solve(&self) -> Result<Vec<C64>> {
        let lu = DenseLu::factor(self.size, self.matrix.clone()).map_err(|_| Error::ExcludedFrequency)?;
        lu.solve(&self.rhs)
    }

    /// First component of `𝒜⁻¹ b`.
    pub fn symbol(&self) -> Result<C64> {
        Ok(self.solve()?[0])
    }
}

/// Lexicographic point Gauss–Seidel.
pub fn symbol_gs(stencil: &Stencil9, omega: Frequency) -> Result<C64> {
    let f = fourier_stencil(stencil, omega);
    let den = f.c() + f.w() + f.sw() + f.s() + f.se();
    if den.norm() < 1e-14 {
        return Err(Error::ExcludedFrequency);
    }
    Ok(-(f.e() + f.nw() + f.n() + f.ne()) / den)
}

/// x-line Gauss–Seidel with lines visited south to north.
pub fn symbol_line_x(stencil: &Stencil9, omega: Frequency) -> Result<C64> {
    let f = fourier_stencil(stencil, omega);
    let den = f.sw() + f.s() + f.se() + f.w() + f.c() + f.e();
    if den.norm() < 1e-14 {
        return Err(Error::ExcludedFrequency);
    }
    Ok(-(f.nw() + f.n() + f.ne()) / den)
}

/// Maximally overlapped 2×2 blocks with relaxation weight `w`.
pub fn symbol_schwarz_2x2(stencil: &Stencil9, omega: Frequency, weight: f64) -> Result<C64> {
    SymbolSystem::two_by_two(stencil, omega, weight).symbol()
}

/// Maximally overlapped `ℓ×1` blocks.
pub fn symbol_schwarz_ellx1(stencil: &Stencil9, omega: Frequency, ell: usize) -> Result<C64> {
    symbol_schwarz_ellx1_weighted(stencil, omega, ell, 1.0)
}

pub fn symbol_schwarz_ellx1_weighted(stencil: &Stencil9, omega: Frequency, ell: usize, weight: f64) -> Result<C64> {
    SymbolSystem::ell_by_one(stencil, omega, ell, weight)?.symbol()
}

/// Amplification factors of every DOF of a maximally overlapped `ℓ×m`
/// block, from the ansatz that a DOF updated `k` times carries `α_k φ`.
///
/// DOFs are ordered x fastest within the block; entry `k − 1` of the
/// returned vector is `α_k`, `k = 1..ℓm`, so the last entry is the symbol.
pub fn schwarz_block_factors(
    stencil: &Stencil9,
    omega: Frequency,
    ell: usize,
    m: usize,
    weight: f64,
) -> Result<Vec<C64>> {
    if ell == 0 || m == 0 {
        return Err(Error::InvalidParameter("block dimensions must be positive"));
    }
    let size = ell * m;
    // Updates a DOF at offset (p, q) from the block origin has received when
    // this block is visited: one for every later block containing it.
    let count = |p: i64, q: i64| -> usize {
        let mut c = 0;
        for b in 0..m as i64 {
            if b > q {
                c += ell;
            } else if b == q {
                c += (ell as i64 - 1 - p).clamp(0, ell as i64) as usize;
            }
        }
        c
    };
    let s = stencil.to_array();
    let mut mat = vec![zero(); size * size];
    let mut rhs = vec![zero(); size];
    let add = |row: usize, k: usize, coef: C64, mat: &mut Vec<C64>, rhs: &mut Vec<C64>| {
        if k == 0 {
            rhs[row] -= coef;
        } else {
            mat[row * size + k - 1] += coef;
        }
    };
    for q in 0..m as i64 {
        for p in 0..ell as i64 {
            let row = (q as usize) * ell + p as usize;
            for (k, &(dx, dy)) in crate::model::OFFSETS.iter().enumerate() {
                let (pp, qq) = (p + dx as i64, q + dy as i64);
                let phase = cis(pp as f64 * omega.w1 + qq as f64 * omega.w2);
                let inside = pp >= 0 && qq >= 0 && pp < ell as i64 && qq < m as i64;
                let before = count(pp, qq);
                // A_ij/w (e_old − e_new) = r_old on the block
                if inside {
                    let coef = phase * (s[k] / weight);
                    add(row, before, coef, &mut mat, &mut rhs);
                    add(row, before + 1, -coef, &mut mat, &mut rhs);
                }
                add(row, before, -phase * s[k], &mut mat, &mut rhs);
            }
        }
    }
    let lu = DenseLu::factor(size, mat).map_err(|_| Error::ExcludedFrequency)?;
    lu.solve(&rhs)
}

/// Symbol of maximally overlapped `ℓ×m` blocks, any shape.
pub fn symbol_schwarz_block(stencil: &Stencil9, omega: Frequency, ell: usize, m: usize, weight: f64) -> Result<C64> {
    Ok(*schwarz_block_factors(stencil, omega, ell, m, weight)?.last().expect("nonempty"))
}

/// Smoother whose symbol enters smoothing factors and two-grid symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmootherSymbol {
    GaussSeidel,
    LineX,
    Schwarz2x2 {
        weight: f64,
    },
    SchwarzEllx1 {
        ell: usize,
        weight: f64,
    },
    /// Maximally overlapped `ℓ×m` blocks through the generic ansatz.
    SchwarzBlock {
        ell: usize,
        m: usize,
        weight: f64,
    },
    /// Damped point Jacobi, `1 − w Â/s_c`.
    Jacobi {
        weight: f64,
    },
    /// No smoothing (symbol 1): coarse-grid correction alone.
    Identity,
    /// Symbol 0.
    Zero,
}

impl SmootherSymbol {
    /// The symbol for a maximally overlapped `ℓ×m` block.
    pub fn for_block(ell: usize, m: usize, weight: f64) -> Self {
        match (ell, m) {
            (1, 1) if weight == 1.0 => SmootherSymbol::GaussSeidel,
            (2, 2) => SmootherSymbol::Schwarz2x2 { weight },
            (_, 1) => SmootherSymbol::SchwarzEllx1 { ell, weight },
            _ => SmootherSymbol::SchwarzBlock { ell, m, weight },
        }
    }

    pub fn eval(&self, stencil: &Stencil9, omega: Frequency) -> Result<C64> {
        match *self {
            SmootherSymbol::GaussSeidel => symbol_gs(stencil, omega),
            SmootherSymbol::LineX => symbol_line_x(stencil, omega),
            SmootherSymbol::Schwarz2x2 { weight } => symbol_schwarz_2x2(stencil, omega, weight),
            SmootherSymbol::SchwarzEllx1 { ell, weight } => symbol_schwarz_ellx1_weighted(stencil, omega, ell, weight),
            SmootherSymbol::SchwarzBlock { ell, m, weight } => symbol_schwarz_block(stencil, omega, ell, m, weight),
            SmootherSymbol::Jacobi { weight } => {
                if stencil.c == 0.0 {
                    return Err(Error::ExcludedFrequency);
                }
                Ok(C64::new(1.0, 0.0) - stencil_symbol(stencil, omega) * (weight / stencil.c))
            }
            SmootherSymbol::Identity => Ok(C64::new(1.0, 0.0)),
            SmootherSymbol::Zero => Ok(zero()),
        }
    }
}

/// Threshold below which a frequency is dropped from two-grid analysis.
pub const EXCLUSION_TOL: f64 = 1e-14;

/// Two-grid error symbol on the 4-dimensional harmonic space.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoGridSymbol {
    pub omega: Frequency,
    /// Row-major 4×4 `Ê`; zero when excluded.
    pub e: [C64; 16],
    pub excluded: bool,
    /// Fine-grid symbols at the harmonics.
    pub a0: [C64; 4],
    /// Symbol of the assembled Galerkin operator at `2ω`.
    pub a1: C64,
    /// Smoother symbols at the harmonics.
    pub s: [C64; 4],
    pub p: [f64; 4],
}

impl TwoGridSymbol {
    pub fn spectral_radius(&self) -> Result<f64> {
        if self.excluded {
            return Err(Error::ExcludedFrequency);
        }
        spectral_radius(4, &self.e)
    }
}

/// `Ê = Ŝ [I − P̂ Â₁⁻¹ R̂ Â₀] Ŝ` at a frequency of the closed low box.
pub fn two_grid_symbol(stencil: &Stencil9, smoother: &SmootherSymbol, omega: Frequency) -> Result<TwoGridSymbol> {
    let slack = 1e-12;
    if Float::abs(omega.w1) > FRAC_PI_2 + slack || Float::abs(omega.w2) > FRAC_PI_2 + slack {
        return Err(Error::InvalidParameter("two-grid symbol needs a low frequency"));
    }
    let h = omega.harmonics();
    let p = interp_symbol_unchecked(omega);
    let r = p.map(|v| 4.0 * v);
    let a0 = h.map(|w| stencil_symbol(stencil, w));
    let a1 = (0..4).fold(zero(), |acc, k| acc + a0[k] * (r[k] * p[k]));
    let a0max = a0.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let mut out = TwoGridSymbol { omega, e: [zero(); 16], excluded: false, a0, a1, s: [zero(); 4], p };
    if a1.norm() < EXCLUSION_TOL || a0max < EXCLUSION_TOL {
        out.excluded = true;
        return Ok(out);
    }
    let mut s = [zero(); 4];
    for k in 0..4 {
        match smoother.eval(stencil, h[k]) {
            Ok(v) => s[k] = v,
            Err(Error::ExcludedFrequency) => {
                out.excluded = true;
                return Ok(out);
            }
            Err(e) => return Err(e),
        }
    }
    out.s = s;
    for i in 0..4 {
        for j in 0..4 {
            let id = if i == j { 1.0 } else { 0.0 };
            let m = C64::new(id, 0.0) - a0[j] * (p[i] * r[j]) / a1;
            out.e[i * 4 + j] = s[i] * m * s[j];
        }
    }
    Ok(out)
}

/// Which part of frequency space a maximization runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyRegion {
    /// `[−π/2, 3π/2)² ∖ [−π/2, π/2)²`.
    High,
    /// `[−π/2, π/2]²`.
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    /// Samples per axis of the coarse grid.
    pub samples: usize,
    /// Number of best samples refined by downhill simplex.
    pub starts: usize,
    /// Absolute tolerance of the simplex refinement.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self { samples: 129, starts: 5, tol: 1e-6, max_iters: 400 }
    }
}

/// Result of a frequency maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub value: f64,
    pub argmax: Frequency,
    /// Samples per axis used for the coarse grid.
    pub samples: usize,
    /// Coarse-grid points skipped because they were excluded.
    pub excluded: usize,
}

/// Map an arbitrary point into the region: wrap by `2π`, then push points
/// of the open low box onto its boundary (high) or clamp (low).
pub fn project(region: FrequencyRegion, w: Frequency) -> Frequency {
    match region {
        FrequencyRegion::Low => Frequency::new(w.w1.clamp(-FRAC_PI_2, FRAC_PI_2), w.w2.clamp(-FRAC_PI_2, FRAC_PI_2)),
        FrequencyRegion::High => {
            let wrap = |t: f64| {
                let two_pi = 2.0 * PI;
                let mut u = (t + FRAC_PI_2) % two_pi;
                if u < 0.0 {
                    u += two_pi;
                }
                u - FRAC_PI_2
            };
            let (a, b) = (wrap(w.w1), wrap(w.w2));
            if Float::abs(a) < FRAC_PI_2 && Float::abs(b) < FRAC_PI_2 {
                let da = FRAC_PI_2 - Float::abs(a);
                let db = FRAC_PI_2 - Float::abs(b);
                if da <= db {
                    Frequency::new(FRAC_PI_2.copysign(a), b)
                } else {
                    Frequency::new(a, FRAC_PI_2.copysign(b))
                }
            } else {
                Frequency::new(a, b)
            }
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (b - a) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |k| a + step * k as f64)
}

/// Points of the `samples × samples` grid covering the region's box that
/// belong to the region. The high box includes its far edge, which is
/// equivalent to the near one by periodicity.
pub fn sample_grid(region: FrequencyRegion, samples: usize) -> Vec<Frequency> {
    let (a, b) = match region {
        FrequencyRegion::High => (-FRAC_PI_2, 1.5 * PI),
        FrequencyRegion::Low => (-FRAC_PI_2, FRAC_PI_2),
    };
    let axis: Vec<f64> = linspace(a, b, samples).collect();
    let mut out = Vec::with_capacity(samples * samples);
    for &w2 in &axis {
        for &w1 in &axis {
            let w = Frequency::new(w1, w2);
            if region == FrequencyRegion::High && w.is_low() {
                continue;
            }
            out.push(w);
        }
    }
    out
}

/// Maximize `f` over the region: dense sampling, then Nelder–Mead from the
/// best samples. `None` marks an excluded frequency.
pub fn maximize<F>(f: F, region: FrequencyRegion, opts: &OptimizerOptions) -> Maximum
where
    F: Fn(Frequency) -> Option<f64>,
{
    let pts = sample_grid(region, opts.samples);
    let mut vals: Vec<(f64, Frequency)> = Vec::with_capacity(pts.len());
    let mut excluded = 0;
    for w in pts {
        match f(w) {
            Some(v) if v.is_finite() => vals.push((v, w)),
            _ => excluded += 1,
        }
    }
    if vals.is_empty() {
        return Maximum { value: f64::NAN, argmax: Frequency::new(0.0, 0.0), samples: opts.samples, excluded };
    }
    vals.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut best = vals[0];
    let span = match region {
        FrequencyRegion::High => 2.0 * PI,
        FrequencyRegion::Low => PI,
    };
    let step = span / (opts.samples.max(2) - 1) as f64;
    let eval = |w: Frequency| -> (f64, Frequency) {
        let q = project(region, w);
        match f(q) {
            Some(v) if v.is_finite() => (v, q),
            _ => (f64::NEG_INFINITY, q),
        }
    };
    for &(_, start) in vals.iter().take(opts.starts) {
        let (v, w) = nelder_mead(&eval, start, step, opts.tol, opts.max_iters);
        if v > best.0 {
            best = (v, w);
        }
    }
    Maximum { value: best.0, argmax: best.1, samples: opts.samples, excluded }
}

fn nelder_mead<E>(eval: &E, start: Frequency, step: f64, tol: f64, max_iters: usize) -> (f64, Frequency)
where
    E: Fn(Frequency) -> (f64, Frequency),
{
    // maximize: keep vertices sorted by descending value
    let mut simplex: [([f64; 2], f64); 3] =
        [([start.w1, start.w2], 0.0), ([start.w1 + step, start.w2], 0.0), ([start.w1, start.w2 + step], 0.0)];
    for v in simplex.iter_mut() {
        v.1 = eval(Frequency::new(v.0[0], v.0[1])).0;
    }
    let sort = |s: &mut [([f64; 2], f64); 3]| {
        s.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(core::cmp::Ordering::Equal));
    };
    let at = |p: [f64; 2]| eval(Frequency::new(p[0], p[1])).0;
    for _ in 0..max_iters {
        sort(&mut simplex);
        let diam = simplex
            .iter()
            .map(|v| Float::hypot(v.0[0] - simplex[0].0[0], v.0[1] - simplex[0].0[1]))
            .fold(0.0f64, f64::max);
        if diam < tol {
            break;
        }
        let c = [(simplex[0].0[0] + simplex[1].0[0]) * 0.5, (simplex[0].0[1] + simplex[1].0[1]) * 0.5];
        let worst = simplex[2];
        let lerp = |t: f64| [c[0] + t * (worst.0[0] - c[0]), c[1] + t * (worst.0[1] - c[1])];
        let xr = lerp(-1.0);
        let fr = at(xr);
        if fr > simplex[0].1 {
            let xe = lerp(-2.0);
            let fe = at(xe);
            simplex[2] = if fe > fr { (xe, fe) } else { (xr, fr) };
        } else if fr > simplex[1].1 {
            simplex[2] = (xr, fr);
        } else {
            let (xc, fc) = if fr > worst.1 {
                let x = lerp(-0.5);
                (x, at(x))
            } else {
                let x = lerp(0.5);
                (x, at(x))
            };
            if fc > worst.1.max(fr) {
                simplex[2] = (xc, fc);
            } else {
                let b = simplex[0].0;
                for k in 1..3 {
                    let p = [(simplex[k].0[0] + b[0]) * 0.5, (simplex[k].0[1] + b[1]) * 0.5];
                    simplex[k] = (p, at(p));
                }
            }
        }
    }
    sort(&mut simplex);
    let (v, w) = eval(Frequency::new(simplex[0].0[0], simplex[0].0[1]));
    (v, w)
}

/// `μ = max |s̃|` over high frequencies.
pub fn smoothing_factor(stencil: &Stencil9, smoother: &SmootherSymbol, opts: &OptimizerOptions) -> Maximum {
    maximize(|w| smoother.eval(stencil, w).ok().map(|z| z.norm()), FrequencyRegion::High, opts)
}

/// `ρ^TG = max ρ(Ê)` over non-excluded low frequencies.
pub fn two_grid_factor(stencil: &Stencil9, smoother: &SmootherSymbol, opts: &OptimizerOptions) -> Maximum {
    maximize(
        |w| match two_grid_symbol(stencil, smoother, w) {
            Ok(t) if !t.excluded => t.spectral_radius().ok(),
            _ => None,
        },
        FrequencyRegion::Low,
        opts,
    )
}
