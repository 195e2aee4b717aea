//! Galerkin hierarchies, V/W/two-grid cycles with one pre- and one
//! post-smoothing step, and the residual-ratio convergence harness.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::assembly::{assemble, GridOperator, GridSpec};
use crate::linalg::BandedLu;
use crate::model::Stencil9;
use crate::schwarz::{SchwarzConfig, Smoother, SmootherKind};
use crate::transfer::{build_transfers, galerkin, TransferPair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleKind {
    V,
    W,
    TwoGrid,
}

impl CycleKind {
    pub fn name(self) -> &'static str {
        match self {
            CycleKind::V => "v",
            CycleKind::W => "w",
            CycleKind::TwoGrid => "tg",
        }
    }
}

impl From<SchwarzConfig> for SmootherKind {
    fn from(cfg: SchwarzConfig) -> Self {
        SmootherKind::Schwarz(cfg)
    }
}

/// One grid of the hierarchy.
#[derive(Debug, Clone)]
pub struct Level {
    pub op: GridOperator,
    /// Absent on the coarsest level of a multilevel hierarchy.
    pub smoother: Option<Smoother>,
    /// Transfers to the next coarser level.
    pub transfer: Option<TransferPair>,
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub levels: Vec<Level>,
    coarse: Option<BandedLu>,
}

/// Build the Galerkin chain from the fine-grid stencil.
///
/// Coarsening continues while fewer than `levels` grids exist and the
/// current grid has more than 4 cells per side.
pub fn build_hierarchy(
    grid: GridSpec,
    stencil: &Stencil9,
    smoother: impl Into<SmootherKind>,
    levels: usize,
) -> Result<Hierarchy> {
    let a0 = assemble(grid, stencil)?;
    hierarchy_from_operator(a0, smoother, levels)
}

pub fn hierarchy_from_operator(
    a0: GridOperator,
    smoother: impl Into<SmootherKind>,
    levels: usize,
) -> Result<Hierarchy> {
    let kind = smoother.into();
    if !a0.grid.n().is_power_of_two() {
        return Err(Error::InvalidParameter("fine grid divisor must be a power of two"));
    }
    if levels == 0 {
        return Err(Error::InvalidParameter("at least one level is required"));
    }
    let mut ops = vec![a0];
    let mut transfers = Vec::new();
    while ops.len() < levels && ops.last().map(|a| a.grid.n() > 4).unwrap_or(false) {
        let fine = ops.last().unwrap();
        let t = build_transfers(fine.grid)?;
        let coarse = galerkin(fine, &t)?;
        transfers.push(t);
        ops.push(coarse);
    }
    let count = ops.len();
    let coarse = if count > 1 {
        let a = &ops[count - 1];
        let (kl, ku) = a.matrix.bandwidths();
        let entries = (0..a.dim()).flat_map(|r| a.matrix.row(r).map(move |(c, v)| (r, c, v)));
        Some(BandedLu::factor_from_entries(a.dim(), kl, ku, entries)?)
    } else {
        None
    };
    let mut transfers = transfers.into_iter();
    let mut out = Vec::with_capacity(count);
    for (k, op) in ops.into_iter().enumerate() {
        let smoother = if k + 1 < count || count == 1 { Some(Smoother::build(&op, &kind)?) } else { None };
        let transfer = if k + 1 < count { transfers.next() } else { None };
        out.push(Level { op, smoother, transfer });
    }
    Ok(Hierarchy { levels: out, coarse })
}

impl Hierarchy {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn fine(&self) -> &GridOperator {
        &self.levels[0].op
    }
}

/// Apply one cycle to `x` for `A₀ x = b`.
pub fn cycle(h: &Hierarchy, x: &mut [f64], b: &[f64], kind: CycleKind) -> Result<()> {
    let n = h.fine().dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    if kind == CycleKind::TwoGrid && h.depth() != 2 {
        return Err(Error::InvalidParameter("a two-grid cycle needs a two-level hierarchy"));
    }
    cycle_level(h, 0, x, b, kind)
}

fn cycle_level(h: &Hierarchy, k: usize, x: &mut [f64], b: &[f64], kind: CycleKind) -> Result<()> {
    let last = h.depth() - 1;
    let level = &h.levels[k];
    if k == last && last > 0 {
        x.copy_from_slice(b);
        return h.coarse.as_ref().expect("coarse factor").solve_in_place(x);
    }
    if let Some(s) = &level.smoother {
        s.apply(&level.op, x, b)?;
    }
    if let Some(t) = &level.transfer {
        let r = level.op.matrix.residual(x, b)?;
        let rc = t.r.apply(&r)?;
        let mut ec = vec![0.0; rc.len()];
        let visits = if kind == CycleKind::W && k + 1 < last { 2 } else { 1 };
        for _ in 0..visits {
            cycle_level(h, k + 1, &mut ec, &rc, kind)?;
        }
        let e = t.p.apply(&ec)?;
        for (xi, ei) in x.iter_mut().zip(&e) {
            *xi += ei;
        }
    }
    if let Some(s) = &level.smoother {
        s.apply(&level.op, x, b)?;
    }
    Ok(())
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminationReason {
    Tolerance,
    MaxIterations,
    /// Residual became non-finite or grew by more than `1e10`.
    Diverged,
}

impl TerminationReason {
    pub fn name(self) -> &'static str {
        match self {
            TerminationReason::Tolerance => "tolerance",
            TerminationReason::MaxIterations => "max_iters",
            TerminationReason::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub kind: CycleKind,
    pub max_iters: usize,
    /// Absolute tolerance on the Euclidean residual norm.
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { kind: CycleKind::V, max_iters: 100, tol: 1e-30 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub iterations: usize,
    /// `‖r_K‖ / ‖r_{K−1}‖` for the last two residuals.
    pub rho: f64,
    /// `‖r_0‖, ‖r_1‖, …, ‖r_K‖`.
    pub history: Vec<f64>,
    pub reason: TerminationReason,
    pub seed: u64,
}

/// Entries uniform in `[0, 1)` from a ChaCha8 stream seeded with `seed`.
pub fn uniform_vector(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)).collect()
}

fn norm2(v: &[f64]) -> f64 {
    Float::sqrt(v.iter().map(|x| x * x).sum::<f64>())
}

/// Solve `A₀ x = 0` from a random start and record residual norms.
pub fn measure_convergence(h: &Hierarchy, seed: u64, opts: &SolveOptions) -> Result<ConvergenceReport> {
    if opts.max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be positive"));
    }
    let a = h.fine();
    let n = a.dim();
    let b = vec![0.0; n];
    let mut x = uniform_vector(n, seed);
    let r0 = norm2(&a.matrix.residual(&x, &b)?);
    let mut history = vec![r0];
    let mut reason = TerminationReason::MaxIterations;
    if r0 < opts.tol {
        reason = TerminationReason::Tolerance;
    } else {
        for _ in 0..opts.max_iters {
            cycle(h, &mut x, &b, opts.kind)?;
            let r = norm2(&a.matrix.residual(&x, &b)?);
            history.push(r);
            if !r.is_finite() || r > 1e10 * r0 {
                reason = TerminationReason::Diverged;
                break;
            }
            if r < opts.tol {
                reason = TerminationReason::Tolerance;
                break;
            }
        }
    }
    let k = history.len() - 1;
    let rho = if k == 0 { 0.0 } else { history[k] / history[k - 1] };
    Ok(ConvergenceReport { iterations: k, rho, history, reason, seed })
}
