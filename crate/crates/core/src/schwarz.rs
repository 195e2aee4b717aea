//! Overlapping multiplicative Schwarz on rectangular blocks.
//!
//! Point Gauss–Seidel (1×1 blocks) and x-line relaxation (blocks spanning a
//! full grid row) are special cases.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::{GridOperator, GridSpec};
use crate::linalg::DenseLu;
use crate::{Error, Result};

/// Order in which the two passes of a smoothing step visit their blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepOrdering {
    /// One pass, west→east within a block row, block rows south→north.
    Forward,
    /// A forward pass on `ℓ×m` blocks followed by a pass on `m×ℓ` blocks
    /// visited south→north within a block column, columns east→west.
    Alternating,
}

/// Visiting order of the blocks inside one pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepOrder {
    /// x-origin varies fastest, both ascending.
    Forward,
    /// y-origin varies fastest and ascends; x-origin descends.
    Transposed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzConfig {
    pub ell: usize,
    pub m: usize,
    pub overlap_x: usize,
    pub overlap_y: usize,
    pub weight: f64,
    pub ordering: SweepOrdering,
}

impl SchwarzConfig {
    pub fn new(ell: usize, m: usize, overlap_x: usize, overlap_y: usize) -> Result<Self> {
        if ell == 0 || m == 0 {
            return Err(Error::InvalidParameter("block dimensions must be positive"));
        }
        if overlap_x >= ell || overlap_y >= m {
            return Err(Error::InvalidParameter("overlap must be smaller than the block size"));
        }
        Ok(Self { ell, m, overlap_x, overlap_y, weight: 1.0, ordering: SweepOrdering::Forward })
    }

    /// Blocks shifted by one DOF in each direction.
    pub fn maximal(ell: usize, m: usize) -> Result<Self> {
        if ell == 0 || m == 0 {
            return Err(Error::InvalidParameter("block dimensions must be positive"));
        }
        Self::new(ell, m, ell - 1, m - 1)
    }

    pub fn with_weight(mut self, weight: f64) -> Result<Self> {
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::InvalidParameter("relaxation weight must be positive"));
        }
        self.weight = weight;
        Ok(self)
    }

    pub fn with_ordering(mut self, ordering: SweepOrdering) -> Self {
        self.ordering = ordering;
        self
    }

    pub fn stride_x(&self) -> usize {
        self.ell - self.overlap_x
    }

    pub fn stride_y(&self) -> usize {
        self.m - self.overlap_y
    }

    pub fn is_maximal(&self) -> bool {
        self.stride_x() == 1 && self.stride_y() == 1
    }

    /// The same blocks rotated a quarter turn: `m×ℓ`, overlaps swapped.
    pub fn transposed(&self) -> Self {
        Self { ell: self.m, m: self.ell, overlap_x: self.overlap_y, overlap_y: self.overlap_x, ..*self }
    }

    /// Shrink the block so it fits a grid with `side` DOFs per row, keeping
    /// the stride when possible.
    pub fn clamped_to(&self, side: usize) -> Self {
        let fit = |size: usize, overlap: usize| {
            if size <= side {
                (size, overlap)
            } else {
                let stride = (size - overlap).min(side);
                (side, side - stride)
            }
        };
        let (ell, overlap_x) = fit(self.ell, self.overlap_x);
        let (m, overlap_y) = fit(self.m, self.overlap_y);
        Self { ell, m, overlap_x, overlap_y, ..*self }
    }
}

/// Origins `0, s, 2s, …` of blocks of `size` along a line of `len` DOFs,
/// plus one block flush with the far end when the regular ones fall short.
pub fn block_origins(len: usize, size: usize, stride: usize) -> Result<Vec<usize>> {
    if size == 0 || stride == 0 {
        return Err(Error::InvalidParameter("block size and stride must be positive"));
    }
    if size > len {
        return Err(Error::InvalidParameter("block larger than the interior grid"));
    }
    let mut out = Vec::new();
    let mut o = 0;
    while o + size <= len {
        out.push(o);
        o += stride;
    }
    let last = *out.last().expect("at least one block fits");
    if last + size < len {
        out.push(len - size);
    }
    Ok(out)
}

/// One rectangular subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct Subdomain {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
    /// Global DOF indices, x fastest.
    pub dofs: Vec<usize>,
    /// Index into the plan's factorization table.
    pub factor: usize,
}

/// Ordered subdomains of one pass, with factorizations of their local
/// matrices shared between identical blocks.
#[derive(Debug, Clone)]
pub struct SubdomainPlan {
    pub dim: usize,
    pub subdomains: Vec<Subdomain>,
    factors: Vec<DenseLu<f64>>,
}

/// Origins in visiting order for the given block layout.
pub fn subdomain_origins(grid: GridSpec, cfg: &SchwarzConfig, order: SweepOrder) -> Result<Vec<(usize, usize)>> {
    let side = grid.side();
    let xs = block_origins(side, cfg.ell, cfg.stride_x())?;
    let ys = block_origins(side, cfg.m, cfg.stride_y())?;
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    match order {
        SweepOrder::Forward => {
            for &y in &ys {
                for &x in &xs {
                    out.push((x, y));
                }
            }
        }
        SweepOrder::Transposed => {
            for &x in xs.iter().rev() {
                for &y in &ys {
                    out.push((x, y));
                }
            }
        }
    }
    Ok(out)
}

/// Forward-order plan for `A` with `cfg`'s block shape.
pub fn plan_subdomains(a: &GridOperator, cfg: &SchwarzConfig) -> Result<SubdomainPlan> {
    plan_subdomains_ordered(a, cfg, SweepOrder::Forward)
}

pub fn plan_subdomains_ordered(a: &GridOperator, cfg: &SchwarzConfig, order: SweepOrder) -> Result<SubdomainPlan> {
    let grid = a.grid;
    let origins = subdomain_origins(grid, cfg, order)?;
    let (w, h) = (cfg.ell, cfg.m);
    let size = w * h;
    let mut cache: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut factors = Vec::new();
    let mut subdomains = Vec::with_capacity(origins.len());
    let mut local = vec![0.0; size * size];
    for (x0, y0) in origins {
        let mut dofs = Vec::with_capacity(size);
        for j in y0..y0 + h {
            for i in x0..x0 + w {
                dofs.push(grid.index(i, j));
            }
        }
        local.iter_mut().for_each(|v| *v = 0.0);
        for (p, &g) in dofs.iter().enumerate() {
            for (c, v) in a.matrix.row(g) {
                let (ci, cj) = grid.coords(c);
                if ci >= x0 && ci < x0 + w && cj >= y0 && cj < y0 + h {
                    local[p * size + (cj - y0) * w + (ci - x0)] += v;
                }
            }
        }
        let key: Vec<u64> = local.iter().map(|v| v.to_bits()).collect();
        let factor = match cache.get(&key) {
            Some(&k) => k,
            None => {
                factors.push(DenseLu::factor(size, local.clone())?);
                cache.insert(key, factors.len() - 1);
                factors.len() - 1
            }
        };
        subdomains.push(Subdomain { x0, y0, width: w, height: h, dofs, factor });
    }
    Ok(SubdomainPlan { dim: a.dim(), subdomains, factors })
}

impl SubdomainPlan {
    /// A plan with no blocks; sweeping with it is the identity.
    pub fn empty(dim: usize) -> Self {
        Self { dim, subdomains: Vec::new(), factors: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.subdomains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subdomains.is_empty()
    }

    /// Number of distinct factorizations kept.
    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    /// Every DOF is in at least one block.
    pub fn covers_all(&self) -> bool {
        let mut seen = vec![false; self.dim];
        for s in &self.subdomains {
            for &d in &s.dofs {
                seen[d] = true;
            }
        }
        seen.into_iter().all(|v| v)
    }
}

/// One multiplicative pass: for each block in order,
/// `x_S ← x_S + w A_S⁻¹ (b − A x)_S` with the current `x`.
pub fn sweep(a: &GridOperator, x: &mut [f64], b: &[f64], plan: &SubdomainPlan, w: f64) -> Result<()> {
    let n = a.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    if plan.dim != n {
        return Err(Error::DimensionMismatch { expected: n, found: plan.dim });
    }
    let m = &a.matrix;
    let mut r = Vec::new();
    for s in &plan.subdomains {
        r.clear();
        for &g in &s.dofs {
            let mut v = b[g];
            for k in m.indptr[g]..m.indptr[g + 1] {
                v -= m.values[k] * x[m.indices[k]];
            }
            r.push(v);
        }
        plan.factors[s.factor].solve_in_place(&mut r)?;
        for (&g, &d) in s.dofs.iter().zip(&r) {
            x[g] += w * d;
        }
    }
    Ok(())
}

/// Sweep with `plan_x` and then with `plan_y`.
pub fn alternating_sweep(
    a: &GridOperator,
    x: &mut [f64],
    b: &[f64],
    plan_x: &SubdomainPlan,
    plan_y: &SubdomainPlan,
    w: f64,
) -> Result<()> {
    sweep(a, x, b, plan_x, w)?;
    sweep(a, x, b, plan_y, w)
}

/// Which relaxation a multigrid level runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmootherKind {
    Schwarz(SchwarzConfig),
    /// Non-overlapping blocks spanning whole x-lines.
    LineX,
    /// No smoothing.
    None,
}

/// Factored passes for one grid level.
#[derive(Debug, Clone)]
pub struct Smoother {
    passes: Vec<SubdomainPlan>,
    weight: f64,
}

impl Smoother {
    pub fn build(a: &GridOperator, kind: &SmootherKind) -> Result<Self> {
        let side = a.grid.side();
        match kind {
            SmootherKind::None => Ok(Self { passes: Vec::new(), weight: 1.0 }),
            SmootherKind::LineX => {
                let cfg = SchwarzConfig::new(side, 1, 0, 0)?;
                Ok(Self { passes: vec![plan_subdomains(a, &cfg)?], weight: 1.0 })
            }
            SmootherKind::Schwarz(cfg) => {
                let cfg = cfg.clamped_to(side);
                let mut passes = vec![plan_subdomains(a, &cfg)?];
                if cfg.ordering == SweepOrdering::Alternating {
                    passes.push(plan_subdomains_ordered(a, &cfg.transposed(), SweepOrder::Transposed)?);
                }
                Ok(Self { passes, weight: cfg.weight })
            }
        }
    }

    pub fn passes(&self) -> &[SubdomainPlan] {
        &self.passes
    }

    pub fn apply(&self, a: &GridOperator, x: &mut [f64], b: &[f64]) -> Result<()> {
        for p in &self.passes {
            sweep(a, x, b, p, self.weight)?;
        }
        Ok(())
    }
}
