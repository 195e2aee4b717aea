//! Parameter sweeps behind the `lfa-smoothing`, `lfa-twogrid` and `solve`
//! subcommands, and their CSV schemas.

use std::io::Write;

use rayon::prelude::*;
use schwarz_lfa::assembly::GridSpec;
use schwarz_lfa::lfa::{smoothing_factor, two_grid_factor, OptimizerOptions, SmootherSymbol};
use schwarz_lfa::model::{pde_coefficients, Discretization, Stencil9};
use schwarz_lfa::multigrid::{build_hierarchy, measure_convergence, CycleKind, SolveOptions};
use schwarz_lfa::schwarz::{SchwarzConfig, SmootherKind, SweepOrdering};

use crate::params::{check_epsilons, check_thetas, SpecError};

/// Smoother family selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmootherChoice {
    Schwarz,
    LineX,
    /// No smoothing; for two-grid analysis this leaves the coarse-grid
    /// correction alone.
    None,
}

impl SmootherChoice {
    pub fn parse(s: &str) -> Result<Self, SpecError> {
        match s {
            "schwarz" => Ok(Self::Schwarz),
            "line-x" => Ok(Self::LineX),
            "none" => Ok(Self::None),
            _ => Err(SpecError(format!("unknown smoother {s:?}"))),
        }
    }
}

pub fn parse_disc(s: &str) -> Result<Discretization, SpecError> {
    match s {
        "fd" => Ok(Discretization::Fd),
        "fe" => Ok(Discretization::Fe),
        _ => Err(SpecError(format!("unknown discretization {s:?}"))),
    }
}

pub fn parse_cycle(s: &str) -> Result<CycleKind, SpecError> {
    match s {
        "v" => Ok(CycleKind::V),
        "w" => Ok(CycleKind::W),
        "tg" => Ok(CycleKind::TwoGrid),
        _ => Err(SpecError(format!("unknown cycle {s:?}"))),
    }
}

pub fn stencil(disc: Discretization, epsilon: f64, theta: f64) -> Result<Stencil9, SpecError> {
    Ok(disc.stencil(&pde_coefficients(epsilon, theta)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LfaSpec {
    pub disc: Discretization,
    pub epsilons: Vec<f64>,
    pub thetas: Vec<f64>,
    pub smoother: SmootherChoice,
    pub ells: Vec<usize>,
    pub m: usize,
    pub weight: f64,
    pub optimizer: OptimizerOptions,
}

impl LfaSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        check_epsilons(&self.epsilons)?;
        check_thetas(&self.thetas)?;
        if self.ells.is_empty() || self.ells.contains(&0) || self.m == 0 {
            return Err(SpecError("block dimensions must be positive".into()));
        }
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(SpecError("weight must be positive".into()));
        }
        if self.optimizer.samples < 2 {
            return Err(SpecError("at least 2 samples per axis are needed".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LfaRow {
    pub disc: Discretization,
    pub epsilon: f64,
    pub theta: f64,
    pub block: String,
    pub ell: usize,
    pub m: usize,
    pub weight: f64,
    pub mu: f64,
    pub rho_tg: Option<f64>,
    pub excluded: Option<usize>,
}

fn symbol_for(choice: SmootherChoice, ell: usize, m: usize, weight: f64) -> (SmootherSymbol, String) {
    match choice {
        SmootherChoice::Schwarz => (SmootherSymbol::for_block(ell, m, weight), format!("{ell}x{m}")),
        SmootherChoice::LineX => (SmootherSymbol::LineX, "line-x".into()),
        SmootherChoice::None => (SmootherSymbol::Identity, "none".into()),
    }
}

/// One row per `(ε, θ, ℓ)` cell in that nesting order.
pub fn run_lfa(spec: &LfaSpec, two_grid: bool) -> Result<Vec<LfaRow>, SpecError> {
    spec.validate()?;
    let mut cells = Vec::new();
    for &e in &spec.epsilons {
        for &t in &spec.thetas {
            for &l in &spec.ells {
                cells.push((e, t, l));
            }
        }
    }
    cells
        .par_iter()
        .map(|&(epsilon, theta, ell)| {
            let s = stencil(spec.disc, epsilon, theta)?;
            let (sym, block) = symbol_for(spec.smoother, ell, spec.m, spec.weight);
            let mu = smoothing_factor(&s, &sym, &spec.optimizer);
            let tg = two_grid.then(|| two_grid_factor(&s, &sym, &spec.optimizer));
            Ok(LfaRow {
                disc: spec.disc,
                epsilon,
                theta,
                block,
                ell,
                m: spec.m,
                weight: spec.weight,
                mu: mu.value,
                rho_tg: tg.map(|t| t.value),
                excluded: tg.map(|t| t.excluded),
            })
        })
        .collect()
}

pub const SMOOTHING_HEADER: [&str; 8] = ["disc", "epsilon", "theta", "block", "ell", "m", "weight", "mu"];
pub const TWOGRID_HEADER: [&str; 10] =
    ["disc", "epsilon", "theta", "block", "ell", "m", "weight", "mu", "rho_tg", "excluded"];
pub const SOLVE_HEADER: [&str; 13] = [
    "n0",
    "cycle",
    "disc",
    "epsilon",
    "theta",
    "ell",
    "m",
    "overlap_x",
    "overlap_y",
    "iters",
    "rho_measured",
    "seed",
    "reason",
];

pub fn write_lfa_csv<W: Write>(rows: &[LfaRow], two_grid: bool, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if two_grid {
        w.write_record(TWOGRID_HEADER)?;
    } else {
        w.write_record(SMOOTHING_HEADER)?;
    }
    for r in rows {
        let mut rec = vec![
            r.disc.name().to_string(),
            r.epsilon.to_string(),
            r.theta.to_string(),
            r.block.clone(),
            r.ell.to_string(),
            r.m.to_string(),
            r.weight.to_string(),
            r.mu.to_string(),
        ];
        if two_grid {
            rec.push(r.rho_tg.map(|v| v.to_string()).unwrap_or_default());
            rec.push(r.excluded.map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveSpec {
    pub n0: usize,
    pub cycle: CycleKind,
    pub disc: Discretization,
    pub epsilons: Vec<f64>,
    pub thetas: Vec<f64>,
    pub smoother: SmootherChoice,
    pub ells: Vec<usize>,
    pub m: usize,
    /// `None` means maximal overlap.
    pub overlap_x: Option<Vec<usize>>,
    pub overlap_y: Option<usize>,
    pub weight: f64,
    pub ordering: SweepOrdering,
    /// `None` coarsens down to the smallest grid.
    pub levels: Option<usize>,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl SolveSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        check_epsilons(&self.epsilons)?;
        check_thetas(&self.thetas)?;
        if !self.n0.is_power_of_two() || self.n0 < 4 {
            return Err(SpecError(format!("n0 = {} must be a power of two, at least 4", self.n0)));
        }
        if self.ells.is_empty() || self.ells.contains(&0) || self.m == 0 {
            return Err(SpecError("block dimensions must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(SpecError("max-iters must be positive".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(SpecError("rtol must be non-negative".into()));
        }
        if self.levels == Some(0) {
            return Err(SpecError("levels must be positive".into()));
        }
        if self.cycle == CycleKind::TwoGrid && self.levels.is_some_and(|l| l != 2) {
            return Err(SpecError("a two-grid cycle uses exactly 2 levels".into()));
        }
        Ok(())
    }

    fn levels(&self) -> usize {
        match (self.cycle, self.levels) {
            (CycleKind::TwoGrid, _) => 2,
            (_, Some(l)) => l,
            (_, None) => usize::MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveRow {
    pub n0: usize,
    pub cycle: CycleKind,
    pub disc: Discretization,
    pub epsilon: f64,
    pub theta: f64,
    pub ell: usize,
    pub m: usize,
    pub overlap_x: usize,
    pub overlap_y: usize,
    pub iters: usize,
    pub rho_measured: f64,
    pub seed: u64,
    pub reason: &'static str,
}

/// Build and run one configuration.
pub fn solve_one(
    spec: &SolveSpec,
    epsilon: f64,
    theta: f64,
    ell: usize,
    ox: usize,
    oy: usize,
) -> Result<SolveRow, SpecError> {
    let s = stencil(spec.disc, epsilon, theta)?;
    let kind = match spec.smoother {
        SmootherChoice::Schwarz => SmootherKind::Schwarz(
            SchwarzConfig::new(ell, spec.m, ox, oy)?.with_weight(spec.weight)?.with_ordering(spec.ordering),
        ),
        SmootherChoice::LineX => SmootherKind::LineX,
        SmootherChoice::None => SmootherKind::None,
    };
    let grid = GridSpec::new(spec.n0)?;
    let h = build_hierarchy(grid, &s, kind, spec.levels())?;
    let opts = SolveOptions { kind: spec.cycle, max_iters: spec.max_iters, tol: spec.tol };
    let r = measure_convergence(&h, spec.seed, &opts)?;
    Ok(SolveRow {
        n0: spec.n0,
        cycle: spec.cycle,
        disc: spec.disc,
        epsilon,
        theta,
        ell,
        m: spec.m,
        overlap_x: ox,
        overlap_y: oy,
        iters: r.iterations,
        rho_measured: r.rho,
        seed: r.seed,
        reason: r.reason.name(),
    })
}

/// One row per `(ε, θ, ℓ, overlap_x)` cell in that nesting order.
pub fn run_solve(spec: &SolveSpec) -> Result<Vec<SolveRow>, SpecError> {
    spec.validate()?;
    let oy = spec.overlap_y.unwrap_or(spec.m - 1);
    let mut cells = Vec::new();
    for &e in &spec.epsilons {
        for &t in &spec.thetas {
            for &l in &spec.ells {
                let oxs = spec.overlap_x.clone().unwrap_or_else(|| vec![l - 1]);
                for ox in oxs {
                    cells.push((e, t, l, ox));
                }
            }
        }
    }
    cells.par_iter().map(|&(e, t, l, ox)| solve_one(spec, e, t, l, ox, oy)).collect()
}

pub fn write_solve_csv<W: Write>(rows: &[SolveRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SOLVE_HEADER)?;
    for r in rows {
        w.write_record([
            r.n0.to_string(),
            r.cycle.name().to_string(),
            r.disc.name().to_string(),
            r.epsilon.to_string(),
            r.theta.to_string(),
            r.ell.to_string(),
            r.m.to_string(),
            r.overlap_x.to_string(),
            r.overlap_y.to_string(),
            r.iters.to_string(),
            r.rho_measured.to_string(),
            r.seed.to_string(),
            r.reason.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
