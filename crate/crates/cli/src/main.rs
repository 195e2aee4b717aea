use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use schwarz_lfa::lfa::OptimizerOptions;
use schwarz_lfa::schwarz::SweepOrdering;
use schwarz_lfa_cli::experiments::{
    parse_cycle, parse_disc, run_lfa, run_solve, write_lfa_csv, write_solve_csv, LfaSpec, SmootherChoice, SolveSpec,
};
use schwarz_lfa_cli::params::{
    default_epsilons, default_thetas, parse_linear_range, parse_list, parse_log_range, parse_real, parse_usize_list,
    SpecError,
};
use schwarz_lfa_cli::verify::{self, Context, Level};

#[derive(Parser)]
#[command(
    name = "schwarz-lfa",
    version,
    about = "Schwarz-smoothed multigrid: LFA sweeps, measured convergence, verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Smoothing factors over an (epsilon, theta, block) grid.
    LfaSmoothing(LfaArgs),
    /// Two-grid convergence factors over an (epsilon, theta, block) grid.
    LfaTwogrid(LfaArgs),
    /// Measured multigrid convergence factors.
    Solve(SolveArgs),
    /// Run the verification checks.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GridArgs {
    /// fd or fe.
    #[arg(long, default_value = "fd")]
    disc: String,
    /// Comma-separated anisotropy ratios.
    #[arg(long, conflicts_with = "eps_range")]
    eps: Option<String>,
    /// Log-spaced ratios as lo:hi:count (default 1e-4:1:17).
    #[arg(long)]
    eps_range: Option<String>,
    /// Comma-separated angles; `pi` is accepted, as in `pi/4`.
    #[arg(long, conflicts_with = "theta_range")]
    theta: Option<String>,
    /// Equispaced angles as lo:hi:count (default 0:pi/2:17, or 0 for solve).
    #[arg(long)]
    theta_range: Option<String>,
    /// schwarz, line-x or none.
    #[arg(long, default_value = "schwarz")]
    smoother: String,
    /// Block lengths in x, e.g. `1,2,4` or `1:12`.
    #[arg(long, default_value = "1")]
    ell: String,
    /// Block height in y.
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Relaxation weight of the block updates.
    #[arg(long, default_value = "1")]
    weight: String,
    /// Output file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LfaArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Samples per axis of the frequency grid seeding the optimizer.
    #[arg(long, default_value_t = 129)]
    samples: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Cells per side of the finest grid.
    #[arg(long, default_value_t = 256)]
    n0: usize,
    /// v, w or tg.
    #[arg(long, default_value = "v")]
    cycle: String,
    /// Overlaps in x, e.g. `0:8`; default ell - 1.
    #[arg(long)]
    overlap_x: Option<String>,
    /// Overlap in y; default m - 1.
    #[arg(long)]
    overlap_y: Option<usize>,
    /// forward or alternating.
    #[arg(long, default_value = "forward")]
    ordering: String,
    /// Number of grids; default coarsens as far as possible.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Stop once the residual norm falls below this value.
    #[arg(long, default_value = "1e-30")]
    rtol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// quick or full.
    #[arg(default_value = "quick")]
    level: String,
    /// Relative perturbation of every stencil centre, for negative testing.
    #[arg(long, default_value_t = 0.0)]
    tamper: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// text or json.
    #[arg(long, default_value = "text")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Spec(SpecError),
    Io(anyhow::Error),
    Verification,
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        Failure::Spec(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

struct Grid {
    disc: schwarz_lfa::model::Discretization,
    epsilons: Vec<f64>,
    thetas: Vec<f64>,
    smoother: SmootherChoice,
    ells: Vec<usize>,
    m: usize,
    weight: f64,
}

fn parse_grid(g: &GridArgs, default_thetas: fn() -> Vec<f64>) -> Result<Grid, SpecError> {
    let epsilons = match (&g.eps, &g.eps_range) {
        (Some(s), _) => parse_list(s)?,
        (_, Some(r)) => parse_log_range(r)?,
        _ => default_epsilons(),
    };
    let thetas = match (&g.theta, &g.theta_range) {
        (Some(s), _) => parse_list(s)?,
        (_, Some(r)) => parse_linear_range(r)?,
        _ => default_thetas(),
    };
    Ok(Grid {
        disc: parse_disc(&g.disc)?,
        epsilons,
        thetas,
        smoother: SmootherChoice::parse(&g.smoother)?,
        ells: parse_usize_list(&g.ell)?,
        m: g.m,
        weight: parse_real(&g.weight)?,
    })
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::Io(with_path(e, p)))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn with_path(e: io::Error, p: &Path) -> anyhow::Error {
    anyhow::Error::new(e).context(format!("cannot write {}", p.display()))
}

fn lfa(args: &LfaArgs, two_grid: bool) -> Result<(), Failure> {
    let g = parse_grid(&args.grid, default_thetas)?;
    if args.samples < 2 {
        return Err(SpecError("samples must be at least 2".into()).into());
    }
    let spec = LfaSpec {
        disc: g.disc,
        epsilons: g.epsilons,
        thetas: g.thetas,
        smoother: g.smoother,
        ells: g.ells,
        m: g.m,
        weight: g.weight,
        optimizer: OptimizerOptions { samples: args.samples, ..OptimizerOptions::default() },
    };
    let rows = run_lfa(&spec, two_grid)?;
    let mut out = output(&args.grid.out)?;
    write_lfa_csv(&rows, two_grid, &mut out)?;
    out.flush()?;
    Ok(())
}

fn grid_aligned() -> Vec<f64> {
    vec![0.0]
}

fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let g = parse_grid(&args.grid, grid_aligned)?;
    let ordering = match args.ordering.as_str() {
        "forward" => SweepOrdering::Forward,
        "alternating" => SweepOrdering::Alternating,
        o => return Err(SpecError(format!("unknown ordering {o:?}")).into()),
    };
    let spec = SolveSpec {
        n0: args.n0,
        cycle: parse_cycle(&args.cycle)?,
        disc: g.disc,
        epsilons: g.epsilons,
        thetas: g.thetas,
        smoother: g.smoother,
        ells: g.ells,
        m: g.m,
        overlap_x: args.overlap_x.as_deref().map(parse_usize_list).transpose()?,
        overlap_y: args.overlap_y,
        weight: g.weight,
        ordering,
        levels: args.levels,
        max_iters: args.max_iters,
        tol: args.rtol,
        seed: args.seed,
    };
    let rows = run_solve(&spec)?;
    let mut out = output(&args.grid.out)?;
    write_solve_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn run_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let level = Level::parse(&args.level).ok_or_else(|| SpecError(format!("unknown level {:?}", args.level)))?;
    let json = match args.format.as_str() {
        "text" => false,
        "json" => true,
        f => return Err(SpecError(format!("unknown format {f:?}")).into()),
    };
    if !args.tamper.is_finite() {
        return Err(SpecError("tamper must be finite".into()).into());
    }
    let ctx = Context { tamper: args.tamper, seed: args.seed };
    let mut out = output(&args.out)?;
    let mut reports = Vec::new();
    for check in verify::checks().iter().filter(|c| level == Level::Full || !c.full_only) {
        let r = verify::run_check(check, &ctx);
        if !json {
            writeln!(out, "{}", r.line())?;
            out.flush()?;
        }
        reports.push(r);
    }
    let failed: Vec<&str> = reports.iter().filter(|r| r.is_failure()).map(|r| r.id).collect();
    if json {
        let doc = serde_json::json!({
            "level": args.level,
            "passed": failed.is_empty(),
            "failed": failed,
            "checks": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).map_err(|e| Failure::Io(e.into()))?)?;
    } else if failed.is_empty() {
        writeln!(out, "all checks passed")?;
    } else {
        writeln!(out, "failed: {}", failed.join(", "))?;
    }
    out.flush()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::LfaSmoothing(a) => lfa(a, false),
        Command::LfaTwogrid(a) => lfa(a, true),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Spec(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Verification) => ExitCode::from(1),
    }
}
