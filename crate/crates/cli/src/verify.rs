//! Pass/fail checks of the numerical library against closed forms, dense
//! oracles and reference values.
//!
//! `quick` runs everything that needs no large multigrid solve; `full` adds
//! the measured-convergence checks.

use std::f64::consts::{FRAC_PI_4, PI};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use schwarz_lfa::assembly::{assemble, GridOperator, GridSpec};
use schwarz_lfa::lfa::{
    smoothing_factor, symbol_schwarz_2x2, two_grid_factor, Frequency, OptimizerOptions, SmootherSymbol,
};
use schwarz_lfa::model::{pde_coefficients, Discretization, Stencil9};
use schwarz_lfa::multigrid::{build_hierarchy, measure_convergence, uniform_vector, CycleKind, SolveOptions};
use schwarz_lfa::schwarz::{plan_subdomains, sweep, SchwarzConfig};
use schwarz_lfa::theory::{b0_matrix, ell_star, lemma_b1_solve, sherman_morrison_solve, two_by_two_series, LemmaCase};
use schwarz_lfa::C64;

use crate::oracle::{complex_solve, forward_blocks, matvec, schwarz_propagator};
use crate::params::logspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "quick" => Some(Level::Quick),
            "full" => Some(Level::Full),
            _ => None,
        }
    }
}

/// Shared settings for a verification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Context {
    /// Relative perturbation applied to every stencil's centre entry.
    pub tamper: f64,
    pub seed: u64,
}

impl Default for Context {
    fn default() -> Self {
        Self { tamper: 0.0, seed: 0 }
    }
}

impl Context {
    fn stencil(&self, disc: Discretization, eps: f64, theta: f64) -> Stencil9 {
        let mut s = disc.stencil(&pde_coefficients(eps, theta).expect("valid coefficients"));
        s.c *= 1.0 + self.tamper;
        s
    }
}

pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

pub struct Check {
    pub id: &'static str,
    pub title: &'static str,
    pub budget: Duration,
    pub full_only: bool,
    /// Failure is the documented result; it does not fail the run.
    pub known_deviation: Option<&'static str>,
    run: fn(&Context) -> Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub known_deviation: Option<&'static str>,
}

impl Report {
    /// Whether this result should fail the run.
    pub fn is_failure(&self) -> bool {
        !self.passed && self.known_deviation.is_none()
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "{} [{}] {}: {} ({:.1} s of {:.0} s)",
            self.status(),
            self.id,
            self.title,
            self.detail,
            self.seconds,
            self.budget_seconds
        );
        if let (false, Some(why)) = (self.passed, self.known_deviation) {
            s.push_str(&format!(" [known deviation: {why}]"));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "id": self.id,
            "title": self.title,
            "status": self.status(),
            "passed": self.passed,
            "detail": self.detail,
            "seconds": self.seconds,
            "budget_seconds": self.budget_seconds,
            "known_deviation": self.known_deviation,
        })
    }
}

pub fn checks() -> Vec<Check> {
    let secs = Duration::from_secs;
    vec![
        Check {
            id: "1",
            title: "Gauss-Seidel smoothing factor",
            budget: secs(5),
            full_only: false,
            known_deviation: None,
            run: gauss_seidel,
        },
        Check {
            id: "2",
            title: "x-line smoothing factor",
            budget: secs(10),
            full_only: false,
            known_deviation: None,
            run: line_smoothing,
        },
        Check {
            id: "3",
            title: "2x2 block slopes",
            budget: secs(30),
            full_only: false,
            known_deviation: None,
            run: two_by_two_slopes,
        },
        Check {
            id: "4",
            title: "lx1 block slopes",
            budget: secs(120),
            full_only: false,
            known_deviation: None,
            run: ell_slopes,
        },
        Check {
            id: "5",
            title: "closed-form block solves",
            budget: secs(10),
            full_only: false,
            known_deviation: None,
            run: closed_forms,
        },
        Check {
            id: "6",
            title: "sweep equals assembled error propagator",
            budget: secs(30),
            full_only: false,
            known_deviation: None,
            run: propagator,
        },
        Check {
            id: "7",
            title: "measured W-cycle vs two-grid LFA",
            budget: secs(180),
            full_only: true,
            known_deviation: None,
            run: measured_vs_lfa,
        },
        Check {
            id: "8",
            title: "9x1 V-cycle factors across overlap",
            budget: secs(300),
            full_only: true,
            known_deviation: None,
            run: overlap_sweep,
        },
        Check {
            id: "9",
            title: "block-length law",
            budget: secs(120),
            full_only: false,
            known_deviation: None,
            run: block_length_law,
        },
        Check {
            id: "10",
            title: "rotated 2x2 contrast",
            budget: secs(60),
            full_only: false,
            known_deviation: None,
            run: rotated_contrast,
        },
        Check {
            id: "11",
            title: "weighted 2x2 argmin",
            budget: secs(30),
            full_only: false,
            known_deviation: Some(
                "the minimizer is near w = 1.25 for every epsilon; only the minimum value is close to the w = 1 value",
            ),
            run: weighted_argmin,
        },
        Check {
            id: "contour",
            title: "rho = 0.5 contour slope",
            budget: secs(600),
            full_only: true,
            known_deviation: None,
            run: contour_slope,
        },
    ]
}

/// Run the checks selected by `level`, in order.
pub fn run(level: Level, ctx: &Context) -> Vec<Report> {
    checks().iter().filter(|c| level == Level::Full || !c.full_only).map(|c| run_check(c, ctx)).collect()
}

pub fn run_check(c: &Check, ctx: &Context) -> Report {
    let t = Instant::now();
    let o = (c.run)(ctx);
    let dt = t.elapsed();
    let mut detail = o.detail;
    let in_time = dt <= c.budget;
    if !in_time {
        detail.push_str("; over the time budget");
    }
    Report {
        id: c.id,
        title: c.title,
        passed: o.passed && in_time,
        detail,
        seconds: dt.as_secs_f64(),
        budget_seconds: c.budget.as_secs_f64(),
        known_deviation: c.known_deviation,
    }
}

fn mu(ctx: &Context, disc: Discretization, eps: f64, theta: f64, sm: SmootherSymbol) -> f64 {
    smoothing_factor(&ctx.stencil(disc, eps, theta), &sm, &OptimizerOptions::default()).value
}

const DISCS: [Discretization; 2] = [Discretization::Fd, Discretization::Fe];

fn gauss_seidel(ctx: &Context) -> Outcome {
    let m = mu(ctx, Discretization::Fd, 1.0, 0.0, SmootherSymbol::GaussSeidel);
    outcome((m - 0.5).abs() <= 1e-3, format!("mu = {m:.6}, want 0.5 +/- 1e-3"))
}

fn line_smoothing(ctx: &Context) -> Outcome {
    let want = 1.0 / 5f64.sqrt();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for disc in DISCS {
        for eps in [1.0, 0.1, 1e-3] {
            let m = mu(ctx, disc, eps, 0.0, SmootherSymbol::LineX);
            worst = worst.max((m - want).abs());
            parts.push(format!("{} {eps:e}: {m:.5}", disc.name()));
        }
    }
    outcome(worst <= 1e-3, format!("{}; max |mu - 1/sqrt5| = {worst:.2e}", parts.join(", ")))
}

fn slope_message(disc: Discretization, label: &str, eps: f64, got: f64, want: f64) -> String {
    format!("{} {label} eps={eps:e}: {got:.3} (want {want:.3})", disc.name())
}

fn two_by_two_slopes(ctx: &Context) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (disc, c) in [(Discretization::Fd, 12.0), (Discretization::Fe, 19.2)] {
        for eps in [1e-3, 1e-4] {
            let m = mu(ctx, disc, eps, 0.0, SmootherSymbol::Schwarz2x2 { weight: 1.0 });
            let slope = (1.0 - m) / eps;
            ok &= slope >= 0.95 * c && slope <= 1.05 * c;
            parts.push(slope_message(disc, "2x2", eps, slope, c));
        }
    }
    outcome(ok, parts.join(", "))
}

fn ell_slopes(ctx: &Context) -> Outcome {
    let cells: Vec<(Discretization, usize)> =
        DISCS.iter().flat_map(|&d| [2usize, 5, 10].into_iter().map(move |l| (d, l))).collect();
    let results: Vec<(bool, String)> = cells
        .par_iter()
        .map(|&(disc, ell)| {
            let l = ell as f64;
            let c = match disc {
                Discretization::Fd => l * (l + 1.0),
                Discretization::Fe => 1.5 * l * (l + 1.0),
            };
            let sm = SmootherSymbol::SchwarzEllx1 { ell, weight: 1.0 };
            let mut last = String::new();
            for eps in [1e-4, 1e-5] {
                let slope = (1.0 - mu(ctx, disc, eps, 0.0, sm)) / eps;
                last = slope_message(disc, &format!("{ell}x1"), eps, slope, c);
                if (slope - c).abs() <= 0.05 * c {
                    return (true, last);
                }
            }
            (false, last)
        })
        .collect();
    let ok = results.iter().all(|r| r.0);
    outcome(ok, results.into_iter().map(|r| r.1).collect::<Vec<_>>().join(", "))
}

/// SplitMix64 for reproducible test data.
struct Mix(u64);

impl Mix {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn complex(&mut self) -> C64 {
        C64::new(2.0 * self.next() - 1.0, 2.0 * self.next() - 1.0)
    }
}

fn rel_err(a: &[C64], b: &[C64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    d / b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt().max(1e-300)
}

fn closed_forms(ctx: &Context) -> Outcome {
    let mut rng = Mix(ctx.seed ^ 0x5eed);
    let (mut lemma, mut sm): (f64, f64) = (0.0, 0.0);
    for ell in 1..=20 {
        let b0: Vec<C64> = b0_matrix(ell).into_iter().map(|v| C64::new(v, 0.0)).collect();
        for _ in 0..50 {
            let a = C64::from_polar(1.0, 2.0 * PI * rng.next());
            for case in LemmaCase::ALL {
                let (x, _) = lemma_b1_solve(case, ell, a).expect("ell >= 1");
                lemma = lemma.max(rel_err(&x, &complex_solve(ell, &b0, &case.rhs(ell, a))));
            }
            let (f, d) = (rng.complex(), rng.complex());
            let xi: Vec<C64> = (0..ell).map(|_| rng.complex()).collect();
            let mut m = b0.clone();
            for r in 0..ell {
                m[r * ell] += d * a.powu(r as u32) + if r == 0 { f } else { C64::new(0.0, 0.0) };
            }
            if let Ok(eta) = sherman_morrison_solve(ell, a, f, d, &xi) {
                sm = sm.max(rel_err(&eta, &complex_solve(ell, &m, &xi)));
            }
        }
    }
    let (a0, a1) = two_by_two_series(Discretization::Fd).expect("series");
    let want = [-12.0, -10.0, -6.0, -4.0];
    let series = (0..4)
        .map(|k| (a1[k] - C64::new(want[k], 0.0)).norm().max((a0[k] - C64::new(1.0, 0.0)).norm()))
        .fold(0.0, f64::max);
    let ok = lemma <= 1e-11 && sm <= 1e-11 && series <= 1e-10;
    let alpha: Vec<String> = a1.iter().map(|z| format!("{:.6}", z.re)).collect();
    outcome(
        ok,
        format!(
            "block solve rel err {lemma:.1e}, Sherman-Morrison rel err {sm:.1e}, alpha1 = ({}) err {series:.1e}",
            alpha.join(", ")
        ),
    )
}

fn propagator_error(a: &GridOperator, cfg: &SchwarzConfig, seed: u64) -> f64 {
    let side = a.grid.side();
    let n = a.dim();
    let plan = plan_subdomains(a, cfg).expect("block fits");
    let e = schwarz_propagator(
        n,
        &a.matrix.to_dense(),
        &forward_blocks(side, cfg.ell, cfg.m, cfg.stride_x(), cfg.stride_y()),
    )
    .expect("nonsingular blocks");
    let b = vec![0.0; n];
    (0..20)
        .map(|k| {
            let e0: Vec<f64> = uniform_vector(n, seed.wrapping_add(k)).iter().map(|v| 2.0 * v - 1.0).collect();
            let mut x = e0.clone();
            sweep(a, &mut x, &b, &plan, 1.0).expect("sweep");
            let want = matvec(n, &e, &e0);
            x.iter().zip(&want).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn propagator(ctx: &Context) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [5, 6, 7] {
        let g = GridSpec::new(n).expect("grid");
        for s in [ctx.stencil(Discretization::Fd, 0.01, 0.4), ctx.stencil(Discretization::Fe, 0.1, 1.1)] {
            let a = assemble(g, &s).expect("assembly");
            for (ell, m) in [(1, 1), (2, 2), (3, 1), (2, 1)] {
                for cfg in [SchwarzConfig::new(ell, m, 0, 0), SchwarzConfig::maximal(ell, m)] {
                    worst = worst.max(propagator_error(&a, &cfg.expect("config"), ctx.seed));
                    count += 1;
                }
            }
        }
    }
    outcome(worst <= 1e-11, format!("{count} configurations, max abs deviation {worst:.1e}"))
}

fn measured_rho(
    ctx: &Context,
    n0: usize,
    eps: f64,
    cfg: SchwarzConfig,
    kind: CycleKind,
) -> schwarz_lfa::multigrid::ConvergenceReport {
    let s = ctx.stencil(Discretization::Fd, eps, 0.0);
    let h = build_hierarchy(GridSpec::new(n0).expect("grid"), &s, cfg, usize::MAX).expect("hierarchy");
    measure_convergence(&h, ctx.seed, &SolveOptions { kind, ..SolveOptions::default() }).expect("solve")
}

fn measured_vs_lfa(ctx: &Context) -> Outcome {
    let cases = [(2usize, 1e-1), (4, 1e-2), (8, 1e-2)];
    let rows: Vec<(f64, String)> = cases
        .par_iter()
        .map(|&(ell, eps)| {
            let cfg = SchwarzConfig::maximal(ell, 1).expect("config");
            let r = measured_rho(ctx, 128, eps, cfg, CycleKind::W);
            let s = ctx.stencil(Discretization::Fd, eps, 0.0);
            let tg =
                two_grid_factor(&s, &SmootherSymbol::SchwarzEllx1 { ell, weight: 1.0 }, &OptimizerOptions::default());
            let gap = (r.rho - tg.value).abs();
            (gap, format!("l={ell} eps={eps:e}: measured {:.4}, LFA {:.4}, gap {gap:.4}", r.rho, tg.value))
        })
        .collect();
    let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    outcome(worst <= 0.05, rows.into_iter().map(|r| r.1).collect::<Vec<_>>().join("; "))
}

fn overlap_sweep(ctx: &Context) -> Outcome {
    let rhos: Vec<f64> = (0..9usize)
        .into_par_iter()
        .map(|ov| {
            let cfg = SchwarzConfig::new(9, 1, ov, 0).expect("config");
            measured_rho(ctx, 256, 1e-2, cfg, CycleKind::V).rho
        })
        .collect();
    let spot8 = (rhos[8] - 0.225).abs() <= 0.05;
    let spot2 = (rhos[2] - 0.475).abs() <= 0.05;
    let monotone = rhos.windows(2).all(|w| w[1] <= w[0] + 0.01);
    let list: Vec<String> = rhos.iter().map(|r| format!("{r:.4}")).collect();
    outcome(
        spot8 && spot2 && monotone,
        format!(
            "rho by overlap 0..8 = [{}]; overlap 8 {} 0.225, overlap 2 {} 0.475, non-increasing {}",
            list.join(", "),
            if spot8 { "~" } else { "!~" },
            if spot2 { "~" } else { "!~" },
            monotone
        ),
    )
}

fn block_length_law(ctx: &Context) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [1e-2, 1e-3] {
        let ell = ell_star(0.8, eps).expect("valid target");
        let m = mu(ctx, Discretization::Fd, eps, 0.0, SmootherSymbol::SchwarzEllx1 { ell, weight: 1.0 });
        ok &= (m - 0.8).abs() <= 0.05;
        parts.push(format!("eps={eps:e} l*={ell} mu={m:.4}"));
    }
    let mus: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&e| mu(ctx, Discretization::Fd, e, 0.0, SmootherSymbol::SchwarzEllx1 { ell: 4, weight: 1.0 }))
        .collect();
    let rising = mus.windows(2).all(|w| w[1] > w[0]) && mus[3] < 1.0 && 1.0 - mus[3] < 0.01;
    ok &= rising;
    let list: Vec<String> = mus.iter().map(|m| format!("{m:.5}")).collect();
    parts.push(format!("l=4 mu over eps 1e-1..1e-4 = [{}], increasing towards 1 {rising}", list.join(", ")));
    outcome(ok, parts.join("; "))
}

fn rotated_contrast(ctx: &Context) -> Outcome {
    let sm = SmootherSymbol::Schwarz2x2 { weight: 1.0 };
    let fe = mu(ctx, Discretization::Fe, 1e-4, FRAC_PI_4, sm);
    let fd = mu(ctx, Discretization::Fd, 1e-4, FRAC_PI_4, sm);
    outcome(fe < 0.9 && fd > 0.95, format!("FE mu = {fe:.4} (want < 0.9), FD mu = {fd:.4} (want > 0.95)"))
}

fn weighted_argmin(ctx: &Context) -> Outcome {
    let omega = Frequency::new(0.0, 1.5 * PI);
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [1e-1, 1e-2] {
        let s = ctx.stencil(Discretization::Fd, eps, 0.0);
        let at = |w: f64| symbol_schwarz_2x2(&s, omega, w).map(|z| z.norm()).unwrap_or(f64::INFINITY);
        let (w, v) = (0..=100).map(|k| 0.5 + 0.01 * k as f64).map(|w| (w, at(w))).fold((1.0, f64::INFINITY), |b, c| {
            if c.1 < b.1 {
                c
            } else {
                b
            }
        });
        ok &= (w - 1.0).abs() <= 0.05 + 1e-12;
        parts.push(format!("eps={eps:e}: argmin w={w:.2} |s|={v:.4}, |s| at w=1 {:.4}", at(1.0)));
    }
    outcome(ok, parts.join("; "))
}

/// Smallest block length where the measured V-cycle factor drops to 0.5,
/// interpolated linearly between neighbouring integers.
fn contour_crossing(ctx: &Context, eps: f64, n0: usize) -> Option<f64> {
    let rho =
        |ell: usize| measured_rho(ctx, n0, eps, SchwarzConfig::maximal(ell, 1).expect("config"), CycleKind::V).rho;
    let target = 0.5;
    let mut known = std::collections::BTreeMap::new();
    let mut eval = |ell: usize| *known.entry(ell).or_insert_with(|| rho(ell));
    if eval(1) <= target {
        return None;
    }
    let (mut lo, mut hi) = (1usize, 2usize);
    while eval(hi) > target {
        lo = hi;
        hi *= 2;
        if hi > n0 / 2 {
            return None;
        }
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if eval(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (eval(lo), eval(hi));
    Some(lo as f64 + (a - target) / (a - b))
}

fn contour_slope(ctx: &Context) -> Outcome {
    let eps = logspace(1e-3, 1e-1, 9);
    let ells: Vec<Option<f64>> = eps.par_iter().map(|&e| contour_crossing(ctx, e, 128)).collect();
    let pts: Vec<(f64, f64)> = eps.iter().zip(&ells).filter_map(|(&e, l)| l.map(|l| (e.log10(), l.log10()))).collect();
    if pts.len() < 3 {
        return outcome(false, format!("only {} crossings found", pts.len()));
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let list: Vec<String> = ells.iter().map(|l| l.map_or("-".into(), |v| format!("{v:.2}"))).collect();
    outcome(
        (slope + 0.5).abs() <= 0.1,
        format!("crossings l = [{}] over eps 1e-3..1e-1; slope {slope:.4}, want -0.5 +/- 0.1", list.join(", ")),
    )
}
