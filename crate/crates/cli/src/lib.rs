//! The `expray` command line: ray tracing, verification suites, covering
//! experiments, escape-time renders and box-counting fits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod io;
pub mod verify;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use expray_core::dynray::RayConfig;
use expray_core::fractaldim::{
    box_dimension, escape_index_grid, escape_set_sample, run_cover_experiment, CoverConfig, CoverReport, SquareCount,
    Tower,
};
use expray_core::pararay::ParamConfig;
use expray_core::{ComplexPoint, Error as CoreError, ExternalAddress};

use crate::verify::{run_suite, Suite, SuiteConfig, Verdict};

#[derive(Debug, Parser)]
#[command(name = "expray", version, about = "Rays, covering sums and dimension estimates for e^z + kappa")]
pub struct Cli {
    /// Worker threads [default: available parallelism].
    #[arg(long, global = true, env = "EXPRAY_WORKERS", value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a dynamic or parameter ray into a CSV file.
    Trace(TraceArgs),
    /// Run a seeded verification suite.
    Verify(VerifyArgs),
    /// Covering construction and Hausdorff sums over generations.
    Cover(CoverArgs),
    /// Escape-time image of a parameter rectangle (binary PGM).
    Render(RenderArgs),
    /// Box-counting dimension of a point set.
    Boxdim(BoxdimArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RayKindArg {
    Dyn,
    Par,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(value_enum)]
    pub kind: RayKindArg,
    /// External address, e.g. `0`, `1,-2` or `3|1,2` (prefix|period).
    #[arg(long, allow_hyphen_values = true)]
    pub address: String,
    #[arg(long, default_value_t = 3.0)]
    pub tmin: f64,
    #[arg(long, default_value_t = 20.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Parameter of a dynamic ray, `re,im`.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true, value_parser = parse_complex)]
    pub kappa: ComplexPoint,
    /// Output CSV [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `C` of the dkappa-bound suite.
    #[arg(long = "c-bound", default_value_t = 10.0)]
    pub c_bound: f64,
}

#[derive(Debug, Args)]
pub struct CoverArgs {
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 20.0)]
    pub xi0: f64,
    /// Bound on |kappa|.
    #[arg(long = "M", default_value_t = 10.0)]
    pub m: f64,
    /// Exponents, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.6, 1.3])]
    pub d: Vec<f64>,
    /// Refinements beyond the root.
    #[arg(long, default_value_t = 2)]
    pub generations: usize,
    /// Floor of the parabola region [default: xi0/2].
    #[arg(long = "region-xi")]
    pub region_xi: Option<f64>,
    #[arg(long = "k-koebe", default_value_t = 4.0)]
    pub k_koebe: f64,
    /// Output CSV [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// `re_lo,im_lo,re_hi,im_hi`.
    #[arg(long, default_value = "0,0,1,1", allow_hyphen_values = true, value_parser = parse_rect)]
    pub rect: Rect,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(2..=16384))]
    pub grid: u32,
    #[arg(long, default_value_t = 100)]
    pub nmax: usize,
    #[arg(long = "escape-re", default_value_t = 50.0)]
    pub escape_re: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["points", "escape"])))]
pub struct BoxdimArgs {
    /// CSV with `re` and `im` columns, e.g. a trace.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Use the escaping lattice parameters of `--rect` instead.
    #[arg(long)]
    pub escape: bool,
    #[arg(long, default_value = "0,0,1,1", allow_hyphen_values = true, value_parser = parse_rect)]
    pub rect: Rect,
    #[arg(long, default_value_t = 800, value_parser = clap::value_parser!(u32).range(2..=16384))]
    pub grid: u32,
    #[arg(long, default_value_t = 50)]
    pub nmax: usize,
    #[arg(long = "escape-re", default_value_t = 50.0)]
    pub escape_re: f64,
    #[arg(long = "eps-hi", default_value_t = 0.1)]
    pub eps_hi: f64,
    #[arg(long = "eps-lo", default_value_t = 0.005)]
    pub eps_lo: f64,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// Output CSV of the count table.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub lo: ComplexPoint,
    pub hi: ComplexPoint,
}

fn numbers(text: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = text
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

fn parse_complex(text: &str) -> Result<ComplexPoint, String> {
    let v = numbers(text, 2)?;
    Ok(ComplexPoint::new(v[0], v[1]))
}

fn parse_rect(text: &str) -> Result<Rect, String> {
    let v = numbers(text, 4)?;
    Ok(Rect { lo: ComplexPoint::new(v[0], v[1]), hi: ComplexPoint::new(v[2], v[3]) })
}

/// Bad arguments caught after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
    /// Truncated trace or similar incomplete result.
    Partial,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::VerificationFailed => 1,
            Outcome::Partial => 3,
        }
    }
}

/// Exit code for an error: 2 for bad input, 3 for an empty covering
/// generation, 1 otherwise.
pub fn error_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::EmptyRefinement) => 3,
        Some(
            CoreError::InvalidArgument(_)
            | CoreError::AddressSyntax { .. }
            | CoreError::BelowFloor { .. }
            | CoreError::Inadmissible { .. }
            | CoreError::NegativePotential(_)
            | CoreError::DegenerateFit(_),
        ) => 2,
        _ => 1,
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let workers = match cli.workers {
        Some(w) => w as usize,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    pool.install(|| match cli.command {
        Command::Trace(a) => cmd_trace(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Cover(a) => cmd_cover(&a),
        Command::Render(a) => cmd_render(&a),
        Command::Boxdim(a) => cmd_boxdim(&a),
    })
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("{name} must be positive, got {x}")))
    }
}

pub fn cmd_trace(a: &TraceArgs) -> Result<Outcome> {
    let s: ExternalAddress = a.address.parse()?;
    positive("--tol", a.tol)?;
    if !(a.tmin < a.tmax) {
        return Err(usage(format!("--tmin {} must be below --tmax {}", a.tmin, a.tmax)));
    }
    let line = match a.kind {
        RayKindArg::Dyn => {
            let cfg = RayConfig { tol: a.tol, ..RayConfig::default() };
            cfg.trace_dynamic_ray(a.kappa, &s, a.tmin, a.tmax, a.samples, a.tol)?
        }
        RayKindArg::Par => ParamConfig::default().trace_parameter_ray(&s, a.tmin, a.tmax, a.samples, a.tol)?,
    };
    io::write_trace(output(a.out.as_deref())?, &line)?;
    for f in &line.failures {
        eprintln!("sample t={} failed: {}", f.t, f.error);
    }
    if line.truncated {
        eprintln!("trace truncated: {} of {} samples", line.entries.len(), a.samples);
        return Ok(Outcome::Partial);
    }
    Ok(Outcome::Success)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    positive("--c-bound", a.c_bound)?;
    let cfg = SuiteConfig { trials: a.trials as usize, seed: a.seed, c_bound: a.c_bound };
    let report = run_suite(a.suite, cfg);
    let mut out = std::io::stdout().lock();
    writeln!(out, "trial  result  {:<10}  detail", "metric")?;
    for t in &report.trials {
        let verdict = match t.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Skip => "skip",
        };
        writeln!(out, "{:>5}  {verdict:<6}  {:<10.3e}  {}", t.index, t.metric, t.detail)?;
    }
    writeln!(
        out,
        "suite {}: {} trials, {} passed, {} failed, {} skipped; {} {:.6e}",
        report.suite,
        report.trials.len(),
        report.count(Verdict::Pass),
        report.count(Verdict::Fail),
        report.count(Verdict::Skip),
        report.metric_name(),
        report.max_metric()
    )?;
    if report.passed() {
        return Ok(Outcome::Success);
    }
    let failing: Vec<String> =
        report.trials.iter().filter(|t| t.verdict == Verdict::Fail).map(|t| t.index.to_string()).collect();
    writeln!(
        out,
        "reproduce with: expray verify {} --trials {} --seed {} (failing trials {})",
        report.suite,
        a.trials,
        a.seed,
        failing.join(",")
    )?;
    Ok(Outcome::VerificationFailed)
}

/// `e^{ln}` as a decimal when it fits, otherwise as nested exponentials.
fn exp_text(ln: Tower) -> String {
    match ln.to_f64() {
        l if l.abs() < 700.0 => io::fmt_f64(l.exp()),
        _ => format!("exp({ln})"),
    }
}

fn tower_text(t: Tower) -> String {
    match t.to_f64() {
        x if x.is_finite() => io::fmt_f64(x),
        _ => t.to_string(),
    }
}

pub fn write_cover_csv<W: Write>(out: W, report: &CoverReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["generation", "count", "min_re", "d", "sum", "monotone_decreasing", "analytic"])?;
    for row in &report.rows {
        let count = match row.count {
            SquareCount::Exact(n) => n.to_string(),
            SquareCount::AtMost(t) => format!("<={}", tower_text(t)),
        };
        for (i, (&d, &ln_sum)) in report.ds.iter().zip(&row.ln_sums).enumerate() {
            w.write_record([
                row.generation.to_string(),
                count.clone(),
                tower_text(row.min_re),
                d.to_string(),
                exp_text(ln_sum),
                report.strictly_decreasing(i).to_string(),
                row.analytic.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_cover(a: &CoverArgs) -> Result<Outcome> {
    let config = CoverConfig { k_koebe: a.k_koebe, ..CoverConfig::default() };
    let report = run_cover_experiment(a.p, a.xi0, a.m, &a.d, a.generations, a.region_xi, config)?;
    write_cover_csv(output(a.out.as_deref())?, &report)?;
    if a.out.is_some() {
        let mut out = std::io::stdout().lock();
        for (i, d) in report.ds.iter().enumerate() {
            writeln!(
                out,
                "d={d} decreasing: {} increasing: {}",
                report.strictly_decreasing(i),
                report.strictly_increasing(i)
            )?;
        }
        if let Some(r) = report.max_children_ratio {
            writeln!(out, "largest children / N(xi) ratio: {r:.6}")?;
        }
        if let Some(cap) = &report.cap {
            writeln!(out, "explicit refinement stopped: {cap}; later rows are analytic")?;
        }
    }
    Ok(Outcome::Success)
}

fn check_rect(r: &Rect) -> Result<()> {
    let finite = [r.lo.re, r.lo.im, r.hi.re, r.hi.im].iter().all(|v| v.is_finite());
    if !(finite && r.lo.re < r.hi.re && r.lo.im < r.hi.im) {
        return Err(usage(format!("degenerate rectangle {} .. {}", r.lo, r.hi)));
    }
    Ok(())
}

/// Pixel values `min(escape index, 255)`, 0 for bounded, top row first.
pub fn render_pixels(rect: &Rect, grid: usize, n_max: usize, escape_re: f64) -> Result<Vec<u8>> {
    check_rect(rect)?;
    let indices = escape_index_grid(rect.lo, rect.hi, grid, n_max, escape_re)?;
    Ok(indices.into_iter().map(|i| i.map_or(0, |n| n.min(255) as u8)).collect())
}

pub fn cmd_render(a: &RenderArgs) -> Result<Outcome> {
    let pixels = render_pixels(&a.rect, a.grid as usize, a.nmax, a.escape_re)?;
    let file = File::create(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    io::write_pgm(BufWriter::new(file), a.grid, a.grid, &pixels)?;
    Ok(Outcome::Success)
}

pub fn cmd_boxdim(a: &BoxdimArgs) -> Result<Outcome> {
    let points = match &a.points {
        Some(path) => io::read_points(path).map_err(|e| usage(format!("{e:#}")))?,
        None => {
            check_rect(&a.rect)?;
            escape_set_sample(a.rect.lo, a.rect.hi, a.grid as usize, a.nmax, a.escape_re)?
        }
    };
    if points.is_empty() {
        return Err(usage("no points to count"));
    }
    let fit = box_dimension(&points, a.eps_hi, a.eps_lo, a.levels)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "points: {}", points.len())?;
    writeln!(out, "{:>24}  {:>10}", "epsilon", "count")?;
    for (e, n) in fit.epsilons.iter().zip(&fit.counts) {
        writeln!(out, "{:>24}  {n:>10}", io::fmt_f64(*e))?;
    }
    writeln!(out, "slope: {:.6}", fit.slope)?;
    writeln!(out, "r_squared: {:.6}", fit.r_squared)?;
    if let Some(path) = &a.out {
        let mut w = csv::Writer::from_writer(output(Some(path))?);
        w.write_record(["epsilon", "count"])?;
        for (e, n) in fit.epsilons.iter().zip(&fit.counts) {
            w.write_record([io::fmt_f64(*e), n.to_string()])?;
        }
        w.flush()?;
    }
    Ok(Outcome::Success)
}
