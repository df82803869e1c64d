//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed verification or a numerical inconsistency
//! (including backward-flow singularities), 2 usage, specification, domain or
//! I/O errors, 3 numerical overflow.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::analysis::derivative::{derivative_formula, DerivativeOptions};
use crate::analysis::suite::{verify, Suite, VerifyConfig};
use crate::backward::{quadratic_grid, trace_curve, DEFAULT_LADDER, DEFAULT_TOL};
use crate::cone::DEFAULT_SIGMA;
use crate::driver::Driver;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::io::csv::{self, Metadata};
use crate::io::spec::{fingerprint, load_driver};
use crate::io::svg;
use crate::motion::{alpha_circle, motion_grid};
use crate::raster::{hull_raster, right_hull_raster, Grid, HullRaster, RasterOptions, Window};

#[derive(Debug, Parser)]
#[command(name = "loewner", version, about = "Chordal Loewner flows driven by complex functions")]
pub struct Cli {
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the trace on [-1, 1].
    Trace(TraceArgs),
    /// Lifetime raster of the left hull.
    Hull(HullArgs),
    /// Lifetime raster of the right hull.
    RightHull(HullArgs),
    /// The trace of αλ on a circle of α values.
    Motion(MotionArgs),
    /// The derivative of the trace from its exponential formula.
    Derivative(DerivativeArgs),
    /// Grid estimate of the 1/2-Hölder norm.
    Norm(NormArgs),
    /// Run verification checks and write a JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Driver specification (JSON).
    #[arg(long)]
    pub driver: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TraceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Samples per side.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LADDER)]
    pub ladder: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

/// `x0,x1,y0,y1,nx,ny`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridArg {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
}

impl FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err("expected x0,x1,y0,y1,nx,ny".into());
        }
        let f = |k: usize| parts[k].parse::<f64>().map_err(|e| format!("{}: {e}", parts[k]));
        let u = |k: usize| parts[k].parse::<usize>().map_err(|e| format!("{}: {e}", parts[k]));
        let window = Window::new(f(0)?, f(1)?, f(2)?, f(3)?).map_err(|e| e.to_string())?;
        let (nx, ny) = (u(4)?, u(5)?);
        if nx < 2 || ny < 2 {
            return Err("resolution must be at least 2".into());
        }
        Ok(GridArg { window, nx, ny })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct HullArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value = "-3,3,-3,3,128,128", allow_hyphen_values = true)]
    pub grid: GridArg,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MotionArgs {
    #[command(flatten)]
    pub common: Common,
    /// Radius of the α circle.
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    /// Points on the α circle; α = 0 is always included.
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    /// Parameters `(k/n)²`, `k = 0..n`.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LADDER)]
    pub ladder: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DerivativeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = 48)]
    pub nodes: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct NormArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid points on [0, 1].
    #[arg(long, default_value_t = 2048)]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    pub sigma: f64,
    /// Trace samples per side.
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    /// Half width of the square raster window.
    #[arg(long, default_value_t = 3.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    #[arg(long, default_value_t = 0.25)]
    pub s: f64,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match with_threads(cli.threads, || dispatch(&cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Overflow { .. } => 3,
        Error::Singularity { .. } | Error::Inconsistency(_) => 1,
        Error::Domain(_) | Error::Spec(_) | Error::Json(_) | Error::Io(_) => 2,
    }
}

#[cfg(feature = "parallel")]
fn with_threads(threads: Option<usize>, f: impl FnOnce() -> Result<i32> + Send) -> Result<i32> {
    match threads {
        Some(0) => Err(Error::Domain("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Domain(e.to_string()))?
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads(threads: Option<usize>, f: impl FnOnce() -> Result<i32> + Send) -> Result<i32> {
    if threads == Some(0) {
        return Err(Error::Domain("--threads must be positive".into()));
    }
    f()
}

fn dispatch(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Trace(a) => trace_cmd(a),
        Command::Hull(a) => hull_cmd(a, false),
        Command::RightHull(a) => hull_cmd(a, true),
        Command::Motion(a) => motion_cmd(a),
        Command::Derivative(a) => derivative_cmd(a),
        Command::Norm(a) => norm_cmd(a),
        Command::Verify(a) => verify_cmd(a),
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_svg(path: &Option<PathBuf>, contents: impl FnOnce() -> String) -> Result<()> {
    if let Some(p) = path {
        write_file(p, &contents())?;
    }
    Ok(())
}

fn write_file(p: &Path, s: &str) -> Result<()> {
    std::fs::write(p, s)?;
    Ok(())
}

fn config<T: Serialize>(args: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(args)?)
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive")))
    }
}

fn trace_cmd(a: &TraceArgs) -> Result<i32> {
    positive("--tol", a.tol)?;
    let d = load_driver(&a.common.driver)?;
    let tr = trace_curve(&d, a.n, &a.ladder, a.tol, Exec::Parallel)?;
    let mut w = output(&a.common.out)?;
    csv::write_trace(&mut w, &Metadata::new(&d, &config(a)?), &tr)?;
    w.flush()?;
    write_svg(&a.svg, || svg::polyline(&tr.points))?;
    Ok(0)
}

fn hull_cmd(a: &HullArgs, right: bool) -> Result<i32> {
    positive("--tol", a.tol)?;
    let d = load_driver(&a.common.driver)?;
    let grid = Grid::new(a.grid.window, a.grid.nx, a.grid.ny)?;
    let opts = RasterOptions {
        tol: a.tol,
        ..Default::default()
    };
    let r: HullRaster = if right {
        right_hull_raster(&d, a.t, grid, &opts)?
    } else {
        hull_raster(&d, a.t, grid, &opts)?
    };
    let mut w = output(&a.common.out)?;
    csv::write_raster(&mut w, &Metadata::new(&d, &config(a)?), &r)?;
    w.flush()?;
    write_svg(&a.svg, || svg::raster(&r))?;
    let overflow = r.overflow_count();
    if overflow > 0 {
        eprintln!("error: {overflow} pixels overflowed");
        return Ok(3);
    }
    Ok(0)
}

fn motion_cmd(a: &MotionArgs) -> Result<i32> {
    positive("--tol", a.tol)?;
    positive("--radius", a.radius)?;
    if a.count == 0 || a.n == 0 {
        return Err(Error::Domain("--count and --n must be positive".into()));
    }
    let d = load_driver(&a.common.driver)?;
    let mut alphas = vec![Complex64::new(0.0, 0.0)];
    alphas.extend(alpha_circle(Complex64::new(0.0, 0.0), a.radius, a.count));
    let params: Vec<f64> = quadratic_grid(a.n).into_iter().filter(|&t| t >= 0.0).collect();
    let g = motion_grid(&d, &alphas, &params, &a.ladder, a.tol, Exec::Parallel)?;
    let mut w = output(&a.common.out)?;
    csv::write_motion(&mut w, &Metadata::new(&d, &config(a)?), &g)?;
    w.flush()?;
    write_svg(&a.svg, || {
        let rows: Vec<&[Complex64]> = (0..alphas.len()).map(|i| g.row(i)).collect();
        svg::curves(&rows)
    })?;
    Ok(0)
}

#[derive(Serialize)]
struct Meta {
    tool: String,
    version: String,
    driver_kind: String,
    driver_fingerprint: String,
    config: serde_json::Value,
}

impl Meta {
    fn new(d: &Driver, config: serde_json::Value) -> Self {
        Meta {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            driver_kind: d.kind().into(),
            driver_fingerprint: fingerprint(d),
            config,
        }
    }
}

fn write_json(path: &Option<PathBuf>, v: &serde_json::Value) -> Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn derivative_cmd(a: &DerivativeArgs) -> Result<i32> {
    let d = load_driver(&a.common.driver)?;
    let opts = DerivativeOptions {
        nodes: a.nodes,
        ..Default::default()
    };
    let v = derivative_formula(&d, a.t, &opts)?;
    let json = serde_json::json!({
        "meta": Meta::new(&d, config(a)?),
        "t": a.t,
        "derivative": {"re": v.re, "im": v.im},
    });
    write_json(&a.common.out, &json)?;
    Ok(0)
}

fn norm_cmd(a: &NormArgs) -> Result<i32> {
    let d = load_driver(&a.common.driver)?;
    let est = d.holder_norm_estimate(a.points)?;
    let json = serde_json::json!({
        "meta": Meta::new(&d, config(a)?),
        "norm_lower_bound": est.norm_lower_bound,
        "pair_count": est.pair_count,
        "grid_resolution": est.grid_resolution,
    });
    write_json(&a.common.out, &json)?;
    Ok(0)
}

fn verify_cmd(a: &VerifyArgs) -> Result<i32> {
    positive("--half-width", a.half_width)?;
    let d = load_driver(&a.common.driver)?;
    let cfg = VerifyConfig {
        suite: a.suite,
        sigma: a.sigma,
        n: a.n,
        resolution: a.resolution,
        window: Window::square(a.half_width),
        t: a.t,
        s: a.s,
        ..Default::default()
    };
    let rep = verify(&d, &cfg)?;
    let mut w = output(&a.common.out)?;
    writeln!(w, "{}", rep.to_json()?)?;
    w.flush()?;
    Ok(if rep.all_pass() { 0 } else { 1 })
}
