//! `bungee-lab`: orbit runs, classification rasters, verification suites and
//! segment-table dumps.
//!
//! Exit status: 0 on success (and when every verification check passes),
//! 1 on runtime failure or a failed check, 2 on usage errors.

mod config;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use bungee_core::analysis::{evidence_classifier, run_verification, VerifyOptions};
use bungee_core::dynamics::{iterate_orbit_with, ClassifierConfig, GlobalMapConfig, MapKind, OrbitOptions, PathMode};
use bungee_core::maps::{PerturbParams, StripParams, DEFAULT_DELTA, DEFAULT_Y0};
use bungee_core::raster::{label_counts, RasterJob, Viewport};
use bungee_core::snake::{SnakeGeometry, DEFAULT_N_MAX, HARD_N_MAX};
use bungee_core::{dynamics::Label, Point};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{ConfigFile, Resolver};

pub const THREADS_ENV: &str = "BUNGEE_LAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "bungee-lab", version, about = "Snake-map dynamics: orbits, rasters, verification")]
struct Cli {
    /// Flat `key = value` config file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Print the effective configuration and exit without running.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterate one orbit, print its label and export the decimated trail.
    Orbit(OrbitArgs),
    /// Classify a grid of starting points and write a PPM image.
    Raster(RasterArgs),
    /// Run the gluing, disjointness, conjugacy, distortion, escape-law and
    /// witness suites.
    Verify(VerifyArgs),
    /// Dump the snake's segment table.
    Geometry(GeometryArgs),
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// Base height of the strip (must exceed 100).
    #[arg(long)]
    y0: Option<f64>,
    /// Perturbation strength of g.
    #[arg(long)]
    delta: Option<f64>,
    /// Number of snake bends to build.
    #[arg(long)]
    n_max: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct ClassifierArgs {
    /// Step budget per orbit.
    #[arg(long)]
    max_steps: Option<u64>,
    /// Modulus beyond which an orbit counts as escaped.
    #[arg(long)]
    escape_radius: Option<f64>,
    /// An orbit that never exceeds this modulus is BOUNDED.
    #[arg(long)]
    bounded_radius: Option<f64>,
    /// Upward crossing height that opens an oscillation.
    #[arg(long)]
    high_threshold: Option<f64>,
    /// Downward crossing height that closes an oscillation.
    #[arg(long)]
    low_threshold: Option<f64>,
    /// Oscillations with rising maxima needed for BUNGEE.
    #[arg(long)]
    min_oscillations: Option<usize>,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    /// Map to iterate: psi, f, g or h.
    #[arg(long)]
    map: Option<String>,
    /// Starting point as `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Evaluate the map at every step instead of the straightened fast path.
    #[arg(long)]
    direct: bool,
    /// Where to write the `step,x,y,modulus` export.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    classifier: ClassifierArgs,
}

#[derive(Args, Debug)]
struct RasterArgs {
    /// `x_min,x_max,y_min,y_max`.
    #[arg(long, allow_hyphen_values = true)]
    viewport: Option<String>,
    /// Pixels per row (default 400).
    #[arg(long)]
    width: Option<usize>,
    /// Rows (default 400).
    #[arg(long)]
    height: Option<usize>,
    /// Map to classify under: psi, f, g or h (default f).
    #[arg(long)]
    map: Option<String>,
    /// Where to write the PPM (default raster.ppm).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    classifier: ClassifierArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    classifier: ClassifierArgs,
}

#[derive(Args, Debug)]
struct GeometryArgs {
    #[arg(long)]
    y0: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
}

/// `x,y` on the command line.
#[derive(Debug, Clone, Copy)]
struct PointArg(Point);

impl FromStr for PointArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts = parse_reals(s, 2)?;
        Ok(PointArg(Point::new(parts[0], parts[1])))
    }
}

impl fmt::Display for PointArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0.x, self.0.y)
    }
}

#[derive(Debug, Clone, Copy)]
struct ViewportArg(Viewport);

impl FromStr for ViewportArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v = parse_reals(s, 4)?;
        Viewport::new(v[0], v[1], v[2], v[3]).map(ViewportArg).map_err(|e| e.to_string())
    }
}

impl fmt::Display for ViewportArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = &self.0;
        write!(f, "{},{},{},{}", v.x_min, v.x_max, v.y_min, v.y_max)
    }
}

fn parse_reals(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<f64> =
        s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"))).collect::<Result<_, _>>()?;
    if parts.len() != n || parts.iter().any(|v| !v.is_finite()) {
        return Err(format!("expected {n} comma-separated finite numbers, got `{s}`"));
    }
    Ok(parts)
}

/// Model parameters after resolution.
struct Model {
    strip: StripParams,
    perturb: PerturbParams,
    n_max: usize,
}

fn resolve_model(r: &mut Resolver, m: &ModelArgs) -> Result<Model, CliError> {
    let y0 = r.value("y0", m.y0, DEFAULT_Y0)?;
    let delta = r.value("delta", m.delta, DEFAULT_DELTA)?;
    let n_max = r.value("n-max", m.n_max, DEFAULT_N_MAX)?;
    if n_max > HARD_N_MAX {
        return Err(CliError::Usage(format!("--n-max {n_max} exceeds the cap of {HARD_N_MAX}")));
    }
    Ok(Model { strip: StripParams::new(y0).map_err(usage)?, perturb: PerturbParams::new(delta).map_err(usage)?, n_max })
}

fn resolve_classifier(
    r: &mut Resolver,
    c: &ClassifierArgs,
    base: ClassifierConfig,
) -> Result<ClassifierConfig, CliError> {
    let cc = ClassifierConfig {
        max_steps: r.value("max-steps", c.max_steps, base.max_steps)?,
        escape_radius: r.value("escape-radius", c.escape_radius, base.escape_radius)?,
        bounded_radius: r.value("bounded-radius", c.bounded_radius, base.bounded_radius)?,
        high_threshold: r.value("high-threshold", c.high_threshold, base.high_threshold)?,
        low_threshold: r.value("low-threshold", c.low_threshold, base.low_threshold)?,
        min_oscillations: r.value("min-oscillations", c.min_oscillations, base.min_oscillations)?,
    };
    cc.validate().map_err(usage)?;
    Ok(cc)
}

fn parse_map(s: Option<String>) -> Result<Option<MapKind>, CliError> {
    s.map(|s| s.parse().map_err(usage)).transpose()
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(runtime)
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| runtime(format!("cannot create {}: {e}", path.display())))
}

fn cmd_orbit(a: OrbitArgs, r: &mut Resolver, print_only: bool) -> Result<u8, CliError> {
    let map = r.value("map", parse_map(a.map)?, MapKind::F)?;
    let point = r.required("point", a.point.map(|p| p.parse::<PointArg>().map_err(usage)).transpose()?)?.0;
    let direct = r.switch("direct", a.direct)?;
    let output = r.value("output", a.output.map(|p| p.display().to_string()), "orbit.csv".to_string())?;
    let model = resolve_model(r, &a.model)?;
    let cc = resolve_classifier(r, &a.classifier, ClassifierConfig::default())?;
    if print_only {
        print!("{}", r.render());
        return Ok(0);
    }

    let cfg = GlobalMapConfig::new(map, model.strip, model.perturb, model.n_max).map_err(usage)?;
    let path = if direct { PathMode::Direct } else { PathMode::Fast };
    let rec = iterate_orbit_with(point, &cfg, &cc, OrbitOptions { path, keep_trail: true }).map_err(runtime)?;

    let output = PathBuf::from(output);
    let mut w = create(&output)?;
    rec.write_trail(&mut w).and_then(|_| w.flush()).map_err(runtime)?;

    let mut out = io::stdout().lock();
    let records = rec.trail.as_ref().map_or(0, Vec::len);
    writeln!(out, "{}", rec.label).map_err(runtime)?;
    writeln!(out, "map={map} start={point} {}", rec.summary()).map_err(runtime)?;
    writeln!(out, "wrote {records} records to {}", output.display()).map_err(runtime)?;
    Ok(0)
}

fn cmd_raster(a: RasterArgs, r: &mut Resolver, print_only: bool) -> Result<u8, CliError> {
    let viewport = r.required("viewport", a.viewport.map(|v| v.parse::<ViewportArg>().map_err(usage)).transpose()?)?.0;
    let width = r.value("width", a.width, 400)?;
    let height = r.value("height", a.height, 400)?;
    let map = r.value("map", parse_map(a.map)?, MapKind::F)?;
    let output = r.value("output", a.output.map(|p| p.display().to_string()), "raster.ppm".to_string())?;
    let model = resolve_model(r, &a.model)?;
    let cc = resolve_classifier(r, &a.classifier, ClassifierConfig::default())?;
    if print_only {
        print!("{}", r.render());
        return Ok(0);
    }

    let cfg = GlobalMapConfig::new(map, model.strip, model.perturb, model.n_max).map_err(usage)?;
    let job = RasterJob { viewport, width, height, map: cfg, classifier: cc };
    job.validate().map_err(usage)?;
    let labels = thread_pool()?.install(|| job.classify()).map_err(runtime)?;
    let bytes = bungee_core::raster::encode_ppm(width, height, &labels);

    let output = PathBuf::from(output);
    let mut w = create(&output)?;
    w.write_all(&bytes).and_then(|_| w.flush()).map_err(runtime)?;

    let counts = label_counts(&labels);
    let summary: Vec<String> = Label::ALL.iter().zip(counts).map(|(l, n)| format!("{l}={n}")).collect();
    println!("wrote {width}x{height} raster to {} ({})", output.display(), summary.join(" "));
    Ok(0)
}

fn cmd_verify(a: VerifyArgs, r: &mut Resolver, print_only: bool) -> Result<u8, CliError> {
    let model = resolve_model(r, &a.model)?;
    let cc = resolve_classifier(r, &a.classifier, evidence_classifier())?;
    if print_only {
        print!("{}", r.render());
        return Ok(0);
    }
    let opts = VerifyOptions {
        y0: model.strip.y0(),
        delta: model.perturb.delta(),
        n_max: model.n_max,
        classifier: cc,
        ..VerifyOptions::default()
    };
    let report = thread_pool()?.install(|| run_verification(&opts)).map_err(runtime)?;
    print!("{}", report.to_text());
    Ok(if report.all_pass() { 0 } else { 1 })
}

fn cmd_geometry(a: GeometryArgs, r: &mut Resolver, print_only: bool) -> Result<u8, CliError> {
    let y0 = r.value("y0", a.y0, DEFAULT_Y0)?;
    let n_max = r.value("n-max", a.n_max, DEFAULT_N_MAX)?;
    if n_max > HARD_N_MAX {
        return Err(CliError::Usage(format!("--n-max {n_max} exceeds the cap of {HARD_N_MAX}")));
    }
    let strip = StripParams::new(y0).map_err(usage)?;
    if print_only {
        print!("{}", r.render());
        return Ok(0);
    }
    let snake = SnakeGeometry::new(strip, n_max).map_err(usage)?;
    let table = snake.ensure_bends(n_max).map_err(runtime)?;
    let mut out = BufWriter::new(io::stdout().lock());
    for rec in table.iter().take(4 * n_max) {
        writeln!(out, "{}", rec.to_record_line()).map_err(runtime)?;
    }
    out.flush().map_err(runtime)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut r = Resolver::new(&file);
    match cli.command {
        Command::Orbit(a) => cmd_orbit(a, &mut r, cli.print_config),
        Command::Raster(a) => cmd_raster(a, &mut r, cli.print_config),
        Command::Verify(a) => cmd_verify(a, &mut r, cli.print_config),
        Command::Geometry(a) => cmd_geometry(a, &mut r, cli.print_config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("bungee-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
