//! Batch verification: distortion sweeps, the escape law, conjugacy
//! sampling, the labelled-witness bundle, and the text report that ties
//! them together.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{iterate_orbit, ClassifierConfig, GlobalMapConfig, Label, MapKind, OrbitRecord};
use crate::error::{Error, Result};
use crate::maps::{default_step, g_apply, local_dilatation, psi_raw, PerturbParams, StripParams};
use crate::point::Point;
use crate::snake::SnakeGeometry;

pub const GLUING_TOLERANCE: f64 = 1e-9;
/// Depth up to which gluing is held to the absolute tolerance.
pub const GLUING_ABSOLUTE_DEPTH: usize = 20;
/// Deeper bends: mismatch in units of rounding at the top of the snake.
pub const GLUING_DEEP_ULPS: f64 = 8.0;
/// `K` of a conformal map, up to finite-difference rounding.
pub const CONFORMAL_K_LIMIT: f64 = 1.0 + 1e-9;
pub const CONJUGACY_TOLERANCE: f64 = 1e-8;
pub const PSI_K_LIMIT: f64 = 3.0;
pub const G_K_LIMIT: f64 = 2.0;
pub const ESCAPE_LAW_TOLERANCE: f64 = 1e-6;

/// Budget used by the witness bundle: the near-wall point of the boundary
/// pair moves slowly (`c ~ 0.04`) and needs about `2.2e8` steps to show
/// four oscillations.
pub const EVIDENCE_MAX_STEPS: u64 = 1_000_000_000;

/// An escaping witness must leave the escape radius within this many steps.
pub const ESCAPE_PROBE_STEPS: u64 = 5;

/// Height of the boundary pair and its half-gap across the side wall.
pub const PAIR_HEIGHT: f64 = 102.0;
pub const PAIR_HALF_GAP: f64 = 4e-4;

pub const CONJUGACY_SEED: u64 = 0x5eed_c0de;

/// The witness bundle's classifier: defaults with a larger step budget.
pub fn evidence_classifier() -> ClassifierConfig {
    ClassifierConfig { max_steps: EVIDENCE_MAX_STEPS, ..ClassifierConfig::default() }
}

/// Which map a distortion sweep probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMap {
    Identity,
    Map(MapKind),
}

impl fmt::Display for SweepMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepMap::Identity => f.write_str("identity"),
            SweepMap::Map(k) => write!(f, "{k}"),
        }
    }
}

/// Sampling region of a sweep; grid points are cell centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Rect {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    /// Heights `[y_min, y_max]` of the strip, across its full width.
    StripBand {
        y_min: f64,
        y_max: f64,
    },
}

impl Region {
    fn validate(&self) -> Result<()> {
        let (a, b, c, d) = match *self {
            Region::Rect { x_min, x_max, y_min, y_max } => (x_min, x_max, y_min, y_max),
            Region::StripBand { y_min, y_max } => (0.0, 1.0, y_min, y_max),
        };
        if !(a < b && c < d) || ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(format!("degenerate region {self}")));
        }
        if let Region::StripBand { y_min, .. } = *self {
            if !(y_min > 0.0) {
                return Err(Error::InvalidParameter("strip band must lie above the real axis".into()));
            }
        }
        Ok(())
    }

    fn point(&self, i: usize, j: usize, nx: usize, ny: usize) -> Point {
        let frac = |k: usize, n: usize| (k as f64 + 0.5) / n as f64;
        match *self {
            Region::Rect { x_min, x_max, y_min, y_max } => {
                Point::new(x_min + (x_max - x_min) * frac(i, nx), y_min + (y_max - y_min) * frac(j, ny))
            }
            Region::StripBand { y_min, y_max } => {
                let y = y_min + (y_max - y_min) * frac(j, ny);
                Point::new((2.0 * frac(i, nx) - 1.0) / y, y)
            }
        }
    }

    /// Finite-difference step: relative to `|p|` in a rectangle, relative to
    /// the strip width in a band (the band is far narrower than `|p|`).
    fn auto_step(&self, p: Point) -> f64 {
        match self {
            Region::Rect { .. } => default_step(p),
            Region::StripBand { .. } => 1e-3 / p.y,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Region::Rect { x_min, x_max, y_min, y_max } => write!(f, "[{x_min}, {x_max}] x [{y_min}, {y_max}]"),
            Region::StripBand { y_min, y_max } => write!(f, "strip band y in [{y_min}, {y_max}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport {
    pub map: SweepMap,
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    /// Fixed step, or `None` for the region's automatic rule.
    pub step: Option<f64>,
    pub sup_k: f64,
    pub k_min: f64,
    pub k_median: f64,
    pub k_p99: f64,
    pub min_det: f64,
    /// Samples whose `K` was NaN or infinite, or where the map failed.
    pub nonfinite: usize,
}

impl DistortionReport {
    pub fn samples(&self) -> usize {
        self.nx * self.ny
    }

    pub fn sense_preserving(&self) -> bool {
        self.min_det > 0.0 && self.nonfinite == 0
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Dilatation at every grid point of `region`; rows run in parallel and are
/// reassembled in order, so the report does not depend on scheduling.
pub fn distortion_sweep(
    cfg: &GlobalMapConfig,
    map: SweepMap,
    region: Region,
    nx: usize,
    ny: usize,
    step: Option<f64>,
) -> Result<DistortionReport> {
    region.validate()?;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParameter("distortion grid must be non-empty".into()));
    }
    if let Some(h) = step {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
        }
    }
    if let SweepMap::Map(k) = map {
        if k.needs_snake() && cfg.snake().is_none() {
            return Err(Error::InvalidParameter(format!("map {k} needs a snake geometry")));
        }
    }
    let perturb = cfg.perturb();
    let eval = move |p: Point| -> Option<Point> {
        match map {
            SweepMap::Identity => Some(p),
            SweepMap::Map(MapKind::Psi) => Some(psi_raw(p)),
            SweepMap::Map(MapKind::G) => g_apply(p, perturb).ok(),
            SweepMap::Map(MapKind::F) => cfg.f_apply(p).ok(),
            SweepMap::Map(MapKind::H) => cfg.h_apply(p).ok(),
        }
    };

    let rows: Vec<Vec<(f64, f64)>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            (0..nx)
                .map(|i| {
                    let p = region.point(i, j, nx, ny);
                    let h = step.unwrap_or_else(|| region.auto_step(p));
                    match local_dilatation(eval, p, h) {
                        Ok(d) => (d.k, d.min_det),
                        Err(_) => (f64::NAN, f64::NAN),
                    }
                })
                .collect()
        })
        .collect();

    let mut ks = Vec::with_capacity(nx * ny);
    let mut min_det = f64::INFINITY;
    let mut nonfinite = 0;
    for &(k, det) in rows.iter().flatten() {
        if k.is_finite() {
            ks.push(k);
        } else {
            nonfinite += 1;
        }
        // NaN compares false and would vanish from `min`; keep it visible.
        min_det = if det.is_nan() {
            f64::NAN
        } else if min_det.is_nan() {
            min_det
        } else {
            min_det.min(det)
        };
    }
    ks.sort_by(f64::total_cmp);
    Ok(DistortionReport {
        map,
        region,
        nx,
        ny,
        step,
        sup_k: ks.last().copied().unwrap_or(f64::NAN),
        k_min: quantile(&ks, 0.0),
        k_median: quantile(&ks, 0.5),
        k_p99: quantile(&ks, 0.99),
        min_det,
        nonfinite,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeLawReport {
    /// Worst excursion of `y_k^2 - y_0^2 - 2k` outside `[0, k / y_0^2]`,
    /// relative to `y_k^2`.
    pub worst_violation: f64,
    /// Final height for each starting height.
    pub final_heights: Vec<(f64, f64)>,
}

/// Runs the axis recurrence `y <- y + 1/y` and measures how far the
/// telescoped identity strays from its exact bounds.
pub fn escape_law_check(y0_values: &[f64], steps: u64) -> Result<EscapeLawReport> {
    if steps == 0 {
        return Err(Error::InvalidParameter("escape-law check needs at least one step".into()));
    }
    let mut worst: f64 = 0.0;
    let mut final_heights = Vec::with_capacity(y0_values.len());
    for &y0 in y0_values {
        if !(y0 > 0.0 && y0.is_finite()) {
            return Err(Error::InvalidParameter(format!("starting height must be positive, got {y0}")));
        }
        let upper_rate = 1.0 / (y0 * y0);
        let mut y = y0;
        for k in 1..=steps {
            y += 1.0 / y;
            let kf = k as f64;
            let d = (y * y - y0 * y0) - 2.0 * kf;
            let excess = (-d).max(d - kf * upper_rate).max(0.0);
            worst = worst.max(excess / (y * y));
        }
        final_heights.push((y0, y));
    }
    Ok(EscapeLawReport { worst_violation: worst, final_heights })
}

/// Largest `|f(phi(w)) - phi(psi(w))|` over `samples` seeded draws of `w`
/// spread uniformly over the segments of bends `1..=n_max`.
pub fn conjugacy_check(cfg: &GlobalMapConfig, n_max: usize, samples: usize, seed: u64) -> Result<f64> {
    let snake = cfg.snake().ok_or_else(|| Error::InvalidParameter("conjugacy check needs a snake".into()))?;
    if n_max == 0 || samples == 0 {
        return Ok(0.0);
    }
    let table = snake.ensure_bends(n_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let rec = &table[rng.random_range(0..4 * n_max)];
        let y = rng.random_range(rec.y_lo..=rec.y_hi);
        let x = rng.random_range(-1.0..=1.0) / y;
        let w = Point::new(x, y);
        let lhs = cfg.f_apply(rec.apply(w))?;
        let rhs = snake.phi_apply(psi_raw(w))?;
        worst = worst.max(lhs.dist(rhs));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub point: Point,
    pub label: Label,
    pub steps_taken: u64,
    pub max_modulus: f64,
    pub oscillations: usize,
}

impl Witness {
    fn from_record(rec: &OrbitRecord) -> Self {
        Witness {
            point: rec.start,
            label: rec.label,
            steps_taken: rec.steps_taken,
            max_modulus: rec.max_modulus,
            oscillations: rec.oscillation_maxima.len(),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} (steps {}, max |z| {:.6e}, oscillations {})",
            self.point, self.label, self.steps_taken, self.max_modulus, self.oscillations
        )
    }
}

/// Outcome of probing one lower-half-plane start for fast escape.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapeProbe {
    pub point: Point,
    pub escaped: bool,
    pub steps_taken: u64,
    pub max_modulus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceBundle {
    pub bounded: Witness,
    pub bungee: Witness,
    /// First probe start that escaped within [`ESCAPE_PROBE_STEPS`].
    pub escaping: Option<Witness>,
    pub escape_probes: Vec<EscapeProbe>,
    /// Outside and inside the side wall at matched height.
    pub pair: (Witness, Witness),
    pub pair_separation: f64,
    pub classifier: ClassifierConfig,
    pub escape_probe: ClassifierConfig,
}

impl EvidenceBundle {
    /// All witnesses carry their intended labels.
    pub fn is_complete(&self) -> bool {
        let pair_labels = [self.pair.0.label, self.pair.1.label];
        self.bounded.label == Label::Bounded
            && self.bounded.point.y > 0.0
            && self.bungee.label == Label::Bungee
            && self.bungee.point.y > 0.0
            && self.escaping.as_ref().is_some_and(|w| w.label == Label::Escaping && w.point.y < 0.0)
            && self.pair_separation < 1e-3
            && pair_labels.contains(&Label::Bungee)
            && (pair_labels.contains(&Label::Bounded) || pair_labels.contains(&Label::Undecided))
    }
}

/// Lower-half-plane starts tried, in order, for the escaping witness.
pub fn escape_probe_points() -> Vec<Point> {
    (0..=16).map(|i| Point::new(0.0, -2.0 - 0.5 * i as f64)).collect()
}

/// Labelled witnesses for `h`: a fixed side-wall point, the snake axis, a
/// fast-escaping point below the real axis, and a close pair straddling the
/// side wall.
pub fn evidence_bundle(cfg: &GlobalMapConfig, cc: &ClassifierConfig) -> Result<EvidenceBundle> {
    cc.validate()?;
    let h = cfg.with_which(MapKind::H)?;
    let run = |p: Point, cc: &ClassifierConfig| iterate_orbit(p, &h, cc);

    let wall_x = 1.0 / PAIR_HEIGHT;
    let bounded = Witness::from_record(&run(Point::new(wall_x, PAIR_HEIGHT), cc)?);
    let bungee = Witness::from_record(&run(Point::new(0.0, 101.5), cc)?);

    let probe_cc = ClassifierConfig { max_steps: ESCAPE_PROBE_STEPS, ..*cc };
    let mut escape_probes = Vec::new();
    let mut escaping = None;
    for p in escape_probe_points() {
        let rec = run(p, &probe_cc)?;
        escape_probes.push(EscapeProbe {
            point: p,
            escaped: rec.escaped(),
            steps_taken: rec.steps_taken,
            max_modulus: rec.max_modulus,
        });
        if rec.escaped() {
            escaping = Some(Witness::from_record(&rec));
            break;
        }
    }

    let outer = Point::new(wall_x + PAIR_HALF_GAP, PAIR_HEIGHT);
    let inner = Point::new(wall_x - PAIR_HALF_GAP, PAIR_HEIGHT);
    let pair = (Witness::from_record(&run(outer, cc)?), Witness::from_record(&run(inner, cc)?));

    Ok(EvidenceBundle {
        bounded,
        bungee,
        escaping,
        escape_probes,
        pair,
        pair_separation: outer.dist(inner),
        classifier: *cc,
        escape_probe: probe_cc,
    })
}

/// Parameters of a full verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub y0: f64,
    pub delta: f64,
    pub n_max: usize,
    pub gluing_samples: usize,
    pub conjugacy_samples: usize,
    pub classifier: ClassifierConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            y0: crate::maps::DEFAULT_Y0,
            delta: crate::maps::DEFAULT_DELTA,
            n_max: crate::snake::DEFAULT_N_MAX,
            gluing_samples: 50,
            conjugacy_samples: 10_000,
            classifier: evidence_classifier(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub title: String,
    pub checks: Vec<CheckLine>,
}

impl Section {
    fn new(title: &str) -> Self {
        Section { title: title.to_string(), checks: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(CheckLine { name: name.into(), pass, detail: detail.into() });
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerificationReport {
    pub sections: Vec<Section>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.sections.iter().flat_map(|s| &s.checks).all(|c| c.pass)
    }

    pub fn check_count(&self) -> usize {
        self.sections.iter().map(|s| s.checks.len()).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            let _ = writeln!(out, "== {} ==", s.title);
            for c in &s.checks {
                let _ = writeln!(out, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
        }
        let failed = self.sections.iter().flat_map(|s| &s.checks).filter(|c| !c.pass).count();
        let _ = writeln!(out, "== summary ==\n{} checks, {} failed", self.check_count(), failed);
        out
    }
}

fn distortion_line(section: &mut Section, name: &str, r: &DistortionReport, limit: Option<f64>) {
    let within = match limit {
        Some(l) => r.sup_k <= l,
        None => r.sup_k.is_finite(),
    };
    let bound = limit.map_or(String::from("finite"), |l| format!("<= {l}"));
    section.check(
        name,
        within && r.sense_preserving(),
        format!(
            "{} over {} ({}x{}): sup K = {:.9} ({bound}), median {:.6}, p99 {:.6}, min det = {:.6e}, non-finite {}",
            r.map, r.region, r.nx, r.ny, r.sup_k, r.k_median, r.k_p99, r.min_det, r.nonfinite
        ),
    );
}

/// Runs every verification suite. Only malformed options are errors; a
/// failed check is reported as a FAIL line.
pub fn run_verification(opts: &VerifyOptions) -> Result<VerificationReport> {
    let strip = StripParams::new(opts.y0)?;
    let perturb = PerturbParams::new(opts.delta)?;
    opts.classifier.validate()?;
    let snake = Arc::new(SnakeGeometry::new(strip, opts.n_max)?);
    let f = GlobalMapConfig::with_snake(MapKind::F, snake.clone(), perturb);
    let mut report = VerificationReport::default();

    let mut s = Section::new("gluing");
    let n_abs = GLUING_ABSOLUTE_DEPTH.min(opts.n_max);
    match snake.verify_gluing(n_abs, opts.gluing_samples) {
        Ok(gap) => s.check(
            format!("gluing n<={n_abs}"),
            gap < GLUING_TOLERANCE,
            format!("max edge mismatch {gap:.3e} (< {GLUING_TOLERANCE:e})"),
        ),
        Err(e) => s.check("gluing", false, e.to_string()),
    }
    if opts.n_max > n_abs {
        // Past bend 20 the heights exceed 2e6 and an absolute 1e-9 is below
        // one unit of rounding; measure the mismatch in ulps of the top instead.
        let ulp = f64::EPSILON * snake.top();
        match snake.verify_gluing(opts.n_max, opts.gluing_samples) {
            Ok(gap) => s.check(
                format!("gluing n<={}", opts.n_max),
                gap <= GLUING_DEEP_ULPS * ulp,
                format!("max edge mismatch {gap:.3e} = {:.2} ulp of the top height (<= {GLUING_DEEP_ULPS})", gap / ulp),
            ),
            Err(e) => s.check("gluing", false, e.to_string()),
        }
    }
    report.sections.push(s);

    let mut s = Section::new("disjointness");
    match snake.verify_disjoint(opts.n_max) {
        Ok(d) => {
            for e in &d.entries {
                s.check(
                    format!("disjoint n={}", e.n),
                    e.analytic && e.geometric,
                    format!("analytic {} geometric {} ({} samples/side)", e.analytic, e.geometric, e.samples_per_side),
                );
            }
        }
        Err(e) => s.check("disjointness", false, e.to_string()),
    }
    report.sections.push(s);

    let mut s = Section::new("conjugacy");
    // One bend of headroom so psi(w) stays inside the table.
    let n_conj = 12.min(opts.n_max.saturating_sub(1));
    match conjugacy_check(&f, n_conj, opts.conjugacy_samples, CONJUGACY_SEED) {
        Ok(err) => s.check(
            format!("conjugacy n<={n_conj}"),
            err < CONJUGACY_TOLERANCE && n_conj > 0,
            format!("max |f(phi(w)) - phi(psi(w))| = {err:.3e} over {} samples", opts.conjugacy_samples),
        ),
        Err(e) => s.check("conjugacy", false, e.to_string()),
    }
    report.sections.push(s);

    let mut s = Section::new("distortion");
    let sweeps = [
        ("psi strip", SweepMap::Map(MapKind::Psi), Region::StripBand { y_min: 200.0, y_max: 1e4 }, Some(PSI_K_LIMIT)),
        (
            "g lower band",
            SweepMap::Map(MapKind::G),
            Region::Rect { x_min: -3.0, x_max: 3.0, y_min: -3.0, y_max: 0.0 },
            Some(G_K_LIMIT),
        ),
        (
            "identity",
            SweepMap::Identity,
            Region::Rect { x_min: -3.0, x_max: 3.0, y_min: -3.0, y_max: 3.0 },
            Some(CONFORMAL_K_LIMIT),
        ),
        (
            "f identity regime",
            SweepMap::Map(MapKind::F),
            Region::Rect { x_min: 2.0, x_max: 5.0, y_min: 2.0, y_max: 5.0 },
            Some(CONFORMAL_K_LIMIT),
        ),
        (
            "f blend rectangle",
            SweepMap::Map(MapKind::F),
            Region::Rect { x_min: -0.98 / opts.y0, x_max: 0.98 / opts.y0, y_min: 1.0, y_max: opts.y0 - 1.0 },
            None,
        ),
    ];
    for (name, map, region, limit) in sweeps {
        let step = match region {
            // The blend rectangle is 2/y0 wide; keep the stencil inside it.
            Region::Rect { x_max, .. } if x_max < 1.0 => Some(1e-3 * x_max),
            _ => None,
        };
        match distortion_sweep(&f, map, region, 100, 100, step) {
            Ok(r) => distortion_line(&mut s, name, &r, limit),
            Err(e) => s.check(name, false, e.to_string()),
        }
    }
    report.sections.push(s);

    let mut s = Section::new("escape law");
    match escape_law_check(&[opts.y0], 1_000_000) {
        Ok(r) => {
            let (_, y_final) = r.final_heights[0];
            s.check(
                "escape law 1e6 steps",
                r.worst_violation <= ESCAPE_LAW_TOLERANCE,
                format!("worst relative violation {:.3e}, final height {y_final:.6}", r.worst_violation),
            );
        }
        Err(e) => s.check("escape law", false, e.to_string()),
    }
    report.sections.push(s);

    let mut s = Section::new("evidence");
    match evidence_bundle(&f, &opts.classifier) {
        Ok(b) => {
            s.check("bounded witness", b.bounded.label == Label::Bounded, b.bounded.to_string());
            s.check("bungee witness", b.bungee.label == Label::Bungee, b.bungee.to_string());
            let probes = b
                .escape_probes
                .iter()
                .map(|p| format!("{}:{}", p.point, if p.escaped { "escaped" } else { "stayed" }))
                .collect::<Vec<_>>()
                .join(" ");
            match &b.escaping {
                Some(w) => s.check("escaping witness", true, format!("{w}; probes {probes}")),
                None => s.check("escaping witness", false, format!("no probe escaped; probes {probes}")),
            }
            let labels = [b.pair.0.label, b.pair.1.label];
            s.check(
                "boundary pair",
                b.pair_separation < 1e-3 && labels.contains(&Label::Bungee) && labels.contains(&Label::Bounded),
                format!("separation {:.1e}: {} | {}", b.pair_separation, b.pair.0, b.pair.1),
            );
        }
        Err(e) => s.check("evidence bundle", false, e.to_string()),
    }
    report.sections.push(s);

    Ok(report)
}
