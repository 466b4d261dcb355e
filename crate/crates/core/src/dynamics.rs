//! Global plane maps, orbit iteration and orbit classification.
//!
//! Orbits inside the snake are advanced in straightened coordinates: with
//! `u = x y` (invariant under the corridor map) and `c = 1 - |u|`, one step
//! is just `y <- y + c / y`. On the rigid pieces of the snake the modulus of
//! the image is monotone in `y`, so long runs between threshold heights are
//! skipped in closed form (see [`leap`]); the bends are stepped one by one.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::maps::{g_apply, in_strip, psi_apply, psi_raw, Membership, PerturbParams, StripParams};
use crate::point::Point;
use crate::polygon::BBox;
use crate::snake::{locate, Placement, SegmentRecord, SnakeGeometry, DEFAULT_N_MAX};

pub const DEFAULT_MAX_STEPS: u64 = 50_000_000;
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e6;
pub const DEFAULT_BOUNDED_RADIUS: f64 = 1e4;
pub const DEFAULT_HIGH_THRESHOLD: f64 = 200.0;
pub const DEFAULT_LOW_THRESHOLD: f64 = 110.0;
pub const DEFAULT_MIN_OSCILLATIONS: usize = 4;

/// Upper bound on the number of retained trail points.
pub const TRAIL_LIMIT: usize = 100_000;

/// Which map an orbit iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    Psi,
    F,
    G,
    H,
}

impl MapKind {
    pub fn needs_snake(self) -> bool {
        matches!(self, MapKind::F | MapKind::H)
    }

    pub fn name(self) -> &'static str {
        match self {
            MapKind::Psi => "psi",
            MapKind::F => "f",
            MapKind::G => "g",
            MapKind::H => "h",
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "psi" => Ok(MapKind::Psi),
            "f" => Ok(MapKind::F),
            "g" => Ok(MapKind::G),
            "h" => Ok(MapKind::H),
            other => Err(Error::InvalidParameter(format!("unknown map '{other}' (expected psi, f, g or h)"))),
        }
    }
}

/// Where a point sits with respect to the pieces of `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// Inside the snake: table index and straightened preimage.
    Snake { index: usize, preimage: Point },
    /// The rectangle below the base of the strip, where `f` is the blend.
    Rectangle,
    /// Everywhere else `f` is the identity.
    Identity,
}

/// A map selector together with everything needed to evaluate it.
///
/// For `f` and `h` the segment table is built in full at construction, so a
/// config can be shared freely across threads without further locking.
#[derive(Debug, Clone)]
pub struct GlobalMapConfig {
    which: MapKind,
    strip: StripParams,
    perturb: PerturbParams,
    snake: Option<Arc<SnakeGeometry>>,
    table: Arc<Vec<SegmentRecord>>,
    snake_bbox: BBox,
}

impl GlobalMapConfig {
    /// Builds the snake (depth `n_max`) when the selector needs one.
    pub fn new(which: MapKind, strip: StripParams, perturb: PerturbParams, n_max: usize) -> Result<Self> {
        let snake = if which.needs_snake() { Some(Arc::new(SnakeGeometry::new(strip, n_max)?)) } else { None };
        Self::assemble(which, strip, perturb, snake)
    }

    /// Default strip, perturbation and depth.
    pub fn default_for(which: MapKind) -> Result<Self> {
        Self::new(which, StripParams::default(), PerturbParams::default(), DEFAULT_N_MAX)
    }

    pub fn with_snake(which: MapKind, snake: Arc<SnakeGeometry>, perturb: PerturbParams) -> Self {
        let strip = snake.params();
        Self::assemble(which, strip, perturb, Some(snake)).expect("snake supplied")
    }

    /// Same parameters and snake, different selector.
    pub fn with_which(&self, which: MapKind) -> Result<Self> {
        if which.needs_snake() && self.snake.is_none() {
            return Err(Error::InvalidParameter(format!("map {which} needs a snake geometry")));
        }
        Ok(GlobalMapConfig { which, ..self.clone() })
    }

    fn assemble(
        which: MapKind,
        strip: StripParams,
        perturb: PerturbParams,
        snake: Option<Arc<SnakeGeometry>>,
    ) -> Result<Self> {
        if which.needs_snake() && snake.is_none() {
            return Err(Error::InvalidParameter(format!("map {which} needs a snake geometry")));
        }
        let table = match &snake {
            Some(s) => s.full_table(),
            None => Arc::new(Vec::new()),
        };
        let snake_bbox = table.iter().fold(BBox::empty(), |b, r| {
            b.include(Point::new(r.image_bbox.x_min, r.image_bbox.y_min))
                .include(Point::new(r.image_bbox.x_max, r.image_bbox.y_max))
        });
        Ok(GlobalMapConfig { which, strip, perturb, snake, table, snake_bbox })
    }

    pub fn which(&self) -> MapKind {
        self.which
    }

    pub fn strip(&self) -> StripParams {
        self.strip
    }

    pub fn perturb(&self) -> PerturbParams {
        self.perturb
    }

    pub fn snake(&self) -> Option<&Arc<SnakeGeometry>> {
        self.snake.as_ref()
    }

    pub fn table(&self) -> &[SegmentRecord] {
        &self.table
    }

    /// Regime of `z` for `f`, trying table index `hint` first.
    pub fn regime(&self, z: Point, hint: Option<usize>) -> Regime {
        if self.snake_bbox.contains(z, 0.0) {
            if let Ok((preimage, index)) = locate(&self.table, z, hint) {
                return Regime::Snake { index, preimage };
            }
        }
        let y0 = self.strip.y0();
        if z.y > 0.0 && z.y < y0 && z.x.abs() < 1.0 / y0 {
            Regime::Rectangle
        } else {
            Regime::Identity
        }
    }

    /// `f(z)` given the regime of `z`; also returns the table index of the
    /// image when it is in the snake.
    fn f_in_regime(&self, z: Point, regime: Regime) -> Result<(Point, Option<usize>)> {
        match regime {
            Regime::Snake { index, preimage } => {
                let w = psi_raw(preimage);
                // The corridor map only raises heights: search upwards.
                let j = (index..self.table.len()).find(|&j| self.table[j].y_hi >= w.y).ok_or_else(|| {
                    let cap = self.snake.as_ref().map_or(0, |s| s.n_max());
                    Error::TableExhausted { index: cap + 1, cap }
                })?;
                Ok((self.table[j].apply(w), Some(j)))
            }
            Regime::Rectangle => {
                let y0 = self.strip.y0();
                let base = Point::new(z.x, y0);
                let shift = psi_raw(base) - base;
                Ok((z + shift * (z.y / y0), None))
            }
            Regime::Identity => Ok((z, None)),
        }
    }

    pub fn f_apply(&self, z: Point) -> Result<Point> {
        self.require_snake()?;
        self.f_in_regime(z, self.regime(z, None)).map(|(w, _)| w)
    }

    pub fn h_apply(&self, z: Point) -> Result<Point> {
        let w = self.f_apply(z)?;
        g_apply(w, self.perturb).map_err(|_| Error::EscapedToInfinity)
    }

    /// Applies the selected map.
    pub fn apply(&self, z: Point) -> Result<Point> {
        let mut hint = None;
        self.step(z, &mut hint)
    }

    /// One step of the selected map, keeping a table hint for the next call.
    fn step(&self, z: Point, hint: &mut Option<usize>) -> Result<Point> {
        match self.which {
            MapKind::Psi => psi_apply(z, self.strip),
            MapKind::G => g_apply(z, self.perturb).map_err(|_| Error::EscapedToInfinity),
            MapKind::F | MapKind::H => {
                let (w, next) = self.f_in_regime(z, self.regime(z, *hint))?;
                *hint = next;
                if self.which == MapKind::H {
                    g_apply(w, self.perturb).map_err(|_| Error::EscapedToInfinity)
                } else {
                    Ok(w)
                }
            }
        }
    }

    fn require_snake(&self) -> Result<()> {
        if self.snake.is_none() {
            return Err(Error::InvalidParameter("f and h need a snake geometry".into()));
        }
        Ok(())
    }
}

/// Thresholds and budget for orbit classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    pub max_steps: u64,
    pub escape_radius: f64,
    pub bounded_radius: f64,
    pub high_threshold: f64,
    pub low_threshold: f64,
    pub min_oscillations: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            max_steps: DEFAULT_MAX_STEPS,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
            bounded_radius: DEFAULT_BOUNDED_RADIUS,
            high_threshold: DEFAULT_HIGH_THRESHOLD,
            low_threshold: DEFAULT_LOW_THRESHOLD,
            min_oscillations: DEFAULT_MIN_OSCILLATIONS,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let radii = [self.escape_radius, self.bounded_radius, self.high_threshold, self.low_threshold];
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return bad("radii and thresholds must be finite and positive".into());
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        if self.min_oscillations == 0 {
            return bad("min_oscillations must be at least 1".into());
        }
        if !(self.low_threshold < self.high_threshold) {
            return bad(format!(
                "low_threshold {} must be below high_threshold {}",
                self.low_threshold, self.high_threshold
            ));
        }
        if !(self.high_threshold < self.escape_radius) {
            return bad(format!(
                "high_threshold {} must be below escape_radius {}",
                self.high_threshold, self.escape_radius
            ));
        }
        if !(self.bounded_radius < self.escape_radius) {
            return bad(format!(
                "bounded_radius {} must be below escape_radius {}",
                self.bounded_radius, self.escape_radius
            ));
        }
        Ok(())
    }

    /// Step stride that keeps a full-budget trail, plus its final point,
    /// within [`TRAIL_LIMIT`] points.
    pub fn trail_stride(&self) -> u64 {
        self.max_steps.div_ceil(TRAIL_LIMIT as u64 - 2).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Escaping,
    Bounded,
    Bungee,
    Undecided,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Escaping, Label::Bounded, Label::Bungee, Label::Undecided];

    pub fn name(self) -> &'static str {
        match self {
            Label::Escaping => "ESCAPING",
            Label::Bounded => "BOUNDED",
            Label::Bungee => "BUNGEE",
            Label::Undecided => "UNDECIDED",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Modulus rose above the high threshold.
    Up,
    /// Modulus fell below the low threshold.
    Down,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Up => "crossed-high-up",
            Direction::Down => "crossed-low-down",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OscillationEvent {
    pub step: u64,
    pub direction: Direction,
}

/// Why iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Ran the full step budget.
    Budget,
    /// Modulus passed the escape radius, or the map overflowed.
    Escaped,
    /// The orbit climbed past the top of the built snake.
    LeftTable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrailPoint {
    pub step: u64,
    pub point: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRecord {
    pub start: Point,
    pub final_point: Point,
    pub steps_taken: u64,
    pub max_modulus: f64,
    pub min_modulus: f64,
    pub last_modulus: f64,
    pub oscillation_events: Vec<OscillationEvent>,
    /// Largest modulus within each completed up/down oscillation.
    pub oscillation_maxima: Vec<f64>,
    pub termination: Termination,
    pub label: Label,
    pub trail: Option<Vec<TrailPoint>>,
}

impl OrbitRecord {
    pub fn escaped(&self) -> bool {
        self.termination == Termination::Escaped
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "label={} steps={} final={} max_modulus={} last_modulus={} oscillations={}",
            self.label,
            self.steps_taken,
            self.final_point,
            self.max_modulus,
            self.last_modulus,
            self.oscillation_maxima.len()
        )
    }

    /// Writes the trail as `step,x,y,modulus` records with a header line.
    pub fn write_trail<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "step,x,y,modulus")?;
        for tp in self.trail.iter().flatten() {
            writeln!(out, "{},{},{},{}", tp.step, tp.point.x, tp.point.y, tp.point.modulus())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathMode {
    /// Straightened-coordinate stepping inside the snake.
    #[default]
    Fast,
    /// Evaluate the map itself at every step.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OrbitOptions {
    pub path: PathMode,
    pub keep_trail: bool,
}

/// Extrema, threshold crossings and the decimated trail.
struct Tracker {
    cc: ClassifierConfig,
    stride: u64,
    max: f64,
    min: f64,
    last: f64,
    last_point: Point,
    steps: u64,
    above: bool,
    peak: f64,
    events: Vec<OscillationEvent>,
    maxima: Vec<f64>,
    trail: Option<Vec<TrailPoint>>,
}

impl Tracker {
    fn new(cc: ClassifierConfig, z0: Point, keep_trail: bool) -> Self {
        let m = z0.modulus();
        Tracker {
            cc,
            stride: cc.trail_stride(),
            max: m,
            min: m,
            last: m,
            last_point: z0,
            steps: 0,
            // A start above the high threshold is not an oscillation of its own.
            above: m > cc.high_threshold,
            peak: m,
            events: Vec::new(),
            maxima: Vec::new(),
            trail: keep_trail.then(Vec::new),
        }
    }

    /// Records the orbit point at `step`; true once it has escaped.
    #[inline]
    fn observe(&mut self, step: u64, z: Point) -> bool {
        let m = z.modulus();
        self.steps = step;
        self.last = m;
        self.last_point = z;
        self.max = self.max.max(m);
        self.min = self.min.min(m);
        if self.above {
            self.peak = self.peak.max(m);
            if m < self.cc.low_threshold {
                self.above = false;
                if self.events.last().is_some_and(|e| e.direction == Direction::Up) {
                    self.events.push(OscillationEvent { step, direction: Direction::Down });
                    self.maxima.push(self.peak);
                }
            }
        } else if m > self.cc.high_threshold {
            self.above = true;
            self.peak = m;
            self.events.push(OscillationEvent { step, direction: Direction::Up });
        }
        if let Some(trail) = &mut self.trail {
            if step.is_multiple_of(self.stride) {
                trail.push(TrailPoint { step, point: z });
            }
        }
        !(m <= self.cc.escape_radius)
    }

    /// Steps until the next retained trail sample.
    fn steps_to_sample(&self, step: u64) -> u64 {
        if self.trail.is_some() {
            self.stride - step % self.stride
        } else {
            u64::MAX
        }
    }

    /// The orbit is constant from `step` on: fast-forward to the budget.
    fn hold(&mut self, step: u64, z: Point) {
        let end = self.cc.max_steps;
        if let Some(trail) = &mut self.trail {
            let mut s = (step / self.stride + 1) * self.stride;
            while s <= end {
                trail.push(TrailPoint { step: s, point: z });
                s += self.stride;
            }
        }
        self.steps = end;
        self.last_point = z;
        self.last = z.modulus();
    }

    fn finish(mut self, start: Point, termination: Termination) -> OrbitRecord {
        if let Some(trail) = &mut self.trail {
            if trail.last().is_none_or(|t| t.step != self.steps) {
                trail.push(TrailPoint { step: self.steps, point: self.last_point });
            }
        }
        let mut record = OrbitRecord {
            start,
            final_point: self.last_point,
            steps_taken: self.steps,
            max_modulus: self.max,
            min_modulus: self.min,
            last_modulus: self.last,
            oscillation_events: self.events,
            oscillation_maxima: self.maxima,
            termination,
            label: Label::Undecided,
            trail: self.trail,
        };
        record.label = classify(&record, &self.cc).expect("config validated before iterating");
        record
    }
}

/// Decision rules, in order: escaping, bungee, bounded, undecided.
///
/// Bungee is tested before bounded: a snake orbit with several growing
/// oscillations can still stay below the bounded radius within the budget.
pub fn classify(record: &OrbitRecord, cc: &ClassifierConfig) -> Result<Label> {
    cc.validate()?;
    if record.termination == Termination::Escaped {
        return Ok(Label::Escaping);
    }
    let maxima = &record.oscillation_maxima;
    if maxima.len() >= cc.min_oscillations && maxima.windows(2).all(|w| w[1] > w[0]) {
        return Ok(Label::Bungee);
    }
    if record.termination == Termination::Budget
        && record.steps_taken >= cc.max_steps
        && record.max_modulus <= cc.bounded_radius
    {
        return Ok(Label::Bounded);
    }
    Ok(Label::Undecided)
}

pub fn iterate_orbit(z0: Point, cfg: &GlobalMapConfig, cc: &ClassifierConfig) -> Result<OrbitRecord> {
    iterate_orbit_with(z0, cfg, cc, OrbitOptions::default())
}

/// Iterates the selected map from `z0`.
///
/// Fails only on an invalid classifier config, a non-finite start, or a
/// `psi` orbit started outside the strip (where `psi` is undefined).
pub fn iterate_orbit_with(
    z0: Point,
    cfg: &GlobalMapConfig,
    cc: &ClassifierConfig,
    opts: OrbitOptions,
) -> Result<OrbitRecord> {
    cc.validate()?;
    if !z0.is_finite() {
        return Err(Error::InvalidParameter(format!("orbit start {z0} is not finite")));
    }
    let mut tracker = Tracker::new(*cc, z0, opts.keep_trail);
    if tracker.observe(0, z0) {
        return Ok(tracker.finish(z0, Termination::Escaped));
    }
    let fast = opts.path == PathMode::Fast;

    if cfg.which == MapKind::Psi {
        if in_strip(z0, cfg.strip) == Membership::Outside {
            return Err(Error::OutsideStrip(z0));
        }
        if fast {
            let end = run_straightened(Chart::Strip, 0, z0.x * z0.y, z0.y, 0, &mut tracker);
            return Ok(tracker.finish(z0, end));
        }
    }

    let mut z = z0;
    let mut hint = None;
    let mut k = 0;
    while k < cc.max_steps {
        if fast && cfg.which.needs_snake() {
            if let Regime::Snake { index, preimage } = cfg.regime(z, hint) {
                // The snake is forward invariant; stay in straightened coordinates.
                let chart = Chart::Snake(&cfg.table);
                let end = run_straightened(chart, index, preimage.x * preimage.y, preimage.y, k, &mut tracker);
                return Ok(tracker.finish(z0, end));
            }
        }
        let next = match cfg.step(z, &mut hint) {
            Ok(w) => w,
            Err(Error::EscapedToInfinity) => return Ok(tracker.finish(z0, Termination::Escaped)),
            Err(Error::TableExhausted { .. }) => return Ok(tracker.finish(z0, Termination::LeftTable)),
            Err(e) => return Err(e),
        };
        k += 1;
        if next == z {
            tracker.hold(k, z);
            break;
        }
        z = next;
        if tracker.observe(k, z) {
            return Ok(tracker.finish(z0, Termination::Escaped));
        }
    }
    Ok(tracker.finish(z0, Termination::Budget))
}

/// Straightened coordinates: the strip itself, or the snake table.
#[derive(Clone, Copy)]
enum Chart<'a> {
    Strip,
    Snake(&'a [SegmentRecord]),
}

impl Chart<'_> {
    fn len(&self) -> usize {
        match self {
            Chart::Strip => 1,
            Chart::Snake(t) => t.len(),
        }
    }

    fn top(&self, i: usize) -> f64 {
        match self {
            Chart::Strip => f64::INFINITY,
            Chart::Snake(t) => t[i].y_hi,
        }
    }

    /// Rigid pieces: the image modulus is monotone in the height.
    fn monotone(&self, i: usize) -> bool {
        match self {
            Chart::Strip => true,
            Chart::Snake(t) => matches!(t[i].placement, Placement::Rigid { .. }),
        }
    }

    #[inline]
    fn image(&self, i: usize, u: f64, y: f64) -> Point {
        let p = Point::new(u / y, y);
        match self {
            Chart::Strip => p,
            Chart::Snake(t) => t[i].apply(p),
        }
    }
}

/// Height after `m` steps of `y <- y + c / y`.
///
/// With `v = y^2` a step adds `2c + c^2 / v` exactly, so after `m` steps
/// `v_m = v + 2cm + c^2 * sum 1/v_j`; the sum is replaced by the midpoint
/// integral `ln(1 + 2cm / (v - c)) / (2c)`.
pub fn leap(y: f64, c: f64, m: u64) -> f64 {
    let v = y * y;
    let span = 2.0 * c * m as f64;
    (v + span + 0.5 * c * (span / (v - c)).ln_1p()).sqrt()
}

/// Steps that provably keep the height below `target`, with a few single
/// steps of margin, and at most doubling `y^2`.
fn leap_steps(y: f64, c: f64, target: f64) -> u64 {
    if !(c > 0.0) {
        return 0;
    }
    let v = y * y;
    // Every step adds at most this much to y^2.
    let per_step = 2.0 * c + c * c / v;
    let room = ((target * target - v) / per_step - 3.0).min(v / (2.0 * c));
    if room >= 2.0 {
        room.floor() as u64
    } else {
        0
    }
}

/// Heights in piece `i`, at or above `y`, just below where the image
/// modulus crosses a classifier threshold. The modulus is monotone on the
/// piece, so each threshold is crossed at most once and the heights do not
/// depend on where in the piece the orbit currently is.
fn crossing_heights(chart: Chart<'_>, i: usize, u: f64, y: f64, cc: &ClassifierConfig) -> Vec<f64> {
    let top = chart.top(i);
    let modulus = |h: f64| chart.image(i, u, h).modulus();
    let now = modulus(y);
    let mut heights = Vec::new();
    for t in [cc.low_threshold, cc.high_threshold, cc.escape_radius] {
        // On the unbounded strip the modulus exceeds the height, so `t` itself brackets.
        let end = if top.is_finite() { top } else { t.max(y) };
        let at_end = modulus(end);
        if !((now - t) * (at_end - t) <= 0.0) || now == t {
            continue;
        }
        // Bisection keeps `lo` on the same side of `t` as `now`.
        let (mut lo, mut hi) = (y, end);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (modulus(mid) - t) * (now - t) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        heights.push(lo);
    }
    heights
}

fn run_straightened(
    chart: Chart<'_>,
    mut piece: usize,
    u: f64,
    mut y: f64,
    mut k: u64,
    tr: &mut Tracker,
) -> Termination {
    let cc = tr.cc;
    let c = (1.0 - u.abs()).max(0.0);
    // Crossing heights of the piece they were computed for.
    let mut crossings: Option<(usize, Vec<f64>)> = None;
    while k < cc.max_steps {
        if chart.monotone(piece) {
            if crossings.as_ref().is_none_or(|(p, _)| *p != piece) {
                crossings = Some((piece, crossing_heights(chart, piece, u, y, &cc)));
            }
            let ahead = crossings.as_ref().map_or(&[][..], |(_, h)| &h[..]);
            let target = ahead.iter().copied().filter(|&h| h >= y).fold(chart.top(piece), f64::min);
            let m = leap_steps(y, c, target).min(cc.max_steps - k).min(tr.steps_to_sample(k));
            if m >= 2 {
                y = leap(y, c, m);
                k += m;
                if tr.observe(k, chart.image(piece, u, y)) {
                    return Termination::Escaped;
                }
                continue;
            }
        }
        let next = y + c / y;
        if next == y {
            tr.hold(k, chart.image(piece, u, y));
            return Termination::Budget;
        }
        y = next;
        k += 1;
        while y > chart.top(piece) {
            piece += 1;
            if piece >= chart.len() {
                return Termination::LeftTable;
            }
        }
        if tr.observe(k, chart.image(piece, u, y)) {
            return Termination::Escaped;
        }
    }
    Termination::Budget
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::psi_apply;

    fn f_cfg() -> GlobalMapConfig {
        GlobalMapConfig::default_for(MapKind::F).unwrap()
    }

    #[test]
    fn map_kind_round_trip() {
        for k in [MapKind::Psi, MapKind::F, MapKind::G, MapKind::H] {
            assert_eq!(k.name().parse::<MapKind>().unwrap(), k);
        }
        assert!("q".parse::<MapKind>().is_err());
    }

    #[test]
    fn f_examples() {
        let cfg = f_cfg();
        assert_eq!(cfg.f_apply(Point::new(5.0, 5.0)).unwrap(), Point::new(5.0, 5.0));
        let z = Point::new(0.0, 101.5);
        let expected = psi_apply(z, StripParams::default()).unwrap();
        assert!(cfg.f_apply(z).unwrap().dist(expected) < 1e-12);
        let wall = Point::new(1.0 / 102.0, 102.0);
        assert!(cfg.f_apply(wall).unwrap().dist(wall) < 1e-13);
    }

    #[test]
    fn h_examples() {
        let cfg = GlobalMapConfig::default_for(MapKind::H).unwrap();
        let w = cfg.h_apply(Point::new(0.0, -2.0)).unwrap();
        assert!((w.x - 0.545_981_500_331_442_4).abs() < 1e-12, "{w}");
        assert_eq!(w.y, -2.0);
        assert_eq!(cfg.h_apply(Point::new(5.0, 5.0)).unwrap(), Point::new(5.0, 5.0));
        let z = Point::new(0.0, 101.5);
        assert_eq!(cfg.h_apply(z).unwrap(), cfg.f_apply(z).unwrap());
    }

    #[test]
    fn rectangle_blend_edges() {
        let cfg = f_cfg();
        let y0 = 101.0;
        // Zero displacement at the bottom and on the side walls.
        let bottom = Point::new(0.003, 1e-9);
        assert!(cfg.f_apply(bottom).unwrap().dist(bottom) < 1e-10);
        // Matches the corridor map at the top edge.
        let top = Point::new(0.004, y0 - 1e-12);
        let psi_top = psi_raw(Point::new(0.004, y0));
        assert!(cfg.f_apply(top).unwrap().dist(psi_top) < 1e-9);
    }

    #[test]
    fn classifier_config_validation() {
        assert!(ClassifierConfig::default().validate().is_ok());
        let bad = ClassifierConfig { low_threshold: 300.0, ..Default::default() };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        let bad = ClassifierConfig { bounded_radius: 2e6, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ClassifierConfig { max_steps: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ClassifierConfig { escape_radius: f64::NAN, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn leap_matches_stepping() {
        for &(y0, c, m) in &[(101.0, 1.0, 10_000u64), (500.0, 0.3, 200_000), (101.0, 1e-3, 50_000)] {
            let mut y: f64 = y0;
            for _ in 0..m {
                y += c / y;
            }
            let fast = leap(y0, c, m);
            assert!((fast - y).abs() < 1e-9 * y, "y0={y0} c={c}: {fast} vs {y}");
        }
    }

    #[test]
    fn leap_steps_stay_below_target() {
        let (y0, c, target) = (150.0, 0.7, 200.0);
        let m = leap_steps(y0, c, target);
        assert!(m > 1000);
        let mut y = y0;
        for _ in 0..m {
            y += c / y;
        }
        assert!(y < target);
    }

    #[test]
    fn psi_orbit_final_height() {
        let cfg = GlobalMapConfig::new(MapKind::Psi, StripParams::default(), PerturbParams::default(), 0).unwrap();
        let cc = ClassifierConfig { max_steps: 1_000_000, ..Default::default() };
        for path in [PathMode::Fast, PathMode::Direct] {
            let rec = iterate_orbit_with(Point::new(0.0, 101.0), &cfg, &cc, OrbitOptions { path, keep_trail: false })
                .unwrap();
            assert_eq!(rec.steps_taken, 1_000_000);
            let y = rec.final_point.y;
            assert!((1417.81..=1417.86).contains(&y), "{path:?}: {y}");
        }
    }

    #[test]
    fn psi_orbit_outside_strip_is_rejected() {
        let cfg = GlobalMapConfig::new(MapKind::Psi, StripParams::default(), PerturbParams::default(), 0).unwrap();
        assert!(iterate_orbit(Point::new(1.0, 200.0), &cfg, &ClassifierConfig::default()).is_err());
    }

    #[test]
    fn identity_regime_is_bounded() {
        let rec = iterate_orbit(Point::new(5.0, 5.0), &f_cfg(), &ClassifierConfig::default()).unwrap();
        assert_eq!(rec.label, Label::Bounded);
        assert_eq!(rec.steps_taken, DEFAULT_MAX_STEPS);
        assert_eq!(rec.final_point, Point::new(5.0, 5.0));
    }

    #[test]
    fn wall_point_is_bounded() {
        let rec = iterate_orbit(Point::new(1.0 / 102.0, 102.0), &f_cfg(), &ClassifierConfig::default()).unwrap();
        assert_eq!(rec.label, Label::Bounded);
    }

    #[test]
    fn snake_axis_is_bungee() {
        let rec = iterate_orbit(Point::new(0.0, 101.5), &f_cfg(), &ClassifierConfig::default()).unwrap();
        assert_eq!(rec.label, Label::Bungee, "{}", rec.summary());
        assert!(rec.oscillation_maxima.len() >= 4);
        let ev = &rec.oscillation_events;
        assert!(ev.windows(2).all(|w| w[0].direction != w[1].direction));
        assert_eq!(ev[0].direction, Direction::Up);
    }

    #[test]
    fn escaping_point_under_h() {
        let cfg = GlobalMapConfig::default_for(MapKind::H).unwrap();
        let rec = iterate_orbit(Point::new(0.0, -4.5), &cfg, &ClassifierConfig::default()).unwrap();
        assert_eq!(rec.label, Label::Escaping);
        assert!(rec.steps_taken <= 5);
    }

    #[test]
    fn trail_is_decimated() {
        let cc = ClassifierConfig { max_steps: 1_000_000, ..Default::default() };
        let opts = OrbitOptions { path: PathMode::Fast, keep_trail: true };
        let rec = iterate_orbit_with(Point::new(0.0, 101.5), &f_cfg(), &cc, opts).unwrap();
        let trail = rec.trail.as_ref().unwrap();
        assert!(trail.len() <= TRAIL_LIMIT);
        let stride = cc.trail_stride();
        let (last, regular) = trail.split_last().unwrap();
        assert_eq!(last.step, rec.steps_taken);
        assert!(regular.iter().all(|t| t.step % stride == 0));
        assert!(regular.windows(2).all(|w| w[1].step == w[0].step + stride));
        let mut buf = Vec::new();
        rec.write_trail(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,x,y,modulus\n0,0,101.5,101.5\n"));
    }
}
