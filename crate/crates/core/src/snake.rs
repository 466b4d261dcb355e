//! The coiled snake: the strip `T0` cut at the heights `s_n`, `s_n + t_n`,
//! ... into straight strips (S1, S3) and short near-squares (S2, S4), each
//! placed in the plane by a rigid motion or a scaled half-annulus bend.
//!
//! Placements are found by edge propagation: every segment's final
//! translation is solved so that its entry edge lands on the exit edge of
//! the previous segment's image. The result is a continuous piecewise map
//! `phi` whose image climbs to height about `y0 + t_n` at the n-th top bend
//! and returns to about `y0` at every bottom bend.
//!
//! Precision: the S2/S4 pieces of bend n have height about `4 / 2^(n+1)`
//! while sitting at height about `2^(n+1)`, so only `2^(52 - 2n)` or so
//! representable heights fall inside one of them. From n = 26 on the
//! corner terms `4/(s_n + t_n)` drop below half an ulp of `s_n` and S2/S4
//! collapse to zero height, so `HARD_N_MAX` stops the table at 25.

use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::maps::{Bend, StripParams};
use crate::point::Point;
use crate::polygon::{polygons_intersect, BBox};

pub const DEFAULT_N_MAX: usize = 24;
pub const HARD_N_MAX: usize = 25;

const BBOX_SIDE_SAMPLES: usize = 64;
const DISJOINT_START_SAMPLES: usize = 64;
const DISJOINT_MAX_SAMPLES: usize = 1024;

/// `t_n = 2^n`.
pub fn t_of(n: usize) -> f64 {
    2f64.powi(n as i32)
}

/// The recurrence `s_{n+1} = s_n + 2 t_n + 4/(s_n + t_n) + 4/(s_n + 2 t_n + 4/(s_n + t_n))`,
/// evaluated left to right.
pub fn next_s(s: f64, t: f64) -> f64 {
    let e = s + 2.0 * t + 4.0 / (s + t);
    e + 4.0 / e
}

/// Cached `s_n`, `t_n` starting from `s_1 = y0`.
#[derive(Debug, Clone)]
pub struct SnakeSequences {
    s: Vec<f64>,
}

impl SnakeSequences {
    pub fn new(y0: f64, n: usize) -> Self {
        let mut s = Vec::with_capacity(n.max(1));
        s.push(y0);
        while s.len() < n {
            let k = s.len();
            s.push(next_s(s[k - 1], t_of(k)));
        }
        SnakeSequences { s }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// `(s_n, t_n)` for `1 <= n <= len`.
    pub fn get(&self, n: usize) -> Option<(f64, f64)> {
        (n >= 1).then(|| self.s.get(n - 1).map(|&s| (s, t_of(n)))).flatten()
    }
}

/// Analytic separation condition for bend n: `t_n < s_n`, equivalently
/// `2/s_n < 4/(s_n + t_n)`.
pub fn analytic_separation(s: f64, t: f64) -> bool {
    t < s && 2.0 / s < 4.0 / (s + t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentKind {
    S1,
    S2,
    S3,
    S4,
}

impl SegmentKind {
    pub const ALL: [SegmentKind; 4] = [SegmentKind::S1, SegmentKind::S2, SegmentKind::S3, SegmentKind::S4];

    fn from_offset(i: usize) -> Self {
        SegmentKind::ALL[i % 4]
    }

    fn offset(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SegmentKind::S1 => "S1",
            SegmentKind::S2 => "S2",
            SegmentKind::S3 => "S3",
            SegmentKind::S4 => "S4",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentRef {
    pub n: usize,
    pub kind: SegmentKind,
}

impl SegmentRef {
    pub fn new(n: usize, kind: SegmentKind) -> Self {
        SegmentRef { n, kind }
    }

    pub fn table_index(self) -> usize {
        4 * (self.n - 1) + self.kind.offset()
    }

    pub fn from_table_index(i: usize) -> Self {
        SegmentRef { n: i / 4 + 1, kind: SegmentKind::from_offset(i) }
    }
}

impl fmt::Display for SegmentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.kind, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Upright,
    HalfTurn,
}

impl Orientation {
    #[inline]
    pub fn apply(self, p: Point) -> Point {
        match self {
            Orientation::Upright => p,
            Orientation::HalfTurn => p.half_turn(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Orientation::Upright => "upright",
            Orientation::HalfTurn => "half-turn",
        }
    }
}

/// How one segment of the straight strip is laid into the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// `p -> orientation(p) + translation`.
    Rigid { orientation: Orientation, translation: Point },
    /// `p -> post_orientation(post_scale * bend(scale * (p + pre_translation))) + post_translation`.
    Bent {
        pre_translation: Point,
        scale: f64,
        bend: Bend,
        post_scale: f64,
        post_orientation: Orientation,
        post_translation: Point,
    },
}

impl Placement {
    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        match *self {
            Placement::Rigid { orientation, translation } => orientation.apply(p) + translation,
            Placement::Bent { post_translation, .. } => self.apply_untranslated(p) + post_translation,
        }
    }

    #[inline]
    fn apply_untranslated(&self, p: Point) -> Point {
        match *self {
            Placement::Rigid { orientation, .. } => orientation.apply(p),
            Placement::Bent { pre_translation, scale, bend, post_scale, post_orientation, .. } => {
                let in_rect = (p + pre_translation) * scale;
                post_orientation.apply(bend.apply_raw(in_rect) * post_scale)
            }
        }
    }

    #[inline]
    pub fn invert(&self, q: Point) -> Point {
        match *self {
            Placement::Rigid { orientation, translation } => orientation.apply(q - translation),
            Placement::Bent { pre_translation, scale, bend, post_orientation, post_translation, .. } => {
                let in_annulus = post_orientation.apply(q - post_translation) * scale;
                bend.inverse_raw(in_annulus) * (1.0 / scale) - pre_translation
            }
        }
    }

    fn with_translation(self, t: Point) -> Self {
        match self {
            Placement::Rigid { orientation, .. } => Placement::Rigid { orientation, translation: t },
            Placement::Bent { pre_translation, scale, bend, post_scale, post_orientation, .. } => {
                Placement::Bent { pre_translation, scale, bend, post_scale, post_orientation, post_translation: t }
            }
        }
    }

    /// Sign of the Jacobian determinant of the composed transform.
    pub fn is_orientation_preserving(&self) -> bool {
        match *self {
            // Rotations by 0 or pi.
            Placement::Rigid { .. } => true,
            // Both bends have positive Jacobian on the rectangle; the two
            // scalings multiply to a positive factor.
            Placement::Bent { scale, post_scale, .. } => scale * post_scale > 0.0,
        }
    }

    /// Translation that makes `self` send `anchor` onto `target`.
    fn solve_translation(self, anchor: Point, target: Point) -> Self {
        let moved = self.apply_untranslated(anchor);
        self.with_translation(target - moved)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRecord {
    pub seg: SegmentRef,
    pub y_lo: f64,
    pub y_hi: f64,
    pub placement: Placement,
    pub image_bbox: BBox,
}

impl SegmentRecord {
    fn new(seg: SegmentRef, y_lo: f64, y_hi: f64, placement: Placement) -> Self {
        let mut rec = SegmentRecord { seg, y_lo, y_hi, placement, image_bbox: BBox::empty() };
        let bbox = BBox::of_points(rec.image_outline(BBOX_SIDE_SAMPLES));
        let dx = 1e-3 * (bbox.x_max - bbox.x_min);
        let dy = 1e-3 * (bbox.y_max - bbox.y_min);
        rec.image_bbox = bbox.grow(dx, dy);
        rec
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        self.placement.apply(p)
    }

    /// Boundary of the segment in straightened coordinates, counter-clockwise:
    /// base, right wall, top, left wall, `samples` points per side.
    pub fn outline(&self, samples: usize) -> Vec<Point> {
        let samples = samples.max(1);
        let mut pts = Vec::with_capacity(4 * samples);
        let lerp = |a: f64, b: f64, i: usize| a + (b - a) * (i as f64 / samples as f64);
        let (lo, hi) = (self.y_lo, self.y_hi);
        for i in 0..samples {
            pts.push(Point::new(lerp(-1.0 / lo, 1.0 / lo, i), lo));
        }
        for i in 0..samples {
            let y = lerp(lo, hi, i);
            pts.push(Point::new(1.0 / y, y));
        }
        for i in 0..samples {
            pts.push(Point::new(lerp(1.0 / hi, -1.0 / hi, i), hi));
        }
        for i in 0..samples {
            let y = lerp(hi, lo, i);
            pts.push(Point::new(-1.0 / y, y));
        }
        pts
    }

    pub fn image_outline(&self, samples: usize) -> Vec<Point> {
        self.outline(samples).into_iter().map(|p| self.apply(p)).collect()
    }

    /// Inverts the placement and accepts if the preimage lies in this
    /// segment up to `tol`; the accepted preimage is snapped into it.
    #[inline]
    fn pull_back(&self, q: Point, tol: f64) -> Option<Point> {
        if !self.image_bbox.contains(q, tol) {
            return None;
        }
        let w = self.placement.invert(q);
        if !(w.y >= self.y_lo - tol && w.y <= self.y_hi + tol) {
            return None;
        }
        let y = w.y.clamp(self.y_lo, self.y_hi);
        let half = 1.0 / y;
        if w.x.abs() > half + tol {
            return None;
        }
        Some(Point::new(w.x.clamp(-half, half), y))
    }

    /// One `key=value` record, fields in fixed order.
    pub fn to_record_line(&self) -> String {
        let mut line = format!("n={} kind={} y_lo={} y_hi={}", self.seg.n, self.seg.kind, self.y_lo, self.y_hi);
        match self.placement {
            Placement::Rigid { orientation, translation } => {
                line += &format!(
                    " placement=rigid orientation={} tx={} ty={}",
                    orientation.name(),
                    translation.x,
                    translation.y
                );
            }
            Placement::Bent { pre_translation, scale, bend, post_scale, post_orientation, post_translation } => {
                let bend = match bend {
                    Bend::Right => "nu_r",
                    Bend::Left => "nu_l",
                };
                line += &format!(
                    " placement=bent pre_tx={} pre_ty={} scale={} bend={} post_scale={} post_orientation={} post_tx={} post_ty={}",
                    pre_translation.x,
                    pre_translation.y,
                    scale,
                    bend,
                    post_scale,
                    post_orientation.name(),
                    post_translation.x,
                    post_translation.y
                );
            }
        }
        let b = &self.image_bbox;
        line +=
            &format!(" bbox_x_min={} bbox_x_max={} bbox_y_min={} bbox_y_max={}", b.x_min, b.x_max, b.y_min, b.y_max);
        line
    }
}

/// Slack used when accepting a pulled-back point: a few units of rounding
/// at the heights involved.
#[inline]
pub(crate) fn location_tolerance(q: Point, y_hi: f64) -> f64 {
    16.0 * f64::EPSILON * (q.y.abs() + y_hi)
}

/// Builds the S1 placement of bend `n` from the exit of the previous bend.
fn first_strip(n: usize, s: f64, t: f64, entry: Option<&SegmentRecord>) -> SegmentRecord {
    let rigid = Placement::Rigid { orientation: Orientation::Upright, translation: Point::default() };
    let placement = match entry {
        None => rigid,
        Some(prev) => {
            let anchor = Point::new(0.0, s);
            rigid.solve_translation(anchor, prev.apply(anchor))
        }
    };
    SegmentRecord::new(SegmentRef::new(n, SegmentKind::S1), s, s + t, placement)
}

fn bent(lo: f64, hi: f64, bend: Bend, post_orientation: Orientation) -> Placement {
    Placement::Bent {
        // Bottom-left corner of the bounding box to the origin.
        pre_translation: Point::new(1.0 / lo, -lo),
        scale: 2.0 / (hi - lo),
        bend,
        post_scale: 0.5 * (hi - lo),
        post_orientation,
        post_translation: Point::default(),
    }
}

/// The four segments of bend `n`.
fn build_bend(n: usize, s: f64, t: f64, s_next: f64, entry: Option<&SegmentRecord>) -> [SegmentRecord; 4] {
    let a = s + t;
    let b = a + 4.0 / a;
    let e = s + 2.0 * t + 4.0 / a;
    debug_assert_eq!(e + 4.0 / e, s_next);

    let s1 = first_strip(n, s, t, entry);

    let anchor = Point::new(0.0, a);
    let p2 = bent(a, b, Bend::Right, Orientation::Upright).solve_translation(anchor, s1.apply(anchor));
    let s2 = SegmentRecord::new(SegmentRef::new(n, SegmentKind::S2), a, b, p2);

    let anchor = Point::new(0.0, b);
    let p3 = Placement::Rigid { orientation: Orientation::HalfTurn, translation: Point::default() }
        .solve_translation(anchor, s2.apply(anchor));
    let s3 = SegmentRecord::new(SegmentRef::new(n, SegmentKind::S3), b, e, p3);

    let anchor = Point::new(0.0, e);
    let p4 = bent(e, s_next, Bend::Left, Orientation::HalfTurn).solve_translation(anchor, s3.apply(anchor));
    let s4 = SegmentRecord::new(SegmentRef::new(n, SegmentKind::S4), e, s_next, p4);

    [s1, s2, s3, s4]
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisjointEntry {
    pub n: usize,
    pub analytic: bool,
    pub geometric: bool,
    /// Boundary samples per side at which the verdict stabilised.
    pub samples_per_side: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisjointReport {
    pub entries: Vec<DisjointEntry>,
}

impl DisjointReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.analytic && e.geometric)
    }
}

/// The snake: sequences plus a lazily grown segment table.
///
/// Readers take cheap snapshots of the table; growth swaps in an extended
/// copy under the write lock, so a snapshot never changes under a reader.
#[derive(Debug)]
pub struct SnakeGeometry {
    params: StripParams,
    n_max: usize,
    sequences: SnakeSequences,
    table: RwLock<Arc<Vec<SegmentRecord>>>,
}

impl SnakeGeometry {
    pub fn new(params: StripParams, n_max: usize) -> Result<Self> {
        if n_max > HARD_N_MAX {
            return Err(Error::TableExhausted { index: n_max, cap: HARD_N_MAX });
        }
        // One extra term for the top of bend n_max and one for the strip after it.
        let sequences = SnakeSequences::new(params.y0(), n_max + 2);
        Ok(SnakeGeometry { params, n_max, sequences, table: RwLock::new(Arc::new(Vec::new())) })
    }

    pub fn params(&self) -> StripParams {
        self.params
    }

    pub fn y0(&self) -> f64 {
        self.params.y0()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn sequences_get(&self, n: usize) -> Result<(f64, f64)> {
        if n == 0 || n > self.n_max {
            return Err(Error::TableExhausted { index: n, cap: self.n_max });
        }
        Ok(self.sequences.get(n).expect("sequences cached past n_max"))
    }

    pub fn sequences(&self) -> &SnakeSequences {
        &self.sequences
    }

    /// Top of bend `n_max` in straightened height.
    pub fn top(&self) -> f64 {
        self.sequences.get(self.n_max + 1).map(|(s, _)| s).unwrap_or(self.y0())
    }

    pub fn built_bends(&self) -> usize {
        self.snapshot().len() / 4
    }

    pub fn snapshot(&self) -> Arc<Vec<SegmentRecord>> {
        self.table.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Table with at least `bends` bends built.
    pub fn ensure_bends(&self, bends: usize) -> Result<Arc<Vec<SegmentRecord>>> {
        if bends > self.n_max {
            return Err(Error::TableExhausted { index: bends, cap: self.n_max });
        }
        let current = self.snapshot();
        if current.len() >= 4 * bends {
            return Ok(current);
        }
        let mut guard = self.table.write().unwrap_or_else(|e| e.into_inner());
        if guard.len() < 4 * bends {
            let table = Arc::make_mut(&mut guard);
            while table.len() < 4 * bends {
                let n = table.len() / 4 + 1;
                let (s, t) = self.sequences.get(n).expect("sequence cached");
                let (s_next, _) = self.sequences.get(n + 1).expect("sequence cached");
                table.extend(build_bend(n, s, t, s_next, table.last()));
            }
        }
        Ok(guard.clone())
    }

    pub fn full_table(&self) -> Arc<Vec<SegmentRecord>> {
        self.ensure_bends(self.n_max).expect("n_max within cap")
    }

    /// Bend containing straightened height `y`, growing the table as needed.
    fn table_for_height(&self, y: f64) -> Result<Arc<Vec<SegmentRecord>>> {
        if !(y >= self.y0()) {
            return Err(Error::BelowBase(y));
        }
        let bend = (1..=self.n_max).find(|&n| self.sequences.get(n + 1).is_some_and(|(s, _)| y <= s));
        match bend {
            Some(n) => self.ensure_bends(n),
            None => Err(Error::TableExhausted { index: self.n_max + 1, cap: self.n_max }),
        }
    }

    fn index_of_height(table: &[SegmentRecord], y: f64) -> usize {
        // Shared boundary heights belong to the lower segment.
        table.partition_point(|r| r.y_hi < y)
    }

    pub fn segment_of_height(&self, y: f64) -> Result<SegmentRef> {
        let table = self.table_for_height(y)?;
        Ok(table[Self::index_of_height(&table, y)].seg)
    }

    pub fn record(&self, seg: SegmentRef) -> Result<SegmentRecord> {
        let table = self.ensure_bends(seg.n)?;
        Ok(table[seg.table_index()].clone())
    }

    pub fn phi_apply(&self, p: Point) -> Result<Point> {
        use crate::maps::{in_strip, Membership};
        if in_strip(p, self.params) == Membership::Outside {
            return Err(Error::OutsideStrip(p));
        }
        let table = self.table_for_height(p.y)?;
        Ok(table[Self::index_of_height(&table, p.y)].apply(p))
    }

    /// Straightened preimage of `q` and the segment it came from.
    pub fn phi_inverse(&self, q: Point) -> Result<(Point, SegmentRef)> {
        let table = self.full_table();
        locate(&table, q, None).map(|(p, i)| (p, table[i].seg))
    }

    /// Gluing mismatch over every shared edge within the first `n_max` bends.
    pub fn verify_gluing(&self, n_max: usize, samples_per_edge: usize) -> Result<f64> {
        if n_max == 0 {
            return Ok(0.0);
        }
        let table = self.ensure_bends(n_max)?;
        let samples = samples_per_edge.max(1);
        let mut worst: f64 = 0.0;
        for pair in table[..4 * n_max].windows(2) {
            let (lower, upper) = (&pair[0], &pair[1]);
            debug_assert_eq!(lower.y_hi, upper.y_lo);
            let y = lower.y_hi;
            let half = 1.0 / y;
            for i in 0..samples {
                let x = if samples == 1 { 0.0 } else { -half + 2.0 * half * (i as f64 / (samples - 1) as f64) };
                let p = Point::new(x, y);
                worst = worst.max(lower.apply(p).dist(upper.apply(p)));
            }
        }
        Ok(worst)
    }

    pub fn verify_disjoint(&self, n_max: usize) -> Result<DisjointReport> {
        let table = self.ensure_bends(n_max)?;
        let mut entries = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let (s, t) = self.sequences.get(n).expect("sequence cached");
            let base = 4 * (n - 1);
            let strip1 = &table[base];
            let strip3 = &table[base + 2];
            let next_strip;
            let strip1_next = match table.get(base + 4) {
                Some(r) => r,
                None => {
                    let (s_next, t_next) = self.sequences.get(n + 1).expect("sequence cached");
                    next_strip = first_strip(n + 1, s_next, t_next, Some(&table[base + 3]));
                    &next_strip
                }
            };
            let (geometric, samples_per_side) = stable_disjointness(&[strip1, strip3, strip1_next]);
            entries.push(DisjointEntry { n, analytic: analytic_separation(s, t), geometric, samples_per_side });
        }
        Ok(DisjointReport { entries })
    }

    /// Largest `|Re|` over the images of the first `n_max` bends (and the
    /// base half-width `1/y0`).
    pub fn real_part_bound(&self, n_max: usize) -> Result<f64> {
        let table = self.ensure_bends(n_max)?;
        Ok(table[..4 * n_max].iter().map(|r| r.image_bbox.max_abs_x()).fold(1.0 / self.y0(), f64::max))
    }
}

/// Point location: the first segment (optionally trying `hint` first) whose
/// pull-back accepts `q`. Returns the snapped preimage and the table index.
#[inline]
pub(crate) fn locate(table: &[SegmentRecord], q: Point, hint: Option<usize>) -> Result<(Point, usize)> {
    if let Some(h) = hint {
        for i in [h, h + 1, h.wrapping_sub(1)] {
            if let Some(rec) = table.get(i) {
                if let Some(p) = rec.pull_back(q, location_tolerance(q, rec.y_hi)) {
                    return Ok((p, i));
                }
            }
        }
    }
    for (i, rec) in table.iter().enumerate() {
        if let Some(p) = rec.pull_back(q, location_tolerance(q, rec.y_hi)) {
            return Ok((p, i));
        }
    }
    Err(Error::NotInSnake(q))
}

fn pairwise_disjoint(polys: &[Vec<Point>]) -> bool {
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            if polygons_intersect(&polys[i], &polys[j]) {
                return false;
            }
        }
    }
    true
}

/// Disjointness of the segment images, refining the boundary sampling
/// until two consecutive densities agree.
fn stable_disjointness(records: &[&SegmentRecord]) -> (bool, usize) {
    let verdict = |samples: usize| {
        let polys: Vec<Vec<Point>> = records.iter().map(|r| r.image_outline(samples)).collect();
        pairwise_disjoint(&polys)
    };
    let mut samples = DISJOINT_START_SAMPLES;
    let mut previous = verdict(samples);
    while samples < DISJOINT_MAX_SAMPLES {
        let refined = verdict(2 * samples);
        if refined == previous {
            break;
        }
        samples *= 2;
        previous = refined;
    }
    (previous, samples)
}
