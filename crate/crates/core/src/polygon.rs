//! Simple-polygon intersection tests used by the disjointness verifier.

use crate::point::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn empty() -> Self {
        BBox { x_min: f64::INFINITY, x_max: f64::NEG_INFINITY, y_min: f64::INFINITY, y_max: f64::NEG_INFINITY }
    }

    pub fn of_points<I: IntoIterator<Item = Point>>(points: I) -> Self {
        points.into_iter().fold(BBox::empty(), |b, p| b.include(p))
    }

    pub fn include(self, p: Point) -> Self {
        BBox {
            x_min: self.x_min.min(p.x),
            x_max: self.x_max.max(p.x),
            y_min: self.y_min.min(p.y),
            y_max: self.y_max.max(p.y),
        }
    }

    pub fn grow(self, dx: f64, dy: f64) -> Self {
        BBox { x_min: self.x_min - dx, x_max: self.x_max + dx, y_min: self.y_min - dy, y_max: self.y_max + dy }
    }

    pub fn contains(&self, p: Point, pad: f64) -> bool {
        p.x >= self.x_min - pad && p.x <= self.x_max + pad && p.y >= self.y_min - pad && p.y <= self.y_max + pad
    }

    pub fn overlaps(&self, other: &BBox) -> bool {
        self.x_min <= other.x_max && other.x_min <= self.x_max && self.y_min <= other.y_max && other.y_min <= self.y_max
    }

    pub fn max_abs_x(&self) -> f64 {
        self.x_min.abs().max(self.x_max.abs())
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection, touching counts.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Even-odd rule point containment.
pub fn contains_point(poly: &[Point], p: Point) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// True when the two closed polygons share at least one point.
pub fn polygons_intersect(p: &[Point], q: &[Point]) -> bool {
    if p.len() < 3 || q.len() < 3 {
        return false;
    }
    let (bp, bq) = (BBox::of_points(p.iter().copied()), BBox::of_points(q.iter().copied()));
    if !bp.overlaps(&bq) {
        return false;
    }
    let edges = |poly: &[Point]| {
        let n = poly.len();
        (0..n).map(move |i| (poly[i], poly[(i + 1) % n])).collect::<Vec<_>>()
    };
    let (ep, eq) = (edges(p), edges(q));
    for &(a, b) in &ep {
        let eb = BBox::of_points([a, b]);
        if !eb.overlaps(&bq) {
            continue;
        }
        for &(c, d) in &eq {
            if eb.overlaps(&BBox::of_points([c, d])) && segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    contains_point(p, q[0]) || contains_point(q, p[0])
}
