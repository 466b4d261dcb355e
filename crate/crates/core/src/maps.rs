//! Elementary maps: the corridor map on the tapering strip, the two bend
//! maps of the unit rectangle onto half-annuli, the lower-half-plane
//! perturbation, and a finite-difference dilatation probe.
//!
//! The strip is `T0 = { x + iy : y > y0, |x| < 1/y }`. All membership tests
//! compare exactly; callers that want slack snap their points first.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::point::Point;

pub const DEFAULT_Y0: f64 = 101.0;
pub const DEFAULT_DELTA: f64 = 0.01;

/// `exp(w)` is treated as infinite once `Re w` exceeds this.
pub const EXP_OVERFLOW_EXPONENT: f64 = 700.0;

/// Lower height `y0` of the strip. Always strictly above 100.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripParams {
    y0: f64,
}

impl StripParams {
    pub fn new(y0: f64) -> Result<Self> {
        if !(y0.is_finite() && y0 > 100.0) {
            return Err(Error::InvalidParameter(format!("strip base y0 must be finite and > 100, got {y0}")));
        }
        Ok(StripParams { y0 })
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }
}

impl Default for StripParams {
    fn default() -> Self {
        StripParams { y0: DEFAULT_Y0 }
    }
}

/// Amplitude `delta` of the perturbation below the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbParams {
    delta: f64,
}

impl PerturbParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter(format!("perturbation amplitude must be finite and > 0, got {delta}")));
        }
        Ok(PerturbParams { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Default for PerturbParams {
    fn default() -> Self {
        PerturbParams { delta: DEFAULT_DELTA }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

pub fn in_strip(p: Point, sp: StripParams) -> Membership {
    let y0 = sp.y0;
    if !p.is_finite() || p.y < y0 {
        return Membership::Outside;
    }
    let half_width = 1.0 / p.y;
    let ax = p.x.abs();
    if p.y > y0 && ax < half_width {
        Membership::Interior
    } else if ax == half_width || (p.y == y0 && ax <= half_width) {
        Membership::Boundary
    } else {
        Membership::Outside
    }
}

/// The corridor map on the closed strip.
pub fn psi_apply(p: Point, sp: StripParams) -> Result<Point> {
    if in_strip(p, sp) == Membership::Outside {
        return Err(Error::OutsideStrip(p));
    }
    Ok(psi_raw(p))
}

/// The corridor formula without the domain check. Defined wherever
/// `y + 1/y - |x| > 0`; the dilatation probe evaluates it slightly off the
/// strip.
#[inline]
pub fn psi_raw(p: Point) -> Point {
    // Grouped so that a side point (|x| == 1/y bitwise) maps to itself.
    let h = p.y + (1.0 / p.y - p.x.abs());
    Point::new(p.x * (p.y / h), h)
}

pub fn psi_inverse(q: Point, sp: StripParams) -> Result<Point> {
    if in_strip(q, sp) == Membership::Outside {
        return Err(Error::OutsideStrip(q));
    }
    let u = q.x * q.y;
    let disc = q.y * q.y - 4.0 * (1.0 - u.abs());
    if disc < 0.0 {
        return Err(Error::NotInImage(q));
    }
    let y = 0.5 * (q.y + disc.sqrt());
    if y < sp.y0 {
        return Err(Error::NotInImage(q));
    }
    Ok(Point::new(u / y, y))
}

/// Which of the two half-annulus bends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bend {
    /// Clockwise about `3/2`, onto `{Im >= 0, 1/2 <= |z - 3/2| <= 3/2}`.
    Right,
    /// Counter-clockwise about `-1/2`, onto `{Im >= 0, 1/2 <= |z + 1/2| <= 3/2}`.
    Left,
}

impl Bend {
    fn center(self) -> f64 {
        match self {
            Bend::Right => 1.5,
            Bend::Left => -0.5,
        }
    }

    pub fn apply(self, p: Point) -> Result<Point> {
        check_rectangle(p)?;
        Ok(self.apply_raw(p))
    }

    pub fn inverse(self, q: Point) -> Result<Point> {
        let rho = (q.x - self.center()).hypot(q.y);
        let slack = 1e-12;
        if q.y < -slack || rho < 0.5 - slack || rho > 1.5 + slack {
            return Err(Error::OutsideAnnulus(q));
        }
        Ok(self.inverse_raw(q))
    }

    /// Applies the bend formula to any point, inside the rectangle or not.
    #[inline]
    pub(crate) fn apply_raw(self, p: Point) -> Point {
        if p.y == 0.0 {
            return p;
        }
        let c = self.center();
        let turn = match self {
            Bend::Right => Complex64::from_polar(1.0, -0.5 * PI * p.y),
            Bend::Left => Complex64::from_polar(1.0, 0.5 * PI * p.y),
        };
        let w = c + (p.x - c) * turn;
        Point::from(w)
    }

    #[inline]
    pub(crate) fn inverse_raw(self, q: Point) -> Point {
        let c = self.center();
        let dx = q.x - c;
        let rho = dx.hypot(q.y);
        match self {
            Bend::Right => {
                // q - c = -(c - x) e^{-i pi y / 2}
                let angle = unwrap_half_plane(q.y.atan2(-dx));
                Point::new(c - rho, angle * 2.0 / PI)
            }
            Bend::Left => {
                let angle = unwrap_half_plane(q.y.atan2(dx));
                Point::new(rho + c, angle * 2.0 / PI)
            }
        }
    }
}

/// Angles of points a rounding error below the negative real axis come
/// back from `atan2` near `-pi`; fold them onto `+pi`.
fn unwrap_half_plane(angle: f64) -> f64 {
    if angle < -0.5 * PI {
        angle + 2.0 * PI
    } else {
        angle
    }
}

fn check_rectangle(p: Point) -> Result<()> {
    if (0.0..=1.0).contains(&p.x) && (0.0..=2.0).contains(&p.y) {
        Ok(())
    } else {
        Err(Error::OutsideRectangle(p))
    }
}

pub fn nu_r_apply(p: Point) -> Result<Point> {
    Bend::Right.apply(p)
}

pub fn nu_l_apply(p: Point) -> Result<Point> {
    Bend::Left.apply(p)
}

pub fn nu_r_inverse(q: Point) -> Result<Point> {
    Bend::Right.inverse(q)
}

pub fn nu_l_inverse(q: Point) -> Result<Point> {
    Bend::Left.inverse(q)
}

/// Marker for an image that overflowed to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Escaped;

/// The perturbation: identity on the closed upper half-plane,
/// `z - delta (Im z) exp(-z^2)` on `-1 <= Im z < 0` and
/// `z + delta exp(-z^2)` below.
pub fn g_apply(z: Point, pp: PerturbParams) -> Result<Point, Escaped> {
    if z.y >= 0.0 {
        return Ok(z);
    }
    let w = z.to_complex();
    let exponent = -(w * w);
    if exponent.re > EXP_OVERFLOW_EXPONENT || !exponent.re.is_finite() {
        return Err(Escaped);
    }
    let bump = exponent.exp() * pp.delta;
    let out = if z.y >= -1.0 { w - bump * z.y } else { w + bump };
    Point::try_new(out.re, out.im).ok_or(Escaped)
}

/// Local distortion estimate at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dilatation {
    /// Ratio of singular values, `+inf` when the Jacobian is degenerate.
    pub k: f64,
    /// Smallest Jacobian determinant among the stencils used.
    pub min_det: f64,
}

impl Dilatation {
    pub fn is_sense_preserving(&self) -> bool {
        self.min_det > 0.0
    }
}

pub fn default_step(p: Point) -> f64 {
    1e-4 * p.modulus().max(1.0)
}

/// Finite-difference dilatation of `map` at `p`.
///
/// Besides the central-difference Jacobian, the four one-sided quadrant
/// Jacobians (forward/backward in each axis) are formed and the largest
/// `K` is reported. On a kink such as `x = 0` for the corridor map the
/// central quotient averages the two one-sided derivatives and would
/// report a spuriously conformal Jacobian.
pub fn local_dilatation<F>(map: F, p: Point, step: f64) -> Result<Dilatation>
where
    F: Fn(Point) -> Option<Point>,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("finite-difference step must be > 0, got {step}")));
    }
    let eval = |q: Point| map(q).filter(|v| v.is_finite()).ok_or(Error::Unevaluable(q));
    let f0 = eval(p)?;
    let fxp = eval(Point::new(p.x + step, p.y))?;
    let fxm = eval(Point::new(p.x - step, p.y))?;
    let fyp = eval(Point::new(p.x, p.y + step))?;
    let fym = eval(Point::new(p.x, p.y - step))?;

    let dx = [(fxp - f0) * (1.0 / step), (f0 - fxm) * (1.0 / step)];
    let dy = [(fyp - f0) * (1.0 / step), (f0 - fym) * (1.0 / step)];
    let central = ((fxp - fxm) * (0.5 / step), (fyp - fym) * (0.5 / step));

    let mut k = jacobian_k(central.0, central.1);
    let mut min_det = central.0.x * central.1.y - central.1.x * central.0.y;
    for cx in dx {
        for cy in dy {
            k = k.max(jacobian_k(cx, cy));
            min_det = min_det.min(cx.x * cy.y - cy.x * cx.y);
        }
    }
    Ok(Dilatation { k, min_det })
}

/// `sigma_1 / sigma_2` for the Jacobian with columns `col_x`, `col_y`.
///
/// Splits the Jacobian into conformal and anticonformal parts with norms
/// `e` and `a`; then `sigma_1 = e + a`, `sigma_2 = |e - a|`. Unlike the
/// trace/determinant formula this has no cancellation near `K = 1`.
pub fn jacobian_k(col_x: Point, col_y: Point) -> f64 {
    let (ux, vx, uy, vy) = (col_x.x, col_x.y, col_y.x, col_y.y);
    let e = 0.5 * (ux + vy).hypot(vx - uy);
    let a = 0.5 * (ux - vy).hypot(vx + uy);
    let (s1, s2) = (e + a, (e - a).abs());
    if !(s2 > 1e-14 * s1) {
        return f64::INFINITY;
    }
    (s1 / s2).max(1.0)
}
