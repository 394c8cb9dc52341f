//! Upper half-plane model of the hyperbolic plane.
//!
//! Heights are stored as `ln y`. Random walks drift at linear speed, so after a
//! few thousand steps the height of `Z_n x` is far outside the range of an
//! `f64` (`y ~ e^{-d}`); the horizontal coordinate converges to the limit
//! point and stays representable. All kernels below work in log space and only
//! exponentiate differences that are known to be bounded.

use std::f64::consts::LN_2;

/// `ln(e^a + e^b)` without overflow; either argument may be `-inf`.
pub(crate) fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln |e^a - e^b|`, `-inf` when equal.
fn logsubexp_abs(a: f64, b: f64) -> f64 {
    if a == b {
        return f64::NEG_INFINITY;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (-(lo - hi).exp_m1()).ln()
}

/// `2 asinh(e^s)`, switching to the asymptotic form once `e^s` is huge.
fn two_asinh_exp(s: f64) -> f64 {
    if s == f64::NEG_INFINITY {
        0.0
    } else if s > 30.0 {
        2.0 * (s + LN_2)
    } else {
        2.0 * s.exp().asinh()
    }
}

/// Point of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H2Point {
    pub x: f64,
    pub ln_y: f64,
}

impl H2Point {
    /// Returns `None` unless `y > 0` and both coordinates are finite.
    pub fn new(x: f64, y: f64) -> Option<Self> {
        if x.is_finite() && y.is_finite() && y > 0.0 {
            Some(Self { x, ln_y: y.ln() })
        } else {
            None
        }
    }

    pub fn from_log(x: f64, ln_y: f64) -> Self {
        Self { x, ln_y }
    }

    /// The point `i`.
    pub fn origin() -> Self {
        Self { x: 0.0, ln_y: 0.0 }
    }

    pub fn y(&self) -> f64 {
        self.ln_y.exp()
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.ln_y.is_finite()
    }
}

/// A point of `∂H² = ℝ ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ideal {
    Finite(f64),
    Infinity,
}

impl Ideal {
    pub fn approx_eq(&self, other: &Ideal, tol: f64) -> bool {
        match (self, other) {
            (Ideal::Infinity, Ideal::Infinity) => true,
            (Ideal::Finite(a), Ideal::Finite(b)) => (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs())),
            _ => false,
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            Ideal::Finite(v) => v.is_finite(),
            Ideal::Infinity => true,
        }
    }

    /// Maps `ξ` to the unit circle by the Cayley transform `(ξ - i)/(ξ + i)` and
    /// returns the argument in `[0, 2π)`; `∞ ↦ 0`. This is the visual angle of
    /// `ξ` seen from `i`.
    pub fn cayley_angle(&self) -> f64 {
        match *self {
            Ideal::Infinity => 0.0,
            Ideal::Finite(v) => {
                // (v - i)/(v + i) = (v² - 1 - 2iv)/(v² + 1)
                let ang = (-2.0 * v).atan2(v * v - 1.0);
                super::wrap_angle(ang)
            }
        }
    }

    /// Inverse of [`Ideal::cayley_angle`].
    pub fn from_cayley_angle(phi: f64) -> Ideal {
        let half = 0.5 * super::wrap_angle(phi);
        let s = half.sin();
        if s.abs() < 1e-300 {
            Ideal::Infinity
        } else {
            Ideal::Finite(-half.cos() / s)
        }
    }
}

pub fn distance(p: &H2Point, q: &H2Point) -> f64 {
    let dx = p.x - q.x;
    if dx == 0.0 {
        return (p.ln_y - q.ln_y).abs();
    }
    let ln_dx = dx.abs().ln();
    let ln_dy = logsubexp_abs(p.ln_y, q.ln_y);
    let ln_chord = 0.5 * logaddexp(2.0 * ln_dx, 2.0 * ln_dy);
    // d = 2 asinh(|p - q| / (2 sqrt(y_p y_q)))
    two_asinh_exp(ln_chord - 0.5 * (p.ln_y + q.ln_y) - LN_2)
}

/// Point at distance `t` from `p` on the ray towards `xi`.
pub fn ray_point(p: &H2Point, xi: &Ideal, t: f64) -> H2Point {
    if t == 0.0 {
        return *p;
    }
    match *xi {
        Ideal::Infinity => H2Point::from_log(p.x, p.ln_y + t),
        Ideal::Finite(xi) => {
            // Conjugate by z ↦ -1/(z - ξ), which sends ξ to ∞, flow vertically
            // and map back; the composite is written out in closed form.
            let a = p.x - xi;
            let ln_a2 = if a == 0.0 { f64::NEG_INFINITY } else { 2.0 * a.abs().ln() };
            let ln_d = logaddexp(ln_a2, 2.0 * p.ln_y);
            let ln_e = logaddexp(ln_a2, 2.0 * p.ln_y + 2.0 * t);
            let ratio = (ln_d - ln_e).exp();
            H2Point::from_log(xi + a * ratio, p.ln_y + t + ln_d - ln_e)
        }
    }
}

/// Endpoint of the geodesic ray from `p` through `q` (`p != q`).
pub fn direction(p: &H2Point, q: &H2Point) -> Ideal {
    let dx = q.x - p.x;
    if dx == 0.0 {
        return if q.ln_y > p.ln_y { Ideal::Infinity } else { Ideal::Finite(p.x) };
    }
    // Normalise so that p = i: q' = (a, b).
    let scale = (-p.ln_y).exp();
    let a = dx * scale;
    let b2 = (2.0 * (q.ln_y - p.ln_y)).exp();
    if !a.is_finite() {
        // q is horizontally far from p at the scale of p: the endpoint is
        // within a vanishing distance of q.x.
        return Ideal::Finite(q.x);
    }
    let c = (a * a + b2 - 1.0) / (2.0 * a);
    if !c.is_finite() {
        return if c.signum() == a.signum() { Ideal::Infinity } else { Ideal::Finite(p.x) };
    }
    let r = c.hypot(1.0);
    let s = a.signum();
    let end = if c.signum() == s || c == 0.0 { c + s * r } else { s / (r + c.abs()) };
    let xi = p.x + p.ln_y.exp() * end;
    if xi.is_finite() {
        Ideal::Finite(xi)
    } else {
        Ideal::Infinity
    }
}

/// Busemann function normalised at `x`: `lim d(ξ_t, z) - d(ξ_t, x)`.
pub fn horofunction(xi: &Ideal, x: &H2Point, z: &H2Point) -> f64 {
    match *xi {
        Ideal::Infinity => x.ln_y - z.ln_y,
        Ideal::Finite(xi) => {
            let potential = |p: &H2Point| {
                let a = p.x - xi;
                let ln_a2 = if a == 0.0 { f64::NEG_INFINITY } else { 2.0 * a.abs().ln() };
                logaddexp(ln_a2, 2.0 * p.ln_y) - p.ln_y
            };
            potential(z) - potential(x)
        }
    }
}

/// Arclength parameterisation of the bi-infinite geodesic from `from` to `to`,
/// with `s = 0` at the point closest to `i` (vertical lines: at height 1, or
/// at the apex for semicircles).
#[derive(Debug, Clone, Copy)]
pub struct H2Line {
    kind: LineKind,
}

#[derive(Debug, Clone, Copy)]
enum LineKind {
    /// Vertical line at `x`, oriented upwards if `up`.
    Vertical { x: f64, up: bool },
    /// Semicircle centred at `c` with radius `r`, oriented from `c - sign·r` to `c + sign·r`.
    Circle { c: f64, r: f64, sign: f64 },
}

impl H2Line {
    pub fn new(from: &Ideal, to: &Ideal) -> Option<Self> {
        let kind = match (*from, *to) {
            (Ideal::Infinity, Ideal::Infinity) => return None,
            (Ideal::Finite(a), Ideal::Infinity) => LineKind::Vertical { x: a, up: true },
            (Ideal::Infinity, Ideal::Finite(b)) => LineKind::Vertical { x: b, up: false },
            (Ideal::Finite(a), Ideal::Finite(b)) => {
                if a == b {
                    return None;
                }
                LineKind::Circle { c: 0.5 * (a + b), r: 0.5 * (b - a).abs(), sign: (b - a).signum() }
            }
        };
        Some(Self { kind })
    }

    pub fn point(&self, s: f64) -> H2Point {
        match self.kind {
            LineKind::Vertical { x, up } => H2Point::from_log(x, if up { s } else { -s }),
            LineKind::Circle { c, r, sign } => {
                // c + r tanh(s) + i r sech(s) is unit speed.
                let ln_sech = -(s.abs() + (-2.0 * s.abs()).exp().ln_1p() - LN_2);
                H2Point::from_log(c + sign * r * s.tanh(), r.ln() + ln_sech)
            }
        }
    }

    /// Arclength parameter of the closest point to `p`.
    pub fn project(&self, p: &H2Point) -> f64 {
        match self.kind {
            LineKind::Vertical { x, up } => {
                // Closest point on a vertical line is at Euclidean height |p - x|.
                let ln_h = 0.5 * logaddexp(2.0 * (p.x - x).abs().ln(), 2.0 * p.ln_y);
                if up {
                    ln_h
                } else {
                    -ln_h
                }
            }
            LineKind::Circle { c, r, sign } => {
                // z ↦ ±(z - a)/(z - b) sends the line onto the imaginary axis
                // (a ↦ 0, b ↦ ∞, apex ↦ i); the parameter is ln|image|.
                let a = c - sign * r;
                let b = c + sign * r;
                let ln_dist = |e: f64| {
                    let dx = p.x - e;
                    let ln_dx2 = if dx == 0.0 { f64::NEG_INFINITY } else { 2.0 * dx.abs().ln() };
                    0.5 * logaddexp(ln_dx2, 2.0 * p.ln_y)
                };
                ln_dist(a) - ln_dist(b)
            }
        }
    }
}
