//! Isometries of the model spaces: the group law, the boundary action,
//! classification, axes, the rank-one predicate, and the empirical checks
//! (contraction width, independence, North–South dynamics) that back it.

pub mod mobius;

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundary::boundary_metric;
use crate::error::{domain, same_model, usage, LabError, Result};
use crate::geometry::hyperbolic::{self, H2Line, H2Point};
use crate::geometry::{
    distance, wrap_angle, BoundaryPoint, E2Point, EndWord, ModelSpace, Point, ProductIdeal, ProductPoint, Tolerance,
    Word,
};
use crate::sampling;

pub use mobius::Mobius;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IsometryRepr", into = "IsometryRepr")]
pub enum Isometry {
    /// `p ↦ R_angle p + translation`.
    E2 {
        angle: f64,
        translation: E2Point,
    },
    H2(Mobius),
    /// Left multiplication by a reduced word.
    T4(Word),
    /// `(z, h) ↦ (A z, h + shift)`.
    H2xR {
        h2: Mobius,
        shift: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IsometryKind {
    Identity,
    Elliptic,
    Parabolic,
    Axial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryClass {
    pub kind: IsometryKind,
    pub translation_length: f64,
}

impl IsometryClass {
    fn of(kind: IsometryKind) -> Self {
        Self { kind, translation_length: 0.0 }
    }

    fn axial(tau: f64) -> Self {
        Self { kind: IsometryKind::Axial, translation_length: tau }
    }
}

impl Isometry {
    pub fn identity(model: ModelSpace) -> Isometry {
        match model {
            ModelSpace::E2 => Isometry::E2 { angle: 0.0, translation: E2Point::ORIGIN },
            ModelSpace::H2 => Isometry::H2(Mobius::IDENTITY),
            ModelSpace::T4 => Isometry::T4(Word::identity()),
            ModelSpace::H2xR => Isometry::H2xR { h2: Mobius::IDENTITY, shift: 0.0 },
        }
    }

    pub fn translation(x: f64, y: f64) -> Isometry {
        Isometry::E2 { angle: 0.0, translation: E2Point::new(x, y) }
    }

    pub fn rotation(angle: f64) -> Isometry {
        Isometry::E2 { angle: wrap_angle(angle), translation: E2Point::ORIGIN }
    }

    pub fn mobius(m: [f64; 4]) -> Result<Isometry> {
        Mobius::from_matrix(m, Tolerance::default().0)
            .map(Isometry::H2)
            .ok_or_else(|| usage(format!("H2 matrix {m:?} is not in SL(2,R)")))
    }

    pub fn word(w: &str) -> Result<Isometry> {
        Word::parse(w).map(Isometry::T4)
    }

    pub fn product(m: [f64; 4], shift: f64) -> Result<Isometry> {
        let h2 = Mobius::from_matrix(m, Tolerance::default().0)
            .ok_or_else(|| usage(format!("H2 matrix {m:?} is not in SL(2,R)")))?;
        if !shift.is_finite() {
            return Err(usage("non-finite vertical shift"));
        }
        Ok(Isometry::H2xR { h2, shift })
    }

    pub fn model(&self) -> ModelSpace {
        match self {
            Isometry::E2 { .. } => ModelSpace::E2,
            Isometry::H2(_) => ModelSpace::H2,
            Isometry::T4(_) => ModelSpace::T4,
            Isometry::H2xR { .. } => ModelSpace::H2xR,
        }
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        Ok(match (self, p) {
            (Isometry::E2 { angle, translation }, Point::E2(q)) => {
                let (s, c) = angle.sin_cos();
                Point::E2(E2Point::new(c * q.x - s * q.y + translation.x, s * q.x + c * q.y + translation.y))
            }
            (Isometry::H2(m), Point::H2(q)) => Point::H2(m.apply(q)),
            (Isometry::T4(w), Point::T4(v)) => Point::T4(w.mul(v)),
            (Isometry::H2xR { h2, shift }, Point::H2xR(q)) => {
                Point::H2xR(ProductPoint::new(h2.apply(&q.base), q.height + shift))
            }
            _ => return Err(LabError::ModelMismatch { expected: self.model(), found: p.model() }),
        })
    }

    pub fn apply_boundary(&self, xi: &BoundaryPoint) -> Result<BoundaryPoint> {
        Ok(match (self, xi) {
            (Isometry::E2 { angle, .. }, BoundaryPoint::E2(t)) => BoundaryPoint::e2(t + angle),
            (Isometry::H2(m), BoundaryPoint::H2(i)) => BoundaryPoint::H2(m.apply_ideal(i)),
            (Isometry::T4(w), BoundaryPoint::T4(e)) => BoundaryPoint::T4(e.left_mul(w)),
            (Isometry::H2xR { h2, .. }, BoundaryPoint::H2xR(p)) => {
                BoundaryPoint::H2xR(ProductIdeal { xi: p.xi.map(|i| h2.apply_ideal(&i)), slope: p.slope })
            }
            _ => return Err(LabError::ModelMismatch { expected: self.model(), found: xi.model() }),
        })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Result<Isometry> {
        Ok(match (self, other) {
            (Isometry::E2 { angle: a1, translation: v1 }, Isometry::E2 { angle: a2, translation: v2 }) => {
                let (s, c) = a1.sin_cos();
                Isometry::E2 {
                    angle: wrap_angle(a1 + a2),
                    translation: E2Point::new(c * v2.x - s * v2.y + v1.x, s * v2.x + c * v2.y + v1.y),
                }
            }
            (Isometry::H2(m1), Isometry::H2(m2)) => Isometry::H2(m1.compose(m2)),
            (Isometry::T4(w1), Isometry::T4(w2)) => Isometry::T4(w1.mul(w2)),
            (Isometry::H2xR { h2: m1, shift: t1 }, Isometry::H2xR { h2: m2, shift: t2 }) => {
                Isometry::H2xR { h2: m1.compose(m2), shift: t1 + t2 }
            }
            _ => return Err(LabError::ModelMismatch { expected: self.model(), found: other.model() }),
        })
    }

    /// `self ← self ∘ other`; in the tree this pushes letters in place.
    pub fn right_multiply(&mut self, other: &Isometry) -> Result<()> {
        if let (Isometry::T4(w), Isometry::T4(v)) = (&mut *self, other) {
            for &l in v.letters() {
                w.push(l);
            }
            return Ok(());
        }
        *self = self.compose(other)?;
        Ok(())
    }

    pub fn inverse(&self) -> Isometry {
        match self {
            Isometry::E2 { angle, translation } => {
                let (s, c) = (-angle).sin_cos();
                Isometry::E2 {
                    angle: wrap_angle(-angle),
                    translation: E2Point::new(
                        -(c * translation.x - s * translation.y),
                        -(s * translation.x + c * translation.y),
                    ),
                }
            }
            Isometry::H2(m) => Isometry::H2(m.inverse()),
            Isometry::T4(w) => Isometry::T4(w.inverse()),
            Isometry::H2xR { h2, shift } => Isometry::H2xR { h2: h2.inverse(), shift: -shift },
        }
    }

    /// `g^k` for any integer `k`.
    pub fn power(&self, k: i64) -> Isometry {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Isometry::identity(self.model());
        for _ in 0..k.unsigned_abs() {
            out = out.compose(&base).expect("same model");
        }
        out
    }

    pub fn approx_eq(&self, other: &Isometry, tol: Tolerance) -> bool {
        let tol = tol.0;
        match (self, other) {
            (Isometry::E2 { angle: a1, translation: v1 }, Isometry::E2 { angle: a2, translation: v2 }) => {
                let d = (a1 - a2).abs();
                d.min(TAU - d) <= tol && (v1.x - v2.x).abs() <= tol && (v1.y - v2.y).abs() <= tol
            }
            (Isometry::H2(m1), Isometry::H2(m2)) => m1.approx_eq(m2, tol),
            (Isometry::T4(w1), Isometry::T4(w2)) => w1 == w2,
            (Isometry::H2xR { h2: m1, shift: t1 }, Isometry::H2xR { h2: m2, shift: t2 }) => {
                m1.approx_eq(m2, tol) && (t1 - t2).abs() <= tol
            }
            _ => false,
        }
    }

    pub fn is_identity(&self, tol: Tolerance) -> bool {
        self.approx_eq(&Isometry::identity(self.model()), tol)
    }

    pub fn classify(&self, tol: Tolerance) -> IsometryClass {
        match self {
            Isometry::E2 { angle, translation } => {
                let a = angle.min(TAU - angle);
                let v = translation.x.hypot(translation.y);
                if a > tol.0 {
                    IsometryClass::of(IsometryKind::Elliptic)
                } else if v <= tol.0 {
                    IsometryClass::of(IsometryKind::Identity)
                } else {
                    IsometryClass::axial(v)
                }
            }
            Isometry::H2(m) => classify_mobius(m, tol),
            Isometry::T4(w) => {
                if w.is_empty() {
                    IsometryClass::of(IsometryKind::Identity)
                } else {
                    IsometryClass::axial(w.cyclic_length() as f64)
                }
            }
            Isometry::H2xR { h2, shift } => {
                let base = classify_mobius(h2, tol);
                let vertical = shift.abs() > tol.0;
                match base.kind {
                    IsometryKind::Axial => IsometryClass::axial(base.translation_length.hypot(*shift)),
                    IsometryKind::Parabolic => IsometryClass::of(IsometryKind::Parabolic),
                    IsometryKind::Identity if !vertical => IsometryClass::of(IsometryKind::Identity),
                    IsometryKind::Elliptic if !vertical => IsometryClass::of(IsometryKind::Elliptic),
                    _ => IsometryClass::axial(shift.abs()),
                }
            }
        }
    }

    /// `(g⁻, g⁺)`: the repelling and attracting endpoints of an axis.
    pub fn axis_endpoints(&self, tol: Tolerance) -> Result<(BoundaryPoint, BoundaryPoint)> {
        let class = self.classify(tol);
        if class.kind != IsometryKind::Axial {
            return Err(domain(format!("isometry is {:?}, not axial", class.kind)));
        }
        Ok(match self {
            Isometry::E2 { translation, .. } => {
                let theta = translation.y.atan2(translation.x);
                (BoundaryPoint::e2(theta + std::f64::consts::PI), BoundaryPoint::e2(theta))
            }
            Isometry::H2(m) => {
                let (rep, att) = m.fixed_points().ok_or_else(|| domain("no fixed points"))?;
                (BoundaryPoint::H2(rep), BoundaryPoint::H2(att))
            }
            Isometry::T4(w) => {
                let (u, c) = w.cyclic_decomposition();
                let plus = EndWord::new(u.clone(), c.clone())?;
                let minus = EndWord::new(u, c.inverse())?;
                (BoundaryPoint::T4(minus), BoundaryPoint::T4(plus))
            }
            Isometry::H2xR { h2, shift } => {
                if classify_mobius(h2, tol).kind == IsometryKind::Axial {
                    let (rep, att) = h2.fixed_points().ok_or_else(|| domain("no fixed points"))?;
                    let alpha = shift.atan2(h2.translation_length());
                    (
                        BoundaryPoint::H2xR(ProductIdeal { xi: Some(rep), slope: -alpha }),
                        BoundaryPoint::H2xR(ProductIdeal { xi: Some(att), slope: alpha }),
                    )
                } else {
                    let up = *shift > 0.0;
                    (BoundaryPoint::H2xR(ProductIdeal::pole(!up)), BoundaryPoint::H2xR(ProductIdeal::pole(up)))
                }
            }
        })
    }

    /// Rank one: axial with no axis bounding a flat half-plane. Decided by the
    /// model: every axis in `H²` and in the tree is rank one; every line in
    /// `E²` or `H² × ℝ` lies in a flat.
    pub fn is_rank_one(&self, tol: Tolerance) -> bool {
        if self.classify(tol).kind != IsometryKind::Axial {
            return false;
        }
        matches!(self.model(), ModelSpace::H2 | ModelSpace::T4)
    }

    /// A chosen axis, parameterised by arclength from `g⁻` to `g⁺`.
    pub fn axis(&self, tol: Tolerance) -> Result<Axis> {
        let (minus, plus) = self.axis_endpoints(tol)?;
        Ok(match (self, &minus, &plus) {
            (Isometry::E2 { translation, .. }, _, _) => {
                let v = translation.x.hypot(translation.y);
                Axis::Line { dir: E2Point::new(translation.x / v, translation.y / v) }
            }
            (Isometry::H2(_), BoundaryPoint::H2(a), BoundaryPoint::H2(b)) => {
                Axis::Hyperbolic(H2Line::new(a, b).ok_or_else(|| domain("degenerate axis"))?)
            }
            (Isometry::T4(w), _, _) => {
                let (u, c) = w.cyclic_decomposition();
                Axis::Tree {
                    base: u,
                    forward: EndWord::new(Word::identity(), c.clone())?,
                    backward: EndWord::new(Word::identity(), c.inverse())?,
                }
            }
            (Isometry::H2xR { h2, .. }, BoundaryPoint::H2xR(a), BoundaryPoint::H2xR(b)) => match (a.xi, b.xi) {
                (Some(ia), Some(ib)) => Axis::Product {
                    line: H2Line::new(&ia, &ib).ok_or_else(|| domain("degenerate axis"))?,
                    slope: b.slope,
                },
                _ => {
                    let base = h2.elliptic_fixed_point().unwrap_or_else(H2Point::origin);
                    Axis::Fiber { base, up: b.slope > 0.0 }
                }
            },
            _ => unreachable!("endpoints match the model"),
        })
    }
}

fn classify_mobius(m: &Mobius, tol: Tolerance) -> IsometryClass {
    if m.is_identity(tol.0) {
        return IsometryClass::of(IsometryKind::Identity);
    }
    let tr = m.abs_trace();
    if tr < 2.0 - tol.0 {
        IsometryClass::of(IsometryKind::Elliptic)
    } else if tr <= 2.0 + tol.0 {
        IsometryClass::of(IsometryKind::Parabolic)
    } else {
        IsometryClass::axial(m.translation_length())
    }
}

/// An axis of an axial isometry with a nearest-point projection, expressed as
/// the arclength coordinate along the axis.
#[derive(Debug, Clone)]
pub enum Axis {
    /// Line through the origin in direction `dir`.
    Line {
        dir: E2Point,
    },
    Hyperbolic(H2Line),
    /// `base · forward` (s ≥ 0) and `base · backward` (s < 0).
    Tree {
        base: Word,
        forward: EndWord,
        backward: EndWord,
    },
    /// `(γ(s cos α), s sin α)` in `H² × ℝ`.
    Product {
        line: H2Line,
        slope: f64,
    },
    /// `{base} × ℝ`.
    Fiber {
        base: H2Point,
        up: bool,
    },
}

impl Axis {
    pub fn point(&self, s: f64) -> Point {
        match self {
            Axis::Line { dir } => Point::E2(E2Point::new(s * dir.x, s * dir.y)),
            Axis::Hyperbolic(line) => Point::H2(line.point(s)),
            Axis::Tree { base, forward, backward } => {
                let k = s.round();
                let tail = if k >= 0.0 { forward.truncate(k as usize) } else { backward.truncate((-k) as usize) };
                Point::T4(base.mul(&tail))
            }
            Axis::Product { line, slope } => {
                let (sn, cs) = slope.sin_cos();
                Point::H2xR(ProductPoint::new(line.point(s * cs), s * sn))
            }
            Axis::Fiber { base, up } => Point::H2xR(ProductPoint::new(*base, if *up { s } else { -s })),
        }
    }

    /// Arclength coordinate of the nearest point on the axis.
    pub fn project(&self, p: &Point) -> Result<f64> {
        Ok(match (self, p) {
            (Axis::Line { dir }, Point::E2(q)) => q.x * dir.x + q.y * dir.y,
            (Axis::Hyperbolic(line), Point::H2(q)) => line.project(q),
            (Axis::Tree { .. }, Point::T4(_)) => {
                let d0 = distance(&self.point(0.0), p)?;
                let f = |s: i64| distance(&self.point(s as f64), p).expect("same model");
                let span = 2 * d0 as i64 + 1;
                let mut best = (0i64, d0);
                for s in -span..=span {
                    let d = f(s);
                    if d < best.1 {
                        best = (s, d);
                    }
                }
                best.0 as f64
            }
            (Axis::Product { line, slope }, Point::H2xR(q)) => {
                let (sn, cs) = slope.sin_cos();
                let u0 = line.project(&q.base);
                let delta = hyperbolic::distance(&line.point(u0), &q.base);
                let f = |s: f64| {
                    let dh = (delta.cosh() * (s * cs - u0).cosh()).acosh();
                    dh * dh + (s * sn - q.height).powi(2)
                };
                let a = u0 / cs;
                let b = if sn.abs() > 1e-15 { q.height / sn } else { a };
                golden_min(f, a.min(b), a.max(b))
            }
            (Axis::Fiber { up, .. }, Point::H2xR(q)) => {
                if *up {
                    q.height
                } else {
                    -q.height
                }
            }
            _ => return Err(usage("point does not live in the axis' model")),
        })
    }

    pub fn distance_to(&self, p: &Point) -> Result<f64> {
        let s = self.project(p)?;
        distance(&self.point(s), p)
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    if b - a < 1e-14 {
        return 0.5 * (a + b);
    }
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Diameter of the projection onto the axis of `g` of `samples` points drawn in
/// `B(ball_center, ball_radius)`: an empirical lower bound for the contraction
/// constant of the axis.
pub fn contraction_width(
    g: &Isometry,
    ball_center: &Point,
    ball_radius: f64,
    samples: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<f64> {
    same_model(g.model(), ball_center.model())?;
    if !(ball_radius > 0.0) {
        return Err(usage("ball radius must be positive"));
    }
    let axis = g.axis(tol)?;
    if axis.distance_to(ball_center)? <= ball_radius {
        return Err(domain("ball meets the axis"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut record = |p: &Point| -> Result<()> {
        let s = axis.project(p)?;
        lo = lo.min(s);
        hi = hi.max(s);
        Ok(())
    };
    record(ball_center)?;
    for _ in 0..samples {
        let p = sampling::point_in_ball(ball_center, ball_radius, &mut rng);
        if distance(ball_center, &p)? > ball_radius + tol.0 {
            continue;
        }
        record(&p)?;
    }
    Ok(hi - lo)
}

/// `min d(g₁^m x, g₂^n x)` over `1 ≤ |m|, |n| ≤ max_power`.
pub fn independence_score(g1: &Isometry, g2: &Isometry, x: &Point, max_power: u32) -> Result<f64> {
    same_model(g1.model(), g2.model())?;
    same_model(g1.model(), x.model())?;
    let o1 = orbit(g1, x, max_power)?;
    let o2 = orbit(g2, x, max_power)?;
    let mut best = f64::INFINITY;
    for (_, p) in &o1 {
        for (_, q) in &o2 {
            best = best.min(distance(p, q)?);
        }
    }
    Ok(best)
}

/// `min d(g₁^m x, g₂^n x)` over the shell `max(|m|, |n|) = power`. Unlike the
/// box minimum this grows with `power` when `(m, n) ↦ d(g₁^m x, g₂^n x)` is
/// proper, and stays bounded for pairs sharing an axis.
pub fn independence_shell_score(g1: &Isometry, g2: &Isometry, x: &Point, power: u32) -> Result<f64> {
    same_model(g1.model(), g2.model())?;
    same_model(g1.model(), x.model())?;
    let o1 = orbit(g1, x, power)?;
    let o2 = orbit(g2, x, power)?;
    let p = power as i64;
    let mut best = f64::INFINITY;
    for (m, a) in &o1 {
        for (n, b) in &o2 {
            if m.abs().max(n.abs()) == p {
                best = best.min(distance(a, b)?);
            }
        }
    }
    Ok(best)
}

fn orbit(g: &Isometry, x: &Point, max_power: u32) -> Result<Vec<(i64, Point)>> {
    let inv = g.inverse();
    let mut out = Vec::with_capacity(2 * max_power as usize);
    let (mut fwd, mut bwd) = (x.clone(), x.clone());
    for k in 1..=max_power as i64 {
        fwd = g.apply(&fwd)?;
        bwd = inv.apply(&bwd)?;
        out.push((k, fwd.clone()));
        out.push((-k, bwd.clone()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NorthSouth {
    pub k0: u64,
    /// Set when the cap was reached without contraction.
    pub overflow: bool,
}

pub const NORTH_SOUTH_CAP: u64 = 1_000_000;

/// Smallest `k₀` such that `g^{k₀}` maps `samples` random boundary points at
/// visual distance `≥ eps_minus` from `g⁻` into the `eps_plus` ball about `g⁺`.
/// Visual distances are measured by [`boundary_metric`] at the model origin.
pub fn north_south_constant(
    g: &Isometry,
    eps_plus: f64,
    eps_minus: f64,
    samples: usize,
    seed: u64,
    cap: u64,
    tol: Tolerance,
) -> Result<NorthSouth> {
    if !g.is_rank_one(tol) {
        return Err(domain("North-South dynamics needs a rank one isometry"));
    }
    let x = Point::origin(g.model());
    let (minus, plus) = g.axis_endpoints(tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(samples);
    let mut attempts = 0usize;
    while pts.len() < samples {
        attempts += 1;
        if attempts > 1000 * samples.max(1) + 10_000 {
            return Err(domain("could not sample boundary points away from the repelling point"));
        }
        let xi = sampling::boundary_direction(&x, &mut rng);
        if boundary_metric(&x, &xi, &minus)? >= eps_minus {
            pts.push(xi);
        }
    }
    for k in 1..=cap {
        let mut all = true;
        for p in pts.iter_mut() {
            *p = g.apply_boundary(p)?;
            if all && boundary_metric(&x, p, &plus)? >= eps_plus {
                all = false;
            }
        }
        if all {
            return Ok(NorthSouth { k0: k, overflow: false });
        }
    }
    Ok(NorthSouth { k0: cap, overflow: true })
}

// ---- serde ---------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct E2Payload {
    #[serde(default)]
    angle: f64,
    #[serde(default)]
    translation: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct ProductPayload {
    h2: [f64; 4],
    #[serde(default)]
    shift: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "model", content = "payload")]
enum IsometryRepr {
    E2(E2Payload),
    H2([f64; 4]),
    T4(String),
    H2xR(ProductPayload),
}

impl TryFrom<IsometryRepr> for Isometry {
    type Error = LabError;

    fn try_from(r: IsometryRepr) -> Result<Isometry> {
        match r {
            IsometryRepr::E2(p) => {
                if !(p.angle.is_finite() && p.translation.iter().all(|v| v.is_finite())) {
                    return Err(usage("non-finite E2 isometry"));
                }
                Ok(Isometry::E2 {
                    angle: wrap_angle(p.angle),
                    translation: E2Point::new(p.translation[0], p.translation[1]),
                })
            }
            IsometryRepr::H2(m) => Isometry::mobius(m),
            IsometryRepr::T4(w) => Isometry::word(&w),
            IsometryRepr::H2xR(p) => Isometry::product(p.h2, p.shift),
        }
    }
}

impl From<Isometry> for IsometryRepr {
    fn from(g: Isometry) -> Self {
        match g {
            Isometry::E2 { angle, translation } => {
                IsometryRepr::E2(E2Payload { angle, translation: [translation.x, translation.y] })
            }
            Isometry::H2(m) => IsometryRepr::H2(m.matrix()),
            Isometry::T4(w) => IsometryRepr::T4(if w.is_empty() { String::new() } else { w.to_string() }),
            Isometry::H2xR { h2, shift } => IsometryRepr::H2xR(ProductPayload { h2: h2.matrix(), shift }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ideal;
    use std::f64::consts::{FRAC_PI_2, LN_2, PI};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn g_diag() -> Isometry {
        Isometry::mobius([2.0, 0.0, 0.0, 0.5]).unwrap()
    }

    #[test]
    fn apply_examples() {
        assert_eq!(Isometry::translation(1.0, 0.0).apply(&Point::e2(0.0, 0.0)).unwrap(), Point::e2(1.0, 0.0));
        let p = Isometry::mobius([1.0, 1.0, 0.0, 1.0]).unwrap().apply(&Point::h2(0.0, 1.0).unwrap()).unwrap();
        assert!(distance(&p, &Point::h2(1.0, 1.0).unwrap()).unwrap() < 1e-14);
        assert_eq!(Isometry::word("a").unwrap().apply(&Point::t4("b").unwrap()).unwrap(), Point::t4("ab").unwrap());
        assert!(Isometry::word("a").unwrap().apply(&Point::e2(0.0, 0.0)).is_err());
    }

    #[test]
    fn boundary_action_examples() {
        let four_z = g_diag();
        assert_eq!(four_z.apply_boundary(&BoundaryPoint::h2(1.0)).unwrap(), BoundaryPoint::h2(4.0));
        let r = Isometry::rotation(FRAC_PI_2).apply_boundary(&BoundaryPoint::e2(0.0)).unwrap();
        assert!(r.approx_eq(&BoundaryPoint::e2(FRAC_PI_2), tol()));
        let g = Isometry::product([2.0, 0.0, 0.0, 0.5], 0.7).unwrap();
        let xi = BoundaryPoint::h2xr(Some(Ideal::Finite(1.0)), 0.3).unwrap();
        assert_eq!(g.apply_boundary(&xi).unwrap(), BoundaryPoint::h2xr(Some(Ideal::Finite(4.0)), 0.3).unwrap());
    }

    #[test]
    fn compose_and_inverse_examples() {
        for g in [
            g_diag(),
            Isometry::word("ab").unwrap(),
            Isometry::translation(1.0, 2.0),
            Isometry::product([1.0, 1.0, 1.0, 2.0], 0.3).unwrap(),
        ] {
            assert!(g.compose(&Isometry::identity(g.model())).unwrap().approx_eq(&g, tol()));
            assert!(g.compose(&g.inverse()).unwrap().is_identity(tol()));
        }
        assert_eq!(
            Isometry::word("ab").unwrap().compose(&Isometry::word("B").unwrap()).unwrap(),
            Isometry::word("a").unwrap()
        );
        assert!(g_diag().inverse().approx_eq(&Isometry::mobius([0.5, 0.0, 0.0, 2.0]).unwrap(), tol()));
    }

    #[test]
    fn classify_examples() {
        let c = g_diag().classify(tol());
        assert_eq!(c.kind, IsometryKind::Axial);
        assert!((c.translation_length - 2.0 * 2f64.ln()).abs() < 1e-12);
        let c = Isometry::mobius([1.0, 1.0, 0.0, 1.0]).unwrap().classify(tol());
        assert_eq!(c, IsometryClass { kind: IsometryKind::Parabolic, translation_length: 0.0 });
        let c = Isometry::word("abA").unwrap().classify(tol());
        assert_eq!(c, IsometryClass { kind: IsometryKind::Axial, translation_length: 1.0 });
        assert_eq!(Isometry::rotation(1.0).classify(tol()).kind, IsometryKind::Elliptic);
        assert_eq!(Isometry::identity(ModelSpace::H2).classify(tol()).kind, IsometryKind::Identity);
        let c = Isometry::product([2.0, 0.0, 0.0, 0.5], 1.0).unwrap().classify(tol());
        assert!((c.translation_length - (4.0 * LN_2 * LN_2 + 1.0).sqrt()).abs() < 1e-12);
        let rot = Mobius::rotation_about_i(1.0).matrix();
        assert_eq!(Isometry::product(rot, 0.5).unwrap().classify(tol()).kind, IsometryKind::Axial);
        assert_eq!(Isometry::product(rot, 0.0).unwrap().classify(tol()).kind, IsometryKind::Elliptic);
        assert_eq!(Isometry::product([1.0, 1.0, 0.0, 1.0], 0.5).unwrap().classify(tol()).kind, IsometryKind::Parabolic);
    }

    /// Displacement minimised by brute force over a grid of H2 points.
    #[test]
    fn translation_length_matches_grid_minimum() {
        let g = g_diag();
        let mut best = f64::INFINITY;
        for i in -40..=40 {
            for j in -40..=40 {
                let p = Point::h2(i as f64 * 0.05, (j as f64 * 0.05).exp()).unwrap();
                best = best.min(distance(&p, &g.apply(&p).unwrap()).unwrap());
            }
        }
        assert!((best - g.classify(tol()).translation_length).abs() < 1e-9);
        // T4: min over vertices of length <= 4 of d(w, g w)
        let g = Isometry::word("abA").unwrap();
        let mut best = u64::MAX;
        let mut frontier = vec![Word::identity()];
        let mut all = frontier.clone();
        for _ in 0..4 {
            let mut next = Vec::new();
            for w in &frontier {
                for l in crate::geometry::Letter::ALL {
                    let mut v = w.clone();
                    v.push(l);
                    if v.len() > w.len() {
                        next.push(v);
                    }
                }
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        for w in all {
            if let Isometry::T4(gw) = &g {
                best = best.min(w.distance(&gw.mul(&w)));
            }
        }
        assert_eq!(best, 1);
    }

    #[test]
    fn axis_endpoint_examples() {
        let (m, p) = g_diag().axis_endpoints(tol()).unwrap();
        assert_eq!((m, p), (BoundaryPoint::h2(0.0), BoundaryPoint::h2_infinity()));
        let (m, p) = Isometry::word("a").unwrap().axis_endpoints(tol()).unwrap();
        assert_eq!(m, BoundaryPoint::T4(EndWord::power(crate::geometry::Letter::AInv)));
        assert_eq!(p, BoundaryPoint::T4(EndWord::power(crate::geometry::Letter::A)));
        let (m, p) = Isometry::translation(1.0, 0.0).axis_endpoints(tol()).unwrap();
        assert!(m.approx_eq(&BoundaryPoint::e2(PI), tol()));
        assert!(p.approx_eq(&BoundaryPoint::e2(0.0), tol()));
        assert!(matches!(
            Isometry::mobius([1.0, 1.0, 0.0, 1.0]).unwrap().axis_endpoints(tol()),
            Err(LabError::Domain(_))
        ));
    }

    #[test]
    fn rank_one_examples() {
        assert!(g_diag().is_rank_one(tol()));
        assert!(!Isometry::product([2.0, 0.0, 0.0, 0.5], 0.3).unwrap().is_rank_one(tol()));
        assert!(!Isometry::translation(1.0, 0.0).is_rank_one(tol()));
        assert!(Isometry::word("ab").unwrap().is_rank_one(tol()));
        assert!(!Isometry::mobius([1.0, 1.0, 0.0, 1.0]).unwrap().is_rank_one(tol()));
    }

    #[test]
    fn contraction_width_examples() {
        let g = g_diag();
        let w1 = contraction_width(&g, &Point::h2(10.0, 1.0).unwrap(), 0.5, 2000, 1, tol()).unwrap();
        let w2 = contraction_width(&g, &Point::h2(40.0, 1.0).unwrap(), 0.5, 2000, 1, tol()).unwrap();
        assert!(w1 < 2.0);
        assert!(w2 < w1);
        let e = Isometry::translation(1.0, 0.0);
        let w = contraction_width(&e, &Point::e2(0.0, 10.0), 1.0, 4000, 2, tol()).unwrap();
        assert!(w > 1.9 && w <= 2.0 + 1e-12, "{w}");
        let p = Isometry::product([2.0, 0.0, 0.0, 0.5], 0.0).unwrap();
        let mut prev = 0.0;
        for r in [0.5, 1.0, 2.0] {
            let w = contraction_width(&p, &Point::h2xr(0.0, 1.0, 3.0).unwrap(), r, 3000, 3, tol()).unwrap();
            assert!(w > prev);
            prev = w;
        }
        assert!(matches!(contraction_width(&e, &Point::e2(0.0, 0.5), 1.0, 10, 1, tol()), Err(LabError::Domain(_))));
    }

    #[test]
    fn independence_examples() {
        let a = Isometry::word("a").unwrap();
        let b = Isometry::word("b").unwrap();
        assert_eq!(independence_score(&a, &b, &Point::t4("").unwrap(), 5).unwrap(), 2.0);
        let g = g_diag();
        assert_eq!(independence_score(&g, &g, &Point::h2(0.0, 1.0).unwrap(), 3).unwrap(), 0.0);
        let h = Isometry::mobius([1.0, 1.0, 1.0, 2.0]).unwrap();
        let x = Point::h2(0.0, 1.0).unwrap();
        assert!(independence_score(&g, &h, &x, 4).unwrap() > 0.0);
        let s: Vec<f64> = [2, 4, 8].iter().map(|&m| independence_shell_score(&g, &h, &x, m).unwrap()).collect();
        assert!(s[0] < s[1] && s[1] < s[2], "{s:?}");
        let g2 = g.power(2);
        for m in [2, 4, 8] {
            assert!(independence_shell_score(&g, &g2, &x, m).unwrap() < 1e-9);
        }
    }

    #[test]
    fn north_south_examples() {
        let g = g_diag();
        let ns1 = north_south_constant(&g, 0.1, 0.01, 200, 7, NORTH_SOUTH_CAP, tol()).unwrap();
        assert!(!ns1.overflow);
        let ns2 = north_south_constant(&g, 0.1, 0.2, 200, 7, NORTH_SOUTH_CAP, tol()).unwrap();
        assert!(ns2.k0 <= ns1.k0);
        let ns = north_south_constant(&Isometry::word("a").unwrap(), 0.1, 0.01, 200, 7, 1000, tol()).unwrap();
        assert!(!ns.overflow);
        let ns_sq = north_south_constant(&g.power(2), 0.1, 0.01, 200, 7, NORTH_SOUTH_CAP, tol()).unwrap();
        assert!(ns_sq.k0 <= ns1.k0);
        assert!(north_south_constant(&Isometry::translation(1.0, 0.0), 0.1, 0.1, 10, 1, 10, tol()).is_err());
    }

    #[test]
    fn json_payloads() {
        let g: Isometry = serde_json::from_str(r#"{"model":"H2","payload":[2.0,0.0,0.0,0.5]}"#).unwrap();
        assert!(g.approx_eq(&g_diag(), tol()));
        assert!(serde_json::from_str::<Isometry>(r#"{"model":"H2","payload":[2.0,0.0,0.0,1.0]}"#).is_err());
        let w: Isometry = serde_json::from_str(r#"{"model":"T4","payload":"aAb"}"#).unwrap();
        assert_eq!(w, Isometry::word("b").unwrap());
        let s = serde_json::to_string(&Isometry::translation(1.0, 0.0)).unwrap();
        assert_eq!(s, r#"{"model":"E2","payload":{"angle":0.0,"translation":[1.0,0.0]}}"#);
    }
}
