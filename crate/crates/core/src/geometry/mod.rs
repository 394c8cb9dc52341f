//! Metric kernels for the four model CAT(0) spaces.
//!
//! | tag    | space                                   | boundary coordinate          |
//! |--------|-----------------------------------------|------------------------------|
//! | `E2`   | Euclidean plane                         | angle `θ ∈ [0, 2π)`          |
//! | `H2`   | upper half-plane                        | `ξ ∈ ℝ ∪ {∞}`                |
//! | `T4`   | Cayley graph of `F₂` (4-regular tree)   | infinite reduced word        |
//! | `H2xR` | `H² × ℝ`, `d² = d_H² + d_ℝ²`            | `(ξ or ⊥, slope α)`          |
//!
//! Points and boundary points carry their model; every binary operation checks
//! that its arguments agree. `T4` is vertex-granular: distances are integers
//! and ray parameters must be whole numbers.

pub mod euclid;
pub mod hyperbolic;
pub mod product;
pub mod tree;

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{same_model, usage, LabError, Result};

pub use euclid::E2Point;
pub use hyperbolic::{H2Line, H2Point, Ideal};
pub use product::{ProductIdeal, ProductPoint};
pub use tree::{EndWord, Letter, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelSpace {
    E2,
    H2,
    T4,
    H2xR,
}

impl ModelSpace {
    pub const ALL: [ModelSpace; 4] = [ModelSpace::E2, ModelSpace::H2, ModelSpace::T4, ModelSpace::H2xR];
}

impl fmt::Display for ModelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelSpace::E2 => "E2",
            ModelSpace::H2 => "H2",
            ModelSpace::T4 => "T4",
            ModelSpace::H2xR => "H2xR",
        };
        f.write_str(s)
    }
}

/// Absolute tolerance for real comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tolerance(pub f64);

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(1e-9)
    }
}

pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub enum Point {
    E2(E2Point),
    H2(H2Point),
    T4(Word),
    H2xR(ProductPoint),
}

impl Point {
    pub fn e2(x: f64, y: f64) -> Point {
        Point::E2(E2Point::new(x, y))
    }

    pub fn h2(x: f64, y: f64) -> Result<Point> {
        H2Point::new(x, y).map(Point::H2).ok_or_else(|| usage(format!("H2 point needs y > 0, got ({x}, {y})")))
    }

    pub fn t4(word: &str) -> Result<Point> {
        Word::parse(word).map(Point::T4)
    }

    pub fn h2xr(x: f64, y: f64, height: f64) -> Result<Point> {
        let base = H2Point::new(x, y).ok_or_else(|| usage(format!("H2 point needs y > 0, got ({x}, {y})")))?;
        Ok(Point::H2xR(ProductPoint::new(base, height)))
    }

    /// The conventional basepoint of each model: `0`, `i`, the identity, `(i, 0)`.
    pub fn origin(model: ModelSpace) -> Point {
        match model {
            ModelSpace::E2 => Point::E2(E2Point::ORIGIN),
            ModelSpace::H2 => Point::H2(H2Point::origin()),
            ModelSpace::T4 => Point::T4(Word::identity()),
            ModelSpace::H2xR => Point::H2xR(ProductPoint::new(H2Point::origin(), 0.0)),
        }
    }

    pub fn model(&self) -> ModelSpace {
        match self {
            Point::E2(_) => ModelSpace::E2,
            Point::H2(_) => ModelSpace::H2,
            Point::T4(_) => ModelSpace::T4,
            Point::H2xR(_) => ModelSpace::H2xR,
        }
    }

    /// Flat numeric components, used for CSV export. `H2` heights are
    /// exported as `ln y`; tree vertices as their word.
    pub fn components(&self) -> Vec<String> {
        match self {
            Point::E2(p) => vec![p.x.to_string(), p.y.to_string()],
            Point::H2(p) => vec![p.x.to_string(), p.ln_y.to_string()],
            Point::T4(w) => vec![w.to_string()],
            Point::H2xR(p) => vec![p.base.x.to_string(), p.base.ln_y.to_string(), p.height.to_string()],
        }
    }

    pub fn component_names(model: ModelSpace) -> &'static [&'static str] {
        match model {
            ModelSpace::E2 => &["x", "y"],
            ModelSpace::H2 => &["x", "ln_y"],
            ModelSpace::T4 => &["word"],
            ModelSpace::H2xR => &["x", "ln_y", "height"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoundaryRepr", into = "BoundaryRepr")]
pub enum BoundaryPoint {
    E2(f64),
    H2(Ideal),
    T4(EndWord),
    H2xR(ProductIdeal),
}

impl BoundaryPoint {
    pub fn e2(theta: f64) -> BoundaryPoint {
        BoundaryPoint::E2(wrap_angle(theta))
    }

    pub fn h2(xi: f64) -> BoundaryPoint {
        BoundaryPoint::H2(Ideal::Finite(xi))
    }

    pub fn h2_infinity() -> BoundaryPoint {
        BoundaryPoint::H2(Ideal::Infinity)
    }

    /// `prefix · period^∞`; an empty `period` means the straight extension of
    /// the prefix.
    pub fn t4(prefix: &str, period: &str) -> Result<BoundaryPoint> {
        let prefix = Word::parse(prefix)?;
        let end =
            if period.is_empty() { EndWord::straight(prefix)? } else { EndWord::new(prefix, Word::parse(period)?)? };
        Ok(BoundaryPoint::T4(end))
    }

    pub fn h2xr(xi: Option<Ideal>, slope: f64) -> Result<BoundaryPoint> {
        ProductIdeal::new(xi, slope, Tolerance::default().0)
            .map(BoundaryPoint::H2xR)
            .ok_or_else(|| usage(format!("malformed H2xR boundary point ({xi:?}, {slope})")))
    }

    pub fn model(&self) -> ModelSpace {
        match self {
            BoundaryPoint::E2(_) => ModelSpace::E2,
            BoundaryPoint::H2(_) => ModelSpace::H2,
            BoundaryPoint::T4(_) => ModelSpace::T4,
            BoundaryPoint::H2xR(_) => ModelSpace::H2xR,
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            BoundaryPoint::E2(t) => t.is_finite(),
            BoundaryPoint::H2(xi) => xi.is_valid(),
            BoundaryPoint::T4(_) => true,
            BoundaryPoint::H2xR(p) => {
                p.slope.is_finite()
                    && p.slope.abs() <= std::f64::consts::FRAC_PI_2
                    && match p.xi {
                        None => p.slope.abs() == std::f64::consts::FRAC_PI_2,
                        Some(x) => x.is_valid(),
                    }
            }
        }
    }

    /// Equality of asymptotic classes up to `tol` in the coordinates.
    pub fn approx_eq(&self, other: &BoundaryPoint, tol: Tolerance) -> bool {
        let tol = tol.0;
        match (self, other) {
            (BoundaryPoint::E2(a), BoundaryPoint::E2(b)) => {
                let d = (a - b).abs();
                d.min(TAU - d) <= tol
            }
            (BoundaryPoint::H2(a), BoundaryPoint::H2(b)) => a.approx_eq(b, tol),
            (BoundaryPoint::T4(a), BoundaryPoint::T4(b)) => a == b,
            (BoundaryPoint::H2xR(a), BoundaryPoint::H2xR(b)) => {
                (a.slope - b.slope).abs() <= tol
                    && match (a.xi, b.xi) {
                        (None, None) => true,
                        (Some(x), Some(y)) => x.approx_eq(&y, tol),
                        _ => false,
                    }
            }
            _ => false,
        }
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::E2(t) => write!(f, "θ={t}"),
            BoundaryPoint::H2(Ideal::Finite(x)) => write!(f, "{x}"),
            BoundaryPoint::H2(Ideal::Infinity) => write!(f, "inf"),
            BoundaryPoint::T4(e) => write!(f, "{e}"),
            BoundaryPoint::H2xR(p) => match p.xi {
                None => write!(f, "(⊥, {})", p.slope),
                Some(Ideal::Finite(x)) => write!(f, "({x}, {})", p.slope),
                Some(Ideal::Infinity) => write!(f, "(inf, {})", p.slope),
            },
        }
    }
}

/// Something to project onto a ball: an interior point or a boundary point.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Point(Point),
    Boundary(BoundaryPoint),
}

impl Target {
    pub fn model(&self) -> ModelSpace {
        match self {
            Target::Point(p) => p.model(),
            Target::Boundary(b) => b.model(),
        }
    }
}

impl From<Point> for Target {
    fn from(p: Point) -> Self {
        Target::Point(p)
    }
}

impl From<BoundaryPoint> for Target {
    fn from(b: BoundaryPoint) -> Self {
        Target::Boundary(b)
    }
}

fn whole_steps(t: f64) -> Result<u64> {
    if t < 0.0 || t.fract() != 0.0 || !t.is_finite() {
        return Err(usage(format!("T4 is vertex-granular; parameter {t} is not a whole number")));
    }
    Ok(t as u64)
}

pub fn distance(p: &Point, q: &Point) -> Result<f64> {
    Ok(match (p, q) {
        (Point::E2(a), Point::E2(b)) => euclid::distance(a, b),
        (Point::H2(a), Point::H2(b)) => hyperbolic::distance(a, b),
        (Point::T4(a), Point::T4(b)) => a.distance(b) as f64,
        (Point::H2xR(a), Point::H2xR(b)) => product::distance(a, b),
        _ => return Err(LabError::ModelMismatch { expected: p.model(), found: q.model() }),
    })
}

/// Point at distance `t` from `x` on the geodesic ray in the class of `xi`.
pub fn ray_point(x: &Point, xi: &BoundaryPoint, t: f64) -> Result<Point> {
    if !(t >= 0.0) {
        return Err(usage(format!("ray parameter must be nonnegative, got {t}")));
    }
    if !xi.is_valid() {
        return Err(usage(format!("malformed boundary point {xi}")));
    }
    Ok(match (x, xi) {
        (Point::E2(p), BoundaryPoint::E2(theta)) => Point::E2(euclid::ray_point(p, *theta, t)),
        (Point::H2(p), BoundaryPoint::H2(ideal)) => Point::H2(hyperbolic::ray_point(p, ideal, t)),
        (Point::T4(w), BoundaryPoint::T4(end)) => Point::T4(tree::ray_point(w, end, whole_steps(t)?)),
        (Point::H2xR(p), BoundaryPoint::H2xR(ideal)) => Point::H2xR(product::ray_point(p, ideal, t)),
        _ => return Err(LabError::ModelMismatch { expected: x.model(), found: xi.model() }),
    })
}

/// Boundary coordinate of the ray from `x` through `y`. In `T4` the ray is
/// continued straight past `y`.
pub fn direction(x: &Point, y: &Point) -> Result<BoundaryPoint> {
    same_model(x.model(), y.model())?;
    if x == y {
        return Err(usage("direction needs two distinct points"));
    }
    Ok(match (x, y) {
        (Point::E2(p), Point::E2(q)) => BoundaryPoint::E2(euclid::direction(p, q)),
        (Point::H2(p), Point::H2(q)) => BoundaryPoint::H2(hyperbolic::direction(p, q)),
        (Point::T4(p), Point::T4(q)) => BoundaryPoint::T4(tree::direction(p, q).expect("distinct vertices")),
        (Point::H2xR(p), Point::H2xR(q)) => BoundaryPoint::H2xR(product::direction(p, q)),
        _ => unreachable!(),
    })
}

/// Point at distance `t` from `p` on the geodesic segment `[p, q]`.
pub fn geodesic_point(p: &Point, q: &Point, t: f64) -> Result<Point> {
    let d = distance(p, q)?;
    let tol = Tolerance::default().0;
    if !(t >= 0.0) || t > d + tol * (1.0 + d) {
        return Err(usage(format!("geodesic parameter {t} outside [0, {d}]")));
    }
    if p.model() == ModelSpace::T4 {
        whole_steps(t)?;
    }
    if t == 0.0 {
        return Ok(p.clone());
    }
    if t >= d {
        return Ok(q.clone());
    }
    ray_point(p, &direction(p, q)?, t)
}

/// Nearest-point projection onto the closed ball `B(center, r)`, extended to
/// the boundary by evaluating the ray at `r`. In `T4` the radius is rounded
/// down to a whole number of edges.
pub fn project_to_ball(center: &Point, r: f64, target: &Target) -> Result<Point> {
    if !(r > 0.0) {
        return Err(usage(format!("projection radius must be positive, got {r}")));
    }
    same_model(center.model(), target.model())?;
    let r = if center.model() == ModelSpace::T4 { r.floor() } else { r };
    match target {
        Target::Point(q) => {
            let d = distance(center, q)?;
            if d <= r {
                Ok(q.clone())
            } else {
                geodesic_point(center, q, r)
            }
        }
        Target::Boundary(xi) => ray_point(center, xi, r),
    }
}

/// Angle at the vertex `x` of the Euclidean comparison triangle for `(x, y, z)`.
pub fn comparison_angle(x: &Point, y: &Point, z: &Point) -> Result<f64> {
    let a = distance(x, y)?;
    let b = distance(x, z)?;
    let c = distance(y, z)?;
    if a == 0.0 || b == 0.0 {
        return Err(usage("comparison angle is undefined at a degenerate vertex"));
    }
    Ok(angle_from_sides(a, b, c))
}

pub(crate) fn angle_from_sides(a: f64, b: f64, c: f64) -> f64 {
    let cos = ((a * a + b * b - c * c) / (2.0 * a * b)).clamp(-1.0, 1.0);
    cos.acos().clamp(0.0, PI)
}

// ---- serde representations ---------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "model", content = "coords")]
enum PointRepr {
    E2([f64; 2]),
    H2([f64; 2]),
    T4(String),
    H2xR(([f64; 2], f64)),
}

impl TryFrom<PointRepr> for Point {
    type Error = LabError;

    fn try_from(r: PointRepr) -> Result<Point> {
        match r {
            PointRepr::E2([x, y]) => {
                let p = E2Point::new(x, y);
                if p.is_valid() {
                    Ok(Point::E2(p))
                } else {
                    Err(usage("non-finite E2 coordinates"))
                }
            }
            PointRepr::H2([x, y]) => Point::h2(x, y),
            PointRepr::T4(w) => Point::t4(&w),
            PointRepr::H2xR(([x, y], h)) => {
                if !h.is_finite() {
                    return Err(usage("non-finite height"));
                }
                Point::h2xr(x, y, h)
            }
        }
    }
}

impl From<Point> for PointRepr {
    fn from(p: Point) -> Self {
        match p {
            Point::E2(p) => PointRepr::E2([p.x, p.y]),
            Point::H2(p) => PointRepr::H2([p.x, p.y()]),
            Point::T4(w) => PointRepr::T4(w.to_string()),
            Point::H2xR(p) => PointRepr::H2xR(([p.base.x, p.base.y()], p.height)),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IdealRepr {
    Finite(f64),
    Named(String),
}

impl TryFrom<IdealRepr> for Ideal {
    type Error = LabError;

    fn try_from(r: IdealRepr) -> Result<Ideal> {
        match r {
            IdealRepr::Finite(v) if v.is_finite() => Ok(Ideal::Finite(v)),
            IdealRepr::Named(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => Ok(Ideal::Infinity),
            _ => Err(usage("ideal point must be a finite number or \"inf\"")),
        }
    }
}

impl From<Ideal> for IdealRepr {
    fn from(i: Ideal) -> Self {
        match i {
            Ideal::Finite(v) => IdealRepr::Finite(v),
            Ideal::Infinity => IdealRepr::Named("inf".into()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EndRepr {
    prefix: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    periodic: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct ProductIdealRepr {
    xi: Option<IdealRepr>,
    slope: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "model", content = "coord")]
enum BoundaryRepr {
    E2(f64),
    H2(IdealRepr),
    T4(EndRepr),
    H2xR(ProductIdealRepr),
}

impl TryFrom<BoundaryRepr> for BoundaryPoint {
    type Error = LabError;

    fn try_from(r: BoundaryRepr) -> Result<BoundaryPoint> {
        match r {
            BoundaryRepr::E2(t) if t.is_finite() => Ok(BoundaryPoint::e2(t)),
            BoundaryRepr::E2(_) => Err(usage("non-finite angle")),
            BoundaryRepr::H2(i) => Ok(BoundaryPoint::H2(i.try_into()?)),
            BoundaryRepr::T4(e) => BoundaryPoint::t4(&e.prefix, e.periodic.as_deref().unwrap_or("")),
            BoundaryRepr::H2xR(p) => {
                let xi = p.xi.map(Ideal::try_from).transpose()?;
                BoundaryPoint::h2xr(xi, p.slope)
            }
        }
    }
}

impl From<BoundaryPoint> for BoundaryRepr {
    fn from(b: BoundaryPoint) -> Self {
        match b {
            BoundaryPoint::E2(t) => BoundaryRepr::E2(t),
            BoundaryPoint::H2(i) => BoundaryRepr::H2(i.into()),
            BoundaryPoint::T4(e) => {
                let prefix = e.prefix().to_string();
                BoundaryRepr::T4(EndRepr {
                    prefix: if prefix == "e" { String::new() } else { prefix },
                    periodic: Some(e.period().to_string()),
                })
            }
            BoundaryPoint::H2xR(p) => BoundaryRepr::H2xR(ProductIdealRepr { xi: p.xi.map(Into::into), slope: p.slope }),
        }
    }
}
