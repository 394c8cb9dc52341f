//! Horofunctions, visual neighbourhoods, angles at infinity, a visual metric on
//! the boundary, and closed-form Tits distances.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{same_model, usage, LabError, Result};
use crate::geometry::hyperbolic::{self, H2Line};
use crate::geometry::{
    comparison_angle, direction, distance, euclid, product, project_to_ball, ray_point, tree, BoundaryPoint,
    ModelSpace, Point, ProductPoint, Target, Tolerance,
};
use crate::sampling;

/// `h_ξ^x(z)`, the Busemann function of `ξ` normalised to vanish at `x`.
pub fn horofunction(xi: &BoundaryPoint, x: &Point, z: &Point) -> Result<f64> {
    if !xi.is_valid() {
        return Err(usage(format!("malformed boundary point {xi}")));
    }
    same_model(x.model(), z.model())?;
    Ok(match (xi, x, z) {
        (BoundaryPoint::E2(t), Point::E2(a), Point::E2(b)) => euclid::horofunction(*t, a, b),
        (BoundaryPoint::H2(i), Point::H2(a), Point::H2(b)) => hyperbolic::horofunction(i, a, b),
        (BoundaryPoint::T4(e), Point::T4(a), Point::T4(b)) => tree::horofunction(e, a, b) as f64,
        (BoundaryPoint::H2xR(p), Point::H2xR(a), Point::H2xR(b)) => product::horofunction(p, a, b),
        _ => return Err(LabError::ModelMismatch { expected: x.model(), found: xi.model() }),
    })
}

/// `d(ray_point(x, ξ, t), z) - t`, which tends to `h_ξ^x(z)` as `t → ∞`.
pub fn horofunction_limit_oracle(xi: &BoundaryPoint, x: &Point, z: &Point, t: f64) -> Result<f64> {
    let xt = ray_point(x, xi, t)?;
    Ok(distance(&xt, z)? - t)
}

/// The basic open set `U(base, r, eps)` around `target` in the cone topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualNeighborhood {
    pub base: Point,
    pub target: BoundaryPoint,
    pub r: f64,
    pub eps: f64,
}

impl VisualNeighborhood {
    pub fn new(base: Point, target: BoundaryPoint, r: f64, eps: f64) -> Result<Self> {
        same_model(base.model(), target.model())?;
        if !(eps > 0.0 && r > eps) {
            return Err(usage(format!("visual neighbourhood needs r > eps > 0, got r={r}, eps={eps}")));
        }
        Ok(Self { base, target, r, eps })
    }
}

pub fn visual_contains(u: &VisualNeighborhood, target: &Target) -> Result<bool> {
    same_model(u.base.model(), target.model())?;
    if let Target::Point(p) = target {
        if distance(&u.base, p)? <= u.r {
            return Ok(false);
        }
    }
    let proj = project_to_ball(&u.base, u.r, target)?;
    let tip = ray_point(&u.base, &u.target, radius_for(&u.base, u.r))?;
    Ok(distance(&proj, &tip)? < u.eps)
}

fn radius_for(base: &Point, r: f64) -> f64 {
    if base.model() == ModelSpace::T4 {
        r.floor()
    } else {
        r
    }
}

/// Samples points and boundary points of `U(x', ξ, R', ε/3)` and checks that
/// each lies in `U(x, ξ, r, ε)`.
#[allow(clippy::too_many_arguments)]
pub fn neighborhood_nesting_check(
    x: &Point,
    x_prime: &Point,
    xi: &BoundaryPoint,
    r: f64,
    eps: f64,
    r_prime: f64,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    if !(r_prime > r) {
        return Err(usage("nesting check needs R' > r"));
    }
    let inner = VisualNeighborhood::new(x.clone(), xi.clone(), r, eps)?;
    let outer = VisualNeighborhood::new(x_prime.clone(), xi.clone(), r_prime, eps / 3.0)?;
    let tree = x.model() == ModelSpace::T4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tip = ray_point(x_prime, xi, radius_for(x_prime, r_prime))?;
    let mut tested = 0usize;
    let mut attempts = 0usize;
    while tested < samples && attempts < 50 * samples + 100 {
        attempts += 1;
        let c = sampling::point_in_ball(&tip, (eps / 3.0).max(if tree { 1.0 } else { 0.0 }), &mut rng);
        if &c == x_prime {
            continue;
        }
        let zeta = direction(x_prime, &c)?;
        let extra = if tree {
            (r_prime.floor() + 1.0 + rng.gen_range(0..8) as f64).max(0.0)
        } else {
            r_prime * (1.0 + 1e-9) + rng.gen_range(0.0..(2.0 * r_prime + 4.0))
        };
        let candidates = [Target::Boundary(zeta.clone()), Target::Point(ray_point(x_prime, &zeta, extra)?)];
        for cand in candidates {
            if visual_contains(&outer, &cand)? {
                tested += 1;
                if !visual_contains(&inner, &cand)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Comparison angles at `x` along the rays to `ξ` and `η` over a growing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleEstimate {
    /// Value at the last grid point.
    pub value: f64,
    /// Largest decrease between consecutive grid values; zero in a CAT(0)
    /// space up to rounding, since comparison angles along rays increase.
    pub monotonicity_defect: f64,
    pub series: Vec<(f64, f64)>,
}

/// Default grid `1, 2, 4, …, 2^20`.
pub fn default_angle_grid() -> Vec<f64> {
    (0..=20).map(|k| 2f64.powi(k)).collect()
}

pub fn angle_at_infinity(x: &Point, xi: &BoundaryPoint, eta: &BoundaryPoint, t_grid: &[f64]) -> Result<AngleEstimate> {
    same_model(xi.model(), eta.model())?;
    same_model(x.model(), xi.model())?;
    if xi == eta || t_grid.is_empty() {
        return Ok(AngleEstimate { value: 0.0, monotonicity_defect: 0.0, series: Vec::new() });
    }
    let mut series = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let a = ray_point(x, xi, t)?;
        let b = ray_point(x, eta, t)?;
        let ang = if a == b { 0.0 } else { comparison_angle(x, &a, &b)? };
        series.push((t, ang));
    }
    let defect = series.windows(2).map(|w| (w[0].1 - w[1].1).max(0.0)).fold(0.0, f64::max);
    Ok(AngleEstimate { value: series.last().expect("nonempty").1, monotonicity_defect: defect, series })
}

/// A Tits distance: a value in `[0, π]` or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TitsRepr", into = "TitsRepr")]
pub enum TitsValue {
    Finite(f64),
    Infinite,
}

impl TitsValue {
    pub fn as_f64(self) -> f64 {
        match self {
            TitsValue::Finite(v) => v,
            TitsValue::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, TitsValue::Finite(_))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TitsRepr {
    Num(f64),
    Word(String),
}

impl TryFrom<TitsRepr> for TitsValue {
    type Error = LabError;

    fn try_from(r: TitsRepr) -> Result<TitsValue> {
        match r {
            TitsRepr::Num(v) => Ok(TitsValue::Finite(v)),
            TitsRepr::Word(s) if s == "inf" => Ok(TitsValue::Infinite),
            TitsRepr::Word(s) => Err(usage(format!("bad Tits value {s:?}"))),
        }
    }
}

impl From<TitsValue> for TitsRepr {
    fn from(v: TitsValue) -> Self {
        match v {
            TitsValue::Finite(x) => TitsRepr::Num(x),
            TitsValue::Infinite => TitsRepr::Word("inf".into()),
        }
    }
}

pub fn tits_distance(xi: &BoundaryPoint, eta: &BoundaryPoint, tol: Tolerance) -> Result<TitsValue> {
    same_model(xi.model(), eta.model())?;
    for p in [xi, eta] {
        if !p.is_valid() {
            return Err(usage(format!("malformed boundary point {p}")));
        }
    }
    Ok(match (xi, eta) {
        (BoundaryPoint::E2(a), BoundaryPoint::E2(b)) => {
            let d = (a - b).abs() % (2.0 * PI);
            TitsValue::Finite(d.min(2.0 * PI - d))
        }
        (BoundaryPoint::H2(_), BoundaryPoint::H2(_)) | (BoundaryPoint::T4(_), BoundaryPoint::T4(_)) => {
            if xi.approx_eq(eta, tol) {
                TitsValue::Finite(0.0)
            } else {
                TitsValue::Infinite
            }
        }
        (BoundaryPoint::H2xR(p), BoundaryPoint::H2xR(q)) => {
            // ∂(H² × ℝ) is the spherical join of the discrete Tits boundary of
            // H² with the two poles.
            let same_base = match (p.xi, q.xi) {
                (Some(a), Some(b)) => a.approx_eq(&b, tol.0),
                _ => true,
            };
            let v = if same_base { (p.slope - q.slope).abs() } else { PI - (p.slope + q.slope).abs() };
            TitsValue::Finite(v.clamp(0.0, PI))
        }
        _ => unreachable!("models checked"),
    })
}

/// Whether the open Tits ball `B_T(ξ, π)` is `{ξ}`.
pub fn tits_ball_is_trivial(xi: &BoundaryPoint) -> bool {
    matches!(xi.model(), ModelSpace::H2 | ModelSpace::T4)
}

/// Radius at which boundary points are compared.
pub const BOUNDARY_METRIC_RADIUS: f64 = 1.0;

/// A metric on the boundary inducing the cone topology. In the continuous
/// models it is the distance between the points where the rays from `x` leave
/// the unit ball. In the tree that would only see the first edge, so it uses
/// `2 e^{-(ξ|η)_x}` instead; both give 2 to ends leaving `x` by different edges.
pub fn boundary_metric(x: &Point, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<f64> {
    same_model(x.model(), xi.model())?;
    same_model(x.model(), eta.model())?;
    if let (Point::T4(w), BoundaryPoint::T4(a), BoundaryPoint::T4(b)) = (x, xi, eta) {
        if a == b {
            return Ok(0.0);
        }
        let ga = a.left_mul(&w.inverse());
        let gb = b.left_mul(&w.inverse());
        let c = ga.confluence(&gb).expect("distinct ends");
        return Ok(2.0 * (-(c as f64)).exp());
    }
    let p = ray_point(x, xi, BOUNDARY_METRIC_RADIUS)?;
    let q = ray_point(x, eta, BOUNDARY_METRIC_RADIUS)?;
    distance(&p, &q)
}

/// A bi-infinite geodesic between two boundary points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicWitness {
    pub point: Point,
    pub from: BoundaryPoint,
    pub to: BoundaryPoint,
    pub rank_one: bool,
}

/// A geodesic joining `ξ` to `η` when one exists, flagged rank one when it
/// bounds no flat half-plane.
pub fn rank_one_geodesic_witness(
    xi: &BoundaryPoint,
    eta: &BoundaryPoint,
    tol: Tolerance,
) -> Result<Option<GeodesicWitness>> {
    same_model(xi.model(), eta.model())?;
    let witness =
        |point: Point, rank_one: bool| Some(GeodesicWitness { point, from: xi.clone(), to: eta.clone(), rank_one });
    Ok(match (xi, eta) {
        (BoundaryPoint::E2(_), BoundaryPoint::E2(_)) => {
            if (tits_distance(xi, eta, tol)?.as_f64() - PI).abs() <= tol.0 {
                witness(Point::e2(0.0, 0.0), false)
            } else {
                None
            }
        }
        (BoundaryPoint::H2(a), BoundaryPoint::H2(b)) => match H2Line::new(a, b) {
            Some(line) if !a.approx_eq(b, tol.0) => witness(Point::H2(line.point(0.0)), true),
            _ => None,
        },
        (BoundaryPoint::T4(a), BoundaryPoint::T4(b)) => match a.confluence(b) {
            None => None,
            Some(c) => witness(Point::T4(a.truncate(c)), true),
        },
        (BoundaryPoint::H2xR(p), BoundaryPoint::H2xR(q)) => {
            if (tits_distance(xi, eta, tol)?.as_f64() - PI).abs() > tol.0 {
                None
            } else {
                let base = match (p.xi, q.xi) {
                    (Some(a), Some(b)) => H2Line::new(&a, &b).map(|l| l.point(0.0)),
                    _ => Some(hyperbolic::H2Point::origin()),
                };
                base.and_then(|b| witness(Point::H2xR(ProductPoint::new(b, 0.0)), false))
            }
        }
        _ => unreachable!("models checked"),
    })
}
