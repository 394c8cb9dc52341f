//! `H² × ℝ` with the product metric.
//!
//! A boundary point is a pair `(ξ, α)`: `ξ ∈ ∂H²` or `⊥`, and a slope
//! `α ∈ [-π/2, π/2]` measured towards `+ℝ`. Rays split as unit speed
//! `(cos α, sin α)` between the two factors; `α = ±π/2` are the two vertical
//! poles, for which `ξ = ⊥`.

use std::f64::consts::FRAC_PI_2;

use super::hyperbolic::{self, H2Point, Ideal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductPoint {
    pub base: H2Point,
    pub height: f64,
}

impl ProductPoint {
    pub fn new(base: H2Point, height: f64) -> Self {
        Self { base, height }
    }

    pub fn is_valid(&self) -> bool {
        self.base.is_valid() && self.height.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductIdeal {
    /// `None` is `⊥`, used exactly for the poles.
    pub xi: Option<Ideal>,
    pub slope: f64,
}

impl ProductIdeal {
    /// Validates and normalises: slopes within `tol` of `±π/2` snap to the pole.
    pub fn new(xi: Option<Ideal>, slope: f64, tol: f64) -> Option<Self> {
        if !slope.is_finite() || slope.abs() > FRAC_PI_2 + tol {
            return None;
        }
        if FRAC_PI_2 - slope.abs() <= tol {
            return Some(Self { xi: None, slope: FRAC_PI_2.copysign(slope) });
        }
        match xi {
            Some(x) if x.is_valid() => Some(Self { xi: Some(x), slope }),
            _ => None,
        }
    }

    pub fn pole(up: bool) -> Self {
        Self { xi: None, slope: if up { FRAC_PI_2 } else { -FRAC_PI_2 } }
    }
}

pub fn distance(p: &ProductPoint, q: &ProductPoint) -> f64 {
    hyperbolic::distance(&p.base, &q.base).hypot(p.height - q.height)
}

pub fn ray_point(p: &ProductPoint, xi: &ProductIdeal, t: f64) -> ProductPoint {
    match xi.xi {
        None => ProductPoint::new(p.base, p.height + t * xi.slope.signum()),
        Some(ideal) => {
            let (s, c) = xi.slope.sin_cos();
            ProductPoint::new(hyperbolic::ray_point(&p.base, &ideal, t * c), p.height + t * s)
        }
    }
}

pub fn direction(p: &ProductPoint, q: &ProductPoint) -> ProductIdeal {
    let dh = hyperbolic::distance(&p.base, &q.base);
    let dz = q.height - p.height;
    if dh == 0.0 {
        return ProductIdeal::pole(dz > 0.0);
    }
    ProductIdeal { xi: Some(hyperbolic::direction(&p.base, &q.base)), slope: dz.atan2(dh) }
}

/// `cos α · h^{H²}_ξ + sin α · (x_height - z_height)`.
pub fn horofunction(xi: &ProductIdeal, x: &ProductPoint, z: &ProductPoint) -> f64 {
    let vertical = xi.slope.sin() * (x.height - z.height);
    match xi.xi {
        None => vertical,
        Some(ideal) => xi.slope.cos() * hyperbolic::horofunction(&ideal, &x.base, &z.base) + vertical,
    }
}
