use super::wrap_angle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E2Point {
    pub x: f64,
    pub y: f64,
}

impl E2Point {
    pub const ORIGIN: E2Point = E2Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

pub fn distance(p: &E2Point, q: &E2Point) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

pub fn ray_point(p: &E2Point, theta: f64, t: f64) -> E2Point {
    let (s, c) = theta.sin_cos();
    E2Point::new(p.x + t * c, p.y + t * s)
}

pub fn direction(p: &E2Point, q: &E2Point) -> f64 {
    wrap_angle((q.y - p.y).atan2(q.x - p.x))
}

/// `⟨x - z, u_θ⟩`.
pub fn horofunction(theta: f64, x: &E2Point, z: &E2Point) -> f64 {
    let (s, c) = theta.sin_cos();
    (x.x - z.x) * c + (x.y - z.y) * s
}
