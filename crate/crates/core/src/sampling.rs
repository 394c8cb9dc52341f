//! Random points, boundary directions and isometries for the empirical checks.

use std::f64::consts::TAU;

use rand::Rng;

use crate::geometry::{
    direction, distance, hyperbolic, ray_point, BoundaryPoint, E2Point, H2Point, Ideal, Letter, ModelSpace, Point,
    ProductIdeal, ProductPoint, Word,
};
use crate::isometry::{Isometry, Mobius};

/// Length of the random reduced path used to pick an end of the tree.
pub const TREE_DIRECTION_DEPTH: usize = 64;

/// Ideal point seen from `p` at visual angle `phi` (angle 0 points to `∞`
/// when `p = i`).
pub fn h2_ideal_at_angle(p: &H2Point, phi: f64) -> Ideal {
    match Ideal::from_cayley_angle(phi) {
        Ideal::Infinity => Ideal::Infinity,
        Ideal::Finite(v) => {
            let w = p.x + p.ln_y.exp() * v;
            if w.is_finite() {
                Ideal::Finite(w)
            } else {
                Ideal::Infinity
            }
        }
    }
}

/// A random non-backtracking path of `len` letters.
pub fn reduced_path<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    for _ in 0..len {
        let l = match letters.last() {
            None => Letter::ALL[rng.gen_range(0..4)],
            Some(prev) => {
                let choices: Vec<Letter> = Letter::ALL.into_iter().filter(|l| *l != prev.inverse()).collect();
                choices[rng.gen_range(0..3)]
            }
        };
        letters.push(l);
    }
    Word::from_letters(letters)
}

/// A boundary point in the visual measure seen from `x`.
pub fn boundary_direction<R: Rng + ?Sized>(x: &Point, rng: &mut R) -> BoundaryPoint {
    match x {
        Point::E2(_) => BoundaryPoint::e2(rng.gen_range(0.0..TAU)),
        Point::H2(p) => BoundaryPoint::H2(h2_ideal_at_angle(p, rng.gen_range(0.0..TAU))),
        Point::T4(w) => {
            let y = Point::T4(w.mul(&reduced_path(TREE_DIRECTION_DEPTH, rng)));
            direction(x, &y).expect("path is nonempty")
        }
        Point::H2xR(p) => {
            let xi = h2_ideal_at_angle(&p.base, rng.gen_range(0.0..TAU));
            let slope = rng.gen_range(-1.0f64..1.0).asin();
            BoundaryPoint::H2xR(ProductIdeal::new(Some(xi), slope, 0.0).unwrap_or(ProductIdeal::pole(slope > 0.0)))
        }
    }
}

/// A random point of the closed ball `B(center, r)`, uniform for the
/// Riemannian volume (vertex count in the tree).
pub fn point_in_ball<R: Rng + ?Sized>(center: &Point, r: f64, rng: &mut R) -> Point {
    match center {
        Point::E2(c) => {
            let t = r * rng.gen::<f64>().sqrt();
            let th = rng.gen_range(0.0..TAU);
            Point::E2(E2Point::new(c.x + t * th.cos(), c.y + t * th.sin()))
        }
        Point::H2(c) => Point::H2(h2_in_ball(c, r, rng)),
        Point::T4(w) => {
            let n = r.floor() as usize;
            // 4·3^{k-1} vertices at distance k
            let weights: Vec<f64> = (0..=n).map(|k| if k == 0 { 1.0 } else { 4.0 * 3f64.powi(k as i32 - 1) }).collect();
            let total: f64 = weights.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            let mut k = n;
            for (i, wt) in weights.iter().enumerate() {
                if u < *wt {
                    k = i;
                    break;
                }
                u -= wt;
            }
            Point::T4(w.mul(&reduced_path(k, rng)))
        }
        Point::H2xR(c) => loop {
            let base = h2_in_ball(&c.base, r, rng);
            let h = c.height + rng.gen_range(-r..=r);
            let p = Point::H2xR(ProductPoint::new(base, h));
            if distance(center, &p).expect("same model") <= r {
                break p;
            }
        },
    }
}

fn h2_in_ball<R: Rng + ?Sized>(c: &H2Point, r: f64, rng: &mut R) -> H2Point {
    // area within distance t is 2π(cosh t - 1)
    let u: f64 = rng.gen();
    let t = (1.0 + u * (r.cosh() - 1.0)).acosh().min(r);
    let xi = h2_ideal_at_angle(c, rng.gen_range(0.0..TAU));
    hyperbolic::ray_point(c, &xi, t)
}

/// A random isometry of moderate size, for property tests.
pub fn random_isometry<R: Rng + ?Sized>(model: ModelSpace, rng: &mut R) -> Isometry {
    match model {
        ModelSpace::E2 => Isometry::E2 {
            angle: rng.gen_range(0.0..TAU),
            translation: E2Point::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
        },
        ModelSpace::H2 => Isometry::H2(random_mobius(rng)),
        ModelSpace::T4 => {
            let len = rng.gen_range(0..6);
            Isometry::T4(reduced_path(len, rng))
        }
        ModelSpace::H2xR => Isometry::H2xR { h2: random_mobius(rng), shift: rng.gen_range(-3.0..3.0) },
    }
}

fn random_mobius<R: Rng + ?Sized>(rng: &mut R) -> Mobius {
    let p = H2Point::from_log(rng.gen_range(-3.0..3.0), rng.gen_range(-2.0..2.0));
    Mobius::moving_origin_to(&p).compose(&Mobius::rotation_about_i(rng.gen_range(0.0..TAU)))
}

/// A random point of moderate size, for property tests.
pub fn random_point<R: Rng + ?Sized>(model: ModelSpace, rng: &mut R) -> Point {
    let o = Point::origin(model);
    let xi = boundary_direction(&o, rng);
    let t = if model == ModelSpace::T4 { rng.gen_range(0..8) as f64 } else { rng.gen_range(0.0..4.0) };
    ray_point(&o, &xi, t).expect("same model")
}
