//! `PSL(2, ℝ)` acting on the upper half-plane.
//!
//! Products of thousands of random generators have entries around `e^{n λ/2}`,
//! so a matrix is stored as `2^exp · m` with `m` rescaled by exact powers of
//! two whenever it drifts out of `[2^-32, 2^32]`. The true determinant is always
//! 1; the stored `det m = 4^{-exp}` is never recomputed from the entries.

use std::f64::consts::LN_2;

use crate::geometry::hyperbolic::{H2Point, Ideal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    m: [f64; 4],
    exp: i32,
}

impl Mobius {
    pub const IDENTITY: Mobius = Mobius { m: [1.0, 0.0, 0.0, 1.0], exp: 0 };

    /// Builds `[[a, b], [c, d]]`, checking `det = 1` to within `tol`.
    pub fn from_matrix(m: [f64; 4], tol: f64) -> Option<Mobius> {
        if m.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let det = m[0] * m[3] - m[1] * m[2];
        if (det - 1.0).abs() > tol.max(1e-12) * m.iter().map(|v| v * v).sum::<f64>().max(1.0) {
            return None;
        }
        let mut g = Mobius { m, exp: 0 };
        g.normalize();
        Some(g)
    }

    /// Diagonal `[[λ, 0], [0, 1/λ]]`.
    pub fn diagonal(lambda: f64) -> Mobius {
        Mobius::from_matrix([lambda, 0.0, 0.0, 1.0 / lambda], 1e-9).expect("diagonal has det 1")
    }

    /// Entries of the actual matrix. Overflows for very long products.
    pub fn matrix(&self) -> [f64; 4] {
        let s = 2f64.powi(self.exp);
        [self.m[0] * s, self.m[1] * s, self.m[2] * s, self.m[3] * s]
    }

    /// `ln` of the largest absolute entry.
    pub fn ln_norm(&self) -> f64 {
        let mx = self.m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        mx.ln() + self.exp as f64 * LN_2
    }

    fn normalize(&mut self) {
        let mx = self.m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if mx > 2f64.powi(32) || mx < 2f64.powi(-32) {
            let k = mx.log2().floor() as i32;
            let s = 2f64.powi(-k);
            for v in &mut self.m {
                *v *= s;
            }
            self.exp += k;
        }
        // first nonzero entry positive
        if let Some(&first) = self.m.iter().find(|v| **v != 0.0) {
            if first < 0.0 {
                for v in &mut self.m {
                    *v = -*v;
                }
            }
        }
    }

    /// `det m`, known from the true determinant being 1.
    fn stored_det(&self) -> f64 {
        2f64.powi(-2 * self.exp)
    }

    pub fn compose(&self, other: &Mobius) -> Mobius {
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = other.m;
        let mut out =
            Mobius { m: [a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h], exp: self.exp + other.exp };
        out.normalize();
        out
    }

    pub fn inverse(&self) -> Mobius {
        let [a, b, c, d] = self.m;
        let mut out = Mobius { m: [d, -b, -c, a], exp: self.exp };
        out.normalize();
        out
    }

    /// Comparison in `PSL(2, ℝ)`: entries agree up to `tol` after dividing by the
    /// largest one, and the scales agree in log.
    pub fn approx_eq(&self, other: &Mobius, tol: f64) -> bool {
        let unit = |g: &Mobius| {
            let mx = g.m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let mut u = g.m.map(|v| v / mx);
            if let Some(&first) = u.iter().find(|v| v.abs() > 1e-12) {
                if first < 0.0 {
                    u = u.map(|v| -v);
                }
            }
            (u, mx.ln() + g.exp as f64 * LN_2)
        };
        let (u, lu) = unit(self);
        let (v, lv) = unit(other);
        (lu - lv).abs() <= tol && u.iter().zip(&v).all(|(p, q)| (p - q).abs() <= tol)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&Mobius::IDENTITY, tol)
    }

    /// `|trace|` in log form.
    pub fn ln_abs_trace(&self) -> f64 {
        (self.m[0] + self.m[3]).abs().ln() + self.exp as f64 * LN_2
    }

    pub fn abs_trace(&self) -> f64 {
        self.ln_abs_trace().exp()
    }

    /// Translation length `2 arccosh(|tr|/2)` for hyperbolic elements, else 0.
    pub fn translation_length(&self) -> f64 {
        let ln_half = self.ln_abs_trace() - LN_2;
        if ln_half <= 0.0 {
            0.0
        } else if ln_half > 20.0 {
            2.0 * (ln_half + LN_2)
        } else {
            2.0 * ln_half.exp().acosh()
        }
    }

    pub fn apply(&self, z: &H2Point) -> H2Point {
        if *self == Mobius::IDENTITY {
            return *z;
        }
        let [a, b, c, d] = self.m;
        let p = c * z.x + d;
        let q = a * z.x + b;
        let (re, ln_den) = if z.ln_y >= 0.0 {
            let inv = (-2.0 * z.ln_y).exp();
            let num = q * p * inv + a * c;
            let den = p * p * inv + c * c;
            (num / den, 2.0 * z.ln_y + den.ln())
        } else {
            let y2 = (2.0 * z.ln_y).exp();
            let num = q * p + a * c * y2;
            let den = p * p + c * c * y2;
            (num / den, den.ln())
        };
        // Im w = y det / |cz + d|², det = 1 in true scale.
        H2Point::from_log(re, z.ln_y - ln_den - 2.0 * self.exp as f64 * LN_2)
    }

    pub fn apply_ideal(&self, xi: &Ideal) -> Ideal {
        let [a, b, c, d] = self.m;
        match *xi {
            Ideal::Infinity => {
                if c == 0.0 {
                    Ideal::Infinity
                } else {
                    finite_or_infinity(a / c)
                }
            }
            Ideal::Finite(x) => {
                let den = c * x + d;
                if den == 0.0 {
                    Ideal::Infinity
                } else {
                    finite_or_infinity((a * x + b) / den)
                }
            }
        }
    }

    /// Fixed points `(repelling, attracting)` of a hyperbolic element.
    pub fn fixed_points(&self) -> Option<(Ideal, Ideal)> {
        let [a, b, c, d] = self.m;
        let scale = self.m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if c.abs() <= 1e-300 * scale.max(1.0) || c == 0.0 {
            if a == d {
                return None;
            }
            let other = Ideal::Finite(b / (d - a));
            return Some(if a.abs() > d.abs() { (other, Ideal::Infinity) } else { (Ideal::Infinity, other) });
        }
        let disc = (a + d) * (a + d) - 4.0 * self.stored_det();
        if disc <= 0.0 {
            return None;
        }
        // c ξ² + (d - a) ξ - b = 0
        let bq = d - a;
        let sq = disc.sqrt();
        let q = -0.5 * (bq + if bq >= 0.0 { sq } else { -sq });
        let r1 = q / c;
        let r2 = if q != 0.0 { -b / q } else { -r1 };
        let mult = |x: f64| (c * x + d).abs();
        let (rep, att) = if mult(r1) > mult(r2) { (r2, r1) } else { (r1, r2) };
        Some((finite_or_infinity(rep), finite_or_infinity(att)))
    }

    /// The fixed point in `H²` of an elliptic element.
    pub fn elliptic_fixed_point(&self) -> Option<H2Point> {
        let [a, _b, c, d] = self.m;
        let disc = 4.0 * self.stored_det() - (a + d) * (a + d);
        if c == 0.0 || disc <= 0.0 {
            return None;
        }
        // z = ((a - d) + i sqrt(disc)) / (2c), choosing Im z > 0
        let x = (a - d) / (2.0 * c);
        let y = disc.sqrt() / (2.0 * c.abs());
        H2Point::new(x, y)
    }

    pub fn rotation_about_i(phi: f64) -> Mobius {
        let (s, c) = (0.5 * phi).sin_cos();
        let mut g = Mobius { m: [c, s, -s, c], exp: 0 };
        g.normalize();
        g
    }

    /// The element `z ↦ x + y z` moving `i` to `p`; only for moderate heights.
    pub fn moving_origin_to(p: &H2Point) -> Mobius {
        let half = 0.5 * p.ln_y;
        let r = half.exp();
        let mut g = Mobius { m: [r, p.x / r, 0.0, 1.0 / r], exp: 0 };
        g.normalize();
        g
    }

    pub fn is_valid(&self) -> bool {
        self.m.iter().all(|v| v.is_finite())
    }
}

fn finite_or_infinity(v: f64) -> Ideal {
    if v.is_finite() {
        Ideal::Finite(v)
    } else {
        Ideal::Infinity
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hyperbolic::distance;

    /// `cosh d(i, g i) = |g|²/2` for the Frobenius norm, evaluated in log form.
    #[test]
    fn long_products_stay_finite() {
        let g = Mobius::diagonal(2.0);
        let h = Mobius::from_matrix([1.0, 1.0, 1.0, 2.0], 1e-12).unwrap();
        let h_inv = h.inverse();
        let mut z = Mobius::IDENTITY;
        for k in 0..4000 {
            z = z.compose(if k % 3 == 0 { &g } else { &h_inv });
        }
        let p = z.apply(&H2Point::origin());
        assert!(p.is_valid());
        let d = distance(&H2Point::origin(), &p);
        let ln_fro2 = z.m.iter().map(|v| v * v).sum::<f64>().ln() + 2.0 * z.exp as f64 * LN_2;
        // arccosh(c) = ln(2c) - O(c^-2)
        assert!((d - ln_fro2).abs() < 1e-9 * d, "{d} vs {ln_fro2}");
        assert!(d > 1000.0);
    }

    #[test]
    fn fixed_points_of_diagonal() {
        let (rep, att) = Mobius::diagonal(2.0).fixed_points().unwrap();
        assert_eq!(rep, Ideal::Finite(0.0));
        assert_eq!(att, Ideal::Infinity);
        let (rep, att) = Mobius::diagonal(2.0).inverse().fixed_points().unwrap();
        assert_eq!(rep, Ideal::Infinity);
        assert_eq!(att, Ideal::Finite(0.0));
    }

    #[test]
    fn fixed_points_are_fixed() {
        let h = Mobius::from_matrix([1.0, 1.0, 1.0, 2.0], 1e-12).unwrap();
        let (rep, att) = h.fixed_points().unwrap();
        assert!(h.apply_ideal(&rep).approx_eq(&rep, 1e-12));
        assert!(h.apply_ideal(&att).approx_eq(&att, 1e-12));
        // attracting: iterates of a generic point approach it
        let mut x = Ideal::Finite(-7.0);
        for _ in 0..60 {
            x = h.apply_ideal(&x);
        }
        assert!(x.approx_eq(&att, 1e-9));
    }

    #[test]
    fn sign_is_normalised() {
        let g = Mobius::from_matrix([-2.0, 0.0, 0.0, -0.5], 1e-12).unwrap();
        assert_eq!(g, Mobius::diagonal(2.0));
    }

    #[test]
    fn elliptic_fixed_point() {
        let r = Mobius::rotation_about_i(1.0);
        let p = r.elliptic_fixed_point().unwrap();
        assert!((p.x).abs() < 1e-12 && p.ln_y.abs() < 1e-12);
    }
}
