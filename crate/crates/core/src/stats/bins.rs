//! Partitions of the boundary used for hitting histograms.
//!
//! Circle boundaries are cut into equal arcs (H² via the Cayley angle seen
//! from `i`), the tree boundary into cylinders of ends sharing a prefix from
//! the identity, and `∂(H² × ℝ)` into arcs times bands of equal `sin α`.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::geometry::{BoundaryPoint, EndWord, Ideal, Letter, ModelSpace, ProductIdeal, Word};
use crate::sampling::{reduced_path, TREE_DIRECTION_DEPTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum BinScheme {
    Angular { count: usize },
    Cylinder { length: usize },
    Product { angular: usize, slope: usize },
}

impl BinScheme {
    /// The default scheme per model.
    pub fn default_for(model: ModelSpace) -> BinScheme {
        match model {
            ModelSpace::E2 | ModelSpace::H2 => BinScheme::Angular { count: 16 },
            ModelSpace::T4 => BinScheme::Cylinder { length: 2 },
            ModelSpace::H2xR => BinScheme::Product { angular: 8, slope: 4 },
        }
    }

    pub fn check(&self, model: ModelSpace) -> Result<()> {
        let ok = match (self, model) {
            (BinScheme::Angular { count }, ModelSpace::E2 | ModelSpace::H2) => *count > 0,
            (BinScheme::Cylinder { length }, ModelSpace::T4) => (1..=12).contains(length),
            (BinScheme::Product { angular, slope }, ModelSpace::H2xR) => *angular > 0 && *slope > 0,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(usage(format!("bin scheme {self:?} does not fit {model}")))
        }
    }

    pub fn count(&self) -> usize {
        match *self {
            BinScheme::Angular { count } => count,
            BinScheme::Cylinder { length } => 4 * 3usize.pow(length as u32 - 1),
            BinScheme::Product { angular, slope } => angular * slope,
        }
    }

    pub fn index(&self, xi: &BoundaryPoint) -> Result<usize> {
        Ok(match (*self, xi) {
            (BinScheme::Angular { count }, BoundaryPoint::E2(t)) => arc(*t, count),
            (BinScheme::Angular { count }, BoundaryPoint::H2(i)) => arc(i.cayley_angle(), count),
            (BinScheme::Cylinder { length }, BoundaryPoint::T4(e)) => cylinder_index(&e.truncate(length)),
            (BinScheme::Product { angular, slope }, BoundaryPoint::H2xR(p)) => {
                let a = p.xi.map(|i| arc(i.cayley_angle(), angular)).unwrap_or(0);
                let s = (((p.slope.sin() + 1.0) / 2.0 * slope as f64).floor() as usize).min(slope - 1);
                a * slope + s
            }
            _ => return Err(usage(format!("bin scheme {self:?} does not fit {}", xi.model()))),
        })
    }

    pub fn label(&self, i: usize) -> String {
        match *self {
            BinScheme::Angular { count } => {
                let w = TAU / count as f64;
                format!("[{:.6},{:.6})", i as f64 * w, (i + 1) as f64 * w)
            }
            BinScheme::Cylinder { length } => cylinder_word(i, length).to_string(),
            BinScheme::Product { angular, slope } => {
                let (a, s) = (i / slope, i % slope);
                let w = TAU / angular as f64;
                let h = 2.0 / slope as f64;
                format!(
                    "[{:.6},{:.6})x[{:.6},{:.6})",
                    a as f64 * w,
                    (a + 1) as f64 * w,
                    -1.0 + s as f64 * h,
                    -1.0 + (s + 1) as f64 * h
                )
            }
        }
    }

    /// A random boundary point of bin `i`: uniform in the angle (and in
    /// `sin α`), or a uniformly random end of the cylinder.
    pub fn sample<R: Rng + ?Sized>(&self, model: ModelSpace, i: usize, rng: &mut R) -> BoundaryPoint {
        self.sample_with(model, i, None, rng)
    }

    /// Next-letter frequencies `P(t | s)` read off cylinder masses: every
    /// adjacent pair `st` inside a bin word contributes that bin's mass. For
    /// a nearest-neighbour walk on `F₂` the hitting measure is Markov, so
    /// these are its exact transition probabilities. `None` for other schemes
    /// or cylinders of length 1, which carry no pair information.
    pub fn transitions(&self, masses: &[f64]) -> Option<Transitions> {
        let BinScheme::Cylinder { length } = *self else {
            return None;
        };
        if length < 2 || masses.len() != self.count() {
            return None;
        }
        let mut num = [[0.0; 4]; 4];
        let mut den = [0.0; 4];
        for (i, &m) in masses.iter().enumerate() {
            let w = cylinder_word(i, length);
            for pair in w.letters().windows(2) {
                num[pair[0].index()][pair[1].index()] += m;
                den[pair[0].index()] += m;
            }
        }
        let mut p = [[0.0; 4]; 4];
        for s in Letter::ALL {
            let row = &mut p[s.index()];
            if den[s.index()] > 0.0 {
                for t in 0..4 {
                    row[t] = num[s.index()][t] / den[s.index()];
                }
            } else {
                for t in successors(s) {
                    row[t.index()] = 1.0 / 3.0;
                }
            }
        }
        Some(Transitions(p))
    }

    /// Like [`BinScheme::sample`], but cylinder ends continue with letters
    /// drawn from `transitions` when given.
    pub fn sample_with<R: Rng + ?Sized>(
        &self,
        model: ModelSpace,
        i: usize,
        transitions: Option<&Transitions>,
        rng: &mut R,
    ) -> BoundaryPoint {
        match *self {
            BinScheme::Angular { count } => {
                let t = (i as f64 + rng.gen::<f64>()) * TAU / count as f64;
                match model {
                    ModelSpace::E2 => BoundaryPoint::e2(t),
                    _ => BoundaryPoint::H2(Ideal::from_cayley_angle(t)),
                }
            }
            BinScheme::Cylinder { length } => {
                let prefix = cylinder_word(i, length);
                let last = prefix.last().expect("length ≥ 1");
                let mut w = prefix.clone();
                match transitions {
                    Some(tr) => {
                        let mut prev = last;
                        for _ in 0..TREE_DIRECTION_DEPTH {
                            prev = tr.next(prev, rng);
                            w.push(prev);
                        }
                    }
                    // continue without backtracking
                    None => loop {
                        let tail = reduced_path(TREE_DIRECTION_DEPTH, rng);
                        if tail.letters()[0] != last.inverse() {
                            for &l in tail.letters() {
                                w.push(l);
                            }
                            break;
                        }
                    },
                }
                BoundaryPoint::T4(EndWord::straight(w).expect("nonempty"))
            }
            BinScheme::Product { angular, slope } => {
                let (a, s) = (i / slope, i % slope);
                let t = (a as f64 + rng.gen::<f64>()) * TAU / angular as f64;
                let sin = -1.0 + (s as f64 + rng.gen::<f64>()) * 2.0 / slope as f64;
                BoundaryPoint::H2xR(
                    ProductIdeal::new(Some(Ideal::from_cayley_angle(t)), sin.clamp(-1.0, 1.0).asin(), 0.0)
                        .unwrap_or(ProductIdeal::pole(sin > 0.0)),
                )
            }
        }
    }
}

/// Row-stochastic next-letter probabilities indexed by [`Letter::index`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transitions(pub [[f64; 4]; 4]);

impl Transitions {
    /// A letter following `prev`; never its inverse.
    pub fn next<R: Rng + ?Sized>(&self, prev: Letter, rng: &mut R) -> Letter {
        let row = &self.0[prev.index()];
        let allowed = successors(prev);
        let total: f64 = allowed.iter().map(|l| row[l.index()]).sum();
        if !(total > 0.0) {
            return allowed[rng.gen_range(0..3)];
        }
        let mut u = rng.gen::<f64>() * total;
        for l in allowed {
            u -= row[l.index()];
            if u < 0.0 {
                return l;
            }
        }
        allowed[2]
    }
}

fn arc(theta: f64, count: usize) -> usize {
    let t = theta.rem_euclid(TAU);
    ((t / TAU * count as f64).floor() as usize).min(count - 1)
}

/// Letters allowed after `prev`, in a fixed order.
fn successors(prev: Letter) -> [Letter; 3] {
    let mut out = [Letter::A; 3];
    let mut k = 0;
    for l in Letter::ALL {
        if l != prev.inverse() {
            out[k] = l;
            k += 1;
        }
    }
    out
}

fn cylinder_index(w: &Word) -> usize {
    let ls = w.letters();
    let mut idx = ls[0].index();
    for pair in ls.windows(2) {
        let pos = successors(pair[0]).iter().position(|l| *l == pair[1]).expect("reduced");
        idx = idx * 3 + pos;
    }
    idx
}

fn cylinder_word(mut idx: usize, length: usize) -> Word {
    let mut digits = Vec::with_capacity(length);
    for _ in 1..length {
        digits.push(idx % 3);
        idx /= 3;
    }
    let mut letters = vec![Letter::ALL[idx]];
    for d in digits.into_iter().rev() {
        let prev = *letters.last().expect("nonempty");
        letters.push(successors(prev)[d]);
    }
    Word::from_letters(letters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cylinder_round_trip() {
        for length in 1..=4 {
            let scheme = BinScheme::Cylinder { length };
            for i in 0..scheme.count() {
                let w = cylinder_word(i, length);
                assert_eq!(w.len(), length);
                assert_eq!(cylinder_index(&w), i);
            }
        }
        assert_eq!(BinScheme::Cylinder { length: 2 }.count(), 12);
    }

    #[test]
    fn samples_land_in_their_bin() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (model, scheme) in [
            (ModelSpace::E2, BinScheme::Angular { count: 7 }),
            (ModelSpace::H2, BinScheme::Angular { count: 9 }),
            (ModelSpace::T4, BinScheme::Cylinder { length: 3 }),
            (ModelSpace::H2xR, BinScheme::Product { angular: 5, slope: 3 }),
        ] {
            scheme.check(model).unwrap();
            for i in 0..scheme.count() {
                for _ in 0..20 {
                    let xi = scheme.sample(model, i, &mut rng);
                    assert_eq!(scheme.index(&xi).unwrap(), i, "{model} bin {i}");
                }
            }
        }
        assert!(BinScheme::Cylinder { length: 2 }.check(ModelSpace::H2).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(BinScheme::Cylinder { length: 2 }.label(0), "aa");
        assert_eq!(BinScheme::Angular { count: 4 }.label(0), "[0.000000,1.570796)");
    }

    #[test]
    fn transitions_follow_pair_masses() {
        let scheme = BinScheme::Cylinder { length: 2 };
        assert!(BinScheme::Cylinder { length: 1 }.transitions(&[0.25; 4]).is_none());
        // All mass on "aa" and "ab": after a, a and b are equally likely.
        let mut masses = vec![0.0; scheme.count()];
        masses[0] = 0.5;
        masses[1] = 0.5;
        assert_eq!(scheme.label(1), "ab");
        let tr = scheme.transitions(&masses).unwrap();
        assert_eq!(tr.0[Letter::A.index()][Letter::A.index()], 0.5);
        assert_eq!(tr.0[Letter::A.index()][Letter::B.index()], 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..scheme.count() {
            for _ in 0..20 {
                let xi = scheme.sample_with(ModelSpace::T4, i, Some(&tr), &mut rng);
                assert_eq!(scheme.index(&xi).unwrap(), i);
                let BoundaryPoint::T4(e) = xi else { unreachable!() };
                if i == 0 {
                    assert!(matches!(e.letter(2), Letter::A | Letter::B));
                }
            }
        }
    }
}
