//! The Cayley graph of the free group `F₂ = ⟨a, b⟩`: a 4-regular tree whose
//! vertices are freely reduced words. Letters are written `a, A, b, B` with the
//! capital standing for the inverse.

use std::fmt;

use crate::error::{usage, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' => Some(Letter::A),
            'A' => Some(Letter::AInv),
            'b' => Some(Letter::B),
            'B' => Some(Letter::BInv),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// A freely reduced word, i.e. a vertex of the tree.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Parses a string over `aAbB`, freely reducing it. The empty string and
    /// `"e"` denote the identity.
    pub fn parse(s: &str) -> Result<Self> {
        let mut w = Word::identity();
        if s == "e" {
            return Ok(w);
        }
        for c in s.chars() {
            let l = Letter::from_char(c).ok_or_else(|| usage(format!("invalid letter {c:?} in word {s:?}")))?;
            w.push(l);
        }
        Ok(w)
    }

    /// Builds a word from letters, freely reducing.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut w = Word::identity();
        for l in letters {
            w.push(l);
        }
        w
    }

    pub fn is_reduced(letters: &[Letter]) -> bool {
        letters.windows(2).all(|p| p[1] != p[0].inverse())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Right-multiplies by a letter with free reduction.
    pub fn push(&mut self, l: Letter) {
        if self.0.last() == Some(&l.inverse()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.0.pop()
    }

    pub fn truncate(&mut self, len: usize) {
        self.0.truncate(len);
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.clone();
        for &l in &other.0 {
            out.push(l);
        }
        out
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }

    /// Word metric distance `|u⁻¹v|`.
    pub fn distance(&self, other: &Word) -> u64 {
        let c = self.common_prefix_len(other);
        (self.len() + other.len() - 2 * c) as u64
    }

    /// Splits `w = u c u⁻¹` with `c` cyclically reduced.
    pub fn cyclic_decomposition(&self) -> (Word, Word) {
        let n = self.0.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.0[n - 1 - k] == self.0[k].inverse() {
            k += 1;
        }
        (Word(self.0[..k].to_vec()), Word(self.0[k..n - k].to_vec()))
    }

    /// Length of the cyclic reduction.
    pub fn cyclic_length(&self) -> usize {
        self.cyclic_decomposition().1.len()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

/// A point of the tree's boundary: an infinite reduced word read from the
/// identity, stored as `prefix · period^∞`.
///
/// The representation is kept canonical (primitive period, shortest prefix),
/// so structural equality is equality of ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EndWord {
    prefix: Vec<Letter>,
    period: Vec<Letter>,
}

impl EndWord {
    pub fn new(prefix: Word, period: Word) -> Result<Self> {
        let period = period.0;
        if period.is_empty() {
            return Err(usage("boundary word needs a non-empty periodic tail"));
        }
        if period.len() > 1 && period[period.len() - 1] == period[0].inverse() {
            return Err(usage("periodic tail must be cyclically reduced"));
        }
        if let Some(&l) = prefix.0.last() {
            if l == period[0].inverse() {
                return Err(usage("prefix and periodic tail do not form a reduced word"));
            }
        }
        let mut e = EndWord { prefix: prefix.0, period };
        e.normalize();
        Ok(e)
    }

    /// The end reached by continuing straight past the last letter of
    /// `prefix` (`prefix · l^∞`).
    pub fn straight(prefix: Word) -> Result<Self> {
        let l = prefix.last().ok_or_else(|| usage("cannot extend the empty word"))?;
        EndWord::new(prefix, Word(vec![l]))
    }

    /// `l^∞` for a single letter.
    pub fn power(l: Letter) -> Self {
        EndWord { prefix: Vec::new(), period: vec![l] }
    }

    pub fn prefix(&self) -> Word {
        Word(self.prefix.clone())
    }

    pub fn period(&self) -> Word {
        Word(self.period.clone())
    }

    pub fn letter(&self, i: usize) -> Letter {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    /// The vertex at distance `n` from the identity along this end.
    pub fn truncate(&self, n: usize) -> Word {
        Word((0..n).map(|i| self.letter(i)).collect())
    }

    /// Length of the common prefix with a finite word.
    pub fn common_prefix_len(&self, w: &Word) -> usize {
        w.0.iter().enumerate().take_while(|(i, &l)| self.letter(*i) == l).count()
    }

    /// Length of the common prefix of two distinct ends; `None` if equal.
    pub fn confluence(&self, other: &EndWord) -> Option<usize> {
        if self == other {
            return None;
        }
        let mut i = 0;
        while self.letter(i) == other.letter(i) {
            i += 1;
        }
        Some(i)
    }

    /// `g · ξ` with free reduction.
    pub fn left_mul(&self, g: &Word) -> EndWord {
        let gl = g.letters();
        let mut k = 0;
        while k < gl.len() && gl[gl.len() - 1 - k].inverse() == self.letter(k) {
            k += 1;
        }
        let (mut prefix, period) = if k <= self.prefix.len() {
            (self.prefix[k..].to_vec(), self.period.clone())
        } else {
            let r = (k - self.prefix.len()) % self.period.len();
            let mut p = self.period.clone();
            p.rotate_left(r);
            (Vec::new(), p)
        };
        let mut out = gl[..gl.len() - k].to_vec();
        out.append(&mut prefix);
        let mut e = EndWord { prefix: out, period };
        e.normalize();
        e
    }

    fn normalize(&mut self) {
        let p = self.period.len();
        for d in 1..=p {
            if p.is_multiple_of(d) && (d..p).all(|i| self.period[i] == self.period[i - d]) {
                self.period.truncate(d);
                break;
            }
        }
        while let Some(&l) = self.prefix.last() {
            if l != *self.period.last().unwrap() {
                break;
            }
            self.prefix.pop();
            self.period.rotate_right(1);
        }
    }
}

impl fmt::Display for EndWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.prefix {
            write!(f, "{}", l.to_char())?;
        }
        write!(f, "(")?;
        for l in &self.period {
            write!(f, "{}", l.to_char())?;
        }
        write!(f, ")^inf")
    }
}

/// Vertex at distance `t` from `x` on the ray towards `xi`.
pub fn ray_point(x: &Word, xi: &EndWord, t: u64) -> Word {
    let c = xi.common_prefix_len(x);
    let up = (x.len() - c) as u64;
    if t <= up {
        x.prefix(x.len() - t as usize)
    } else {
        xi.truncate(c + (t - up) as usize)
    }
}

/// End of the ray from `x` through `y` continued straight past `y`.
pub fn direction(x: &Word, y: &Word) -> Option<EndWord> {
    let step = x.inverse().mul(y);
    let c = step.last()?;
    let mut prefix = y.clone();
    while prefix.last() == Some(c.inverse()) {
        prefix.pop();
    }
    Some(EndWord::new(prefix, Word(vec![c])).expect("straight extension is reduced"))
}

/// Busemann function of the ray towards `xi`, normalised at `x`.
pub fn horofunction(xi: &EndWord, x: &Word, z: &Word) -> i64 {
    let level = |w: &Word| w.len() as i64 - 2 * xi.common_prefix_len(w) as i64;
    level(z) - level(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn parse_reduces() {
        assert_eq!(w("abBa").to_string(), "aa");
        assert_eq!(w("aA").to_string(), "e");
        assert!(Word::parse("abc").is_err());
    }

    #[test]
    fn adjacent_vertices() {
        assert_eq!(w("ab").distance(&w("abb")), 1);
        assert_eq!(w("ab").distance(&w("ba")), 4);
    }

    #[test]
    fn cyclic_reduction() {
        let (u, c) = w("abA").cyclic_decomposition();
        assert_eq!(u, w("a"));
        assert_eq!(c, w("b"));
        assert_eq!(w("abab").cyclic_length(), 4);
        assert_eq!(w("a").cyclic_length(), 1);
    }

    #[test]
    fn ends_are_canonical() {
        let e1 = EndWord::new(w("aaa"), w("a")).unwrap();
        assert_eq!(e1, EndWord::power(Letter::A));
        let e2 = EndWord::new(w("bab"), w("abab")).unwrap();
        assert_eq!(e2, EndWord::new(w(""), w("ba")).unwrap());
        assert!(EndWord::new(w("A"), w("a")).is_err());
        assert!(EndWord::new(w(""), w("aA")).is_err());
    }

    #[test]
    fn left_multiplication_cancels_into_the_period() {
        let e = EndWord::new(w("b"), w("a")).unwrap();
        assert_eq!(e.left_mul(&w("B")), EndWord::power(Letter::A));
        assert_eq!(e.left_mul(&w("AAB")), EndWord::power(Letter::A));
        assert_eq!(e.left_mul(&w("ba")).truncate(4), w("babaa").prefix(4));
    }

    #[test]
    fn straight_direction() {
        let d = direction(&w(""), &w("abba")).unwrap();
        assert_eq!(d.truncate(3), w("abb"));
        // towards the root and beyond
        let d = direction(&w("aa"), &w("a")).unwrap();
        assert_eq!(d, EndWord::power(Letter::AInv));
    }

    #[test]
    fn tree_busemann_matches_limit() {
        let xi = EndWord::new(w("ab"), w("a")).unwrap();
        let x = w("B");
        for z in ["", "a", "ab", "aba", "b", "BB", "abb"] {
            let z = w(z);
            let t = 40;
            let far = ray_point(&x, &xi, t);
            let lim = far.distance(&z) as i64 - t as i64;
            assert_eq!(horofunction(&xi, &x, &z), lim);
        }
    }
}
