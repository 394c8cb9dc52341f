//! Finitely supported step distributions and the random walk `Z_n = ω₁ ⋯ ω_n`.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{same_model, LabError, Result};
use crate::geometry::{distance, BoundaryPoint, ModelSpace, Point, Tolerance, Word};
use crate::isometry::Isometry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub isometry: Isometry,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct StepDistribution {
    model: ModelSpace,
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    model: ModelSpace,
    atoms: Vec<Atom>,
}

impl TryFrom<DistributionRepr> for StepDistribution {
    type Error = LabError;

    fn try_from(r: DistributionRepr) -> Result<Self> {
        StepDistribution::new(r.model, r.atoms)
    }
}

impl From<StepDistribution> for DistributionRepr {
    fn from(d: StepDistribution) -> Self {
        DistributionRepr { model: d.model, atoms: d.atoms }
    }
}

pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

impl StepDistribution {
    pub fn new(model: ModelSpace, atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(LabError::Validation("step distribution has no atoms".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.isometry.model() != model {
                return Err(LabError::Validation(format!(
                    "atom {i} lives in {}, distribution is over {model}",
                    a.isometry.model()
                )));
            }
            if !(a.p > 0.0 && a.p.is_finite()) {
                return Err(LabError::Validation(format!("atom {i} has non-positive probability {}", a.p)));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.p).sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(LabError::Validation(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { model, atoms })
    }

    /// Equal weights on `gs`.
    pub fn uniform(gs: Vec<Isometry>) -> Result<Self> {
        let model = gs.first().map(Isometry::model).ok_or_else(|| LabError::Validation("no atoms".into()))?;
        let p = 1.0 / gs.len() as f64;
        let mut atoms: Vec<Atom> = gs.into_iter().map(|isometry| Atom { isometry, p }).collect();
        // absorb rounding so the sum is 1 to the last bit
        let rest: f64 = atoms[1..].iter().map(|a| a.p).sum();
        atoms[0].p = 1.0 - rest;
        Self::new(model, atoms)
    }

    /// A single deterministic atom.
    pub fn dirac(g: Isometry) -> Self {
        Self { model: g.model(), atoms: vec![Atom { isometry: g, p: 1.0 }] }
    }

    pub fn model(&self) -> ModelSpace {
        self.model
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn isometry(&self, i: usize) -> &Isometry {
        &self.atoms[i].isometry
    }

    fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(self.atoms.iter().map(|a| a.p)).expect("validated weights")
    }

    /// Whether the support is closed under inverses.
    pub fn is_symmetric(&self, tol: Tolerance) -> bool {
        self.atoms.iter().all(|a| {
            let inv = a.isometry.inverse();
            self.atoms.iter().any(|b| b.isometry.approx_eq(&inv, tol))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub depth: usize,
    pub elements_reached: usize,
    pub symmetric_closure_hit: bool,
    pub certified: bool,
    /// Set when the closure hit the element cap before `depth`.
    pub truncated: bool,
}

pub const CLOSURE_ELEMENT_CAP: usize = 200_000;
const CONTINUOUS_CLOSURE_CAP: usize = 4_000;

/// Bounded-depth certificate that the support generates a group as a
/// semigroup: every atom's inverse is a product of at most `depth` atoms.
pub fn validate_distribution(spec: &StepDistribution, depth: usize, tol: Tolerance) -> Result<AdmissibilityReport> {
    let total: f64 = spec.atoms.iter().map(|a| a.p).sum();
    if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
        return Err(LabError::Validation(format!("probabilities sum to {total}, not 1")));
    }
    let gens: Vec<&Isometry> = spec.atoms.iter().map(|a| &a.isometry).collect();
    let inverses: Vec<Isometry> = gens.iter().map(|g| g.inverse()).collect();
    let mut found = vec![false; gens.len()];
    let mut truncated = false;
    let elements_reached;

    if spec.model == ModelSpace::T4 {
        let words: Vec<Word> = gens.iter().map(|g| as_word(g)).collect();
        let targets: Vec<Word> = inverses.iter().map(as_word).collect();
        let mut seen: HashSet<Word> = HashSet::new();
        let mut frontier: Vec<Word> = Vec::new();
        for w in &words {
            if seen.insert(w.clone()) {
                frontier.push(w.clone());
            }
        }
        for _ in 1..depth {
            if frontier.is_empty() || seen.len() >= CLOSURE_ELEMENT_CAP {
                truncated = seen.len() >= CLOSURE_ELEMENT_CAP;
                break;
            }
            let mut next = Vec::new();
            'outer: for f in &frontier {
                for w in &words {
                    let p = f.mul(w);
                    if seen.insert(p.clone()) {
                        next.push(p);
                        if seen.len() >= CLOSURE_ELEMENT_CAP {
                            break 'outer;
                        }
                    }
                }
            }
            frontier = next;
        }
        for (i, t) in targets.iter().enumerate() {
            found[i] = seen.contains(t);
        }
        elements_reached = seen.len();
    } else {
        let mut seen: Vec<Isometry> = Vec::new();
        let mut frontier: Vec<Isometry> = Vec::new();
        let insert = |g: Isometry, seen: &mut Vec<Isometry>| -> Option<Isometry> {
            if seen.iter().any(|h| h.approx_eq(&g, tol)) {
                None
            } else {
                seen.push(g.clone());
                Some(g)
            }
        };
        for g in &gens {
            if let Some(g) = insert((*g).clone(), &mut seen) {
                frontier.push(g);
            }
        }
        for _ in 1..depth {
            if frontier.is_empty() || seen.len() >= CONTINUOUS_CLOSURE_CAP {
                truncated = seen.len() >= CONTINUOUS_CLOSURE_CAP;
                break;
            }
            let mut next = Vec::new();
            'outer2: for f in &frontier {
                for g in &gens {
                    if let Some(p) = insert(f.compose(g)?, &mut seen) {
                        next.push(p);
                        if seen.len() >= CONTINUOUS_CLOSURE_CAP {
                            break 'outer2;
                        }
                    }
                }
            }
            frontier = next;
        }
        for (i, t) in inverses.iter().enumerate() {
            found[i] = seen.iter().any(|h| h.approx_eq(t, tol));
        }
        elements_reached = seen.len();
    }

    Ok(AdmissibilityReport {
        depth,
        elements_reached,
        symmetric_closure_hit: spec.is_symmetric(tol),
        certified: found.iter().all(|&f| f),
        truncated,
    })
}

fn as_word(g: &Isometry) -> Word {
    match g {
        Isometry::T4(w) => w.clone(),
        _ => unreachable!("tree distribution"),
    }
}

/// Generator for sample path `path` of a run seeded with `seed`: a ChaCha8
/// stream per path, consumed one draw per step.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Streaming sampler holding only the current product `Z_k`.
pub struct Walker<'a> {
    spec: &'a StepDistribution,
    sampler: WeightedIndex<f64>,
    rng: ChaCha8Rng,
    product: Isometry,
    steps: u64,
}

impl<'a> Walker<'a> {
    pub fn new(spec: &'a StepDistribution, seed: u64, path: u64) -> Self {
        Self {
            spec,
            sampler: spec.sampler(),
            rng: path_rng(seed, path),
            product: Isometry::identity(spec.model),
            steps: 0,
        }
    }

    /// Draws `ω_{k+1}` and sets `Z_{k+1} = Z_k ω_{k+1}`; returns the atom index.
    pub fn step(&mut self) -> usize {
        let i = self.sampler.sample(&mut self.rng);
        self.product.right_multiply(&self.spec.atoms[i].isometry).expect("validated model");
        self.steps += 1;
        i
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn product(&self) -> &Isometry {
        &self.product
    }

    pub fn position(&self, x: &Point) -> Point {
        self.product.apply(x).expect("validated model")
    }
}

/// A sampled path. Positions are stored at `steps` (every `stride`-th step
/// plus the last); increments are stored for every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkTrace {
    pub seed: u64,
    pub path: u64,
    pub basepoint: Point,
    pub spec: StepDistribution,
    pub increments: Vec<u32>,
    pub steps: Vec<u64>,
    pub positions: Vec<Point>,
}

impl WalkTrace {
    pub fn len(&self) -> u64 {
        self.increments.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn final_position(&self) -> &Point {
        self.positions.last().expect("positions[0] is the basepoint")
    }

    /// Position at step `k` if it was stored.
    pub fn position_at(&self, k: u64) -> Option<&Point> {
        self.steps.binary_search(&k).ok().map(|i| &self.positions[i])
    }

    /// Columns: step, increment_index, position components, distance to the basepoint.
    pub fn to_csv(&self) -> String {
        let model = self.basepoint.model();
        let mut out = String::from("step,increment_index");
        for c in Point::component_names(model) {
            out.push(',');
            out.push_str(c);
        }
        out.push_str(",distance\n");
        for (k, p) in self.steps.iter().zip(&self.positions) {
            let inc = if *k == 0 { String::new() } else { self.increments[*k as usize - 1].to_string() };
            let d = distance(&self.basepoint, p).expect("same model");
            let _ = write!(out, "{k},{inc}");
            for c in p.components() {
                let _ = write!(out, ",{c}");
            }
            let _ = writeln!(out, ",{d}");
        }
        out
    }
}

pub fn sample_walk(spec: &StepDistribution, x: &Point, n: u64, seed: u64) -> Result<WalkTrace> {
    sample_path(spec, x, n, seed, 0, 1)
}

/// Sample path `path` of the run seeded with `seed`, storing every
/// `stride`-th position.
pub fn sample_path(spec: &StepDistribution, x: &Point, n: u64, seed: u64, path: u64, stride: u64) -> Result<WalkTrace> {
    same_model(spec.model, x.model())?;
    let stride = stride.max(1);
    let mut walker = Walker::new(spec, seed, path);
    let mut increments = Vec::with_capacity(n as usize);
    let cap = (n / stride + 2) as usize;
    let mut steps = Vec::with_capacity(cap);
    let mut positions = Vec::with_capacity(cap);
    steps.push(0);
    positions.push(x.clone());
    for k in 1..=n {
        increments.push(walker.step() as u32);
        if k % stride == 0 || k == n {
            steps.push(k);
            positions.push(walker.position(x));
        }
    }
    Ok(WalkTrace { seed, path, basepoint: x.clone(), spec: spec.clone(), increments, steps, positions })
}

/// `Z_k⁻¹ x` for `k = 0..=n`, via `Z_k⁻¹ = ω_k⁻¹ Z_{k-1}⁻¹`.
pub fn inverse_walk_positions(trace: &WalkTrace) -> Vec<Point> {
    let inverses: Vec<Isometry> = trace.spec.atoms.iter().map(|a| a.isometry.inverse()).collect();
    let mut out = Vec::with_capacity(trace.increments.len() + 1);
    let mut p = trace.basepoint.clone();
    out.push(p.clone());
    for &i in &trace.increments {
        p = inverses[i as usize].apply(&p).expect("same model");
        out.push(p.clone());
    }
    out
}

/// `μ ∗ ν₀` for `ν₀` uniform on `points`.
pub fn pushforward_atoms(spec: &StepDistribution, points: &[BoundaryPoint]) -> Result<Vec<(BoundaryPoint, f64)>> {
    let w = 1.0 / points.len() as f64;
    let mut out = Vec::with_capacity(spec.atoms.len() * points.len());
    for a in &spec.atoms {
        for xi in points {
            out.push((a.isometry.apply_boundary(xi)?, a.p * w));
        }
    }
    Ok(out)
}
