//! Estimators and theorem checks on sampled walks.
//!
//! Sample paths fan out over the ambient rayon pool. Path `i` of a run seeded
//! with `s` always uses [`path_rng`](crate::walk::path_rng)`(s, i)` and results are collected in path
//! order, so every report is independent of the worker count.
//!
//! Far from the basepoint the half-plane coordinates of two nearby points stop
//! being distinguishable in double precision, so the H² statistics here are
//! built from basepoint-relative quantities (`d(x, Z_k x)`, horofunctions,
//! boundary directions), which stay accurate for walks of length 10⁴.

pub mod bins;
pub mod trend;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::{HypothesesAudit, ADMISSIBILITY_DEPTH};
use crate::boundary::{boundary_metric, horofunction, tits_distance, TitsValue};
use crate::error::{domain, same_model, usage, LabError, Result};
use crate::geometry::{direction, distance, ray_point, BoundaryPoint, ModelSpace, Point, Tolerance};
use crate::isometry::Isometry;
use crate::walk::{validate_distribution, AdmissibilityReport, StepDistribution, WalkTrace, Walker};

pub use bins::{BinScheme, Transitions};
pub use trend::{theil_sen, TheilSen};

/// Refuses uncertified distributions unless `allow_uncertified`.
pub fn require_admissible(
    spec: &StepDistribution,
    allow_uncertified: bool,
    tol: Tolerance,
) -> Result<AdmissibilityReport> {
    let report = validate_distribution(spec, ADMISSIBILITY_DEPTH, tol)?;
    if !report.certified && !allow_uncertified {
        return Err(LabError::Refused(format!(
            "support does not certifiably generate a group at depth {ADMISSIBILITY_DEPTH}"
        )));
    }
    Ok(report)
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

// ---- drift -----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub n: u64,
    pub m_samples: usize,
    pub lambda_hat: f64,
    pub std_error: f64,
    /// `d(Z_n x, x)/n` per path.
    pub per_sample_terminal: Vec<f64>,
    /// Mean of `h_ξ(Z_n x)/n` for the supplied `ξ`.
    pub horofunction_lambda: Option<f64>,
}

/// `m_samples` independent paths of length `n` from `x`.
#[allow(clippy::too_many_arguments)]
pub fn drift_estimate(
    spec: &StepDistribution,
    x: &Point,
    n: u64,
    m_samples: usize,
    seed: u64,
    xi: Option<&BoundaryPoint>,
    allow_uncertified: bool,
    tol: Tolerance,
) -> Result<DriftReport> {
    same_model(spec.model(), x.model())?;
    if n == 0 || m_samples == 0 {
        return Err(usage("drift needs n > 0 and at least one sample"));
    }
    if let Some(xi) = xi {
        same_model(spec.model(), xi.model())?;
    }
    require_admissible(spec, allow_uncertified, tol)?;
    let per_path: Vec<(f64, Option<f64>)> = (0..m_samples as u64)
        .into_par_iter()
        .map(|path| {
            let mut w = Walker::new(spec, seed, path);
            for _ in 0..n {
                w.step();
            }
            let z = w.position(x);
            let d = distance(x, &z).expect("same model") / n as f64;
            let h = xi.map(|xi| horofunction(xi, x, &z).expect("same model") / n as f64);
            (d, h)
        })
        .collect();
    let terminal: Vec<f64> = per_path.iter().map(|p| p.0).collect();
    let (lambda_hat, std_error) = mean_and_se(&terminal);
    let horofunction_lambda = xi.map(|_| per_path.iter().map(|p| p.1.expect("set")).sum::<f64>() / m_samples as f64);
    Ok(DriftReport { n, m_samples, lambda_hat, std_error, per_sample_terminal: terminal, horofunction_lambda })
}

// ---- boundary convergence -------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceProfile {
    pub checkpoints: Vec<u64>,
    pub boundary_coords: Vec<BoundaryPoint>,
    /// `max_{j,l ≥ k} boundary_metric(x, coords[j], coords[l])`.
    pub cauchy_tail: Vec<f64>,
}

impl ConvergenceProfile {
    /// Oscillation of the directions over checkpoints at or after `step`.
    pub fn tail_after(&self, step: u64) -> Option<f64> {
        let k = self.checkpoints.iter().position(|&c| c >= step)?;
        Some(self.cauchy_tail[k])
    }
}

/// Directions `direction(x, Z_c x)` at the checkpoints and their Cauchy
/// oscillation. Checkpoints where the walk sits at `x`, or whose position was
/// not stored, are skipped.
pub fn convergence_profile(trace: &WalkTrace, checkpoints: &[u64]) -> Result<ConvergenceProfile> {
    let x = &trace.basepoint;
    let mut cps = Vec::new();
    let mut coords = Vec::new();
    for &c in checkpoints {
        let Some(p) = trace.position_at(c) else {
            continue;
        };
        if p == x {
            continue;
        }
        cps.push(c);
        coords.push(direction(x, p)?);
    }
    let k = coords.len();
    let mut tail = vec![0.0; k];
    let mut running = 0.0f64;
    for i in (0..k).rev() {
        for j in i + 1..k {
            running = running.max(boundary_metric(x, &coords[i], &coords[j])?);
        }
        tail[i] = running;
    }
    Ok(ConvergenceProfile { checkpoints: cps, boundary_coords: coords, cauchy_tail: tail })
}

/// Every `every`-th step up to `n`.
pub fn regular_checkpoints(n: u64, every: u64) -> Vec<u64> {
    let every = every.max(1);
    (1..=n / every).map(|k| k * every).chain((!n.is_multiple_of(every)).then_some(n)).collect()
}

// ---- hitting measure ------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingHistogram {
    pub model: ModelSpace,
    pub bins: BinScheme,
    pub labels: Vec<String>,
    pub masses: Vec<f64>,
    pub n: u64,
    pub m_samples: usize,
    /// Paths that ended at the basepoint and have no direction.
    pub excluded: usize,
}

impl HittingHistogram {
    /// Standard error of a bin mass under multinomial sampling.
    pub fn std_error(&self, i: usize) -> f64 {
        let used = (self.m_samples - self.excluded) as f64;
        (self.masses[i] * (1.0 - self.masses[i]) / used).sqrt()
    }
}

/// Histogram of `direction(x, Z_n x)` over `m_samples` paths.
#[allow(clippy::too_many_arguments)]
pub fn hitting_measure(
    spec: &StepDistribution,
    x: &Point,
    n: u64,
    m_samples: usize,
    bins: BinScheme,
    seed: u64,
    allow_uncertified: bool,
    tol: Tolerance,
) -> Result<HittingHistogram> {
    same_model(spec.model(), x.model())?;
    bins.check(spec.model())?;
    require_admissible(spec, allow_uncertified, tol)?;
    let hits: Vec<Option<usize>> = (0..m_samples as u64)
        .into_par_iter()
        .map(|path| {
            let mut w = Walker::new(spec, seed, path);
            for _ in 0..n {
                w.step();
            }
            let z = w.position(x);
            if &z == x {
                None
            } else {
                Some(bins.index(&direction(x, &z).expect("distinct")).expect("scheme checked"))
            }
        })
        .collect();
    let mut counts = vec![0usize; bins.count()];
    let mut excluded = 0;
    for h in hits {
        match h {
            Some(i) => counts[i] += 1,
            None => excluded += 1,
        }
    }
    let used = (m_samples - excluded).max(1) as f64;
    Ok(HittingHistogram {
        model: spec.model(),
        bins,
        labels: (0..bins.count()).map(|i| bins.label(i)).collect(),
        masses: counts.iter().map(|&c| c as f64 / used).collect(),
        n,
        m_samples,
        excluded,
    })
}

/// Total variation between `hist` and `μ ∗ hist`, where each bin's mass is
/// spread over `refinement_samples` points of the bin before pushing forward
/// by the atoms. Points are uniform in the bin, except that tree cylinders of
/// length ≥ 2 are continued with the histogram's own next-letter frequencies
/// (see [`BinScheme::transitions`]); uniform tails bias the defect of a
/// non-symmetric walk by about 0.05 even at the exact hitting measure.
pub fn stationarity_defect(
    spec: &StepDistribution,
    hist: &HittingHistogram,
    refinement_samples: usize,
    seed: u64,
) -> Result<f64> {
    same_model(spec.model(), hist.model)?;
    if refinement_samples == 0 {
        return Err(usage("need at least one refinement sample per bin"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pushed = vec![0.0; hist.masses.len()];
    let atoms = spec.atoms();
    let transitions = hist.bins.transitions(&hist.masses);
    for (b, &mass) in hist.masses.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        // counts[atom][target bin]
        let mut counts = vec![vec![0usize; hist.masses.len()]; atoms.len()];
        for _ in 0..refinement_samples {
            let zeta = hist.bins.sample_with(hist.model, b, transitions.as_ref(), &mut rng);
            for (k, a) in atoms.iter().enumerate() {
                counts[k][hist.bins.index(&a.isometry.apply_boundary(&zeta)?)?] += 1;
            }
        }
        for (k, a) in atoms.iter().enumerate() {
            for (t, &c) in counts[k].iter().enumerate() {
                if c > 0 {
                    pushed[t] += mass * (a.p * (c as f64 / refinement_samples as f64));
                }
            }
        }
    }
    Ok(0.5 * hist.masses.iter().zip(&pushed).map(|(p, q)| (p - q).abs()).sum::<f64>())
}

// ---- Dirac concentration --------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracReport {
    pub checkpoints: Vec<u64>,
    pub spread_a: Vec<f64>,
    pub spread_b: Vec<f64>,
    /// Largest distance between an image of the first set and one of the second.
    pub cross_spread: Vec<f64>,
    /// Set when admissibility or two independent rank one atoms were not certified.
    pub hypotheses_warning: bool,
}

/// Pushes two finite boundary sets forward by `Z_k` along one path and
/// records their diameters and mutual distance at the checkpoints.
#[allow(clippy::too_many_arguments)]
pub fn dirac_concentration(
    spec: &StepDistribution,
    x: &Point,
    atoms_a: &[BoundaryPoint],
    atoms_b: &[BoundaryPoint],
    n: u64,
    seed: u64,
    path: u64,
    checkpoints: &[u64],
    tol: Tolerance,
) -> Result<DiracReport> {
    if atoms_a.len() < 2 || atoms_b.is_empty() {
        return Err(usage("need at least two initial atoms"));
    }
    same_model(spec.model(), x.model())?;
    let warning = !HypothesesAudit::run(spec, tol)?.hypotheses_hold();
    dirac_path(spec, x, atoms_a, atoms_b, n, seed, path, checkpoints, warning)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn dirac_path(
    spec: &StepDistribution,
    x: &Point,
    atoms_a: &[BoundaryPoint],
    atoms_b: &[BoundaryPoint],
    n: u64,
    seed: u64,
    path: u64,
    checkpoints: &[u64],
    hypotheses_warning: bool,
) -> Result<DiracReport> {
    let spread = |pts: &[BoundaryPoint]| -> Result<f64> {
        let mut s = 0.0f64;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                s = s.max(boundary_metric(x, &pts[i], &pts[j])?);
            }
        }
        Ok(s)
    };
    let mut w = Walker::new(spec, seed, path);
    let mut report = DiracReport {
        checkpoints: Vec::new(),
        spread_a: Vec::new(),
        spread_b: Vec::new(),
        cross_spread: Vec::new(),
        hypotheses_warning,
    };
    let mut cps: Vec<u64> = checkpoints.iter().copied().filter(|&c| c <= n).collect();
    cps.sort_unstable();
    cps.dedup();
    for c in cps {
        while w.steps() < c {
            w.step();
        }
        let z = w.product();
        let a: Vec<BoundaryPoint> = atoms_a.iter().map(|p| z.apply_boundary(p)).collect::<Result<_>>()?;
        let b: Vec<BoundaryPoint> = atoms_b.iter().map(|p| z.apply_boundary(p)).collect::<Result<_>>()?;
        let mut cross = 0.0f64;
        for p in &a {
            for q in &b {
                cross = cross.max(boundary_metric(x, p, q)?);
            }
        }
        report.checkpoints.push(c);
        report.spread_a.push(spread(&a)?);
        report.spread_b.push(spread(&b)?);
        report.cross_spread.push(cross);
    }
    Ok(report)
}

// ---- horofunctions along the walk -----------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSeries {
    pub steps: Vec<u64>,
    /// `|h_ξ(Z_k x) - d(x, Z_k x)|` at the stored steps.
    pub gap_series: Vec<f64>,
    pub sup_gap: f64,
}

pub fn horofunction_gap(trace: &WalkTrace, xi: &BoundaryPoint) -> Result<GapSeries> {
    let x = &trace.basepoint;
    let mut gaps = Vec::with_capacity(trace.positions.len());
    for p in &trace.positions {
        gaps.push((horofunction(xi, x, p)? - distance(x, p)?).abs());
    }
    let sup_gap = gaps.iter().copied().fold(0.0, f64::max);
    Ok(GapSeries { steps: trace.steps.clone(), gap_series: gaps, sup_gap })
}

/// `|h_ξ(g₁g₂x) - h_{g₁⁻¹ξ}(g₂x) - h_ξ(g₁x)|`, all normalised at `x`.
pub fn cocycle_residual(g1: &Isometry, g2: &Isometry, xi: &BoundaryPoint, x: &Point) -> Result<f64> {
    let g1g2x = g1.compose(g2)?.apply(x)?;
    let lhs = horofunction(xi, x, &g1g2x)?;
    let pulled = g1.inverse().apply_boundary(xi)?;
    let rhs = horofunction(&pulled, x, &g2.apply(x)?)? + horofunction(xi, x, &g1.apply(x)?)?;
    Ok((lhs - rhs).abs())
}

/// Partial sums `Σ_{j ≤ k} h_{Z_{j-1}⁻¹ξ}(ω_j x)` for `k = 0..=n`, which equal
/// `h_ξ(Z_k x)` by the cocycle identity.
pub fn transient_cocycle_sums(trace: &WalkTrace, xi: &BoundaryPoint) -> Result<Vec<f64>> {
    let x = &trace.basepoint;
    let atoms = trace.spec.atoms();
    let inverses: Vec<Isometry> = atoms.iter().map(|a| a.isometry.inverse()).collect();
    let images: Vec<Point> = atoms.iter().map(|a| a.isometry.apply(x)).collect::<Result<_>>()?;
    let mut pulled = xi.clone();
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(trace.increments.len() + 1);
    out.push(0.0);
    for &i in &trace.increments {
        let i = i as usize;
        sum += horofunction(&pulled, x, &images[i])?;
        out.push(sum);
        pulled = inverses[i].apply_boundary(&pulled)?;
    }
    Ok(out)
}

// ---- tracking -------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingSeries {
    pub steps: Vec<u64>,
    /// `d(ray_point(x, ξ̂, λk), Z_k x)/k`.
    pub errors: Vec<f64>,
    pub proxy: BoundaryPoint,
}

/// Sublinear tracking of the walk by the ray from `x` towards
/// `ξ̂ = direction(x, Z_N x)`. In the tree the ray parameter `λk` is rounded
/// to the nearest vertex.
pub fn tracking_error(trace: &WalkTrace, lambda: f64) -> Result<TrackingSeries> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain(format!("tracking speed must be positive, got {lambda}")));
    }
    let x = &trace.basepoint;
    let last = trace.final_position();
    if last == x {
        return Err(domain("the walk ends at the basepoint; no direction to track"));
    }
    let proxy = direction(x, last)?;
    let tree = x.model() == ModelSpace::T4;
    let mut steps = Vec::new();
    let mut errors = Vec::new();
    for (&k, p) in trace.steps.iter().zip(&trace.positions) {
        if k == 0 {
            continue;
        }
        let t = lambda * k as f64;
        let t = if tree { t.round() } else { t };
        let q = ray_point(x, &proxy, t)?;
        steps.push(k);
        errors.push(distance(&q, p)? / k as f64);
    }
    Ok(TrackingSeries { steps, errors, proxy })
}

// ---- π-convergence --------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiConvergence {
    pub holds: bool,
    /// First index (1-based) from which every `g_n K` stays in the neighbourhood;
    /// the list length when it never does.
    pub n0: usize,
    pub xi: BoundaryPoint,
    pub eta: BoundaryPoint,
}

/// Checks that `g_n K` eventually lies in the `eps`-ball about the forward
/// limit `ξ` of `g_n x`, for `K` outside the Tits `π`-ball of the backward
/// limit `η`. Limits are read off the last element unless `limits` is given.
pub fn pi_convergence_check(
    gs: &[Isometry],
    x: &Point,
    k_set: &[BoundaryPoint],
    eps: f64,
    limits: Option<(BoundaryPoint, BoundaryPoint)>,
    tol: Tolerance,
) -> Result<PiConvergence> {
    let last = gs.last().ok_or_else(|| usage("empty sequence"))?;
    let (xi, eta) = match limits {
        Some(l) => l,
        None => {
            let fwd = last.apply(x)?;
            let bwd = last.inverse().apply(x)?;
            if &fwd == x || &bwd == x {
                return Err(domain("limits cannot be read off a sequence that returns to x; pass them explicitly"));
            }
            (direction(x, &fwd)?, direction(x, &bwd)?)
        }
    };
    for kappa in k_set {
        match tits_distance(&eta, kappa, tol)? {
            TitsValue::Infinite => {}
            TitsValue::Finite(v) if v > std::f64::consts::PI + tol.0 => {}
            TitsValue::Finite(v) => {
                return Err(domain(format!("{kappa} is at Tits distance {v} ≤ π from the backward limit")));
            }
        }
    }
    let mut inside = Vec::with_capacity(gs.len());
    for g in gs {
        let mut all = true;
        for kappa in k_set {
            if boundary_metric(x, &g.apply_boundary(kappa)?, &xi)? >= eps {
                all = false;
                break;
            }
        }
        inside.push(all);
    }
    let tail_start = inside.iter().rposition(|&b| !b).map_or(0, |i| i + 1);
    let holds = tail_start < gs.len();
    Ok(PiConvergence { holds, n0: if holds { tail_start + 1 } else { gs.len() }, xi, eta })
}
