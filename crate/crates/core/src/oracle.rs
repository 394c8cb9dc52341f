//! Independent reference computations used to check the estimators.
//!
//! None of these sample a walk: the tree drift comes from the exact law of the
//! distance chain, cylinder masses from first-passage probabilities of a
//! nearest-neighbour walk on the free group, and Busemann values from a long
//! ray.

use serde::{Deserialize, Serialize};

use crate::boundary::horofunction_limit_oracle;
use crate::error::{usage, Result};
use crate::geometry::{BoundaryPoint, Letter, Point, Word};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeDrift {
    pub n: u64,
    /// `E d(Z_n e, e)`.
    pub expected_distance: f64,
    /// `E d(Z_n e, e) / n`.
    pub speed: f64,
    /// The asymptotic speed `3/4 − 1/4`.
    pub limit: f64,
}

/// Exact distance law of the simple random walk on the 4-regular tree after
/// `n` steps: away from the root the distance goes up with probability `3/4`
/// and down with probability `1/4`; at the root it always goes up.
pub fn tree_drift(n: u64) -> Result<TreeDrift> {
    if n == 0 {
        return Err(usage("tree drift needs n > 0"));
    }
    let n_us = n as usize;
    let mut law = vec![0.0f64; n_us + 2];
    law[0] = 1.0;
    let mut next = vec![0.0f64; n_us + 2];
    for step in 0..n_us {
        next.iter_mut().for_each(|v| *v = 0.0);
        next[1] += law[0];
        for d in 1..=step.min(n_us) {
            let p = law[d];
            if p != 0.0 {
                next[d + 1] += 0.75 * p;
                next[d - 1] += 0.25 * p;
            }
        }
        std::mem::swap(&mut law, &mut next);
    }
    let expected_distance: f64 = law.iter().enumerate().map(|(d, p)| d as f64 * p).sum();
    Ok(TreeDrift { n, expected_distance, speed: expected_distance / n as f64, limit: 0.5 })
}

/// First-passage data of a nearest-neighbour walk on `F₂ = ⟨a, b⟩` with
/// generator weights in [`Letter::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeGroupHitting {
    pub weights: [f64; 4],
    /// `q_s`: probability of ever visiting `s` from the identity.
    pub reach: [f64; 4],
    /// `ν(C_s)`: limit mass of ends starting with `s`.
    pub first_letter: [f64; 4],
}

impl FreeGroupHitting {
    /// Solves `q_s = p_s + q_s Σ_{t ≠ s} p_t q_{t⁻¹}` by monotone iteration
    /// from zero. Needs a transient walk, which every nearest-neighbour walk
    /// on `F₂` is.
    pub fn new(weights: [f64; 4]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(usage(format!("weights must be a probability vector, got {weights:?}")));
        }
        let inv = |s: usize| Letter::ALL[s].inverse().index();
        let mut q = [0.0f64; 4];
        for _ in 0..100_000 {
            let mut next = [0.0; 4];
            for s in 0..4 {
                let back: f64 = (0..4).filter(|&t| t != s).map(|t| weights[t] * q[inv(t)]).sum();
                next[s] = (weights[s] / (1.0 - back)).min(1.0);
            }
            let delta = (0..4).map(|s| (next[s] - q[s]).abs()).fold(0.0, f64::max);
            q = next;
            if delta < 1e-16 {
                break;
            }
        }
        let mut first = [0.0; 4];
        for s in 0..4 {
            let qi = q[inv(s)];
            first[s] = q[s] * (1.0 - qi) / (1.0 - q[s] * qi);
        }
        Ok(Self { weights, reach: q, first_letter: first })
    }

    /// `ν(C_{s₁…s_k}) = q_{s₁} ⋯ q_{s_{k−1}} ν(C_{s_k})`.
    pub fn cylinder_mass(&self, prefix: &Word) -> Result<f64> {
        let ls = prefix.letters();
        let (last, init) = ls.split_last().ok_or_else(|| usage("cylinder prefix must be nonempty"))?;
        Ok(init.iter().map(|l| self.reach[l.index()]).product::<f64>() * self.first_letter[last.index()])
    }
}

/// `d(ray_point(x, ξ, t), z) − t`, which converges to the horofunction
/// `h_ξ(z)` normalised at `x`.
pub fn busemann_limit(xi: &BoundaryPoint, x: &Point, z: &Point, t: f64) -> Result<f64> {
    horofunction_limit_oracle(xi, x, z, t)
}
