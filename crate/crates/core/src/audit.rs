//! Hypotheses audit for a step distribution: admissibility at bounded depth,
//! per-atom classification, and a search for two independent rank one atoms.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{Point, Tolerance};
use crate::isometry::{independence_shell_score, IsometryKind};
use crate::walk::{validate_distribution, AdmissibilityReport, StepDistribution};

/// Powers at which pairwise independence scores are sampled.
pub const AUDIT_POWERS: [u32; 3] = [2, 4, 8];

/// Depth of the admissibility closure used by the estimators.
pub const ADMISSIBILITY_DEPTH: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedNonElementary,
    Indeterminate,
    HypothesesViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomAudit {
    pub index: usize,
    pub kind: IsometryKind,
    pub translation_length: f64,
    pub rank_one: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAudit {
    pub i: usize,
    pub j: usize,
    /// `(M, score)` with the shell score at power `M`.
    pub scores: Vec<(u32, f64)>,
    pub increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneAudit {
    pub atoms: Vec<AtomAudit>,
    pub pairs: Vec<PairAudit>,
    pub verdict: Verdict,
}

/// Classifies every atom and scores every pair of rank one atoms at the
/// model origin. Certified when some pair has strictly increasing scores over
/// [`AUDIT_POWERS`]; violated when no atom is rank one.
pub fn rankone_audit(spec: &StepDistribution, tol: Tolerance) -> Result<RankOneAudit> {
    let x = Point::origin(spec.model());
    let atoms: Vec<AtomAudit> = spec
        .atoms()
        .iter()
        .enumerate()
        .map(|(index, a)| {
            let c = a.isometry.classify(tol);
            AtomAudit {
                index,
                kind: c.kind,
                translation_length: c.translation_length,
                rank_one: a.isometry.is_rank_one(tol),
            }
        })
        .collect();
    let rank_one: Vec<usize> = atoms.iter().filter(|a| a.rank_one).map(|a| a.index).collect();
    let mut pairs = Vec::new();
    for (k, &i) in rank_one.iter().enumerate() {
        for &j in &rank_one[k + 1..] {
            let mut scores = Vec::with_capacity(AUDIT_POWERS.len());
            for m in AUDIT_POWERS {
                scores.push((m, independence_shell_score(spec.isometry(i), spec.isometry(j), &x, m)?));
            }
            let increasing = scores.windows(2).all(|w| w[1].1 > w[0].1 + tol.0);
            pairs.push(PairAudit { i, j, scores, increasing });
        }
    }
    let verdict = if rank_one.is_empty() {
        Verdict::HypothesesViolated
    } else if pairs.iter().any(|p| p.increasing) {
        Verdict::CertifiedNonElementary
    } else {
        Verdict::Indeterminate
    };
    Ok(RankOneAudit { atoms, pairs, verdict })
}

/// Everything a theorem-checking report needs to show about its hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesesAudit {
    pub admissibility: AdmissibilityReport,
    pub rank_one: RankOneAudit,
}

impl HypothesesAudit {
    pub fn run(spec: &StepDistribution, tol: Tolerance) -> Result<Self> {
        Ok(Self {
            admissibility: validate_distribution(spec, ADMISSIBILITY_DEPTH, tol)?,
            rank_one: rankone_audit(spec, tol)?,
        })
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.admissibility.certified && self.rank_one.verdict == Verdict::CertifiedNonElementary
    }
}
