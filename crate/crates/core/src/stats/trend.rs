//! Theil–Sen slope with Sen's distribution-free confidence interval.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheilSen {
    pub slope: f64,
    pub intercept: f64,
    /// Two-sided 95% interval for the slope.
    pub lower: f64,
    pub upper: f64,
}

const Z_975: f64 = 1.959_963_984_540_054;

impl TheilSen {
    /// No significant growth: the interval reaches zero or below.
    pub fn not_increasing(&self) -> bool {
        self.lower <= 0.0
    }

    /// No growth beyond `tol` over a window of length `span`: the lower
    /// bound of the slope, times `span`, stays within the resolution `tol`.
    /// Flat series in floating point carry rounding slopes of order `1e-16`
    /// which a pure sign test would call significant.
    pub fn not_increasing_within(&self, span: f64, tol: f64) -> bool {
        self.lower * span <= tol
    }

    /// Significant decrease.
    pub fn decreasing(&self) -> bool {
        self.upper < 0.0
    }
}

/// Median of pairwise slopes. `None` with fewer than two distinct abscissae.
pub fn theil_sen(xs: &[f64], ys: &[f64]) -> Option<TheilSen> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mut slopes = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let dx = xs[j] - xs[i];
            if dx != 0.0 {
                slopes.push((ys[j] - ys[i]) / dx);
            }
        }
    }
    if slopes.is_empty() {
        return None;
    }
    slopes.sort_by(f64::total_cmp);
    let slope = median_sorted(&slopes);
    let mut residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - slope * x).collect();
    residuals.sort_by(f64::total_cmp);
    let intercept = median_sorted(&residuals);

    // Kendall's S variance without tie correction.
    let nf = n as f64;
    let c = Z_975 * (nf * (nf - 1.0) * (2.0 * nf + 5.0) / 18.0).sqrt();
    let big_n = slopes.len() as f64;
    // 1-based ranks M1 = (N - C)/2 and M2 + 1 = (N + C)/2 + 1, rounded outwards
    let m1 = ((big_n - c) / 2.0).floor().max(1.0) as usize;
    let m2 = ((big_n + c) / 2.0).ceil() as usize + 1;
    let last = slopes.len() - 1;
    Some(TheilSen { slope, intercept, lower: slopes[(m1 - 1).min(last)], upper: slopes[(m2 - 1).min(last)] })
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
