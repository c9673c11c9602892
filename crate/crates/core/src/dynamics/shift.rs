//! Horizontal displacement between two bifurcation branches.
//!
//! Each column of maxima becomes an envelope: the bins, shared by both
//! branches, covered by its maxima with small gaps between them filled. For a trial displacement `d` the test branch is
//! evaluated at `p - d` (linear interpolation between columns) and compared
//! with the reference at `p` by a fuzzy Jaccard distance; the displacement
//! minimizing the mean distance over the overlap is the shift.

use serde::{Deserialize, Serialize};

use super::bifurcation::Branch;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftOptions {
    /// Number of value bins spanning the common maxima range.
    pub bins: usize,
    /// Consecutive maxima closer than this fraction of the common range are
    /// joined and the bins between them filled, so a band sampled by finitely
    /// many maxima becomes an interval.
    pub fill_gap: f64,
    /// Search step as a fraction of the grid spacing.
    pub search_step_fraction: f64,
    /// Largest tried displacement as a fraction of the grid span.
    pub max_shift_fraction: f64,
}

impl Default for ShiftOptions {
    fn default() -> Self {
        Self {
            bins: 40,
            fill_gap: 0.3,
            search_step_fraction: 0.1,
            max_shift_fraction: 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftEstimate {
    /// Signed displacement: `test(p - delta)` best matches `reference(p)`.
    pub delta: f64,
    /// Mean discrepancy at `delta`.
    pub residual: f64,
    /// Mean discrepancy without displacement.
    pub unshifted: f64,
}

/// Envelope of each column as bin occupancy.
fn profiles(branch: &Branch, lo: f64, width: f64, bins: usize, max_gap: f64) -> Vec<Vec<f64>> {
    let bin = |v: f64| (((v - lo) / width) as usize).min(bins - 1);
    branch
        .columns
        .iter()
        .map(|col| {
            let mut sorted = col.clone();
            sorted.sort_by(f64::total_cmp);
            let mut occ = vec![0.0; bins];
            for (k, &v) in sorted.iter().enumerate() {
                occ[bin(v)] = 1.0;
                if let Some(&next) = sorted.get(k + 1) {
                    if next - v <= max_gap {
                        occ[bin(v)..=bin(next)].fill(1.0);
                    }
                }
            }
            occ
        })
        .collect()
}

/// `1 - Σ min / Σ max`; zero when both profiles are empty.
fn discrepancy(a: &[f64], b: &[f64]) -> f64 {
    let (mut inter, mut union) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        inter += x.min(*y);
        union += x.max(*y);
    }
    if union == 0.0 {
        0.0
    } else {
        1.0 - inter / union
    }
}

struct Profiles {
    reference: Vec<Vec<f64>>,
    test: Vec<Vec<f64>>,
    g0: f64,
    spacing: f64,
}

impl Profiles {
    /// Mean discrepancy for displacement `d`, or `None` without overlap.
    fn mean_discrepancy(&self, d: f64) -> Option<f64> {
        let n = self.test.len();
        let bins = self.test[0].len();
        let mut blend = vec![0.0; bins];
        let (mut sum, mut used) = (0.0, 0usize);
        for (g, reference) in self.reference.iter().enumerate() {
            let s = g as f64 - d / self.spacing;
            if s < -1e-9 || s > (n - 1) as f64 + 1e-9 {
                continue;
            }
            let s = s.clamp(0.0, (n - 1) as f64);
            let k = (s.floor() as usize).min(n - 2);
            let frac = s - k as f64;
            for b in 0..bins {
                blend[b] = (1.0 - frac) * self.test[k][b] + frac * self.test[k + 1][b];
            }
            sum += discrepancy(&blend, reference);
            used += 1;
        }
        (used > 0).then(|| sum / used as f64)
    }
}

/// Estimates the horizontal shift of `test` relative to `reference`.
pub fn branch_shift(reference: &Branch, test: &Branch, options: &ShiftOptions) -> Result<ShiftEstimate> {
    let n = reference.grid.len();
    if n < 2 || test.grid.len() != n || reference.columns.len() != n || test.columns.len() != n {
        return Err(Error::domain("branches must share a grid of at least two points"));
    }
    let spacing = (reference.grid[n - 1] - reference.grid[0]) / (n - 1) as f64;
    let uniform = reference
        .grid
        .iter()
        .zip(&test.grid)
        .enumerate()
        .all(|(g, (a, b))| a == b && (a - (reference.grid[0] + spacing * g as f64)).abs() <= 1e-9 * spacing.abs().max(1e-300) + 1e-12);
    if !uniform || !(spacing > 0.0) {
        return Err(Error::domain("branches must share the same uniform increasing grid"));
    }
    let all = || reference.columns.iter().chain(&test.columns).flatten().copied();
    if reference.columns.iter().all(Vec::is_empty) || test.columns.iter().all(Vec::is_empty) {
        return Err(Error::InsufficientData("branch without any maxima".into()));
    }
    let lo = all().fold(f64::INFINITY, f64::min);
    let hi = all().fold(f64::NEG_INFINITY, f64::max);
    let bins = options.bins.max(1);
    let width = ((hi - lo) / bins as f64).max(f64::EPSILON * hi.abs().max(1.0));
    let profiles = Profiles {
        reference: profiles(reference, lo, width, bins, options.fill_gap * (hi - lo)),
        test: profiles(test, lo, width, bins, options.fill_gap * (hi - lo)),
        g0: reference.grid[0],
        spacing,
    };
    debug_assert!(profiles.g0.is_finite());

    let step = spacing * options.search_step_fraction;
    let span = spacing * (n - 1) as f64;
    let steps = ((span * options.max_shift_fraction) / step + 1e-9).floor() as i64;
    let unshifted = profiles.mean_discrepancy(0.0).expect("zero shift always overlaps");
    let mut best = (0.0, unshifted);
    for m in 1..=steps {
        for d in [m as f64 * step, -(m as f64) * step] {
            if let Some(r) = profiles.mean_discrepancy(d) {
                if r < best.1 - 1e-12 {
                    best = (d, r);
                }
            }
        }
    }
    Ok(ShiftEstimate {
        delta: best.0,
        residual: best.1,
        unshifted,
    })
}
