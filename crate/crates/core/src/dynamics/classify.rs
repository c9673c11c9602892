use serde::{Deserialize, Serialize};

use super::maxima::{check_transient, find_peaks, transient_start, Peak};
use crate::error::Result;
use crate::ivp::Trajectory;

/// Thresholds for [`classify_trajectory`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierTolerances {
    /// Tail peak-to-peak variation below which the run sits on an equilibrium.
    pub equilibrium_variation: f64,
    /// Maximum width of one cluster of positive maxima.
    pub cluster_width: f64,
    pub max_clusters: usize,
    /// Bound on the normalized closing error of a numerically periodic orbit.
    pub closing_error: f64,
    /// Tail mean of `x1` must exceed this in magnitude to decide the attractor side.
    pub sign_threshold: f64,
    pub transient_fraction: f64,
    /// Fewer tail maxima than this gives a low-confidence aperiodic verdict.
    pub min_maxima: usize,
}

impl Default for ClassifierTolerances {
    fn default() -> Self {
        Self {
            equilibrium_variation: 1e-6,
            cluster_width: 1e-3,
            max_clusters: 32,
            closing_error: 1e-4,
            sign_threshold: 0.05,
            transient_fraction: 0.5,
            min_maxima: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrajectoryKind {
    Equilibrium,
    /// Numerically periodic trajectory whose positive `x1` maxima form
    /// `clusters` tight groups.
    Npt { clusters: usize },
    Aperiodic,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttractorSign {
    Plus,
    Minus,
    Undecided,
}

impl AttractorSign {
    pub fn flipped(self) -> Self {
        match self {
            AttractorSign::Plus => AttractorSign::Minus,
            AttractorSign::Minus => AttractorSign::Plus,
            AttractorSign::Undecided => AttractorSign::Undecided,
        }
    }

    pub fn from_mean(mean: f64, threshold: f64) -> Self {
        if mean > threshold {
            AttractorSign::Plus
        } else if mean < -threshold {
            AttractorSign::Minus
        } else {
            AttractorSign::Undecided
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryClass {
    pub kind: TrajectoryKind,
    /// Smallest normalized closing error over the candidate lags, if any lag
    /// could be tested.
    pub closing_error: Option<f64>,
    /// Number of consecutive `x1` maxima (of any sign) spanned by one period.
    pub period_maxima: Option<usize>,
    pub attractor_sign: AttractorSign,
    pub tail_mean_x1: f64,
    /// Set when the tail held too few maxima for a confident verdict.
    pub low_confidence: bool,
}

/// Widths of the groups formed by splitting sorted `values` at gaps wider
/// than `width`.
fn cluster_widths(values: &[f64], width: f64) -> Vec<f64> {
    let mut widths = Vec::new();
    let mut iter = values.iter();
    let Some(&first) = iter.next() else {
        return widths;
    };
    let (mut lo, mut hi) = (first, first);
    for &v in iter {
        if v - hi > width {
            widths.push(hi - lo);
            lo = v;
        }
        hi = v;
    }
    widths.push(hi - lo);
    widths
}

fn peak_state(traj: &Trajectory, peak: &Peak, scale: f64) -> Vec<f64> {
    (0..traj.dimension())
        .map(|c| peak.interpolate(traj.component(c)) / scale)
        .collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Closing error over lags of `lag` maxima: the worst return distance of the
/// last `lag` peak states to the states one lag earlier.
fn closing_error_for_lag(states: &[Vec<f64>], lag: usize) -> f64 {
    let n = states.len();
    (n - lag..n)
        .map(|m| distance(&states[m], &states[m - lag]))
        .fold(0.0, f64::max)
}

/// Classifies the tail of a trajectory as equilibrium, numerically periodic
/// (NPT), aperiodic or unbounded, and decides which of the two mirror-image
/// attractors it sits on.
///
/// Closing errors are measured between states interpolated at refined `x1`
/// maxima, in units of the tail RMS radius (at least 1).
pub fn classify_trajectory(traj: &Trajectory, tol: &ClassifierTolerances) -> Result<TrajectoryClass> {
    check_transient(tol.transient_fraction)?;
    if !traj.is_completed() {
        return Ok(TrajectoryClass {
            kind: TrajectoryKind::Unbounded,
            closing_error: None,
            period_maxima: None,
            attractor_sign: AttractorSign::Undecided,
            tail_mean_x1: f64::NAN,
            low_confidence: false,
        });
    }
    let start = transient_start(traj.len(), tol.transient_fraction);
    let x1_tail = &traj.component(0)[start..];
    let tail_mean_x1 = x1_tail.iter().sum::<f64>() / x1_tail.len() as f64;
    let attractor_sign = AttractorSign::from_mean(tail_mean_x1, tol.sign_threshold);

    let variation = (0..traj.dimension())
        .map(|c| {
            let tail = &traj.component(c)[start..];
            let (lo, hi) = tail
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            hi - lo
        })
        .fold(0.0, f64::max);
    let mut class = TrajectoryClass {
        kind: TrajectoryKind::Aperiodic,
        closing_error: None,
        period_maxima: None,
        attractor_sign,
        tail_mean_x1,
        low_confidence: false,
    };
    if variation < tol.equilibrium_variation {
        class.kind = TrajectoryKind::Equilibrium;
        return Ok(class);
    }

    let peaks = find_peaks(traj.component(0), start);
    if peaks.len() < tol.min_maxima {
        class.low_confidence = true;
        return Ok(class);
    }

    let mean_sq = (0..traj.dimension())
        .map(|c| traj.component(c)[start..].iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        / x1_tail.len() as f64;
    let scale = mean_sq.sqrt().max(1.0);
    let states: Vec<Vec<f64>> = peaks.iter().map(|p| peak_state(traj, p, scale)).collect();

    let max_lag = (peaks.len() / 2).min(2 * tol.max_clusters).max(1);
    let mut best: Option<(usize, f64)> = None;
    for lag in 1..=max_lag {
        let err = closing_error_for_lag(&states, lag);
        if best.is_none_or(|(_, e)| err < e) {
            best = Some((lag, err));
        }
        if err <= tol.closing_error {
            best = Some((lag, err));
            break;
        }
    }
    let (lag, err) = best.expect("at least one lag is tested");
    class.closing_error = Some(err);

    let mut positive: Vec<f64> = peaks.iter().map(|p| p.value).filter(|v| *v > 0.0).collect();
    positive.sort_by(f64::total_cmp);
    let widths = cluster_widths(&positive, tol.cluster_width);
    let clustered = widths.len() <= tol.max_clusters && widths.iter().all(|w| *w <= tol.cluster_width);

    if err <= tol.closing_error && clustered {
        class.period_maxima = Some(lag);
        // No positive maxima: fall back to the number of maxima per period.
        let clusters = if widths.is_empty() { lag } else { widths.len() };
        class.kind = TrajectoryKind::Npt { clusters };
    }
    Ok(class)
}
