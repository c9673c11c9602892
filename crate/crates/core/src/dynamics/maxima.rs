use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ivp::Trajectory;

/// A local maximum refined by the parabola through its three samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    /// Sub-sample offset of the vertex in `[-1/2, 1/2]`.
    pub offset: f64,
    pub value: f64,
}

impl Peak {
    /// Quadratic interpolation of another series at this peak's vertex.
    pub fn interpolate(&self, series: &[f64]) -> f64 {
        let (a, b, c) = (series[self.index - 1], series[self.index], series[self.index + 1]);
        let d = self.offset;
        b + 0.5 * d * (c - a) + 0.5 * d * d * (a - 2.0 * b + c)
    }
}

/// Local maxima `x[k-1] < x[k] >= x[k+1]` with `k - 1 >= start`.
pub fn find_peaks(series: &[f64], start: usize) -> Vec<Peak> {
    let mut peaks = Vec::new();
    if series.len() < 3 {
        return peaks;
    }
    for k in (start + 1).max(1)..series.len() - 1 {
        let (a, b, c) = (series[k - 1], series[k], series[k + 1]);
        if a < b && b >= c {
            let curvature = a - 2.0 * b + c;
            let (offset, value) = if curvature < 0.0 {
                let d = 0.5 * (a - c) / curvature;
                (d, b + 0.25 * (c - a) * d)
            } else {
                (0.0, b)
            };
            peaks.push(Peak {
                index: k,
                offset,
                value,
            });
        }
    }
    peaks
}

/// Positive local maxima of `x1` after the transient, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximaSet {
    pub values: Vec<f64>,
    pub transient_fraction: f64,
    /// Set when the trajectory blew up; `values` is then empty.
    pub unbounded: bool,
}

impl MaximaSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of values separated by more than `resolution` from their
    /// predecessor.
    pub fn distinct_count(&self, resolution: f64) -> usize {
        let mut count = 0;
        let mut last = f64::NEG_INFINITY;
        for &v in &self.values {
            if v - last > resolution {
                count += 1;
                last = v;
            }
        }
        count
    }
}

pub(crate) fn transient_start(len: usize, transient_fraction: f64) -> usize {
    (len as f64 * transient_fraction).floor() as usize
}

pub(crate) fn check_transient(transient_fraction: f64) -> Result<()> {
    if (0.0..1.0).contains(&transient_fraction) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "transient_fraction must lie in [0, 1), got {transient_fraction}"
        )))
    }
}

/// Positive parabolically refined maxima of the first component over the
/// trailing `1 - transient_fraction` of the trajectory.
pub fn extract_maxima(traj: &Trajectory, transient_fraction: f64) -> Result<MaximaSet> {
    check_transient(transient_fraction)?;
    if !traj.is_completed() {
        return Ok(MaximaSet {
            values: Vec::new(),
            transient_fraction,
            unbounded: true,
        });
    }
    let start = transient_start(traj.len(), transient_fraction);
    let mut values: Vec<f64> = find_peaks(traj.component(0), start)
        .into_iter()
        .map(|p| p.value)
        .filter(|v| *v > 0.0)
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(MaximaSet {
        values,
        transient_fraction,
        unbounded: false,
    })
}
