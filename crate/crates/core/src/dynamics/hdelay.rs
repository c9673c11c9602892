//! Step-size dependence of bifurcation branches started away from the
//! equilibria: each outside branch is compared with the reference branch on
//! the same attractor side, computed at the finest step size.

use serde::{Deserialize, Serialize};

use super::bifurcation::{bifurcation_sweep, BifurcationDataset, HnnFamily, Sweep};
use super::parallel::Jobs;
use super::shift::{branch_shift, ShiftEstimate, ShiftOptions};
use crate::error::{Error, Result};
use crate::hnn::State;
use crate::ivp::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HDelayConfig {
    /// Strictly decreasing step sizes; the last one is the reference.
    pub h_list: Vec<f64>,
    pub ics: Vec<State>,
    /// Indices into `ics` of branches started near equilibria.
    pub reference_ics: Vec<usize>,
    pub family: HnnFamily,
    pub sweep: Sweep,
    pub horizon: f64,
    pub corrector_iterations: usize,
    pub transient_fraction: f64,
    pub shift: ShiftOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchRole {
    Reference,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftRow {
    pub h: f64,
    /// 1-based IC index.
    pub ic_id: usize,
    pub role: BranchRole,
    /// 1-based index of the reference IC the branch was compared with.
    pub against: usize,
    pub estimate: ShiftEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTable {
    pub rows: Vec<ShiftRow>,
}

impl ShiftTable {
    pub fn row(&self, h: f64, ic_id: usize) -> Option<&ShiftRow> {
        self.rows.iter().find(|r| r.h == h && r.ic_id == ic_id)
    }

    pub fn outside_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .rows
            .iter()
            .filter(|r| r.role == BranchRole::Outside)
            .map(|r| r.ic_id)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HDelayStudy {
    pub table: ShiftTable,
    /// One dataset per entry of `h_list`.
    pub datasets: Vec<BifurcationDataset>,
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Runs the sweep for every step size and tabulates branch shifts.
///
/// Outside branches are paired with the reference branch whose attractor
/// lies on the same side (sign of the mean tail `x1` at the finest step).
pub fn h_delay_study(config: &HDelayConfig, jobs: Jobs) -> Result<HDelayStudy> {
    let hs = &config.h_list;
    if hs.len() < 2 || hs.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::domain("h_list needs at least two strictly decreasing step sizes"));
    }
    if config.reference_ics.is_empty() || config.reference_ics.iter().any(|&r| r >= config.ics.len()) {
        return Err(Error::domain("reference IC indices must point into the IC list"));
    }
    let mut datasets = Vec::with_capacity(hs.len());
    for &h in hs {
        let solver = SolverConfig::new(h, config.horizon).with_corrector_iterations(config.corrector_iterations);
        log::info!("h-delay: sweeping {} with h = {h}", config.sweep.parameter.name());
        datasets.push(bifurcation_sweep(
            &config.family,
            &config.sweep,
            &config.ics,
            &solver,
            config.transient_fraction,
            jobs,
        )?);
    }
    let finest = datasets.last().expect("at least two datasets");

    let partner = |k: usize| -> usize {
        let s = sign(finest.branch_mean_x1(k));
        config
            .reference_ics
            .iter()
            .copied()
            .find(|&r| sign(finest.branch_mean_x1(r)) == s)
            .unwrap_or(config.reference_ics[0])
    };

    let mut rows = Vec::new();
    for (dataset, &h) in datasets.iter().zip(hs) {
        for k in 0..config.ics.len() {
            let (role, against) = if config.reference_ics.contains(&k) {
                (BranchRole::Reference, k)
            } else {
                (BranchRole::Outside, partner(k))
            };
            let estimate = branch_shift(&finest.branch(against), &dataset.branch(k), &config.shift)?;
            rows.push(ShiftRow {
                h,
                ic_id: k + 1,
                role,
                against: against + 1,
                estimate,
            });
        }
    }
    Ok(HDelayStudy {
        table: ShiftTable { rows },
        datasets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::bifurcation::SweepParameter;
    use crate::hnn::HnnParams;

    fn config(h_list: Vec<f64>) -> HDelayConfig {
        HDelayConfig {
            h_list,
            ics: vec![[0.493, 0.366, -3.267], [1e-3; 3], [2.0; 3], [-2.0; 3]],
            reference_ics: vec![0, 1],
            family: HnnFamily::new(HnnParams::default(), 0.99925),
            sweep: Sweep::new(SweepParameter::Order, 0.997, 1.0, 4).unwrap(),
            horizon: 60.0,
            corrector_iterations: 1,
            transient_fraction: 0.5,
            shift: ShiftOptions::default(),
        }
    }

    #[test]
    fn rejects_bad_step_lists() {
        assert!(h_delay_study(&config(vec![0.05]), Jobs::Serial).is_err());
        assert!(h_delay_study(&config(vec![0.025, 0.05]), Jobs::Serial).is_err());
        let mut c = config(vec![0.1, 0.05]);
        c.reference_ics = vec![9];
        assert!(h_delay_study(&c, Jobs::Serial).is_err());
    }

    #[test]
    fn small_study_structure() {
        let study = h_delay_study(&config(vec![0.1, 0.05]), Jobs::Serial).unwrap();
        assert_eq!(study.datasets.len(), 2);
        assert_eq!(study.table.rows.len(), 8);
        assert_eq!(study.table.outside_ids(), vec![3, 4]);
        // References against themselves at the finest step are exact.
        for id in [1, 2] {
            let r = study.table.row(0.05, id).unwrap();
            assert_eq!(r.role, BranchRole::Reference);
            assert_eq!(r.estimate.delta, 0.0);
            assert_eq!(r.estimate.unshifted, 0.0);
        }
        // Mirror-image ICs are paired with different references.
        let a = study.table.row(0.05, 3).unwrap().against;
        let b = study.table.row(0.05, 4).unwrap().against;
        assert_ne!(a, b);
    }
}
