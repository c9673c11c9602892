use log::warn;
use serde::{Deserialize, Serialize};

use super::maxima::{extract_maxima, MaximaSet};
use super::parallel::{map_indexed, Jobs};
use crate::abm::abm_integrate;
use crate::error::{Error, Result};
use crate::hnn::{HnnParams, State};
use crate::ivp::{SolverConfig, Trajectory};

/// Parameter varied by a bifurcation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    /// Commensurate fractional order `q`.
    Order,
    /// Weight `w_{row,col}` (1-based).
    Weight { row: usize, col: usize },
}

impl SweepParameter {
    pub fn parse(name: &str) -> Result<Self> {
        if name == "q" {
            return Ok(SweepParameter::Order);
        }
        HnnParams::parse_weight_name(name)
            .map(|(row, col)| SweepParameter::Weight { row, col })
            .ok_or_else(|| Error::domain(format!("unknown sweep parameter '{name}'")))
    }

    pub fn name(&self) -> String {
        match self {
            SweepParameter::Order => "q".into(),
            SweepParameter::Weight { row, col } => format!("w{row}{col}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Sweep {
    pub fn new(parameter: SweepParameter, lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::domain(format!("sweep needs at least 2 points, got {count}")));
        }
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::domain(format!("sweep bounds must satisfy lo <= hi, got [{lo}, {hi}]")));
        }
        Ok(Self {
            parameter,
            lo,
            hi,
            count,
        })
    }

    pub fn grid(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * (k as f64 / last)
                }
            })
            .collect()
    }
}

/// The network at a base order and weight matrix, with one parameter free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HnnFamily {
    pub params: HnnParams,
    pub order: f64,
}

impl HnnFamily {
    pub fn new(params: HnnParams, order: f64) -> Self {
        Self { params, order }
    }

    /// `(order, params)` with `parameter` set to `value`.
    pub fn at(&self, parameter: SweepParameter, value: f64) -> Result<(f64, HnnParams)> {
        match parameter {
            SweepParameter::Order => Ok((value, self.params)),
            SweepParameter::Weight { row, col } => {
                Ok((self.order, self.params.with_weight(row, col, value)?))
            }
        }
    }

    pub fn integrate(
        &self,
        parameter: SweepParameter,
        value: f64,
        x0: State,
        config: &SolverConfig,
    ) -> Result<Trajectory> {
        let (q, params) = self.at(parameter, value)?;
        abm_integrate(&params.ivp(q, x0)?, config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationCell {
    pub maxima: MaximaSet,
    /// Mean of `x1` over the same tail (NaN for unbounded runs).
    pub tail_mean_x1: f64,
}

/// Positive `x1` maxima per grid value and initial condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDataset {
    pub parameter: SweepParameter,
    pub grid: Vec<f64>,
    pub ics: Vec<State>,
    pub config: SolverConfig,
    pub family: HnnFamily,
    /// `cells[g][k]`: grid value `g`, initial condition `k`.
    pub cells: Vec<Vec<BifurcationCell>>,
}

/// One initial condition's column-family: maxima per grid value.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub grid: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
}

impl BifurcationDataset {
    pub fn branch(&self, ic: usize) -> Branch {
        Branch {
            grid: self.grid.clone(),
            columns: self.cells.iter().map(|row| row[ic].maxima.values.clone()).collect(),
        }
    }

    /// Mean over the grid of each cell's tail mean of `x1` for one IC.
    pub fn branch_mean_x1(&self, ic: usize) -> f64 {
        let vals: Vec<f64> = self
            .cells
            .iter()
            .map(|row| row[ic].tail_mean_x1)
            .filter(|v| v.is_finite())
            .collect();
        if vals.is_empty() {
            f64::NAN
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    }
}

/// Integrates every `(grid value, IC)` cell and stores its positive maxima.
/// Cells are independent; the result does not depend on `jobs`.
pub fn bifurcation_sweep(
    family: &HnnFamily,
    sweep: &Sweep,
    ics: &[State],
    config: &SolverConfig,
    transient_fraction: f64,
    jobs: Jobs,
) -> Result<BifurcationDataset> {
    config.validate()?;
    if ics.is_empty() {
        return Err(Error::domain("at least one initial condition is required"));
    }
    let grid = sweep.grid();
    let n_ic = ics.len();
    let cells: Vec<Result<BifurcationCell>> = map_indexed(jobs, grid.len() * n_ic, |idx| {
        let (g, k) = (idx / n_ic, idx % n_ic);
        let traj = family.integrate(sweep.parameter, grid[g], ics[k], config)?;
        let maxima = extract_maxima(&traj, transient_fraction)?;
        if maxima.unbounded {
            warn!("{}={} ic #{} is unbounded", sweep.parameter.name(), grid[g], k + 1);
        }
        Ok(BifurcationCell {
            tail_mean_x1: tail_mean(&traj, transient_fraction),
            maxima,
        })
    });
    let mut rows: Vec<Vec<BifurcationCell>> = Vec::with_capacity(grid.len());
    let mut iter = cells.into_iter();
    for _ in 0..grid.len() {
        rows.push(iter.by_ref().take(n_ic).collect::<Result<Vec<_>>>()?);
    }
    Ok(BifurcationDataset {
        parameter: sweep.parameter,
        grid,
        ics: ics.to_vec(),
        config: *config,
        family: *family,
        cells: rows,
    })
}

fn tail_mean(traj: &Trajectory, transient_fraction: f64) -> f64 {
    if !traj.is_completed() {
        return f64::NAN;
    }
    let start = super::maxima::transient_start(traj.len(), transient_fraction);
    let tail = &traj.component(0)[start..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    /// Grid value actually used.
    pub value: f64,
    pub clamped: bool,
    pub per_ic: Vec<MaximaSet>,
}

/// The dataset column nearest to `value` (clamped to the grid range).
pub fn cross_section(bd: &BifurcationDataset, value: f64) -> Result<CrossSection> {
    if bd.grid.is_empty() || bd.cells.is_empty() {
        return Err(Error::InsufficientData("empty bifurcation dataset".into()));
    }
    let (lo, hi) = (bd.grid[0], bd.grid[bd.grid.len() - 1]);
    let clamped = value < lo || value > hi;
    if clamped {
        warn!("cross-section at {value} lies outside [{lo}, {hi}]; using the nearest endpoint");
    }
    let g = bd
        .grid
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - value).abs().total_cmp(&(b.1 - value).abs()))
        .map(|(g, _)| g)
        .expect("grid is non-empty");
    Ok(CrossSection {
        value: bd.grid[g],
        clamped,
        per_ic: bd.cells[g].iter().map(|c| c.maxima.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_sweep(jobs: Jobs) -> BifurcationDataset {
        let family = HnnFamily::new(HnnParams::default(), 0.99975);
        let sweep = Sweep::new(SweepParameter::Order, 0.998, 1.0, 3).unwrap();
        let ics = [[0.493, 0.366, -3.267], [1e-3, 1e-3, 1e-3]];
        bifurcation_sweep(&family, &sweep, &ics, &SolverConfig::new(0.05, 100.0), 0.5, jobs).unwrap()
    }

    #[test]
    fn grid_construction() {
        let s = Sweep::new(SweepParameter::Order, 0.94, 1.0, 4).unwrap();
        let g = s.grid();
        assert_eq!(g.len(), 4);
        assert_eq!(g[0], 0.94);
        assert_eq!(g[3], 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(Sweep::new(SweepParameter::Order, 0.94, 1.0, 1).is_err());
        assert!(Sweep::new(SweepParameter::Order, 1.0, 0.9, 5).is_err());
    }

    #[test]
    fn parameter_names() {
        assert_eq!(SweepParameter::parse("q").unwrap(), SweepParameter::Order);
        assert_eq!(
            SweepParameter::parse("w11").unwrap(),
            SweepParameter::Weight { row: 1, col: 1 }
        );
        assert!(SweepParameter::parse("x1").is_err());
        assert_eq!(SweepParameter::Weight { row: 2, col: 3 }.name(), "w23");
    }

    #[test]
    fn degenerate_grid_gives_identical_cells() {
        let family = HnnFamily::new(HnnParams::default(), 0.99925);
        let sweep = Sweep::new(SweepParameter::Weight { row: 1, col: 1 }, 1.8, 1.8, 2).unwrap();
        let bd = bifurcation_sweep(
            &family,
            &sweep,
            &[[0.493, 0.366, -3.267]],
            &SolverConfig::new(0.05, 60.0),
            0.5,
            Jobs::Serial,
        )
        .unwrap();
        assert_eq!(bd.cells[0], bd.cells[1]);
    }

    #[test]
    fn parallel_matches_serial_and_direct_runs() {
        let serial = small_sweep(Jobs::Serial);
        assert_eq!(small_sweep(Jobs::Threads(3)), serial);
        let direct = abm_integrate(
            &HnnParams::default().ivp(serial.grid[1], [1e-3, 1e-3, 1e-3]).unwrap(),
            &serial.config,
        )
        .unwrap();
        let cs = cross_section(&serial, 0.999).unwrap();
        assert_eq!(cs.value, serial.grid[1]);
        assert_eq!(cs.per_ic[1], extract_maxima(&direct, 0.5).unwrap());
    }

    #[test]
    fn cross_section_clamps() {
        let bd = small_sweep(Jobs::Serial);
        let cs = cross_section(&bd, 2.0).unwrap();
        assert!(cs.clamped);
        assert_eq!(cs.value, 1.0);
        let mut empty = bd.clone();
        empty.grid.clear();
        empty.cells.clear();
        assert!(cross_section(&empty, 1.0).is_err());
    }
}
