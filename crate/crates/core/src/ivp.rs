//! Problem, configuration and solution types for commensurate Caputo IVPs
//! `D^q x(t) = f(t, x(t))`, `x(0) = x0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Right-hand side `f(t, x)` of a fractional system.
///
/// `dx` has the same length as `x`. Autonomous systems ignore `t`.
pub trait VectorField: Sync {
    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]);
}

impl<F> VectorField for F
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        self(t, x, dx)
    }
}

/// A commensurate-order Caputo initial value problem.
#[derive(Debug, Clone)]
pub struct FractionalIvp<F> {
    order: f64,
    x0: Vec<f64>,
    rhs: F,
}

impl<F: VectorField> FractionalIvp<F> {
    pub fn new(order: f64, x0: Vec<f64>, rhs: F) -> Result<Self> {
        if !(order > 0.0 && order <= 1.0) {
            return Err(Error::domain(format!("order q must lie in (0, 1], got {order}")));
        }
        if x0.is_empty() {
            return Err(Error::domain("initial state must have positive dimension"));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("initial state must be finite"));
        }
        Ok(Self { order, x0, rhs })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn dimension(&self) -> usize {
        self.x0.len()
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.x0
    }

    pub fn rhs(&self) -> &F {
        &self.rhs
    }
}

/// Fixed-step solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub h: f64,
    pub horizon: f64,
    pub corrector_iterations: usize,
    /// Max-norm beyond which the trajectory is declared unbounded.
    pub blowup_threshold: f64,
}

impl SolverConfig {
    pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;

    pub fn new(h: f64, horizon: f64) -> Self {
        Self {
            h,
            horizon,
            corrector_iterations: 1,
            blowup_threshold: Self::DEFAULT_BLOWUP_THRESHOLD,
        }
    }

    pub fn with_corrector_iterations(mut self, iterations: usize) -> Self {
        self.corrector_iterations = iterations;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    /// Number of steps `N = round(T / h)`.
    pub fn steps(&self) -> usize {
        (self.horizon / self.h).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::config(format!("step size h must be positive, got {}", self.h)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::config(format!("horizon T must be positive, got {}", self.horizon)));
        }
        if self.steps() < 1 {
            return Err(Error::config("horizon must cover at least one step"));
        }
        if self.corrector_iterations < 1 {
            return Err(Error::config("corrector_iterations must be at least 1"));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::config("blowup_threshold must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryStatus {
    Completed,
    /// The state at `step` exceeded the blow-up threshold; the stored
    /// trajectory ends at `step - 1`.
    Unbounded { step: usize },
}

/// Numerical solution on the grid `t_i = i h`.
///
/// States and right-hand-side history are stored component-major:
/// `states[c][i]` is component `c` at grid point `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub(crate) h: f64,
    pub(crate) status: TrajectoryStatus,
    pub(crate) states: Vec<Vec<f64>>,
    pub(crate) rhs_history: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Builds a trajectory from sampled component series (mainly for
    /// post-processing data that did not come from the integrator).
    pub fn from_components(h: f64, states: Vec<Vec<f64>>) -> Result<Self> {
        let len = states.first().map(Vec::len).unwrap_or(0);
        if states.iter().any(|c| c.len() != len) || len == 0 {
            return Err(Error::domain("components must be non-empty and of equal length"));
        }
        if !(h > 0.0) {
            return Err(Error::domain("step size must be positive"));
        }
        let rhs_history = vec![Vec::new(); states.len()];
        Ok(Self {
            h,
            status: TrajectoryStatus::Completed,
            states,
            rhs_history,
        })
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn status(&self) -> TrajectoryStatus {
        self.status
    }

    pub fn is_completed(&self) -> bool {
        self.status == TrajectoryStatus::Completed
    }

    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    /// Number of stored grid points.
    pub fn len(&self) -> usize {
        self.states[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, i: usize) -> f64 {
        self.h * i as f64
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.states[c]
    }

    /// Stored `f(x_j)` values of component `c` (empty for trajectories not
    /// produced by the integrator).
    pub fn rhs_component(&self, c: usize) -> &[f64] {
        &self.rhs_history[c]
    }

    pub fn state(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|c| c[i]).collect()
    }

    pub fn final_state(&self) -> Vec<f64> {
        self.state(self.len() - 1)
    }
}
