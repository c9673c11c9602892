//! The 3-neuron fractional Hopfield network
//! `D^q x_i = -x_i + Σ_j w_ij tanh(x_j)`.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ivp::FractionalIvp;

pub type State = [f64; 3];
pub type Matrix3 = [[f64; 3]; 3];

/// Residual threshold for accepting a Newton root.
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-10;
const NEWTON_MAX_ITERATIONS: usize = 100;
const NEWTON_MAX_HALVINGS: usize = 20;
const DEDUP_DISTANCE: f64 = 1e-6;
const LABEL_DISTANCE: f64 = 0.1;

/// Nonzero equilibrium `X1*` as printed to three decimals; `X2* = -X1*`.
pub const X1_REFERENCE: State = [0.493, 0.366, -3.267];

/// Weight matrix of the network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HnnParams {
    pub w: Matrix3,
}

impl Default for HnnParams {
    fn default() -> Self {
        Self {
            w: [[1.995, -1.2, 0.0], [2.0, 1.71, 1.15], [-4.75, 0.0, 1.1]],
        }
    }
}

impl HnnParams {
    /// Sets `w_{row,col}` using 1-based indices, as in `w11`..`w33`.
    pub fn with_weight(mut self, row: usize, col: usize, value: f64) -> Result<Self> {
        if !(1..=3).contains(&row) || !(1..=3).contains(&col) {
            return Err(Error::domain(format!("no weight w{row}{col}")));
        }
        self.w[row - 1][col - 1] = value;
        Ok(self)
    }

    /// Parses a weight name such as `w11` into 1-based `(row, col)`.
    pub fn parse_weight_name(name: &str) -> Option<(usize, usize)> {
        let digits = name.strip_prefix('w')?.as_bytes();
        match digits {
            [r @ b'1'..=b'3', c @ b'1'..=b'3'] => Some(((r - b'0') as usize, (c - b'0') as usize)),
            _ => None,
        }
    }

    /// Fractional IVP of order `q` starting at `x0`.
    pub fn ivp(
        &self,
        q: f64,
        x0: State,
    ) -> Result<FractionalIvp<impl Fn(f64, &[f64], &mut [f64]) + Sync + Clone>> {
        let params = *self;
        FractionalIvp::new(q, x0.to_vec(), move |_t: f64, x: &[f64], dx: &mut [f64]| {
            let y = hnn_rhs(&[x[0], x[1], x[2]], &params);
            dx.copy_from_slice(&y);
        })
    }
}

fn sech2(u: f64) -> f64 {
    let c = u.cosh();
    1.0 / (c * c)
}

/// `f_i(x) = -x_i + Σ_j w_ij tanh(x_j)`.
pub fn hnn_rhs(x: &State, params: &HnnParams) -> State {
    let t = [x[0].tanh(), x[1].tanh(), x[2].tanh()];
    let mut out = [0.0; 3];
    for (i, row) in params.w.iter().enumerate() {
        out[i] = -x[i] + (row[0] * t[0] + row[1] * t[1] + row[2] * t[2]);
    }
    out
}

/// `J_ij = w_ij sech²(x_j) - δ_ij`.
pub fn hnn_jacobian(x: &State, params: &HnnParams) -> Matrix3 {
    let s = [sech2(x[0]), sech2(x[1]), sech2(x[2])];
    let mut j = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            j[r][c] = params.w[r][c] * s[c] - if r == c { 1.0 } else { 0.0 };
        }
    }
    j
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumLabel {
    X0,
    X1,
    X2,
    Other,
}

impl std::fmt::Display for EquilibriumLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EquilibriumLabel::X0 => "X0",
            EquilibriumLabel::X1 => "X1",
            EquilibriumLabel::X2 => "X2",
            EquilibriumLabel::Other => "other",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub point: State,
    pub label: EquilibriumLabel,
}

fn max_norm(v: &State) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn distance(a: &State, b: &State) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn label_for(point: &State) -> EquilibriumLabel {
    let x2 = X1_REFERENCE.map(|v| -v);
    [
        (EquilibriumLabel::X0, [0.0; 3]),
        (EquilibriumLabel::X1, X1_REFERENCE),
        (EquilibriumLabel::X2, x2),
    ]
    .into_iter()
    .map(|(label, p)| (label, distance(point, &p)))
    .filter(|(_, d)| *d <= LABEL_DISTANCE)
    .min_by(|a, b| a.1.total_cmp(&b.1))
    .map(|(label, _)| label)
    .unwrap_or(EquilibriumLabel::Other)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot is numerically zero.
pub(crate) fn solve3(a: &Matrix3, b: &State) -> Option<State> {
    let mut m = [[0.0; 4]; 3];
    for r in 0..3 {
        m[r][..3].copy_from_slice(&a[r]);
        m[r][3] = b[r];
    }
    let scale = a.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs())).max(1.0);
    for col in 0..3 {
        let pivot = (col..3).max_by(|&p, &q| m[p][col].abs().total_cmp(&m[q][col].abs()))?;
        if m[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        m.swap(col, pivot);
        for r in col + 1..3 {
            let factor = m[r][col] / m[col][col];
            for k in col..4 {
                m[r][k] -= factor * m[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let tail: f64 = (r + 1..3).map(|k| m[r][k] * x[k]).sum();
        x[r] = (m[r][3] - tail) / m[r][r];
    }
    Some(x)
}

fn newton(guess: &State, params: &HnnParams) -> Option<State> {
    let mut x = *guess;
    let mut f = hnn_rhs(&x, params);
    let mut residual = max_norm(&f);
    for _ in 0..NEWTON_MAX_ITERATIONS {
        if residual < EQUILIBRIUM_TOLERANCE {
            return Some(x);
        }
        let jac = hnn_jacobian(&x, params);
        let Some(step) = solve3(&jac, &f) else {
            debug!("singular Jacobian at {x:?}; skipping guess {guess:?}");
            return None;
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=NEWTON_MAX_HALVINGS {
            let trial = [
                x[0] - lambda * step[0],
                x[1] - lambda * step[1],
                x[2] - lambda * step[2],
            ];
            let f_trial = hnn_rhs(&trial, params);
            let r_trial = max_norm(&f_trial);
            if r_trial < residual {
                x = trial;
                f = f_trial;
                residual = r_trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if residual < EQUILIBRIUM_TOLERANCE {
        Some(x)
    } else {
        debug!("Newton did not converge from {guess:?} (residual {residual:e})");
        None
    }
}

/// Default Newton starting points: the origin and `±(0.5, 0.4, -3.3)`.
pub fn default_guesses() -> Vec<State> {
    vec![[0.0, 0.0, 0.0], [0.5, 0.4, -3.3], [-0.5, -0.4, 3.3]]
}

/// Damped Newton from each guess; failed guesses are skipped, roots closer
/// than 1e-6 to an earlier root are dropped.
pub fn find_equilibria(params: &HnnParams, guesses: &[State]) -> Result<Vec<Equilibrium>> {
    if guesses.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::domain("Newton guesses must be finite"));
    }
    let mut found: Vec<Equilibrium> = Vec::new();
    for guess in guesses {
        if let Some(point) = newton(guess, params) {
            if found.iter().all(|e| distance(&e.point, &point) > DEDUP_DISTANCE) {
                found.push(Equilibrium {
                    point,
                    label: label_for(&point),
                });
            }
        }
    }
    Ok(found)
}
