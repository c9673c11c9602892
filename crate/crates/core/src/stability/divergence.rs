//! Fractional divergence `Div^q f = Σ_i ∂^q f_i / ∂x_i^q` of the network,
//! computed from truncated Taylor polynomials of `tanh` and the Caputo
//! derivative of monomials.

use log::warn;

use crate::error::{Error, Result};
use crate::gamma::gamma_unchecked;
use crate::hnn::{HnnParams, State};

/// Representative point of the origin's neighborhood used for divergence curves.
pub const DEFAULT_DIVERGENCE_POINT: State = [0.1, 0.1, 0.1];

const SUPPORTED_ORDERS: [usize; 4] = [1, 3, 5, 7];

/// Caputo derivative of `x^n`: `Γ(n+1)/Γ(n-q+1) x^(n-q)`, and 0 for `n = 0`.
pub fn caputo_monomial(n: u32, q: f64, x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::domain(format!(
            "Caputo derivative of a monomial needs x >= 0, got {x}"
        )));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::domain(format!("order q must lie in (0, 1], got {q}")));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let n = n as f64;
    Ok(gamma_unchecked(n + 1.0) / gamma_unchecked(n - q + 1.0) * x.powf(n - q))
}

/// Taylor coefficients `t_0..=t_order` of `tanh(c + u)` in `u`.
///
/// From `tanh' = 1 - tanh²`: `(k+1) t_{k+1} = [k = 0] - Σ_{m<=k} t_m t_{k-m}`.
pub fn tanh_taylor_coefficients(center: f64, order: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(order + 1);
    t.push(center.tanh());
    for k in 0..order {
        let conv: f64 = (0..=k).map(|m| t[m] * t[k - m]).sum();
        let delta = if k == 0 { 1.0 } else { 0.0 };
        t.push((delta - conv) / (k + 1) as f64);
    }
    t
}

/// Per-component polynomial in `u_i = x_i - c_i` of the part of `f_i` that
/// depends on `x_i`; constant terms are dropped because their Caputo
/// derivative vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceSeries {
    pub expansion_point: State,
    pub taylor_order: usize,
    /// `(coefficient, degree)` pairs with degree >= 1; the Caputo exponent of
    /// each term is `degree - q`.
    pub terms: [Vec<(f64, u32)>; 3],
}

impl DivergenceSeries {
    pub fn new(params: &HnnParams, center: State, taylor_order: usize) -> Result<Self> {
        if !SUPPORTED_ORDERS.contains(&taylor_order) {
            return Err(Error::domain(format!(
                "taylor_order must be one of {SUPPORTED_ORDERS:?}, got {taylor_order}"
            )));
        }
        let terms = std::array::from_fn(|i| {
            let w = params.w[i][i];
            tanh_taylor_coefficients(center[i], taylor_order)
                .into_iter()
                .enumerate()
                .skip(1)
                .map(|(k, t)| (w * t - if k == 1 { 1.0 } else { 0.0 }, k as u32))
                .filter(|(c, _)| *c != 0.0)
                .collect()
        });
        Ok(Self {
            expansion_point: center,
            taylor_order,
            terms,
        })
    }

    /// `Σ_i Σ_k c_ik D^q (u_i^k)` at `point`.
    ///
    /// Coordinates below the expansion point are evaluated at `|u_i|`
    /// (even extension; at `q = 1` this matches the even diagonal derivative
    /// of the odd expansion about the origin) and a warning is logged.
    pub fn evaluate(&self, point: &State, q: f64) -> Result<f64> {
        let mut total = 0.0;
        for i in 0..3 {
            let u = point[i] - self.expansion_point[i];
            if u < 0.0 {
                warn!("component {} lies below the expansion point; using |u| = {}", i + 1, -u);
            }
            let u = u.abs();
            for &(c, k) in &self.terms[i] {
                total += c * caputo_monomial(k, q, u)?;
            }
        }
        Ok(total)
    }
}

/// Fractional divergence with the expansion about the origin.
pub fn fractional_divergence(
    params: &HnnParams,
    point: &State,
    q: f64,
    taylor_order: usize,
) -> Result<f64> {
    fractional_divergence_about(params, &[0.0; 3], point, q, taylor_order)
}

/// Fractional divergence with the expansion about an arbitrary `center`
/// (e.g. a nonzero equilibrium).
pub fn fractional_divergence_about(
    params: &HnnParams,
    center: &State,
    point: &State,
    q: f64,
    taylor_order: usize,
) -> Result<f64> {
    DivergenceSeries::new(params, *center, taylor_order)?.evaluate(point, q)
}

/// Classical divergence `-3 + Σ_i w_ii sech²(x_i)`.
pub fn integer_divergence(params: &HnnParams, x: &State) -> f64 {
    (0..3)
        .map(|i| {
            let c = x[i].cosh();
            params.w[i][i] / (c * c) - 1.0
        })
        .sum()
}
