//! Empirical order of convergence of the ABM scheme against known solutions.

use crate::abm::abm_integrate;
use crate::error::{Error, Result};
use crate::gamma::gamma_unchecked;
use crate::ivp::{FractionalIvp, SolverConfig, VectorField};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `(h, max_i ‖x(t_i) - x_i‖∞)` for each step size.
    pub errors: Vec<(f64, f64)>,
    /// Least-squares slope of `log(error)` against `log(h)`.
    pub slope: f64,
}

/// Manufactured problem `D^q x = Γ(3)/Γ(3-q) t^(2-q) + t² - x`, `x(0) = 0`,
/// whose exact solution is `x(t) = t²` for every order.
pub fn manufactured_square(
    q: f64,
) -> Result<FractionalIvp<impl Fn(f64, &[f64], &mut [f64]) + Sync + Clone>> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::domain(format!("order q must lie in (0, 1], got {q}")));
    }
    let coef = gamma_unchecked(3.0) / gamma_unchecked(3.0 - q);
    FractionalIvp::new(q, vec![0.0], move |t: f64, x: &[f64], dx: &mut [f64]| {
        dx[0] = coef * t.powf(2.0 - q) + t * t - x[0];
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Integrates `ivp` on `[0, horizon]` for each `h` and fits the observed order.
///
/// `exact(t, out)` writes the exact solution at `t`.
pub fn convergence_order_estimate<F, E>(
    ivp: &FractionalIvp<F>,
    exact: E,
    horizon: f64,
    h_list: &[f64],
    corrector_iterations: usize,
) -> Result<ConvergenceReport>
where
    F: VectorField,
    E: Fn(f64, &mut [f64]),
{
    if h_list.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 step sizes, got {}",
            h_list.len()
        )));
    }
    for &h in h_list {
        let ratio = horizon / h;
        if !(h > 0.0) || (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::config(format!("step {h} does not divide horizon {horizon}")));
        }
    }
    let mut exact_state = vec![0.0; ivp.dimension()];
    let mut errors = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let config = SolverConfig::new(h, horizon).with_corrector_iterations(corrector_iterations);
        let traj = abm_integrate(ivp, &config)?;
        if !traj.is_completed() {
            return Err(Error::Integration {
                step: traj.len(),
                reason: "trajectory left the bounded region".into(),
            });
        }
        let mut worst = 0.0_f64;
        for i in 1..traj.len() {
            exact(traj.time(i), &mut exact_state);
            if exact_state.iter().any(|v| v.is_nan()) {
                return Err(Error::domain(format!("exact solution is NaN at t = {}", traj.time(i))));
            }
            for (c, e) in exact_state.iter().enumerate() {
                worst = worst.max((traj.component(c)[i] - e).abs());
            }
        }
        errors.push((h, worst));
    }
    let logs: Vec<(f64, f64)> = errors.iter().map(|&(h, e)| (h.ln(), e.ln())).collect();
    Ok(ConvergenceReport {
        slope: least_squares_slope(&logs),
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const H_LIST: [f64; 3] = [0.02, 0.01, 0.005];

    fn square(t: f64, out: &mut [f64]) {
        out[0] = t * t;
    }

    #[test]
    fn second_order_at_unit_order() {
        let ivp = manufactured_square(1.0).unwrap();
        let r = convergence_order_estimate(&ivp, square, 1.0, &H_LIST, 1).unwrap();
        assert!((r.slope - 2.0).abs() <= 0.15, "slope {} errors {:?}", r.slope, r.errors);
    }

    #[test]
    fn fractional_order_meets_one_plus_q() {
        let ivp = manufactured_square(0.9).unwrap();
        let r = convergence_order_estimate(&ivp, square, 1.0, &H_LIST, 1).unwrap();
        assert!(r.slope >= 1.7, "slope {} errors {:?}", r.slope, r.errors);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [0.1f64, 0.05, 0.025]
            .iter()
            .map(|h| (h.ln(), (3.0 * h * h).ln()))
            .collect();
        assert!((least_squares_slope(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        let ivp = manufactured_square(0.9).unwrap();
        assert!(matches!(
            convergence_order_estimate(&ivp, square, 1.0, &[0.01], 1),
            Err(Error::InsufficientData(_))
        ));
        assert!(convergence_order_estimate(&ivp, square, 1.0, &[0.3, 0.2, 0.1], 1).is_err());
        let nan = |_t: f64, out: &mut [f64]| out[0] = f64::NAN;
        assert!(matches!(
            convergence_order_estimate(&ivp, nan, 1.0, &H_LIST, 1),
            Err(Error::Domain(_))
        ));
    }
}
