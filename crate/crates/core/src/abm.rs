//! Fractional Adams-Bashforth-Moulton PECE integrator (full memory).

use crate::error::{Error, Result};
use crate::ivp::{FractionalIvp, SolverConfig, Trajectory, TrajectoryStatus, VectorField};
use crate::weights::WeightTable;

/// Returns `(Σ wa[j] x[j], Σ wb[j] x[j])` over `j >= start`.
///
/// Eight independent partial sums per product keep the loop vectorizable.
/// The summation order is fixed, so results are reproducible bit for bit.
#[inline]
fn dual_dot(wa: &[f64], wb: &[f64], x: &[f64], start: usize) -> (f64, f64) {
    const LANES: usize = 8;
    let n = x.len();
    let (wa, wb, x) = (&wa[start..n], &wb[start..n], &x[start..n]);
    let mut acc_a = [0.0; LANES];
    let mut acc_b = [0.0; LANES];
    let chunks = x.len() / LANES;
    for k in 0..chunks {
        let base = k * LANES;
        let xa = &x[base..base + LANES];
        let ca = &wa[base..base + LANES];
        let cb = &wb[base..base + LANES];
        for l in 0..LANES {
            acc_a[l] += ca[l] * xa[l];
            acc_b[l] += cb[l] * xa[l];
        }
    }
    let mut sa = 0.0;
    let mut sb = 0.0;
    for k in chunks * LANES..x.len() {
        sa += wa[k] * x[k];
        sb += wb[k] * x[k];
    }
    for l in 0..LANES {
        sa += acc_a[l];
        sb += acc_b[l];
    }
    (sa, sb)
}

fn check_finite(values: &[f64], step: usize) -> Result<()> {
    if values.iter().all(|v| !v.is_nan()) {
        Ok(())
    } else {
        Err(Error::Integration {
            step,
            reason: "right-hand side returned NaN".into(),
        })
    }
}

/// Integrates `ivp` on `[0, T]` with the fractional ABM predictor-corrector.
///
/// Step `i + 1`:
/// ```text
/// x^P     = x0 + 1/Γ(q) Σ_{j<=i} b_{j,i+1} f(x_j)
/// x_{i+1} = x0 + h^q/Γ(q+2) (Σ_{j<=i} a_{j,i+1} f(x_j) + f(x^P))
/// ```
/// The correct-evaluate pair runs `corrector_iterations` times. A state whose
/// max-norm exceeds the blow-up threshold ends the run with
/// [`TrajectoryStatus::Unbounded`]; a NaN from the right-hand side is an error.
pub fn abm_integrate<F: VectorField>(
    ivp: &FractionalIvp<F>,
    config: &SolverConfig,
) -> Result<Trajectory> {
    config.validate()?;
    let n = ivp.dimension();
    let steps = config.steps();
    let h = config.h;
    let x0 = ivp.initial_state();
    let rhs = ivp.rhs();
    let weights = WeightTable::new(ivp.order(), h, steps);
    let corr_scale = weights.corrector_scale();

    let mut states: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            let mut v = Vec::with_capacity(steps + 1);
            v.push(x0[c]);
            v
        })
        .collect();
    let mut history: Vec<Vec<f64>> = (0..n).map(|_| Vec::with_capacity(steps + 1)).collect();

    let mut f = vec![0.0; n];
    rhs.eval(0.0, x0, &mut f);
    check_finite(&f, 0)?;
    for c in 0..n {
        history[c].push(f[c]);
    }

    let mut fixed = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut status = TrajectoryStatus::Completed;

    for i in 0..steps {
        let t_next = h * (i + 1) as f64;
        let pred_w = weights.predictor(i);
        let corr_w = weights.corrector(i);
        let a0 = weights.corrector_first(i);

        for c in 0..n {
            let hist = &history[c];
            let (pred_tail, corr_tail) = dual_dot(pred_w, corr_w, hist, 1);
            let pred = pred_w[0] * hist[0] + pred_tail;
            x[c] = x0[c] + pred;
            // Everything in the corrector except the newest evaluation.
            fixed[c] = x0[c] + a0 * hist[0] + corr_tail;
        }

        for _ in 0..config.corrector_iterations {
            rhs.eval(t_next, &x, &mut f);
            check_finite(&f, i + 1)?;
            for c in 0..n {
                x[c] = fixed[c] + corr_scale * f[c];
            }
        }

        let norm = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !(norm <= config.blowup_threshold) {
            status = TrajectoryStatus::Unbounded { step: i + 1 };
            break;
        }

        rhs.eval(t_next, &x, &mut f);
        check_finite(&f, i + 1)?;
        for c in 0..n {
            states[c].push(x[c]);
            history[c].push(f[c]);
        }
    }

    Ok(Trajectory {
        h,
        status,
        states,
        rhs_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::gamma_real;

    fn decay(_t: f64, x: &[f64], dx: &mut [f64]) {
        dx[0] = -x[0];
    }

    #[test]
    fn dual_dot_matches_naive_sum() {
        let wa: Vec<f64> = (0..37).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let wb: Vec<f64> = (0..37).map(|k| (k as f64).sin()).collect();
        let x: Vec<f64> = (0..37).map(|k| (k as f64 * 0.3).cos()).collect();
        for start in [0, 1, 5] {
            let (sa, sb) = dual_dot(&wa, &wb, &x, start);
            let na: f64 = (start..37).map(|k| wa[k] * x[k]).sum();
            let nb: f64 = (start..37).map(|k| wb[k] * x[k]).sum();
            assert!((sa - na).abs() < 1e-13);
            assert!((sb - nb).abs() < 1e-13);
        }
    }

    #[test]
    fn classical_exponential_decay() {
        let ivp = FractionalIvp::new(1.0, vec![1.0], decay).unwrap();
        let traj = abm_integrate(&ivp, &SolverConfig::new(0.001, 1.0)).unwrap();
        assert_eq!(traj.len(), 1001);
        let x1 = *traj.component(0).last().unwrap();
        assert!((x1 - (-1.0_f64).exp()).abs() < 1e-5, "x(1) = {x1}");
    }

    #[test]
    fn manufactured_square_at_half_order() {
        let q = 0.5;
        let coef = gamma_real(3.0).unwrap() / gamma_real(3.0 - q).unwrap();
        let rhs = move |t: f64, _x: &[f64], dx: &mut [f64]| dx[0] = coef * t.powf(2.0 - q);
        let ivp = FractionalIvp::new(q, vec![0.0], rhs).unwrap();
        let traj = abm_integrate(&ivp, &SolverConfig::new(0.01, 1.0)).unwrap();
        let x1 = *traj.component(0).last().unwrap();
        // O(h^2) with a modest constant.
        assert!((x1 - 1.0).abs() < 5e-4, "x(1) = {x1}");
    }

    #[test]
    fn unit_order_matches_hand_coded_trapezoid_pece() {
        // x' = A x for a fixed 2x2 matrix; q = 1 collapses the scheme to
        // x^P = x0 + h Σ f_j and x_{i+1} = x0 + h/2 (f_0 + 2 Σ_{1..i} f_j + f(x^P)).
        let a = [[-0.3, 1.1], [-0.9, 0.2]];
        let rhs = move |_t: f64, x: &[f64], dx: &mut [f64]| {
            dx[0] = a[0][0] * x[0] + a[0][1] * x[1];
            dx[1] = a[1][0] * x[0] + a[1][1] * x[1];
        };
        let (h, steps) = (0.01, 500);
        let ivp = FractionalIvp::new(1.0, vec![1.0, -0.5], rhs).unwrap();
        let traj = abm_integrate(&ivp, &SolverConfig::new(h, h * steps as f64)).unwrap();

        let x0 = [1.0, -0.5];
        let mut fs: Vec<[f64; 2]> = Vec::new();
        let mut x = x0;
        let eval = |x: [f64; 2]| {
            let mut d = [0.0; 2];
            rhs(0.0, &x, &mut d);
            d
        };
        fs.push(eval(x));
        for i in 0..steps {
            let mut xp = x0;
            let mut mid = [0.0; 2];
            for c in 0..2 {
                xp[c] += h * fs.iter().map(|f| f[c]).sum::<f64>();
                mid[c] = fs[1..].iter().map(|f| f[c]).sum::<f64>();
            }
            let fp = eval(xp);
            for c in 0..2 {
                x[c] = x0[c] + h / 2.0 * (fs[0][c] + 2.0 * mid[c] + fp[c]);
            }
            fs.push(eval(x));
            for c in 0..2 {
                let got = traj.component(c)[i + 1];
                assert!((got - x[c]).abs() < 1e-12, "step {} comp {c}: {got} vs {}", i + 1, x[c]);
            }
        }
    }

    #[test]
    fn history_holds_one_value_per_point() {
        let ivp = FractionalIvp::new(0.8, vec![1.0], decay).unwrap();
        let traj = abm_integrate(&ivp, &SolverConfig::new(0.1, 2.0)).unwrap();
        assert_eq!(traj.len(), 21);
        assert_eq!(traj.rhs_component(0).len(), 21);
        for (x, f) in traj.component(0).iter().zip(traj.rhs_component(0)) {
            assert_eq!(*f, -x);
        }
        let times: Vec<f64> = traj.times().collect();
        for w in times.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn blowup_is_reported_not_raised() {
        let grow = |_t: f64, x: &[f64], dx: &mut [f64]| dx[0] = x[0] * x[0];
        let ivp = FractionalIvp::new(0.9, vec![2.0], grow).unwrap();
        let traj = abm_integrate(&ivp, &SolverConfig::new(0.01, 5.0)).unwrap();
        match traj.status() {
            TrajectoryStatus::Unbounded { step } => {
                assert_eq!(traj.len(), step);
                assert_eq!(traj.rhs_component(0).len(), step);
                assert!(traj.component(0).iter().all(|v| v.abs() <= 1e6));
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn nan_rhs_is_an_error() {
        let bad = |t: f64, _x: &[f64], dx: &mut [f64]| dx[0] = if t > 0.5 { f64::NAN } else { 1.0 };
        let ivp = FractionalIvp::new(0.9, vec![0.0], bad).unwrap();
        let err = abm_integrate(&ivp, &SolverConfig::new(0.1, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Integration { .. }));
    }

    #[test]
    fn extra_corrector_iterations_reduce_error() {
        let q = 0.6;
        let coef = gamma_real(3.0).unwrap() / gamma_real(3.0 - q).unwrap();
        // Solution-dependent manufactured problem: D^q x = coef t^{2-q} + (t^2 - x).
        let rhs = move |t: f64, x: &[f64], dx: &mut [f64]| {
            dx[0] = coef * t.powf(2.0 - q) + (t * t - x[0]);
        };
        let ivp = FractionalIvp::new(q, vec![0.0], rhs).unwrap();
        let cfg = SolverConfig::new(0.05, 1.0);
        let e1 = (abm_integrate(&ivp, &cfg).unwrap().final_state()[0] - 1.0).abs();
        let e3 = (abm_integrate(&ivp, &cfg.with_corrector_iterations(3))
            .unwrap()
            .final_state()[0]
            - 1.0)
            .abs();
        assert!(e3 <= e1, "e1={e1} e3={e3}");
    }
}
