use fohnn_core::{abm_integrate, gamma_real, FractionalIvp, SolverConfig, TrajectoryStatus};

/// Mittag-Leffler function by its power series; fine for |z| <= 4.
fn mittag_leffler(q: f64, z: f64) -> f64 {
    (0..200)
        .map(|k| z.powi(k) / gamma_real(q * k as f64 + 1.0).unwrap())
        .take_while(|t| t.is_finite())
        .sum()
}

fn relaxation_error(q: f64, h: f64, horizon: f64) -> f64 {
    let ivp = FractionalIvp::new(q, vec![1.0], |_t: f64, x: &[f64], dx: &mut [f64]| dx[0] = -x[0]).unwrap();
    let traj = abm_integrate(&ivp, &SolverConfig::new(h, horizon)).unwrap();
    traj.times()
        .zip(traj.component(0))
        .map(|(t, x)| (x - mittag_leffler(q, -t.powf(q))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn relaxation_matches_mittag_leffler() {
    for q in [0.5, 0.8, 0.95] {
        let coarse = relaxation_error(q, 0.004, 2.0);
        let fine = relaxation_error(q, 0.002, 2.0);
        assert!(fine < 1e-3, "q={q}: error {fine}");
        assert!(fine < coarse, "q={q}: refinement did not help ({coarse} -> {fine})");
    }
}

#[test]
fn order_one_reproduces_the_exponential() {
    let err = relaxation_error(1.0, 0.001, 3.0);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn blow_up_is_reported_not_returned_as_garbage() {
    let ivp = FractionalIvp::new(0.9, vec![1.0], |_t: f64, x: &[f64], dx: &mut [f64]| dx[0] = x[0] * x[0]).unwrap();
    let traj = abm_integrate(&ivp, &SolverConfig::new(0.01, 10.0)).unwrap();
    assert!(matches!(traj.status(), TrajectoryStatus::Unbounded { .. }));
    assert!(traj.component(0).iter().all(|v| v.is_finite()));
}
