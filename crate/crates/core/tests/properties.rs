use fohnn_core::dynamics::{
    basin_scan, bifurcation_sweep, classify_trajectory, cross_section, extract_maxima,
    hidden_attractor_test, AttractorSign, BasinSpec, ClassifierTolerances, HnnFamily, Jobs, Sweep,
    SweepParameter, TrajectoryKind,
};
use fohnn_core::hnn::{default_guesses, find_equilibria, HnnParams};
use fohnn_core::{abm_integrate, SolverConfig};
use proptest::prelude::*;

fn small_basin(jobs: Jobs) -> fohnn_core::dynamics::BasinGrid {
    let spec = BasinSpec {
        u_range: (-4.0, 4.0),
        v_range: (-4.0, 4.0),
        resolution: (8, 8),
        ..BasinSpec::default()
    };
    basin_scan(
        &spec,
        &HnnParams::default(),
        0.99975,
        &SolverConfig::new(0.02, 40.0),
        &ClassifierTolerances::default(),
        jobs,
    )
    .unwrap()
}

#[test]
fn basin_labels_are_antisymmetric() {
    let grid = small_basin(Jobs::Auto);
    let (nu, nv) = grid.spec.resolution;
    for iv in 0..nv {
        for iu in 0..nu {
            let p = grid.initial_condition(iu, iv);
            let m = grid.initial_condition(nu - 1 - iu, nv - 1 - iv);
            assert_eq!(p, m.map(|v| -v));
            assert_eq!(grid.label(nu - 1 - iu, nv - 1 - iv), grid.label(iu, iv).mirrored());
        }
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let family = HnnFamily::new(HnnParams::default(), 0.99975);
    let sweep = Sweep::new(SweepParameter::Weight { row: 1, col: 1 }, 1.9, 2.0, 5).unwrap();
    let ics = [[0.493, 0.366, -3.267], [2.0; 3]];
    let config = SolverConfig::new(0.02, 60.0);
    let sweeps: Vec<String> = [Jobs::Serial, Jobs::Threads(3), Jobs::Auto]
        .into_iter()
        .map(|jobs| format!("{:?}", bifurcation_sweep(&family, &sweep, &ics, &config, 0.5, jobs).unwrap()))
        .collect();
    assert_eq!(sweeps[0], sweeps[1]);
    assert_eq!(sweeps[0], sweeps[2]);

    assert_eq!(format!("{:?}", small_basin(Jobs::Serial)), format!("{:?}", small_basin(Jobs::Threads(3))));

    let params = HnnParams::default();
    let eqs = find_equilibria(&params, &default_guesses()).unwrap();
    let hidden = |jobs| {
        let r = hidden_attractor_test(
            &params,
            0.99975,
            &eqs,
            &[AttractorSign::Plus, AttractorSign::Minus],
            0.1,
            4,
            5,
            &SolverConfig::new(0.05, 40.0),
            &ClassifierTolerances::default(),
            jobs,
        )
        .unwrap();
        format!("{r:?}")
    };
    assert_eq!(hidden(Jobs::Serial), hidden(Jobs::Threads(2)));
}

#[test]
fn cross_sections_equal_direct_integrations() {
    let family = HnnFamily::new(HnnParams::default(), 0.99975);
    let sweep = Sweep::new(SweepParameter::Order, 0.998, 1.0, 5).unwrap();
    let ics = [[0.493, 0.366, -3.267], [1e-3; 3]];
    let config = SolverConfig::new(0.02, 80.0);
    let ds = bifurcation_sweep(&family, &sweep, &ics, &config, 0.5, Jobs::Auto).unwrap();
    for &v in &ds.grid {
        let section = cross_section(&ds, v).unwrap();
        assert_eq!(section.value, v);
        for (k, ic) in ics.iter().enumerate() {
            let traj = abm_integrate(&HnnParams::default().ivp(v, *ic).unwrap(), &config).unwrap();
            let direct = extract_maxima(&traj, 0.5).unwrap();
            let bits = |m: &[f64]| m.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&section.per_ic[k].values), bits(&direct.values));
        }
    }
}

#[test]
fn well_closed_npt_survives_longer_integration() {
    let tol = ClassifierTolerances::default();
    let mut checked = 0;
    for q in [0.95, 0.98, 1.0] {
        for w11 in [1.0, 1.4, 1.6] {
            let params = HnnParams::default().with_weight(1, 1, w11).unwrap();
            let classify = |horizon: f64| {
                let ivp = params.ivp(q, [0.493, 0.366, -3.267]).unwrap();
                let traj = abm_integrate(&ivp, &SolverConfig::new(0.05, horizon)).unwrap();
                classify_trajectory(&traj, &tol).unwrap()
            };
            let short = classify(300.0);
            let well_closed = short.closing_error.is_some_and(|e| e <= tol.closing_error / 10.0);
            let TrajectoryKind::Npt { clusters } = short.kind else { continue };
            if !well_closed {
                continue;
            }
            let long = classify(450.0);
            assert_eq!(long.kind, TrajectoryKind::Npt { clusters }, "q={q} w11={w11}");
            assert_eq!(long.attractor_sign, short.attractor_sign);
            checked += 1;
        }
    }
    assert!(checked >= 3, "only {checked} cases met the precondition");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trajectories_are_negation_equivariant(
        x0 in prop::array::uniform3(-4.0f64..4.0),
        q in 0.6f64..=1.0,
    ) {
        let params = HnnParams::default();
        let config = SolverConfig::new(0.02, 30.0);
        let a = abm_integrate(&params.ivp(q, x0).unwrap(), &config).unwrap();
        let b = abm_integrate(&params.ivp(q, x0.map(|v| -v)).unwrap(), &config).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for c in 0..3 {
            for (u, v) in a.component(c).iter().zip(b.component(c)) {
                prop_assert!((u + v).abs() <= 1e-12);
            }
        }
    }
}
