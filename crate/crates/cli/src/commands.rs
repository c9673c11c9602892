//! Parameter resolution and execution of each subcommand.

use std::time::Instant;

use clap::Parser;
use fohnn_core::dynamics::{
    basin_scan, bifurcation_sweep, classify_trajectory, h_delay_study, hidden_attractor_test,
    AttractorSign, BasinLabel, BasinSpec, BranchRole, ClassifierTolerances, HDelayConfig, HnnFamily,
    Jobs, ShiftOptions, Sweep, SweepParameter,
};
use fohnn_core::export::{
    format_number, write_basin_csv, write_basin_pgm, write_bifurcation_csv, write_hidden_csv,
    write_pairs_csv, write_shift_table_csv, write_stability_csv, write_trajectory_csv,
};
use fohnn_core::hnn::{default_guesses, find_equilibria, hnn_jacobian, HnnParams, X1_REFERENCE};
use fohnn_core::stability::{eigenvalues_3x3, fractional_divergence_about, stability_index};
use fohnn_core::{abm_integrate, Error, SolverConfig};
use serde_json::{json, Value};

use crate::manifest::{Outputs, RunManifest};
use crate::params::{FloatList, Grid, PointList, Resolver, Vec3};
use crate::{
    BasinArgs, BifurcationArgs, ClassifierArgs, Cli, Command, DivergenceArgs, HdelayArgs,
    HiddenArgs, IntegrateArgs, SolverArgs, StabilityArgs, SweepArgs, UsageError, WeightArgs,
};

pub enum Failure {
    Usage(UsageError),
    Run(Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(UsageError(msg.into()))
}

/// Default initial conditions near the two mirror-image equilibria.
fn reference_ics() -> Vec<[f64; 3]> {
    vec![X1_REFERENCE, [1e-3; 3]]
}

fn resolve_weights(r: &mut Resolver, args: &WeightArgs) -> Outcome<HnnParams> {
    let mut params = HnnParams::default();
    for row in 0..3 {
        for col in 0..3 {
            let name = format!("w{}{}", row + 1, col + 1);
            let v = r.get(&name, args.get(row, col), params.w[row][col])?;
            if !v.is_finite() {
                return Err(usage(format!("{name} must be finite")));
            }
            params.w[row][col] = v;
        }
    }
    Ok(params)
}

fn resolve_order(r: &mut Resolver, flag: Option<f64>, default: f64) -> Outcome<f64> {
    let q = r.get("q", flag, default)?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(usage(format!("q must lie in (0, 1], got {q}")));
    }
    Ok(q)
}

struct Model {
    q: f64,
    params: HnnParams,
    solver: SolverConfig,
}

fn resolve_model(r: &mut Resolver, args: &SolverArgs, horizon: f64) -> Outcome<Model> {
    let q = resolve_order(r, args.q, 0.99975)?;
    let h = r.get("h", args.h, 0.01)?;
    let horizon = r.get("T", args.horizon, horizon)?;
    let iterations = r.get("corrector_iterations", args.corrector_iterations, 1)?;
    let solver = SolverConfig::new(h, horizon).with_corrector_iterations(iterations);
    solver.validate().map_err(|e| usage(e.to_string()))?;
    let params = resolve_weights(r, &args.weights)?;
    Ok(Model { q, params, solver })
}

fn check_transient(t: f64) -> Outcome<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(usage(format!("transient fraction must lie in [0, 1), got {t}")));
    }
    Ok(t)
}

fn resolve_classifier(r: &mut Resolver, args: &ClassifierArgs) -> Outcome<ClassifierTolerances> {
    let d = ClassifierTolerances::default();
    let tol = ClassifierTolerances {
        closing_error: r.get("eps_close", args.eps_close, d.closing_error)?,
        cluster_width: r.get("cluster_width", args.cluster_width, d.cluster_width)?,
        max_clusters: r.get("max_clusters", args.max_clusters, d.max_clusters)?,
        sign_threshold: r.get("sign_threshold", args.sign_threshold, d.sign_threshold)?,
        transient_fraction: check_transient(r.get("transient", args.transient, d.transient_fraction)?)?,
        min_maxima: r.get("min_maxima", args.min_maxima, d.min_maxima)?,
        equilibrium_variation: r.get("equilibrium_variation", args.equilibrium_variation, d.equilibrium_variation)?,
    };
    let positive = [tol.closing_error, tol.cluster_width, tol.sign_threshold, tol.equilibrium_variation];
    if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(usage("classifier tolerances must be positive"));
    }
    Ok(tol)
}

fn resolve_sweep(r: &mut Resolver, args: &SweepArgs, default: Grid) -> Outcome<Sweep> {
    let name = r.get("param", args.param.clone(), "q".to_string())?;
    let parameter = SweepParameter::parse(&name).map_err(|e| usage(e.to_string()))?;
    let lo = r.get("lo", args.grid.map(|g| g.lo).or(args.lo), default.lo)?;
    let hi = r.get("hi", args.grid.map(|g| g.hi).or(args.hi), default.hi)?;
    let count = r.get("count", args.grid.map(|g| g.count).or(args.count), default.count)?;
    let grid = Grid { lo, hi, count };
    grid.check("sweep")?;
    if parameter == SweepParameter::Order && !(lo > 0.0 && hi <= 1.0) {
        return Err(usage(format!("order sweep must stay within (0, 1], got {lo}:{hi}")));
    }
    Sweep::new(parameter, lo, hi, count).map_err(|e| usage(e.to_string()))
}

fn resolve_ics(r: &mut Resolver, flag: Option<PointList>, default: Vec<[f64; 3]>) -> Outcome<Vec<[f64; 3]>> {
    let PointList(ics) = r.get("ics", flag, PointList(default))?;
    if ics.is_empty() || ics.iter().flatten().any(|v| !v.is_finite()) {
        return Err(usage("initial conditions must be finite and non-empty"));
    }
    Ok(ics)
}

fn resolve_globals(r: &mut Resolver, cli: &Cli) -> Outcome<(Jobs, u64)> {
    let jobs = r.get("jobs", cli.jobs, 0)?;
    let seed = r.get("seed", cli.seed, 0)?;
    Ok((Jobs::from_count(jobs), seed))
}

/// Resolved run ready to execute.
struct Plan {
    name: &'static str,
    seed: u64,
    body: Box<dyn FnOnce(&mut Outputs) -> Outcome<Value>>,
}

fn plan(cli: &Cli, command: &Command, r: &mut Resolver) -> Outcome<Plan> {
    let (jobs, seed) = resolve_globals(r, cli)?;
    let plan = match command.clone() {
        Command::Integrate(a) => plan_integrate(r, a)?,
        Command::Stability(a) => plan_stability(r, a)?,
        Command::Divergence(a) => plan_divergence(r, a)?,
        Command::Bifurcation(a) => plan_bifurcation(r, a, jobs)?,
        Command::Basin(a) => plan_basin(r, a, jobs)?,
        Command::Hidden(a) => plan_hidden(r, a, jobs, seed)?,
        Command::Hdelay(a) => plan_hdelay(r, a, jobs)?,
        Command::Replay { .. } => unreachable!("replay is expanded before planning"),
    };
    Ok(Plan { seed, ..plan })
}

fn plan_integrate(r: &mut Resolver, a: IntegrateArgs) -> Outcome<Plan> {
    let m = resolve_model(r, &a.solver, 200.0)?;
    let Vec3(x0) = r.get("ic", a.ic, Vec3(X1_REFERENCE))?;
    let tol = resolve_classifier(r, &a.classifier)?;
    Ok(Plan {
        name: "integrate",
        seed: 0,
        body: Box::new(move |out| {
            let traj = abm_integrate(&m.params.ivp(m.q, x0)?, &m.solver)?;
            out.write("trajectory.csv", |w| write_trajectory_csv(w, &traj))?;
            let class = classify_trajectory(&traj, &tol)?;
            out.report(format_args!("{:?}, attractor {:?}, closing error {:?}", class.kind, class.attractor_sign, class.closing_error));
            Ok(serde_json::to_value(&class).expect("serializable"))
        }),
    })
}

fn plan_stability(r: &mut Resolver, a: StabilityArgs) -> Outcome<Plan> {
    let q = resolve_order(r, a.q, 0.99975)?;
    let params = resolve_weights(r, &a.weights)?;
    Ok(Plan {
        name: "stability",
        seed: 0,
        body: Box::new(move |out| {
            let rows: Vec<_> = find_equilibria(&params, &default_guesses())?
                .into_iter()
                .map(|eq| {
                    let spectrum = eigenvalues_3x3(&hnn_jacobian(&eq.point, &params));
                    let report = stability_index(&spectrum, q);
                    (eq, spectrum, report)
                })
                .collect();
            out.write("stability.csv", |w| write_stability_csv(w, &rows))?;
            let mut summary = Vec::new();
            for (eq, s, rep) in &rows {
                let lambdas: Vec<String> = s
                    .eigenvalues
                    .iter()
                    .map(|l| format!("{:.4}{:+.4}i", l.re, l.im))
                    .collect();
                out.report(format_args!(
                    "{:<3} ({:.6}, {:.6}, {:.6})  eig [{}]  q* = {:.6}  iota = {:.6}  {:?}",
                    eq.label, eq.point[0], eq.point[1], eq.point[2], lambdas.join(", "),
                    rep.critical_order, rep.iota, rep.verdict
                ));
                summary.push(json!({"label": eq.label.to_string(), "report": rep}));
            }
            Ok(Value::Array(summary))
        }),
    })
}

fn plan_divergence(r: &mut Resolver, a: DivergenceArgs) -> Outcome<Plan> {
    let params = resolve_weights(r, &a.weights)?;
    let Vec3(point) = r.get("point", a.point, Vec3([0.1; 3]))?;
    let Vec3(center) = r.get("center", a.center, Vec3([0.0; 3]))?;
    let grid = r.get("qgrid", a.qgrid, Grid { lo: 0.05, hi: 0.95, count: 19 })?;
    grid.check("qgrid")?;
    if !(grid.lo > 0.0 && grid.hi <= 1.0) {
        return Err(usage("qgrid must stay within (0, 1]"));
    }
    let order = r.get("order", a.order, 5)?;
    if ![1, 3, 5, 7].contains(&order) {
        return Err(usage(format!("Taylor order must be 1, 3, 5 or 7, got {order}")));
    }
    Ok(Plan {
        name: "divergence",
        seed: 0,
        body: Box::new(move |out| {
            let rows = grid
                .values()
                .into_iter()
                .map(|q| Ok((q, fractional_divergence_about(&params, &center, &point, q, order)?)))
                .collect::<fohnn_core::Result<Vec<_>>>()?;
            out.write("divergence.csv", |w| write_pairs_csv(w, ("q", "divergence"), &rows))?;
            let positive = rows.iter().all(|(_, d)| *d > 0.0);
            out.report(format_args!("{} orders, all positive: {positive}", rows.len()));
            Ok(json!({ "all_positive": positive }))
        }),
    })
}

fn plan_bifurcation(r: &mut Resolver, a: BifurcationArgs, jobs: Jobs) -> Outcome<Plan> {
    let m = resolve_model(r, &a.solver, 200.0)?;
    let sweep = resolve_sweep(r, &a.sweep, Grid { lo: 0.94, hi: 1.0, count: 60 })?;
    let ics = resolve_ics(r, a.sweep.ics, reference_ics())?;
    let transient = check_transient(r.get("transient", a.transient, 0.5)?)?;
    Ok(Plan {
        name: "bifurcation",
        seed: 0,
        body: Box::new(move |out| {
            let family = HnnFamily::new(m.params, m.q);
            let ds = bifurcation_sweep(&family, &sweep, &ics, &m.solver, transient, jobs)?;
            out.write("bifurcation.csv", |w| write_bifurcation_csv(w, &ds))?;
            let maxima: usize = ds.cells.iter().flatten().map(|c| c.maxima.len()).sum();
            let unbounded = ds.cells.iter().flatten().filter(|c| c.maxima.unbounded).count();
            out.report(format_args!("{} grid values x {} ICs, {maxima} maxima, {unbounded} unbounded runs", ds.grid.len(), ics.len()));
            Ok(json!({ "maxima": maxima, "unbounded_runs": unbounded }))
        }),
    })
}

fn plan_basin(r: &mut Resolver, a: BasinArgs, jobs: Jobs) -> Outcome<Plan> {
    let m = resolve_model(r, &a.solver, 200.0)?;
    let tol = resolve_classifier(r, &a.classifier)?;
    let lattice = Grid { lo: -5.0, hi: 5.0, count: 40 };
    let u = r.get("u", a.u, lattice)?;
    let v = r.get("v", a.v, lattice)?;
    for (g, name) in [(u, "u"), (v, "v")] {
        g.check(name)?;
        if g.count < 2 || g.lo == g.hi {
            return Err(usage(format!("{name}: lattice needs lo < hi and at least 2 points")));
        }
    }
    let spec = BasinSpec {
        u_range: (u.lo, u.hi),
        v_range: (v.lo, v.hi),
        resolution: (u.count, v.count),
        ..BasinSpec::default()
    };
    Ok(Plan {
        name: "basin",
        seed: 0,
        body: Box::new(move |out| {
            let grid = basin_scan(&spec, &m.params, m.q, &m.solver, &tol, jobs)?;
            out.write("basin.csv", |w| write_basin_csv(w, &grid))?;
            out.write("basin.pgm", |w| write_basin_pgm(w, &grid))?;
            let mut counts = serde_json::Map::new();
            for label in [BasinLabel::Plus, BasinLabel::Minus, BasinLabel::Undecided, BasinLabel::Unbounded] {
                let n = grid.labels.iter().filter(|l| **l == label).count();
                out.report(format_args!("{:<9} {n}", label.name()));
                counts.insert(label.name().to_string(), json!(n));
            }
            Ok(Value::Object(counts))
        }),
    })
}

fn plan_hidden(r: &mut Resolver, a: HiddenArgs, jobs: Jobs, seed: u64) -> Outcome<Plan> {
    let m = resolve_model(r, &a.solver, 500.0)?;
    let tol = resolve_classifier(r, &a.classifier)?;
    let radius = r.get("radius", a.radius, 0.1)?;
    let samples = r.get("samples", a.samples, 50)?;
    if !(radius > 0.0 && radius.is_finite()) || samples == 0 {
        return Err(usage("radius must be positive and samples at least 1"));
    }
    Ok(Plan {
        name: "hidden",
        seed,
        body: Box::new(move |out| {
            let equilibria = find_equilibria(&m.params, &default_guesses())?;
            let signs = [AttractorSign::Plus, AttractorSign::Minus];
            let report = hidden_attractor_test(
                &m.params, m.q, &equilibria, &signs, radius, samples, seed, &m.solver, &tol, jobs,
            )?;
            out.write("hidden.csv", |w| write_hidden_csv(w, &report))?;
            for n in &report.neighborhoods {
                let t = n.tallies;
                out.report(format_args!(
                    "{:<3} {:?}: plus {} minus {} undecided {} unbounded {}",
                    n.equilibrium.label, n.stability, t.plus, t.minus, t.undecided, t.unbounded
                ));
            }
            for (sign, verdict) in &report.attractors {
                out.report(format_args!("attractor {sign:?}: {verdict:?}"));
            }
            Ok(json!({
                "tallies": report.neighborhoods.iter().map(|n| json!({
                    "equilibrium": n.equilibrium.label.to_string(),
                    "sampled": n.sampled,
                    "tallies": n.tallies,
                })).collect::<Vec<_>>(),
                "attractors": report.attractors,
            }))
        }),
    })
}

fn plan_hdelay(r: &mut Resolver, a: HdelayArgs, jobs: Jobs) -> Outcome<Plan> {
    let m = resolve_model(r, &a.solver, 500.0)?;
    let sweep = resolve_sweep(r, &a.sweep, Grid { lo: 0.997, hi: 1.0, count: 60 })?;
    let mut default_ics = reference_ics();
    default_ics.extend([[2.0; 3], [-2.0; 3]]);
    let ics = resolve_ics(r, a.sweep.ics, default_ics)?;
    let transient = check_transient(r.get("transient", a.transient, 0.5)?)?;
    let FloatList(h_list) = r.get("hlist", a.hlist, FloatList(vec![0.05, 0.025, 0.01]))?;
    if h_list.len() < 2 || h_list.windows(2).any(|w| !(w[1] < w[0])) || !(h_list[h_list.len() - 1] > 0.0) {
        return Err(usage("hlist needs at least two positive, strictly decreasing step sizes"));
    }
    let FloatList(refs) = r.get("reference_ics", a.reference_ics, FloatList(vec![1.0, 2.0]))?;
    let reference_ics = refs
        .iter()
        .map(|&v| {
            if v.fract() == 0.0 && v >= 1.0 && (v as usize) <= ics.len() {
                Ok(v as usize - 1)
            } else {
                Err(usage(format!("reference IC id {v} is not a 1-based index into ics")))
            }
        })
        .collect::<Outcome<Vec<_>>>()?;
    let bins = r.get("bins", a.bins, ShiftOptions::default().bins)?;
    if bins == 0 {
        return Err(usage("bins must be positive"));
    }
    let config = HDelayConfig {
        h_list,
        ics,
        reference_ics,
        family: HnnFamily::new(m.params, m.q),
        sweep,
        horizon: m.solver.horizon,
        corrector_iterations: m.solver.corrector_iterations,
        transient_fraction: transient,
        shift: ShiftOptions { bins, ..ShiftOptions::default() },
    };
    Ok(Plan {
        name: "hdelay",
        seed: 0,
        body: Box::new(move |out| {
            let study = h_delay_study(&config, jobs)?;
            for ds in &study.datasets {
                let name = format!("bifurcation_h{}.csv", format_number(ds.config.h));
                out.write(&name, |w| write_bifurcation_csv(w, ds))?;
            }
            out.write("shift_table.csv", |w| write_shift_table_csv(w, &study.table))?;
            out.write("hdelay_detail.csv", |w| {
                use std::io::Write;
                writeln!(w, "h,ic_id,role,against,delta,residual,unshifted")?;
                for row in &study.table.rows {
                    let role = match row.role {
                        BranchRole::Reference => "reference",
                        BranchRole::Outside => "outside",
                    };
                    writeln!(
                        w,
                        "{},{},{role},{},{},{},{}",
                        format_number(row.h),
                        row.ic_id,
                        row.against,
                        format_number(row.estimate.delta),
                        format_number(row.estimate.residual),
                        format_number(row.estimate.unshifted)
                    )?;
                }
                Ok(())
            })?;
            for row in &study.table.rows {
                out.report(format_args!(
                    "h={:<6} ic {} ({:?} vs {}): delta {:+.6} residual {:.4} unshifted {:.4}",
                    row.h, row.ic_id, row.role, row.against, row.estimate.delta,
                    row.estimate.residual, row.estimate.unshifted
                ));
            }
            Ok(serde_json::to_value(&study.table).expect("serializable"))
        }),
    })
}

/// Resolves, runs and records one invocation.
pub fn run(cli: Cli) -> Outcome<()> {
    let mut command = cli.command.clone();
    let mut resolver = Resolver::from_file(cli.config.as_deref())?;
    if let Command::Replay { manifest } = &command {
        resolver = Resolver::from_file(Some(manifest))?;
        let sub = resolver
            .manifest_subcommand
            .clone()
            .ok_or_else(|| usage(format!("{} is not a run manifest", manifest.display())))?;
        if sub == "replay" {
            return Err(usage("cannot replay a replay"));
        }
        command = Cli::try_parse_from(["fohnn", sub.as_str()])
            .map_err(|e| usage(format!("manifest names an unknown subcommand: {e}")))?
            .command;
    }
    let name = subcommand_name(&command);
    if let Some(sub) = &resolver.manifest_subcommand {
        if sub != name {
            return Err(usage(format!("config is a manifest for '{sub}', not '{name}'")));
        }
    }
    let plan = plan(&cli, &command, &mut resolver)?;
    let parameters = resolver.finish()?;
    let mut outputs = Outputs::new(&cli.out, cli.quiet).map_err(Error::from)?;
    let start = Instant::now();
    let summary = (plan.body)(&mut outputs)?;
    let manifest = RunManifest {
        tool: "fohnn".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: plan.name.into(),
        parameters,
        seed: plan.seed,
        outputs: outputs.files.clone(),
        duration_seconds: start.elapsed().as_secs_f64(),
        summary,
    };
    let path = outputs.write_manifest(&manifest)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn subcommand_name(command: &Command) -> &'static str {
    match command {
        Command::Integrate(_) => "integrate",
        Command::Stability(_) => "stability",
        Command::Divergence(_) => "divergence",
        Command::Bifurcation(_) => "bifurcation",
        Command::Basin(_) => "basin",
        Command::Hidden(_) => "hidden",
        Command::Hdelay(_) => "hdelay",
        Command::Replay { .. } => "replay",
    }
}
