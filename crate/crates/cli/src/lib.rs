//! `fohnn`: command-line front end for the fractional Hopfield network
//! experiments. Exit status 0 on success, 1 on numerical or I/O failure,
//! 2 on usage errors.

mod commands;
pub mod manifest;
pub mod params;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use params::{parse, FloatList, Grid, PointList, Vec3};

/// Invalid invocation: bad flag, malformed value or inconsistent parameters.
#[derive(Debug)]
pub struct UsageError(pub String);

#[derive(Debug, Clone, Parser)]
#[command(name = "fohnn", version, about = "Fractional-order Hopfield network laboratory")]
pub struct Cli {
    /// Flat JSON object of named parameters, or a run manifest to replay.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; 0 uses all available cores.
    #[arg(long, global = true, value_parser = parse::<usize>)]
    pub jobs: Option<usize>,
    /// Seed for random sampling (recorded in the manifest).
    #[arg(long, global = true, value_parser = parse::<u64>)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// More log output on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Suppress the summary printed on stdout.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Integrate one trajectory and classify its tail.
    Integrate(IntegrateArgs),
    /// Equilibria, spectra and the argument criterion.
    Stability(StabilityArgs),
    /// Fractional divergence over a grid of orders.
    Divergence(DivergenceArgs),
    /// Maxima of x1 along a parameter sweep.
    Bifurcation(BifurcationArgs),
    /// Attractor labels on a lattice in the plane of the equilibria.
    Basin(BasinArgs),
    /// Random sampling around unstable equilibria.
    Hidden(HiddenArgs),
    /// Step-size dependence of bifurcation branches.
    Hdelay(HdelayArgs),
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct WeightArgs {
    #[arg(long, value_parser = parse::<f64>)]
    pub w11: Option<f64>,
    #[arg(long, value_parser = parse::<f64>)]
    pub w12: Option<f64>,
    #[arg(long, value_parser = parse::<f64>)]
    pub w13: Option<f64>,
    #[arg(long, value_parser = parse::<f64>)]
    pub w21: Option<f64>,
    #[arg(long, value_parser = parse::<f64>)]
    pub w22: Option<f64>,
    #[arg(long, value_parser = parse::<f64>)]
    pub w23: Option<f64>,
    #[arg(long, value_parser = parse::<f64>)]
    pub w31: Option<f64>,
    #[arg(long, value_parser = parse::<f64>)]
    pub w32: Option<f64>,
    #[arg(long, value_parser = parse::<f64>)]
    pub w33: Option<f64>,
}

impl WeightArgs {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        [
            [self.w11, self.w12, self.w13],
            [self.w21, self.w22, self.w23],
            [self.w31, self.w32, self.w33],
        ][row][col]
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Fractional order q in (0, 1].
    #[arg(long, value_parser = parse::<f64>)]
    pub q: Option<f64>,
    /// Step size.
    #[arg(long, value_parser = parse::<f64>)]
    pub h: Option<f64>,
    /// Integration horizon.
    #[arg(long = "T", value_parser = parse::<f64>)]
    pub horizon: Option<f64>,
    #[arg(long, value_parser = parse::<usize>)]
    pub corrector_iterations: Option<usize>,
    #[command(flatten)]
    pub weights: WeightArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ClassifierArgs {
    /// Closing-error threshold for numerically periodic trajectories.
    #[arg(long, value_parser = parse::<f64>)]
    pub eps_close: Option<f64>,
    /// Largest width of one cluster of maxima.
    #[arg(long, value_parser = parse::<f64>)]
    pub cluster_width: Option<f64>,
    #[arg(long, value_parser = parse::<usize>)]
    pub max_clusters: Option<usize>,
    /// |mean x1| needed to decide the attractor side.
    #[arg(long, value_parser = parse::<f64>)]
    pub sign_threshold: Option<f64>,
    /// Fraction of the horizon discarded as transient.
    #[arg(long, value_parser = parse::<f64>)]
    pub transient: Option<f64>,
    #[arg(long, value_parser = parse::<usize>)]
    pub min_maxima: Option<usize>,
    #[arg(long, value_parser = parse::<f64>)]
    pub equilibrium_variation: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    /// Initial condition x1,x2,x3.
    #[arg(long, value_parser = parse::<Vec3>, allow_hyphen_values = true)]
    pub ic: Option<Vec3>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct StabilityArgs {
    #[arg(long, value_parser = parse::<f64>)]
    pub q: Option<f64>,
    #[command(flatten)]
    pub weights: WeightArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DivergenceArgs {
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Evaluation point x1,x2,x3.
    #[arg(long, value_parser = parse::<Vec3>, allow_hyphen_values = true)]
    pub point: Option<Vec3>,
    /// Expansion point x1,x2,x3 of the Taylor series.
    #[arg(long, value_parser = parse::<Vec3>, allow_hyphen_values = true)]
    pub center: Option<Vec3>,
    /// Orders as lo:hi:count.
    #[arg(long, value_parser = parse::<Grid>)]
    pub qgrid: Option<Grid>,
    /// Taylor order: 1, 3, 5 or 7.
    #[arg(long, value_parser = parse::<usize>)]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// Swept parameter: q or a weight such as w11.
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long, value_parser = parse::<f64>, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, value_parser = parse::<f64>, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long, value_parser = parse::<usize>)]
    pub count: Option<usize>,
    /// Shorthand for --lo, --hi and --count as lo:hi:count.
    #[arg(long, value_parser = parse::<Grid>, allow_hyphen_values = true, conflicts_with_all = ["lo", "hi", "count"])]
    pub grid: Option<Grid>,
    /// Initial conditions separated by ';'.
    #[arg(long, value_parser = parse::<PointList>, allow_hyphen_values = true)]
    pub ics: Option<PointList>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BifurcationArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, value_parser = parse::<f64>)]
    pub transient: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BasinArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    /// Lattice along x2 as lo:hi:count.
    #[arg(long, value_parser = parse::<Grid>, allow_hyphen_values = true)]
    pub u: Option<Grid>,
    /// Lattice along the in-plane direction orthogonal to x2.
    #[arg(long, value_parser = parse::<Grid>, allow_hyphen_values = true)]
    pub v: Option<Grid>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct HiddenArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    /// Radius of the sampled balls.
    #[arg(long, value_parser = parse::<f64>)]
    pub radius: Option<f64>,
    /// Samples per unstable equilibrium.
    #[arg(long, value_parser = parse::<usize>)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct HdelayArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, value_parser = parse::<f64>)]
    pub transient: Option<f64>,
    /// Step sizes, strictly decreasing.
    #[arg(long, value_parser = parse::<FloatList>)]
    pub hlist: Option<FloatList>,
    /// 1-based indices of the ICs started near equilibria.
    #[arg(long, value_parser = parse::<FloatList>)]
    pub reference_ics: Option<FloatList>,
    /// Value bins of the branch discrepancy.
    #[arg(long, value_parser = parse::<usize>)]
    pub bins: Option<usize>,
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    // Deliberately not configurable through the environment.
    let _ = env_logger::Builder::new().filter_level(level).try_init();
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    match commands::run(cli) {
        Ok(()) => 0,
        Err(commands::Failure::Usage(UsageError(msg))) => {
            eprintln!("error: {msg}");
            2
        }
        Err(commands::Failure::Run(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}
