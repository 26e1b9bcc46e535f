use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use sepcheck_core::defaults;
use sepcheck_core::states::Bell;

#[derive(Debug, Parser)]
#[command(
    name = "sepcheck",
    version,
    about = "Decide separability of bipartite quantum states"
)]
pub struct Cli {
    /// Tolerance for Hermiticity, trace and negative eigenvalues of input states.
    #[arg(long, global = true, value_name = "TOL")]
    pub validation_tol: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the combined entanglement/separability search.
    Decide(DecideArgs),
    /// Partial transpose test.
    Ppt(StateArg),
    /// Symmetric extension search at a fixed level.
    Dps(DpsArgs),
    /// Print the first product states of the rational grid as JSON lines.
    Enumerate(EnumerateArgs),
    /// Check whether a state lies in the convex hull of product states.
    HullCheck(HullCheckArgs),
    /// Write a test state as JSON.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct StateArg {
    /// State file, or `-` for standard input.
    #[arg(long, value_name = "FILE")]
    pub state: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Grow,
    Tuple,
}

#[derive(Debug, Args)]
pub struct DecideArgs {
    #[command(flatten)]
    pub state: StateArg,
    /// Width of the border band, in (0, 1).
    #[arg(long, default_value_t = defaults::ETA)]
    pub eta: f64,
    /// Scheduler iterations before giving up.
    #[arg(long, default_value_t = defaults::STEP_BUDGET)]
    pub budget: u64,
    /// 1 is the partial transpose test; 2 and 3 search symmetric extensions.
    #[arg(long, default_value_t = defaults::DPS_LEVEL)]
    pub dps_level: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Grow)]
    pub mode: ModeArg,
    /// Hull distance accepted as membership.
    #[arg(long, default_value_t = defaults::HULL_TOL)]
    pub hull_tol: f64,
    /// Print the full verdict as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct DpsArgs {
    #[command(flatten)]
    pub state: StateArg,
    #[arg(long, default_value_t = 2)]
    pub level: usize,
    #[arg(long, default_value_t = defaults::DPS_MAX_ITERATIONS)]
    pub max_iter: usize,
    /// Also require a positive partial transpose of the extension.
    #[arg(long)]
    pub ppt: bool,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long, num_args = 2, value_names = ["N", "M"])]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub count: u64,
    /// Stop once indices exceed this largest denominator.
    #[arg(long)]
    pub height_max: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HullMode {
    Facet,
    Bary,
    Grow,
}

#[derive(Debug, Args)]
pub struct HullCheckArgs {
    /// Target operator; only Hermiticity is required.
    #[command(flatten)]
    pub state: StateArg,
    /// Product states, one JSON object with `a` and `b` per line.
    #[arg(long, value_name = "FILE")]
    pub points: PathBuf,
    #[arg(long, value_enum, default_value_t = HullMode::Grow)]
    pub mode: HullMode,
    /// Distance accepted by `grow` (default 1e-8) or facet band for `facet`
    /// and `bary` (default 1e-9).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group(
    ArgGroup::new("kind")
        .required(true)
        .args(["bell", "isotropic", "werner", "maxmixed", "random"])
))]
pub struct GenArgs {
    #[arg(long, value_parser = parse_bell)]
    pub bell: Option<Bell>,
    /// Isotropic state with singlet fraction parameter P.
    #[arg(long, value_name = "P")]
    pub isotropic: Option<f64>,
    /// Werner state with antisymmetric weight P.
    #[arg(long, value_name = "P")]
    pub werner: Option<f64>,
    #[arg(long)]
    pub maxmixed: bool,
    /// Random separable mixture of grid product states.
    #[arg(long)]
    pub random: bool,
    /// Local dimension for isotropic and Werner states.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Dimensions for maxmixed and random states.
    #[arg(long, num_args = 2, value_names = ["N", "M"], default_values_t = [2, 2])]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of atoms in a random mixture.
    #[arg(long, default_value_t = 3)]
    pub count: usize,
    /// Largest denominator in a random mixture.
    #[arg(long, default_value_t = 4)]
    pub max_den: u64,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn parse_bell(s: &str) -> Result<Bell, String> {
    s.parse()
}
