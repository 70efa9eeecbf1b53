use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "avta",
    version,
    about = "Convex hull vertices and membership by the Triangle Algorithm"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "AVTA_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Print the report as one JSON object.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// JSON-lines file that receives one record per run [default: avta-runs.jsonl].
    #[arg(long, global = true, env = "AVTA_RUN_LOG", value_name = "PATH")]
    pub run_log: Option<PathBuf>,
    #[arg(long, global = true)]
    pub no_run_log: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide approximate membership of a point in the hull of a point set.
    Membership(MembershipArgs),
    /// Enumerate the vertices of the hull of a point set.
    Vertices(VerticesArgs),
    /// Prune the columns of a linear system.
    Lp(LpArgs),
    /// Generate a synthetic instance with known vertices.
    Gen(GenArgs),
    /// Run a benchmark suite and write a CSV table plus plot data.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Plain,
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Greedy,
    FirstFit,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("query").required(true).args(["point", "point_file"])))]
pub struct MembershipArgs {
    /// Point-set file (CSV or binary).
    pub input: PathBuf,
    /// Query coordinates separated by commas or spaces.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// File holding the query as a single row.
    #[arg(long, value_name = "PATH")]
    pub point_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "plain")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "greedy")]
    pub rule: RuleArg,
    /// Enumerate the vertices first and test against them only.
    #[arg(long, requires = "gamma")]
    pub via_vertices: bool,
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("selector").required(true).args(["gamma", "k", "t", "sigma"])))]
pub struct VerticesArgs {
    pub input: PathBuf,
    /// Lower bound on the robustness of the hull relative to its diameter.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Number of vertices; searches gamma by halving.
    #[arg(long)]
    pub k: Option<usize>,
    /// Return a subset whose hull is within t*R of every point.
    #[arg(long)]
    pub t: Option<f64>,
    /// Recover vertices from perturbed data.
    #[arg(long, conflicts_with_all = ["t", "project"])]
    pub robust: bool,
    /// Weak robustness bound for --robust; derived from --gamma when absent.
    #[arg(long, requires = "robust")]
    pub sigma: Option<f64>,
    /// Perturbation size relative to the diameter, for --robust.
    #[arg(long, default_value_t = 0.0, requires = "robust")]
    pub eps_perturb: f64,
    /// Vote over this many random projections (requires --gamma).
    #[arg(long, value_name = "M", requires = "gamma")]
    pub project: Option<usize>,
    #[arg(long, requires = "project")]
    pub target_dim: Option<usize>,
    /// Number of indices kept by the vote. Without it, an index is kept
    /// when it is a vertex in more than half of the projections.
    #[arg(long, requires = "project")]
    pub top: Option<usize>,
    /// Keep one representative of each group of identical points.
    #[arg(long)]
    pub dedup: bool,
    /// Use the anchor-based diameter estimate above this many points.
    #[arg(long, value_name = "N")]
    pub approx_diameter: Option<usize>,
    #[arg(long, value_enum, default_value = "plain")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "greedy")]
    pub rule: RuleArg,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("task").required(true).args(["feasibility", "optimize", "cone"])))]
pub struct LpArgs {
    /// System file: the rows of A, then b, then optionally c.
    pub system: PathBuf,
    /// Keep the columns that are vertices of the column hull.
    #[arg(long)]
    pub feasibility: bool,
    /// Keep the columns that are vertices of the hull of the columns of [c; A].
    #[arg(long)]
    pub optimize: bool,
    /// Decide whether b lies in the cone of the columns.
    #[arg(long)]
    pub cone: bool,
    #[arg(long)]
    pub gamma: f64,
    /// Membership tolerance of the cone test.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long)]
    pub dedup: bool,
    /// Also solve the full and reduced systems with the exact simplex.
    #[arg(long)]
    pub solve: bool,
    /// Where to write the reduced system; defaults to <system>.reduced.csv.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// gaussian, gaussian10 or uniform01.
    #[arg(long, default_value = "gaussian")]
    pub vertex_dist: String,
    /// none, gaussian:TAU or uniform:SCALE.
    #[arg(long, default_value = "none")]
    pub noise: String,
    /// Generate a nonnegative linear system instead of a point set.
    #[arg(long, conflicts_with_all = ["vertex_dist", "noise"])]
    pub cone: bool,
    #[arg(long, default_value_t = 10.0, requires = "cone")]
    pub b_scale: f64,
    /// Output path; metadata goes to <out>.meta.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, conflicts_with = "cone")]
    pub binary: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    MembershipScaling,
    FeasibilityAmortization,
    VertexScaling,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Point counts, or query counts for feasibility-amortization.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    /// Point count for feasibility-amortization.
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.01)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.001)]
    pub epsilon: f64,
    /// CSV table path; plot data goes to <out>.plot.dat unless given.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub plot_data: Option<PathBuf>,
    /// Largest allowed sum of n*m over the generated instances.
    #[arg(long, default_value_t = 50_000_000)]
    pub max_cells: usize,
}
