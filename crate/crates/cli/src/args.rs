use std::path::PathBuf;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use privrec_core::{Mechanism, UtilityFunctionSpec};

#[derive(Debug, Parser)]
#[command(name = "privrec", version, about = "Differentially private social recommendation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an edge list and write it as a binary graph cache
    Ingest(IngestArgs),
    /// Print node, edge and degree statistics as JSON
    Stats(StatsArgs),
    /// Run one mechanism once for a target node
    Recommend(RecommendArgs),
    /// Evaluate every node and write report, CDF, degree and ranking CSVs
    Evaluate(EvaluateArgs),
    /// Write the per-node accuracy ceilings as CSV
    Bounds(BoundsArgs),
    /// Join two report CSVs on raw_id and print summary deltas as JSON
    Compare(CompareArgs),
    /// Exhaustively measure privacy loss over all small labeled graphs
    Audit(AuditArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Stats(_) => "stats",
            Command::Recommend(_) => "recommend",
            Command::Evaluate(_) => "evaluate",
            Command::Bounds(_) => "bounds",
            Command::Compare(_) => "compare",
            Command::Audit(_) => "audit",
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Edge list (SNAP text) or binary graph cache
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UtilityKind {
    /// Common neighbors
    Cn,
    /// Weighted paths
    Wp,
}

#[derive(Debug, Args)]
pub struct UtilityArgs {
    /// Utility function
    #[arg(long, value_enum, default_value = "cn")]
    pub utility: UtilityKind,
    /// Path weight decay for --utility wp, in (0, 1)
    #[arg(long, default_value_t = 0.0005, value_parser = unit_interval)]
    pub gamma: f64,
    /// Longest walk counted by --utility wp
    #[arg(long, default_value_t = UtilityFunctionSpec::DEFAULT_MAX_LENGTH, value_parser = clap::value_parser!(u16).range(2..=16).map(usize::from))]
    pub max_length: usize,
}

impl UtilityArgs {
    pub fn spec(&self) -> UtilityFunctionSpec {
        match self.utility {
            UtilityKind::Cn => UtilityFunctionSpec::CommonNeighbors,
            UtilityKind::Wp => UtilityFunctionSpec::WeightedPaths { gamma: self.gamma, max_length: self.max_length },
        }
    }
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Root seed for all randomness
    #[arg(long, env = "PRIVREC_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Cache file to write [default: input path with extension .prvg]
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechanismKind {
    /// Exponential mechanism
    Exp,
    /// Laplace report-noisy-max
    Lap,
    /// Linear smoothing of the best recommendation
    Smooth,
}

impl From<MechanismKind> for Mechanism {
    fn from(m: MechanismKind) -> Self {
        match m {
            MechanismKind::Exp => Mechanism::Exponential,
            MechanismKind::Lap => Mechanism::Laplace,
            MechanismKind::Smooth => Mechanism::Smoothing,
        }
    }
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Raw id of the node receiving the recommendation
    #[arg(long, value_name = "RAW_ID", allow_negative_numbers = true)]
    pub target: i64,
    /// Mechanism to run
    #[arg(long, value_enum, default_value = "exp")]
    pub mechanism: MechanismKind,
    /// Privacy parameter
    #[arg(long, value_parser = positive)]
    pub epsilon: f64,
    #[command(flatten)]
    pub utility: UtilityArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Also print the ten most likely candidates as CSV
    #[arg(long)]
    pub explain: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Directory receiving report.csv, cdf.csv, by_degree.csv, ranked.csv and config.json
    #[arg(long, value_name = "DIR")]
    pub output_dir: PathBuf,
    /// Privacy parameter
    #[arg(long, value_parser = positive)]
    pub epsilon: f64,
    #[command(flatten)]
    pub utility: UtilityArgs,
    /// Mechanisms to evaluate, comma-separated
    #[arg(long, value_enum, value_delimiter = ',', default_value = "exp,lap")]
    pub mechanism: Vec<MechanismKind>,
    /// Laplace draws per node
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(1..).map(|v| v as usize))]
    pub trials: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub c_grid: CGridArg,
    /// Worker threads; output does not depend on this
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..).map(usize::from))]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct CGridArg {
    /// High-utility thresholds c in (0, 1], comma-separated; the tightest ceiling is kept
    #[arg(long, value_delimiter = ',', default_value = "1", value_parser = c_value)]
    pub c_grid: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Privacy parameter
    #[arg(long, value_parser = positive)]
    pub epsilon: f64,
    #[command(flatten)]
    pub utility: UtilityArgs,
    #[command(flatten)]
    pub c_grid: CGridArg,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// First report CSV
    #[arg(value_name = "LEFT")]
    pub left: PathBuf,
    /// Second report CSV
    #[arg(value_name = "RIGHT")]
    pub right: PathBuf,
    /// Column read from LEFT
    #[arg(long, default_value = "acc_exp", value_parser = report_column)]
    pub left_column: String,
    /// Column read from RIGHT
    #[arg(long, default_value = "acc_lap", value_parser = report_column)]
    pub right_column: String,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Mechanism to audit
    #[arg(long, value_enum, default_value = "exp")]
    pub mechanism: MechanismKind,
    /// Privacy parameter (exp, lap)
    #[arg(long, value_parser = positive, required_unless_present = "weight")]
    pub epsilon: Option<f64>,
    /// Smoothing weight x in [0, 1] (smooth only)
    #[arg(long, value_parser = closed_unit_interval)]
    pub weight: Option<f64>,
    /// Largest graph size enumerated
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u8).range(2..=7).map(usize::from))]
    pub max_nodes: usize,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("{e}"))
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{s} is not a positive number"))
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{s} is not in (0, 1)"))
    }
}

fn closed_unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{s} is not in [0, 1]"))
    }
}

fn c_value(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{s} is not in (0, 1]"))
    }
}

fn report_column(s: &str) -> Result<String, String> {
    const COLUMNS: [&str; 6] = ["acc_exp", "acc_lap", "acc_lap_se", "acc_smooth", "ceiling", "u_max"];
    if COLUMNS.contains(&s) {
        Ok(s.to_string())
    } else {
        Err(format!("expected one of {}", COLUMNS.join(", ")))
    }
}
