//! `weibull-tail` — command-line studies of Weibull tail-coefficient
//! estimators: point estimation from data files, Monte Carlo mean squared
//! error decompositions, asymptotic MSE curves, and variant comparisons.

mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use weibull_tail::distributions::WeibullTailModel;
use weibull_tail::estimators::{optimal_k, EstimatorVariant};

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Core(#[from] weibull_tail::Error),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => AppError::Io(io),
            other => AppError::Data(format!("csv error: {other:?}")),
        }
    }
}

impl AppError {
    /// 1 = I/O, 3 = bad input or undefined quantity, 4 = numerical failure.
    /// (clap reserves 2 for usage errors.)
    fn exit_code(&self) -> i32 {
        match self {
            AppError::Core(weibull_tail::Error::Numerical(_)) => 4,
            AppError::Core(_) | AppError::Data(_) => 3,
            AppError::Io(_) => 1,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;

/// Comma-separated estimator variants, e.g. `v1,v3`. `all` selects every
/// variant. Duplicates are dropped, order is preserved.
#[derive(Clone, Debug)]
pub struct VariantList(pub Vec<EstimatorVariant>);

impl FromStr for VariantList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Self(EstimatorVariant::ALL.to_vec()));
        }
        let mut out = Vec::new();
        for part in s.split(',') {
            let v = EstimatorVariant::from_str(part.trim()).map_err(|e| e.to_string())?;
            if !out.contains(&v) {
                out.push(v);
            }
        }
        if out.is_empty() {
            return Err("need at least one variant".into());
        }
        Ok(Self(out))
    }
}

/// Rule mapping the sample size to an intermediate sequence value k(n).
///
/// `sqrt-b` uses the bias-balancing k for the model under study (the k that
/// trades the variance term against the squared bias), so it is only defined
/// for models whose bias function does not vanish.
#[derive(Clone, Debug)]
pub enum KRule {
    Log,
    Sqrt,
    SqrtB,
    Half,
    Fixed(usize),
}

impl FromStr for KRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "log" => Ok(KRule::Log),
            "sqrt" => Ok(KRule::Sqrt),
            "sqrt-b" => Ok(KRule::SqrtB),
            "half" => Ok(KRule::Half),
            other => match other.strip_prefix("fixed:") {
                Some(k) => k
                    .parse()
                    .map(KRule::Fixed)
                    .map_err(|_| format!("invalid fixed k '{k}'")),
                None => Err(format!(
                    "unknown k rule '{other}' (expected log, sqrt, sqrt-b, half, or fixed:<k>)"
                )),
            },
        }
    }
}

impl KRule {
    pub fn apply(&self, n: usize, model: &WeibullTailModel) -> AppResult<usize> {
        Ok(match self {
            KRule::Log => (n as f64).ln().floor() as usize,
            KRule::Sqrt => (n as f64).sqrt().floor() as usize,
            KRule::SqrtB => optimal_k(n, 1.0, model)?,
            KRule::Half => n / 2,
            KRule::Fixed(k) => *k,
        })
    }

    pub fn label(&self) -> String {
        match self {
            KRule::Log => "log".into(),
            KRule::Sqrt => "sqrt".into(),
            KRule::SqrtB => "sqrt-b".into(),
            KRule::Half => "half".into(),
            KRule::Fixed(k) => format!("fixed:{k}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "weibull-tail", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the tail coefficient from a file of observations.
    Estimate(EstimateArgs),
    /// Monte Carlo MSE decomposition for a model.
    Simulate(SimulateArgs),
    /// Asymptotic MSE curve for a model.
    Amse(AmseArgs),
    /// Predict (and optionally verify) the variant ordering for a model.
    Compare(CompareArgs),
    /// Reproduce the full study: per-model MSE/AMSE tables and charts.
    Figures(FiguresArgs),
}

#[derive(clap::Args)]
pub struct EstimateArgs {
    /// Input file: one positive observation per line; `#` starts a comment.
    #[arg(long)]
    pub input: PathBuf,
    /// Smallest number of upper order statistics to use.
    #[arg(long, default_value_t = 2)]
    pub k_min: usize,
    /// Largest k (default: min(150, n - 1)).
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Estimator variants, comma separated (or `all`).
    #[arg(long, default_value = "v1,v2,v3")]
    pub variants: VariantList,
    /// Also extrapolate the order-p extreme quantile (requires p < 1/n).
    #[arg(long)]
    pub p: Option<f64>,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct SimulateArgs {
    /// Model spec, e.g. `gamma:1.5,1`, `absnormal:0,1`, `weibull:2.5,2.5`.
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub replications: usize,
    #[arg(long, default_value_t = 2)]
    pub k_min: usize,
    #[arg(long, default_value_t = 150)]
    pub k_max: usize,
    #[arg(long, default_value = "all")]
    pub variants: VariantList,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Also decompose the relative error of the order-p quantile estimate.
    #[arg(long)]
    pub p: Option<f64>,
    /// Output directory for CSV tables and the run manifest.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (default: one per core). Results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(clap::Args)]
pub struct AmseArgs {
    /// Model spec, e.g. `gamma:1.5,1`, `absnormal:0,1`, `weibull:2.5,2.5`.
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k_min: usize,
    #[arg(long, default_value_t = 150)]
    pub k_max: usize,
    #[arg(long, default_value = "all")]
    pub variants: VariantList,
    /// Output directory for the CSV table (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct CompareArgs {
    /// Model spec, e.g. `gamma:1.5,1`, `absnormal:0,1`, `weibull:2.5,2.5`.
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Intermediate sequence rule: log, sqrt, sqrt-b, half, or fixed:<k>.
    #[arg(long, default_value = "log")]
    pub k_rule: KRule,
    /// Check the prediction against simulated MSE curves.
    #[arg(long)]
    pub empirical: bool,
    #[arg(long, default_value_t = 50)]
    pub replications: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Directory for the JSON verdict (default: stdout report only).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: one per core). Results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(clap::Args)]
pub struct FiguresArgs {
    /// Output directory.
    #[arg(long, default_value = "figures")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub replications: usize,
    #[arg(long, default_value_t = 2)]
    pub k_min: usize,
    /// Largest k (clamped to n - 1).
    #[arg(long, default_value_t = 150)]
    pub k_max: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Render an SVG chart per model alongside the CSV tables.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub svg: bool,
    /// Log-scale the y axes of the charts.
    #[arg(long)]
    pub log_y: bool,
    /// Worker threads (default: one per core). Results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Estimate(args) => commands::estimate(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Amse(args) => commands::amse_table(args),
        Command::Compare(args) => commands::compare(args),
        Command::Figures(args) => commands::figures(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
