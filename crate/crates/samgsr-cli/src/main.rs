//! Command-line interface: screen, reduce, cv, evaluate, simulate,
//! stability, and weights subcommands, each writing a machine-readable
//! run report plus aligned text tables.

mod render;
mod run;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "samgsr",
    version,
    about = "Pathway-based feature selection by gene-set reduction, with optional connectivity weights"
)]
struct Cli {
    /// Worker threads (default: the SAMGSR_THREADS variable, else all
    /// cores). Results are identical for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Permutation p-values for every gene set
    Screen(ScreenArgs),
    /// Full selection run: screen, reduce each significant set, fit a model
    Reduce(ReduceArgs),
    /// Tune the reduction threshold by K-fold cross-validation
    Cv(CvArgs),
    /// Apply a saved model to new data and compute metrics
    Evaluate(EvaluateArgs),
    /// Replicate study on synthetic or relabeled real data
    Simulate(SimulateArgs),
    /// Rand-index stability across prior run reports
    Stability(StabilityArgs),
    /// Connectivity weights and the set-count correlation
    Weights(WeightsArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Expression TSV: header of sample ids, one gene per row
    #[arg(long)]
    expression: std::path::PathBuf,
    /// Two-column TSV of sample id and class label
    #[arg(long)]
    labels: std::path::PathBuf,
    /// GMT gene-set file
    #[arg(long)]
    gmt: std::path::PathBuf,
    /// Two-column TSV of interaction edges (required with --weighted)
    #[arg(long)]
    ppi: Option<std::path::PathBuf>,
    /// Skip the first line of the edge list
    #[arg(long)]
    ppi_header: bool,
    /// Leave expression values as supplied instead of standardizing each
    /// gene to mean 0 / SD 1 (zero-variance genes are dropped either way)
    #[arg(long)]
    no_standardize: bool,
}

#[derive(Args, Clone)]
struct StatArgs {
    /// Use the connectivity-weighted statistic
    #[arg(long)]
    weighted: bool,
    /// Set-level significance threshold for screening
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Permutation count (small samples switch to exhaustive enumeration)
    #[arg(long, default_value_t = 1000)]
    b: usize,
    /// Master seed; all randomness derives from it
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// s0 offset: median, fixed:<value>, or percentile:<q>
    #[arg(long, default_value = "median")]
    s0: String,
    /// Weight rescaling: mean-one, max-one, or sqrt-mean-one
    #[arg(long, default_value = "mean-one")]
    normalization: String,
    /// Class treated as the positive group of the statistic
    #[arg(long)]
    positive_class: String,
}

#[derive(Args)]
struct ScreenArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    stat: StatArgs,
    /// Output directory for report.json and report.txt
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    stat: StatArgs,
    /// Reduction stopping threshold
    #[arg(long, default_value_t = 0.5)]
    c_star: f64,
    /// Skip fitting the linear model on the final signature
    #[arg(long)]
    no_fit: bool,
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    stat: StatArgs,
    /// Candidate thresholds: comma list (0.1,0.3,0.5) or range lo:hi:step
    #[arg(long, default_value = "0.05:0.95:0.05")]
    grid: String,
    /// Fold count
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Run report holding the fitted model
    #[arg(long)]
    report: std::path::PathBuf,
    /// Optional second model report; posteriors compose into four classes
    /// as the product of the two binary posteriors
    #[arg(long)]
    second_report: Option<std::path::PathBuf>,
    #[arg(long)]
    expression: std::path::PathBuf,
    #[arg(long)]
    labels: std::path::PathBuf,
    /// Leave expression values as supplied instead of standardizing
    #[arg(long)]
    no_standardize: bool,
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Replicate count
    #[arg(long, default_value_t = 30)]
    replicates: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Study arms: comma list of samgsr, weighted-samgsr
    #[arg(long, default_value = "samgsr,weighted-samgsr")]
    methods: String,
    /// Training samples per replicate (synthetic mode)
    #[arg(long, default_value_t = 60)]
    n_train: usize,
    /// Test samples per replicate (synthetic mode)
    #[arg(long, default_value_t = 60)]
    n_test: usize,
    /// Gene universe size (synthetic mode)
    #[arg(long, default_value_t = 1000)]
    n_genes: usize,
    /// Synthetic gene-set sizes, comma list
    #[arg(long, default_value = "20,30,150,300,500")]
    set_sizes: String,
    /// Non-planted genes draw degrees uniformly from 1..=this
    #[arg(long, default_value_t = 4)]
    background_degree_max: usize,
    /// Planted genes: gene=coef[:degree[:set/set...]] entries, comma list.
    /// Degree and set memberships apply to synthetic mode only.
    #[arg(long, default_value = "g0001=0.37:80:2/3,g0002=-0.86:3:0/1")]
    planted: String,
    /// Real expression matrix to relabel for training (with --real-test,
    /// --gmt, and --ppi this switches to real-data mode)
    #[arg(long, requires_all = ["real_test", "gmt", "ppi"])]
    real_train: Option<std::path::PathBuf>,
    #[arg(long)]
    real_test: Option<std::path::PathBuf>,
    /// GMT gene sets (real-data mode)
    #[arg(long)]
    gmt: Option<std::path::PathBuf>,
    /// Interaction edge list (real-data mode)
    #[arg(long)]
    ppi: Option<std::path::PathBuf>,
    #[arg(long)]
    ppi_header: bool,
    /// Candidate thresholds for tuning
    #[arg(long, default_value = "0.05:0.95:0.05")]
    grid: String,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1000)]
    b: usize,
    #[arg(long, default_value = "median")]
    s0: String,
    #[arg(long, default_value = "mean-one")]
    normalization: String,
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct StabilityArgs {
    /// Two or more run reports from prior reduce runs
    #[arg(long, num_args = 2.., required = true)]
    reports: Vec<std::path::PathBuf>,
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct WeightsArgs {
    #[arg(long)]
    ppi: std::path::PathBuf,
    #[arg(long)]
    ppi_header: bool,
    /// Gene sets; enables the membership-count correlation and narrows the
    /// universe to set members
    #[arg(long)]
    gmt: Option<std::path::PathBuf>,
    /// Expression matrix; narrows the universe to measured genes
    #[arg(long)]
    expression: Option<std::path::PathBuf>,
    #[arg(long)]
    out: std::path::PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("SAMGSR_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n > 0 {
            builder = builder.num_threads(n);
        }
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({"error": {"kind": "config", "message": e.to_string()}})
            );
            return ExitCode::FAILURE;
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Screen(args) => run::screen(args),
        Command::Reduce(args) => run::reduce(args),
        Command::Cv(args) => run::cv(args),
        Command::Evaluate(args) => run::evaluate(args),
        Command::Simulate(args) => run::simulate(args),
        Command::Stability(args) => run::stability(args),
        Command::Weights(args) => run::weights(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({"error": {"kind": e.kind(), "message": e.to_string()}})
            );
            ExitCode::FAILURE
        }
    }
}
