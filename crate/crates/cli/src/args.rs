use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use unilasso::data::{Family, FitConfig, LambdaRule};
use unilasso::io::ResponseSelector;
use unilasso::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "unilasso", version, about = "Univariate-guided sparse regression")]
pub struct Cli {
    /// Worker threads for folds, bootstrap and replicates.
    #[arg(long, global = true, env = "UNILASSO_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model with the penalty chosen by cross-validation.
    Fit(FitArgs),
    /// Write the cross-validation curve.
    Cv(CvArgs),
    /// Predict on new rows with a saved model.
    Predict(PredictArgs),
    /// Sign-constrained least squares on the leave-one-out columns.
    Unireg(UniregArgs),
    /// uniLasso followed by a lasso on its residuals.
    Polish(PolishArgs),
    /// Run a simulation scenario.
    Simulate(SimulateArgs),
    /// Compare the fast paths against brute-force references.
    Verify(VerifyArgs),
    /// Time the main estimators on a simulated data set.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    Binomial,
    /// Integer class labels, fitted one-versus-rest.
    Multiclass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Min,
    #[value(name = "1se")]
    OneSe,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Name of the response column.
    #[arg(long, conflicts_with = "response_index", required_unless_present = "response_index")]
    pub response: Option<String>,
    /// Zero-based index of the response column.
    #[arg(long)]
    pub response_index: Option<usize>,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub family: FamilyArg,
}

impl DataArgs {
    pub fn selector(&self) -> ResponseSelector {
        match (&self.response, self.response_index) {
            (Some(name), _) => ResponseSelector::Name(name.clone()),
            (None, Some(k)) => ResponseSelector::Index(k),
            (None, None) => unreachable!("clap requires one of the response options"),
        }
    }

    /// Family for binary fits; multiclass data are read as gaussian labels.
    pub fn base_family(&self) -> Family {
        match self.family {
            FamilyArg::Binomial => Family::Binomial,
            _ => Family::Gaussian,
        }
    }
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long, default_value_t = 100)]
    pub n_lambda: usize,
    /// Smallest penalty as a fraction of the largest (default depends on n and p).
    #[arg(long)]
    pub lambda_min_ratio: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Seed for fold assignment and resampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "min")]
    pub lambda_rule: RuleArg,
}

impl ConfigArgs {
    pub fn config(&self) -> Result<FitConfig> {
        let cfg = FitConfig {
            n_lambda: self.n_lambda,
            lambda_min_ratio: self.lambda_min_ratio,
            n_folds: self.folds,
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            lambda_rule: match self.lambda_rule {
                RuleArg::Min => LambdaRule::Min,
                RuleArg::OneSe => LambdaRule::OneSe,
            },
            ..FitConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct VariantArgs {
    /// Use in-sample univariate fits instead of leave-one-out fits.
    #[arg(long)]
    pub no_loo: bool,
    /// Drop the non-negativity constraint in stage 2.
    #[arg(long)]
    pub no_sign: bool,
    /// Scale the stage-2 columns to unit univariate slope.
    #[arg(long)]
    pub no_mag: bool,
    /// CSV of externally estimated univariate slopes (and optional intercepts).
    #[arg(long, conflicts_with_all = ["no_loo", "no_sign", "no_mag", "strict_cv"])]
    pub external_scores: Option<PathBuf>,
    /// Refit the univariate stage inside every cross-validation fold.
    #[arg(long)]
    pub strict_cv: bool,
}

impl VariantArgs {
    pub fn apply(&self, mut cfg: FitConfig) -> FitConfig {
        cfg.loo = !self.no_loo;
        cfg.sign_constraint = !self.no_sign;
        cfg.use_magnitude = !self.no_mag;
        cfg.strict_cv = self.strict_cv;
        cfg
    }

    pub fn check_family(&self, family: FamilyArg) -> Result<()> {
        if family == FamilyArg::Multiclass && self.external_scores.is_some() {
            return Err(Error::InvalidConfig("--external-scores cannot be combined with --family multiclass".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub variant: VariantArgs,
    /// Model JSON output.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Coefficient path CSV output.
    #[arg(long)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub variant: VariantArgs,
    /// CV curve CSV output.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Selected model JSON output.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model JSON written by `fit`, `unireg` or `polish`.
    #[arg(long, short)]
    pub model: PathBuf,
    /// CSV holding (at least) the model's feature columns.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Predictions CSV; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UniregArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Use in-sample univariate fits instead of leave-one-out fits.
    #[arg(long)]
    pub no_loo: bool,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Bootstrap replicates for percentile intervals (at least 100).
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long, default_value_t = 0.95, requires = "bootstrap")]
    pub level: f64,
    /// Interval CSV output; standard output when absent.
    #[arg(long, requires = "bootstrap")]
    pub ci: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PolishArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Stitched base-plus-polish path CSV output.
    #[arg(long)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// low_snr, medium_snr, high_snr, homecourt, two_class, counter_example or external.
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    /// Comma-separated methods.
    #[arg(long, default_value = "lasso,unilasso,polish,adaptive,matching")]
    pub methods: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub n_test: Option<usize>,
    #[arg(long)]
    pub snr: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub sparsity: Option<f64>,
    #[arg(long)]
    pub n_external: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 100)]
    pub n_lambda: usize,
    /// Per-replicate CSV output.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Summary CSV output; standard output when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// CSV with a header row; use `--random` instead to check simulated data.
    #[arg(long, short, required_unless_present = "random")]
    pub input: Option<PathBuf>,
    #[arg(long, conflicts_with = "response_index")]
    pub response: Option<String>,
    #[arg(long)]
    pub response_index: Option<usize>,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub family: FamilyArg,
    /// Generate random data of shape `NxP` instead of reading a file.
    #[arg(long, conflicts_with = "input")]
    pub random: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report output; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Solver tolerance used by the solver check (fault injection).
    #[arg(long, hide = true)]
    pub solver_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "medium_snr")]
    pub scenario: String,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 500)]
    pub p: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Results CSV; standard output when absent. Timings go to standard error.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
