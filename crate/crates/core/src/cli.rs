//! `bmom` command-line front end.
//!
//! Exit codes: 0 success, 1 analysis or data error, 2 usage error. Errors
//! are one line on stderr, `error[<kind>]: <message>`. Output is assembled
//! in memory first, so a failing run never writes to `--out`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};

use crate::densities::Density;
use crate::error::BmomError;
use crate::mean_model::{fit_mean, mean_maxent, positive_mean_density, Sample};
use crate::prior::{fit_with_prior, ConceptualSample};
use crate::regression::{build_ar_design, build_design, fit_regression, LeastSquaresFit};
use crate::report::{
    emit_density_grid, load_csv, mean_report, regression_report, render_report, AnalysisOptions,
    AnalysisReport, CsvColumns, DataDigest, Format, ModelKind, DEFAULT_GRID_POINTS,
};
use crate::sampler::{draw_joint, write_draws_csv, DrawConfig};

pub const SEED_ENV: &str = "BMOM_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "bmom",
    version,
    about = "Bayesian method-of-moments analysis of means, regressions and autoregressions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Scalar mean model y_i = theta + u_i
    Mean(AnalysisArgs),
    /// Linear regression y = X beta + u
    Regress(AnalysisArgs),
    /// Autoregression of order --lags (intercept on by default)
    Ar(AnalysisArgs),
    /// Regression report with a predictive density at --xf
    Predict(AnalysisArgs),
    /// Realized-error densities for every observation
    Errors(AnalysisArgs),
    /// Seeded posterior draws
    Sample(AnalysisArgs),
    /// Method-of-moments vs diffuse-prior Student-t comparison
    Compare(AnalysisArgs),
    /// Density grid (TSV) for one target
    Density(AnalysisArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Mean(_) => "mean",
            Command::Regress(_) => "regress",
            Command::Ar(_) => "ar",
            Command::Predict(_) => "predict",
            Command::Errors(_) => "errors",
            Command::Sample(_) => "sample",
            Command::Compare(_) => "compare",
            Command::Density(_) => "density",
        }
    }

    fn args(&self) -> &AnalysisArgs {
        match self {
            Command::Mean(a)
            | Command::Regress(a)
            | Command::Ar(a)
            | Command::Predict(a)
            | Command::Errors(a)
            | Command::Sample(a)
            | Command::Compare(a)
            | Command::Density(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    /// CSV file with a header row
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    /// Response column
    #[arg(long, value_name = "NAME")]
    pub y: String,
    /// Regressor columns
    #[arg(long, value_name = "NAME,...", value_delimiter = ',')]
    pub x: Vec<String>,
    /// Prepend a column of ones
    #[arg(long)]
    pub intercept: bool,
    /// Drop the intercept (ar only)
    #[arg(long, conflicts_with = "intercept")]
    pub no_intercept: bool,
    /// Autoregressive order
    #[arg(long, value_name = "Q")]
    pub lags: Option<usize>,
    /// Future regressor vector
    #[arg(
        long,
        value_name = "V1,...",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub xf: Option<Vec<f64>>,
    /// Interval probability
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Linear combination of coefficients
    #[arg(
        long,
        value_name = "V1,...",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub ell: Option<Vec<f64>>,
    /// Sampler seed (falls back to BMOM_SEED)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of posterior draws
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    /// Conceptual-sample prior CSV (same regressor columns)
    #[arg(long, value_name = "PATH", requires = "prior_y")]
    pub prior_data: Option<PathBuf>,
    /// Response column of the prior CSV
    #[arg(long, value_name = "NAME", requires = "prior_data")]
    pub prior_y: Option<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Density grid size
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid: usize,
    /// Density grid range
    #[arg(
        long,
        value_name = "LO,HI",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub range: Option<Vec<f64>>,
    /// Density target (e.g. theta, sigma2, y_f, a coefficient name, error:3)
    #[arg(long)]
    pub target: Option<String>,
    /// Write the report here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Write raw joint draws as CSV (sample only)
    #[arg(long, value_name = "PATH")]
    pub draws_out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Analysis(BmomError),
}

impl From<BmomError> for CliError {
    fn from(e: BmomError) -> Self {
        CliError::Analysis(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// A resolved analysis: the data, digests and fitted model.
enum Analysis {
    Mean {
        sample: Sample,
        digest: DataDigest,
    },
    Regression {
        model: ModelKind,
        fit: Box<LeastSquaresFit>,
        digest: DataDigest,
        prior: Option<DataDigest>,
    },
}

fn is_mean_path(cmd: &Command, a: &AnalysisArgs) -> bool {
    match cmd {
        Command::Mean(_) => true,
        Command::Errors(_) | Command::Sample(_) | Command::Compare(_) | Command::Density(_) => {
            a.x.is_empty() && !a.intercept && a.lags.is_none() && a.prior_data.is_none()
        }
        _ => false,
    }
}

fn resolve(cmd: &Command, a: &AnalysisArgs) -> Result<Analysis, CliError> {
    if is_mean_path(cmd, a) {
        if !a.x.is_empty() || a.lags.is_some() || a.prior_data.is_some() || a.ell.is_some() {
            return Err(usage(
                "mean does not accept --x, --lags, --prior-data or --ell",
            ));
        }
        if let Some(xf) = &a.xf {
            if xf.as_slice() != [1.0] {
                return Err(usage("the mean model predicts at --xf 1 only"));
            }
        }
        let cols = load_csv(&a.data, &a.y, &[])?;
        let sample = Sample::new(cols.response.1.clone())?;
        return Ok(Analysis::Mean {
            digest: cols.digest(1),
            sample,
        });
    }

    let autoregressive = matches!(cmd, Command::Ar(_)) || a.lags.is_some();
    if autoregressive {
        if !a.x.is_empty() {
            return Err(usage("ar uses only the --y series; drop --x"));
        }
        if a.prior_data.is_some() {
            return Err(usage("--prior-data is not supported for autoregressions"));
        }
        let q = a.lags.unwrap_or(1);
        let intercept = !a.no_intercept;
        let cols = load_csv(&a.data, &a.y, &[])?;
        let problem = build_ar_design(&cols.response.1, q, intercept)?;
        let fit = fit_regression(&problem)?;
        let mut digest = cols.digest(problem.k());
        digest.n = problem.n();
        return Ok(Analysis::Regression {
            model: ModelKind::Ar,
            fit: Box::new(fit),
            digest,
            prior: None,
        });
    }

    if a.x.is_empty() && !a.intercept {
        return Err(usage(format!("{} needs --x or --intercept", cmd.name())));
    }
    if a.no_intercept {
        return Err(usage("--no-intercept applies to ar only"));
    }
    let cols = load_csv(&a.data, &a.y, &a.x)?;
    let problem = build_design(&cols.response.1, &cols.regressors, a.intercept)?;
    let digest = cols.digest(problem.k());
    let (fit, prior) = match (&a.prior_data, &a.prior_y) {
        (Some(path), Some(prior_y)) => {
            let prior_cols = load_csv(path, prior_y, &a.x)?;
            let sample = conceptual_sample(&prior_cols, a.intercept)?;
            (
                fit_with_prior(&problem, &sample)?,
                Some(prior_cols.digest(problem.k())),
            )
        }
        _ => (fit_regression(&problem)?, None),
    };
    Ok(Analysis::Regression {
        model: ModelKind::Regress,
        fit: Box::new(fit),
        digest,
        prior,
    })
}

fn conceptual_sample(cols: &CsvColumns, intercept: bool) -> Result<ConceptualSample, BmomError> {
    let n = cols.response.1.len();
    let offset = usize::from(intercept);
    let k = cols.regressors.len() + offset;
    let x = DMatrix::from_fn(n, k, |i, j| {
        if intercept && j == 0 {
            1.0
        } else {
            cols.regressors[j - offset].1[i]
        }
    });
    ConceptualSample::new(x, DVector::from_column_slice(&cols.response.1))
}

fn seed(a: &AnalysisArgs) -> Result<u64, CliError> {
    if let Some(s) = a.seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            usage(format!(
                "{SEED_ENV}={v:?} is not an unsigned 64-bit integer"
            ))
        }),
        Err(_) => Err(usage(format!("sample needs --seed or {SEED_ENV}"))),
    }
}

/// Files to write once every computation has succeeded.
pub struct Output {
    pub report: Vec<u8>,
    pub destination: Option<PathBuf>,
    pub extra: Vec<(PathBuf, Vec<u8>)>,
}

/// Builds the report for any report-producing command.
pub fn run_analysis(cmd: &Command) -> Result<AnalysisReport, CliError> {
    let a = cmd.args();
    if matches!(cmd, Command::Predict(_)) && a.xf.is_none() {
        return Err(usage("predict needs --xf"));
    }
    let sampling = match cmd {
        Command::Sample(_) => Some(DrawConfig::new(seed(a)?, a.draws)?),
        _ => None,
    };
    let opts = AnalysisOptions {
        level: a.level,
        x_f: a.xf.clone(),
        ell: a.ell.clone(),
        realized_errors: matches!(cmd, Command::Errors(_)),
        sampling,
    };
    let report = match resolve(cmd, a)? {
        Analysis::Mean { sample, digest } => mean_report(cmd.name(), &sample, digest, &opts)?,
        Analysis::Regression {
            model,
            fit,
            digest,
            prior,
        } => regression_report(cmd.name(), model, &fit, digest, prior, &opts)?,
    };
    Ok(report)
}

fn density_target(cmd: &Command, a: &AnalysisArgs) -> Result<(String, Density), CliError> {
    let analysis = resolve(cmd, a)?;
    let requested = a.target.clone();
    let parse_error_index = |t: &str| -> Result<Option<(usize, bool)>, CliError> {
        let Some(rest) = t.strip_prefix("error:") else {
            return Ok(None);
        };
        let (idx, conditional) = match rest.strip_suffix("|sigma2") {
            Some(i) => (i, true),
            None => (rest, false),
        };
        let i: usize = idx
            .parse()
            .map_err(|_| usage(format!("bad observation index in target {t:?}")))?;
        if i == 0 {
            return Err(usage("observation indices are one-based"));
        }
        Ok(Some((i - 1, conditional)))
    };
    match analysis {
        Analysis::Mean { sample, .. } => {
            let post = fit_mean(&sample)?;
            let set = mean_maxent(&post, None)?;
            let target = requested.unwrap_or_else(|| "theta".into());
            if let Some((i, conditional)) = parse_error_index(&target)? {
                if i >= post.n {
                    return Err(BmomError::IndexOutOfRange {
                        what: "observations",
                        index: i,
                        len: post.n,
                    }
                    .into());
                }
                let d = if conditional {
                    Density::Normal(set.error_conditional[i])
                } else {
                    Density::Laplace(set.error_marginal[i])
                };
                return Ok((target, d));
            }
            let d = match target.as_str() {
                "theta" => Density::Laplace(set.theta_marginal),
                "theta|sigma2" => Density::Normal(set.theta_conditional),
                "theta+" => Density::Exponential(positive_mean_density(&post)?),
                "sigma2" => Density::Exponential(set.sigma2_density),
                "y_f" => Density::Laplace(set.predictive_marginal),
                "y_f|sigma2" => Density::Normal(set.predictive_conditional),
                other => {
                    return Err(usage(format!(
                        "unknown density target {other:?} for the mean model"
                    )))
                }
            };
            Ok((target, d))
        }
        Analysis::Regression { fit, .. } => {
            let target = requested.unwrap_or_else(|| fit.names[0].clone());
            if let Some((i, conditional)) = parse_error_index(&target)? {
                let e = fit.realized_error_marginal(i, None)?;
                let d = if conditional {
                    Density::Normal(e.conditional)
                } else {
                    Density::Laplace(e.marginal)
                };
                return Ok((target, d));
            }
            let need_xf = || {
                a.xf.as_deref()
                    .ok_or_else(|| usage("target y_f needs --xf"))
            };
            let need_ell = || {
                a.ell
                    .as_deref()
                    .ok_or_else(|| usage("target ell'beta needs --ell"))
            };
            let d = match target.as_str() {
                "sigma2" => Density::Exponential(fit.sigma2_density()?),
                "y_f" => Density::Laplace(fit.predictive_point(need_xf()?)?.marginal()?),
                "y_f|sigma2" => {
                    Density::Normal(fit.predictive_point(need_xf()?)?.conditional(fit.s2)?)
                }
                "ell'beta" => Density::Laplace(fit.linear_combination_marginal(need_ell()?)?),
                "ell'beta+" => Density::Exponential(fit.positive_combination_density(need_ell()?)?),
                name => {
                    let (base, conditional) = match name.strip_suffix("|sigma2") {
                        Some(b) => (b, true),
                        None => (name, false),
                    };
                    let i = fit
                        .names
                        .iter()
                        .position(|n| n == base)
                        .ok_or_else(|| usage(format!("unknown density target {name:?}")))?;
                    if conditional {
                        Density::Normal(fit.coefficient_conditional(i, None)?)
                    } else {
                        Density::Laplace(fit.coefficient_marginal(i)?)
                    }
                }
            };
            Ok((target, d))
        }
    }
}

/// Computes every output of one invocation without touching the filesystem.
pub fn execute(cmd: &Command) -> Result<Output, CliError> {
    let a = cmd.args();
    if let Command::Density(_) = cmd {
        let range = match &a.range {
            Some(r) if r.len() == 2 => Some((r[0], r[1])),
            Some(_) => return Err(usage("--range takes exactly two values LO,HI")),
            None => None,
        };
        let (target, d) = density_target(cmd, a)?;
        let grid = emit_density_grid(&target, &d, range, a.grid)?;
        return Ok(Output {
            report: grid.to_tsv().into_bytes(),
            destination: a.out.clone(),
            extra: vec![],
        });
    }
    if a.draws_out.is_some() && !matches!(cmd, Command::Sample(_)) {
        return Err(usage("--draws-out applies to sample only"));
    }
    let report = run_analysis(cmd)?;
    let format = match a.format {
        OutputFormat::Json => Format::Json,
        OutputFormat::Text => Format::Text,
    };
    let mut extra = Vec::new();
    if let (Some(path), Some(config)) = (&a.draws_out, report.sampler.as_ref()) {
        let fit = match resolve(cmd, a)? {
            Analysis::Regression { fit, .. } => *fit,
            Analysis::Mean { sample, .. } => {
                fit_regression(&build_design(sample.values(), &[], true)?)?
            }
        };
        let draws = draw_joint(&fit, &DrawConfig::new(config.seed, config.n_draws)?)?;
        let mut buf = Vec::new();
        write_draws_csv(&draws, &mut buf).map_err(|e| BmomError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        extra.push((path.clone(), buf));
    }
    Ok(Output {
        report: render_report(&report, format),
        destination: a.out.clone(),
        extra,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), BmomError> {
    std::fs::write(path, bytes).map_err(|e| BmomError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn emit(output: Output) -> Result<(), BmomError> {
    for (path, bytes) in &output.extra {
        write_file(path, bytes)?;
    }
    match &output.destination {
        Some(path) => write_file(path, &output.report),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&output.report)
                .and_then(|_| stdout.flush())
                .map_err(|e| BmomError::Io {
                    path: "<stdout>".into(),
                    message: e.to_string(),
                })
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command).map_err(|e| match e {
        CliError::Usage(msg) => (2, format!("error[usage]: {msg}")),
        CliError::Analysis(err) => (1, format!("error[{}]: {err}", err.kind())),
    }) {
        Ok(output) => match emit(output) {
            Ok(()) => 0,
            Err(err) => {
                eprintln!("error[{}]: {err}", err.kind());
                1
            }
        },
        Err((code, line)) => {
            eprintln!("{}", line.replace('\n', " "));
            code
        }
    }
}
