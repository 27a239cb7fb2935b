//! Command-line front end.
//!
//! Exit codes: 0 success, 2 success with warnings, 1 error. Every command
//! accepts `--config FILE` with `key = value` lines; flags win over the file
//! and the effective settings are written to `manifest.toml` in the output
//! directory.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{Array1, ArrayView1};
use serde::Serialize;
use thiserror::Error;

use crate::baseline::{self, BaselineError};
use crate::bench::{self, BenchConfig, BenchDataset, BenchError, TimingRecord};
use crate::data::{self, CsvOptions, DataError, DataMatrix, MissingPolicy, RawTable, Scaling};
use crate::eigen::{GramSide, PowerOptions};
use crate::fit::{self, FitConfig, FitError, FitResult, Method, StopReason, StopRule};
use crate::metrics::{self, MetricsError};
use crate::numfmt::format_sig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_WARNINGS: i32 = 2;

/// Significant digits of every number written to CSV.
pub const CSV_DIGITS: usize = 12;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("cannot write manifest: {0}")]
    Manifest(#[from] toml::ser::Error),
    #[error("{0}")]
    Report(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Parser)]
#[command(name = "spca", version, about = "Sparse principal components by projection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute sparse components and write loadings, scores and a summary.
    Fit(FitArgs),
    /// First-component curves of norm and variance explained versus cardinality.
    Compare(CompareArgs),
    /// Time projection SPCA on synthetic data.
    Bench(BenchArgs),
    /// Print plain-text tables from the files in an output directory.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingArg {
    Cov,
    Cor,
}

impl From<ScalingArg> for Scaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::Cov => Scaling::Covariance,
            ScalingArg::Cor => Scaling::Correlation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Projection,
    Lsspca,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Projection => Method::Projection,
            MethodArg::Lsspca => Method::Lsspca,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingArg {
    /// Drop columns that contain missing cells.
    Drop,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GramArg {
    /// `p × p` power iteration regardless of shape.
    Variables,
    /// `n × n` when `p > n`.
    Auto,
}

macro_rules! value_enum_from_str {
    ($($t:ty),*) => {$(
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                <$t as ValueEnum>::from_str(s, true)
            }
        }
    )*};
}
value_enum_from_str!(ScalingArg, MethodArg, MissingArg, GramArg);

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input CSV file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// The first row holds data, not column names.
    #[arg(long)]
    pub no_header: bool,
    /// Field delimiter.
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Columns to leave out, by name.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<String>,
    /// What to do with columns that have missing cells.
    #[arg(long, value_enum)]
    pub missing: Option<MissingArg>,
    #[arg(long, value_enum)]
    pub scaling: Option<ScalingArg>,
    /// Optional `key = value` settings file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Fraction of each PC's variance the selected block must explain.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Number of components (default 10).
    #[arg(long, conflicts_with = "vexp_fraction")]
    pub components: Option<usize>,
    /// Stop once this fraction of the total variance is explained.
    #[arg(long)]
    pub vexp_fraction: Option<f64>,
    /// Column held out of the analysis and regressed on the components.
    #[arg(long)]
    pub response: Option<String>,
    #[arg(long)]
    pub max_card: Option<usize>,
    #[arg(long)]
    pub eigen_tol: Option<f64>,
    #[arg(long)]
    pub collinearity_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Largest cardinality evaluated.
    #[arg(long)]
    pub max_card: Option<usize>,
    /// rCvexp level reported in crossing.csv.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Comma-separated variable counts.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Rows of every synthetic matrix.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Rank of the low-rank part of the synthetic data.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Standard deviation of the added noise.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub gram: Option<GramArg>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Directory written by fit, compare or bench.
    #[arg(long = "in")]
    pub dir: PathBuf,
}

/// Parsed `key = value` file. Blank lines and lines starting with `#` are
/// ignored.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", i + 1)))?;
            let v = v.trim().trim_matches('"');
            values.insert(k.trim().replace('-', "_"), v.to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => Self::parse(&fs::read_to_string(p).map_err(io_err(p))?),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!("unknown config key {k:?}"))),
            None => Ok(()),
        }
    }

    /// `flag`, else the file's value for `key`, else `None`.
    fn layer<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Config(format!("config key {key}: {e}"))),
        }
    }

    fn list<T: FromStr>(&self, flag: Vec<T>, key: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if !flag.is_empty() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|e| CliError::Config(format!("config key {key}: {e}"))))
                .collect(),
        }
    }
}

const INPUT_KEYS: [&str; 6] = ["input", "header", "delimiter", "exclude", "missing", "scaling"];

/// Effective input settings.
#[derive(Debug, Clone, Serialize)]
pub struct InputConfig {
    pub input: String,
    pub header: bool,
    pub delimiter: String,
    pub exclude: Vec<String>,
    pub missing: MissingArg,
    pub scaling: ScalingArg,
}

impl InputConfig {
    fn resolve(args: &InputArgs, file: &ConfigFile, default_scaling: ScalingArg) -> Result<Self, CliError> {
        let input = file
            .layer(args.input.clone().map(|p| p.display().to_string()), "input")?
            .ok_or_else(|| CliError::Config("--input is required".into()))?;
        let header = if args.no_header { false } else { file.layer(None::<bool>, "header")?.unwrap_or(true) };
        let delimiter = file.layer(args.delimiter, "delimiter")?.unwrap_or(',');
        if !delimiter.is_ascii() {
            return Err(CliError::Config(format!("delimiter {delimiter:?} is not ASCII")));
        }
        Ok(Self {
            input,
            header,
            delimiter: delimiter.to_string(),
            exclude: file.list(args.exclude.clone(), "exclude")?,
            missing: file.layer(args.missing, "missing")?.unwrap_or(MissingArg::Drop),
            scaling: file.layer(args.scaling, "scaling")?.unwrap_or(default_scaling),
        })
    }

    fn csv_options(&self) -> CsvOptions {
        CsvOptions {
            has_header: self.header,
            delimiter: self.delimiter.as_bytes()[0],
            skip_columns: self.exclude.iter().cloned().collect(),
            ..CsvOptions::default()
        }
    }

    fn load(&self) -> Result<RawTable, CliError> {
        Ok(data::load_csv(&self.input, &self.csv_options())?)
    }

    fn preprocess(&self, table: &RawTable) -> Result<DataMatrix, CliError> {
        let missing = match self.missing {
            MissingArg::Drop => MissingPolicy::DropColumns,
            MissingArg::Fail => MissingPolicy::Fail,
        };
        Ok(data::preprocess(table, self.scaling.into(), missing)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitRunConfig {
    #[serde(flatten)]
    pub input: InputConfig,
    pub alpha: f64,
    pub method: MethodArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vexp_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_card: Option<usize>,
    pub eigen_tol: f64,
    /// Describes the default cap of [`crate::eigen::PowerOptions::max_iter_for`].
    pub eigen_max_iter: String,
    pub collinearity_tol: f64,
    pub rank_tol: f64,
    pub out: String,
}

impl FitRunConfig {
    pub fn resolve(args: &FitArgs) -> Result<Self, CliError> {
        let file = ConfigFile::load(args.input.config.as_deref())?;
        let mut keys = INPUT_KEYS.to_vec();
        keys.extend([
            "alpha",
            "method",
            "components",
            "vexp_fraction",
            "response",
            "max_card",
            "eigen_tol",
            "collinearity_tol",
            "out",
        ]);
        file.check_keys(&keys)?;
        let defaults = FitConfig::default();
        let mut components = file.layer(args.components, "components")?;
        let vexp_fraction = file.layer(args.vexp_fraction, "vexp_fraction")?;
        match (components, vexp_fraction) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("components and vexp_fraction are mutually exclusive".into()))
            }
            (None, None) => components = Some(10),
            _ => {}
        }
        Ok(Self {
            input: InputConfig::resolve(&args.input, &file, ScalingArg::Cor)?,
            alpha: file.layer(args.alpha, "alpha")?.unwrap_or(defaults.alpha),
            method: file.layer(args.method, "method")?.unwrap_or(MethodArg::Projection),
            components,
            vexp_fraction,
            response: file.layer(args.response.clone(), "response")?,
            max_card: file.layer(args.max_card, "max_card")?,
            eigen_tol: file.layer(args.eigen_tol, "eigen_tol")?.unwrap_or(defaults.power.tol),
            eigen_max_iter: "max(10*d+1000, min(1e9/d^2, 1e6))".into(),
            collinearity_tol: file.layer(args.collinearity_tol, "collinearity_tol")?.unwrap_or(defaults.collinearity_tol),
            rank_tol: defaults.rank_tol,
            out: output_dir(args.out.as_deref(), &file)?,
        })
    }

    pub fn fit_config(&self) -> FitConfig {
        let stop = match (self.components, self.vexp_fraction) {
            (_, Some(f)) => StopRule::TotalVexpFraction(f),
            (Some(k), None) => StopRule::NComponents(k),
            (None, None) => StopRule::NComponents(10),
        };
        FitConfig {
            alpha: self.alpha,
            method: self.method.into(),
            stop,
            power: PowerOptions { tol: self.eigen_tol, max_iter: None },
            collinearity_tol: self.collinearity_tol,
            max_card: self.max_card,
            rank_tol: self.rank_tol,
            gram_side: GramSide::Auto,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRunConfig {
    #[serde(flatten)]
    pub input: InputConfig,
    pub max_card: usize,
    pub target: f64,
    pub eigen_tol: f64,
    pub out: String,
}

impl CompareRunConfig {
    pub fn resolve(args: &CompareArgs) -> Result<Self, CliError> {
        let file = ConfigFile::load(args.input.config.as_deref())?;
        let mut keys = INPUT_KEYS.to_vec();
        keys.extend(["max_card", "target", "out"]);
        file.check_keys(&keys)?;
        let max_card = file
            .layer(args.max_card, "max_card")?
            .ok_or_else(|| CliError::Config("--max-card is required".into()))?;
        if max_card == 0 {
            return Err(CliError::Config("--max-card must be at least 1".into()));
        }
        Ok(Self {
            input: InputConfig::resolve(&args.input, &file, ScalingArg::Cor)?,
            max_card,
            target: file.layer(args.target, "target")?.unwrap_or(0.999),
            eigen_tol: PowerOptions::default().tol,
            out: output_dir(args.out.as_deref(), &file)?,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRunConfig {
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub n: usize,
    pub components: usize,
    pub alpha: f64,
    pub rank: usize,
    pub noise: f64,
    pub seed: u64,
    pub gram: GramArg,
    pub warmup: bool,
    pub out: String,
}

impl BenchRunConfig {
    pub fn resolve(args: &BenchArgs) -> Result<Self, CliError> {
        let file = ConfigFile::load(args.config.as_deref())?;
        file.check_keys(&["sizes", "reps", "n", "components", "alpha", "rank", "noise", "seed", "gram", "out"])?;
        let sizes = file.list(args.sizes.clone(), "sizes")?;
        if sizes.is_empty() {
            return Err(CliError::Config("--sizes needs at least one value".into()));
        }
        let n = file.layer(args.n, "n")?.unwrap_or(200);
        let rank = file.layer(args.rank, "rank")?.unwrap_or(20);
        if let Some(&p) = sizes.iter().find(|&&p| rank > p.min(n)) {
            return Err(CliError::Config(format!("rank {rank} exceeds min(n, p) for p = {p}")));
        }
        let defaults = BenchConfig::default();
        Ok(Self {
            sizes,
            reps: file.layer(args.reps, "reps")?.unwrap_or(defaults.repetitions).max(1),
            n,
            components: file.layer(args.components, "components")?.unwrap_or(defaults.components).max(1),
            alpha: file.layer(args.alpha, "alpha")?.unwrap_or(defaults.alpha),
            rank,
            noise: file.layer(args.noise, "noise")?.unwrap_or(0.5),
            seed: file.layer(args.seed, "seed")?.unwrap_or(1),
            gram: file.layer(args.gram, "gram")?.unwrap_or(GramArg::Variables),
            warmup: defaults.warmup,
            out: output_dir(args.out.as_deref(), &file)?,
        })
    }
}

fn output_dir(flag: Option<&Path>, file: &ConfigFile) -> Result<String, CliError> {
    file.layer(flag.map(|p| p.display().to_string()), "out")?
        .ok_or_else(|| CliError::Config("--out is required".into()))
}

#[derive(Debug, Serialize)]
struct Manifest<C: Serialize> {
    run: RunSection,
    config: C,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<DataSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<ResultSection>,
}

#[derive(Debug, Serialize)]
struct RunSection {
    command: &'static str,
    version: &'static str,
}

#[derive(Debug, Serialize)]
struct DataSection {
    n: usize,
    p: usize,
    total_variance: f64,
    columns: Vec<String>,
    dropped_columns: Vec<String>,
    constant_columns: Vec<String>,
}

impl DataSection {
    fn of(x: &DataMatrix) -> Self {
        Self {
            n: x.n(),
            p: x.p(),
            total_variance: x.total_variance(),
            columns: x.column_names().to_vec(),
            dropped_columns: x.dropped_columns().to_vec(),
            constant_columns: x.constant_columns().to_vec(),
        }
    }
}

#[derive(Debug, Default, Serialize)]
struct ResultSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    components: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stop_reason: Option<StopReason>,
    warnings: Vec<String>,
}

fn write_manifest<C: Serialize>(dir: &Path, manifest: &Manifest<C>) -> Result<(), CliError> {
    let text = toml::to_string(manifest)?;
    let path = dir.join("manifest.toml");
    fs::write(&path, text).map_err(io_err(&path))
}

fn num(v: f64) -> String {
    format_sig(v, CSV_DIGITS)
}

fn write_csv<I>(path: &Path, header: &[String], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn create_dir(dir: &str) -> Result<PathBuf, CliError> {
    let path = PathBuf::from(dir);
    fs::create_dir_all(&path).map_err(io_err(&path))?;
    Ok(path)
}

/// Outcome of a command: warnings turn a success into exit code 2.
#[derive(Debug, Default)]
pub struct Outcome {
    pub warnings: Vec<String>,
}

fn component_header(k: usize) -> Vec<String> {
    (1..=k).map(|j| format!("comp{j}")).collect()
}

/// R² of `y` on the first `j` columns, for `j = 1..=k`.
fn cumulative_r2(scores: &[Array1<f64>], y: ArrayView1<'_, f64>) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::with_capacity(scores.len());
    for j in 1..=scores.len() {
        let mut m = ndarray::Array2::zeros((y.len(), j));
        for (k, s) in scores[..j].iter().enumerate() {
            m.column_mut(k).assign(s);
        }
        out.push(metrics::response_r2(m.view(), y)?);
    }
    Ok(out)
}

fn write_fit_outputs(dir: &Path, x: &DataMatrix, res: &FitResult, response: Option<&Array1<f64>>) -> Result<(), CliError> {
    let k = res.components.len();
    let header = component_header(k);
    let loadings = res.loadings(x.p());
    write_csv(
        &dir.join("loadings.csv"),
        &header,
        loadings.rows().into_iter().map(|r| r.iter().map(|&v| num(v)).collect()),
    )?;
    let scores = res.scores();
    write_csv(
        &dir.join("scores.csv"),
        &header,
        scores.rows().into_iter().map(|r| r.iter().map(|&v| num(v)).collect()),
    )?;

    let total = x.total_variance();
    let mut summary_header: Vec<String> =
        ["component", "cum_vexp_pct", "rcvexp_pct", "cardinality", "pc_correlation", "evexp", "pc_lambda", "block_r2"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    let mut r2 = None;
    if let Some(y) = response {
        let sparse: Vec<Array1<f64>> = res.components.iter().map(|c| c.scores.clone()).collect();
        r2 = Some((cumulative_r2(&res.pc_scores, y.view())?, cumulative_r2(&sparse, y.view())?));
        summary_header.push("response_r2_pc_pct".into());
        summary_header.push("response_r2_pct".into());
    }
    let rows = res.components.iter().enumerate().map(|(j, c)| {
        let mut row = vec![
            (j + 1).to_string(),
            num(100.0 * res.cum_vexp[j] / total),
            num(100.0 * res.rcvexp[j]),
            c.cardinality().to_string(),
            num(c.pc_correlation),
            num(c.evexp),
            num(c.ref_lambda),
            num(c.block_r2),
        ];
        if let Some((pc, sp)) = &r2 {
            row.push(num(100.0 * pc[j]));
            row.push(num(100.0 * sp[j]));
        }
        row
    });
    write_csv(&dir.join("summary.csv"), &summary_header, rows.collect::<Vec<_>>())?;

    let mut contrib = Vec::new();
    for (j, c) in res.components.iter().enumerate() {
        let block = ndarray::Array2::from_shape_fn((x.n(), c.cardinality()), |(i, k)| x.values()[[i, c.indices[k]]]);
        let smc = metrics::squared_multiple_correlations(block.view());
        let l1: f64 = c.sparse_loadings.iter().map(|v| v.abs()).sum();
        for (k, (&idx, &a)) in c.indices.iter().zip(c.sparse_loadings.iter()).enumerate() {
            contrib.push(vec![
                (j + 1).to_string(),
                (idx + 1).to_string(),
                num(a),
                num(100.0 * a / l1),
                num(smc[k]),
            ]);
        }
    }
    let header: Vec<String> =
        ["component", "variable", "loading", "contribution_pct", "block_smc"].iter().map(|s| s.to_string()).collect();
    write_csv(&dir.join("contributions.csv"), &header, contrib)?;
    Ok(())
}

pub fn cmd_fit(cfg: &FitRunConfig) -> Result<Outcome, CliError> {
    let mut table = cfg.input.load()?;
    let response = match &cfg.response {
        None => None,
        Some(name) => {
            let col = table
                .take_column(name)
                .ok_or_else(|| CliError::Config(format!("response column {name:?} not found")))?;
            let y: Option<Vec<f64>> = col.into_iter().collect();
            let y = Array1::from(y.ok_or_else(|| CliError::Config(format!("response {name:?} has missing values")))?);
            let mean = y.mean().unwrap_or(0.0);
            Some(y.mapv(|v| v - mean))
        }
    };
    let x = cfg.input.preprocess(&table)?;
    let dir = create_dir(&cfg.out)?;
    let mut warnings: Vec<String> =
        x.constant_columns().iter().map(|c| format!("column {c:?} is constant and was zeroed")).collect();

    let (res, failure) = match fit::fit(&x, &cfg.fit_config()) {
        Ok(res) => (res, None),
        Err(e) => match e.partial() {
            Some(partial) if !partial.components.is_empty() => (partial.clone(), Some(e)),
            _ => return Err(e.into()),
        },
    };
    for j in res.unreachable_steps() {
        warnings.push(format!(
            "component {}: block explains {:.4} of its PC, below alpha = {}",
            j + 1,
            res.components[j].block_r2,
            cfg.alpha
        ));
    }
    write_fit_outputs(&dir, &x, &res, response.as_ref())?;
    let mut all = warnings.clone();
    if let Some(e) = &failure {
        all.push(format!("stopped early: {e}"));
    }
    write_manifest(
        &dir,
        &Manifest {
            run: RunSection { command: "fit", version: env!("CARGO_PKG_VERSION") },
            config: cfg,
            data: Some(DataSection::of(&x)),
            result: Some(ResultSection {
                components: Some(res.components.len()),
                stop_reason: Some(res.stop_reason),
                warnings: all,
            }),
        },
    )?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(Outcome { warnings })
}

/// One row of curves.csv.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub method: &'static str,
    pub point: baseline::CurvePoint,
}

pub fn compare_curves(x: &DataMatrix, max_card: usize) -> Result<Vec<CurveRow>, CliError> {
    let opts = PowerOptions::default();
    let max_card = max_card.min(x.p());
    let mut rows: Vec<CurveRow> = fit::first_component_curves(x.values().view(), max_card, &opts)?
        .into_iter()
        .map(|(m, point)| CurveRow { method: method_name(m), point })
        .collect();
    rows.sort_by_key(|r| (r.method != "projection", r.point.cardinality));
    let grid: Vec<usize> = (1..=max_card).collect();
    rows.extend(
        baseline::baseline_curve(x, &grid, &opts)?.into_iter().map(|point| CurveRow { method: "threshold", point }),
    );
    Ok(rows)
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Projection => "projection",
        Method::Lsspca => "lsspca",
    }
}

/// Smallest cardinality at which each method reaches `target` rCvexp.
pub fn crossings(rows: &[CurveRow], target: f64) -> Vec<(&'static str, Option<usize>)> {
    ["projection", "lsspca", "threshold"]
        .iter()
        .map(|&m| {
            let hit = rows
                .iter()
                .filter(|r| r.method == m && r.point.rcvexp >= target)
                .map(|r| r.point.cardinality)
                .min();
            (m, hit)
        })
        .collect()
}

pub fn cmd_compare(cfg: &CompareRunConfig) -> Result<Outcome, CliError> {
    let table = cfg.input.load()?;
    let x = cfg.input.preprocess(&table)?;
    let dir = create_dir(&cfg.out)?;
    let rows = compare_curves(&x, cfg.max_card)?;
    let header: Vec<String> =
        ["method", "cardinality", "norm", "rel_norm", "rcvexp", "pc_correlation"].iter().map(|s| s.to_string()).collect();
    write_csv(
        &dir.join("curves.csv"),
        &header,
        rows.iter().map(|r| {
            vec![
                r.method.to_string(),
                r.point.cardinality.to_string(),
                num(r.point.norm),
                num(r.point.rel_norm),
                num(r.point.rcvexp),
                num(r.point.pc_correlation),
            ]
        }),
    )?;
    let cross = crossings(&rows, cfg.target);
    write_csv(
        &dir.join("crossing.csv"),
        &["method".to_string(), "cardinality".to_string(), "target".to_string()],
        cross.iter().map(|(m, c)| {
            vec![m.to_string(), c.map_or_else(|| "NA".to_string(), |c| c.to_string()), num(cfg.target)]
        }),
    )?;
    let mut warnings: Vec<String> =
        x.constant_columns().iter().map(|c| format!("column {c:?} is constant and was zeroed")).collect();
    let path_len = rows.iter().filter(|r| r.method == "projection").count();
    if path_len < cfg.max_card.min(x.p()) {
        warnings.push(format!("selection path ends at cardinality {path_len}: the data have no more rank"));
    }
    write_manifest(
        &dir,
        &Manifest {
            run: RunSection { command: "compare", version: env!("CARGO_PKG_VERSION") },
            config: cfg,
            data: Some(DataSection::of(&x)),
            result: Some(ResultSection { warnings: warnings.clone(), ..ResultSection::default() }),
        },
    )?;
    Ok(Outcome { warnings })
}

pub fn bench_datasets(cfg: &BenchRunConfig) -> Vec<BenchDataset> {
    cfg.sizes
        .iter()
        .map(|&p| BenchDataset {
            label: format!("synthetic_p{p}"),
            data: bench::gen_random_lowrank(cfg.n, p, cfg.rank, cfg.noise, cfg.seed.wrapping_add(p as u64)),
        })
        .collect()
}

pub fn cmd_bench(cfg: &BenchRunConfig) -> Result<Outcome, CliError> {
    let dir = create_dir(&cfg.out)?;
    let datasets = bench_datasets(cfg);
    let bench_cfg = BenchConfig {
        components: cfg.components,
        repetitions: cfg.reps,
        alpha: cfg.alpha,
        warmup: cfg.warmup,
        gram_side: match cfg.gram {
            GramArg::Variables => GramSide::Variables,
            GramArg::Auto => GramSide::Auto,
        },
    };
    let report = bench::run_benchmark(&datasets, &bench_cfg);
    let path = dir.join("timings.csv");
    let file = fs::File::create(&path).map_err(io_err(&path))?;
    bench::write_timings(std::io::BufWriter::new(file), &report.samples)?;
    let warnings: Vec<String> = report
        .failures
        .iter()
        .map(|f| format!("{} rep {}: {} ({} components timed)", f.dataset, f.rep, f.message, f.completed))
        .collect();
    write_manifest(
        &dir,
        &Manifest {
            run: RunSection { command: "bench", version: env!("CARGO_PKG_VERSION") },
            config: cfg,
            data: None,
            result: Some(ResultSection { warnings: warnings.clone(), ..ResultSection::default() }),
        },
    )?;
    Ok(Outcome { warnings })
}

fn read_numeric_csv(path: &Path) -> Result<RawTable, CliError> {
    Ok(data::load_csv(path, &CsvOptions::default())?)
}

fn column(table: &RawTable, name: &str) -> Option<Vec<Option<f64>>> {
    let j = table.column_names.iter().position(|c| c == name)?;
    Some(table.rows.iter().map(|r| r[j]).collect())
}

fn manifest_columns(dir: &Path) -> Vec<String> {
    let Ok(text) = fs::read_to_string(dir.join("manifest.toml")) else {
        return Vec::new();
    };
    let Ok(value) = text.parse::<toml::Table>() else {
        return Vec::new();
    };
    value
        .get("data")
        .and_then(|d| d.get("columns"))
        .and_then(|c| c.as_array())
        .map(|a| a.iter().filter_map(|v| v.as_str().map(str::to_string)).collect())
        .unwrap_or_default()
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.1}"))
}

fn render_row(out: &mut String, label: &str, cells: &[String], label_width: usize) {
    let _ = write!(out, "{label:<label_width$}");
    for c in cells {
        let _ = write!(out, " {c:>8}");
    }
    out.push('\n');
}

fn render_summary(dir: &Path, out: &mut String) -> Result<(), CliError> {
    let table = read_numeric_csv(&dir.join("summary.csv"))?;
    let k = table.n();
    let _ = writeln!(out, "Summary statistics for the first {k} sparse components\n");
    let width = 40;
    let header: Vec<String> = (1..=k).map(|j| format!("Comp{j}")).collect();
    render_row(out, "", &header, width);
    type Row = (&'static str, &'static str, fn(Option<f64>) -> String);
    let rows: [Row; 6] = [
        ("% Cumulative vexp", "cum_vexp_pct", pct),
        ("% Relative cumulative vexp", "rcvexp_pct", pct),
        ("Cardinality", "cardinality", |v| v.map_or_else(|| "-".into(), |v| format!("{v:.0}"))),
        ("Correlation with PC", "pc_correlation", |v| v.map_or_else(|| "-".into(), |v| format!("{v:.2}"))),
        ("% R2 response on PCs", "response_r2_pc_pct", pct),
        ("% R2 response on sparse comp.", "response_r2_pct", pct),
    ];
    for (label, key, f) in rows {
        if let Some(col) = column(&table, key) {
            let cells: Vec<String> = col.into_iter().map(f).collect();
            render_row(out, label, &cells, width);
        }
    }

    let contrib_path = dir.join("contributions.csv");
    if contrib_path.exists() {
        let names = manifest_columns(dir);
        let c = read_numeric_csv(&contrib_path)?;
        let comp = column(&c, "component").unwrap_or_default();
        let var = column(&c, "variable").unwrap_or_default();
        let share = column(&c, "contribution_pct").unwrap_or_default();
        let smc = column(&c, "block_smc").unwrap_or_default();
        let mut current = 0;
        for i in 0..c.n() {
            let j = comp[i].unwrap_or(0.0) as usize;
            if j != current {
                current = j;
                let _ = writeln!(out, "\nComponent {j}: contribution, variable, R2 within block");
            }
            let v = var[i].unwrap_or(0.0) as usize;
            let name = names.get(v.wrapping_sub(1)).cloned().unwrap_or_else(|| format!("V{v}"));
            let _ = writeln!(
                out,
                "  {:>6}%  {:<50} {:>5.2}",
                format!("{:.0}", share[i].unwrap_or(f64::NAN)),
                name,
                smc[i].unwrap_or(f64::NAN)
            );
        }
    }
    out.push('\n');
    Ok(())
}

fn render_curves(dir: &Path, out: &mut String) -> Result<(), CliError> {
    let path = dir.join("curves.csv");
    let mut rdr = csv::Reader::from_path(&path)?;
    let _ = writeln!(out, "First-component curves (norm, rCvexp, correlation with the PC)\n");
    let _ = writeln!(
        out,
        "{:<12} {:>5} {:>14} {:>9} {:>9} {:>9}",
        "method", "card", "norm", "rel_norm", "rcvexp", "corr"
    );
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| rec[i].parse::<f64>().unwrap_or(f64::NAN);
        let _ = writeln!(
            out,
            "{:<12} {:>5} {:>14} {:>9.3} {:>9.4} {:>9.4}",
            &rec[0],
            &rec[1],
            format_sig(f(2), 6),
            f(3),
            f(4),
            f(5)
        );
    }
    let cross = dir.join("crossing.csv");
    if cross.exists() {
        let mut rdr = csv::Reader::from_path(&cross)?;
        let _ = writeln!(out, "\nCardinality needed to reach the target rCvexp\n");
        for rec in rdr.records() {
            let rec = rec?;
            let reached = if &rec[1] == "NA" { "not reached".to_string() } else { rec[1].to_string() };
            let _ = writeln!(out, "{:<12} {:>12}   (target {})", &rec[0], reached, &rec[2]);
        }
    }
    out.push('\n');
    Ok(())
}

fn render_timings(dir: &Path, out: &mut String, warnings: &mut Vec<String>) -> Result<(), CliError> {
    let path = dir.join("timings.csv");
    let file = fs::File::open(&path).map_err(io_err(&path))?;
    let samples = bench::read_timings(file)?;
    if samples.is_empty() {
        return Err(CliError::Report(format!("{} has no timing rows", path.display())));
    }
    let records = bench::aggregate(&samples);
    let mut datasets: Vec<(String, usize)> = Vec::new();
    for r in &records {
        if !datasets.iter().any(|(d, _)| *d == r.dataset) {
            datasets.push((r.dataset.clone(), r.p));
        }
    }
    let max_c = records.iter().map(|r| r.c).max().unwrap_or(0);
    let _ = writeln!(out, "Median computational times (seconds)\n");
    let _ = write!(out, "{:<20} {:>6}", "dataset", "p");
    for c in 1..=max_c {
        let _ = write!(out, " {:>9}", format!("c={c}"));
    }
    out.push('\n');
    for (d, p) in &datasets {
        let _ = write!(out, "{d:<20} {p:>6}");
        for c in 1..=max_c {
            let cell = records
                .iter()
                .find(|r| r.dataset == *d && r.c == c)
                .map_or_else(|| "-".to_string(), |r| format_sig(r.elapsed, 3));
            let _ = write!(out, " {cell:>9}");
        }
        out.push('\n');
    }
    match bench::fit_complexity(&records) {
        Ok(fit) => {
            let _ = writeln!(out, "\nRegression of log10(T) on log10(c) and log10(p)\n");
            let _ = writeln!(out, "  log(k)      {:>9.4}", fit.log_k);
            let _ = writeln!(out, "  alpha (c)   {:>9.4}", fit.alpha_exp);
            let _ = writeln!(out, "  beta (p)    {:>9.4}", fit.beta_exp);
            let _ = writeln!(out, "  R-squared   {:>9.4}", fit.r_squared);
            let _ = writeln!(out, "  resid. SE   {:>9.4}   ({} cells)", fit.residual_se, fit.observations);
            if datasets_distinct_p(&records) < bench::RECOMMENDED_LEVELS {
                warnings.push(format!(
                    "fewer than {} distinct variable counts; exponents are poorly determined",
                    bench::RECOMMENDED_LEVELS
                ));
            }
        }
        Err(e) => warnings.push(format!("no complexity fit: {e}")),
    }
    out.push('\n');
    Ok(())
}

fn datasets_distinct_p(records: &[TimingRecord]) -> usize {
    records.iter().map(|r| r.p).collect::<std::collections::BTreeSet<_>>().len()
}

/// Renders every table the files in `dir` support.
pub fn render_report(dir: &Path) -> Result<(String, Vec<String>), CliError> {
    if !dir.is_dir() {
        return Err(CliError::Report(format!("{} is not a directory", dir.display())));
    }
    let mut out = String::new();
    let mut warnings = Vec::new();
    let mut found = false;
    if dir.join("summary.csv").exists() {
        render_summary(dir, &mut out)?;
        found = true;
    }
    if dir.join("curves.csv").exists() {
        render_curves(dir, &mut out)?;
        found = true;
    }
    if dir.join("timings.csv").exists() {
        render_timings(dir, &mut out, &mut warnings)?;
        found = true;
    }
    if !found {
        return Err(CliError::Report(format!(
            "{} holds none of summary.csv, curves.csv, timings.csv",
            dir.display()
        )));
    }
    Ok((out, warnings))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => FitRunConfig::resolve(a).and_then(|c| cmd_fit(&c)),
        Command::Compare(a) => CompareRunConfig::resolve(a).and_then(|c| cmd_compare(&c)),
        Command::Bench(a) => BenchRunConfig::resolve(a).and_then(|c| cmd_bench(&c)),
        Command::Report(a) => render_report(&a.dir).map(|(text, warnings)| {
            let _ = stdout.write_all(text.as_bytes());
            Outcome { warnings }
        }),
    };
    match result {
        Ok(outcome) if outcome.warnings.is_empty() => EXIT_OK,
        Ok(outcome) => {
            for w in &outcome.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            EXIT_WARNINGS
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}
