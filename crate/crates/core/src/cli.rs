//! Command-line front end. Each subcommand is one stage of the pipeline:
//! `dissim` and `cluster` structure the records, `autocorr` scores them,
//! `classify`/`triage` reuse a stored model for new patients, and `verify`
//! evaluates the clustering against the exhaustive optimum.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 clustering hit the pass
//! cap without converging (the model is still written).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::autocorr::{categorize_risk, risk_scores, scores_to_csv, AutocorrError, RiskScore, RiskThresholds};
use crate::dataset::{builtin_table1, parse_binary_vector, parse_dataset, Dataset, DatasetError, PatientRecord};
use crate::kmeans::{run, wcss, KMeansConfig, KMeansError};
use crate::metrics::{dissimilarity_matrix, DissimilarityMatrix, Metric, MetricError};
use crate::model_file::{ModelFile, ModelFileError};
use crate::oracle::{certify, stirling2, OracleError, DEFAULT_CAP};
use crate::triage::{classify, map_categories, triage, TriageCategory, TriageError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    KMeans(#[from] KMeansError),
    #[error(transparent)]
    Autocorr(#[from] AutocorrError),
    #[error(transparent)]
    Triage(#[from] TriageError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Model(#[from] ModelFileError),
}

#[derive(Debug, Parser)]
#[command(name = "cardiotriage", version, about = "Cluster, score and triage binary cardiology symptom records")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run sequential k-means and write the model as JSON.
    Cluster(ClusterArgs),
    /// Pairwise dissimilarity matrix of all records.
    Dissim(DissimArgs),
    /// Per-patient lag-k autocorrelation risk scores.
    Autocorr(AutocorrArgs),
    /// Assign a query vector to the nearest cluster of a stored model.
    Classify(ClassifyArgs),
    /// Full triage report for a query: cluster, category, precedents, risk.
    Triage(TriageArgs),
    /// Compare the clustering against the exhaustive-search optimum.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Use the built-in ten-patient reference table.
    #[arg(long = "builtin-table1")]
    pub builtin_table1: bool,
    /// CSV file with header `id,<feature>,...`.
    #[arg(long, visible_alias = "data", value_name = "FILE")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Write output here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 0.8)]
    pub theta_cardiac: f64,
    #[arg(long, default_value_t = 0.5)]
    pub theta_pro: f64,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub k: usize,
    /// Refinement pass cap (default 100 * N).
    #[arg(long, env = "TRIAGE_MAX_PASSES")]
    pub max_passes: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct DissimArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "hamming")]
    pub metric: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct AutocorrArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Categorize precomputed values from a CSV `id,r` instead of computing them.
    #[arg(long, value_name = "FILE")]
    pub scores: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub lag: usize,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Comma-separated 0/1 values, one per feature.
    #[arg(long)]
    pub query: String,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct TriageArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub query: String,
    #[arg(long, default_value = "query")]
    pub query_id: String,
    #[arg(long, default_value_t = 1)]
    pub lag: usize,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub k: usize,
    /// Largest dataset the exhaustive search will accept.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long, env = "TRIAGE_MAX_PASSES")]
    pub max_passes: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    Builtin,
    File(PathBuf),
}

/// Resolved settings shared by the subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<InputSource>,
    pub k: Option<usize>,
    pub lag: usize,
    pub thresholds: RiskThresholds<f64>,
    pub max_passes: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    fn new(out: &OutArgs) -> Self {
        Self {
            input: None,
            k: None,
            lag: 1,
            thresholds: RiskThresholds::default(),
            max_passes: None,
            out: out.out.clone(),
            format: OutputFormat::Json,
        }
    }

    fn with_input(mut self, input: &InputArgs) -> Result<Self, CliError> {
        self.input = Some(input_source(input)?);
        Ok(self)
    }

    fn with_thresholds(mut self, t: &ThresholdArgs) -> Result<Self, CliError> {
        self.thresholds = RiskThresholds::new(t.theta_cardiac, t.theta_pro)?;
        Ok(self)
    }

    fn dataset(&self) -> Result<Dataset, CliError> {
        match &self.input {
            Some(InputSource::Builtin) => Ok(builtin_table1()),
            Some(InputSource::File(path)) => Ok(parse_dataset(&read(path)?)?),
            None => Err(CliError::Usage("no input source given".into())),
        }
    }

    fn kmeans_config(&self) -> KMeansConfig {
        KMeansConfig {
            max_passes: self.max_passes,
        }
    }
}

fn input_source(input: &InputArgs) -> Result<InputSource, CliError> {
    match (input.builtin_table1, &input.input) {
        (true, None) => Ok(InputSource::Builtin),
        (false, Some(path)) => Ok(InputSource::File(path.clone())),
        (true, Some(_)) => Err(CliError::Usage(
            "give exactly one of --builtin-table1 and --input".into(),
        )),
        (false, None) => Err(CliError::Usage(
            "an input is required: --builtin-table1 or --input FILE".into(),
        )),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn to_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Runs `cluster`; returns the exit code (0 converged, 3 capped).
pub fn cmd_cluster(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let d = cfg.dataset()?;
    let k = cfg.k.ok_or_else(|| CliError::Usage("--k is required".into()))?;
    let model = run::<f64>(&d, k, cfg.kmeans_config())?;
    let file = ModelFile::from_model(&model, &d)?;
    emit(cfg, &file.to_json(), stdout)?;
    Ok(if model.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

#[derive(Serialize)]
struct MatrixJson<'a> {
    metric: Metric,
    ids: &'a [String],
    entries: Vec<&'a [f64]>,
}

pub fn cmd_dissim(cfg: &RunConfig, metric: Metric, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let d = cfg.dataset()?;
    let m: DissimilarityMatrix<f64> = dissimilarity_matrix(&d, metric)?;
    let text = match cfg.format {
        OutputFormat::Csv => m.to_csv(),
        OutputFormat::Json => to_json(&MatrixJson {
            metric,
            ids: m.ids(),
            entries: (0..m.order()).map(|i| m.row(i)).collect(),
        }),
    };
    emit(cfg, &text, stdout)?;
    Ok(EXIT_OK)
}

/// Reads a CSV `id,r` of precomputed correlation values.
fn read_reported_scores(path: &Path, lag: usize) -> Result<Vec<RiskScore<f64>>, CliError> {
    let text = read(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut scores = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 2 {
            return Err(CliError::Usage(format!(
                "{} row {line}: expected `id,r`",
                path.display()
            )));
        }
        let r: f64 = row[1].parse().map_err(|_| {
            CliError::Usage(format!("{} row {line}: `{}` is not a number", path.display(), &row[1]))
        })?;
        scores.push(RiskScore {
            id: row[0].to_string(),
            lag,
            r,
            defined: r.is_finite(),
            category: None,
        });
    }
    Ok(scores)
}

pub fn cmd_autocorr(cfg: &RunConfig, reported: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let scores = match reported {
        Some(path) => read_reported_scores(path, cfg.lag)?,
        None => risk_scores::<f64>(&cfg.dataset()?, cfg.lag)?,
    };
    let scores = categorize_risk(&scores, &cfg.thresholds);
    let text = match cfg.format {
        OutputFormat::Csv => scores_to_csv(&scores),
        OutputFormat::Json => to_json(&scores),
    };
    emit(cfg, &text, stdout)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ClassifyJson<'a> {
    cluster: usize,
    distance: f64,
    distances: &'a [f64],
    category: Option<TriageCategory>,
    members: &'a [String],
}

pub fn cmd_classify(cfg: &RunConfig, model: &Path, query: &str, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let file = ModelFile::<f64>::from_json(&read(model)?)?;
    let m = file.to_model()?;
    let q = parse_binary_vector(query)?;
    let c = classify(&m, &q)?;
    let category = map_categories(&m).ok().map(|cats| cats[c.cluster]);
    let text = to_json(&ClassifyJson {
        cluster: c.cluster,
        distance: c.distance,
        distances: &c.distances,
        category,
        members: file.members(c.cluster),
    });
    emit(cfg, &text, stdout)?;
    Ok(EXIT_OK)
}

pub fn cmd_triage(
    cfg: &RunConfig,
    model: &Path,
    query: &PatientRecord,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let file = ModelFile::<f64>::from_json(&read(model)?)?;
    let d = cfg.dataset()?;
    if file.patients.iter().map(String::as_str).ne(d.ids()) {
        return Err(CliError::Usage(
            "model patients do not match the dataset ids".into(),
        ));
    }
    let m = file.to_model()?;
    let report = triage(&m, &d, query, cfg.lag, &cfg.thresholds)?;
    emit(cfg, &to_json(&report), stdout)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyJson {
    k: usize,
    n: usize,
    partitions_examined: u128,
    stirling: u128,
    optimal_wcss: f64,
    optimal_partition: Vec<Vec<String>>,
    heuristic_wcss: f64,
    heuristic_partition: Vec<Vec<String>>,
    gap: f64,
    converged: bool,
    locally_optimal: bool,
}

fn blocks(labels: &[usize], k: usize, d: &Dataset) -> Vec<Vec<String>> {
    (0..k)
        .map(|j| {
            labels
                .iter()
                .zip(d.ids())
                .filter(|(&l, _)| l == j)
                .map(|(_, id)| id.to_string())
                .collect()
        })
        .collect()
}

pub fn cmd_verify(cfg: &RunConfig, cap: usize, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let d = cfg.dataset()?;
    let k = cfg.k.ok_or_else(|| CliError::Usage("--k is required".into()))?;
    if d.len() > cap {
        return Err(OracleError::OverCap { n: d.len(), cap }.into());
    }
    let model = run::<f64>(&d, k, cfg.kmeans_config())?;
    let heuristic = wcss(&model.state, &d)?;
    let cert = certify(&model, &d, cap)?;
    let text = to_json(&VerifyJson {
        k,
        n: d.len(),
        partitions_examined: cert.examined,
        stirling: stirling2(d.len(), k),
        optimal_wcss: cert.wcss,
        optimal_partition: blocks(&cert.best, k, &d),
        heuristic_wcss: heuristic,
        heuristic_partition: blocks(&model.labels(), k, &d),
        gap: heuristic - cert.wcss,
        converged: model.converged,
        locally_optimal: cert.locally_optimal.unwrap_or(false),
    });
    emit(cfg, &text, stdout)?;
    Ok(EXIT_OK)
}

/// Dispatches a parsed command line.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Cluster(a) => {
            let mut cfg = RunConfig::new(&a.out).with_input(&a.input)?;
            cfg.k = Some(a.k);
            cfg.max_passes = a.max_passes;
            cmd_cluster(&cfg, stdout)
        }
        Command::Dissim(a) => {
            let mut cfg = RunConfig::new(&a.out).with_input(&a.input)?;
            cfg.format = a.format;
            let metric: Metric = a.metric.parse()?;
            cmd_dissim(&cfg, metric, stdout)
        }
        Command::Autocorr(a) => {
            let mut cfg = RunConfig::new(&a.out).with_thresholds(&a.thresholds)?;
            cfg.lag = a.lag;
            cfg.format = a.format;
            match (&a.scores, a.input.builtin_table1 || a.input.input.is_some()) {
                (Some(_), true) => {
                    return Err(CliError::Usage(
                        "--scores cannot be combined with a dataset input".into(),
                    ))
                }
                (None, _) => cfg = cfg.with_input(&a.input)?,
                (Some(_), false) => {}
            }
            cmd_autocorr(&cfg, a.scores.as_deref(), stdout)
        }
        Command::Classify(a) => {
            let cfg = RunConfig::new(&a.out);
            cmd_classify(&cfg, &a.model, &a.query, stdout)
        }
        Command::Triage(a) => {
            let mut cfg = RunConfig::new(&a.out)
                .with_input(&a.input)?
                .with_thresholds(&a.thresholds)?;
            cfg.lag = a.lag;
            let query = PatientRecord::new(a.query_id, parse_binary_vector(&a.query)?);
            cmd_triage(&cfg, &a.model, &query, stdout)
        }
        Command::Verify(a) => {
            let mut cfg = RunConfig::new(&a.out).with_input(&a.input)?;
            cfg.k = Some(a.k);
            cfg.max_passes = a.max_passes;
            cmd_verify(&cfg, a.cap, stdout)
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// reporting errors on `stderr`. Returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT
        }
    }
}
