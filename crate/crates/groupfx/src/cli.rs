//! Command-line flags, the optional TOML config file and their merge into a
//! validated [`RunConfig`]. Flags always win over the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use groupfx_core::sim::SimCaseConfig;
use groupfx_core::uniform::TABLE1_R_VALUES;
use serde::Deserialize;

use crate::data::{parse_group, ColumnRef};
use crate::error::{CliError, CliResult};
use crate::render::Format;

pub const DEFAULT_SEED: u64 = 0;
pub const THREADS_ENV: &str = "GROUPFX_THREADS";

#[derive(Debug, Parser)]
#[command(name = "groupfx", version, about = "Estimable group effects for strongly correlated predictors")]
pub struct Cli {
    /// TOML file with defaults for any flag (keys use the flag names)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Seed for every random draw (default 0)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Variances of the average and individual effects in the uniform model
    Uniform(UniformArgs),
    /// Fit a linear model and report individual and group effects
    Analyze(AnalyzeArgs),
    /// Monte Carlo study of effect estimators
    Simulate(SimulateArgs),
    /// Constrained local regression for one group
    Clr(ClrArgs),
}

#[derive(Debug, Args)]
pub struct UniformArgs {
    /// Group size
    #[arg(long)]
    pub p: Option<usize>,
    /// A single correlation level
    #[arg(long, conflicts_with = "r_list")]
    pub r: Option<f64>,
    /// Comma-separated correlation levels
    #[arg(long = "r-list", value_delimiter = ',')]
    pub r_list: Vec<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Also report the variance of simplex effects with p*sum(w^2) - 1 equal to this
    #[arg(long)]
    pub delta: Option<f64>,
    /// Also report the largest delta whose variance stays within this budget
    #[arg(long)]
    pub budget: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Name of the response column
    #[arg(long)]
    pub response: Option<String>,
    /// Group as 1-based predictor positions or column names; repeatable
    #[arg(long)]
    pub group: Vec<String>,
    /// Predictor whose sign is fixed in the arrangement
    #[arg(long)]
    pub anchor: Option<String>,
    /// Form groups from predictors whose |correlation| exceeds --threshold
    #[arg(long)]
    pub detect_groups: bool,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Reference case 1..5
    #[arg(long, conflicts_with = "suite")]
    pub case: Option<u8>,
    /// Run all five reference cases and the claim checks
    #[arg(long = "paper-suite")]
    pub suite: bool,
    #[arg(long)]
    pub w1: Option<f64>,
    #[arg(long)]
    pub w2: Option<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Number of observations
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sigma2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectKind {
    MinRss,
    Kfold,
}

#[derive(Debug, Args)]
pub struct ClrArgs {
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub response: Option<String>,
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long)]
    pub anchor: Option<String>,
    /// Squared radius above the minimum squared norm
    #[arg(long)]
    pub c_offset: Option<f64>,
    /// Additional offsets to score; comma-separated
    #[arg(long, value_delimiter = ',')]
    pub offset_grid: Vec<f64>,
    #[arg(long, value_enum)]
    pub select: Option<SelectKind>,
    #[arg(long)]
    pub folds: Option<usize>,
}

/// Contents of a `--config` file. Keys match the long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub p: Option<usize>,
    pub r: Option<f64>,
    pub r_list: Option<Vec<f64>>,
    pub sigma2: Option<f64>,
    pub delta: Option<f64>,
    pub budget: Option<f64>,
    pub csv: Option<PathBuf>,
    pub response: Option<String>,
    pub group: Option<Vec<String>>,
    pub anchor: Option<String>,
    pub detect_groups: Option<bool>,
    pub threshold: Option<f64>,
    pub case: Option<u8>,
    #[serde(rename = "paper-suite")]
    pub suite: Option<bool>,
    pub w1: Option<f64>,
    pub w2: Option<f64>,
    pub replicates: Option<usize>,
    pub n: Option<usize>,
    pub c_offset: Option<f64>,
    pub offset_grid: Option<Vec<f64>>,
    pub select: Option<SelectKind>,
    pub folds: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::usage("--config", e.message().to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
    /// Worker cap from the environment; `None` leaves the default.
    pub threads: Option<usize>,
    pub command: CommandConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandConfig {
    Uniform(UniformConfig),
    Analyze(AnalyzeConfig),
    Simulate(SimulateConfig),
    Clr(ClrRunConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformConfig {
    pub p: usize,
    pub r_list: Vec<f64>,
    pub sigma2: f64,
    pub delta: Option<f64>,
    pub budget: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupSource {
    Listed(Vec<Vec<ColumnRef>>),
    Detect { threshold: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeConfig {
    pub csv: PathBuf,
    pub response: String,
    pub groups: GroupSource,
    pub anchor: Option<ColumnRef>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimulateConfig {
    Suite { replicates: Option<usize> },
    Case { name: String, config: SimCaseConfig },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClrRunConfig {
    pub csv: PathBuf,
    pub response: String,
    pub group: Vec<ColumnRef>,
    pub anchor: Option<ColumnRef>,
    pub c_offset: f64,
    pub offset_grid: Vec<f64>,
    pub select: SelectKind,
    pub folds: usize,
}

pub const DEFAULT_C_OFFSET: f64 = 3.0;
pub const DEFAULT_FOLDS: usize = 5;

fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::usage(flag, "is required (as a flag or in --config)"))
}

fn column_ref(s: String) -> ColumnRef {
    match s.trim().parse::<usize>() {
        Ok(k) => ColumnRef::Position(k),
        Err(_) => ColumnRef::Name(s.trim().to_string()),
    }
}

fn finite(value: f64, flag: &str) -> CliResult<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::usage(flag, format!("must be a finite number, got {value}")))
    }
}

/// Parses an argument vector (program name first). Clap errors become usage
/// errors; `--help` and `--version` come back as the clap error itself.
pub fn parse_args<I, T>(argv: I, threads_env: Option<&str>) -> Result<RunConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(ParseOutcome::Clap)?;
    let file = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(ParseOutcome::Usage)?,
        None => FileConfig::default(),
    };
    resolve(cli, file, threads_env).map_err(ParseOutcome::Usage)
}

#[derive(Debug)]
pub enum ParseOutcome {
    Clap(clap::Error),
    Usage(CliError),
}

pub fn parse_threads(value: Option<&str>) -> CliResult<Option<usize>> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(CliError::usage(THREADS_ENV, format!("must be a positive integer, got {v:?}"))),
        },
    }
}

pub fn resolve(cli: Cli, file: FileConfig, threads_env: Option<&str>) -> CliResult<RunConfig> {
    let format = cli.format.or(file.format).unwrap_or_default();
    let out = cli.out.or(file.out.clone());
    let seed = cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let threads = parse_threads(threads_env)?;
    let command = match cli.command {
        Command::Uniform(a) => CommandConfig::Uniform(resolve_uniform(a, &file)?),
        Command::Analyze(a) => CommandConfig::Analyze(resolve_analyze(a, &file)?),
        Command::Simulate(a) => CommandConfig::Simulate(resolve_simulate(a, &file, seed)?),
        Command::Clr(a) => CommandConfig::Clr(resolve_clr(a, &file)?),
    };
    Ok(RunConfig {
        format,
        out,
        seed,
        threads,
        command,
    })
}

fn resolve_uniform(a: UniformArgs, file: &FileConfig) -> CliResult<UniformConfig> {
    let p = required(a.p.or(file.p), "--p")?;
    if p == 0 {
        return Err(CliError::usage("--p", "must be at least 1"));
    }
    let r_list = if !a.r_list.is_empty() {
        a.r_list
    } else if let Some(r) = a.r {
        vec![r]
    } else if let Some(list) = file.r_list.clone() {
        list
    } else if let Some(r) = file.r {
        vec![r]
    } else {
        TABLE1_R_VALUES.to_vec()
    };
    for &r in &r_list {
        if !(0.0..1.0).contains(&r) {
            return Err(CliError::usage("--r-list", format!("correlations must lie in [0, 1), got {r}")));
        }
    }
    let sigma2 = finite(a.sigma2.or(file.sigma2).unwrap_or(1.0), "--sigma2")?;
    if sigma2 <= 0.0 {
        return Err(CliError::usage("--sigma2", "must be positive"));
    }
    let delta = a.delta.or(file.delta).map(|d| finite(d, "--delta")).transpose()?;
    if delta.is_some_and(|d| d < 0.0) {
        return Err(CliError::usage("--delta", "must be non-negative"));
    }
    let budget = a.budget.or(file.budget).map(|b| finite(b, "--budget")).transpose()?;
    Ok(UniformConfig {
        p,
        r_list,
        sigma2,
        delta,
        budget,
    })
}

fn resolve_analyze(a: AnalyzeArgs, file: &FileConfig) -> CliResult<AnalyzeConfig> {
    let csv = required(a.csv.or(file.csv.clone()), "--csv")?;
    let response = required(a.response.or(file.response.clone()), "--response")?;
    let group_specs = if a.group.is_empty() {
        file.group.clone().unwrap_or_default()
    } else {
        a.group
    };
    let detect = a.detect_groups || file.detect_groups.unwrap_or(false);
    let groups = match (detect, group_specs.is_empty()) {
        (true, false) => {
            return Err(CliError::usage("--detect-groups", "cannot be combined with --group"));
        }
        (true, true) => {
            let threshold = finite(
                a.threshold.or(file.threshold).unwrap_or(groupfx_core::apc::APC_THRESHOLD),
                "--threshold",
            )?;
            if !(0.0..1.0).contains(&threshold) {
                return Err(CliError::usage("--threshold", "must lie in [0, 1)"));
            }
            GroupSource::Detect { threshold }
        }
        (false, true) => return Err(CliError::usage("--group", "is required unless --detect-groups is set")),
        (false, false) => GroupSource::Listed(group_specs.iter().map(|s| parse_group(s)).collect()),
    };
    Ok(AnalyzeConfig {
        csv,
        response,
        groups,
        anchor: a.anchor.or(file.anchor.clone()).map(column_ref),
    })
}

fn resolve_simulate(a: SimulateArgs, file: &FileConfig, seed: u64) -> CliResult<SimulateConfig> {
    let suite = a.suite || (a.case.is_none() && file.suite.unwrap_or(false));
    let replicates = a.replicates.or(file.replicates);
    if replicates == Some(0) {
        return Err(CliError::usage("--replicates", "must be at least 1"));
    }
    let w1 = a.w1.or(file.w1);
    let w2 = a.w2.or(file.w2);
    let n = a.n.or(file.n);
    let sigma2 = a.sigma2.or(file.sigma2);
    if suite {
        for (flag, given) in [
            ("--w1", w1.is_some()),
            ("--w2", w2.is_some()),
            ("--n", n.is_some()),
            ("--sigma2", sigma2.is_some()),
        ] {
            if given {
                return Err(CliError::usage(flag, "cannot be combined with --paper-suite"));
            }
        }
        return Ok(SimulateConfig::Suite { replicates });
    }
    let case = a.case.or(file.case);
    let (name, mut config) = match case {
        Some(k) => {
            let cfg = SimCaseConfig::reference_case(k, seed)
                .map_err(|_| CliError::usage("--case", format!("must be 1..5, got {k}")))?;
            (format!("case{k}"), cfg)
        }
        None => {
            if w1.is_none() || w2.is_none() {
                return Err(CliError::usage(
                    "--case",
                    "one of --case, --paper-suite, or both --w1 and --w2 is required",
                ));
            }
            (
                "custom".to_string(),
                SimCaseConfig {
                    seed,
                    ..SimCaseConfig::default()
                },
            )
        }
    };
    if let Some(w) = w1 {
        config.w1 = w;
    }
    if let Some(w) = w2 {
        config.w2 = w;
    }
    if let Some(r) = replicates {
        config.replicates = r;
    }
    if let Some(n) = n {
        config.n = n;
    }
    if let Some(s) = sigma2 {
        config.sigma2 = s;
    }
    config.validate().map_err(|e| {
        let flag = if !(0.0..=1.0).contains(&config.w1) {
            "--w1"
        } else if !(0.0..=1.0).contains(&config.w2) {
            "--w2"
        } else if !(config.sigma2.is_finite() && config.sigma2 >= 0.0) {
            "--sigma2"
        } else {
            "--replicates"
        };
        CliError::usage(flag, e.to_string())
    })?;
    Ok(SimulateConfig::Case { name, config })
}

fn resolve_clr(a: ClrArgs, file: &FileConfig) -> CliResult<ClrRunConfig> {
    let csv = required(a.csv.or(file.csv.clone()), "--csv")?;
    let response = required(a.response.or(file.response.clone()), "--response")?;
    let group = match a.group {
        Some(g) => g,
        None => match file.group.as_deref() {
            Some([g]) => g.clone(),
            Some([]) | None => return Err(CliError::usage("--group", "is required (as a flag or in --config)")),
            Some(_) => return Err(CliError::usage("--group", "clr takes exactly one group")),
        },
    };
    let c_offset = finite(a.c_offset.or(file.c_offset).unwrap_or(DEFAULT_C_OFFSET), "--c-offset")?;
    if c_offset < 0.0 {
        return Err(CliError::usage("--c-offset", "must be non-negative"));
    }
    let offset_grid = if a.offset_grid.is_empty() {
        file.offset_grid.clone().unwrap_or_default()
    } else {
        a.offset_grid
    };
    if offset_grid.iter().any(|o| !(o.is_finite() && *o >= 0.0)) {
        return Err(CliError::usage("--offset-grid", "offsets must be non-negative numbers"));
    }
    let folds = a.folds.or(file.folds).unwrap_or(DEFAULT_FOLDS);
    if folds < 2 {
        return Err(CliError::usage("--folds", "must be at least 2"));
    }
    Ok(ClrRunConfig {
        csv,
        response,
        group: parse_group(&group),
        anchor: a.anchor.or(file.anchor.clone()).map(column_ref),
        c_offset,
        offset_grid,
        select: a.select.or(file.select).unwrap_or(SelectKind::MinRss),
        folds,
    })
}
