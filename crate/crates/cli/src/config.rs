//! Experiment configuration: flags override a `key=value` file, which overrides defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use mcdimpute::dataio::{ClassColumn, DEFAULT_MISSING_MARKER};
use mcdimpute::imputer::DEFAULT_MC_SAMPLES;
use mcdimpute::models::{ModelKind, DEFAULT_DROPOUT, DEFAULT_EPOCHS};

use crate::error::{CliError, CliResult};

/// Configuration keys in echo order. Flag `--foo-bar` maps to key `foo_bar`.
pub const KEYS: [&str; 17] = [
    "dataset",
    "data",
    "data_dir",
    "class_column",
    "missing_marker",
    "model",
    "missing_rate",
    "epochs",
    "dropout",
    "mc_samples",
    "folds",
    "batch_size",
    "lr",
    "kl_weight",
    "seed",
    "jobs",
    "out",
];

const LIST_KEYS: [&str; 4] = ["dataset", "data", "model", "missing_rate"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinDataset {
    Wisc,
    Pima,
    SynthMilk,
}

impl BuiltinDataset {
    pub fn id(self) -> &'static str {
        match self {
            BuiltinDataset::Wisc => "wisc",
            BuiltinDataset::Pima => "pima",
            BuiltinDataset::SynthMilk => "synth-milk",
        }
    }
}

impl FromStr for BuiltinDataset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wisc" => Ok(BuiltinDataset::Wisc),
            "pima" => Ok(BuiltinDataset::Pima),
            "synth-milk" => Ok(BuiltinDataset::SynthMilk),
            other => Err(format!(
                "unknown dataset {other:?} (expected wisc, pima or synth-milk)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSource {
    Builtin(BuiltinDataset),
    File(PathBuf),
}

impl DatasetSource {
    /// Name used in report keys and table columns.
    pub fn name(&self) -> String {
        match self {
            DatasetSource::Builtin(b) => b.id().to_owned(),
            DatasetSource::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
        }
    }
}

impl fmt::Display for DatasetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSource::Builtin(b) => f.write_str(b.id()),
            DatasetSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// `key=value` configuration file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV file with a header row (repeatable).
    #[arg(long)]
    pub data: Vec<String>,
    /// Built-in dataset id: wisc, pima or synth-milk (repeatable).
    #[arg(long)]
    pub dataset: Vec<String>,
    /// Directory holding wisc.csv and pima.csv.
    #[arg(long)]
    pub data_dir: Option<String>,
    /// Class column name or zero-based index for --data files.
    #[arg(long)]
    pub class_column: Option<String>,
    /// Cell text marking a missing value.
    #[arg(long)]
    pub missing_marker: Option<String>,
    /// Model kind: ae, vae, mcd-ae or mcd-vae (repeatable).
    #[arg(long)]
    pub model: Vec<String>,
    /// Fraction of cells to mask, in (0,1) (repeatable).
    #[arg(long)]
    pub missing_rate: Vec<String>,
    #[arg(long)]
    pub epochs: Option<String>,
    /// Dropout rate on hidden layers.
    #[arg(long)]
    pub dropout: Option<String>,
    /// Monte Carlo decoder passes per imputation.
    #[arg(long)]
    pub mc_samples: Option<String>,
    #[arg(long)]
    pub folds: Option<String>,
    #[arg(long)]
    pub batch_size: Option<String>,
    /// Adam learning rate.
    #[arg(long)]
    pub lr: Option<String>,
    /// KL weight of the VAE loss.
    #[arg(long)]
    pub kl_weight: Option<String>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<String>,
    /// Worker threads for grid jobs.
    #[arg(long)]
    pub jobs: Option<String>,
    /// Output path (directory for reproduce, file for train and impute).
    #[arg(long)]
    pub out: Option<String>,
}

impl ExperimentArgs {
    fn flag_values(&self) -> BTreeMap<&'static str, Vec<String>> {
        let mut m = BTreeMap::new();
        let mut list = |k: &'static str, v: &Vec<String>| {
            if !v.is_empty() {
                m.insert(k, v.clone());
            }
        };
        list("dataset", &self.dataset);
        list("data", &self.data);
        list("model", &self.model);
        list("missing_rate", &self.missing_rate);
        let single = [
            ("data_dir", &self.data_dir),
            ("class_column", &self.class_column),
            ("missing_marker", &self.missing_marker),
            ("epochs", &self.epochs),
            ("dropout", &self.dropout),
            ("mc_samples", &self.mc_samples),
            ("folds", &self.folds),
            ("batch_size", &self.batch_size),
            ("lr", &self.lr),
            ("kl_weight", &self.kl_weight),
            ("seed", &self.seed),
            ("jobs", &self.jobs),
            ("out", &self.out),
        ];
        for (k, v) in single {
            if let Some(v) = v {
                m.insert(k, vec![v.clone()]);
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSource>,
    pub data_dir: PathBuf,
    pub class_column: ClassColumn,
    pub missing_marker: String,
    pub models: Vec<ModelKind>,
    pub missing_rates: Vec<f64>,
    pub epochs: usize,
    pub dropout_p: f64,
    pub mc_samples: usize,
    pub folds: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub kl_weight: f64,
    pub seed: u64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Resolved configuration as `(key, value)` pairs in [`KEYS`] order, excluding `out`.
    /// Feeding these lines back through `--config` reproduces the configuration.
    pub fn pairs(&self) -> Vec<(String, String)> {
        let join = |v: Vec<String>| v.join(",");
        let mut out = Vec::new();
        let builtins: Vec<String> = self
            .datasets
            .iter()
            .filter_map(|d| match d {
                DatasetSource::Builtin(b) => Some(b.id().to_owned()),
                DatasetSource::File(_) => None,
            })
            .collect();
        let files: Vec<String> = self
            .datasets
            .iter()
            .filter_map(|d| match d {
                DatasetSource::File(p) => Some(p.display().to_string()),
                DatasetSource::Builtin(_) => None,
            })
            .collect();
        for key in KEYS {
            let value = match key {
                "dataset" => join(builtins.clone()),
                "data" => join(files.clone()),
                "data_dir" => self.data_dir.display().to_string(),
                "class_column" => self.class_column.to_string(),
                "missing_marker" => self.missing_marker.clone(),
                "model" => join(self.models.iter().map(|m| m.id().to_owned()).collect()),
                "missing_rate" => join(self.missing_rates.iter().map(f64::to_string).collect()),
                "epochs" => self.epochs.to_string(),
                "dropout" => self.dropout_p.to_string(),
                "mc_samples" => self.mc_samples.to_string(),
                "folds" => self.folds.to_string(),
                "batch_size" => self.batch_size.to_string(),
                "lr" => self.lr.to_string(),
                "kl_weight" => self.kl_weight.to_string(),
                "seed" => self.seed.to_string(),
                "jobs" => self.jobs.to_string(),
                _ => continue,
            };
            if value.is_empty() && LIST_KEYS.contains(&key) {
                continue;
            }
            out.push((key.to_owned(), value));
        }
        out
    }
}

/// Reads `key=value` lines. Blank lines and `#` comments are skipped; a `config.` prefix is
/// accepted and `cell.` lines are ignored, so a key=value report dump is itself a valid file.
/// List values are comma separated.
pub fn read_config_file(path: &Path) -> CliResult<BTreeMap<&'static str, Vec<String>>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<&'static str, Vec<String>>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("cell.") {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", n + 1)))?;
        let key = key.trim();
        let key = key.strip_prefix("config.").unwrap_or(key);
        let key = KEYS.iter().copied().find(|k| *k == key).ok_or_else(|| {
            CliError::usage(format!("config line {}: unknown key {key:?}", n + 1))
        })?;
        let value = value.trim();
        let values = if LIST_KEYS.contains(&key) {
            value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect()
        } else {
            vec![value.to_owned()]
        };
        map.insert(key, values);
    }
    Ok(map)
}

fn one<'a>(map: &'a BTreeMap<&str, Vec<String>>, key: &str) -> Option<&'a str> {
    map.get(key).and_then(|v| v.last()).map(String::as_str)
}

fn num<T: FromStr>(map: &BTreeMap<&str, Vec<String>>, key: &str, default: T) -> CliResult<T>
where
    T::Err: fmt::Display,
{
    match one(map, key) {
        None => Ok(default),
        Some(s) => s
            .parse()
            .map_err(|e| CliError::invalid(key, format!("{s:?}: {e}"))),
    }
}

/// Resolves flags over the optional config file over defaults and validates the result.
/// `require_dataset` makes an empty dataset list an error.
pub fn parse_config(args: &ExperimentArgs, require_dataset: bool) -> CliResult<ExperimentConfig> {
    let mut map = match &args.config {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    map.extend(args.flag_values());

    let mut datasets = Vec::new();
    for id in map.get("dataset").into_iter().flatten() {
        let b = id
            .parse()
            .map_err(|e: String| CliError::invalid("dataset", e))?;
        datasets.push(DatasetSource::Builtin(b));
    }
    for p in map.get("data").into_iter().flatten() {
        datasets.push(DatasetSource::File(PathBuf::from(p)));
    }
    if require_dataset && datasets.is_empty() {
        return Err(CliError::usage("dataset missing: pass --dataset or --data"));
    }

    let models = match map.get("model") {
        None => ModelKind::ALL.to_vec(),
        Some(v) => {
            let mut out = Vec::new();
            for s in v {
                let k: ModelKind = s
                    .parse()
                    .map_err(|e| CliError::invalid("model", format!("{e}")))?;
                if !out.contains(&k) {
                    out.push(k);
                }
            }
            out
        }
    };
    let missing_rates = match map.get("missing_rate") {
        None => vec![0.1, 0.3, 0.5],
        Some(v) => {
            let mut out = Vec::new();
            for s in v {
                let r: f64 = s
                    .parse()
                    .map_err(|e| CliError::invalid("missing_rate", format!("{s:?}: {e}")))?;
                if !(r > 0.0 && r < 1.0) {
                    return Err(CliError::invalid(
                        "missing_rate",
                        format!("{r} is outside the open interval (0,1)"),
                    ));
                }
                out.push(r);
            }
            out
        }
    };

    let cfg = ExperimentConfig {
        datasets,
        data_dir: PathBuf::from(one(&map, "data_dir").unwrap_or("data")),
        class_column: one(&map, "class_column")
            .unwrap_or("class")
            .parse()
            .unwrap_or_else(|e: std::convert::Infallible| match e {}),
        missing_marker: one(&map, "missing_marker")
            .unwrap_or(DEFAULT_MISSING_MARKER)
            .to_owned(),
        models,
        missing_rates,
        epochs: num(&map, "epochs", DEFAULT_EPOCHS)?,
        dropout_p: num(&map, "dropout", DEFAULT_DROPOUT)?,
        mc_samples: num(&map, "mc_samples", DEFAULT_MC_SAMPLES)?,
        folds: num(&map, "folds", 5)?,
        batch_size: num(&map, "batch_size", 32)?,
        lr: num(&map, "lr", 1e-3)?,
        kl_weight: num(&map, "kl_weight", 1.0)?,
        seed: num(&map, "seed", 0)?,
        jobs: num(&map, "jobs", 1)?,
        out: one(&map, "out").map(PathBuf::from),
    };
    let check = |ok: bool, key: &str, msg: &str| {
        if ok {
            Ok(())
        } else {
            Err(CliError::invalid(key, msg))
        }
    };
    check(cfg.epochs >= 1, "epochs", "must be at least 1")?;
    check(
        (0.0..1.0).contains(&cfg.dropout_p),
        "dropout",
        "must lie in [0,1)",
    )?;
    check(cfg.mc_samples >= 1, "mc_samples", "must be at least 1")?;
    check(cfg.folds >= 2, "folds", "must be at least 2")?;
    check(cfg.batch_size >= 1, "batch_size", "must be at least 1")?;
    check(cfg.lr > 0.0 && cfg.lr.is_finite(), "lr", "must be positive")?;
    check(
        cfg.kl_weight > 0.0 && cfg.kl_weight.is_finite(),
        "kl_weight",
        "must be positive",
    )?;
    check(cfg.jobs >= 1, "jobs", "must be at least 1")?;
    Ok(cfg)
}
