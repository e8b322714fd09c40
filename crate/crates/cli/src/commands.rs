use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use mcdimpute::dataio::{
    complete_cases, load_csv, normalize, synth_milk, ClassColumn, Mask, MaskedDataset,
};
use mcdimpute::eval::{render_kv, render_text, run_cv, CvConfig, EvalReport, NamedDataset};
use mcdimpute::imputer::{impute_dataset, ImputeConfig, ImputeMode};
use mcdimpute::models::{
    load_model, save_model, train_denoising, ModelFile, ModelKind, TrainConfig,
};
use mcdimpute::nn::{AdamConfig, Matrix};
use mcdimpute::{Dataset, Error, Model, RngStream};

use crate::config::{BuiltinDataset, DatasetSource, ExperimentConfig};
use crate::error::{CliError, CliResult};

/// Instances in the synthetic milk-shaped dataset.
pub const SYNTH_MILK_ROWS: usize = 264;

const WISC_SCHEMA: &str = "clump_thickness,uniformity_cell_size,uniformity_cell_shape,marginal_adhesion,\
single_epithelial_cell_size,bare_nuclei,bland_chromatin,normal_nucleoli,mitoses,class (2 benign, 4 malignant; '?' marks missing)";
const PIMA_SCHEMA: &str = "pregnancies,glucose,blood_pressure,skin_thickness,insulin,bmi,diabetes_pedigree,age,class (0/1)";

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Loads, filters to complete cases and normalises one dataset.
pub fn load_dataset(src: &DatasetSource, cfg: &ExperimentConfig) -> CliResult<Dataset> {
    let (path, class) = match src {
        DatasetSource::Builtin(BuiltinDataset::SynthMilk) => {
            let seed = RngStream::new(cfg.seed).child("synth-milk").next_u64();
            return Ok(synth_milk(SYNTH_MILK_ROWS, seed)?);
        }
        DatasetSource::Builtin(b) => {
            let path = cfg.data_dir.join(format!("{}.csv", b.id()));
            if !path.exists() {
                let schema = if *b == BuiltinDataset::Wisc {
                    WISC_SCHEMA
                } else {
                    PIMA_SCHEMA
                };
                return Err(CliError::io(
                    &path,
                    std::io::Error::new(
                        std::io::ErrorKind::NotFound,
                        format!(
                            "dataset {} not found; expected a CSV with header {schema}",
                            b.id()
                        ),
                    ),
                ));
            }
            (path, ClassColumn::Name("class".into()))
        }
        DatasetSource::File(p) => (p.clone(), cfg.class_column.clone()),
    };
    let raw = load_csv(&path, &class, &cfg.missing_marker)?;
    Ok(normalize(&complete_cases(&raw)?)?)
}

fn train_config(cfg: &ExperimentConfig) -> TrainConfig {
    TrainConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        corruption_rate: cfg.missing_rates[0],
        adam: AdamConfig {
            lr: cfg.lr,
            ..AdamConfig::default()
        },
    }
}

/// Trains a network of `kind`'s family on `ds` with denoising corruption at the first
/// configured missing rate.
pub fn train_model(ds: &Dataset, kind: ModelKind, cfg: &ExperimentConfig) -> CliResult<Model> {
    let master = RngStream::new(cfg.seed);
    let init = master.child("init").next_u64();
    let mut model = Model::build(kind.family(), ds.d(), cfg.dropout_p, cfg.kl_weight, init)?;
    train_denoising(
        &mut model,
        ds,
        &train_config(cfg),
        &mut master.child("train"),
    )?;
    Ok(model)
}

fn single_family(cfg: &ExperimentConfig) -> CliResult<ModelKind> {
    let first = cfg.models[0];
    if cfg.models.iter().any(|m| m.family() != first.family()) {
        return Err(CliError::usage(
            "expected models of a single family; pass one --model",
        ));
    }
    Ok(first)
}

/// `train`: fits one model on the first dataset and writes the model file.
pub fn cmd_train(cfg: &ExperimentConfig) -> CliResult<PathBuf> {
    let kind = single_family(cfg)?;
    let src = cfg
        .datasets
        .first()
        .ok_or_else(|| CliError::usage("dataset missing: pass --dataset or --data"))?;
    let ds = load_dataset(src, cfg)?;
    let model = train_model(&ds, kind, cfg)?;
    let file = ModelFile {
        model,
        attribute_names: ds.attribute_names.clone(),
        norm: ds.norm.clone(),
        classes: ds.classes(),
    };
    let mut buf = Vec::new();
    save_model(&file, &mut buf)?;
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("model.txt"));
    write_file(&out, &buf)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImputeOutputs {
    pub csv: PathBuf,
    /// Per-cell standard deviations, written for MC-dropout kinds.
    pub std: Option<PathBuf>,
    pub missing_cells: usize,
}

/// `impute`: completes `input` with a model loaded from `model_file` or trained on the first
/// configured dataset (the input's complete rows when none is given).
pub fn cmd_impute(
    cfg: &ExperimentConfig,
    input: &Path,
    model_file: Option<&Path>,
) -> CliResult<ImputeOutputs> {
    if cfg.models.len() != 1 {
        return Err(CliError::usage("impute needs exactly one --model"));
    }
    let kind = cfg.models[0];
    let raw = load_csv(input, &cfg.class_column, &cfg.missing_marker)?;

    let file: ModelFile = match model_file {
        Some(p) => {
            let f = File::open(p).map_err(|e| CliError::io(p, e))?;
            let file: ModelFile = load_model(BufReader::new(f))?;
            if file.model.family() != kind.family() {
                return Err(Error::SchemaMismatch(format!(
                    "{kind} requested but the model file holds family {}",
                    file.model.family().id()
                ))
                .into());
            }
            file
        }
        None => {
            let ds = match cfg.datasets.first() {
                Some(src) => load_dataset(src, cfg)?,
                None => normalize(&complete_cases(&raw)?)?,
            };
            ModelFile {
                model: train_model(&ds, kind, cfg)?,
                attribute_names: ds.attribute_names.clone(),
                classes: ds.classes(),
                norm: ds.norm,
            }
        }
    };
    if file.attribute_names != raw.attribute_names {
        return Err(Error::SchemaMismatch(format!(
            "input attributes {:?} differ from model attributes {:?}",
            raw.attribute_names, file.attribute_names
        ))
        .into());
    }

    let (n, d) = (raw.n(), raw.d());
    let mut mask = Mask::empty(n, d);
    let mut values = Vec::with_capacity(n * d);
    for (i, row) in raw.rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            match cell {
                Some(v) => values.push(file.norm.scale(j, *v)),
                None => {
                    mask.set(i, j, true);
                    values.push(0.0);
                }
            }
        }
    }
    let missing = mask.count();
    let base = Dataset {
        values: Matrix::from_vec(n, d, values)?,
        class_labels: raw.class_labels.clone(),
        norm: file.norm.clone(),
        attribute_names: raw.attribute_names.clone(),
    };
    let md = MaskedDataset::from_mask(base, mask)?;
    let (imputed, std) = if missing == 0 {
        (md.base.values.clone(), None)
    } else {
        let icfg = ImputeConfig {
            mode: ImputeMode::Mcd,
            samples: cfg.mc_samples,
            latent_noise: true,
        };
        let rng = RngStream::new(cfg.seed).child("impute");
        let (_, result) = impute_dataset(kind, &file.model, &md, &icfg, &rng)?;
        let std = result.cell_std.as_ref().map(|_| result.std_entries());
        (result.imputed, std)
    };

    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("imputed.csv"));
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(raw.header_record()).map_err(Error::from)?;
        for i in 0..n {
            let cells: Vec<String> = (0..d)
                .map(|j| {
                    if md.mask.get(i, j) {
                        file.norm.unscale(j, imputed[(i, j)]).to_string()
                    } else {
                        raw.cell_text[i][j].clone()
                    }
                })
                .collect();
            w.write_record(raw.record_with(i, &cells))
                .map_err(Error::from)?;
        }
        w.flush().map_err(|e| CliError::io(&out, e))?;
    }
    write_file(&out, &buf)?;

    let std_path = match std {
        Some(entries) => {
            let path = out.with_extension("std.csv");
            let mut text = String::from("row,column,std\n");
            for (i, j, s) in entries {
                let scaled = s * (file.norm.max[j] - file.norm.min[j]);
                text.push_str(&format!("{i},{},{scaled}\n", raw.attribute_names[j]));
            }
            write_file(&path, text.as_bytes())?;
            Some(path)
        }
        None => None,
    };
    Ok(ImputeOutputs {
        csv: out,
        std: std_path,
        missing_cells: missing,
    })
}

pub fn cv_config(cfg: &ExperimentConfig) -> CvConfig {
    CvConfig {
        models: cfg.models.clone(),
        missing_rates: cfg.missing_rates.clone(),
        folds: cfg.folds,
        train: train_config(cfg),
        dropout_p: cfg.dropout_p,
        kl_weight: cfg.kl_weight,
        mc_samples: cfg.mc_samples,
        seed: cfg.seed,
        jobs: cfg.jobs,
    }
}

#[derive(Debug, Clone)]
pub struct ReproduceOutputs {
    pub report: EvalReport,
    pub text: PathBuf,
    pub kv: PathBuf,
}

/// `reproduce`: runs the cross-validated grid and writes `report.txt` and `report.kv` into the
/// output directory.
pub fn cmd_reproduce(cfg: &ExperimentConfig) -> CliResult<ReproduceOutputs> {
    if cfg.datasets.is_empty() {
        return Err(CliError::usage("dataset missing: pass --dataset or --data"));
    }
    let mut named = Vec::with_capacity(cfg.datasets.len());
    for src in &cfg.datasets {
        let name = src.name();
        if named.iter().any(|n: &NamedDataset| n.name == name) {
            return Err(CliError::invalid("dataset", format!("{name} listed twice")));
        }
        named.push(NamedDataset {
            name,
            data: load_dataset(src, cfg)?,
        });
    }
    let report = run_cv(&named, &cv_config(cfg))?;
    let pairs = cfg.pairs();
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    let text = dir.join("report.txt");
    let kv = dir.join("report.kv");
    write_file(&text, render_text(&report, &pairs).as_bytes())?;
    write_file(&kv, render_kv(&report, &pairs).as_bytes())?;
    Ok(ReproduceOutputs { report, text, kv })
}

/// Writes `bytes` to stdout, ignoring a closed pipe.
pub fn emit(bytes: &[u8]) {
    let mut out = BufWriter::new(std::io::stdout().lock());
    let _ = out.write_all(bytes).and_then(|_| out.flush());
}
