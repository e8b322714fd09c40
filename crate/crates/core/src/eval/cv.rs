//! Cross-validated experiment grid.
//!
//! A grid cell is `(dataset, model kind, missing rate)`. For every fold the network of the
//! kind's family is trained with denoising corruption on the remaining folds, the held-out
//! fold is masked at the same rate and imputed, and RMSE on the masked cells plus Δacc are
//! recorded. Deterministic and MC-dropout kinds of one family share the trained network and
//! the held-out mask.
//!
//! All randomness is drawn from child streams of the master seed keyed by the job, so results
//! do not depend on execution order or thread count.

use rayon::prelude::*;

use crate::dataio::{kfold, mask_mcar, Dataset};
use crate::error::{Error, Result};
use crate::eval::classifier::delta_acc;
use crate::eval::metrics::{mean_and_sample_std, rmse_all_cells, rmse_masked};
use crate::imputer::{impute_dataset, ImputeConfig, ImputeMode, DEFAULT_MC_SAMPLES};
use crate::models::{train_denoising, Family, Model, ModelKind, TrainConfig, DEFAULT_DROPOUT};
use crate::rng::RngStream;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub models: Vec<ModelKind>,
    pub missing_rates: Vec<f64>,
    pub folds: usize,
    /// Training hyperparameters; the corruption rate is replaced by each grid rate.
    pub train: TrainConfig,
    pub dropout_p: f64,
    pub kl_weight: f64,
    pub mc_samples: usize,
    pub seed: u64,
    /// Worker threads for grid jobs.
    pub jobs: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            models: ModelKind::ALL.to_vec(),
            missing_rates: vec![0.1, 0.3, 0.5],
            folds: 5,
            train: TrainConfig::default(),
            dropout_p: DEFAULT_DROPOUT,
            kl_weight: 1.0,
            mc_samples: DEFAULT_MC_SAMPLES,
            seed: 0,
            jobs: 1,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::invalid("no model kinds selected"));
        }
        if self.missing_rates.is_empty() {
            return Err(Error::invalid("no missing rates selected"));
        }
        for &r in &self.missing_rates {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::invalid(format!(
                    "missing_rate {r} outside (0,1); RMSE is undefined on an empty mask"
                )));
            }
        }
        if self.folds < 2 {
            return Err(Error::invalid("folds must be at least 2"));
        }
        if self.mc_samples < 1 {
            return Err(Error::invalid("mc_samples must be at least 1"));
        }
        if self.jobs < 1 {
            return Err(Error::invalid("jobs must be at least 1"));
        }
        Ok(())
    }
}

/// A dataset with the name used in report keys and column headers.
#[derive(Debug, Clone)]
pub struct NamedDataset<T = f64> {
    pub name: String,
    pub data: Dataset<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    Failed(String),
}

/// One `(dataset, model, rate)` grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub dataset: String,
    pub model: ModelKind,
    pub rate: f64,
    pub fold_rmse: Vec<f64>,
    /// Whole-matrix RMSE per fold, observed cells included.
    pub fold_rmse_all: Vec<f64>,
    pub fold_delta_acc: Vec<f64>,
    pub rmse_mean: Option<f64>,
    pub rmse_std: Option<f64>,
    pub rmse_all_mean: Option<f64>,
    pub delta_acc: Option<f64>,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub datasets: Vec<String>,
    pub models: Vec<ModelKind>,
    pub rates: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub mc_samples: usize,
    pub epochs: usize,
    pub cells: Vec<CellReport>,
}

impl EvalReport {
    pub fn cell(&self, dataset: &str, model: ModelKind, rate: f64) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.dataset == dataset && c.model == model && c.rate == rate)
    }
}

/// Per-fold outcome for each kind served by one trained network.
type JobOutcome = std::result::Result<Vec<(ModelKind, f64, f64, f64)>, String>;

struct Job {
    dataset: usize,
    rate: usize,
    fold: usize,
    family: Family,
    kinds: Vec<ModelKind>,
}

fn rate_key(rate: f64) -> String {
    format!("{rate}")
}

fn run_job<T: Scalar>(
    job: &Job,
    ds: &NamedDataset<T>,
    rate: f64,
    train_idx: &[usize],
    held_idx: &[usize],
    cfg: &CvConfig,
    master: &RngStream,
) -> Result<JobOutcome> {
    let key = format!("{}/{}/{}", ds.name, rate_key(rate), job.fold);
    let fam_key = format!("{}/{key}", job.family.id());
    let train_set = ds.data.subset(train_idx);
    let held = ds.data.subset(held_idx);

    let init_seed = master.child(&format!("init/{fam_key}")).next_u64();
    let mut model: Model<T> = Model::build(
        job.family,
        ds.data.d(),
        cfg.dropout_p,
        cfg.kl_weight,
        init_seed,
    )?;
    let tc = TrainConfig {
        corruption_rate: rate,
        ..cfg.train
    };
    let mut train_rng = master.child(&format!("train/{fam_key}"));
    match train_denoising(&mut model, &train_set, &tc, &mut train_rng) {
        Ok(_) => {}
        Err(e) if e.is_divergence() => return Ok(Err(e.to_string())),
        Err(e) => return Err(e),
    }

    let masked = mask_mcar(&held, rate, &mut master.child(&format!("mask/{key}")))?;
    let icfg = ImputeConfig {
        mode: ImputeMode::Mcd,
        samples: cfg.mc_samples,
        latent_noise: true,
    };
    let mut out = Vec::with_capacity(job.kinds.len());
    for &kind in &job.kinds {
        let irng = master.child(&format!("impute/{}/{key}", kind.id()));
        let (imputed, result) = impute_dataset(kind, &model, &masked, &icfg, &irng)?;
        let rmse = rmse_masked(&result.imputed, &held.values, &masked.mask)?;
        let rmse_all = rmse_all_cells(&result.imputed, &held.values)?;
        // Held-out original vs imputed data train the two classifiers; the fold's training
        // portion is the common evaluation set.
        let dacc = delta_acc(&held, &imputed, &train_set, cfg.seed)?;
        out.push((kind, rmse, rmse_all, dacc));
    }
    Ok(Ok(out))
}

/// Runs the full `datasets × models × rates × folds` grid.
pub fn run_cv<T: Scalar>(datasets: &[NamedDataset<T>], cfg: &CvConfig) -> Result<EvalReport> {
    cfg.validate()?;
    if datasets.is_empty() {
        return Err(Error::invalid("no datasets"));
    }
    let master = RngStream::new(cfg.seed);
    let mut splits = Vec::with_capacity(datasets.len());
    for ds in datasets {
        let folds = kfold(
            ds.data.n(),
            cfg.folds,
            &mut master.child(&format!("folds/{}", ds.name)),
        )?;
        splits.push((0..cfg.folds).map(|f| folds.indices(f)).collect::<Vec<_>>());
    }

    let mut families: Vec<Family> = cfg.models.iter().map(|k| k.family()).collect();
    families.sort();
    families.dedup();
    let mut jobs = Vec::new();
    for dataset in 0..datasets.len() {
        for rate in 0..cfg.missing_rates.len() {
            for fold in 0..cfg.folds {
                for &family in &families {
                    jobs.push(Job {
                        dataset,
                        rate,
                        fold,
                        family,
                        kinds: cfg
                            .models
                            .iter()
                            .copied()
                            .filter(|k| k.family() == family)
                            .collect(),
                    });
                }
            }
        }
    }

    let execute = |job: &Job| {
        let (train_idx, held_idx) = &splits[job.dataset][job.fold];
        run_job(
            job,
            &datasets[job.dataset],
            cfg.missing_rates[job.rate],
            train_idx,
            held_idx,
            cfg,
            &master,
        )
    };
    let outcomes: Vec<Result<JobOutcome>> = if cfg.jobs == 1 {
        jobs.iter().map(execute).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(execute).collect())
    };
    let outcomes: Vec<JobOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for (di, ds) in datasets.iter().enumerate() {
        for (ri, &rate) in cfg.missing_rates.iter().enumerate() {
            for &kind in &cfg.models {
                let mut fold_rmse = Vec::with_capacity(cfg.folds);
                let mut fold_all = Vec::with_capacity(cfg.folds);
                let mut fold_dacc = Vec::with_capacity(cfg.folds);
                let mut failure = None;
                for (job, outcome) in jobs.iter().zip(&outcomes) {
                    if job.dataset != di || job.rate != ri || job.family != kind.family() {
                        continue;
                    }
                    match outcome {
                        Err(msg) => {
                            failure.get_or_insert_with(|| format!("fold {}: {msg}", job.fold));
                        }
                        Ok(values) => {
                            let &(_, rmse, all, dacc) =
                                values.iter().find(|v| v.0 == kind).expect("kind in job");
                            fold_rmse.push(rmse);
                            fold_all.push(all);
                            fold_dacc.push(dacc);
                        }
                    }
                }
                let cell = match failure {
                    Some(msg) => CellReport {
                        dataset: ds.name.clone(),
                        model: kind,
                        rate,
                        fold_rmse,
                        fold_rmse_all: fold_all,
                        fold_delta_acc: fold_dacc,
                        rmse_mean: None,
                        rmse_std: None,
                        rmse_all_mean: None,
                        delta_acc: None,
                        status: CellStatus::Failed(msg),
                    },
                    None => {
                        let (mean, std) = mean_and_sample_std(&fold_rmse);
                        let (all, _) = mean_and_sample_std(&fold_all);
                        let (dacc, _) = mean_and_sample_std(&fold_dacc);
                        CellReport {
                            dataset: ds.name.clone(),
                            model: kind,
                            rate,
                            fold_rmse,
                            fold_rmse_all: fold_all,
                            fold_delta_acc: fold_dacc,
                            rmse_mean: Some(mean),
                            rmse_std: Some(std),
                            rmse_all_mean: Some(all),
                            delta_acc: Some(dacc),
                            status: CellStatus::Ok,
                        }
                    }
                };
                cells.push(cell);
            }
        }
    }
    Ok(EvalReport {
        datasets: datasets.iter().map(|d| d.name.clone()).collect(),
        models: cfg.models.clone(),
        rates: cfg.missing_rates.clone(),
        folds: cfg.folds,
        seed: cfg.seed,
        mc_samples: cfg.mc_samples,
        epochs: cfg.train.epochs,
        cells,
    })
}
