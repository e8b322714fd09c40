//! The AE and VAE imputation models and their denoising training.

pub mod ae;
pub mod persist;
pub mod vae;
pub mod vae_math;

use std::fmt;
use std::str::FromStr;

pub use ae::{build_ae, AeModel};
pub use persist::{load_model, save_model, ModelFile, MODEL_FORMAT_VERSION};
pub use vae::{build_vae, mean_kl, LatentGaussian, VaeModel};
pub use vae_math::{kl_gauss, reparameterize, vae_loss};

use crate::dataio::{mcar_mask, Dataset, SENTINEL};
use crate::error::{Error, Result};
use crate::nn::{train, AdamConfig, FitConfig, Matrix};
use crate::rng::RngStream;
use crate::Scalar;

pub const HIDDEN_WIDTH: usize = 80;
pub const LATENT_WIDTH: usize = 20;
pub const DEFAULT_DROPOUT: f64 = 0.2;
pub const DEFAULT_EPOCHS: usize = 300;

/// Network family; each trained network serves a deterministic and an MC-dropout kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Ae,
    Vae,
}

impl Family {
    pub fn id(self) -> &'static str {
        match self {
            Family::Ae => "ae",
            Family::Vae => "vae",
        }
    }
}

/// The four imputation variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    Ae,
    Vae,
    McdAe,
    McdVae,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Ae,
        ModelKind::Vae,
        ModelKind::McdAe,
        ModelKind::McdVae,
    ];

    pub fn family(self) -> Family {
        match self {
            ModelKind::Ae | ModelKind::McdAe => Family::Ae,
            ModelKind::Vae | ModelKind::McdVae => Family::Vae,
        }
    }

    pub fn is_mcd(self) -> bool {
        matches!(self, ModelKind::McdAe | ModelKind::McdVae)
    }

    pub fn id(self) -> &'static str {
        match self {
            ModelKind::Ae => "ae",
            ModelKind::Vae => "vae",
            ModelKind::McdAe => "mcd-ae",
            ModelKind::McdVae => "mcd-vae",
        }
    }

    /// Label used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Ae => "AE",
            ModelKind::Vae => "VAE",
            ModelKind::McdAe => "MCD-AE",
            ModelKind::McdVae => "MCD-VAE",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ae" => Ok(ModelKind::Ae),
            "vae" => Ok(ModelKind::Vae),
            "mcd-ae" => Ok(ModelKind::McdAe),
            "mcd-vae" => Ok(ModelKind::McdVae),
            other => Err(Error::invalid(format!("unknown model kind {other:?}"))),
        }
    }
}

/// A trained (or freshly initialised) network of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum Model<T = f64> {
    Ae(AeModel<T>),
    Vae(VaeModel<T>),
}

impl<T: Scalar> Model<T> {
    pub fn build(
        family: Family,
        d: usize,
        dropout_p: f64,
        kl_weight: f64,
        seed: u64,
    ) -> Result<Self> {
        Ok(match family {
            Family::Ae => Model::Ae(build_ae(d, dropout_p, seed)?),
            Family::Vae => Model::Vae(build_vae(d, dropout_p, kl_weight, seed)?),
        })
    }

    pub fn family(&self) -> Family {
        match self {
            Model::Ae(_) => Family::Ae,
            Model::Vae(_) => Family::Vae,
        }
    }

    pub fn d(&self) -> usize {
        match self {
            Model::Ae(m) => m.d(),
            Model::Vae(m) => m.d(),
        }
    }

    pub fn dropout_p(&self) -> f64 {
        match self {
            Model::Ae(m) => m.dropout_p,
            Model::Vae(m) => m.dropout_p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub corruption_rate: f64,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: DEFAULT_EPOCHS,
            batch_size: 32,
            corruption_rate: 0.1,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.corruption_rate) {
            return Err(Error::invalid(format!(
                "corruption_rate {} outside [0,1)",
                self.corruption_rate
            )));
        }
        Ok(())
    }
}

/// Overwrites `round(rate·rows·cols)` uniformly chosen cells of `batch` with the sentinel.
pub fn corrupt_batch<T: Scalar>(
    batch: &mut Matrix<T>,
    rate: f64,
    rng: &mut RngStream,
) -> Result<usize> {
    let mask = mcar_mask(batch.rows(), batch.cols(), rate, rng)?;
    for (v, &m) in batch.as_mut_slice().iter_mut().zip(mask.as_slice()) {
        if m {
            *v = T::lit(SENTINEL);
        }
    }
    Ok(mask.count())
}

/// Denoising training: every mini-batch's inputs get a fresh MCAR corruption at
/// `cfg.corruption_rate` while targets stay clean. Returns per-epoch mean loss.
pub fn train_denoising<T: Scalar>(
    model: &mut Model<T>,
    data: &Dataset<T>,
    cfg: &TrainConfig,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if data.d() != model.d() {
        return Err(Error::SchemaMismatch(format!(
            "model width {} for {} attributes",
            model.d(),
            data.d()
        )));
    }
    let fit = FitConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        adam: cfg.adam,
    };
    let rate = cfg.corruption_rate;
    let mut hook = |batch: &mut Matrix<T>, r: &mut RngStream| {
        corrupt_batch(batch, rate, r).expect("rate validated");
    };
    let x = &data.values;
    match model {
        Model::Ae(m) => train(m, x, x, &fit, Some(&mut hook), rng),
        Model::Vae(m) => train(m, x, x, &fit, Some(&mut hook), rng),
    }
}
