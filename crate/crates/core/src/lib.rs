//! Multiple imputation of tabular data with denoising autoencoders, variational autoencoders
//! and Monte Carlo dropout.
//!
//! The numeric core is generic over the [`Scalar`] element type (`f32` or `f64`); the aliases
//! below fix it to `f64`, which the training and evaluation paths use by default.
//!
//! ```no_run
//! use mcdimpute::dataio::{complete_cases, load_csv, mask_mcar, normalize, ClassColumn};
//! use mcdimpute::imputer::{impute_mcd, ImputeConfig};
//! use mcdimpute::models::{train_denoising, Family, Model, TrainConfig};
//! use mcdimpute::{Dataset, RngStream};
//!
//! # fn main() -> mcdimpute::Result<()> {
//! let raw = load_csv("data/wisc.csv", &ClassColumn::Name("class".into()), "?")?;
//! let ds: Dataset = normalize(&complete_cases(&raw)?)?;
//! let mut model = Model::build(Family::Vae, ds.d(), 0.2, 1.0, 42)?;
//! train_denoising(&mut model, &ds, &TrainConfig::default(), &mut RngStream::new(1))?;
//! let masked = mask_mcar(&ds, 0.3, &mut RngStream::new(2))?;
//! let result = impute_mcd(&model, &masked, &ImputeConfig::default(), &RngStream::new(3))?;
//! println!("{:?}", result.cell_std);
//! # Ok(())
//! # }
//! ```

pub mod dataio;
pub mod error;
pub mod eval;
pub mod imputer;
pub mod models;
pub mod nn;
pub mod rng;
mod scalar;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use scalar::Scalar;

pub type Matrix = nn::Matrix<f64>;
pub type Matrix32 = nn::Matrix<f32>;
pub type Dataset = dataio::Dataset<f64>;
pub type Dataset32 = dataio::Dataset<f32>;
pub type MaskedDataset = dataio::MaskedDataset<f64>;
pub type Model = models::Model<f64>;
pub type Model32 = models::Model<f32>;
pub type ImputationResult = imputer::ImputationResult<f64>;
