//! Deterministic and Monte-Carlo-dropout imputation.
//!
//! In MC mode the encoder runs once with dropout off; the decoder then runs `T` times with its
//! dropout active, each pass on its own child stream derived from `(seed, pass index)`. Missing
//! cells receive the mean of their `T` samples and the sample spread is reported per cell.
//! Observed cells are always copied through untouched.

use rayon::prelude::*;

use crate::dataio::{Dataset, Mask, MaskedDataset};
use crate::error::{Error, Result};
use crate::models::{Model, ModelKind};
use crate::nn::Matrix;
use crate::rng::RngStream;
use crate::Scalar;

pub const DEFAULT_MC_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImputeMode {
    Deterministic,
    Mcd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImputeConfig {
    pub mode: ImputeMode,
    /// Number of stochastic decoder passes in MC mode.
    pub samples: usize,
    /// Draw fresh latent noise per pass for VAE models. When false the latent code is the
    /// posterior mean.
    pub latent_noise: bool,
}

impl Default for ImputeConfig {
    fn default() -> Self {
        Self {
            mode: ImputeMode::Mcd,
            samples: DEFAULT_MC_SAMPLES,
            latent_noise: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImputationResult<T = f64> {
    /// Completed matrix: observed cells copied, missing cells filled.
    pub imputed: Matrix<T>,
    /// `T × M` decoder outputs for the `M` missing cells in row-major mask order (MC mode).
    pub samples: Option<Matrix<T>>,
    /// Population standard deviation of each missing cell's samples (MC mode).
    pub cell_std: Option<Vec<T>>,
    pub mask: Mask,
}

impl<T: Scalar> ImputationResult<T> {
    /// `(row, col, std)` for every missing cell, when available.
    pub fn std_entries(&self) -> Vec<(usize, usize, T)> {
        match &self.cell_std {
            Some(std) => self
                .mask
                .positions()
                .zip(std)
                .map(|((i, j), &s)| (i, j, s))
                .collect(),
            None => Vec::new(),
        }
    }
}

fn check_width<T: Scalar>(model: &Model<T>, md: &MaskedDataset<T>) -> Result<()> {
    if model.d() != md.d() {
        return Err(Error::SchemaMismatch(format!(
            "model expects {} attributes, input has {}",
            model.d(),
            md.d()
        )));
    }
    Ok(())
}

fn fill_missing<T: Scalar>(
    md: &MaskedDataset<T>,
    mut values: impl FnMut(usize, usize) -> T,
) -> Matrix<T> {
    let mut out = md.base.values.clone();
    for (i, j) in md.mask.positions() {
        out[(i, j)] = values(i, j);
    }
    out
}

/// Rows that contain at least one missing cell.
fn rows_with_missing(mask: &Mask) -> Vec<usize> {
    (0..mask.rows())
        .filter(|&i| (0..mask.cols()).any(|j| mask.get(i, j)))
        .collect()
}

/// Single dropout-free pass; VAE models decode their posterior mean.
pub fn impute_deterministic<T: Scalar>(
    model: &Model<T>,
    md: &MaskedDataset<T>,
) -> Result<ImputationResult<T>> {
    check_width(model, md)?;
    let rows = rows_with_missing(&md.mask);
    let x = md.sentinel_view.select_rows(&rows);
    let recon = match model {
        Model::Ae(m) => m.decoder.predict(&m.encoder.predict(&x)?)?,
        Model::Vae(m) => m.decoder.predict(&m.encode(&x)?.mu)?,
    };
    let mut local = vec![usize::MAX; md.n()];
    for (k, &i) in rows.iter().enumerate() {
        local[i] = k;
    }
    Ok(ImputationResult {
        imputed: fill_missing(md, |i, j| recon[(local[i], j)]),
        samples: None,
        cell_std: None,
        mask: md.mask.clone(),
    })
}

/// Mean and population standard deviation, shifted by the first sample so identical samples
/// reproduce their value exactly.
fn mean_std<T: Scalar>(column: impl Iterator<Item = T> + Clone, count: usize) -> (T, T) {
    let mut it = column.clone();
    let first = it.next().expect("at least one sample");
    let n = T::lit(count as f64);
    let shift: T = column.clone().map(|s| s - first).sum::<T>() / n;
    let mean = first + shift;
    if count == 1 {
        return (mean, T::zero());
    }
    let var = column.map(|s| (s - mean) * (s - mean)).sum::<T>() / n;
    (mean, var.sqrt())
}

/// Monte-Carlo-dropout multiple imputation with `cfg.samples` decoder passes.
pub fn impute_mcd<T: Scalar>(
    model: &Model<T>,
    md: &MaskedDataset<T>,
    cfg: &ImputeConfig,
    rng: &RngStream,
) -> Result<ImputationResult<T>> {
    check_width(model, md)?;
    if cfg.samples < 1 {
        return Err(Error::invalid("MC sample count must be at least 1"));
    }
    let rows = rows_with_missing(&md.mask);
    let x = md.sentinel_view.select_rows(&rows);
    let mut local = vec![usize::MAX; md.n()];
    for (k, &i) in rows.iter().enumerate() {
        local[i] = k;
    }
    let positions: Vec<(usize, usize)> = md.mask.positions().collect();
    let cells = positions.len();

    enum Code<T> {
        Point(Matrix<T>),
        Gaussian(Matrix<T>, Matrix<T>),
    }
    let (code, decoder) = match model {
        Model::Ae(m) => (Code::Point(m.encoder.predict(&x)?), &m.decoder),
        Model::Vae(m) => {
            let enc = m.encode(&x)?;
            (Code::Gaussian(enc.mu, enc.logvar), &m.decoder)
        }
    };
    let half = T::lit(0.5);

    let passes: Vec<Vec<T>> = (0..cfg.samples)
        .into_par_iter()
        .map(|t| -> Result<Vec<T>> {
            let mut r = rng.child_indexed("mc-pass", t as u64);
            let z = match &code {
                Code::Point(z) => z.clone(),
                Code::Gaussian(mu, logvar) => {
                    let mut z = mu.clone();
                    if cfg.latent_noise {
                        for (zi, &lv) in z.as_mut_slice().iter_mut().zip(logvar.as_slice()) {
                            let eps: T = r.standard_normal();
                            *zi += (lv * half).exp() * eps;
                        }
                    }
                    z
                }
            };
            let out = decoder.forward_train(&z, |_| true, &mut r)?.into_output();
            Ok(positions.iter().map(|&(i, j)| out[(local[i], j)]).collect())
        })
        .collect::<Result<_>>()?;

    let samples = Matrix::from_vec(cfg.samples, cells, passes.into_iter().flatten().collect())?;
    let mut means = Vec::with_capacity(cells);
    let mut stds = Vec::with_capacity(cells);
    for c in 0..cells {
        let column = (0..cfg.samples).map(|t| samples[(t, c)]);
        let (m, s) = mean_std(column, cfg.samples);
        means.push(m);
        stds.push(s);
    }
    let mut imputed = md.base.values.clone();
    for (&(i, j), &m) in positions.iter().zip(&means) {
        imputed[(i, j)] = m;
    }
    Ok(ImputationResult {
        imputed,
        samples: Some(samples),
        cell_std: Some(stds),
        mask: md.mask.clone(),
    })
}

/// Imputes `md` with the variant `kind`, returning a complete dataset with the original labels
/// and normalisation parameters.
pub fn impute_dataset<T: Scalar>(
    kind: ModelKind,
    model: &Model<T>,
    md: &MaskedDataset<T>,
    cfg: &ImputeConfig,
    rng: &RngStream,
) -> Result<(Dataset<T>, ImputationResult<T>)> {
    if kind.family() != model.family() {
        return Err(Error::SchemaMismatch(format!(
            "{kind} requested for a {} network",
            model.family().id()
        )));
    }
    let result = if kind.is_mcd() {
        impute_mcd(
            model,
            md,
            &ImputeConfig {
                mode: ImputeMode::Mcd,
                ..*cfg
            },
            rng,
        )?
    } else {
        impute_deterministic(model, md)?
    };
    Ok((md.base.with_values(result.imputed.clone())?, result))
}
