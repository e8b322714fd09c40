use crate::dataio::dataset::Dataset;
use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::rng::RngStream;
use crate::Scalar;

/// Value written into masked cells; outside the unit interval used by normalised data.
pub const SENTINEL: f64 = -1.0;

/// Boolean cell mask, `true` = missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            bits: vec![false; rows * cols],
        }
    }

    pub fn from_bits(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::shape(format!(
                "{} mask bits for {rows}x{cols}",
                bits.len()
            )));
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, missing: bool) {
        self.bits[i * self.cols + j] = missing;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Row-major `(row, col)` coordinates of the masked cells.
    pub fn positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cols = self.cols;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(k, _)| (k / cols, k % cols))
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut bits = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            bits.extend_from_slice(&self.bits[i * self.cols..(i + 1) * self.cols]);
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            bits,
        }
    }
}

/// Number of cells masked at `rate` out of `cells`, rounding half up.
pub fn masked_count(rate: f64, cells: usize) -> usize {
    (rate * cells as f64 + 0.5).floor() as usize
}

fn check_rate(rate: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::invalid(format!("missing rate {rate} outside [0,1]")));
    }
    Ok(())
}

/// MCAR mask: exactly `round(rate·rows·cols)` cells, uniformly without replacement.
pub fn mcar_mask(rows: usize, cols: usize, rate: f64, rng: &mut RngStream) -> Result<Mask> {
    check_rate(rate)?;
    let cells = rows * cols;
    let mut mask = Mask::empty(rows, cols);
    for k in rng.sample_indices(cells, masked_count(rate, cells).min(cells)) {
        mask.bits[k] = true;
    }
    Ok(mask)
}

/// Copy of `values` with [`SENTINEL`] written at masked cells.
pub fn apply_sentinel<T: Scalar>(values: &Matrix<T>, mask: &Mask) -> Result<Matrix<T>> {
    if values.shape() != (mask.rows, mask.cols) {
        return Err(Error::shape("mask shape differs from values"));
    }
    let mut out = values.clone();
    for (v, &m) in out.as_mut_slice().iter_mut().zip(&mask.bits) {
        if m {
            *v = T::lit(SENTINEL);
        }
    }
    Ok(out)
}

/// A dataset with some attribute cells hidden.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedDataset<T = f64> {
    pub base: Dataset<T>,
    pub mask: Mask,
    pub sentinel_view: Matrix<T>,
    pub rate: f64,
}

impl<T: Scalar> MaskedDataset<T> {
    /// Pairs `base` with an existing mask. Cells of `base` under the mask are ignored.
    pub fn from_mask(base: Dataset<T>, mask: Mask) -> Result<Self> {
        let sentinel_view = apply_sentinel(&base.values, &mask)?;
        let cells = (mask.rows * mask.cols).max(1);
        let rate = mask.count() as f64 / cells as f64;
        Ok(Self {
            base,
            mask,
            sentinel_view,
            rate,
        })
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn d(&self) -> usize {
        self.base.d()
    }
}

/// Hides `round(rate·N·d)` attribute cells chosen uniformly at random. Class labels are never
/// masked.
pub fn mask_mcar<T: Scalar>(
    ds: &Dataset<T>,
    rate: f64,
    rng: &mut RngStream,
) -> Result<MaskedDataset<T>> {
    let mask = mcar_mask(ds.n(), ds.d(), rate, rng)?;
    let sentinel_view = apply_sentinel(&ds.values, &mask)?;
    Ok(MaskedDataset {
        base: ds.clone(),
        mask,
        sentinel_view,
        rate,
    })
}
