use crate::error::{Error, Result};
use crate::nn::matrix::Matrix;
use crate::rng::RngStream;
use crate::Scalar;

/// Inverted dropout.
///
/// When `training` is set and `p > 0`, each unit is kept with probability `1 − p` and kept
/// units are scaled by `1/(1 − p)`. The returned mask holds that scale (or zero) per unit and
/// is what the backward pass multiplies by. Otherwise the input is returned unchanged with an
/// all-ones mask.
pub fn dropout_apply<T: Scalar>(
    x: &Matrix<T>,
    p: f64,
    rng: &mut RngStream,
    training: bool,
) -> Result<(Matrix<T>, Matrix<T>)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::invalid(format!("dropout p {p} outside [0,1)")));
    }
    if !training || p == 0.0 {
        return Ok((x.clone(), Matrix::filled(x.rows(), x.cols(), T::one())));
    }
    let mask = dropout_mask(x.rows(), x.cols(), p, rng);
    let mut out = x.clone();
    apply_mask(&mut out, &mask);
    Ok((out, mask))
}

pub(crate) fn dropout_mask<T: Scalar>(
    rows: usize,
    cols: usize,
    p: f64,
    rng: &mut RngStream,
) -> Matrix<T> {
    let scale = T::lit(1.0 / (1.0 - p));
    let mut mask = Matrix::zeros(rows, cols);
    for m in mask.as_mut_slice() {
        if !rng.bernoulli(p) {
            *m = scale;
        }
    }
    mask
}

pub(crate) fn apply_mask<T: Scalar>(x: &mut Matrix<T>, mask: &Matrix<T>) {
    for (v, &m) in x.as_mut_slice().iter_mut().zip(mask.as_slice()) {
        *v *= m;
    }
}
