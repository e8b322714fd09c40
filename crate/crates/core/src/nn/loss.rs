use crate::error::{Error, Result};
use crate::nn::matrix::Matrix;
use crate::Scalar;

/// Mean over all entries of `(pred − target)²`.
pub fn mse_loss<T: Scalar>(pred: &Matrix<T>, target: &Matrix<T>) -> Result<T> {
    if pred.shape() != target.shape() {
        return Err(Error::shape(format!(
            "mse of {:?} against {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    if pred.as_slice().is_empty() {
        return Ok(T::zero());
    }
    let sum: T = pred
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(&p, &t)| (p - t) * (p - t))
        .sum();
    Ok(sum / T::lit(pred.as_slice().len() as f64))
}

/// Gradient of [`mse_loss`] w.r.t. `pred`.
pub fn mse_grad<T: Scalar>(pred: &Matrix<T>, target: &Matrix<T>) -> Result<Matrix<T>> {
    if pred.shape() != target.shape() {
        return Err(Error::shape("mse gradient shape mismatch"));
    }
    let scale = T::lit(2.0 / pred.as_slice().len().max(1) as f64);
    let data = pred
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(&p, &t)| scale * (p - t))
        .collect();
    Matrix::from_vec(pred.rows(), pred.cols(), data)
}
