use crate::dataio::Mask;
use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::Scalar;

/// Root mean squared error over the masked cells only.
pub fn rmse_masked<T: Scalar>(imputed: &Matrix<T>, truth: &Matrix<T>, mask: &Mask) -> Result<f64> {
    if imputed.shape() != truth.shape() || truth.shape() != (mask.rows(), mask.cols()) {
        return Err(Error::shape("rmse: imputed, truth and mask shapes differ"));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, j) in mask.positions() {
        let r = imputed[(i, j)].as_f64() - truth[(i, j)].as_f64();
        sum += r * r;
        count += 1;
    }
    if count == 0 {
        return Err(Error::NoMaskedCells);
    }
    Ok((sum / count as f64).sqrt())
}

/// Root mean squared error over every cell of the matrix. With observed cells passed through
/// this equals `rmse_masked · sqrt(M / (N·d))`.
pub fn rmse_all_cells<T: Scalar>(imputed: &Matrix<T>, truth: &Matrix<T>) -> Result<f64> {
    if imputed.shape() != truth.shape() {
        return Err(Error::shape("rmse: imputed and truth shapes differ"));
    }
    let cells = imputed.as_slice().len();
    if cells == 0 {
        return Err(Error::shape("rmse of an empty matrix"));
    }
    let sum: f64 = imputed
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .map(|(a, b)| (a.as_f64() - b.as_f64()).powi(2))
        .sum();
    Ok((sum / cells as f64).sqrt())
}

/// Arithmetic mean and sample (n − 1) standard deviation; the deviation of a single value is 0.
pub fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask(bits: &[bool], cols: usize) -> Mask {
        Mask::from_bits(bits.len() / cols, cols, bits.to_vec()).unwrap()
    }

    #[test]
    fn zero_and_hand_computed() {
        let truth = Matrix::from_vec(1, 3, vec![0.5, 0.5, 0.5]).unwrap();
        let m = mask(&[true, false, true], 3);
        assert_eq!(rmse_masked(&truth, &truth, &m).unwrap(), 0.0);
        let imp = Matrix::from_vec(1, 3, vec![0.6, 9.0, 0.3]).unwrap();
        assert!((rmse_masked(&imp, &truth, &m).unwrap() - 0.025f64.sqrt()).abs() < 1e-12);
        assert!((0.025f64.sqrt() - 0.15811).abs() < 1e-5);
    }

    #[test]
    fn empty_mask_rejected() {
        let t = Matrix::<f64>::zeros(2, 2);
        assert!(matches!(
            rmse_masked(&t, &t, &Mask::empty(2, 2)),
            Err(Error::NoMaskedCells)
        ));
        assert!(rmse_masked(&t, &Matrix::zeros(1, 2), &Mask::empty(2, 2)).is_err());
    }

    #[test]
    fn whole_matrix_dilutes_masked_error() {
        let truth = Matrix::from_vec(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let m = mask(&[true, false, false, false], 2);
        let imp = Matrix::from_vec(2, 2, vec![0.5, 0.2, 0.3, 0.4]).unwrap();
        let masked = rmse_masked(&imp, &truth, &m).unwrap();
        let all = rmse_all_cells(&imp, &truth).unwrap();
        assert!((all - masked * 0.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_and_sample_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_sample_std(&[3.0]), (3.0, 0.0));
    }

    proptest! {
        #[test]
        fn depends_only_on_masked_cells_and_scales(
            vals in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, any::<bool>(), -5.0f64..5.0), 1..40),
            c in -4.0f64..4.0,
        ) {
            let n = vals.len();
            let mut bits: Vec<bool> = vals.iter().map(|v| v.2).collect();
            bits[0] = true;
            let m = mask(&bits, 1);
            let truth = Matrix::from_vec(n, 1, vals.iter().map(|v| v.0).collect()).unwrap();
            let imp = Matrix::from_vec(n, 1, vals.iter().map(|v| v.1).collect()).unwrap();
            let base = rmse_masked(&imp, &truth, &m).unwrap();
            let perturbed = Matrix::from_vec(
                n, 1,
                vals.iter().zip(&bits).map(|(v, &b)| if b { v.1 } else { v.1 + v.3 }).collect(),
            ).unwrap();
            prop_assert_eq!(rmse_masked(&perturbed, &truth, &m).unwrap(), base);
            let scaled = Matrix::from_vec(
                n, 1,
                vals.iter().map(|v| v.0 + c * (v.1 - v.0)).collect(),
            ).unwrap();
            let s = rmse_masked(&scaled, &truth, &m).unwrap();
            prop_assert!((s - c.abs() * base).abs() < 1e-9);
        }
    }
}
