use crate::error::{Error, Result};
use crate::nn::{mse_loss, Matrix};
use crate::Scalar;

/// `z = mu + exp(logvar/2) ⊙ eps`.
pub fn reparameterize<T: Scalar>(mu: &[T], logvar: &[T], eps: &[T]) -> Result<Vec<T>> {
    if mu.len() != logvar.len() || mu.len() != eps.len() {
        return Err(Error::shape(format!(
            "reparameterize lengths {} / {} / {}",
            mu.len(),
            logvar.len(),
            eps.len()
        )));
    }
    let half = T::lit(0.5);
    Ok(mu
        .iter()
        .zip(logvar)
        .zip(eps)
        .map(|((&m, &lv), &e)| m + (lv * half).exp() * e)
        .collect())
}

/// Closed-form `KL(N(mu, exp(logvar)) ‖ N(0, I))`, summed over all entries.
pub fn kl_gauss<T: Scalar>(mu: &[T], logvar: &[T]) -> Result<T> {
    if mu.len() != logvar.len() {
        return Err(Error::shape("kl_gauss length mismatch"));
    }
    if mu.iter().chain(logvar).any(|v| !v.is_finite()) {
        return Err(Error::invalid("kl_gauss of non-finite input"));
    }
    let half = T::lit(0.5);
    Ok(mu
        .iter()
        .zip(logvar)
        .map(|(&m, &lv)| {
            // exp(lv) − 1 − lv ≥ 0, evaluated without cancellation near lv = 0
            let var_term = (lv.exp_m1() - lv).max(T::zero());
            half * (m * m + var_term)
        })
        .sum())
}

/// VAE objective on a batch: `(total, recon, kl)` with
/// `total = mse(xhat, x) + kl_weight · kl_gauss(mu, logvar) / batch`.
pub fn vae_loss<T: Scalar>(
    xhat: &Matrix<T>,
    x: &Matrix<T>,
    mu: &Matrix<T>,
    logvar: &Matrix<T>,
    kl_weight: f64,
) -> Result<(T, T, T)> {
    if mu.shape() != logvar.shape() || mu.rows() != x.rows() {
        return Err(Error::shape("vae_loss: latent shapes disagree with batch"));
    }
    let recon = mse_loss(xhat, x)?;
    let kl = kl_gauss(mu.as_slice(), logvar.as_slice())?;
    let batch = T::lit(mu.rows().max(1) as f64);
    Ok((recon + T::lit(kl_weight) * kl / batch, recon, kl))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reparameterize_cases() {
        assert_eq!(
            reparameterize(&[0.3, -1.0], &[2.0, -4.0], &[0.0, 0.0]).unwrap(),
            vec![0.3, -1.0]
        );
        assert_eq!(reparameterize(&[0.3], &[0.0], &[1.0]).unwrap(), vec![1.3]);
        assert!(reparameterize(&[0.0], &[0.0, 1.0], &[0.0]).is_err());
    }

    #[test]
    fn kl_cases() {
        assert_eq!(kl_gauss(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert!((kl_gauss::<f64>(&[1.0], &[0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(kl_gauss(&[f64::NAN], &[0.0]).is_err());
        assert!(kl_gauss(&[0.0], &[f64::INFINITY]).is_err());
    }

    #[test]
    fn vae_loss_cases() {
        let x = Matrix::from_vec(2, 2, vec![0.1, 0.9, 0.4, 0.5]).unwrap();
        let zero = Matrix::zeros(2, 3);
        assert_eq!(
            vae_loss(&x, &x, &zero, &zero, 1.0).unwrap(),
            (0.0, 0.0, 0.0)
        );

        let xhat = Matrix::<f64>::from_vec(2, 2, vec![0.2, 0.7, 0.4, 0.1]).unwrap();
        let mu = Matrix::from_vec(2, 3, vec![0.5, -1.0, 0.2, 0.0, 0.3, 1.5]).unwrap();
        let lv = Matrix::from_vec(2, 3, vec![0.1, -0.3, 0.0, 0.7, -1.2, 0.4]).unwrap();
        let (t0, r0, _) = vae_loss(&xhat, &x, &mu, &lv, 0.0).unwrap();
        assert_eq!(t0, r0);
        let (t1, r1, k1) = vae_loss(&xhat, &x, &mu, &lv, 1.0).unwrap();
        let (t2, r2, k2) = vae_loss(&xhat, &x, &mu, &lv, 2.0).unwrap();
        assert_eq!((r1, k1), (r2, k2));
        assert!(((t2 - r2) - 2.0 * (t1 - r1)).abs() < 1e-15);
    }
}
