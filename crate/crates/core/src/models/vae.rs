use crate::error::{Error, Result};
use crate::models::vae_math::{kl_gauss, vae_loss};
use crate::models::{HIDDEN_WIDTH, LATENT_WIDTH};
use crate::nn::{mse_grad, Activation, DenseLayer, Gradients, Matrix, Mlp, Trainable};
use crate::rng::RngStream;
use crate::Scalar;

/// Variational autoencoder: trunk `d → 80`, linear `mu` and `logvar` heads `80 → 20`,
/// decoder `20 → 80 → d` with a sigmoid output.
#[derive(Debug, Clone, PartialEq)]
pub struct VaeModel<T = f64> {
    pub trunk: Mlp<T>,
    pub mu_head: DenseLayer<T>,
    pub logvar_head: DenseLayer<T>,
    pub decoder: Mlp<T>,
    pub dropout_p: f64,
    pub kl_weight: f64,
}

/// Latent statistics of a batch under the deterministic (dropout-free) encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentGaussian<T = f64> {
    pub mu: Matrix<T>,
    pub logvar: Matrix<T>,
}

impl<T: Scalar> VaeModel<T> {
    pub fn with_widths(
        d: usize,
        hidden: usize,
        latent: usize,
        dropout_p: f64,
        kl_weight: f64,
        seed: u64,
    ) -> Result<Self> {
        if d == 0 || hidden == 0 || latent == 0 {
            return Err(Error::invalid("layer widths must be positive"));
        }
        let mut rng = RngStream::new(seed);
        let trunk = Mlp::glorot(&[d, hidden], &[(Activation::Relu, dropout_p)], &mut rng)?;
        let mu_head = DenseLayer::glorot(hidden, latent, Activation::Linear, 0.0, &mut rng)?;
        let logvar_head = DenseLayer::glorot(hidden, latent, Activation::Linear, 0.0, &mut rng)?;
        let decoder = Mlp::glorot(
            &[latent, hidden, d],
            &[(Activation::Relu, dropout_p), (Activation::Sigmoid, 0.0)],
            &mut rng,
        )?;
        Self::from_parts(trunk, mu_head, logvar_head, decoder, kl_weight)
    }

    pub fn from_parts(
        trunk: Mlp<T>,
        mu_head: DenseLayer<T>,
        logvar_head: DenseLayer<T>,
        decoder: Mlp<T>,
        kl_weight: f64,
    ) -> Result<Self> {
        if !(kl_weight > 0.0 && kl_weight.is_finite()) {
            return Err(Error::invalid(format!(
                "kl_weight {kl_weight} must be positive"
            )));
        }
        if mu_head.in_dim() != trunk.out_dim()
            || logvar_head.in_dim() != trunk.out_dim()
            || mu_head.out_dim() != logvar_head.out_dim()
            || decoder.in_dim() != mu_head.out_dim()
            || decoder.out_dim() != trunk.in_dim()
        {
            return Err(Error::shape("inconsistent VAE layer widths"));
        }
        let dropout_p = trunk.layers.first().map_or(0.0, |l| l.dropout_p);
        Ok(Self {
            trunk,
            mu_head,
            logvar_head,
            decoder,
            dropout_p,
            kl_weight,
        })
    }

    pub fn d(&self) -> usize {
        self.trunk.in_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.mu_head.out_dim()
    }

    pub fn param_count(&self) -> usize {
        self.trunk.param_count()
            + self.mu_head.param_count()
            + self.logvar_head.param_count()
            + self.decoder.param_count()
    }

    /// `(mu, logvar)` with dropout disabled.
    pub fn encode(&self, x: &Matrix<T>) -> Result<LatentGaussian<T>> {
        let h = self.trunk.predict(x)?;
        Ok(LatentGaussian {
            mu: self.mu_head.affine(&h)?,
            logvar: self.logvar_head.affine(&h)?,
        })
    }

    /// Loss terms and gradients for one batch given fixed standard-normal noise `eps` and
    /// fixed dropout masks (`None` = off). Returns `(total, recon, kl, grads)`.
    pub fn loss_and_grads_with(
        &self,
        x: &Matrix<T>,
        target: &Matrix<T>,
        eps: &Matrix<T>,
        trunk_masks: Vec<Option<Matrix<T>>>,
        decoder_masks: Vec<Option<Matrix<T>>>,
    ) -> Result<(T, T, T, Gradients<T>)> {
        let trunk = self.trunk.forward_with_masks(x, trunk_masks)?;
        let h = trunk.output();
        let mu = self.mu_head.affine(h)?;
        let logvar = self.logvar_head.affine(h)?;
        if eps.shape() != mu.shape() {
            return Err(Error::shape("eps shape differs from latent batch"));
        }
        let half = T::lit(0.5);
        let sd = logvar.map(|lv| (lv * half).exp());
        let mut z = mu.clone();
        for ((zi, &s), &e) in z
            .as_mut_slice()
            .iter_mut()
            .zip(sd.as_slice())
            .zip(eps.as_slice())
        {
            *zi += s * e;
        }
        let dec = self.decoder.forward_with_masks(&z, decoder_masks)?;
        let (total, recon, kl) = vae_loss(dec.output(), target, &mu, &logvar, self.kl_weight)?;

        let (dec_grads, dz) = self
            .decoder
            .backward(&dec, &mse_grad(dec.output(), target)?)?;
        let kl_scale = T::lit(self.kl_weight / mu.rows().max(1) as f64);
        let mut d_mu = dz.clone();
        for (g, &m) in d_mu.as_mut_slice().iter_mut().zip(mu.as_slice()) {
            *g += kl_scale * m;
        }
        let mut d_logvar = dz;
        for (((g, &s), &e), &lv) in d_logvar
            .as_mut_slice()
            .iter_mut()
            .zip(sd.as_slice())
            .zip(eps.as_slice())
            .zip(logvar.as_slice())
        {
            *g = *g * e * s * half + kl_scale * half * lv.exp_m1();
        }
        let (g_mu, dh_mu) = self.mu_head.backward(h, &mu, &mu, &d_mu)?;
        let (g_lv, dh_lv) = self.logvar_head.backward(h, &logvar, &logvar, &d_logvar)?;
        let mut dh = dh_mu;
        for (a, &b) in dh.as_mut_slice().iter_mut().zip(dh_lv.as_slice()) {
            *a += b;
        }
        let (mut grads, _) = self.trunk.backward(&trunk, &dh)?;
        grads.layers.push(g_mu);
        grads.layers.push(g_lv);
        grads.extend(dec_grads);
        Ok((total, recon, kl, grads))
    }
}

/// VAE with the standard 80/20 widths.
pub fn build_vae<T: Scalar>(
    d: usize,
    dropout_p: f64,
    kl_weight: f64,
    seed: u64,
) -> Result<VaeModel<T>> {
    VaeModel::with_widths(d, HIDDEN_WIDTH, LATENT_WIDTH, dropout_p, kl_weight, seed)
}

impl<T: Scalar> Trainable<T> for VaeModel<T> {
    fn batch_loss_and_grads(
        &self,
        inputs: &Matrix<T>,
        targets: &Matrix<T>,
        rng: &mut RngStream,
    ) -> Result<(T, Gradients<T>)> {
        let n = inputs.rows();
        let trunk_masks = self.trunk.sample_masks(n, |_| true, rng);
        let eps = Matrix::from_vec(
            n,
            self.latent_dim(),
            (0..n * self.latent_dim())
                .map(|_| rng.standard_normal())
                .collect(),
        )?;
        let decoder_masks = self.decoder.sample_masks(n, |_| true, rng);
        let (total, _, _, grads) =
            self.loss_and_grads_with(inputs, targets, &eps, trunk_masks, decoder_masks)?;
        Ok((total, grads))
    }

    fn layers(&self) -> Vec<&DenseLayer<T>> {
        let mut v: Vec<&DenseLayer<T>> = self.trunk.layers.iter().collect();
        v.push(&self.mu_head);
        v.push(&self.logvar_head);
        v.extend(self.decoder.layers.iter());
        v
    }

    fn layers_mut(&mut self) -> Vec<&mut DenseLayer<T>> {
        let mut v: Vec<&mut DenseLayer<T>> = self.trunk.layers.iter_mut().collect();
        v.push(&mut self.mu_head);
        v.push(&mut self.logvar_head);
        v.extend(self.decoder.layers.iter_mut());
        v
    }
}

/// Mean KL of the encoder's latent distribution over the rows of `x`.
pub fn mean_kl<T: Scalar>(model: &VaeModel<T>, x: &Matrix<T>) -> Result<T> {
    let enc = model.encode(x)?;
    let kl = kl_gauss(enc.mu.as_slice(), enc.logvar.as_slice())?;
    Ok(kl / T::lit(x.rows().max(1) as f64))
}
