use crate::error::{Error, Result};
use crate::models::{HIDDEN_WIDTH, LATENT_WIDTH};
use crate::nn::{mse_grad, mse_loss, Activation, DenseLayer, Gradients, Matrix, Mlp, Trainable};
use crate::rng::RngStream;
use crate::Scalar;

/// Autoencoder `d → 80 → 20 → 80 → d`: ReLU hidden layers with dropout, sigmoid output.
#[derive(Debug, Clone, PartialEq)]
pub struct AeModel<T = f64> {
    pub encoder: Mlp<T>,
    pub decoder: Mlp<T>,
    pub dropout_p: f64,
}

impl<T: Scalar> AeModel<T> {
    pub fn with_widths(
        d: usize,
        hidden: usize,
        latent: usize,
        dropout_p: f64,
        seed: u64,
    ) -> Result<Self> {
        if d == 0 || hidden == 0 || latent == 0 {
            return Err(Error::invalid("layer widths must be positive"));
        }
        let mut rng = RngStream::new(seed);
        let h = (Activation::Relu, dropout_p);
        let encoder = Mlp::glorot(&[d, hidden, latent], &[h, h], &mut rng)?;
        let decoder = Mlp::glorot(
            &[latent, hidden, d],
            &[h, (Activation::Sigmoid, 0.0)],
            &mut rng,
        )?;
        Self::from_parts(encoder, decoder)
    }

    pub fn from_parts(encoder: Mlp<T>, decoder: Mlp<T>) -> Result<Self> {
        if encoder.out_dim() != decoder.in_dim() || encoder.in_dim() != decoder.out_dim() {
            return Err(Error::shape("encoder and decoder widths do not mirror"));
        }
        let dropout_p = encoder.layers.first().map_or(0.0, |l| l.dropout_p);
        Ok(Self {
            encoder,
            decoder,
            dropout_p,
        })
    }

    pub fn d(&self) -> usize {
        self.encoder.in_dim()
    }

    pub fn param_count(&self) -> usize {
        self.encoder.param_count() + self.decoder.param_count()
    }
}

/// Autoencoder with the standard 80/20 widths.
pub fn build_ae<T: Scalar>(d: usize, dropout_p: f64, seed: u64) -> Result<AeModel<T>> {
    AeModel::with_widths(d, HIDDEN_WIDTH, LATENT_WIDTH, dropout_p, seed)
}

impl<T: Scalar> Trainable<T> for AeModel<T> {
    fn batch_loss_and_grads(
        &self,
        inputs: &Matrix<T>,
        targets: &Matrix<T>,
        rng: &mut RngStream,
    ) -> Result<(T, Gradients<T>)> {
        let enc = self.encoder.forward_train(inputs, |_| true, rng)?;
        let dec = self.decoder.forward_train(enc.output(), |_| true, rng)?;
        let loss = mse_loss(dec.output(), targets)?;
        let (dec_grads, d_latent) = self
            .decoder
            .backward(&dec, &mse_grad(dec.output(), targets)?)?;
        let (mut grads, _) = self.encoder.backward(&enc, &d_latent)?;
        grads.extend(dec_grads);
        Ok((loss, grads))
    }

    fn layers(&self) -> Vec<&DenseLayer<T>> {
        self.encoder
            .layers
            .iter()
            .chain(&self.decoder.layers)
            .collect()
    }

    fn layers_mut(&mut self) -> Vec<&mut DenseLayer<T>> {
        self.encoder
            .layers
            .iter_mut()
            .chain(self.decoder.layers.iter_mut())
            .collect()
    }
}
