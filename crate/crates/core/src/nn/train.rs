use crate::error::{Error, Result};
use crate::nn::adam::{adam_step, AdamConfig, AdamState};
use crate::nn::layer::DenseLayer;
use crate::nn::loss::{mse_grad, mse_loss};
use crate::nn::matrix::Matrix;
use crate::nn::network::{Gradients, Mlp};
use crate::rng::RngStream;
use crate::Scalar;

/// A model that can produce a loss and parameter gradients for one mini-batch.
///
/// `layers` and `layers_mut` must list parameters in the same order as the returned
/// [`Gradients`].
pub trait Trainable<T: Scalar> {
    fn batch_loss_and_grads(
        &self,
        inputs: &Matrix<T>,
        targets: &Matrix<T>,
        rng: &mut RngStream,
    ) -> Result<(T, Gradients<T>)>;

    fn layers(&self) -> Vec<&DenseLayer<T>>;

    fn layers_mut(&mut self) -> Vec<&mut DenseLayer<T>>;
}

impl<T: Scalar> Trainable<T> for Mlp<T> {
    fn batch_loss_and_grads(
        &self,
        inputs: &Matrix<T>,
        targets: &Matrix<T>,
        rng: &mut RngStream,
    ) -> Result<(T, Gradients<T>)> {
        let trace = self.forward_train(inputs, |_| true, rng)?;
        let loss = mse_loss(trace.output(), targets)?;
        let (grads, _) = self.backward(&trace, &mse_grad(trace.output(), targets)?)?;
        Ok((loss, grads))
    }

    fn layers(&self) -> Vec<&DenseLayer<T>> {
        self.layers.iter().collect()
    }

    fn layers_mut(&mut self) -> Vec<&mut DenseLayer<T>> {
        self.layers.iter_mut().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            batch_size: 32,
            adam: AdamConfig::default(),
        }
    }
}

/// Hook applied to each mini-batch's inputs before the forward pass.
pub type CorruptionHook<'a, T> = &'a mut dyn FnMut(&mut Matrix<T>, &mut RngStream);

/// Mini-batch Adam training. Rows are reshuffled every epoch. Returns the mean training loss
/// of each epoch (batch losses weighted by batch size).
pub fn train<T: Scalar, M: Trainable<T> + ?Sized>(
    model: &mut M,
    inputs: &Matrix<T>,
    targets: &Matrix<T>,
    config: &FitConfig,
    mut corrupt: Option<CorruptionHook<'_, T>>,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if config.epochs == 0 {
        return Err(Error::invalid("epochs must be at least 1"));
    }
    if config.batch_size == 0 {
        return Err(Error::invalid("batch_size must be at least 1"));
    }
    if inputs.rows() != targets.rows() {
        return Err(Error::shape(format!(
            "{} input rows but {} target rows",
            inputs.rows(),
            targets.rows()
        )));
    }
    if inputs.rows() == 0 {
        return Err(Error::invalid("no training rows"));
    }
    let mut state = AdamState::new(config.adam, model.layers());
    let n = inputs.rows();
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let order = rng.permutation(n);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let mut xb = inputs.select_rows(chunk);
            let yb = targets.select_rows(chunk);
            if let Some(hook) = corrupt.as_mut() {
                hook(&mut xb, rng);
            }
            let (loss, grads) = model.batch_loss_and_grads(&xb, &yb, rng)?;
            let loss = loss.as_f64();
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            adam_step(&mut model.layers_mut(), &grads, &mut state).map_err(|e| {
                if e.is_divergence() {
                    Error::Divergence { epoch }
                } else {
                    e
                }
            })?;
            total += loss * chunk.len() as f64;
        }
        history.push(total / n as f64);
    }
    Ok(history)
}
