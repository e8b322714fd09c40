use crate::error::{Error, Result};
use crate::nn::dropout::{apply_mask, dropout_mask};
use crate::nn::layer::{Activation, DenseLayer, LayerGrad};
use crate::nn::loss::{mse_grad, mse_loss};
use crate::nn::matrix::Matrix;
use crate::rng::RngStream;
use crate::Scalar;

/// Parameter gradients for an ordered list of layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T = f64> {
    pub layers: Vec<LayerGrad<T>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(LayerGrad::is_finite)
    }

    pub fn extend(&mut self, other: Gradients<T>) {
        self.layers.extend(other.layers);
    }
}

/// Recorded activations of one forward pass, consumed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardTrace<T = f64> {
    inputs: Vec<Matrix<T>>,
    pre: Vec<Matrix<T>>,
    post: Vec<Matrix<T>>,
    masks: Vec<Option<Matrix<T>>>,
    output: Matrix<T>,
}

impl<T: Scalar> ForwardTrace<T> {
    pub fn output(&self) -> &Matrix<T> {
        &self.output
    }

    pub fn into_output(self) -> Matrix<T> {
        self.output
    }

    /// Dropout masks applied after each layer (`None` where dropout was off).
    pub fn masks(&self) -> &[Option<Matrix<T>>] {
        &self.masks
    }
}

/// A stack of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T = f64> {
    pub layers: Vec<DenseLayer<T>>,
}

impl<T: Scalar> Mlp<T> {
    pub fn new(layers: Vec<DenseLayer<T>>) -> Result<Self> {
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::shape(format!(
                    "layer widths {} -> {} do not chain",
                    pair[0].out_dim(),
                    pair[1].in_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Glorot-initialised network through the given widths; `specs[i]` is the activation and
    /// dropout rate of layer `i`.
    pub fn glorot(
        widths: &[usize],
        specs: &[(Activation, f64)],
        rng: &mut RngStream,
    ) -> Result<Self> {
        if widths.len() != specs.len() + 1 {
            return Err(Error::invalid("need one (activation, dropout) per layer"));
        }
        let layers = widths
            .windows(2)
            .zip(specs)
            .map(|(w, &(act, p))| DenseLayer::glorot(w[0], w[1], act, p, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn in_dim(&self) -> usize {
        self.layers.first().map_or(0, DenseLayer::in_dim)
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, DenseLayer::out_dim)
    }

    /// Input width followed by each layer's output width.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.in_dim()];
        w.extend(self.layers.iter().map(DenseLayer::out_dim));
        w
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    /// Forward pass with dropout off everywhere.
    pub fn predict(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let mut h = x.clone();
        for layer in &self.layers {
            h = layer.forward(&h)?;
        }
        Ok(h)
    }

    /// Forward pass recording activations. Layer `i` applies its own dropout rate to its
    /// output when `dropout_on(i)` holds; fresh masks are drawn from `rng`.
    pub fn forward_train(
        &self,
        x: &Matrix<T>,
        dropout_on: impl Fn(usize) -> bool,
        rng: &mut RngStream,
    ) -> Result<ForwardTrace<T>> {
        let masks = self.sample_masks(x.rows(), dropout_on, rng);
        self.forward_with_masks(x, masks)
    }

    /// Fresh inverted-dropout masks for a batch of `rows`, one slot per layer; `None` where
    /// `dropout_on(i)` is false or the layer has no dropout.
    pub fn sample_masks(
        &self,
        rows: usize,
        dropout_on: impl Fn(usize) -> bool,
        rng: &mut RngStream,
    ) -> Vec<Option<Matrix<T>>> {
        self.layers
            .iter()
            .enumerate()
            .map(|(i, l)| {
                (dropout_on(i) && l.dropout_p > 0.0)
                    .then(|| dropout_mask(rows, l.out_dim(), l.dropout_p, rng))
            })
            .collect()
    }

    /// Forward pass using the supplied dropout masks (treated as constants).
    pub fn forward_with_masks(
        &self,
        x: &Matrix<T>,
        masks: Vec<Option<Matrix<T>>>,
    ) -> Result<ForwardTrace<T>> {
        if masks.len() != self.layers.len() {
            return Err(Error::shape("one dropout mask slot per layer required"));
        }
        let n = self.layers.len();
        let mut inputs = Vec::with_capacity(n);
        let mut pre = Vec::with_capacity(n);
        let mut post = Vec::with_capacity(n);
        let mut h = x.clone();
        for (layer, mask) in self.layers.iter().zip(&masks) {
            let z = layer.affine(&h)?;
            let act = layer.activation;
            let y = z.map(|v| act.apply(v));
            let mut next = y.clone();
            if let Some(m) = mask {
                if m.shape() != y.shape() {
                    return Err(Error::shape("dropout mask shape"));
                }
                apply_mask(&mut next, m);
            }
            inputs.push(std::mem::replace(&mut h, next));
            pre.push(z);
            post.push(y);
        }
        Ok(ForwardTrace {
            inputs,
            pre,
            post,
            masks,
            output: h,
        })
    }

    /// Reverse-mode pass: given `d_out = ∂loss/∂output`, returns parameter gradients and
    /// `∂loss/∂input`.
    pub fn backward(
        &self,
        trace: &ForwardTrace<T>,
        d_out: &Matrix<T>,
    ) -> Result<(Gradients<T>, Matrix<T>)> {
        if trace.pre.len() != self.layers.len() {
            return Err(Error::shape("missing recorded activations"));
        }
        if d_out.shape() != trace.output.shape() {
            return Err(Error::shape("output gradient shape"));
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = d_out.clone();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            if let Some(m) = &trace.masks[i] {
                apply_mask(&mut delta, m);
            }
            let (g, dx) =
                layer.backward(&trace.inputs[i], &trace.pre[i], &trace.post[i], &delta)?;
            grads.push(g);
            delta = dx;
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, delta))
    }

    /// MSE loss of the network on `(x, target)` under fixed dropout masks, with exact
    /// gradients for every weight and bias.
    pub fn loss_and_grads(
        &self,
        x: &Matrix<T>,
        target: &Matrix<T>,
        masks: Vec<Option<Matrix<T>>>,
    ) -> Result<(T, Gradients<T>)> {
        let trace = self.forward_with_masks(x, masks)?;
        let loss = mse_loss(trace.output(), target)?;
        let d_out = mse_grad(trace.output(), target)?;
        let (grads, _) = self.backward(&trace, &d_out)?;
        Ok((loss, grads))
    }
}
