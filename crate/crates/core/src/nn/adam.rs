use crate::error::{Error, Result};
use crate::nn::layer::{DenseLayer, LayerGrad};
use crate::nn::network::Gradients;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment accumulators, one pair per layer, plus the count of completed steps.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T = f64> {
    pub t: u64,
    pub config: AdamConfig,
    m: Vec<LayerGrad<T>>,
    v: Vec<LayerGrad<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new<'a>(
        config: AdamConfig,
        layers: impl IntoIterator<Item = &'a DenseLayer<T>>,
    ) -> Self {
        let m: Vec<_> = layers.into_iter().map(LayerGrad::zeros_like).collect();
        Self {
            t: 0,
            config,
            v: m.clone(),
            m,
        }
    }
}

/// One bias-corrected Adam update over `layers`, which must be in the same order as
/// `grads.layers` and the layers the state was created for.
pub fn adam_step<T: Scalar>(
    layers: &mut [&mut DenseLayer<T>],
    grads: &Gradients<T>,
    state: &mut AdamState<T>,
) -> Result<()> {
    if layers.len() != grads.layers.len() || layers.len() != state.m.len() {
        return Err(Error::shape("adam: layer count mismatch"));
    }
    for (l, g) in layers.iter().zip(&grads.layers) {
        if l.w.shape() != g.dw.shape() || l.b.len() != g.db.len() {
            return Err(Error::shape("adam: gradient shape mismatch"));
        }
    }
    if !grads.is_finite() {
        return Err(Error::NonFiniteGradient);
    }
    state.t += 1;
    let c = state.config;
    let t = state.t as i32;
    let b1 = T::lit(c.beta1);
    let b2 = T::lit(c.beta2);
    let one = T::one();
    let corr1 = T::lit(1.0 - c.beta1.powi(t));
    let corr2 = T::lit(1.0 - c.beta2.powi(t));
    let lr = T::lit(c.lr);
    let eps = T::lit(c.eps);

    let update = |p: &mut [T], g: &[T], m: &mut [T], v: &mut [T]| {
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (one - b1) * g[i];
            v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
            let m_hat = m[i] / corr1;
            let v_hat = v[i] / corr2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    };
    for (i, layer) in layers.iter_mut().enumerate() {
        let g = &grads.layers[i];
        let (m, v) = (&mut state.m[i], &mut state.v[i]);
        update(
            layer.w.as_mut_slice(),
            g.dw.as_slice(),
            m.dw.as_mut_slice(),
            v.dw.as_mut_slice(),
        );
        update(&mut layer.b, &g.db, &mut m.db, &mut v.db);
    }
    Ok(())
}
