use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nn::matrix::{axpy, Matrix};
use crate::rng::RngStream;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Relu => z.max(T::zero()),
            Activation::Sigmoid => sigmoid(z),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and the output `y`.
    #[inline]
    pub fn derivative<T: Scalar>(self, z: T, y: T) -> T {
        match self {
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Sigmoid => y * (T::one() - y),
            Activation::Linear => T::one(),
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Linear => "linear",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "linear" => Ok(Activation::Linear),
            other => Err(Error::Format(format!("unknown activation {other:?}"))),
        }
    }
}

#[inline]
pub fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Fully connected layer `y = act(x·Wᵀ + b)` with an attached dropout rate for its output.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T = f64> {
    pub w: Matrix<T>,
    pub b: Vec<T>,
    pub activation: Activation,
    pub dropout_p: f64,
}

/// Per-layer parameter gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad<T = f64> {
    pub dw: Matrix<T>,
    pub db: Vec<T>,
}

impl<T: Scalar> LayerGrad<T> {
    pub fn zeros_like(layer: &DenseLayer<T>) -> Self {
        Self {
            dw: Matrix::zeros(layer.w.rows(), layer.w.cols()),
            db: vec![T::zero(); layer.b.len()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.dw.is_finite() && self.db.iter().all(|x| x.is_finite())
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, &b) in self.dw.as_mut_slice().iter_mut().zip(other.dw.as_slice()) {
            *a += b;
        }
        for (a, &b) in self.db.iter_mut().zip(&other.db) {
            *a += b;
        }
    }
}

impl<T: Scalar> DenseLayer<T> {
    pub fn new(w: Matrix<T>, b: Vec<T>, activation: Activation, dropout_p: f64) -> Result<Self> {
        if b.len() != w.rows() {
            return Err(Error::shape(format!(
                "bias length {} for {} output units",
                b.len(),
                w.rows()
            )));
        }
        if !(0.0..1.0).contains(&dropout_p) {
            return Err(Error::invalid(format!(
                "dropout_p {dropout_p} outside [0,1)"
            )));
        }
        Ok(Self {
            w,
            b,
            activation,
            dropout_p,
        })
    }

    /// Glorot-uniform weights in ±√(6/(fan_in+fan_out)), zero biases.
    pub fn glorot(
        fan_in: usize,
        fan_out: usize,
        activation: Activation,
        dropout_p: f64,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let data = (0..fan_in * fan_out)
            .map(|_| T::lit(rng.uniform_range(-limit, limit)))
            .collect();
        Self::new(
            Matrix::from_vec(fan_out, fan_in, data)?,
            vec![T::zero(); fan_out],
            activation,
            dropout_p,
        )
    }

    pub fn in_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn param_count(&self) -> usize {
        self.w.rows() * self.w.cols() + self.b.len()
    }

    /// Pre-activation `x·Wᵀ + b`.
    pub fn affine(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        if x.cols() != self.in_dim() {
            return Err(Error::shape(format!(
                "layer expects {} inputs, got {}",
                self.in_dim(),
                x.cols()
            )));
        }
        let mut z = x.matmul_t(&self.w)?;
        for r in 0..z.rows() {
            for (zi, &bi) in z.row_mut(r).iter_mut().zip(&self.b) {
                *zi += bi;
            }
        }
        Ok(z)
    }

    /// `activation(x·Wᵀ + b)`. Dropout is not applied here.
    pub fn forward(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let act = self.activation;
        Ok(self.affine(x)?.map(|z| act.apply(z)))
    }

    /// Backward pass through the affine map and activation.
    ///
    /// `dy` is the loss gradient w.r.t. the (pre-dropout) output `y`; `z` is the cached
    /// pre-activation. Returns the parameter gradient and the gradient w.r.t. `x`.
    pub fn backward(
        &self,
        x: &Matrix<T>,
        z: &Matrix<T>,
        y: &Matrix<T>,
        dy: &Matrix<T>,
    ) -> Result<(LayerGrad<T>, Matrix<T>)> {
        if dy.shape() != z.shape() || z.shape() != y.shape() || x.rows() != z.rows() {
            return Err(Error::shape("inconsistent cached activations in backward"));
        }
        let mut dz = dy.clone();
        for ((d, &zi), &yi) in dz
            .as_mut_slice()
            .iter_mut()
            .zip(z.as_slice())
            .zip(y.as_slice())
        {
            *d *= self.activation.derivative(zi, yi);
        }
        let mut grad = LayerGrad::zeros_like(self);
        for r in 0..dz.rows() {
            let xr = x.row(r);
            for (o, &g) in dz.row(r).iter().enumerate() {
                if g == T::zero() {
                    continue;
                }
                axpy(g, xr, grad.dw.row_mut(o));
                grad.db[o] += g;
            }
        }
        let dx = dz.matmul(&self.w)?;
        Ok((grad, dx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_layer_passes_input() {
        let layer =
            DenseLayer::new(Matrix::identity(3), vec![0.0; 3], Activation::Linear, 0.0).unwrap();
        let x = Matrix::from_rows(&[vec![1.0, -2.0, 3.5], vec![0.0, 4.0, -1.0]]).unwrap();
        assert_eq!(layer.forward(&x).unwrap(), x);
    }

    #[test]
    fn affine_arithmetic() {
        let layer = DenseLayer::new(
            Matrix::from_vec(1, 1, vec![2.0]).unwrap(),
            vec![1.0],
            Activation::Linear,
            0.0,
        )
        .unwrap();
        let y = layer
            .forward(&Matrix::from_vec(1, 1, vec![3.0]).unwrap())
            .unwrap();
        assert_eq!(y.as_slice(), &[7.0]);
    }

    #[test]
    fn sigmoid_of_zero() {
        let layer =
            DenseLayer::new(Matrix::zeros(1, 2), vec![0.0], Activation::Sigmoid, 0.0).unwrap();
        let y = layer
            .forward(&Matrix::from_vec(1, 2, vec![5.0, -3.0]).unwrap())
            .unwrap();
        assert_eq!(y.as_slice(), &[0.5]);
    }

    #[test]
    fn rejects_bad_shapes_and_rates() {
        let layer =
            DenseLayer::<f64>::new(Matrix::zeros(2, 3), vec![0.0; 2], Activation::Relu, 0.0)
                .unwrap();
        assert!(layer.forward(&Matrix::zeros(1, 2)).is_err());
        assert!(
            DenseLayer::<f64>::new(Matrix::zeros(2, 3), vec![0.0; 3], Activation::Relu, 0.0)
                .is_err()
        );
        assert!(
            DenseLayer::<f64>::new(Matrix::zeros(2, 3), vec![0.0; 2], Activation::Relu, 1.0)
                .is_err()
        );
    }

    #[test]
    fn sigmoid_is_stable_for_large_inputs() {
        assert_eq!(sigmoid(1000.0_f64), 1.0);
        assert_eq!(sigmoid(-1000.0_f64), 0.0);
        assert!((sigmoid(2.0_f32) - 0.880_797).abs() < 1e-6);
    }
}
