use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::nn::sigmoid;
use crate::Scalar;

pub const CLASSIFIER_ITERATIONS: usize = 500;
pub const CLASSIFIER_LEARNING_RATE: f64 = 0.1;

/// Binary logistic regression over the attribute columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    /// `d` feature weights followed by the bias.
    pub weights: Vec<f64>,
    /// `[negative, positive]` class labels (sorted).
    pub classes: [String; 2],
    pub seed: u64,
}

impl Classifier {
    fn d(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        let d = self.d();
        let z = self.weights[..d]
            .iter()
            .zip(x)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.weights[d];
        sigmoid(z)
    }

    /// Predicted label; probability exactly 0.5 is resolved by the seed's parity.
    pub fn predict(&self, x: &[f64]) -> &str {
        let p = self.probability(x);
        let positive = if p == 0.5 {
            self.seed % 2 == 1
        } else {
            p > 0.5
        };
        &self.classes[usize::from(positive)]
    }
}

/// Full-batch gradient descent from zero weights, fixed iterations and step size.
pub fn classifier_fit<T: Scalar>(train: &Dataset<T>, seed: u64) -> Result<Classifier> {
    let classes = train.classes();
    match classes.len() {
        0 | 1 => return Err(Error::SingleClass),
        2 => {}
        c => {
            return Err(Error::invalid(format!(
                "binary classes required, found {c}"
            )))
        }
    }
    let n = train.n();
    let d = train.d();
    let x: Vec<f64> = train.values.as_slice().iter().map(|v| v.as_f64()).collect();
    let y: Vec<f64> = train
        .class_labels
        .iter()
        .map(|l| if *l == classes[1] { 1.0 } else { 0.0 })
        .collect();
    let mut w = vec![0.0; d + 1];
    let mut grad = vec![0.0; d + 1];
    for _ in 0..CLASSIFIER_ITERATIONS {
        grad.fill(0.0);
        for i in 0..n {
            let row = &x[i * d..(i + 1) * d];
            let z = w[..d].iter().zip(row).map(|(a, b)| a * b).sum::<f64>() + w[d];
            let r = sigmoid(z) - y[i];
            for (g, v) in grad[..d].iter_mut().zip(row) {
                *g += r * v;
            }
            grad[d] += r;
        }
        for (wi, g) in w.iter_mut().zip(&grad) {
            *wi -= CLASSIFIER_LEARNING_RATE * g / n as f64;
        }
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            epoch: CLASSIFIER_ITERATIONS,
        });
    }
    let [neg, pos]: [String; 2] = classes.try_into().expect("two classes");
    Ok(Classifier {
        weights: w,
        classes: [neg, pos],
        seed,
    })
}

/// Fraction of `test` rows whose predicted label equals the true label.
pub fn classifier_accuracy<T: Scalar>(c: &Classifier, test: &Dataset<T>) -> Result<f64> {
    if test.n() == 0 {
        return Err(Error::EmptyTestSet);
    }
    if test.d() != c.d() {
        return Err(Error::SchemaMismatch(format!(
            "classifier has {} features, test set {}",
            c.d(),
            test.d()
        )));
    }
    let mut row = vec![0.0; test.d()];
    let correct = (0..test.n())
        .filter(|&i| {
            for (r, v) in row.iter_mut().zip(test.values.row(i)) {
                *r = v.as_f64();
            }
            c.predict(&row) == test.class_labels[i]
        })
        .count();
    Ok(correct as f64 / test.n() as f64)
}

/// `accuracy(original) − accuracy(imputed)`: one classifier trained on each training set, both
/// scored on `eval_set`.
pub fn delta_acc<T: Scalar>(
    original_train: &Dataset<T>,
    imputed_train: &Dataset<T>,
    eval_set: &Dataset<T>,
    seed: u64,
) -> Result<f64> {
    if original_train.class_labels != imputed_train.class_labels
        || !original_train.same_schema(imputed_train)
    {
        return Err(Error::SchemaMismatch(
            "training sets differ in labels or schema".into(),
        ));
    }
    let a = classifier_accuracy(&classifier_fit(original_train, seed)?, eval_set)?;
    let b = classifier_accuracy(&classifier_fit(imputed_train, seed)?, eval_set)?;
    Ok(a - b)
}
