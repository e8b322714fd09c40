use crate::dataio::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::Scalar;

/// Random train/test partition: the first `round(train_fraction·N)` rows of a permutation go
/// to training. Both parts keep the permuted order.
pub fn split<T: Scalar>(
    ds: &Dataset<T>,
    train_fraction: f64,
    rng: &mut RngStream,
) -> Result<(Dataset<T>, Dataset<T>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train_fraction {train_fraction} outside (0,1)"
        )));
    }
    let n = ds.n();
    let n_train = (train_fraction * n as f64 + 0.5).floor() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::invalid(format!(
            "split of {n} rows at {train_fraction} leaves an empty part"
        )));
    }
    let perm = rng.permutation(n);
    Ok((ds.subset(&perm[..n_train]), ds.subset(&perm[n_train..])))
}

/// Assignment of each instance to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub k: usize,
    pub fold_assignment: Vec<usize>,
}

impl FoldSplit {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_assignment {
            sizes[f] += 1;
        }
        sizes
    }

    /// `(training rows, held-out rows)` for fold `fold`, both in ascending index order.
    pub fn indices(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let (held, train): (Vec<usize>, Vec<usize>) =
            (0..self.fold_assignment.len()).partition(|&i| self.fold_assignment[i] == fold);
        (train, held)
    }
}

/// Random k-fold assignment with fold sizes differing by at most one.
pub fn kfold(n: usize, k: usize, rng: &mut RngStream) -> Result<FoldSplit> {
    if k < 2 || k > n {
        return Err(Error::invalid(format!("fold count {k} outside [2, {n}]")));
    }
    let perm = rng.permutation(n);
    let mut fold_assignment = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        fold_assignment[i] = pos % k;
    }
    Ok(FoldSplit { k, fold_assignment })
}
