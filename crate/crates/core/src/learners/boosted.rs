//! Batch gradient boosting on squared loss.

use alloc::vec::Vec;

use super::{fit_tree, Dataset, FeatureSource, RegressionTree, TreeParams};
use crate::{Error, Result};

/// `base + shrinkage * sum_t h_t(x)`, fit stagewise from scratch.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostedEnsemble {
    base: f64,
    shrinkage: f64,
    trees: Vec<RegressionTree>,
    dim: usize,
}

impl BoostedEnsemble {
    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    #[inline]
    pub fn predict_unchecked<S: FeatureSource + ?Sized>(&self, x: &S) -> f64 {
        self.base
            + self.shrinkage
                * self
                    .trees
                    .iter()
                    .map(|t| t.predict_unchecked(x))
                    .sum::<f64>()
    }

    pub fn predict<S: FeatureSource + ?Sized>(&self, x: &S) -> Result<f64> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(self.predict_unchecked(x))
    }
}

/// Starts from the target mean and adds `n_trees` trees, each fit to the
/// current residuals and shrunk by `shrinkage`.
pub fn fit_boosted(
    data: &Dataset,
    n_trees: usize,
    shrinkage: f64,
    params: TreeParams,
) -> Result<BoostedEnsemble> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if n_trees == 0 {
        return Err(Error::InvalidParameter("ensemble needs at least one tree"));
    }
    let base = data.mean_target();
    let mut residuals = data.clone();
    for y in residuals.targets_mut() {
        *y -= base;
    }
    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let tree = fit_tree(&residuals, params)?;
        for i in 0..residuals.len() {
            let step = shrinkage * tree.predict_unchecked(data.row(i));
            residuals.targets_mut()[i] -= step;
        }
        trees.push(tree);
    }
    Ok(BoostedEnsemble {
        base,
        shrinkage,
        trees,
        dim: data.dim(),
    })
}
