//! Bagged regression trees.

use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::{fit_tree, Dataset, FeatureSource, RegressionTree, TreeParams};
use crate::{seeded_rng, Error, Result};

/// Unweighted average of trees fit on bootstrap resamples.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<RegressionTree>,
}

impl ForestModel {
    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    #[inline]
    pub fn predict_unchecked<S: FeatureSource + ?Sized>(&self, x: &S) -> f64 {
        self.trees
            .iter()
            .map(|t| t.predict_unchecked(x))
            .sum::<f64>()
            / self.trees.len() as f64
    }

    pub fn predict<S: FeatureSource + ?Sized>(&self, x: &S) -> Result<f64> {
        let dim = self.trees[0].dim();
        if x.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.dim(),
            });
        }
        Ok(self.predict_unchecked(x))
    }
}

/// Fits `n_trees` trees, each on a same-size resample drawn with replacement
/// when `bootstrap` is set (otherwise on the full sample).
///
/// Every tree gets its own generator seeded from `rng`, so results do not
/// depend on the order trees are fit in.
pub fn fit_forest(
    data: &Dataset,
    n_trees: usize,
    params: TreeParams,
    bootstrap: bool,
    rng: &mut dyn RngCore,
) -> Result<ForestModel> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if n_trees == 0 {
        return Err(Error::InvalidParameter("forest needs at least one tree"));
    }
    let n = data.len();
    let seeds: Vec<u64> = (0..n_trees).map(|_| rng.next_u64()).collect();
    let mut trees = Vec::with_capacity(n_trees);
    for seed in seeds {
        let tree = if bootstrap {
            let mut tree_rng = seeded_rng(seed);
            let sample: Vec<usize> = (0..n).map(|_| tree_rng.random_range(0..n)).collect();
            fit_tree(&data.select(&sample), params)?
        } else {
            fit_tree(data, params)?
        };
        trees.push(tree);
    }
    Ok(ForestModel { trees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use alloc::vec;

    #[test]
    fn constant_targets() {
        let rows: Vec<_> = (0..20).map(|i| (vec![i as f64], -2.5)).collect();
        let data = Dataset::from_rows(&rows).unwrap();
        let forest = fit_forest(&data, 7, TreeParams::depth(2), true, &mut seeded_rng(1)).unwrap();
        assert!(forest
            .trees()
            .iter()
            .all(|t| t.predict_unchecked(&[3.0][..]) == -2.5));
        assert_eq!(forest.predict(&[100.0][..]).unwrap(), -2.5);
    }

    #[test]
    fn single_tree_without_bootstrap_is_a_tree() {
        let rows: Vec<_> = (0..30)
            .map(|i| (vec![i as f64, (i % 7) as f64], (i * i % 11) as f64))
            .collect();
        let data = Dataset::from_rows(&rows).unwrap();
        let forest = fit_forest(&data, 1, TreeParams::depth(2), false, &mut seeded_rng(9)).unwrap();
        let tree = fit_tree(&data, TreeParams::depth(2)).unwrap();
        assert_eq!(forest.trees()[0], tree);
    }

    #[test]
    fn zero_trees_rejected() {
        let data = Dataset::from_rows(&[(vec![1.0], 1.0)]).unwrap();
        assert!(fit_forest(&data, 0, TreeParams::default(), true, &mut seeded_rng(0)).is_err());
    }
}
