//! Regression primitives used as weak learners by the Q approximators.

mod boosted;
mod forest;
mod linear;
mod tree;

pub use boosted::{fit_boosted, BoostedEnsemble};
pub use forest::{fit_forest, ForestModel};
pub use linear::{fit_linear, LinearModel, DEFAULT_RIDGE};
pub use tree::{fit_tree, RegressionTree, TreeParams};

use alloc::vec::Vec;

use crate::{Error, Result};

/// Read access to a feature row without materializing it.
pub trait FeatureSource {
    fn dim(&self) -> usize;

    fn feature(&self, index: usize) -> f64;
}

impl FeatureSource for [f64] {
    #[inline]
    fn dim(&self) -> usize {
        self.len()
    }

    #[inline]
    fn feature(&self, index: usize) -> f64 {
        self[index]
    }
}

impl FeatureSource for Vec<f64> {
    #[inline]
    fn dim(&self) -> usize {
        self.len()
    }

    #[inline]
    fn feature(&self, index: usize) -> f64 {
        self[index]
    }
}

impl FeatureSource for crate::FeatureVector {
    #[inline]
    fn dim(&self) -> usize {
        self.len()
    }

    #[inline]
    fn feature(&self, index: usize) -> f64 {
        self[index]
    }
}

/// Regression rows stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    features: Vec<f64>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            features: Vec::new(),
            targets: Vec::new(),
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[(R, f64)]) -> Result<Self> {
        let dim = rows.first().map_or(0, |(x, _)| x.as_ref().len());
        let mut data = Self::new(dim);
        for (x, y) in rows {
            data.push(x.as_ref(), *y)?;
        }
        Ok(data)
    }

    pub fn push<S: FeatureSource + ?Sized>(&mut self, row: &S, target: f64) -> Result<()> {
        if row.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: row.dim(),
            });
        }
        self.features.extend((0..self.dim).map(|i| row.feature(i)));
        self.targets.push(target);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn value(&self, i: usize, feature: usize) -> f64 {
        self.features[i * self.dim + feature]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn targets_mut(&mut self) -> &mut [f64] {
        &mut self.targets
    }

    pub fn mean_target(&self) -> f64 {
        self.targets.iter().sum::<f64>() / self.targets.len() as f64
    }

    /// New dataset made of the given row indices (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut out = Self::new(self.dim);
        for &i in indices {
            out.features.extend_from_slice(self.row(i));
            out.targets.push(self.targets[i]);
        }
        out
    }
}

/// Sum of squared errors of `predict` over the dataset.
pub fn sse(data: &Dataset, mut predict: impl FnMut(&[f64]) -> f64) -> f64 {
    (0..data.len())
        .map(|i| {
            let e = predict(data.row(i)) - data.targets[i];
            e * e
        })
        .sum()
}
