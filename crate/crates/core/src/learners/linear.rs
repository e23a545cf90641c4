//! Ridge-regularized ordinary least squares with an appended bias feature.

use alloc::vec;
use alloc::vec::Vec;

use super::{Dataset, FeatureSource};
use crate::math::abs;
use crate::{Error, Result};

pub const DEFAULT_RIDGE: f64 = 1e-6;

/// `y = w[..d] . x + w[d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim + 1],
        }
    }

    pub fn from_weights(weights: Vec<f64>) -> Self {
        assert!(
            !weights.is_empty(),
            "linear model needs at least a bias weight"
        );
        Self { weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.weights[self.dim()]
    }

    #[inline]
    pub fn predict_unchecked<S: FeatureSource + ?Sized>(&self, x: &S) -> f64 {
        let d = self.dim();
        (0..d).map(|i| self.weights[i] * x.feature(i)).sum::<f64>() + self.weights[d]
    }

    pub fn predict<S: FeatureSource + ?Sized>(&self, x: &S) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &LinearModel, scale: f64) -> Result<()> {
        if other.weights.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        for (w, o) in self.weights.iter_mut().zip(&other.weights) {
            *w += scale * o;
        }
        Ok(())
    }
}

/// Minimizes `sum (w.[x;1] - y)^2 + ridge * |w|^2` through the normal equations.
///
/// With `ridge == 0` and a rank-deficient design, directions without support
/// in the data get zero weight.
pub fn fit_linear(data: &Dataset, ridge: f64) -> Result<LinearModel> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidParameter("ridge must be nonnegative"));
    }
    let p = data.dim() + 1;
    // augmented system [A^T A + ridge I | A^T y]
    let mut m = vec![0.0; p * (p + 1)];
    let at = |r: usize, c: usize| r * (p + 1) + c;
    let mut row = vec![1.0; p];
    for i in 0..data.len() {
        row[..p - 1].copy_from_slice(data.row(i));
        let y = data.targets()[i];
        for r in 0..p {
            let xr = row[r];
            if xr == 0.0 {
                continue;
            }
            for c in r..p {
                m[at(r, c)] += xr * row[c];
            }
            m[at(r, p)] += xr * y;
        }
    }
    for r in 0..p {
        for c in 0..r {
            m[at(r, c)] = m[at(c, r)];
        }
        m[at(r, r)] += ridge;
    }
    Ok(LinearModel {
        weights: solve_augmented(&mut m, p),
    })
}

/// Gaussian elimination with partial pivoting; near-zero pivots pin their
/// variable to zero.
fn solve_augmented(m: &mut [f64], p: usize) -> Vec<f64> {
    let w = p + 1;
    let scale = (0..p)
        .map(|i| abs(m[i * w + i]))
        .fold(0.0, f64::max)
        .max(1.0);
    let tol = 1e-12 * scale;
    let mut pivot_rows: Vec<Option<usize>> = vec![None; p];
    let mut next = 0;
    for col in 0..p {
        let (best, best_val) = (next..p)
            .map(|r| (r, abs(m[r * w + col])))
            .fold((next, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if next >= p || best_val <= tol {
            continue;
        }
        if best != next {
            for c in 0..w {
                m.swap(best * w + c, next * w + c);
            }
        }
        let piv = m[next * w + col];
        for r in 0..p {
            if r == next {
                continue;
            }
            let f = m[r * w + col] / piv;
            if f != 0.0 {
                for c in col..w {
                    m[r * w + c] -= f * m[next * w + c];
                }
            }
        }
        pivot_rows[col] = Some(next);
        next += 1;
    }
    (0..p)
        .map(|col| match pivot_rows[col] {
            Some(r) => m[r * w + p] / m[r * w + col],
            None => 0.0,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let data =
            Dataset::from_rows(&[(vec![0.0], 1.0), (vec![1.0], 3.0), (vec![2.0], 5.0)]).unwrap();
        let model = fit_linear(&data, 0.0).unwrap();
        assert!((model.weights()[0] - 2.0).abs() < 1e-9);
        assert!((model.bias() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_targets_zero_weights() {
        let data = Dataset::from_rows(&[
            (vec![1.0, 2.0], 0.0),
            (vec![3.0, -1.0], 0.0),
            (vec![0.5, 0.5], 0.0),
        ])
        .unwrap();
        let model = fit_linear(&data, DEFAULT_RIDGE).unwrap();
        assert!(model.weights().iter().all(|w| w.abs() < 1e-12));
    }

    #[test]
    fn single_point_ridge_shrinkage() {
        // x = 2, y = 4: normal equations give w = 4 * [2, 1] / (5 + ridge)
        // so the fitted value at x is 4 * 5 / (5 + ridge)
        let ridge = 0.1;
        let data = Dataset::from_rows(&[(vec![2.0], 4.0)]).unwrap();
        let model = fit_linear(&data, ridge).unwrap();
        assert!(model.weights().iter().all(|w| w.is_finite()));
        let fitted = model.predict(&[2.0][..]).unwrap();
        assert!((fitted - 20.0 / 5.1).abs() < 1e-12);
        assert!(fitted < 4.0);
    }

    #[test]
    fn rank_deficient_fit_still_interpolates() {
        let data = Dataset::from_rows(&[(vec![2.0], 4.0)]).unwrap();
        let model = fit_linear(&data, 0.0).unwrap();
        assert!((model.predict(&[2.0][..]).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        assert_eq!(fit_linear(&Dataset::new(1), 0.0), Err(Error::EmptyDataset));
    }

    #[test]
    fn add_scaled_accumulates() {
        let mut a = LinearModel::from_weights(vec![1.0, 2.0]);
        let b = LinearModel::from_weights(vec![2.0, -2.0]);
        a.add_scaled(&b, 0.5).unwrap();
        assert_eq!(a.weights(), &[2.0, 1.0]);
    }
}
