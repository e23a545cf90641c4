//! Depth-limited CART regression trees with exact greedy split search.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{Dataset, FeatureSource};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 2,
            min_leaf: 1,
        }
    }
}

impl TreeParams {
    pub fn depth(max_depth: usize) -> Self {
        Self {
            max_depth,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Binary regression tree. Rows go left iff `x[feature] < threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    dim: usize,
}

impl RegressionTree {
    /// A depth-0 tree predicting `value` everywhere.
    pub fn constant(value: f64, dim: usize) -> Self {
        Self {
            nodes: alloc::vec![Node::Leaf { value }],
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Split thresholds as `(feature, threshold)` pairs.
    pub fn splits(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().filter_map(|n| match *n {
            Node::Split {
                feature, threshold, ..
            } => Some((feature, threshold)),
            Node::Leaf { .. } => None,
        })
    }

    /// Prediction without a dimension check.
    #[inline]
    pub fn predict_unchecked<S: FeatureSource + ?Sized>(&self, x: &S) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x.feature(feature) < threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
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

    /// Multiplies every leaf value by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for node in &mut self.nodes {
            if let Node::Leaf { value } = node {
                *value *= factor;
            }
        }
    }

    /// Plain-text dump, one node per line: `id kind feature threshold|value left right`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (id, node) in self.nodes.iter().enumerate() {
            let _ = match *node {
                Node::Leaf { value } => writeln!(out, "{id} leaf - {value} - -"),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    writeln!(out, "{id} split {feature} {threshold} {left} {right}")
                }
            };
        }
        out
    }
}

/// Fits a regression tree by greedy CART on squared error.
///
/// Candidate thresholds are midpoints between consecutive distinct values of
/// each feature. Equal-SSE candidates resolve to the lowest feature index,
/// then the lowest threshold. Growth stops at `max_depth`, when a node has
/// fewer than `2 * min_leaf` rows, or when its targets have no variance.
pub fn fit_tree(data: &Dataset, params: TreeParams) -> Result<RegressionTree> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let min_leaf = params.min_leaf.max(1);
    let mut builder = Builder {
        data,
        max_depth: params.max_depth,
        min_leaf,
        nodes: Vec::new(),
        scratch: Vec::with_capacity(data.len()),
        centered: Vec::with_capacity(data.len()),
    };
    let mut indices: Vec<usize> = (0..data.len()).collect();
    builder.grow(&mut indices, 0);
    Ok(RegressionTree {
        nodes: builder.nodes,
        dim: data.dim(),
    })
}

struct Builder<'a> {
    data: &'a Dataset,
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
    scratch: Vec<usize>,
    centered: Vec<f64>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    sse: f64,
}

impl Builder<'_> {
    fn grow(&mut self, indices: &mut [usize], depth: usize) -> usize {
        let targets = self.data.targets();
        let n = indices.len();
        let mean = indices.iter().map(|&i| targets[i]).sum::<f64>() / n as f64;
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: mean });

        if depth >= self.max_depth || n < 2 * self.min_leaf {
            return id;
        }
        let parent_sse: f64 = indices
            .iter()
            .map(|&i| {
                let d = targets[i] - mean;
                d * d
            })
            .sum();
        let scale: f64 = indices
            .iter()
            .map(|&i| targets[i] * targets[i])
            .sum::<f64>()
            + 1.0;
        let tol = 1e-12 * scale;
        if parent_sse <= tol {
            return id;
        }
        let Some(best) = self.best_split(indices, mean, tol) else {
            return id;
        };
        if best.sse >= parent_sse - tol {
            return id;
        }

        let mut split_at = 0;
        for k in 0..n {
            if self.data.value(indices[k], best.feature) < best.threshold {
                indices.swap(k, split_at);
                split_at += 1;
            }
        }
        // keep row order stable inside each child so ties stay deterministic
        indices[..split_at].sort_unstable();
        indices[split_at..].sort_unstable();
        let (lo, hi) = indices.split_at_mut(split_at);
        let left = self.grow(lo, depth + 1);
        let right = self.grow(hi, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&mut self, indices: &[usize], mean: f64, tol: f64) -> Option<Candidate> {
        let data = self.data;
        let targets = data.targets();
        let n = indices.len();
        let total: f64 = indices.iter().map(|&i| targets[i] - mean).sum();
        let total_sq: f64 = indices
            .iter()
            .map(|&i| {
                let d = targets[i] - mean;
                d * d
            })
            .sum();
        let mut best: Option<Candidate> = None;

        for feature in 0..data.dim() {
            self.scratch.clear();
            self.scratch.extend_from_slice(indices);
            self.scratch
                .sort_by(|&a, &b| data.value(a, feature).total_cmp(&data.value(b, feature)));
            self.centered.clear();
            self.centered
                .extend(self.scratch.iter().map(|&i| targets[i] - mean));

            let mut left_sum = 0.0;
            let mut left_sq = 0.0;
            for k in 1..n {
                let y = self.centered[k - 1];
                left_sum += y;
                left_sq += y * y;
                if k < self.min_leaf || n - k < self.min_leaf {
                    continue;
                }
                let lo = data.value(self.scratch[k - 1], feature);
                let hi = data.value(self.scratch[k], feature);
                if lo >= hi {
                    continue;
                }
                let right_sum = total - left_sum;
                let right_sq = total_sq - left_sq;
                let nl = k as f64;
                let nr = (n - k) as f64;
                let sse = (left_sq - left_sum * left_sum / nl).max(0.0)
                    + (right_sq - right_sum * right_sum / nr).max(0.0);
                let mut threshold = 0.5 * (lo + hi);
                if threshold <= lo {
                    threshold = hi;
                }
                let better = match &best {
                    None => true,
                    Some(b) => sse < b.sse - tol,
                };
                if better {
                    best = Some(Candidate {
                        feature,
                        threshold,
                        sse,
                    });
                }
            }
        }
        best
    }
}
