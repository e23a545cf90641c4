//! k-means clustering and the state-collapsing function built from it.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::{ActionId, Environment, Error, FeatureVector, Result};

/// Maps a vector to the index of its nearest center (squared Euclidean
/// distance, ties to the lowest index).
#[derive(Debug, Clone, PartialEq)]
pub struct StateCollapser {
    dim: usize,
    centers: Vec<f64>,
}

impl StateCollapser {
    pub fn from_centers(centers: Vec<Vec<f64>>) -> Result<Self> {
        let dim = centers
            .first()
            .map(Vec::len)
            .ok_or(Error::InvalidParameter("no centers"))?;
        let mut flat = Vec::with_capacity(dim * centers.len());
        for c in &centers {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.len(),
                });
            }
            if let Some(i) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
            flat.extend_from_slice(c);
        }
        Ok(Self { dim, centers: flat })
    }

    /// One-hot centers: collapses a one-hot encoding of `n` states to the state index.
    pub fn identity(n: usize) -> Self {
        let mut centers = vec![0.0; n * n];
        for i in 0..n {
            centers[i * n + i] = 1.0;
        }
        Self { dim: n, centers }
    }

    pub fn clusters(&self) -> usize {
        self.centers.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }

    pub fn centers(&self) -> impl Iterator<Item = &[f64]> {
        self.centers.chunks_exact(self.dim)
    }

    pub fn collapse(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(nearest(&self.centers, self.dim, x).0)
    }

    /// Euclidean distance from `x` to every center.
    pub fn distances(&self, x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        out.clear();
        out.extend(self.centers().map(|c| crate::math::sqrt(sq_dist(c, x))));
        Ok(())
    }

    /// Sum of squared distances from each point to its nearest center.
    pub fn inertia<P: AsRef<[f64]>>(&self, points: &[P]) -> f64 {
        points
            .iter()
            .map(|p| nearest(&self.centers, self.dim, p.as_ref()).1)
            .sum()
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centers: &[f64], dim: usize, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.chunks_exact(dim).enumerate() {
        let d = sq_dist(c, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Fitted clustering with its convergence record.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub collapser: StateCollapser,
    /// Inertia after each assignment step, in order.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeansFit {
    pub fn inertia(&self) -> f64 {
        self.inertia_history.last().copied().unwrap_or(0.0)
    }
}

/// Lloyd's algorithm from a k-means++ seeding.
///
/// Stops after `max_iters` assignment steps or once assignments no longer
/// change. A cluster left empty is reseeded at the point farthest from its
/// assigned center.
pub fn kmeans_fit<P: AsRef<[f64]>>(
    corpus: &[P],
    m: usize,
    max_iters: usize,
    rng: &mut dyn RngCore,
) -> Result<KMeansFit> {
    if m == 0 {
        return Err(Error::InvalidParameter("cluster count must be positive"));
    }
    if corpus.len() < m {
        return Err(Error::CorpusTooSmall {
            size: corpus.len(),
            clusters: m,
        });
    }
    let dim = corpus[0].as_ref().len();
    for p in corpus {
        if p.as_ref().len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.as_ref().len(),
            });
        }
    }
    let points: Vec<&[f64]> = corpus.iter().map(AsRef::as_ref).collect();
    let mut centers = plus_plus_init(&points, m, dim, rng);

    let n = points.len();
    let mut assignment = vec![usize::MAX; n];
    let mut dist = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(&centers, dim, p);
            if c != assignment[i] {
                assignment[i] = c;
                changed = true;
            }
            dist[i] = d;
            inertia += d;
        }
        iterations += 1;
        if let Some(&prev) = history.last() {
            debug_assert!(
                inertia <= prev * (1.0 + 1e-12) + 1e-12,
                "Lloyd step increased inertia"
            );
        }
        history.push(inertia);
        if !changed {
            break;
        }

        let mut sums = vec![0.0; m * dim];
        let mut sizes = vec![0usize; m];
        for (p, &c) in points.iter().zip(&assignment) {
            sizes[c] += 1;
            for (s, v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(p.iter()) {
                *s += v;
            }
        }
        for c in 0..m {
            if sizes[c] > 0 {
                let inv = 1.0 / sizes[c] as f64;
                for (dst, s) in centers[c * dim..(c + 1) * dim]
                    .iter_mut()
                    .zip(&sums[c * dim..(c + 1) * dim])
                {
                    *dst = s * inv;
                }
            }
        }
        for c in 0..m {
            if sizes[c] > 0 {
                continue;
            }
            // farthest point from its own (updated) center
            let mut far = (0, -1.0);
            for (i, p) in points.iter().enumerate() {
                let a = assignment[i];
                let d = sq_dist(&centers[a * dim..(a + 1) * dim], p);
                if d > far.1 {
                    far = (i, d);
                }
            }
            centers[c * dim..(c + 1) * dim].copy_from_slice(points[far.0]);
            assignment[far.0] = c;
        }
    }

    Ok(KMeansFit {
        collapser: StateCollapser { dim, centers },
        inertia_history: history,
        iterations,
    })
}

fn plus_plus_init(points: &[&[f64]], m: usize, dim: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    let n = points.len();
    let mut centers = Vec::with_capacity(m * dim);
    centers.extend_from_slice(points[rng.random_range(0..n)]);
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(&centers[..dim], p)).collect();
    for _ in 1..m {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            crate::math::sample_weighted(&d2, rng.random::<f64>())
        } else {
            rng.random_range(0..n)
        };
        let start = centers.len();
        centers.extend_from_slice(points[pick]);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(&centers[start..], p));
        }
    }
    centers
}

/// Collects observations under a uniform-random policy and clusters them.
///
/// The environment runs for `duration_steps` steps in total (resetting on
/// terminal steps and every `episode_cap` steps); the current observation is
/// kept every `sample_every` steps.
pub fn build_collapser_from_random_policy<E: Environment + ?Sized>(
    env: &mut E,
    duration_steps: usize,
    sample_every: usize,
    episode_cap: usize,
    m: usize,
    rng: &mut dyn RngCore,
) -> Result<KMeansFit> {
    let corpus = random_policy_corpus(env, duration_steps, sample_every, episode_cap, rng)?;
    if corpus.len() < m {
        return Err(Error::CorpusTooSmall {
            size: corpus.len(),
            clusters: m,
        });
    }
    kmeans_fit(&corpus, m, DEFAULT_MAX_ITERS, rng)
}

pub const DEFAULT_MAX_ITERS: usize = 100;

/// Observations sampled every `sample_every` steps of a uniform-random walk.
pub fn random_policy_corpus<E: Environment + ?Sized>(
    env: &mut E,
    duration_steps: usize,
    sample_every: usize,
    episode_cap: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<FeatureVector>> {
    if sample_every == 0 || episode_cap == 0 {
        return Err(Error::InvalidParameter(
            "sampling interval and episode cap must be positive",
        ));
    }
    let actions = env.action_count();
    let mut corpus = Vec::with_capacity(duration_steps / sample_every + 1);
    let mut state = env.reset(rng);
    let mut in_episode = 0;
    for step in 0..duration_steps {
        if step % sample_every == 0 {
            corpus.push(state.clone());
        }
        let out = env.step(ActionId(rng.random_range(0..actions)), rng)?;
        in_episode += 1;
        if out.terminal || in_episode >= episode_cap {
            state = env.reset(rng);
            in_episode = 0;
        } else {
            state = out.observation;
        }
    }
    Ok(corpus)
}
