//! Action selection: epsilon-uniform and IAUU.
//!
//! IAUU keeps a count `M(c, a)` of how often action `a` was taken from states
//! in cluster `c`. Exploration steps sample from the Gibbs distribution
//! `p(a) ∝ exp(-rho * M(c, a))`, which favours actions rarely tried in the
//! current cluster.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::cluster::StateCollapser;
use crate::math::{argmax, exp, ln, powf, sample_weighted};
use crate::qfunc::QFunction;
use crate::{ActionId, Result};

/// Dense `m x |A|` visit counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    clusters: usize,
    actions: usize,
    counts: Vec<u64>,
}

impl CountTable {
    pub fn new(clusters: usize, actions: usize) -> Self {
        Self {
            clusters,
            actions,
            counts: vec![0; clusters * actions],
        }
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    /// Number of counters stored.
    pub fn size(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, cluster: usize, action: ActionId) -> u64 {
        self.counts[cluster * self.actions + action.0]
    }

    pub fn row(&self, cluster: usize) -> &[u64] {
        &self.counts[cluster * self.actions..(cluster + 1) * self.actions]
    }

    pub fn increment(&mut self, cluster: usize, action: ActionId) {
        self.counts[cluster * self.actions + action.0] += 1;
    }

    pub fn clear(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
    }
}

/// Gibbs distribution `p(a) ∝ exp(-rho * counts[a])`.
pub fn iauu_distribution(counts: &[u64], rho: f64) -> Vec<f64> {
    mixed_distribution(counts, rho, 0.0)
}

/// `p(a) ∝ exp(-rho * counts[a]) + mix`, evaluated in log space so large
/// counts neither underflow nor swamp the uniform mass.
pub fn mixed_distribution(counts: &[u64], rho: f64, mix: f64) -> Vec<f64> {
    let mut logits: Vec<f64> = counts.iter().map(|&c| -rho * c as f64).collect();
    if mix > 0.0 {
        let log_mix = ln(mix);
        for l in &mut logits {
            let (hi, lo) = if *l > log_mix {
                (*l, log_mix)
            } else {
                (log_mix, *l)
            };
            *l = hi + libm::log1p(exp(lo - hi));
        }
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logits.iter().map(|l| exp(l - max)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum IauuVariant {
    /// Every action taken is counted.
    #[default]
    Plain,
    /// Adds `t^(-1/H)` uniform mass to the exploration distribution.
    UniformMix,
    /// Only exploration steps are counted.
    ExploreOnlyCounts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IauuConfig {
    /// Temperature; zero gives uniform exploration.
    pub rho: f64,
    pub variant: IauuVariant,
    /// Horizon `H` of the uniform-mix weight `t^(-1/H)`.
    pub horizon: usize,
}

impl Default for IauuConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            variant: IauuVariant::Plain,
            horizon: 80,
        }
    }
}

impl IauuConfig {
    /// Exploration distribution for one cluster's counts during episode `t` (1-based).
    pub fn distribution(&self, counts: &[u64], episode: usize) -> Vec<f64> {
        match self.variant {
            IauuVariant::UniformMix => {
                let mix = powf(episode.max(1) as f64, -1.0 / self.horizon.max(1) as f64);
                mixed_distribution(counts, self.rho, mix)
            }
            _ => iauu_distribution(counts, self.rho),
        }
    }
}

/// Outcome of one IAUU decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    pub action: ActionId,
    pub explored: bool,
}

/// IAUU step on precomputed action values.
///
/// With probability `1 - epsilon` the greedy action is taken, otherwise one is
/// sampled from the exploration distribution of `cluster`. The count table is
/// updated according to the variant.
pub fn iauu_choose(
    values: &[f64],
    cluster: usize,
    table: &mut CountTable,
    cfg: &IauuConfig,
    epsilon: f64,
    episode: usize,
    rng: &mut dyn RngCore,
) -> Choice {
    let explored = rng.random::<f64>() < epsilon;
    let action = if explored {
        let p = cfg.distribution(table.row(cluster), episode);
        ActionId(sample_weighted(&p, rng.random::<f64>()))
    } else {
        ActionId(argmax(values))
    };
    if explored || cfg.variant != IauuVariant::ExploreOnlyCounts {
        table.increment(cluster, action);
    }
    Choice { action, explored }
}

/// IAUU action selection for a function approximator.
///
/// Q is only evaluated on greedy steps.
#[allow(clippy::too_many_arguments)]
pub fn select_action<Q: QFunction + ?Sized>(
    q: &Q,
    state: &[f64],
    collapser: &StateCollapser,
    table: &mut CountTable,
    cfg: &IauuConfig,
    epsilon: f64,
    episode: usize,
    rng: &mut dyn RngCore,
) -> Result<Choice> {
    let cluster = collapser.collapse(state)?;
    let explored = rng.random::<f64>() < epsilon;
    let action = if explored {
        let p = cfg.distribution(table.row(cluster), episode);
        ActionId(sample_weighted(&p, rng.random::<f64>()))
    } else {
        ActionId(argmax(&q.action_values(state)?))
    };
    if explored || cfg.variant != IauuVariant::ExploreOnlyCounts {
        table.increment(cluster, action);
    }
    Ok(Choice { action, explored })
}

/// Greedy with probability `1 - epsilon`, uniformly random otherwise.
pub fn epsilon_uniform_select<Q: QFunction + ?Sized>(
    q: &Q,
    state: &[f64],
    epsilon: f64,
    rng: &mut dyn RngCore,
) -> Result<Choice> {
    let explored = rng.random::<f64>() < epsilon;
    let action = if explored {
        ActionId(rng.random_range(0..q.action_count()))
    } else {
        ActionId(argmax(&q.action_values(state)?))
    };
    Ok(Choice { action, explored })
}

/// Epsilon-uniform step on precomputed action values.
pub fn epsilon_uniform_choose(values: &[f64], epsilon: f64, rng: &mut dyn RngCore) -> Choice {
    let explored = rng.random::<f64>() < epsilon;
    let action = if explored {
        ActionId(rng.random_range(0..values.len()))
    } else {
        ActionId(argmax(values))
    };
    Choice { action, explored }
}
