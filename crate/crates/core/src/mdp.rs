//! Agent/environment contract, episode execution and discounted returns.

use alloc::vec::Vec;
use core::ops::Deref;

use rand::RngCore;

use crate::{Error, Result};

/// Dense, finite observation vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    /// Wraps `values`, rejecting NaN and infinities.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(v: FeatureVector) -> Self {
        v.0
    }
}

/// Index of a discrete action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ActionId(pub usize);

impl ActionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: FeatureVector,
    pub action: ActionId,
    pub reward: f64,
    pub next_state: FeatureVector,
    pub terminal: bool,
}

/// Ordered transitions of one episode.
///
/// Consecutive transitions chain (`next_state` of one is `state` of the
/// next) and only the last one may be terminal.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeTrace {
    transitions: Vec<Transition>,
}

impl EpisodeTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a trace from transitions, checking the chaining invariants.
    pub fn from_transitions(transitions: Vec<Transition>) -> Result<Self> {
        let mut trace = Self::new();
        for t in transitions {
            trace.push(t)?;
        }
        Ok(trace)
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if let Some(last) = self.transitions.last() {
            if last.terminal || last.next_state != t.state {
                return Err(Error::BrokenChain(self.transitions.len()));
            }
        }
        self.transitions.push(t);
        Ok(())
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.transitions.iter().map(|t| t.reward)
    }

    /// Undiscounted sum of rewards.
    pub fn total_reward(&self) -> f64 {
        self.rewards().sum()
    }

    pub fn ended_terminal(&self) -> bool {
        self.transitions.last().is_some_and(|t| t.terminal)
    }
}

/// Discount factor, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discount(f64);

impl Discount {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma < 1.0 {
            Ok(Self(gamma))
        } else {
            Err(Error::InvalidParameter("discount must lie in (0, 1)"))
        }
    }

    #[inline]
    pub fn gamma(self) -> f64 {
        self.0
    }
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub observation: FeatureVector,
    pub reward: f64,
    pub terminal: bool,
}

/// An episodic environment observed through fixed-length feature vectors.
///
/// The observation is treated as the state, even when the underlying task is
/// only partially observable.
pub trait Environment {
    fn observation_dim(&self) -> usize;

    fn action_count(&self) -> usize;

    /// Starts a new episode and returns the first observation.
    fn reset(&mut self, rng: &mut dyn RngCore) -> FeatureVector;

    fn step(&mut self, action: ActionId, rng: &mut dyn RngCore) -> Result<Step>;
}

/// Environment whose underlying state is a small integer.
pub trait DiscreteEnvironment: Environment {
    fn state_count(&self) -> usize;

    /// Id of the current state.
    fn state_id(&self) -> usize;
}

/// Chooses actions during an episode.
pub trait ActionSelector {
    fn select(&mut self, state: &FeatureVector, rng: &mut dyn RngCore) -> Result<ActionId>;
}

impl<F> ActionSelector for F
where
    F: FnMut(&FeatureVector, &mut dyn RngCore) -> ActionId,
{
    fn select(&mut self, state: &FeatureVector, rng: &mut dyn RngCore) -> Result<ActionId> {
        Ok(self(state, rng))
    }
}

/// Resets `env` and runs `policy` for at most `max_steps` steps.
///
/// The episode stops early only on a terminal transition.
pub fn run_episode<E, P>(
    env: &mut E,
    policy: &mut P,
    max_steps: usize,
    rng: &mut dyn RngCore,
) -> Result<EpisodeTrace>
where
    E: Environment + ?Sized,
    P: ActionSelector + ?Sized,
{
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be at least 1"));
    }
    let count = env.action_count();
    let mut state = env.reset(rng);
    let mut trace = EpisodeTrace::new();
    for _ in 0..max_steps {
        let action = policy.select(&state, rng)?;
        if action.0 >= count {
            return Err(Error::ActionOutOfRange {
                action: action.0,
                count,
            });
        }
        let step = env.step(action, rng)?;
        let terminal = step.terminal;
        trace.transitions.push(Transition {
            state: core::mem::replace(&mut state, step.observation.clone()),
            action,
            reward: step.reward,
            next_state: step.observation,
            terminal,
        });
        if terminal {
            break;
        }
    }
    Ok(trace)
}

/// `sum_t gamma^(t-1) r_t` over the trace.
pub fn discounted_return(trace: &EpisodeTrace, discount: Discount) -> f64 {
    let gamma = discount.gamma();
    let mut weight = 1.0;
    let mut total = 0.0;
    for r in trace.rewards() {
        total += weight * r;
        weight *= gamma;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::nchain::{NChain, RETURN};
    use crate::env::toy::ConstantEnv;
    use crate::seeded_rng;
    use alloc::vec;

    fn trace_with_rewards(rewards: &[f64]) -> EpisodeTrace {
        let s = FeatureVector::new(vec![0.0]).unwrap();
        let transitions = rewards
            .iter()
            .map(|&r| Transition {
                state: s.clone(),
                action: ActionId(0),
                reward: r,
                next_state: s.clone(),
                terminal: false,
            })
            .collect();
        EpisodeTrace::from_transitions(transitions).unwrap()
    }

    #[test]
    fn feature_vector_rejects_nan() {
        assert_eq!(
            FeatureVector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite(1))
        );
        assert!(FeatureVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn discount_bounds() {
        assert!(Discount::new(0.0).is_err());
        assert!(Discount::new(1.0).is_err());
        assert!(Discount::new(0.95).is_ok());
    }

    #[test]
    fn discounted_return_examples() {
        let half = Discount::new(0.5).unwrap();
        assert_eq!(
            discounted_return(&trace_with_rewards(&[1.0, 1.0, 1.0]), half),
            1.75
        );
        assert_eq!(
            discounted_return(&trace_with_rewards(&[5.0]), Discount::new(0.3).unwrap()),
            5.0
        );
        assert_eq!(
            discounted_return(&trace_with_rewards(&[0.0; 12]), half),
            0.0
        );
    }

    #[test]
    fn constant_env_fills_cap() {
        let mut env = ConstantEnv::new(1.0);
        let mut rng = seeded_rng(1);
        let mut policy = |_: &FeatureVector, _: &mut dyn RngCore| ActionId(0);
        let trace = run_episode(&mut env, &mut policy, 3, &mut rng).unwrap();
        assert_eq!(trace.len(), 3);
        assert!(trace.rewards().all(|r| r == 1.0));
    }

    #[test]
    fn nchain_return_without_slip() {
        let mut env = NChain::new(5).with_slip(0.0);
        let mut rng = seeded_rng(2);
        let mut policy = |_: &FeatureVector, _: &mut dyn RngCore| RETURN;
        let trace = run_episode(&mut env, &mut policy, 2, &mut rng).unwrap();
        assert_eq!(trace.len(), 2);
        let zero = env.observation_for(0);
        for t in trace.transitions() {
            assert_eq!(t.reward, 2.0);
            assert_eq!(t.next_state, zero);
        }
    }

    #[test]
    fn out_of_range_action_fails_fast() {
        let mut env = ConstantEnv::new(0.0);
        let mut rng = seeded_rng(3);
        let mut policy = |_: &FeatureVector, _: &mut dyn RngCore| ActionId(7);
        assert_eq!(
            run_episode(&mut env, &mut policy, 4, &mut rng),
            Err(Error::ActionOutOfRange {
                action: 7,
                count: 1
            })
        );
    }

    #[test]
    fn zero_step_cap_rejected() {
        let mut env = ConstantEnv::new(0.0);
        let mut rng = seeded_rng(3);
        let mut policy = |_: &FeatureVector, _: &mut dyn RngCore| ActionId(0);
        assert!(run_episode(&mut env, &mut policy, 0, &mut rng).is_err());
    }

    #[test]
    fn broken_chain_rejected() {
        let a = FeatureVector::new(vec![0.0]).unwrap();
        let b = FeatureVector::new(vec![1.0]).unwrap();
        let t = |s: &FeatureVector, n: &FeatureVector| Transition {
            state: s.clone(),
            action: ActionId(0),
            reward: 0.0,
            next_state: n.clone(),
            terminal: false,
        };
        assert_eq!(
            EpisodeTrace::from_transitions(vec![t(&a, &b), t(&a, &b)]),
            Err(Error::BrokenChain(1))
        );
    }
}
