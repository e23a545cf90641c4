use geql_core::agents::planning::value_iteration;
use geql_core::agents::{
    train_baseline, train_geql, train_rmax, train_tabular, AgentConfig, ApproximatorKind,
    Exploration, RMaxAgent, RMaxConfig,
};
use geql_core::cluster::StateCollapser;
use geql_core::env::nchain::{NChain, FORWARD, RETURN};
use geql_core::env::toy::ModelEnv;
use geql_core::explore::IauuConfig;
use geql_core::learners::TreeParams;
use geql_core::qfunc::{boost_step, greedy_action, BoostedQ, LearningSchedule, QFunction};
use geql_core::{run_episode, seeded_rng, ActionId, Environment, FeatureVector};
use rand::RngCore;

fn one_hot(i: usize, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn geql_on(env: &mut ModelEnv, cfg: &AgentConfig, seed: u64) -> BoostedQ {
    let states = env.observation_dim();
    train_geql(
        env,
        cfg,
        &StateCollapser::identity(states),
        &mut seeded_rng(seed),
        &mut |_, _| {},
    )
    .unwrap()
    .model
}

#[test]
fn geql_finds_the_paying_arm() {
    let cfg = AgentConfig {
        episodes: 50,
        max_steps: 10,
        ..AgentConfig::default()
    };
    let q = geql_on(&mut ModelEnv::bandit(), &cfg, 1);
    assert_eq!(greedy_action(&q, &[1.0]).unwrap(), ActionId(1));
}

#[test]
fn geql_policy_matches_value_iteration_on_two_state_chain() {
    let mut env = ModelEnv::two_state_chain();
    let exact = value_iteration(env.model(), 0.95, 1e-12);
    let cfg = AgentConfig {
        episodes: 200,
        max_steps: 20,
        ..AgentConfig::default()
    };
    let q = geql_on(&mut env, &cfg, 3);
    for s in 0..2 {
        assert_eq!(
            greedy_action(&q, &one_hot(s, 2)).unwrap(),
            exact.greedy_action(s),
            "state {s}"
        );
    }
}

fn baseline_on_bandit(kind: ApproximatorKind, episodes: usize) -> ActionId {
    let cfg = AgentConfig {
        episodes,
        max_steps: 10,
        exploration: Exploration::Uniform,
        batch_period: 10,
        batch_trees: 50,
        ..AgentConfig::default()
    };
    let run = train_baseline(
        &mut ModelEnv::bandit(),
        kind,
        &cfg,
        None,
        &mut seeded_rng(5),
        &mut |_, _| {},
    )
    .unwrap();
    greedy_action(&run.model, &[1.0]).unwrap()
}

#[test]
fn linear_baseline_finds_the_paying_arm() {
    assert_eq!(
        baseline_on_bandit(ApproximatorKind::Linear, 50),
        ActionId(1)
    );
}

#[test]
fn forest_baseline_finds_the_paying_arm() {
    assert_eq!(
        baseline_on_bandit(ApproximatorKind::Forest, 100),
        ActionId(1)
    );
}

#[test]
fn batchboost_baseline_finds_the_paying_arm() {
    assert_eq!(
        baseline_on_bandit(ApproximatorKind::BatchBoost, 100),
        ActionId(1)
    );
}

#[test]
fn without_exploration_the_chain_agent_keeps_returning() {
    // zero-initialised ties break to the lowest action, which is RETURN
    let mut env = NChain::new(5).with_slip(0.0);
    let cfg = AgentConfig {
        schedule: LearningSchedule {
            epsilon0: 0.0,
            ..LearningSchedule::default()
        },
        exploration: Exploration::Uniform,
        episodes: 20,
        max_steps: 50,
        ..AgentConfig::default()
    };
    assert_eq!(RETURN, ActionId(0));
    let run = train_tabular(&mut env, &cfg, &mut seeded_rng(0)).unwrap();
    assert!(run.rewards.iter().all(|&r| r == 100.0), "{:?}", run.rewards);
}

#[test]
fn iauu_at_zero_temperature_explores_like_uniform() {
    let base = AgentConfig {
        episodes: 30,
        max_steps: 40,
        exploration: Exploration::Uniform,
        ..AgentConfig::default()
    };
    let flat = AgentConfig {
        exploration: Exploration::Iauu(IauuConfig {
            rho: 0.0,
            ..IauuConfig::default()
        }),
        ..base
    };
    // same action law, so the per-seed averages share a mean
    let sample = |cfg: &AgentConfig| -> Vec<f64> {
        (0..400)
            .map(|seed| {
                let run = train_tabular(&mut NChain::new(5), cfg, &mut seeded_rng(seed)).unwrap();
                run.rewards.iter().sum::<f64>() / run.rewards.len() as f64
            })
            .collect()
    };
    let moments = |xs: &[f64]| {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v / n)
    };
    let ((u, su), (i, si)) = (moments(&sample(&base)), moments(&sample(&flat)));
    let se = (su + si).sqrt();
    assert!((u - i).abs() < 4.0 * se, "{u} vs {i} (se {se})");
}

#[test]
fn rmax_stays_optimistic_until_everything_is_known() {
    let mut env = NChain::new(5);
    let exact = value_iteration(&env.model(), 0.95, 1e-12);
    let cfg = RMaxConfig {
        max_steps: 8,
        ..RMaxConfig::default()
    };
    let run = train_rmax(&mut env, &cfg, 1, &mut seeded_rng(6)).unwrap();
    let agent: &RMaxAgent = &run.model;
    assert!(!agent.all_known());
    for s in 0..5 {
        assert!(agent.q().max_value(s) >= exact.max_value(s) - 1e-9);
    }
}

#[test]
fn rmax_learns_to_always_go_forward() {
    let mut env = NChain::new(5);
    let exact = value_iteration(&env.model(), 0.95, 1e-12);
    let run = train_rmax(&mut env, &RMaxConfig::default(), 100, &mut seeded_rng(7)).unwrap();
    assert!(run.model.all_known());
    for s in 0..5 {
        assert_eq!(exact.greedy_action(s), FORWARD);
        assert_eq!(run.model.act(s), FORWARD, "state {s}");
    }
}

#[test]
fn training_is_reproducible_and_grows_one_tree_per_episode() {
    let mut env = NChain::new(5);
    let cfg = AgentConfig {
        episodes: 25,
        max_steps: 30,
        ..AgentConfig::default()
    };
    let book = StateCollapser::identity(5);
    let train = |env: &mut NChain| {
        train_geql(env, &cfg, &book, &mut seeded_rng(11), &mut |_, _| {}).unwrap()
    };
    let (a, b) = (train(&mut env), train(&mut env));
    assert_eq!(a.model.len(), 25);
    assert_eq!(a, b);
}

#[test]
fn myopic_boosting_never_increases_the_residual() {
    // with gamma = 0 and unit step each stage refits what remains of the rewards
    let mut env = ModelEnv::three_state();
    let mut rng = seeded_rng(13);
    let mut policy =
        |_: &FeatureVector, rng: &mut dyn RngCore| ActionId((rng.next_u32() % 2) as usize);
    let trace = run_episode(&mut env, &mut policy, 60, &mut rng).unwrap();
    let mut q = BoostedQ::new(3, 2);
    let sse = |q: &BoostedQ| {
        trace
            .transitions()
            .iter()
            .map(|t| (t.reward - q.q_value(&t.state, t.action).unwrap()).powi(2))
            .sum::<f64>()
    };
    let mut last = sse(&q);
    for _ in 0..20 {
        boost_step(&mut q, &trace, 1.0, 0.0, TreeParams::default()).unwrap();
        let now = sse(&q);
        assert!(now <= last + 1e-12, "{now} > {last}");
        last = now;
    }
    assert!(last < sse(&BoostedQ::new(3, 2)));
}
