use std::sync::Arc;

use flipforge_core::{enumerate_component, fixtures, ActionMode, CircuitTable, Exec, Objective, Triangulation};
use flipforge_learn::ppo::{
    build_batch, clipped_objective, collect_rollouts, compute_gae, expansion_bonus, initial_state_weights, ppo_update,
    sample_initial_states, train, transition_loss, EnvStart, Sample, TrainInstance, TrainerConfig, Trajectory,
    VisitCounter,
};
use flipforge_learn::{ActorKind, Checkpoint, ModelConfig, PolicyNet, Tape};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(config: flipforge_core::PointConfig, cap: usize) -> TrainInstance {
    let dim = config.dim();
    let start = Triangulation::new(dim, config.pulling_triangulation().iter().copied());
    let table = CircuitTable::build(Arc::new(config));
    let comp = enumerate_component(&start, &table, cap, Exec::Sequential);
    let seeds = comp.keys().iter().map(|k| Triangulation::from_key(dim, k)).collect();
    TrainInstance { table, seeds }
}

fn small_model(dim: usize, actor: ActorKind) -> PolicyNet {
    PolicyNet::new(ModelConfig { dim, hidden: 8, encoder_layers: 1, actor, ..ModelConfig::default() }).unwrap()
}

fn small_trainer() -> TrainerConfig {
    TrainerConfig { horizon: 6, parallel_envs: 4, iterations: 3, lr: 1e-3, seed: 5, ..TrainerConfig::default() }
}

#[test]
fn initial_weights_follow_inverse_square_root_counts() {
    assert_eq!(initial_state_weights(&[1, 1, 1, 1]), vec![0.25; 4]);
    let w = initial_state_weights(&[1, 4]);
    assert!((w[0] - 2.0 / 3.0).abs() < 1e-15 && (w[1] - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(initial_state_weights(&[9]), vec![1.0]);
}

#[test]
fn initial_sampling_is_empirically_weighted() {
    let inst = instance(fixtures::square(), 10);
    let mut counter = VisitCounter::new();
    let second = inst.seeds[1].key();
    for _ in 0..3 {
        expansion_bonus(&mut counter, 0, &second, 0.0);
    }
    assert_eq!(counter.count(0, &second), 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = sample_initial_states(&inst.seeds, 0, &counter, 30_000, &mut rng).unwrap();
    let frac = draws.iter().filter(|&&i| i == 0).count() as f64 / draws.len() as f64;
    // binomial standard error ≈ 0.0027
    assert!((frac - 2.0 / 3.0).abs() < 0.015, "{frac}");
    let single = &inst.seeds[..1];
    assert!(sample_initial_states(single, 0, &counter, 50, &mut rng).unwrap().iter().all(|&i| i == 0));
    assert!(sample_initial_states(&[], 3, &counter, 1, &mut rng).is_err());
}

#[test]
fn bonus_decays_with_visits() {
    let inst = instance(fixtures::square(), 10);
    let key = inst.seeds[0].key();
    let mut counter = VisitCounter::new();
    let seq: Vec<f64> = (0..4).map(|_| expansion_bonus(&mut counter, 0, &key, 0.1)).collect();
    let expected = [0.1, 0.1 / 2f64.sqrt(), 0.1 / 3f64.sqrt(), 0.05];
    for (a, b) in seq.iter().zip(expected) {
        assert!((a - b).abs() < 1e-15);
    }
    // counts are per instance
    assert_eq!(expansion_bonus(&mut counter, 1, &key, 0.1), 0.1);
    assert_eq!(expansion_bonus(&mut counter, 0, &key, 0.0), 0.0);
}

#[test]
fn gae_limits() {
    let r = [1.0, -2.0, 0.5, 3.0];
    let v = [0.3, -0.1, 0.7, 0.2];
    let (adv, ret) = compute_gae(&r, &[0.0; 4], 1.0, 1.0);
    assert_eq!(adv, vec![2.5, 1.5, 3.5, 3.0]);
    assert_eq!(ret, adv);
    let (adv, ret) = compute_gae(&r, &v, 0.9, 0.0);
    for t in 0..4 {
        let next = if t < 3 { v[t + 1] } else { 0.0 };
        assert!((adv[t] - (r[t] + 0.9 * next - v[t])).abs() < 1e-15);
        assert!((ret[t] - adv[t] - v[t]).abs() < 1e-15);
    }
    let (adv, _) = compute_gae(&[0.7; 5], &[0.0; 5], 0.0, 0.95);
    assert_eq!(adv, vec![0.7; 5]);
    // λ = 1: discounted Monte Carlo return minus the baseline
    let (adv, _) = compute_gae(&r, &v, 0.9, 1.0);
    for t in 0..4 {
        let mc: f64 = (t..4).map(|k| 0.9f64.powi((k - t) as i32) * r[k]).sum();
        assert!((adv[t] - (mc - v[t])).abs() < 1e-12);
    }
}

#[test]
fn empty_horizon_gives_empty_rollouts() {
    let insts = vec![instance(fixtures::square(), 10)];
    let model = small_model(2, ActorKind::Snn);
    let starts = vec![EnvStart { instance: 0, state: insts[0].seeds[0].clone(), rng_seed: 1 }];
    let mut counter = VisitCounter::new();
    let out = collect_rollouts(
        &model,
        &insts,
        &starts,
        Objective::MinWeight,
        0,
        ActionMode::Sample,
        &mut counter,
        0.1,
        Exec::Sequential,
    );
    assert!(out[0].steps.is_empty());
}

#[test]
fn two_state_rollout_alternates() {
    // The trapezoid has two triangulations with different total edge length.
    let insts = vec![instance(fixtures::trapezoid(), 10)];
    assert_eq!(insts[0].seeds.len(), 2);
    let table = &insts[0].table;
    let w: Vec<f64> = insts[0].seeds.iter().map(|s| Objective::MinWeight.evaluate(s, table.config())).collect();
    let worse = if w[0] > w[1] { 0 } else { 1 };
    let gain = (w[0] - w[1]).abs();
    let model = small_model(2, ActorKind::Snn);
    let horizon = 7;
    let starts = vec![EnvStart { instance: 0, state: insts[0].seeds[worse].clone(), rng_seed: 3 }];
    let mut counter = VisitCounter::new();
    let out = collect_rollouts(
        &model,
        &insts,
        &starts,
        Objective::MinWeight,
        horizon,
        ActionMode::Argmax,
        &mut counter,
        0.0,
        Exec::Sequential,
    );
    let steps = &out[0].steps;
    assert_eq!(steps.len(), horizon);
    for (t, s) in steps.iter().enumerate() {
        let expected = if t % 2 == 0 { gain } else { -gain };
        assert!((s.reward - expected).abs() < 1e-12);
        assert_eq!(s.shaped_reward, s.reward);
        assert_eq!(s.log_prob, 0.0);
    }
    assert!((out[0].plain_return() - gain).abs() < 1e-12);
}

#[test]
fn bonus_post_pass_counts_in_time_order() {
    let insts = vec![instance(fixtures::square(), 10)];
    let model = small_model(2, ActorKind::Snn);
    let starts: Vec<EnvStart> =
        (0..2).map(|e| EnvStart { instance: 0, state: insts[0].seeds[0].clone(), rng_seed: e }).collect();
    let mut counter = VisitCounter::new();
    let out = collect_rollouts(
        &model,
        &insts,
        &starts,
        Objective::MinWeight,
        2,
        ActionMode::Sample,
        &mut counter,
        1.0,
        Exec::Sequential,
    );
    // Both envs alternate between the two states; visits are numbered
    // t=0: env0, env1 (state B), t=1: env0, env1 (state A).
    let bonus = |t: usize, e: usize| out[e].steps[t].shaped_reward - out[e].steps[t].reward;
    let inv = |n: f64| 1.0 / n.sqrt();
    assert!((bonus(0, 0) - inv(1.0)).abs() < 1e-15);
    assert!((bonus(0, 1) - inv(2.0)).abs() < 1e-15);
    assert!((bonus(1, 0) - inv(1.0)).abs() < 1e-15);
    assert!((bonus(1, 1) - inv(2.0)).abs() < 1e-15);
}

fn rollouts(insts: &[TrainInstance], model: &PolicyNet, horizon: usize) -> Vec<Trajectory> {
    let starts: Vec<EnvStart> = (0..4)
        .map(|e| {
            let inst = &insts[e % insts.len()];
            EnvStart { instance: e % insts.len(), state: inst.seeds[e % inst.seeds.len()].clone(), rng_seed: e as u64 }
        })
        .collect();
    let mut counter = VisitCounter::new();
    collect_rollouts(
        model,
        insts,
        &starts,
        Objective::MinWeight,
        horizon,
        ActionMode::Sample,
        &mut counter,
        0.1,
        Exec::Sequential,
    )
}

#[test]
fn fresh_update_has_unit_ratio_and_lr_zero_is_a_no_op() {
    let insts = vec![instance(fixtures::cube(), 100), instance(fixtures::bipyramid(), 100)];
    let mut model = small_model(3, ActorKind::Snn);
    let trajs = rollouts(&insts, &model, 5);
    let config = TrainerConfig { lr: 0.0, normalize_advantages: false, ..TrainerConfig::default() };
    let batch = build_batch(&trajs, &config);
    let before = model.params().clone();
    let report = ppo_update(&mut model, &insts, &batch, &config, 1, Exec::Sequential).unwrap();
    let mean_adv = batch.iter().map(|s| s.advantage).sum::<f64>() / batch.len() as f64;
    assert!((report.policy_loss + mean_adv).abs() < 1e-9, "{report:?} vs {mean_adv}");
    assert_eq!(report.clip_fraction, 0.0);
    for (a, b) in before.iter().zip(model.params().iter()) {
        assert_eq!(a.value, b.value);
    }
    // ratios are exactly one at collection time
    for s in &batch {
        let tape = Tape::new();
        let terms = transition_loss(&tape, &model, &insts, s, &config, batch.len()).unwrap();
        assert!((terms.ratio - 1.0).abs() < 1e-12);
    }
}

#[test]
fn zero_advantage_gives_no_policy_gradient() {
    let insts = vec![instance(fixtures::cube(), 100)];
    let model = small_model(3, ActorKind::Snn);
    let trajs = rollouts(&insts, &model, 3);
    let config = TrainerConfig::default();
    let s = &trajs[0].steps[0];
    let sample = Sample { instance: 0, transition: s, advantage: 0.0, ret: 1.0 };
    let tape = Tape::new();
    let terms = transition_loss(&tape, &model, &insts, &sample, &config, 1).unwrap();
    let grads = tape.backward(terms.policy).unwrap().for_params(model.params());
    assert!(grads.iter().all(|g| g.data().iter().all(|&x| x == 0.0)));
}

#[test]
fn uniform_policy_entropy_term() {
    let insts = vec![instance(fixtures::cube(), 100)];
    let mut model = small_model(3, ActorKind::Snn);
    let out = model.params().index_of("actor.out").unwrap();
    model.params_mut().value_mut(out).data_mut().fill(0.0);
    let trajs = rollouts(&insts, &model, 2);
    let s = &trajs[0].steps[0];
    let k = s.actions.len() as f64;
    let sample = Sample { instance: 0, transition: s, advantage: 0.3, ret: 0.0 };
    let tape = Tape::new();
    let terms = transition_loss(&tape, &model, &insts, &sample, &TrainerConfig::default(), 1).unwrap();
    assert!((terms.entropy.item() + k.ln()).abs() < 1e-12);
}

#[test]
fn four_action_entropy_is_minus_log_four() {
    // Every diagonal of a convex heptagon triangulation is flippable.
    let insts = vec![instance(fixtures::ngon(7), 10)];
    let mut model = small_model(2, ActorKind::Snn);
    let out = model.params().index_of("actor.out").unwrap();
    model.params_mut().value_mut(out).data_mut().fill(0.0);
    let trajs = rollouts(&insts, &model, 1);
    let step = &trajs[0].steps[0];
    assert_eq!(step.actions.len(), 4);
    let sample = Sample { instance: 0, transition: step, advantage: 0.0, ret: 0.0 };
    let tape = Tape::new();
    let terms = transition_loss(&tape, &model, &insts, &sample, &TrainerConfig::default(), 1).unwrap();
    assert!((terms.entropy.item() + 4f64.ln()).abs() < 1e-12);
}

proptest! {
    #[test]
    fn clipped_objective_never_exceeds_unclipped(ratio in 0.0f64..3.0, adv in -5.0f64..5.0, clip in 0.01f64..0.5) {
        let c = clipped_objective(ratio, adv, clip);
        prop_assert!(c <= ratio * adv + 1e-15);
        prop_assert!(c <= ratio.clamp(1.0 - clip, 1.0 + clip) * adv + 1e-15);
    }
}

#[test]
fn zero_iterations_return_the_initial_model() {
    let insts = vec![instance(fixtures::cube(), 100)];
    let model = small_model(3, ActorKind::Snn);
    let dir = tempfile::tempdir().unwrap();
    let config = TrainerConfig { iterations: 0, ..small_trainer() };
    let out = train(&insts, Objective::MinWeight, model.clone(), &config, Some(dir.path()), Exec::Auto).unwrap();
    assert!(out.curve.is_empty());
    let bytes = std::fs::read(dir.path().join("model.ckpt")).unwrap();
    assert_eq!(bytes, model.to_checkpoint().to_bytes());
    assert_eq!(std::fs::read_to_string(dir.path().join("curve.jsonl")).unwrap(), "");
}

#[test]
fn training_is_deterministic_across_execution_modes() {
    let insts = vec![instance(fixtures::cube(), 100), instance(fixtures::cyclic(7, 3), 100)];
    let config = small_trainer();
    let run = |exec: Exec| {
        let dir = tempfile::tempdir().unwrap();
        let model = small_model(3, ActorKind::Snn);
        train(&insts, Objective::MinWeight, model, &config, Some(dir.path()), exec).unwrap();
        let curve = std::fs::read(dir.path().join("curve.jsonl")).unwrap();
        let ckpt = std::fs::read(dir.path().join("model.ckpt")).unwrap();
        (curve, ckpt)
    };
    let a = run(Exec::Parallel);
    let b = run(Exec::Parallel);
    let c = run(Exec::Sequential);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(String::from_utf8(a.0).unwrap().lines().count(), 3);
    let ck = Checkpoint::from_bytes(&a.1).unwrap();
    assert!(PolicyNet::from_checkpoint(&ck).is_ok());
}

#[test]
fn every_actor_kind_trains() {
    let insts = vec![instance(fixtures::cube(), 100)];
    for actor in [ActorKind::Snn, ActorKind::EgnnOnly, ActorKind::PoolMlp, ActorKind::NlsAccept] {
        let model = small_model(3, actor);
        let out = train(&insts, Objective::MinWeight, model.clone(), &small_trainer(), None, Exec::Auto).unwrap();
        assert_eq!(out.curve.len(), 3);
        assert!(out.curve.iter().all(|r| r.losses.total_loss.is_finite()));
        assert_ne!(out.model.params().iter().next().unwrap().value, model.params().iter().next().unwrap().value);
    }
}

#[test]
fn frst_task_ends_on_success() {
    let config = fixtures::lattice_square();
    let corners = Triangulation::from_tuples(2, &[&[0, 2, 6], &[2, 6, 8]]);
    let table = CircuitTable::build(Arc::new(config));
    let insts = vec![TrainInstance { table, seeds: vec![corners.clone()] }];
    let model = small_model(2, ActorKind::Snn);
    let starts = vec![EnvStart { instance: 0, state: corners, rng_seed: 2 }];
    let mut counter = VisitCounter::new();
    let out = collect_rollouts(
        &model,
        &insts,
        &starts,
        Objective::FrstReach,
        400,
        ActionMode::Sample,
        &mut counter,
        0.0,
        Exec::Sequential,
    );
    let steps = &out[0].steps;
    let last = steps.last().unwrap();
    if last.done {
        assert_eq!(last.reward, 1.0);
        assert!(steps[..steps.len() - 1].iter().all(|s| !s.done && s.reward == 0.0));
    } else {
        assert_eq!(steps.len(), 400);
    }
}
