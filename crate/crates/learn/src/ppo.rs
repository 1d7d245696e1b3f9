//! PPO with GAE, a count-based expansion bonus and weighted initial-state
//! sampling, over flip environments built from circuit tables.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use flipforge_core::search::{argmax, sample_softmax, Evaluator};
use flipforge_core::{ActionMode, CircuitTable, Exec, FlipAction, Objective, TriKey, Triangulation};

use crate::params::Adam;
use crate::policy::{ActorKind, ModelError, PolicyNet, StateGraph};
use crate::tape::{Tape, Var};
use crate::tensor::Tensor;

/// Checkpoints are written every this many iterations.
pub const CHECKPOINT_EVERY: usize = 50;

/// Gradients are summed in this many fixed chunks, so the result does not
/// depend on the thread count.
const GRAD_CHUNKS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerConfig {
    pub horizon: usize,
    pub parallel_envs: usize,
    pub ppo_epochs: usize,
    pub iterations: usize,
    pub lr: f64,
    pub clip: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub bonus_coef: f64,
    pub normalize_advantages: bool,
    pub seed: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            horizon: 50,
            parallel_envs: 128,
            ppo_epochs: 1,
            iterations: 2000,
            lr: 1e-4,
            clip: 0.1,
            gamma: 0.99,
            gae_lambda: 0.95,
            value_coef: 0.5,
            entropy_coef: 0.001,
            bonus_coef: 0.1,
            normalize_advantages: true,
            seed: 0,
        }
    }
}

impl TrainerConfig {
    pub fn check(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.to_string()));
        if self.parallel_envs == 0 || self.ppo_epochs == 0 {
            return bad("parallel_envs and ppo_epochs must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) || !(self.gae_lambda >= 0.0 && self.gae_lambda <= 1.0) {
            return bad("gamma must lie in (0, 1] and gae_lambda in [0, 1]");
        }
        if !(self.clip > 0.0)
            || self.lr < 0.0
            || self.value_coef < 0.0
            || self.entropy_coef < 0.0
            || self.bonus_coef < 0.0
        {
            return bad("clip must be positive; lr and loss coefficients non-negative");
        }
        Ok(())
    }

    fn adam(&self) -> Adam {
        Adam { lr: self.lr, ..Adam::default() }
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid trainer config: {0}")]
    Config(String),
    #[error("no seed triangulations for instance {0}")]
    EmptySeeds(usize),
    #[error("no training instances")]
    NoInstances,
    #[error("non-finite loss at iteration {iteration}: {report:?}")]
    NonFinite { iteration: usize, report: LossReport },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// One training polytope with its seed triangulations.
pub struct TrainInstance {
    pub table: CircuitTable,
    pub seeds: Vec<Triangulation>,
}

/// Visit counts per (instance, state); unseen states count as one.
#[derive(Debug, Clone, Default)]
pub struct VisitCounter {
    counts: HashMap<(usize, TriKey), u64>,
}

impl VisitCounter {
    pub fn new() -> Self {
        VisitCounter::default()
    }

    pub fn count(&self, instance: usize, key: &TriKey) -> u64 {
        self.counts.get(&(instance, key.clone())).copied().unwrap_or(1)
    }

    fn increment(&mut self, instance: usize, key: &TriKey) {
        *self.counts.entry((instance, key.clone())).or_insert(1) += 1;
    }
}

/// `β·N^{-1/2}` with the count before this visit; then records the visit.
pub fn expansion_bonus(counter: &mut VisitCounter, instance: usize, key: &TriKey, beta: f64) -> f64 {
    let n = counter.count(instance, key);
    counter.increment(instance, key);
    beta / (n as f64).sqrt()
}

/// Sampling probabilities `∝ N^{-1/2}` for seeds with the given counts.
pub fn initial_state_weights(counts: &[u64]) -> Vec<f64> {
    let w: Vec<f64> = counts.iter().map(|&n| 1.0 / (n as f64).sqrt()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Draws `n` seed indices of `instance` with replacement.
pub fn sample_initial_states<R: Rng>(
    seeds: &[Triangulation],
    instance: usize,
    counter: &VisitCounter,
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>, TrainError> {
    if seeds.is_empty() {
        return Err(TrainError::EmptySeeds(instance));
    }
    let counts: Vec<u64> = seeds.iter().map(|s| counter.count(instance, &s.key())).collect();
    let dist = WeightedIndex::new(initial_state_weights(&counts)).expect("positive weights");
    Ok((0..n).map(|_| dist.sample(rng)).collect())
}

/// One step of one environment.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Triangulation,
    /// Flippable actions at `state`, in table order.
    pub actions: Vec<FlipAction>,
    /// Index into the decision logits (`[reject, accept]` for acceptance
    /// policies).
    pub choice: usize,
    pub log_prob: f64,
    pub value: f64,
    pub reward: f64,
    /// `reward` plus the expansion bonus.
    pub shaped_reward: f64,
    pub next_key: TriKey,
    /// The episode ended on this step.
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub instance: usize,
    pub steps: Vec<Transition>,
}

impl Trajectory {
    pub fn plain_return(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    pub fn shaped_return(&self) -> f64 {
        self.steps.iter().map(|s| s.shaped_reward).sum()
    }
}

/// Environment start for [`collect_rollouts`].
#[derive(Debug, Clone)]
pub struct EnvStart {
    pub instance: usize,
    pub state: Triangulation,
    pub rng_seed: u64,
}

/// Runs every environment for up to `horizon` steps against a fixed
/// parameter snapshot, then adds expansion bonuses in `(t, env)` order.
#[allow(clippy::too_many_arguments)]
pub fn collect_rollouts(
    model: &PolicyNet,
    instances: &[TrainInstance],
    starts: &[EnvStart],
    objective: Objective,
    horizon: usize,
    mode: ActionMode,
    counter: &mut VisitCounter,
    beta: f64,
    exec: Exec,
) -> Vec<Trajectory> {
    let mut trajectories = exec.map(starts, |s| rollout(model, &instances[s.instance], s, objective, horizon, mode));
    let longest = trajectories.iter().map(|t| t.steps.len()).max().unwrap_or(0);
    for t in 0..longest {
        for traj in trajectories.iter_mut() {
            if let Some(step) = traj.steps.get_mut(t) {
                step.shaped_reward = step.reward + expansion_bonus(counter, traj.instance, &step.next_key, beta);
            }
        }
    }
    trajectories
}

fn rollout(
    model: &PolicyNet,
    inst: &TrainInstance,
    start: &EnvStart,
    objective: Objective,
    horizon: usize,
    mode: ActionMode,
) -> Trajectory {
    let table = &inst.table;
    let mut rng = ChaCha8Rng::seed_from_u64(start.rng_seed);
    let mut eval = Evaluator::new(table, objective);
    let mut cur = start.state.clone();
    let mut steps = Vec::with_capacity(horizon);
    let nls = model.config().actor == ActorKind::NlsAccept;
    for _ in 0..horizon {
        let actions = table.flippable(&cur);
        if actions.is_empty() {
            break;
        }
        let (logits, value) = model.evaluate(table.config(), &cur, &actions);
        let choice = match mode {
            ActionMode::Argmax => argmax(&logits),
            ActionMode::Sample => sample_softmax(&logits, &mut rng),
        };
        let log_prob = log_softmax(&logits)[choice];
        let next = if nls {
            let proposal = rng.random_range(0..actions.len());
            if choice == 1 {
                table.apply(&cur, &actions[proposal]).expect("fresh action")
            } else {
                cur.clone()
            }
        } else {
            table.apply(&cur, &actions[choice]).expect("fresh action")
        };
        let before = eval.value(&cur);
        let after = eval.value(&next);
        let reward = objective.reward(before, after);
        let done = objective == Objective::FrstReach && after >= 1.0;
        steps.push(Transition {
            state: cur,
            actions,
            choice,
            log_prob,
            value,
            reward,
            shaped_reward: reward,
            next_key: next.key(),
            done,
        });
        cur = next;
        if done {
            break;
        }
    }
    Trajectory { instance: start.instance, steps }
}

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z = logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln() + m;
    logits.iter().map(|l| l - z).collect()
}

/// Advantages and returns of one trajectory. `values[t]` estimates the
/// state before step `t`; the bootstrap after the last step is zero.
pub fn compute_gae(rewards: &[f64], values: &[f64], gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(rewards.len(), values.len(), "one value per reward");
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let next = if t + 1 < n { values[t + 1] } else { 0.0 };
        let delta = rewards[t] + gamma * next - values[t];
        running = delta + gamma * lambda * running;
        adv[t] = running;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// A transition ready for the update.
#[derive(Debug, Clone)]
pub struct Sample<'a> {
    pub instance: usize,
    pub transition: &'a Transition,
    pub advantage: f64,
    pub ret: f64,
}

/// Flattens trajectories in `(env, t)` order with GAE targets, normalizing
/// advantages across the batch when requested.
pub fn build_batch<'a>(trajectories: &'a [Trajectory], config: &TrainerConfig) -> Vec<Sample<'a>> {
    let mut batch = Vec::new();
    for traj in trajectories {
        let rewards: Vec<f64> = traj.steps.iter().map(|s| s.shaped_reward).collect();
        let values: Vec<f64> = traj.steps.iter().map(|s| s.value).collect();
        let (adv, ret) = compute_gae(&rewards, &values, config.gamma, config.gae_lambda);
        for ((t, a), r) in traj.steps.iter().zip(adv).zip(ret) {
            batch.push(Sample { instance: traj.instance, transition: t, advantage: a, ret: r });
        }
    }
    if config.normalize_advantages && batch.len() > 1 {
        let n = batch.len() as f64;
        let mean = batch.iter().map(|s| s.advantage).sum::<f64>() / n;
        let var = batch.iter().map(|s| (s.advantage - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt().max(1e-8);
        for s in &mut batch {
            s.advantage = (s.advantage - mean) / std;
        }
    }
    batch
}

/// `min(ρÂ, clip(ρ, 1−ε, 1+ε)Â)`.
pub fn clipped_objective(ratio: f64, advantage: f64, clip: f64) -> f64 {
    (ratio * advantage).min(ratio.clamp(1.0 - clip, 1.0 + clip) * advantage)
}

/// Per-transition loss terms, each already divided by the batch size.
pub struct LossTerms<'t> {
    pub policy: Var<'t>,
    pub value: Var<'t>,
    /// Negative entropy of the decision distribution.
    pub entropy: Var<'t>,
    pub ratio: f64,
}

impl<'t> LossTerms<'t> {
    pub fn total(&self, config: &TrainerConfig) -> Var<'t> {
        self.policy.add(self.value.scale(config.value_coef)).add(self.entropy.scale(config.entropy_coef))
    }
}

pub fn transition_loss<'t>(
    tape: &'t Tape,
    model: &PolicyNet,
    instances: &[TrainInstance],
    sample: &Sample,
    config: &TrainerConfig,
    batch_size: usize,
) -> Result<LossTerms<'t>, ModelError> {
    let tr = sample.transition;
    let table = &instances[sample.instance].table;
    let g = StateGraph::new(table.config(), &tr.state);
    let enc = model.encode(tape, &g);
    let logits = model.decision_logits(tape, &g, &enc, &tr.actions)?;
    let all: std::rc::Rc<[usize]> = (0..logits.value().cols()).collect::<Vec<_>>().into();
    let logp = logits.log_softmax_masked(all.clone());
    let probs = logits.softmax_masked(all);
    let inv_b = 1.0 / batch_size as f64;

    let ratio = logp.pick(0, tr.choice).sub(tape.leaf(Tensor::scalar(tr.log_prob))).exp();
    let unclipped = ratio.scale(sample.advantage);
    let clipped = ratio.clamp(1.0 - config.clip, 1.0 + config.clip).scale(sample.advantage);
    let policy = unclipped.minimum(clipped).scale(-inv_b);
    let value = model.value(tape, &enc).sub(tape.leaf(Tensor::scalar(sample.ret))).square().sum().scale(inv_b);
    let entropy = probs.mul(logp).sum().scale(inv_b);
    Ok(LossTerms { policy, value, entropy, ratio: ratio.item() })
}

/// Batch means of the loss terms of one update.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy_loss: f64,
    pub total_loss: f64,
    pub clip_fraction: f64,
    pub transitions: usize,
}

impl LossReport {
    fn is_finite(&self) -> bool {
        [self.policy_loss, self.value_loss, self.entropy_loss, self.total_loss].iter().all(|x| x.is_finite())
    }
}

/// Loss report and summed gradients over `batch`, without updating.
pub fn batch_gradients(
    model: &PolicyNet,
    instances: &[TrainInstance],
    batch: &[Sample],
    config: &TrainerConfig,
    exec: Exec,
) -> Result<(LossReport, Vec<Tensor>), ModelError> {
    let store = model.params();
    let b = batch.len();
    let chunk = b.div_ceil(GRAD_CHUNKS).max(1);
    let ranges: Vec<(usize, usize)> = (0..b).step_by(chunk).map(|s| (s, (s + chunk).min(b))).collect();
    let zero = || -> Vec<Tensor> {
        store
            .iter()
            .map(|p| {
                let (r, c) = p.value.shape();
                Tensor::zeros(r, c)
            })
            .collect()
    };
    let partials = exec.map(&ranges, |&(lo, hi)| -> Result<(LossReport, Vec<Tensor>), ModelError> {
        let mut grads = zero();
        let mut report = LossReport::default();
        for sample in &batch[lo..hi] {
            let tape = Tape::new();
            let terms = transition_loss(&tape, model, instances, sample, config, b)?;
            let total = terms.total(config);
            report.policy_loss += terms.policy.item();
            report.value_loss += terms.value.item();
            report.entropy_loss += terms.entropy.item();
            report.total_loss += total.item();
            if (terms.ratio - 1.0).abs() > config.clip {
                report.clip_fraction += 1.0 / b as f64;
            }
            let g = tape.backward(total).expect("scalar loss").for_params(store);
            for (acc, gi) in grads.iter_mut().zip(&g) {
                acc.add_assign(gi);
            }
        }
        Ok((report, grads))
    });
    let mut grads = zero();
    let mut report = LossReport { transitions: b, ..LossReport::default() };
    for part in partials {
        let (r, g) = part?;
        report.policy_loss += r.policy_loss;
        report.value_loss += r.value_loss;
        report.entropy_loss += r.entropy_loss;
        report.total_loss += r.total_loss;
        report.clip_fraction += r.clip_fraction;
        for (acc, gi) in grads.iter_mut().zip(&g) {
            acc.add_assign(gi);
        }
    }
    Ok((report, grads))
}

/// `ppo_epochs` full-batch Adam steps. Returns the report of the first
/// epoch; a non-finite loss leaves the parameters untouched.
pub fn ppo_update(
    model: &mut PolicyNet,
    instances: &[TrainInstance],
    batch: &[Sample],
    config: &TrainerConfig,
    iteration: usize,
    exec: Exec,
) -> Result<LossReport, TrainError> {
    let mut first = None;
    for _ in 0..config.ppo_epochs {
        if batch.is_empty() {
            break;
        }
        let (report, grads) = batch_gradients(model, instances, batch, config, exec)?;
        if !report.is_finite() || grads.iter().any(|g| g.data().iter().any(|x| !x.is_finite())) {
            return Err(TrainError::NonFinite { iteration, report });
        }
        model.params_mut().adam_step(&grads, &config.adam());
        first.get_or_insert(report);
    }
    Ok(first.unwrap_or_default())
}

/// One line of the training curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub iteration: usize,
    /// Mean over environments of the summed objective rewards.
    pub mean_return: f64,
    /// Same, including expansion bonuses.
    pub mean_shaped_return: f64,
    #[serde(flatten)]
    pub losses: LossReport,
}

pub struct TrainOutcome {
    pub model: PolicyNet,
    pub curve: Vec<CurveRecord>,
}

/// Runs `config.iterations` rounds of sampling, rollouts, GAE and update.
/// With `out_dir`, writes `curve.jsonl`, a checkpoint every
/// [`CHECKPOINT_EVERY`] iterations and `model.ckpt` at the end.
pub fn train(
    instances: &[TrainInstance],
    objective: Objective,
    mut model: PolicyNet,
    config: &TrainerConfig,
    out_dir: Option<&Path>,
    exec: Exec,
) -> Result<TrainOutcome, TrainError> {
    config.check()?;
    if instances.is_empty() {
        return Err(TrainError::NoInstances);
    }
    if let Some(i) = instances.iter().position(|inst| inst.seeds.is_empty()) {
        return Err(TrainError::EmptySeeds(i));
    }
    let mut curve_file = match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            let path = dir.join("curve.jsonl");
            Some((fs::File::create(&path).map_err(|e| io_error(&path, e))?, path))
        }
        None => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut counter = VisitCounter::new();
    let mut curve = Vec::with_capacity(config.iterations);
    for iteration in 1..=config.iterations {
        let mut starts = Vec::with_capacity(config.parallel_envs);
        for _ in 0..config.parallel_envs {
            let instance = rng.random_range(0..instances.len());
            let seeds = &instances[instance].seeds;
            let idx = sample_initial_states(seeds, instance, &counter, 1, &mut rng)?[0];
            starts.push(EnvStart { instance, state: seeds[idx].clone(), rng_seed: rng.random() });
        }
        let trajectories = collect_rollouts(
            &model,
            instances,
            &starts,
            objective,
            config.horizon,
            ActionMode::Sample,
            &mut counter,
            config.bonus_coef,
            exec,
        );
        let batch = build_batch(&trajectories, config);
        let losses = ppo_update(&mut model, instances, &batch, config, iteration, exec)?;
        let envs = trajectories.len() as f64;
        let record = CurveRecord {
            iteration,
            mean_return: trajectories.iter().map(Trajectory::plain_return).sum::<f64>() / envs,
            mean_shaped_return: trajectories.iter().map(Trajectory::shaped_return).sum::<f64>() / envs,
            losses,
        };
        if let Some((file, path)) = curve_file.as_mut() {
            let line = serde_json::to_string(&record).expect("curve record serializes");
            writeln!(file, "{line}").map_err(|e| io_error(path, e))?;
        }
        curve.push(record);
        if let Some(dir) = out_dir {
            if iteration % CHECKPOINT_EVERY == 0 {
                write_checkpoint(&model, &dir.join(format!("checkpoint_{iteration:06}.ckpt")))?;
            }
        }
    }
    if let Some(dir) = out_dir {
        write_checkpoint(&model, &dir.join("model.ckpt"))?;
    }
    Ok(TrainOutcome { model, curve })
}

pub fn write_checkpoint(model: &PolicyNet, path: &Path) -> Result<(), TrainError> {
    fs::write(path, model.to_checkpoint().to_bytes()).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: std::io::Error) -> TrainError {
    TrainError::Io { path: path.to_path_buf(), source }
}
