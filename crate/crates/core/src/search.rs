//! Budgeted local search over the flip graph.
//!
//! Every strategy moves one step per budget unit. Stays (rejected proposals,
//! dead ends) also consume a unit, so all methods see the same number of
//! outer-loop iterations.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{self, Write};

use ordered_float::OrderedFloat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::flips::{CircuitTable, FlipAction};
use crate::objective::Objective;
use crate::par::Exec;
use crate::tri::{TriKey, Triangulation};

/// Scores the feasible flips of a state; higher logits are preferred.
pub trait FlipPolicy: Sync {
    fn logits(&self, table: &CircuitTable, tri: &Triangulation, actions: &[FlipAction]) -> Vec<f64>;
}

/// Probability of accepting a uniformly proposed flip from `tri`.
pub trait AcceptPolicy: Sync {
    fn accept_probability(&self, table: &CircuitTable, tri: &Triangulation) -> f64;
}

/// Geometric cooling `T_t = t0 · α^t` with `α` chosen so that the temperature
/// after the whole budget is `t0 · final_ratio`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schedule {
    pub t0: f64,
    pub final_ratio: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { t0: 1.0, final_ratio: 1e-3 }
    }
}

impl Schedule {
    pub fn temperature(&self, step: usize, budget: usize) -> f64 {
        if budget == 0 {
            return self.t0;
        }
        let alpha = self.final_ratio.powf(1.0 / budget as f64);
        self.t0 * alpha.powi(step as i32)
    }
}

/// Acceptance rule `min(1, exp(−Δ/T))`.
pub fn acceptance_probability(delta: f64, temperature: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else if temperature <= 0.0 {
        0.0
    } else {
        (-delta / temperature).exp().min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    Argmax,
    Sample,
}

#[derive(Clone, Copy)]
pub enum Strategy<'a> {
    Greedy,
    Dfs,
    Befs,
    SimAnneal(Schedule),
    RandomWalk,
    NlsAccept(&'a dyn AcceptPolicy),
    Policy(&'a dyn FlipPolicy, ActionMode),
}

impl Strategy<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::Dfs => "dfs",
            Strategy::Befs => "befs",
            Strategy::SimAnneal(_) => "sa",
            Strategy::RandomWalk => "random_walk",
            Strategy::NlsAccept(_) => "nls",
            Strategy::Policy(..) => "policy",
        }
    }
}

/// Frontier cap for best-first search.
pub const BEFS_FRONTIER_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    /// Circuit id of the applied flip; `None` for stays and jumps.
    pub action: Option<usize>,
    pub value: f64,
    pub best: f64,
    #[serde(skip)]
    pub key: TriKey,
}

#[derive(Debug, Clone)]
pub struct SearchTrace {
    pub steps: Vec<StepRecord>,
    pub best_value: f64,
    pub best_state: Triangulation,
    pub budget_used: usize,
}

impl SearchTrace {
    /// One JSON object per line: `{step, action, value, best}`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        for s in &self.steps {
            serde_json::to_writer(&mut w, s)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn states(&self, dim: usize) -> impl Iterator<Item = Triangulation> + '_ {
        self.steps.iter().map(move |s| Triangulation::from_key(dim, &s.key))
    }
}

/// Objective values memoized by state.
pub struct Evaluator<'a> {
    table: &'a CircuitTable,
    objective: Objective,
    memo: HashMap<TriKey, f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(table: &'a CircuitTable, objective: Objective) -> Self {
        Evaluator { table, objective, memo: HashMap::new() }
    }

    pub fn value(&mut self, tri: &Triangulation) -> f64 {
        let (obj, config) = (self.objective, self.table.config());
        *self.memo.entry(tri.key()).or_insert_with(|| obj.evaluate(tri, config))
    }

    pub fn cost(&mut self, tri: &Triangulation) -> f64 {
        let v = self.value(tri);
        self.objective.cost(v)
    }
}

enum Move {
    Stay,
    Go { next: Triangulation, circuit: Option<usize> },
}

struct Frontier {
    queue: BTreeSet<(OrderedFloat<f64>, TriKey)>,
    states: HashMap<TriKey, (Triangulation, TriKey, usize)>,
    discovered: HashSet<TriKey>,
    expanded: HashSet<TriKey>,
}

enum State<'a> {
    Greedy,
    Dfs { visited: HashSet<TriKey>, stack: Vec<(Triangulation, TriKey, usize)> },
    Befs(Box<Frontier>),
    Anneal { schedule: Schedule, scale: f64 },
    RandomWalk,
    Nls(&'a dyn AcceptPolicy),
    Policy(&'a dyn FlipPolicy, ActionMode),
}

fn neighbors_of(table: &CircuitTable, cur: &Triangulation, actions: &[FlipAction]) -> Vec<Triangulation> {
    actions.iter().map(|a| table.apply(cur, a).expect("fresh action")).collect()
}

impl<'a> State<'a> {
    fn new(strategy: Strategy<'a>, seed: &Triangulation, eval: &mut Evaluator) -> Self {
        match strategy {
            Strategy::Greedy => State::Greedy,
            Strategy::Dfs => State::Dfs { visited: HashSet::new(), stack: Vec::new() },
            Strategy::Befs => State::Befs(Box::new(Frontier {
                queue: BTreeSet::new(),
                states: HashMap::new(),
                discovered: HashSet::from([seed.key()]),
                expanded: HashSet::new(),
            })),
            Strategy::SimAnneal(schedule) => {
                // Deltas are standardized by the seed's magnitude.
                let s = eval.value(seed).abs();
                State::Anneal { schedule, scale: if s > 0.0 { s } else { 1.0 } }
            }
            Strategy::RandomWalk => State::RandomWalk,
            Strategy::NlsAccept(p) => State::Nls(p),
            Strategy::Policy(p, mode) => State::Policy(p, mode),
        }
    }

    fn step(
        &mut self,
        eval: &mut Evaluator,
        cur: &Triangulation,
        actions: &[FlipAction],
        rng: &mut ChaCha8Rng,
        t: usize,
        budget: usize,
    ) -> Move {
        let table = eval.table;
        match self {
            State::Greedy => {
                if actions.is_empty() {
                    return Move::Stay;
                }
                let next = neighbors_of(table, cur, actions);
                let costs: Vec<f64> = next.iter().map(|n| eval.cost(n)).collect();
                let best = argmin(&costs);
                Move::Go { next: next[best].clone(), circuit: Some(actions[best].circuit_id) }
            }
            State::Dfs { visited, stack } => {
                let key = cur.key();
                visited.insert(key.clone());
                let here = eval.cost(cur);
                let mut fresh: Vec<(f64, usize, Triangulation)> = neighbors_of(table, cur, actions)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, n)| !visited.contains(&n.key()))
                    .map(|(i, n)| (eval.cost(&n), i, n))
                    .collect();
                let improving = fresh.iter().any(|(c, _, _)| *c < here);
                if improving || stack.is_empty() {
                    // worst first, so the best (earliest on ties) ends on top
                    fresh.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)));
                    for (_, i, n) in fresh {
                        stack.push((n, key.clone(), actions[i].circuit_id));
                    }
                }
                while let Some((n, parent, circuit)) = stack.pop() {
                    if !visited.contains(&n.key()) {
                        let circuit = (parent == key).then_some(circuit);
                        return Move::Go { next: n, circuit };
                    }
                }
                Move::Stay
            }
            State::Befs(f) => {
                let key = cur.key();
                if f.expanded.insert(key.clone()) {
                    for (a, n) in actions.iter().zip(neighbors_of(table, cur, actions)) {
                        let k = n.key();
                        if f.discovered.insert(k.clone()) {
                            let c = eval.cost(&n);
                            f.queue.insert((OrderedFloat(c), k.clone()));
                            f.states.insert(k, (n, key.clone(), a.circuit_id));
                        }
                    }
                    while f.queue.len() > BEFS_FRONTIER_CAP {
                        let (_, worst) = f.queue.pop_last().unwrap();
                        f.states.remove(&worst);
                    }
                }
                let Some((_, k)) = f.queue.pop_first() else {
                    return Move::Stay;
                };
                let (n, parent, circuit) = f.states.remove(&k).unwrap();
                Move::Go { next: n, circuit: (parent == key).then_some(circuit) }
            }
            State::Anneal { schedule, scale } => {
                if actions.is_empty() {
                    return Move::Stay;
                }
                let i = rng.random_range(0..actions.len());
                let next = table.apply(cur, &actions[i]).expect("fresh action");
                let delta = (eval.cost(&next) - eval.cost(cur)) / *scale;
                let p = acceptance_probability(delta, schedule.temperature(t, budget));
                if p >= 1.0 || rng.random::<f64>() < p {
                    Move::Go { next, circuit: Some(actions[i].circuit_id) }
                } else {
                    Move::Stay
                }
            }
            State::RandomWalk => {
                if actions.is_empty() {
                    return Move::Stay;
                }
                let i = rng.random_range(0..actions.len());
                let next = table.apply(cur, &actions[i]).expect("fresh action");
                Move::Go { next, circuit: Some(actions[i].circuit_id) }
            }
            State::Nls(policy) => {
                if actions.is_empty() {
                    return Move::Stay;
                }
                let i = rng.random_range(0..actions.len());
                let p = policy.accept_probability(table, cur);
                if rng.random::<f64>() < p {
                    let next = table.apply(cur, &actions[i]).expect("fresh action");
                    Move::Go { next, circuit: Some(actions[i].circuit_id) }
                } else {
                    Move::Stay
                }
            }
            State::Policy(policy, mode) => {
                if actions.is_empty() {
                    return Move::Stay;
                }
                let logits = policy.logits(table, cur, actions);
                let i = match mode {
                    ActionMode::Argmax => argmax(&logits),
                    ActionMode::Sample => sample_softmax(&logits, rng),
                };
                let next = table.apply(cur, &actions[i]).expect("fresh action");
                Move::Go { next, circuit: Some(actions[i].circuit_id) }
            }
        }
    }
}

/// First index of the minimum.
pub fn argmin(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x < xs[best] {
            best = i;
        }
    }
    best
}

/// First index of the maximum.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

/// Samples an index from `softmax(logits)` by inverse CDF.
pub fn sample_softmax<R: Rng>(logits: &[f64], rng: &mut R) -> usize {
    let p = softmax(logits);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// Runs `strategy` for exactly `budget` steps from `seed`.
pub fn run_budgeted(
    strategy: Strategy,
    table: &CircuitTable,
    seed: &Triangulation,
    objective: Objective,
    budget: usize,
    rng_seed: u64,
) -> SearchTrace {
    let mut eval = Evaluator::new(table, objective);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut state = State::new(strategy, seed, &mut eval);
    let mut cur = seed.clone();
    let mut value = eval.value(&cur);
    let mut best_value = value;
    let mut best_state = cur.clone();
    let mut steps = vec![StepRecord { step: 0, action: None, value, best: best_value, key: cur.key() }];
    for t in 1..=budget {
        let actions = table.flippable(&cur);
        let action = match state.step(&mut eval, &cur, &actions, &mut rng, t, budget) {
            Move::Stay => None,
            Move::Go { next, circuit } => {
                cur = next;
                value = eval.value(&cur);
                circuit
            }
        };
        if objective.better(value, best_value) {
            best_value = value;
            best_state = cur.clone();
        }
        steps.push(StepRecord { step: t, action, value, best: best_value, key: cur.key() });
    }
    SearchTrace { steps, best_value, best_state, budget_used: budget }
}

/// One search instance for [`run_many`].
pub struct Job<'a> {
    pub table: &'a CircuitTable,
    pub seed: Triangulation,
    pub rng_seed: u64,
}

/// Runs independent searches, in parallel when allowed; output order
/// follows `jobs`.
pub fn run_many(strategy: Strategy, jobs: &[Job], objective: Objective, budget: usize, exec: Exec) -> Vec<SearchTrace> {
    exec.map(jobs, |j| run_budgeted(strategy, j.table, &j.seed, objective, budget, j.rng_seed))
}

/// Best objective value over the whole flip-graph component of `seed`.
pub fn exhaustive_best(
    table: &CircuitTable,
    seed: &Triangulation,
    objective: Objective,
    limit: usize,
    exec: Exec,
) -> (f64, bool) {
    let comp = crate::flips::enumerate_component(seed, table, limit, exec);
    let values = exec.map(&comp.states, |t| objective.evaluate(t, table.config()));
    let best = values.iter().copied().fold(values[0], |b, v| if objective.better(v, b) { v } else { b });
    (best, comp.truncated)
}

/// A row of a gap table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub dim: usize,
    pub vertices: usize,
    pub objective: Objective,
    pub method: String,
    pub mean_gap: f64,
    pub std_err: f64,
    pub n: usize,
}

pub const GAP_TABLE_HEADER: &str = "dim\tvertices\tobjective\tmethod\tmean_gap\tstd_err\tn";

pub fn write_gap_table<W: Write>(rows: &[GapRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{GAP_TABLE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{}",
            r.dim, r.vertices, r.objective, r.method, r.mean_gap, r.std_err, r.n
        )?;
    }
    Ok(())
}
