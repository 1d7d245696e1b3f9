//! Fine regular star triangulations (FRSTs) of lattice polytopes: checks,
//! star closure by origin lowering, flip episodes that look for a fine
//! regular state, and the budgeted sampling loop.

use std::collections::{HashMap, HashSet};
use std::io::{self, Write};
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{FrstError, TriError};
use crate::exact::{rat, snap_to_rational, Rational, SNAP_BITS};
use crate::flips::CircuitTable;
use crate::geom::PointConfig;
use crate::search::{argmax, sample_softmax, ActionMode, FlipPolicy};
use crate::tri::{regular_from_heights, Heights, TriKey, Triangulation};

/// All lattice points of a polytope with the origin in its interior.
#[derive(Debug, Clone)]
pub struct LatticeConfig {
    config: Arc<PointConfig>,
    origin: usize,
    label: Option<String>,
}

impl LatticeConfig {
    /// Enumerates the lattice points of the hull of `vertices`.
    pub fn from_polytope(vertices: &PointConfig) -> Result<Self, FrstError> {
        let points = vertices.lattice_points()?;
        LatticeConfig::new(PointConfig::new(vertices.dim(), points)?)
    }

    /// `config` must already list every lattice point of its hull.
    pub fn new(config: PointConfig) -> Result<Self, FrstError> {
        if !config.is_lattice() {
            return Err(FrstError::NotLattice);
        }
        let expected = config.lattice_points()?.len();
        if expected != config.len() {
            return Err(FrstError::MissingLatticePoints { expected, found: config.len() });
        }
        let origin =
            (0..config.len()).find(|&i| config.point(i).iter().all(Zero::is_zero)).ok_or(FrstError::NoOrigin)?;
        if config.hull().facets.iter().any(|f| f.points.contains(origin)) {
            return Err(FrstError::OriginOnBoundary);
        }
        Ok(LatticeConfig { config: Arc::new(config), origin, label: None })
    }

    /// Attaches an opaque label (for example a Hodge number from a database).
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn config(&self) -> &PointConfig {
        &self.config
    }

    pub fn shared_config(&self) -> &Arc<PointConfig> {
        &self.config
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrstReport {
    pub fine: bool,
    pub regular: bool,
    pub star: bool,
}

impl FrstReport {
    pub fn is_frst(&self) -> bool {
        self.fine && self.regular && self.star
    }
}

pub fn is_frst(tri: &Triangulation, lattice: &LatticeConfig) -> FrstReport {
    let config = lattice.config();
    FrstReport {
        fine: tri.is_fine(config),
        regular: tri.is_regular(config),
        star: tri.simplices().iter().all(|s| s.contains(lattice.origin)),
    }
}

const LOWERING_STEPS: u32 = 256;
const CLOSURE_ATTEMPTS: usize = 10;

/// Lowers the origin's height by doubling steps until the induced
/// triangulation is a star. Returns it with the heights that induce it.
fn lower_origin(lattice: &LatticeConfig, heights: &[Rational]) -> Option<(Triangulation, Heights)> {
    let mut h = heights.to_vec();
    let mut step = Rational::one();
    for _ in 0..LOWERING_STEPS {
        h[lattice.origin] = &heights[lattice.origin] - &step;
        if let Ok(t) = regular_from_heights(lattice.config(), &h) {
            if t.simplices().iter().all(|s| s.contains(lattice.origin)) {
                return Some((t, h));
            }
        }
        step *= rat(2);
    }
    None
}

/// Turns a fine regular triangulation into a fine regular star one.
///
/// The boundary of the result is the boundary of `tri`; only the origin's
/// height changes. If every lowering level is degenerate, the other heights
/// are perturbed within the secondary cone of `tri` and the search repeats.
pub fn star_closure(tri: &Triangulation, lattice: &LatticeConfig) -> Result<(Triangulation, Heights), TriError> {
    let config = lattice.config();
    if !tri.is_fine(config) {
        return Err(TriError::NotFine);
    }
    let witness = tri.regularity_witness(config).ok_or(TriError::NotRegular)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xc105);
    let mut heights = witness.clone();
    for _ in 0..CLOSURE_ATTEMPTS {
        if let Some(found) = lower_origin(lattice, &heights) {
            return Ok(found);
        }
        heights = perturb_within(tri, config, &witness, &mut rng);
    }
    Err(TriError::DegenerateHeights)
}

/// Random small perturbation of `witness` that still induces `tri`.
fn perturb_within(tri: &Triangulation, config: &PointConfig, witness: &[Rational], rng: &mut ChaCha8Rng) -> Heights {
    let mut eps = Rational::new(BigInt::one(), BigInt::one() << 20);
    loop {
        let h: Heights = witness.iter().map(|w| w + &eps * rat(rng.random_range(-1000..=1000))).collect();
        if regular_from_heights(config, &h).is_ok_and(|t| t == *tri) {
            return h;
        }
        eps /= rat(1 << 10);
    }
}

/// Memoized regularity, keyed by canonical key.
#[derive(Debug, Default)]
pub struct RegularityMemo {
    seen: HashMap<TriKey, bool>,
}

impl RegularityMemo {
    pub fn is_regular(&mut self, tri: &Triangulation, config: &PointConfig) -> bool {
        *self.seen.entry(tri.key()).or_insert_with(|| tri.is_regular(config))
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

/// How an episode moves from the lifted start state.
#[derive(Clone, Copy)]
pub enum Locator<'a> {
    RandomWalk,
    Policy(&'a dyn FlipPolicy, ActionMode),
    /// No flips: only the lifted state itself is tested.
    PlainLifting,
}

impl Locator<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Locator::RandomWalk => "random_walk",
            Locator::Policy(..) => "policy",
            Locator::PlainLifting => "plain_lifting",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Episode {
    pub success: bool,
    /// Flips taken before stopping.
    pub steps: usize,
    /// Keys of visited states, start first.
    pub visited: Vec<TriKey>,
    /// The first fine regular state, before star closure.
    pub found: Option<Triangulation>,
    pub closed: Option<Triangulation>,
}

/// Walks at most `budget` flips from `start`, stopping at the first fine
/// regular state, which is then star-closed.
pub fn nearby_frst_episode<R: Rng>(
    start: &Triangulation,
    table: &CircuitTable,
    lattice: &LatticeConfig,
    locator: Locator,
    budget: usize,
    rng: &mut R,
    memo: &mut RegularityMemo,
) -> Result<Episode, TriError> {
    let config = lattice.config();
    let budget = if matches!(locator, Locator::PlainLifting) { 0 } else { budget };
    let mut cur = start.clone();
    let mut visited = vec![cur.key()];
    let mut steps = 0;
    loop {
        if cur.is_fine(config) && memo.is_regular(&cur, config) {
            let (closed, _) = star_closure(&cur, lattice)?;
            return Ok(Episode { success: true, steps, visited, found: Some(cur), closed: Some(closed) });
        }
        if steps == budget {
            break;
        }
        let actions = table.flippable(&cur);
        if actions.is_empty() {
            break;
        }
        let pick = match locator {
            Locator::RandomWalk | Locator::PlainLifting => rng.random_range(0..actions.len()),
            Locator::Policy(policy, mode) => {
                let logits = policy.logits(table, &cur, &actions);
                match mode {
                    ActionMode::Argmax => argmax(&logits),
                    ActionMode::Sample => sample_softmax(&logits, rng),
                }
            }
        };
        cur = table.apply(&cur, &actions[pick])?;
        visited.push(cur.key());
        steps += 1;
    }
    Ok(Episode { success: false, steps, visited, found: None, closed: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clock {
    Wall,
    /// One millisecond per iteration; makes ledgers reproducible.
    Logical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    /// Standard deviation of every height coordinate.
    pub height_std: f64,
    pub max_seconds: f64,
    pub max_iterations: usize,
    pub retry_limit: usize,
    pub flip_budget: usize,
    pub seed: u64,
    pub clock: Clock,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            height_std: 1.0,
            max_seconds: 300.0,
            max_iterations: 1024,
            retry_limit: 50,
            flip_budget: 50,
            seed: 0,
            clock: Clock::Wall,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub iteration: usize,
    pub elapsed_ms: u64,
    pub new_key: Option<String>,
    pub cumulative_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TimeCap,
    IterationCap,
    RetryLimit,
}

#[derive(Debug, Clone)]
pub struct FrstLedger {
    /// Distinct FRSTs in discovery order.
    pub frsts: Vec<Triangulation>,
    keys: HashSet<TriKey>,
    pub log: Vec<LedgerEntry>,
    pub stop: StopReason,
}

impl FrstLedger {
    pub fn len(&self) -> usize {
        self.frsts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frsts.is_empty()
    }

    pub fn contains(&self, key: &TriKey) -> bool {
        self.keys.contains(key)
    }

    pub fn keys(&self) -> &HashSet<TriKey> {
        &self.keys
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in &self.log {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

const HEIGHT_RESAMPLES: usize = 100;

fn lifted_start<R: Rng>(lattice: &LatticeConfig, normal: &Normal<f64>, rng: &mut R) -> Option<Triangulation> {
    let config = lattice.config();
    (0..HEIGHT_RESAMPLES).find_map(|_| {
        let h: Option<Heights> =
            (0..config.len()).map(|_| snap_to_rational(normal.sample(rng), SNAP_BITS).ok()).collect();
        regular_from_heights(config, &h?).ok()
    })
}

/// Repeated lift-and-search until the time cap, the iteration cap, or
/// `retry_limit` consecutive iterations without a new FRST.
pub fn sample_frsts(lattice: &LatticeConfig, sampler: &SamplerConfig, locator: Locator) -> FrstLedger {
    let table = CircuitTable::build(Arc::clone(lattice.shared_config()));
    sample_frsts_with(lattice, &table, sampler, locator)
}

pub fn sample_frsts_with(
    lattice: &LatticeConfig,
    table: &CircuitTable,
    sampler: &SamplerConfig,
    locator: Locator,
) -> FrstLedger {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let normal = Normal::new(0.0, sampler.height_std).expect("finite positive standard deviation");
    let mut memo = RegularityMemo::default();
    let mut ledger =
        FrstLedger { frsts: Vec::new(), keys: HashSet::new(), log: Vec::new(), stop: StopReason::IterationCap };
    let mut retries = 0;
    let elapsed_ms = |iterations: usize| match sampler.clock {
        Clock::Wall => started.elapsed().as_millis() as u64,
        Clock::Logical => iterations as u64,
    };
    let cap_ms = sampler.max_seconds * 1000.0;
    let mut iteration = 0;
    ledger.stop = loop {
        if iteration >= sampler.max_iterations {
            break StopReason::IterationCap;
        }
        if elapsed_ms(iteration) as f64 >= cap_ms {
            break StopReason::TimeCap;
        }
        iteration += 1;
        let closed = lifted_start(lattice, &normal, &mut rng).and_then(|start| {
            nearby_frst_episode(&start, table, lattice, locator, sampler.flip_budget, &mut rng, &mut memo)
                .ok()
                .and_then(|e| e.closed)
        });
        let mut new_key = None;
        if let Some(t) = closed {
            let key = t.key();
            if !ledger.keys.contains(&key) {
                assert!(is_frst(&t, lattice).is_frst(), "star closure produced a non-FRST");
                new_key = Some(key.digest());
                ledger.keys.insert(key);
                ledger.frsts.push(t);
            }
        }
        retries = if new_key.is_some() { 0 } else { retries + 1 };
        ledger.log.push(LedgerEntry {
            iteration,
            elapsed_ms: elapsed_ms(iteration),
            new_key,
            cumulative_count: ledger.frsts.len(),
        });
        if retries >= sampler.retry_limit {
            break StopReason::RetryLimit;
        }
    };
    ledger
}
