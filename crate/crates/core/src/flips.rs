//! Circuits, bistellar flips and flip-graph traversal.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::Signed;

use crate::error::TriError;
use crate::exact::Rational;
use crate::geom::{normalize_first_positive, PointConfig};
use crate::par::Exec;
use crate::tri::{TriKey, Triangulation};
use crate::vset::{subsets, VertexSet};

/// A minimal affinely dependent subset with its sign partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub vertices: VertexSet,
    /// Dependence coefficients in ascending vertex order; the first is `1`.
    pub lambda: Vec<Rational>,
    pub positive: VertexSet,
    pub negative: VertexSet,
}

impl Circuit {
    pub fn part(&self, side: Side) -> VertexSet {
        match side {
            Side::Positive => self.positive,
            Side::Negative => self.negative,
        }
    }

    /// Maximal cells `Z ∖ {p}` of the core triangulation on `side`.
    pub fn core(&self, side: Side) -> impl Iterator<Item = VertexSet> + '_ {
        self.part(side).iter().map(|p| self.vertices.without(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Positive => Side::Negative,
            Side::Negative => Side::Positive,
        }
    }
}

/// A flip that is feasible in a specific triangulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipAction {
    pub circuit_id: usize,
    pub circuit: Arc<Circuit>,
    /// The side whose core is currently present.
    pub side: Side,
    /// Maximal faces of the common link.
    pub link: Vec<VertexSet>,
    pub removed: Vec<VertexSet>,
    pub inserted: Vec<VertexSet>,
}

impl FlipAction {
    /// The flip that undoes this one in the resulting triangulation.
    pub fn reversed(&self) -> FlipAction {
        FlipAction {
            circuit_id: self.circuit_id,
            circuit: Arc::clone(&self.circuit),
            side: self.side.opposite(),
            link: self.link.clone(),
            removed: self.inserted.clone(),
            inserted: self.removed.clone(),
        }
    }
}

/// All circuits of a configuration, shared read-only by every search worker.
#[derive(Debug, Clone)]
pub struct CircuitTable {
    config: Arc<PointConfig>,
    circuits: Vec<Arc<Circuit>>,
}

impl CircuitTable {
    pub fn build(config: Arc<PointConfig>) -> Self {
        CircuitTable::build_with(config, Exec::Auto)
    }

    pub fn build_with(config: Arc<PointConfig>, exec: Exec) -> Self {
        let d = config.dim();
        let mut candidates = Vec::new();
        for k in 2..=(d + 2).min(config.len()) {
            candidates.extend(subsets(config.all(), k));
        }
        let found = exec.map(&candidates, |&set| circuit_on(&config, set));
        let mut circuits: Vec<Circuit> = found.into_iter().flatten().collect();
        circuits.sort_by_key(|c| c.vertices);
        CircuitTable { config, circuits: circuits.into_iter().map(Arc::new).collect() }
    }

    pub fn config(&self) -> &PointConfig {
        &self.config
    }

    pub fn shared_config(&self) -> &Arc<PointConfig> {
        &self.config
    }

    pub fn circuits(&self) -> &[Arc<Circuit>] {
        &self.circuits
    }

    pub fn len(&self) -> usize {
        self.circuits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circuits.is_empty()
    }

    /// Actions available for one circuit: empty, or one per realized side.
    /// A valid triangulation never realizes both sides.
    pub fn actions_for(&self, tri: &Triangulation, circuit_id: usize) -> Vec<FlipAction> {
        let circuit = &self.circuits[circuit_id];
        [Side::Positive, Side::Negative]
            .into_iter()
            .filter_map(|side| {
                let link = common_link(tri, circuit, side)?;
                let join = |s: Side| -> Vec<VertexSet> {
                    let mut out: Vec<VertexSet> =
                        circuit.core(s).flat_map(|c| link.iter().map(move |&l| c.union(l))).collect();
                    out.sort_unstable();
                    out
                };
                Some(FlipAction {
                    circuit_id,
                    circuit: Arc::clone(circuit),
                    side,
                    removed: join(side),
                    inserted: join(side.opposite()),
                    link,
                })
            })
            .collect()
    }

    /// Feasible flips of `tri`, ordered by circuit then side.
    pub fn flippable(&self, tri: &Triangulation) -> Vec<FlipAction> {
        let mut out = Vec::new();
        for id in 0..self.circuits.len() {
            let actions = self.actions_for(tri, id);
            debug_assert!(actions.len() <= 1, "both cores of circuit {id} are realized");
            out.extend(actions);
        }
        out
    }

    /// Applies `action`, asserting validity of the result in debug builds.
    pub fn apply(&self, tri: &Triangulation, action: &FlipAction) -> Result<Triangulation, TriError> {
        let next = apply_flip(tri, action)?;
        debug_assert!(
            next.validate(&self.config).is_valid(),
            "flip produced an invalid triangulation: {:?}",
            next.validate(&self.config)
        );
        Ok(next)
    }

    /// Distinct one-flip neighbors in action order.
    pub fn neighbors(&self, tri: &Triangulation) -> Vec<Triangulation> {
        let mut seen = std::collections::HashSet::new();
        self.flippable(tri)
            .iter()
            .map(|a| self.apply(tri, a).expect("fresh action"))
            .filter(|t| seen.insert(t.key()))
            .collect()
    }
}

fn circuit_on(config: &PointConfig, set: VertexSet) -> Option<Circuit> {
    let basis = config.dependences(set);
    if basis.len() != 1 || basis[0].iter().any(|c| c.signum() == 0.into()) {
        return None;
    }
    let lambda = normalize_first_positive(&basis[0]);
    let mut positive = VertexSet::EMPTY;
    let mut negative = VertexSet::EMPTY;
    for (v, c) in set.iter().zip(&lambda) {
        if c.is_positive() {
            positive = positive.with(v);
        } else {
            negative = negative.with(v);
        }
    }
    Some(Circuit { vertices: set, lambda, positive, negative })
}

/// The link shared by every core cell on `side`, if all cells are faces of `tri`.
fn common_link(tri: &Triangulation, circuit: &Circuit, side: Side) -> Option<Vec<VertexSet>> {
    let mut common: Option<Vec<VertexSet>> = None;
    for cell in circuit.core(side) {
        let mut link: Vec<VertexSet> =
            tri.simplices().iter().filter(|&&s| cell.is_subset(s)).map(|&s| s.minus(cell)).collect();
        if link.is_empty() {
            return None;
        }
        link.sort_unstable();
        match &common {
            None => common = Some(link),
            Some(c) if *c == link => {}
            Some(_) => return None,
        }
    }
    common
}

pub fn enumerate_circuits(config: Arc<PointConfig>) -> CircuitTable {
    CircuitTable::build(config)
}

/// `(tri ∖ removed) ∪ inserted`.
pub fn apply_flip(tri: &Triangulation, action: &FlipAction) -> Result<Triangulation, TriError> {
    if !action.removed.iter().all(|&s| tri.contains(s)) {
        return Err(TriError::StaleAction);
    }
    Ok(tri.replace(&action.removed, &action.inserted))
}

/// A breadth-first traversal result.
#[derive(Debug, Clone)]
pub struct Component {
    /// States in discovery order; the seed comes first.
    pub states: Vec<Triangulation>,
    pub edges: usize,
    pub truncated: bool,
}

impl Component {
    pub fn keys(&self) -> Vec<TriKey> {
        self.states.iter().map(Triangulation::key).collect()
    }
}

/// Breadth-first search of the flip graph from `seed`.
///
/// At most `limit` states are discovered; meeting a further state sets
/// `truncated`. Each frontier layer is expanded in parallel and merged in
/// order, so the result does not depend on the execution mode.
pub fn enumerate_component(seed: &Triangulation, table: &CircuitTable, limit: usize, exec: Exec) -> Component {
    let mut index: HashMap<TriKey, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut edges = 0;
    let mut truncated = false;
    if limit == 0 {
        return Component { states, edges, truncated: true };
    }
    index.insert(seed.key(), 0);
    states.push(seed.clone());
    let mut frontier = vec![0usize];
    while !frontier.is_empty() && !truncated {
        let layer: Vec<&Triangulation> = frontier.iter().map(|&i| &states[i]).collect();
        let expanded = exec.map(&layer, |t| table.neighbors(t));
        let mut next = Vec::new();
        'layer: for (&u, neighbors) in frontier.iter().zip(expanded) {
            for t in neighbors {
                let key = t.key();
                match index.get(&key) {
                    // counted once, from the endpoint expanded first
                    Some(&v) => edges += usize::from(v > u),
                    None => {
                        if states.len() >= limit {
                            truncated = true;
                            break 'layer;
                        }
                        index.insert(key, states.len());
                        next.push(states.len());
                        states.push(t);
                        edges += 1;
                    }
                }
            }
        }
        frontier = next;
    }
    Component { states, edges, truncated }
}
