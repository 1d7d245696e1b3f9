//! Flip-ranking network: an EGNN encoder over the 1-skeleton, actors that
//! score flippable circuits, and a value head.

use std::collections::HashMap;
use std::rc::Rc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use flipforge_core::{AcceptPolicy, CircuitTable, FlipAction, FlipPolicy, PointConfig, Triangulation, VertexSet};

use crate::checkpoint::{config_digest, Checkpoint, CheckpointError};
use crate::params::{glorot, ParamStore};
use crate::tape::{Tape, Var};
use crate::tensor::{Sparse, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorKind {
    /// Simplex features refined by Chebyshev propagation on the dual graph.
    Snn,
    /// Vertex embeddings pooled over the removed simplices; no propagation.
    EgnnOnly,
    /// MLP on global and circuit-vertex pools; no simplicial structure.
    PoolMlp,
    /// State-level acceptance probability for uniformly proposed flips.
    NlsAccept,
}

impl ActorKind {
    pub fn name(self) -> &'static str {
        match self {
            ActorKind::Snn => "snn",
            ActorKind::EgnnOnly => "egnn_only",
            ActorKind::PoolMlp => "pool_mlp",
            ActorKind::NlsAccept => "nls_accept",
        }
    }
}

impl std::str::FromStr for ActorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [ActorKind::Snn, ActorKind::EgnnOnly, ActorKind::PoolMlp, ActorKind::NlsAccept]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown actor `{s}` (snn, egnn_only, pool_mlp, nls_accept)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub dim: usize,
    pub hidden: usize,
    pub encoder_layers: usize,
    pub actor_layers: usize,
    pub cheb_order: usize,
    pub value_layers: usize,
    pub actor: ActorKind,
    pub init_seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: 3,
            hidden: 64,
            encoder_layers: 3,
            actor_layers: 2,
            cheb_order: 3,
            value_layers: 3,
            actor: ActorKind::Snn,
            init_seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model config serializes")
    }

    pub fn digest(&self) -> String {
        config_digest(&self.to_json())
    }

    fn check(&self) -> Result<(), ModelError> {
        let positive =
            [self.dim, self.hidden, self.encoder_layers, self.actor_layers, self.cheb_order, self.value_layers];
        if positive.contains(&0) {
            return Err(ModelError::Config("all model sizes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("checkpoint does not match the model: {0}")]
    Mismatch(String),
    #[error("action references simplex {0} outside the triangulation")]
    StaleAction(VertexSet),
    #[error("no actions to score")]
    NoActions,
}

#[derive(Debug, Clone)]
struct Linear {
    w: usize,
    b: usize,
}

/// Dense layers with SiLU between them; the last layer is linear unless
/// `final_act` is set.
#[derive(Debug, Clone)]
pub struct Mlp {
    layers: Vec<Linear>,
    final_act: bool,
}

impl Mlp {
    fn build(
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
        name: &str,
        sizes: &[usize],
        final_act: bool,
        last_gain: f64,
    ) -> Mlp {
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|k| {
                let gain = if k + 1 == n { last_gain } else { 1.0 };
                Linear {
                    w: store.add(format!("{name}.{k}.w"), glorot(rng, sizes[k], sizes[k + 1], gain)),
                    b: store.add(format!("{name}.{k}.b"), Tensor::zeros(1, sizes[k + 1])),
                }
            })
            .collect();
        Mlp { layers, final_act }
    }

    pub fn forward<'t>(&self, tape: &'t Tape, store: &ParamStore, mut x: Var<'t>) -> Var<'t> {
        for (k, l) in self.layers.iter().enumerate() {
            x = x.matmul(tape.param(store, l.w)).add_row(tape.param(store, l.b));
            if k + 1 < self.layers.len() || self.final_act {
                x = x.silu();
            }
        }
        x
    }

    fn last(&self) -> &Linear {
        self.layers.last().expect("non-empty MLP")
    }
}

#[derive(Debug, Clone)]
struct EgnnLayer {
    edge: Mlp,
    coord: Mlp,
    node: Mlp,
}

#[derive(Debug, Clone)]
struct ChebLayer {
    thetas: Vec<usize>,
    bias: usize,
}

#[derive(Debug, Clone)]
enum Actor {
    Snn { layers: Vec<ChebLayer>, out: usize },
    EgnnOnly { out: usize },
    PoolMlp { mlp: Mlp },
    NlsAccept { mlp: Mlp },
}

/// Triangulation-dependent inputs of one forward pass.
pub struct StateGraph {
    coords: Tensor,
    /// Directed skeleton edges `src[k] → dst[k]`, both orientations.
    src: Rc<[usize]>,
    dst: Rc<[usize]>,
    inv_degree: Rc<[f64]>,
    simplices: Vec<VertexSet>,
    laplacian: Rc<Sparse>,
}

impl StateGraph {
    /// Uses coordinates centered at the centroid and scaled into the unit
    /// ball, so that configurations of any extent share one input range.
    pub fn new(config: &PointConfig, tri: &Triangulation) -> Self {
        let signs = tri.simplices().iter().map(|&s| f64::from(config.orientation_sign(s))).collect::<Vec<_>>();
        StateGraph::build(normalized_coords(config), &tri.edges(), tri.simplices().to_vec(), &signs)
    }

    /// `edges` are undirected vertex pairs; `simplices` must be sorted and
    /// full-dimensional in `coords`.
    pub fn from_parts(coords: Tensor, edges: &[(usize, usize)], simplices: Vec<VertexSet>) -> Self {
        let signs: Vec<f64> = simplices.iter().map(|&s| float_orientation(&coords, s)).collect();
        StateGraph::build(coords, edges, simplices, &signs)
    }

    fn build(coords: Tensor, edges: &[(usize, usize)], simplices: Vec<VertexSet>, signs: &[f64]) -> Self {
        let n = coords.rows();
        let mut src = Vec::with_capacity(2 * edges.len());
        let mut dst = Vec::with_capacity(2 * edges.len());
        let mut degree = vec![0usize; n];
        for &(a, b) in edges {
            src.extend([a, b]);
            dst.extend([b, a]);
            degree[a] += 1;
            degree[b] += 1;
        }
        let inv_degree: Vec<f64> = degree.iter().map(|&d| if d == 0 { 0.0 } else { 1.0 / d as f64 }).collect();
        let laplacian = Rc::new(normalized_down_laplacian(&simplices, signs));
        StateGraph { coords, src: src.into(), dst: dst.into(), inv_degree: inv_degree.into(), simplices, laplacian }
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.rows()
    }

    pub fn coords(&self) -> &Tensor {
        &self.coords
    }

    pub fn simplices(&self) -> &[VertexSet] {
        &self.simplices
    }

    pub fn laplacian(&self) -> &Sparse {
        &self.laplacian
    }
}

pub fn normalized_coords(config: &PointConfig) -> Tensor {
    let (n, d) = (config.len(), config.dim());
    let mut centroid = vec![0.0; d];
    for i in 0..n {
        for (c, x) in centroid.iter_mut().zip(config.float_point(i)) {
            *c += x / n as f64;
        }
    }
    let rows: Vec<Vec<f64>> =
        (0..n).map(|i| config.float_point(i).iter().zip(&centroid).map(|(x, c)| x - c).collect()).collect();
    let radius = rows.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let scale = if radius > 0.0 { 1.0 / radius } else { 1.0 };
    Tensor::new(n, d, rows.into_iter().flatten().map(|x| x * scale).collect())
}

/// `B_dᵀ B_d` scaled by its largest absolute row sum. Simplex `a` carries
/// the orientation of its ascending vertex tuple times `signs[a]`; the
/// facet omitting position `k` has sign `(-1)^k` within that tuple. With
/// geometric signs the orientation is coherent, so the operator does not
/// depend on vertex labels.
pub fn normalized_down_laplacian(simplices: &[VertexSet], signs: &[f64]) -> Sparse {
    assert_eq!(simplices.len(), signs.len(), "one orientation per simplex");
    let m = simplices.len();
    let mut facets: HashMap<VertexSet, Vec<(usize, f64)>> = HashMap::new();
    for (a, s) in simplices.iter().enumerate() {
        for (k, v) in s.iter().enumerate() {
            let sign = if k % 2 == 0 { signs[a] } else { -signs[a] };
            facets.entry(s.without(v)).or_default().push((a, sign));
        }
    }
    let mut entries: HashMap<(usize, usize), f64> = HashMap::new();
    for cofaces in facets.values() {
        for &(a, sa) in cofaces {
            for &(b, sb) in cofaces {
                *entries.entry((a, b)).or_default() += sa * sb;
            }
        }
    }
    let mut row_sum = vec![0.0f64; m];
    for (&(a, _), v) in &entries {
        row_sum[a] += v.abs();
    }
    let scale = row_sum.iter().copied().fold(0.0, f64::max);
    let mut list: Vec<(usize, usize, f64)> =
        entries.into_iter().filter(|(_, v)| *v != 0.0).map(|((a, b), v)| (a, b, v / scale)).collect();
    list.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    Sparse::new(m, m, list)
}

fn float_orientation(coords: &Tensor, simplex: VertexSet) -> f64 {
    let ids = simplex.to_vec();
    let base = coords.row(ids[0]);
    let mut m: Vec<Vec<f64>> =
        ids[1..].iter().map(|&i| coords.row(i).iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    let d = m.len();
    let mut det = 1.0;
    for c in 0..d {
        let p = (c..d).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).expect("square matrix");
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..d {
            let f = m[r][c] / m[c][c];
            for k in c..d {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    det.signum()
}

/// Encoder output: vertex embeddings and updated coordinates.
#[derive(Clone, Copy)]
pub struct Encoded<'t> {
    pub h: Var<'t>,
    pub x: Var<'t>,
}

#[derive(Debug, Clone)]
pub struct PolicyNet {
    config: ModelConfig,
    store: ParamStore,
    embed: usize,
    encoder: Vec<EgnnLayer>,
    actor: Actor,
    value: Mlp,
}

impl PolicyNet {
    pub fn new(config: ModelConfig) -> Result<Self, ModelError> {
        config.check()?;
        let h = config.hidden;
        let mut rng = ChaCha8Rng::seed_from_u64(config.init_seed);
        let mut store = ParamStore::new();
        let embed = store.add("embed", glorot(&mut rng, config.dim, h, 1.0));
        let encoder = (0..config.encoder_layers)
            .map(|l| EgnnLayer {
                edge: Mlp::build(&mut store, &mut rng, &format!("enc{l}.edge"), &[2 * h + 1, h, h], true, 1.0),
                coord: Mlp::build(&mut store, &mut rng, &format!("enc{l}.coord"), &[h, h, 1], false, 1e-3),
                node: Mlp::build(&mut store, &mut rng, &format!("enc{l}.node"), &[2 * h, h, h], false, 1.0),
            })
            .collect();
        let head = |store: &mut ParamStore, rng: &mut ChaCha8Rng, name: &str, input: usize| {
            let mut sizes = vec![input];
            sizes.extend(std::iter::repeat_n(h, config.value_layers - 1));
            sizes.push(1);
            Mlp::build(store, rng, name, &sizes, false, 1.0)
        };
        let actor = match config.actor {
            ActorKind::Snn => Actor::Snn {
                layers: (0..config.actor_layers)
                    .map(|l| ChebLayer {
                        thetas: (0..config.cheb_order)
                            .map(|k| store.add(format!("actor{l}.theta{k}"), glorot(&mut rng, h, h, 1.0)))
                            .collect(),
                        bias: store.add(format!("actor{l}.b"), Tensor::zeros(1, h)),
                    })
                    .collect(),
                out: store.add("actor.out", glorot(&mut rng, h, 1, 1.0)),
            },
            ActorKind::EgnnOnly => Actor::EgnnOnly { out: store.add("actor.out", glorot(&mut rng, h, 1, 1.0)) },
            ActorKind::PoolMlp => Actor::PoolMlp { mlp: head(&mut store, &mut rng, "actor.mlp", 2 * h) },
            ActorKind::NlsAccept => Actor::NlsAccept { mlp: head(&mut store, &mut rng, "actor.mlp", h) },
        };
        let value = head(&mut store, &mut rng, "value", h);
        Ok(PolicyNet { config, store, embed, encoder, actor, value })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.store
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    /// Sets every parameter of the final value layer to zero.
    pub fn zero_value_head(&mut self) {
        let last = self.value.last().clone();
        for i in [last.w, last.b] {
            self.store.value_mut(i).data_mut().fill(0.0);
        }
    }

    /// Zeroes the last layer of the actor head (`NlsAccept` and `PoolMlp`).
    pub fn zero_actor_head(&mut self) {
        if let Actor::NlsAccept { mlp } | Actor::PoolMlp { mlp } = &self.actor {
            let last = mlp.last().clone();
            for i in [last.w, last.b] {
                self.store.value_mut(i).data_mut().fill(0.0);
            }
        }
    }

    /// Bias of the final actor layer, if the actor has one.
    pub fn actor_bias_index(&self) -> Option<usize> {
        match &self.actor {
            Actor::NlsAccept { mlp } | Actor::PoolMlp { mlp } => Some(mlp.last().b),
            _ => None,
        }
    }

    /// Zeroes the output layers of the coordinate and hidden-update MLPs so
    /// that every encoder layer is the identity.
    pub fn zero_encoder_updates(&mut self) {
        for l in self.encoder.clone() {
            for mlp in [&l.coord, &l.node] {
                let last = mlp.last();
                for i in [last.w, last.b] {
                    self.store.value_mut(i).data_mut().fill(0.0);
                }
            }
        }
    }

    pub fn embed_index(&self) -> usize {
        self.embed
    }

    pub fn initial_hidden<'t>(&self, tape: &'t Tape, g: &StateGraph) -> Var<'t> {
        tape.leaf(g.coords.clone()).matmul(tape.param(&self.store, self.embed))
    }

    /// One message-passing layer.
    pub fn egnn_layer<'t>(&self, tape: &'t Tape, layer: usize, g: &StateGraph, h: Var<'t>, x: Var<'t>) -> Encoded<'t> {
        let l = &self.encoder[layer];
        let n = g.vertex_count();
        if g.src.is_empty() {
            return Encoded { h, x };
        }
        let hi = h.gather_rows(Rc::clone(&g.src));
        let hj = h.gather_rows(Rc::clone(&g.dst));
        let diff = x.gather_rows(Rc::clone(&g.src)).sub(x.gather_rows(Rc::clone(&g.dst)));
        let dist = diff.square().sum_cols();
        let m = l.edge.forward(tape, &self.store, Var::concat_cols(&[hi, hj, dist]));
        let coef = l.coord.forward(tape, &self.store, m);
        let dx = diff.mul_col(coef).scatter_add_rows(Rc::clone(&g.src), n).row_scale(Rc::clone(&g.inv_degree));
        let agg = m.scatter_add_rows(Rc::clone(&g.src), n);
        let dh = l.node.forward(tape, &self.store, Var::concat_cols(&[h, agg]));
        Encoded { h: h.add(dh), x: x.add(dx) }
    }

    pub fn encode<'t>(&self, tape: &'t Tape, g: &StateGraph) -> Encoded<'t> {
        let mut enc = Encoded { h: self.initial_hidden(tape, g), x: tape.leaf(g.coords.clone()) };
        for l in 0..self.encoder.len() {
            enc = self.egnn_layer(tape, l, g, enc.h, enc.x);
        }
        enc
    }

    fn global_pool<'t>(h: Var<'t>) -> Var<'t> {
        h.max_pool_rows(&[(0..h.value().rows()).collect()])
    }

    /// Chebyshev propagation of simplex features, one layer.
    pub fn cheb_layer<'t>(&self, tape: &'t Tape, layer: usize, g: &StateGraph, feats: Var<'t>, last: bool) -> Var<'t> {
        let Actor::Snn { layers, .. } = &self.actor else { panic!("Chebyshev layers exist only in the Snn actor") };
        let l = &layers[layer];
        let mut terms = vec![feats];
        if l.thetas.len() > 1 {
            terms.push(feats.sparse_matmul(Rc::clone(&g.laplacian)));
        }
        while terms.len() < l.thetas.len() {
            let k = terms.len();
            let next = terms[k - 1].sparse_matmul(Rc::clone(&g.laplacian)).scale(2.0).sub(terms[k - 2]);
            terms.push(next);
        }
        let mut out = terms[0].matmul(tape.param(&self.store, l.thetas[0]));
        for (t, &theta) in terms.iter().zip(&l.thetas).skip(1) {
            out = out.add(t.matmul(tape.param(&self.store, theta)));
        }
        out = out.add_row(tape.param(&self.store, l.bias));
        if last {
            out
        } else {
            out.silu()
        }
    }

    /// Refined features of every maximal simplex (`Snn` only).
    pub fn simplex_features<'t>(&self, tape: &'t Tape, g: &StateGraph, enc: &Encoded<'t>) -> Var<'t> {
        let Actor::Snn { layers, .. } = &self.actor else { panic!("simplex features exist only in the Snn actor") };
        let groups: Vec<Vec<usize>> = g.simplices.iter().map(|s| s.to_vec()).collect();
        let mut feats = enc.h.max_pool_rows(&groups);
        for l in 0..layers.len() {
            feats = self.cheb_layer(tape, l, g, feats, l + 1 == layers.len());
        }
        feats
    }

    /// One logit per action, as a `1 × actions` row.
    pub fn action_logits<'t>(
        &self,
        tape: &'t Tape,
        g: &StateGraph,
        enc: &Encoded<'t>,
        actions: &[FlipAction],
    ) -> Result<Var<'t>, ModelError> {
        if actions.is_empty() {
            return Err(ModelError::NoActions);
        }
        let logits = match &self.actor {
            Actor::Snn { out, .. } => {
                let groups = actions
                    .iter()
                    .map(|a| {
                        a.removed
                            .iter()
                            .map(|s| g.simplices.binary_search(s).map_err(|_| ModelError::StaleAction(*s)))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let feats = self.simplex_features(tape, g, enc);
                feats.max_pool_rows(&groups).matmul(tape.param(&self.store, *out))
            }
            Actor::EgnnOnly { out } => {
                let groups = self.removed_vertex_groups(g, actions)?;
                enc.h.max_pool_rows(&groups).matmul(tape.param(&self.store, *out))
            }
            Actor::PoolMlp { mlp } => {
                let global = Self::global_pool(enc.h);
                let repeated = global.gather_rows(vec![0; actions.len()].into());
                let groups: Vec<Vec<usize>> = actions.iter().map(|a| a.circuit.vertices.to_vec()).collect();
                let local = enc.h.max_pool_rows(&groups);
                mlp.forward(tape, &self.store, Var::concat_cols(&[repeated, local]))
            }
            Actor::NlsAccept { .. } => tape.leaf(Tensor::zeros(actions.len(), 1)),
        };
        Ok(logits.transpose())
    }

    fn removed_vertex_groups(&self, g: &StateGraph, actions: &[FlipAction]) -> Result<Vec<Vec<usize>>, ModelError> {
        actions
            .iter()
            .map(|a| {
                let mut all = VertexSet::EMPTY;
                for s in &a.removed {
                    if g.simplices.binary_search(s).is_err() {
                        return Err(ModelError::StaleAction(*s));
                    }
                    all = all.union(*s);
                }
                Ok(all.to_vec())
            })
            .collect()
    }

    pub fn value<'t>(&self, tape: &'t Tape, enc: &Encoded<'t>) -> Var<'t> {
        self.value.forward(tape, &self.store, Self::global_pool(enc.h))
    }

    /// Pre-sigmoid acceptance score (`NlsAccept` only).
    pub fn accept_logit<'t>(&self, tape: &'t Tape, enc: &Encoded<'t>) -> Var<'t> {
        let Actor::NlsAccept { mlp } = &self.actor else {
            panic!("acceptance head exists only in the NlsAccept actor")
        };
        mlp.forward(tape, &self.store, Self::global_pool(enc.h))
    }

    /// Logits of the decision taken at a state: one per action, or
    /// `[reject, accept] = [0, s]` for the acceptance actor.
    pub fn decision_logits<'t>(
        &self,
        tape: &'t Tape,
        g: &StateGraph,
        enc: &Encoded<'t>,
        actions: &[FlipAction],
    ) -> Result<Var<'t>, ModelError> {
        if self.config.actor == ActorKind::NlsAccept {
            let s = self.accept_logit(tape, enc);
            Ok(Var::concat_cols(&[tape.leaf(Tensor::scalar(0.0)), s]))
        } else {
            self.action_logits(tape, g, enc, actions)
        }
    }

    /// Decision logits and value estimate, without keeping the tape.
    pub fn evaluate(&self, config: &PointConfig, tri: &Triangulation, actions: &[FlipAction]) -> (Vec<f64>, f64) {
        let tape = Tape::new();
        let g = StateGraph::new(config, tri);
        let enc = self.encode(&tape, &g);
        let value = self.value(&tape, &enc).item();
        let logits = if actions.is_empty() && self.config.actor != ActorKind::NlsAccept {
            Vec::new()
        } else {
            self.decision_logits(&tape, &g, &enc, actions)
                .expect("actions belong to the triangulation")
                .value()
                .data()
                .to_vec()
        };
        (logits, value)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config_json: self.config.to_json(),
            params: self.store.iter().map(|p| (p.name.clone(), p.value.clone())).collect(),
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self, ModelError> {
        let config: ModelConfig =
            serde_json::from_str(&ck.config_json).map_err(|e| ModelError::Config(e.to_string()))?;
        let mut net = PolicyNet::new(config)?;
        if ck.params.len() != net.store.len() {
            return Err(ModelError::Mismatch(format!(
                "expected {} parameters, found {}",
                net.store.len(),
                ck.params.len()
            )));
        }
        for (i, (name, value)) in ck.params.iter().enumerate() {
            if net.store.name(i) != name || net.store.value(i).shape() != value.shape() {
                return Err(ModelError::Mismatch(format!(
                    "parameter {i}: expected {} {:?}, found {name} {:?}",
                    net.store.name(i),
                    net.store.value(i).shape(),
                    value.shape()
                )));
            }
            *net.store.value_mut(i) = value.clone();
        }
        Ok(net)
    }
}

impl FlipPolicy for PolicyNet {
    fn logits(&self, table: &CircuitTable, tri: &Triangulation, actions: &[FlipAction]) -> Vec<f64> {
        if self.config.actor == ActorKind::NlsAccept {
            return vec![0.0; actions.len()];
        }
        self.evaluate(table.config(), tri, actions).0
    }
}

impl AcceptPolicy for PolicyNet {
    fn accept_probability(&self, table: &CircuitTable, tri: &Triangulation) -> f64 {
        if self.config.actor != ActorKind::NlsAccept {
            return 1.0;
        }
        let tape = Tape::new();
        let g = StateGraph::new(table.config(), tri);
        let enc = self.encode(&tape, &g);
        self.accept_logit(&tape, &enc).sigmoid().item()
    }
}

/// Softmax probabilities of a logit vector over all of its entries.
pub fn policy_distribution(logits: &[f64]) -> Vec<f64> {
    assert!(!logits.is_empty(), "empty action set");
    flipforge_core::search::softmax(logits)
}
