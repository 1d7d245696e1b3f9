//! Triangulations as sorted sets of maximal simplices.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use crate::error::TriError;
use crate::exact::{self, Rational};
use crate::geom::PointConfig;
use crate::lp;
use crate::vset::{subsets, VertexSet};

/// One height per configuration point.
pub type Heights = Vec<Rational>;

/// A set of maximal `d`-simplices, kept sorted and deduplicated so that
/// structural equality is set equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Triangulation {
    dim: usize,
    simplices: Vec<VertexSet>,
}

/// Hashable identity of a triangulation: its sorted simplex masks.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriKey(Box<[u128]>);

impl TriKey {
    /// Hex SHA-256 of the key, for logs.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for bits in self.0.iter() {
            h.update(bits.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn simplices(&self) -> impl Iterator<Item = VertexSet> + '_ {
        self.0.iter().map(|&b| VertexSet::from_bits(b))
    }
}

impl fmt::Debug for TriKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TriKey({})", &self.digest()[..12])
    }
}

impl Triangulation {
    pub fn new<I: IntoIterator<Item = VertexSet>>(dim: usize, simplices: I) -> Self {
        let mut simplices: Vec<VertexSet> = simplices.into_iter().collect();
        simplices.sort_unstable();
        simplices.dedup();
        Triangulation { dim, simplices }
    }

    pub fn from_tuples(dim: usize, tuples: &[&[usize]]) -> Self {
        Triangulation::new(dim, tuples.iter().map(|t| VertexSet::from_ids(t.iter().copied())))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn simplices(&self) -> &[VertexSet] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn contains(&self, simplex: VertexSet) -> bool {
        self.simplices.binary_search(&simplex).is_ok()
    }

    pub fn key(&self) -> TriKey {
        TriKey(self.simplices.iter().map(|s| s.bits()).collect())
    }

    pub fn from_key(dim: usize, key: &TriKey) -> Self {
        Triangulation::new(dim, key.simplices())
    }

    /// Union of the simplices' vertices.
    pub fn vertices(&self) -> VertexSet {
        self.simplices.iter().fold(VertexSet::EMPTY, |a, &s| a.union(s))
    }

    /// Replaces `removed` by `inserted`; the caller guarantees `removed ⊆ self`.
    pub(crate) fn replace(&self, removed: &[VertexSet], inserted: &[VertexSet]) -> Self {
        let mut simplices: Vec<VertexSet> = self.simplices.iter().copied().filter(|s| !removed.contains(s)).collect();
        simplices.extend_from_slice(inserted);
        Triangulation::new(self.dim, simplices)
    }

    /// Maximal elements of the link of `face`: `σ ∖ face` over simplices `σ ⊇ face`.
    pub fn link_of(&self, face: VertexSet) -> Result<Vec<VertexSet>, TriError> {
        let link: Vec<VertexSet> =
            self.simplices.iter().filter(|&&s| face.is_subset(s)).map(|&s| s.minus(face)).collect();
        if link.is_empty() {
            return Err(TriError::FaceNotInClosure(format!("{face:?}")));
        }
        Ok(link)
    }

    /// `(face, simplex index)` pairs for every codimension-one face, grouped by face.
    fn ridge_incidences(&self) -> Vec<(VertexSet, usize)> {
        let mut pairs: Vec<(VertexSet, usize)> =
            self.simplices.iter().enumerate().flat_map(|(k, &s)| s.iter().map(move |v| (s.without(v), k))).collect();
        pairs.sort_unstable_by_key(|&(f, k)| (f.bits(), k));
        pairs
    }

    pub fn dual_graph(&self) -> DualGraph {
        let pairs = self.ridge_incidences();
        let mut adj = vec![Vec::new(); self.len()];
        let mut edges = Vec::new();
        for group in pairs.chunk_by(|a, b| a.0 == b.0) {
            for (i, a) in group.iter().enumerate() {
                for b in &group[i + 1..] {
                    edges.push((a.1, b.1));
                    adj[a.1].push(b.1);
                    adj[b.1].push(a.1);
                }
            }
        }
        edges.sort_unstable();
        for a in &mut adj {
            a.sort_unstable();
        }
        DualGraph { adj, edges }
    }

    pub fn dual_diameter(&self) -> usize {
        self.dual_graph().diameter()
    }

    /// Edges of the 1-skeleton as sorted id pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in &self.simplices {
            let ids = s.to_vec();
            for (i, &a) in ids.iter().enumerate() {
                for &b in &ids[i + 1..] {
                    out.push((a, b));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_fine(&self, config: &PointConfig) -> bool {
        self.vertices() == config.all()
    }

    pub fn is_star(&self, config: &PointConfig, origin: usize) -> Result<bool, TriError> {
        if origin >= config.len() {
            return Err(TriError::InvalidVertex(origin));
        }
        Ok(self.simplices.iter().all(|s| s.contains(origin)))
    }

    /// Certifies that the simplices tile the hull of `config`.
    ///
    /// Clauses are checked in the order: vertex ids, nondegeneracy, volume
    /// identity, ridge multiplicity, boundary ridges on hull facets, and
    /// finally that paired simplices lie on opposite sides of their ridge.
    /// The first failure is reported.
    pub fn validate(&self, config: &PointConfig) -> Validity {
        let d = config.dim();
        if self.dim != d {
            return Validity::Invalid(Violation::Dimension { expected: d, found: self.dim });
        }
        if self.simplices.is_empty() {
            return Validity::Invalid(Violation::Empty);
        }
        for &s in &self.simplices {
            if let Some(v) = s.iter().find(|&v| v >= config.len()) {
                return Validity::Invalid(Violation::InvalidVertex(v));
            }
            if s.len() != d + 1 {
                return Validity::Invalid(Violation::WrongSize(s));
            }
        }
        let mut orient = Vec::with_capacity(self.len());
        for &s in &self.simplices {
            let o = config.orientation(s);
            if o.is_zero() {
                return Validity::Invalid(Violation::Degenerate(s));
            }
            orient.push(o);
        }
        let total: BigInt = orient.iter().map(|o| o.abs()).sum();
        if &total != config.hull_det_sum() {
            return Validity::Invalid(Violation::Volume);
        }
        let pairs = self.ridge_incidences();
        let groups: Vec<&[(VertexSet, usize)]> = pairs.chunk_by(|a, b| a.0 == b.0).collect();
        if let Some(g) = groups.iter().find(|g| g.len() > 2) {
            return Validity::Invalid(Violation::OverusedRidge(g[0].0));
        }
        let facets = &config.hull().facets;
        for g in groups.iter().filter(|g| g.len() == 1) {
            if !facets.iter().any(|f| g[0].0.is_subset(f.points)) {
                return Validity::Invalid(Violation::BoundaryRidge(g[0].0));
            }
        }
        // Paired ridges must separate their two apexes.
        let side = |face: VertexSet, k: usize| {
            let s = self.simplices[k];
            let apex = s.minus(face).min().unwrap();
            let moves = d - s.rank_of(apex).unwrap();
            orient[k].is_positive() != (moves % 2 == 1)
        };
        for g in groups.iter().filter(|g| g.len() == 2) {
            if side(g[0].0, g[0].1) == side(g[1].0, g[1].1) {
                return Validity::Invalid(Violation::FoldedRidge(g[0].0));
            }
        }
        Validity::Valid
    }

    /// Integer constraint rows `λ·w ≥ 1` whose joint feasibility is equivalent
    /// to regularity: strict folding across every interior ridge and strict
    /// lifting of every unused point above the simplex containing it.
    pub fn regularity_constraints(&self, config: &PointConfig) -> Vec<Vec<BigInt>> {
        let n = config.len();
        let mut rows = Vec::new();
        let mut push = |set: VertexSet, positive: usize| {
            let basis = config.dependences(set);
            debug_assert_eq!(basis.len(), 1, "expected a one-dimensional dependence on {set:?}");
            let lambda = &basis[0];
            let at = set.rank_of(positive).unwrap();
            let flip = lambda[at].is_negative();
            let mut row = vec![BigInt::zero(); n];
            for (v, c) in set.iter().zip(lambda) {
                row[v] = if flip { -c } else { c.clone() };
            }
            rows.push(row);
        };
        let pairs = self.ridge_incidences();
        for group in pairs.chunk_by(|a, b| a.0 == b.0) {
            if group.len() == 2 {
                let a = self.simplices[group[0].1].minus(group[0].0);
                let b = self.simplices[group[1].1].minus(group[1].0);
                push(group[0].0.union(a).union(b), a.min().unwrap());
            }
        }
        let used = self.vertices();
        for p in (0..n).filter(|&p| !used.contains(p)) {
            let host = self
                .simplices
                .iter()
                .copied()
                .find(|&s| config.in_simplex(s, p))
                .expect("every point lies in some simplex of a valid triangulation");
            push(host.with(p), p);
        }
        rows
    }

    /// Heights inducing this triangulation, or `None` if it is not regular.
    pub fn regularity_witness(&self, config: &PointConfig) -> Option<Heights> {
        let rows = self.regularity_constraints(config);
        lp::feasible_point(&rows, config.len())
    }

    pub fn is_regular(&self, config: &PointConfig) -> bool {
        self.regularity_witness(config).is_some()
    }
}

impl fmt::Debug for Triangulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.simplices.iter()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Dimension { expected: usize, found: usize },
    Empty,
    InvalidVertex(usize),
    WrongSize(VertexSet),
    Degenerate(VertexSet),
    Volume,
    OverusedRidge(VertexSet),
    FoldedRidge(VertexSet),
    BoundaryRidge(VertexSet),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid(Violation),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Dimension { expected, found } => {
                write!(f, "triangulation dimension {found} does not match configuration dimension {expected}")
            }
            Violation::Empty => write!(f, "no simplices"),
            Violation::InvalidVertex(v) => write!(f, "vertex id {v} is out of range"),
            Violation::WrongSize(s) => write!(f, "simplex {s:?} has the wrong number of vertices"),
            Violation::Degenerate(s) => write!(f, "simplex {s:?} is degenerate"),
            Violation::Volume => write!(f, "simplex volumes do not sum to the hull volume"),
            Violation::OverusedRidge(r) => write!(f, "ridge {r:?} lies in more than two simplices"),
            Violation::FoldedRidge(r) => write!(f, "both simplices at ridge {r:?} lie on the same side"),
            Violation::BoundaryRidge(r) => write!(f, "unpaired ridge {r:?} is not on the hull boundary"),
        }
    }
}

/// Adjacency of maximal simplices through shared ridges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualGraph {
    pub adj: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
}

impl DualGraph {
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn bfs(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.adj.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.adj.is_empty() || self.bfs(0).iter().all(Option::is_some)
    }

    /// Largest BFS distance over all node pairs (unreachable pairs are skipped).
    pub fn diameter(&self) -> usize {
        (0..self.adj.len()).map(|s| self.bfs(s).into_iter().flatten().max().unwrap_or(0)).max().unwrap_or(0)
    }
}

/// Projects the lower hull of the lifted points `(p_i, heights_i)`.
///
/// A `(d+1)`-subset is a cell iff every other lifted point lies strictly above
/// the hyperplane through it. A point exactly on a lower supporting
/// hyperplane means a non-simplicial cell, reported as `DegenerateHeights`.
pub fn regular_from_heights(config: &PointConfig, heights: &[Rational]) -> Result<Triangulation, TriError> {
    let n = config.len();
    let d = config.dim();
    if heights.len() != n {
        return Err(TriError::HeightCount { expected: n, got: heights.len() });
    }
    let l = heights.iter().fold(BigInt::one(), |l, h| l.lcm(h.denom()));
    let lifted: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut row = config.scaled_point(i).to_vec();
            row.push(heights[i].numer() * (&l / heights[i].denom()));
            row
        })
        .collect();
    let small: Option<Vec<Vec<i64>>> =
        lifted.iter().map(|r| r.iter().map(|v| v.to_i64().filter(|x| x.abs() < 1 << 40)).collect()).collect();
    let lifted_det = |ids: &[usize]| -> BigInt {
        if let Some(small) = &small {
            let base = &small[ids[0]];
            let m =
                ids[1..].iter().map(|&i| small[i].iter().zip(base).map(|(&a, &b)| (a - b) as i128).collect()).collect();
            if let Some(v) = exact::det_i128(m) {
                return BigInt::from(v);
            }
        }
        let base = &lifted[ids[0]];
        let m = ids[1..].iter().map(|&i| lifted[i].iter().zip(base).map(|(a, b)| a - b).collect()).collect();
        exact::det(m)
    };
    let mut cells = Vec::new();
    let mut degenerate = false;
    for s in subsets(config.all(), d + 1) {
        let o = config.orientation(s);
        if o.is_zero() {
            continue;
        }
        let mut ids = s.to_vec();
        ids.push(0);
        let mut lower = true;
        let mut flat = false;
        for q in (0..n).filter(|&q| !s.contains(q)) {
            ids[d + 1] = q;
            // sign(height of q above the plane through s) = sign(det) · sign(o)
            let above = lifted_det(&ids).signum() * o.signum();
            if above.is_negative() {
                lower = false;
                break;
            }
            if above.is_zero() {
                flat = true;
            }
        }
        if lower {
            if flat {
                degenerate = true;
                break;
            }
            cells.push(s);
        }
    }
    if degenerate || cells.is_empty() {
        return Err(TriError::DegenerateHeights);
    }
    Ok(Triangulation::new(d, cells))
}
