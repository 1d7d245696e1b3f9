//! Point configurations, exact convex hulls, volumes and lattice points.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::GeomError;
use crate::exact::{self, Rational};
use crate::vset::{subsets, VertexSet, MAX_POINTS};

pub type Point = Vec<Rational>;

/// Largest supported ambient dimension (a 4D configuration plus one lifting
/// coordinate).
pub const MAX_DIM: usize = 5;

/// Supporting halfspace `normal·p ≤ offset` of the hull.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullFacet {
    /// Every configuration point lying on the facet, including non-extreme ones.
    pub points: VertexSet,
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

#[derive(Debug, Clone)]
pub struct Hull {
    pub facets: Vec<HullFacet>,
    pub extreme: VertexSet,
}

#[derive(Debug, Clone)]
struct Derived {
    hull: Hull,
    /// Facet inequalities in column-scaled integer coordinates.
    int_facets: Vec<(Vec<BigInt>, BigInt)>,
    pulling: Vec<VertexSet>,
    /// Sum of `|det|` over the pulling triangulation, in scaled coordinates.
    det_sum: BigInt,
    volume: Rational,
}

/// A labeled, full-dimensional set of exact rational points.
///
/// Indices are stable vertex labels. Derived data (hull, volume) is computed
/// lazily and cached, so a configuration is cheap to share behind an `Arc`.
#[derive(Debug, Clone)]
pub struct PointConfig {
    dim: usize,
    points: Vec<Point>,
    is_lattice: bool,
    scaled: Vec<Vec<BigInt>>,
    scales: Vec<BigInt>,
    small: Option<Vec<Vec<i64>>>,
    floats: Vec<Vec<f64>>,
    derived: OnceLock<Derived>,
}

impl PartialEq for PointConfig {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points
    }
}

impl PointConfig {
    pub fn new(dim: usize, points: Vec<Point>) -> Result<Self, GeomError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(GeomError::UnsupportedDimension(dim));
        }
        if points.len() < dim + 1 {
            return Err(GeomError::TooFewPoints { needed: dim + 1, got: points.len() });
        }
        if points.len() > MAX_POINTS {
            return Err(GeomError::TooManyPoints { max: MAX_POINTS, got: points.len() });
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(GeomError::DimensionMismatch { expected: dim, found: p.len() });
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].cmp(&points[b]));
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(GeomError::DuplicatePoint(a, b));
            }
        }
        let is_lattice = points.iter().flatten().all(exact::is_integral);
        let (scaled, scales) = exact::scale_columns(&points, dim);
        let small = scaled
            .iter()
            .map(|row| row.iter().map(|v| v.to_i64().filter(|x| x.abs() < 1 << 40)).collect())
            .collect::<Option<Vec<Vec<i64>>>>();
        let floats = points.iter().map(|p| p.iter().map(exact::to_f64).collect()).collect();
        let config = PointConfig { dim, points, is_lattice, scaled, scales, small, floats, derived: OnceLock::new() };
        let rank = config.affine_dim(VertexSet::full(config.len()));
        if rank < dim {
            return Err(GeomError::Degenerate { rank, dim });
        }
        Ok(config)
    }

    pub fn from_ints(dim: usize, rows: &[&[i64]]) -> Result<Self, GeomError> {
        let points = rows.iter().map(|r| r.iter().map(|&v| exact::rat(v)).collect()).collect();
        PointConfig::new(dim, points)
    }

    /// Snaps float coordinates to multiples of `2^-bits`.
    pub fn from_f64(dim: usize, rows: &[Vec<f64>], bits: u32) -> Result<Self, GeomError> {
        let points = rows
            .iter()
            .map(|r| r.iter().map(|&x| exact::snap_to_rational(x, bits)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        PointConfig::new(dim, points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_lattice(&self) -> bool {
        self.is_lattice
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[Rational] {
        &self.points[i]
    }

    pub fn float_point(&self, i: usize) -> &[f64] {
        &self.floats[i]
    }

    /// Column-scaled integer coordinates of point `i`.
    pub fn scaled_point(&self, i: usize) -> &[BigInt] {
        &self.scaled[i]
    }

    pub fn all(&self) -> VertexSet {
        VertexSet::full(self.len())
    }

    pub fn hull(&self) -> &Hull {
        &self.derived().hull
    }

    pub fn hull_volume(&self) -> &Rational {
        &self.derived().volume
    }

    /// Sum of absolute scaled determinants over any triangulation of the hull.
    pub(crate) fn hull_det_sum(&self) -> &BigInt {
        &self.derived().det_sum
    }

    /// A deterministic triangulation of the hull's extreme points, built by
    /// pulling the smallest-index vertex of every face.
    pub fn pulling_triangulation(&self) -> &[VertexSet] {
        &self.derived().pulling
    }

    fn derived(&self) -> &Derived {
        self.derived.get_or_init(|| self.compute_derived())
    }

    /// Dimension of the affine hull of the points in `set` (`-1` is mapped to 0).
    pub fn affine_dim(&self, set: VertexSet) -> usize {
        let ids = set.to_vec();
        if ids.len() <= 1 {
            return 0;
        }
        let base = &self.scaled[ids[0]];
        let rows: Vec<Vec<BigInt>> =
            ids[1..].iter().map(|&i| self.scaled[i].iter().zip(base).map(|(a, b)| a - b).collect()).collect();
        exact::rank(&rows)
    }

    /// Signed determinant of `p_i − p_first` over the ascending ids of a
    /// `(d+1)`-set, in scaled coordinates.
    pub(crate) fn orientation(&self, simplex: VertexSet) -> BigInt {
        let ids = simplex.to_vec();
        debug_assert_eq!(ids.len(), self.dim + 1);
        if let Some(small) = &self.small {
            let base = &small[ids[0]];
            let m: Vec<Vec<i128>> =
                ids[1..].iter().map(|&i| small[i].iter().zip(base).map(|(&a, &b)| (a - b) as i128).collect()).collect();
            if let Some(d) = exact::det_i128(m) {
                return BigInt::from(d);
            }
        }
        let base = &self.scaled[ids[0]];
        let m: Vec<Vec<BigInt>> =
            ids[1..].iter().map(|&i| self.scaled[i].iter().zip(base).map(|(a, b)| a - b).collect()).collect();
        exact::det(m)
    }

    /// Sign (−1, 0 or 1) of the simplex with its vertices in ascending order.
    pub fn orientation_sign(&self, simplex: VertexSet) -> i8 {
        match self.orientation(simplex).sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        }
    }

    pub fn is_degenerate_simplex(&self, simplex: VertexSet) -> bool {
        simplex.len() != self.dim + 1 || self.orientation(simplex).is_zero()
    }

    pub fn simplex_volume(&self, simplex: VertexSet) -> Result<Rational, GeomError> {
        if simplex.len() != self.dim + 1 {
            return Err(GeomError::WrongVertexCount { expected: self.dim + 1, got: simplex.len() });
        }
        let det = self.orientation(simplex).abs();
        Ok(Rational::new(det, self.volume_denominator()))
    }

    /// `d! · Π scales`: converts scaled determinants to Euclidean volume.
    fn volume_denominator(&self) -> BigInt {
        let fact: BigInt = (1..=self.dim).map(BigInt::from).product();
        self.scales.iter().fold(fact, |acc, s| acc * s)
    }

    /// Integer basis of the affine dependences among `set` (ascending ids).
    pub fn dependences(&self, set: VertexSet) -> Vec<Vec<BigInt>> {
        let ids = set.to_vec();
        let mut rows: Vec<Vec<BigInt>> =
            (0..self.dim).map(|j| ids.iter().map(|&i| self.scaled[i][j].clone()).collect()).collect();
        rows.push(vec![BigInt::one(); ids.len()]);
        exact::nullspace(&rows, ids.len())
    }

    /// Exact containment of an arbitrary rational point in the hull.
    pub fn contains(&self, q: &[Rational]) -> bool {
        self.hull().facets.iter().all(|f| {
            let lhs: Rational = f.normal.iter().zip(q).map(|(a, x)| a * x).sum();
            lhs <= f.offset
        })
    }

    /// Points `i` whose scaled coordinates lie in the closed simplex.
    pub(crate) fn in_simplex(&self, simplex: VertexSet, p: usize) -> bool {
        // p lies in the simplex iff replacing any vertex by p never flips the
        // orientation sign.
        let base = self.orientation(simplex);
        let s0 = base.signum();
        simplex.iter().all(|v| {
            let ids: Vec<usize> = simplex.iter().map(|u| if u == v { p } else { u }).collect();
            let o = self.orientation_ids(&ids);
            let s = o.signum();
            s.is_zero() || s == s0
        })
    }

    fn orientation_ids(&self, ids: &[usize]) -> BigInt {
        // orientation with the given row order (not sorted)
        let base = &self.scaled[ids[0]];
        let m: Vec<Vec<BigInt>> =
            ids[1..].iter().map(|&i| self.scaled[i].iter().zip(base).map(|(a, b)| a - b).collect()).collect();
        exact::det(m)
    }

    fn compute_derived(&self) -> Derived {
        let (facets, int_facets) = self.compute_facets();
        let n = self.len();
        let mut extreme = VertexSet::EMPTY;
        for i in 0..n {
            let inter =
                facets.iter().filter(|f| f.points.contains(i)).fold(self.all(), |acc, f| acc.intersection(f.points));
            if inter == VertexSet::singleton(i) {
                extreme = extreme.with(i);
            }
        }
        let facet_sets: Vec<VertexSet> = facets.iter().map(|f| f.points.intersection(extreme)).collect();
        let mut memo = HashMap::new();
        let pulling = self.pull(extreme, self.dim, &facet_sets, &mut memo);
        let det_sum: BigInt = pulling.iter().map(|&s| self.orientation(s).abs()).sum();
        let volume = Rational::new(det_sum.clone(), self.volume_denominator());
        Derived { hull: Hull { facets, extreme }, int_facets, pulling, det_sum, volume }
    }

    /// Facets by exhaustive exact search over hyperplanes through `d` points.
    fn compute_facets(&self) -> (Vec<HullFacet>, Vec<(Vec<BigInt>, BigInt)>) {
        let n = self.len();
        let mut found: Vec<(VertexSet, Vec<BigInt>, BigInt)> = Vec::new();
        for cand in subsets(self.all(), self.dim) {
            if found.iter().any(|f| cand.is_subset(f.0)) {
                continue;
            }
            let pts: Vec<&[BigInt]> = cand.iter().map(|i| &self.scaled[i][..]).collect();
            let Some((a, b)) = exact::hyperplane_through(&pts) else {
                continue;
            };
            let (mut pos, mut neg) = (false, false);
            let mut on = VertexSet::EMPTY;
            for i in 0..n {
                let s = exact::dot(&a, &self.scaled[i]) - &b;
                if s.is_positive() {
                    pos = true;
                } else if s.is_negative() {
                    neg = true;
                } else {
                    on = on.with(i);
                }
                if pos && neg {
                    break;
                }
            }
            if pos && neg {
                continue;
            }
            if pos {
                found.push((on, a.into_iter().map(|x| -x).collect(), -b));
            } else {
                found.push((on, a, b));
            }
        }
        let facets = found
            .iter()
            .map(|(on, a, b)| {
                let normal: Vec<BigInt> = a.iter().zip(&self.scales).map(|(x, s)| x * s).collect();
                let g = normal.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
                HullFacet {
                    points: *on,
                    normal: normal.iter().map(|v| Rational::new(v.clone(), g.clone())).collect(),
                    offset: Rational::new(b.clone(), g.clone()),
                }
            })
            .collect();
        let ints = found.into_iter().map(|(_, a, b)| (a, b)).collect();
        (facets, ints)
    }

    fn pull(
        &self,
        face: VertexSet,
        k: usize,
        facets: &[VertexSet],
        memo: &mut HashMap<VertexSet, Vec<VertexSet>>,
    ) -> Vec<VertexSet> {
        if face.len() == k + 1 {
            return vec![face];
        }
        if let Some(done) = memo.get(&face) {
            return done.clone();
        }
        let apex = face.min().expect("nonempty face");
        let mut subfaces: Vec<VertexSet> = Vec::new();
        for &f in facets {
            let g = face.intersection(f);
            if g.contains(apex) || g.len() < k || subfaces.contains(&g) {
                continue;
            }
            if self.affine_dim(g) == k - 1 {
                subfaces.push(g);
            }
        }
        let mut out = Vec::new();
        for g in subfaces {
            for s in self.pull(g, k - 1, facets, memo) {
                out.push(s.with(apex));
            }
        }
        out.sort();
        memo.insert(face, out.clone());
        out
    }

    /// All integer points in the hull, in lexicographic order.
    pub fn lattice_points(&self) -> Result<Vec<Point>, GeomError> {
        if !self.is_lattice {
            return Err(GeomError::NotLattice);
        }
        let d = self.dim;
        let lo: Vec<BigInt> = (0..d).map(|j| self.scaled.iter().map(|p| &p[j]).min().unwrap().clone()).collect();
        let hi: Vec<BigInt> = (0..d).map(|j| self.scaled.iter().map(|p| &p[j]).max().unwrap().clone()).collect();
        let facets = &self.derived().int_facets;
        let mut out = Vec::new();
        let mut cur = lo.clone();
        loop {
            if facets.iter().all(|(a, b)| exact::dot(a, &cur) <= *b) {
                out.push(cur.iter().cloned().map(Rational::from_integer).collect());
            }
            // odometer, last coordinate fastest
            let mut j = d;
            loop {
                if j == 0 {
                    return Ok(out);
                }
                j -= 1;
                if cur[j] < hi[j] {
                    cur[j] += 1;
                    for (c, l) in cur[j + 1..].iter_mut().zip(&lo[j + 1..]) {
                        *c = l.clone();
                    }
                    break;
                }
            }
        }
    }
}

/// Affine dependence among `points`, normalized so the first nonzero entry
/// is `+1`, or `None` if the points are affinely independent.
pub fn affine_dependence(points: &[Point]) -> Result<Option<Vec<Rational>>, GeomError> {
    let Some(first) = points.first() else {
        return Ok(None);
    };
    let d = first.len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(GeomError::DimensionMismatch { expected: d, found: p.len() });
    }
    // Row j holds coordinate j of every point; scaling a row by the lcm of its
    // denominators leaves the nullspace unchanged.
    let mut rows: Vec<Vec<BigInt>> = (0..d)
        .map(|j| {
            let l = points.iter().fold(BigInt::one(), |l, p| l.lcm(p[j].denom()));
            points.iter().map(|p| p[j].numer() * (&l / p[j].denom())).collect()
        })
        .collect();
    rows.push(vec![BigInt::one(); points.len()]);
    let basis = exact::nullspace(&rows, points.len());
    Ok(basis.into_iter().next().map(|v| normalize_first_positive(&v)))
}

/// Scales an integer vector so its first nonzero entry is exactly `1`.
pub fn normalize_first_positive(v: &[BigInt]) -> Vec<Rational> {
    let lead = v.iter().find(|x| !x.is_zero()).cloned().unwrap_or_else(BigInt::one);
    v.iter().map(|x| Rational::new(x.clone(), lead.clone())).collect()
}

/// Euclidean volume `|det|/d!` of `d+1` points in `R^d`.
pub fn simplex_volume(vertices: &[Point]) -> Result<Rational, GeomError> {
    let d = vertices.first().map_or(0, Vec::len);
    if let Some(p) = vertices.iter().find(|p| p.len() != d) {
        return Err(GeomError::DimensionMismatch { expected: d, found: p.len() });
    }
    if vertices.len() != d + 1 {
        return Err(GeomError::WrongVertexCount { expected: d + 1, got: vertices.len() });
    }
    let base = &vertices[0];
    let diffs: Vec<Vec<Rational>> =
        vertices[1..].iter().map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    let (ints, scales) = exact::scale_columns(&diffs, d);
    let fact: BigInt = (1..=d).map(BigInt::from).product();
    let denom = scales.iter().fold(fact, |acc, s| acc * s);
    Ok(Rational::new(exact::det(ints).abs(), denom))
}

pub fn convex_hull(config: &PointConfig) -> &Hull {
    config.hull()
}

pub fn lattice_points(config: &PointConfig) -> Result<Vec<Point>, GeomError> {
    config.lattice_points()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_frac};

    pub(crate) fn cube() -> PointConfig {
        let rows: Vec<Vec<i64>> = (0..8).map(|m| vec![m & 1, (m >> 1) & 1, (m >> 2) & 1]).collect();
        let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
        PointConfig::from_ints(3, &refs).unwrap()
    }

    fn pts(rows: &[&[i64]]) -> Vec<Point> {
        rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect()
    }

    #[test]
    fn dependence_examples() {
        let line = pts(&[&[0], &[1], &[2]]);
        assert_eq!(affine_dependence(&line).unwrap(), Some(vec![rat(1), rat(-2), rat(1)]));
        let square = pts(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        assert_eq!(affine_dependence(&square).unwrap(), Some(vec![rat(1), rat(-1), rat(-1), rat(1)]));
        let tri = pts(&[&[0, 0], &[1, 0], &[0, 1]]);
        assert_eq!(affine_dependence(&tri).unwrap(), None);
        let bad = pts(&[&[0, 0], &[1]]);
        assert!(affine_dependence(&bad).is_err());
    }

    #[test]
    fn cube_and_simplex_hulls() {
        let c = cube();
        assert_eq!(c.hull().facets.len(), 6);
        assert_eq!(c.hull().extreme.len(), 8);
        assert_eq!(*c.hull_volume(), rat(1));
        let s = PointConfig::from_ints(3, &[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap();
        assert_eq!(s.hull().facets.len(), 4);
        assert_eq!(*s.hull_volume(), rat_frac(1, 6));
    }

    #[test]
    fn facets_satisfy_their_inequalities() {
        let c = PointConfig::from_ints(2, &[&[0, 0], &[2, 0], &[1, 1], &[0, 1], &[1, 0]]).unwrap();
        for f in &c.hull().facets {
            for i in 0..c.len() {
                let lhs: Rational = f.normal.iter().zip(c.point(i)).map(|(a, x)| a * x).sum();
                assert!(lhs <= f.offset);
                assert_eq!(lhs == f.offset, f.points.contains(i));
            }
        }
        // (1,0) sits on the bottom edge but is not a vertex
        assert_eq!(c.hull().extreme, VertexSet::from_ids([0, 1, 2, 3]));
    }

    #[test]
    fn interior_centroid_is_not_extreme() {
        let c = PointConfig::from_ints(3, &[&[0, 0, 0], &[4, 0, 0], &[0, 4, 0], &[0, 0, 4], &[1, 1, 1]]).unwrap();
        assert_eq!(c.hull().extreme, VertexSet::from_ids([0, 1, 2, 3]));
        assert_eq!(c.hull().facets.len(), 4);
    }

    #[test]
    fn volumes() {
        let std3 = pts(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(simplex_volume(&std3).unwrap(), rat_frac(1, 6));
        let flat = pts(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[1, 1, 0]]);
        assert_eq!(simplex_volume(&flat).unwrap(), rat(0));
        let half = pts(&[&[0, 0], &[1, 0], &[1, 1]]);
        assert_eq!(simplex_volume(&half).unwrap(), rat_frac(1, 2));
        assert!(simplex_volume(&half[..2]).is_err());
    }

    #[test]
    fn lattice_point_counts() {
        let sq = PointConfig::from_ints(2, &[&[-1, -1], &[1, -1], &[1, 1], &[-1, 1]]).unwrap();
        let lp = sq.lattice_points().unwrap();
        assert_eq!(lp.len(), 9);
        assert!(lp.windows(2).all(|w| w[0] < w[1]));
        let cross =
            PointConfig::from_ints(3, &[&[1, 0, 0], &[-1, 0, 0], &[0, 1, 0], &[0, -1, 0], &[0, 0, 1], &[0, 0, -1]])
                .unwrap();
        assert_eq!(cross.lattice_points().unwrap().len(), 7);
        let seg = PointConfig::from_ints(1, &[&[0], &[1]]).unwrap();
        assert_eq!(seg.lattice_points().unwrap().len(), 2);
        let half = PointConfig::new(1, vec![vec![rat_frac(1, 2)], vec![rat(2)]]).unwrap();
        assert_eq!(half.lattice_points(), Err(GeomError::NotLattice));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(PointConfig::from_ints(2, &[&[0, 0], &[1, 1], &[2, 2]]), Err(GeomError::Degenerate { .. })));
        assert!(matches!(
            PointConfig::from_ints(2, &[&[0, 0], &[1, 0], &[0, 0]]),
            Err(GeomError::DuplicatePoint(0, 2))
        ));
        assert!(matches!(PointConfig::from_ints(2, &[&[0, 0], &[1, 0]]), Err(GeomError::TooFewPoints { .. })));
    }

    #[test]
    fn pulling_triangulation_covers_hull() {
        let c = cube();
        let tri = c.pulling_triangulation();
        let total: Rational = tri.iter().map(|&s| c.simplex_volume(s).unwrap()).sum();
        assert_eq!(total, rat(1));
        assert!(tri.iter().all(|&s| s.contains(0)));
    }
}
