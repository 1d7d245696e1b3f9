//! Synthetic polytope datasets: Gaussian samples, hull extraction,
//! deduplication up to combinatorial type, and seed triangulations.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DatasetError, FormatError, GenError, TriError};
use crate::exact::{rat, Rational, SNAP_BITS};
use crate::flips::{enumerate_component, CircuitTable};
use crate::geom::{PointConfig, MAX_DIM};
use crate::io;
use crate::par::Exec;
use crate::tri::{regular_from_heights, Triangulation};
use crate::vset::VertexSet;

pub const DRAW_CAP: usize = 1_000_000;
pub const DEFAULT_SEED_CAP: usize = 2000;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub dim: usize,
    /// Points drawn per sample; the hull may have fewer vertices.
    pub samples: usize,
    pub count: usize,
    pub seed: u64,
    #[serde(default = "default_snap_bits")]
    pub snap_bits: u32,
    #[serde(default = "default_seed_cap")]
    pub seed_cap: usize,
    /// Keep only draws whose hull has exactly this many vertices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub require_vertices: Option<usize>,
}

fn default_snap_bits() -> u32 {
    SNAP_BITS
}

fn default_seed_cap() -> usize {
    DEFAULT_SEED_CAP
}

impl GenSpec {
    pub fn new(dim: usize, samples: usize, count: usize, seed: u64) -> Self {
        GenSpec { dim, samples, count, seed, snap_bits: SNAP_BITS, seed_cap: DEFAULT_SEED_CAP, require_vertices: None }
    }

    pub fn check(&self) -> Result<(), GenError> {
        let bad = |m: String| Err(GenError::InvalidSpec(m));
        if self.dim == 0 || self.dim > MAX_DIM {
            return bad(format!("dimension must be in 1..={MAX_DIM}, got {}", self.dim));
        }
        if self.samples < self.dim + 1 {
            return bad(format!("need at least {} samples per draw, got {}", self.dim + 1, self.samples));
        }
        if self.samples > crate::vset::MAX_POINTS {
            return bad(format!("at most {} samples per draw", crate::vset::MAX_POINTS));
        }
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if self.snap_bits == 0 || self.snap_bits > 40 {
            return bad(format!("snap bits must be in 1..=40, got {}", self.snap_bits));
        }
        if self.seed_cap == 0 {
            return bad("seed cap must be at least 1".into());
        }
        if let Some(v) = self.require_vertices {
            if v < self.dim + 1 || v > self.samples {
                return bad(format!("required vertex count must be in {}..={}, got {v}", self.dim + 1, self.samples));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: GenSpec,
    /// Configuration `i` has id `i`.
    pub configs: Vec<PointConfig>,
    pub seeds: Vec<Vec<Triangulation>>,
    /// Draws consumed, including rejected ones.
    pub draws: usize,
}

/// Vertex-facet incidence up to relabeling of vertices and facets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CombinatorialType {
    vertices: usize,
    facets: Vec<u128>,
}

impl CombinatorialType {
    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }
}

/// Incidence of the hull's extreme points (relabeled `0..n` in index order)
/// with its facets.
pub fn facet_incidence(config: &PointConfig) -> (usize, Vec<u128>) {
    let hull = config.hull();
    let ext = hull.extreme;
    let relabel = |s: VertexSet| -> u128 {
        s.intersection(ext).iter().fold(0u128, |m, v| m | 1u128 << ext.rank_of(v).expect("vertex is extreme"))
    };
    (ext.len(), hull.facets.iter().map(|f| relabel(f.points)).collect())
}

pub fn combinatorial_type(config: &PointConfig) -> CombinatorialType {
    let (n, facets) = facet_incidence(config);
    canonical_form(n, &facets)
}

pub fn are_isomorphic(a: &PointConfig, b: &PointConfig) -> bool {
    a.dim() == b.dim() && combinatorial_type(a) == combinatorial_type(b)
}

fn ranks<T: Ord + Clone>(sigs: &[T]) -> Vec<u32> {
    let mut sorted = sigs.to_vec();
    sorted.sort();
    sorted.dedup();
    sigs.iter().map(|s| sorted.binary_search(s).expect("present") as u32).collect()
}

fn distinct(colors: &[u32]) -> usize {
    colors.iter().copied().collect::<HashSet<_>>().len()
}

fn bits(mask: u128) -> impl Iterator<Item = usize> {
    VertexSet::from_bits(mask).iter()
}

/// Colour refinement on the vertex-facet bipartite graph. Colours are ranks
/// of sorted signatures, so the ordered partition is labeling-invariant.
fn refine(facets: &[u128], colors: &mut Vec<u32>) {
    loop {
        let before = distinct(colors);
        let fsig: Vec<Vec<u32>> = facets
            .iter()
            .map(|&f| {
                let mut c: Vec<u32> = bits(f).map(|v| colors[v]).collect();
                c.sort_unstable();
                c
            })
            .collect();
        let fcol = ranks(&fsig);
        let vsig: Vec<(u32, Vec<u32>)> = (0..colors.len())
            .map(|v| {
                let mut c: Vec<u32> =
                    facets.iter().zip(&fcol).filter(|(&f, _)| f >> v & 1 == 1).map(|(_, &c)| c).collect();
                c.sort_unstable();
                (colors[v], c)
            })
            .collect();
        *colors = ranks(&vsig);
        if distinct(colors) == before {
            return;
        }
    }
}

fn search(facets: &[u128], mut colors: Vec<u32>, best: &mut Option<Vec<u128>>) {
    refine(facets, &mut colors);
    let n = colors.len();
    let mut counts = vec![0usize; n];
    for &c in &colors {
        counts[c as usize] += 1;
    }
    let Some(target) = (0..n).find(|&c| counts[c] > 1) else {
        let mut cert: Vec<u128> = facets.iter().map(|&f| bits(f).fold(0, |m, v| m | 1u128 << colors[v])).collect();
        cert.sort_unstable();
        if best.as_ref().is_none_or(|b| cert < *b) {
            *best = Some(cert);
        }
        return;
    };
    for v in (0..n).filter(|&v| colors[v] as usize == target) {
        let split: Vec<u32> =
            (0..n).map(|u| 2 * colors[u] + u32::from(colors[u] as usize == target && u != v)).collect();
        search(facets, ranks(&split), best);
    }
}

/// Minimal facet list over all vertex orders compatible with refinement.
pub fn canonical_form(n: usize, facets: &[u128]) -> CombinatorialType {
    let mut best = None;
    search(facets, vec![0; n], &mut best);
    CombinatorialType { vertices: n, facets: best.unwrap_or_default() }
}

/// Lift `w_i = ‖p_i‖²`; on a degenerate lift, small deterministic
/// perturbations; as a last resort the pulling triangulation.
pub fn initial_triangulation(config: &PointConfig) -> Triangulation {
    let base: Vec<Rational> = config.points().iter().map(|p| p.iter().map(|x| x * x).sum()).collect();
    match regular_from_heights(config, &base) {
        Ok(t) => return t,
        Err(TriError::DegenerateHeights) => {}
        Err(e) => panic!("lift of a valid configuration failed: {e}"),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for k in 1..=8u32 {
        let eps = Rational::new(1.into(), num_bigint::BigInt::from(1) << (12 * k));
        let heights: Vec<Rational> = base.iter().map(|h| h + &eps * rat(rng.random_range(1..=1_000_000))).collect();
        if let Ok(t) = regular_from_heights(config, &heights) {
            return t;
        }
    }
    Triangulation::new(config.dim(), config.pulling_triangulation().iter().copied())
}

/// Breadth-first flip-graph states from the initial lift, at most `cap`.
pub fn seed_triangulations(config: &Arc<PointConfig>, cap: usize, exec: Exec) -> Vec<Triangulation> {
    let table = CircuitTable::build_with(Arc::clone(config), exec);
    let start = initial_triangulation(config);
    enumerate_component(&start, &table, cap, exec).states
}

fn draw(rng: &mut ChaCha8Rng, spec: &GenSpec) -> Option<PointConfig> {
    let rows: Vec<Vec<f64>> =
        (0..spec.samples).map(|_| (0..spec.dim).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let cloud = PointConfig::from_f64(spec.dim, &rows, spec.snap_bits).ok()?;
    let ext = cloud.hull().extreme;
    PointConfig::new(spec.dim, ext.iter().map(|i| cloud.point(i).to_vec()).collect()).ok()
}

/// Draws until `spec.count` pairwise non-isomorphic configurations are found.
pub fn generate(spec: &GenSpec) -> Result<Dataset, GenError> {
    generate_with(spec, Exec::default())
}

pub fn generate_with(spec: &GenSpec, exec: Exec) -> Result<Dataset, GenError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut configs = Vec::new();
    let mut types = HashSet::new();
    let mut draws = 0;
    while configs.len() < spec.count {
        if draws == DRAW_CAP {
            return Err(GenError::DrawCap { draws, accepted: configs.len(), target: spec.count });
        }
        draws += 1;
        let Some(config) = draw(&mut rng, spec) else { continue };
        if spec.require_vertices.is_some_and(|v| v != config.len()) {
            continue;
        }
        if types.insert(combinatorial_type(&config)) {
            configs.push(config);
        }
    }
    let shared: Vec<Arc<PointConfig>> = configs.iter().cloned().map(Arc::new).collect();
    let seeds = exec.map(&shared, |c| seed_triangulations(c, spec.seed_cap, Exec::Sequential));
    Ok(Dataset { spec: spec.clone(), configs, seeds, draws })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub spec: GenSpec,
    pub draws: usize,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: usize,
    pub config: String,
    pub seeds: String,
    /// Realized hull vertex count.
    pub vertices: usize,
    pub seed_count: usize,
}

pub const MANIFEST_FORMAT: &str = "flipforge-dataset";
pub const MANIFEST_VERSION: u32 = 1;

impl Dataset {
    pub fn manifest(&self) -> Manifest {
        let entries = self
            .configs
            .iter()
            .zip(&self.seeds)
            .enumerate()
            .map(|(id, (c, s))| ManifestEntry {
                id,
                config: format!("config_{id}.poly"),
                seeds: format!("seeds_{id}.tri"),
                vertices: c.len(),
                seed_count: s.len(),
            })
            .collect();
        Manifest {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
            spec: self.spec.clone(),
            draws: self.draws,
            entries,
        }
    }

    pub fn write_dir(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let manifest = self.manifest();
        for ((entry, config), seeds) in manifest.entries.iter().zip(&self.configs).zip(&self.seeds) {
            fs::write(dir.join(&entry.config), io::write_polytope(config))?;
            fs::write(dir.join(&entry.seeds), io::write_triangulations(seeds))?;
        }
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        json.push('\n');
        fs::write(dir.join(MANIFEST_FILE), json)
    }

    pub fn read_dir(dir: &Path) -> Result<Dataset, DatasetError> {
        let read = |name: &str| -> Result<String, DatasetError> {
            let path = dir.join(name);
            fs::read_to_string(&path)
                .map_err(|e| DatasetError::Io { path: path.display().to_string(), message: e.to_string() })
        };
        let manifest: Manifest =
            serde_json::from_str(&read(MANIFEST_FILE)?).map_err(|e| DatasetError::Manifest(e.to_string()))?;
        if manifest.format != MANIFEST_FORMAT || manifest.version != MANIFEST_VERSION {
            return Err(DatasetError::Manifest(format!(
                "expected {MANIFEST_FORMAT} version {MANIFEST_VERSION}, found {} version {}",
                manifest.format, manifest.version
            )));
        }
        let mut configs = Vec::new();
        let mut seeds = Vec::new();
        for entry in &manifest.entries {
            let config = io::parse_polytope(&read(&entry.config)?)
                .map_err(|source| DatasetError::Format { path: entry.config.clone(), source })?;
            let tris = io::parse_triangulations(&read(&entry.seeds)?, config.dim())
                .map_err(|e| DatasetError::Format { path: entry.seeds.clone(), source: FormatError::Parse(e) })?;
            configs.push(config);
            seeds.push(tris);
        }
        Ok(Dataset { spec: manifest.spec, configs, seeds, draws: manifest.draws })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn permuted(config: &PointConfig, perm: &[usize]) -> PointConfig {
        PointConfig::new(config.dim(), perm.iter().map(|&i| config.point(i).to_vec()).collect()).unwrap()
    }

    #[test]
    fn cube_is_isomorphic_to_a_relabeled_sheared_copy() {
        let cube = fixtures::cube();
        let perm = [5, 2, 7, 0, 3, 6, 1, 4];
        let moved: Vec<Vec<Rational>> = perm
            .iter()
            .map(|&i| {
                let p = cube.point(i);
                vec![&p[0] + &p[1] * rat(2) - &p[2], &p[1] + rat(3), &p[2] * rat(5) + &p[0]]
            })
            .collect();
        let copy = PointConfig::new(3, moved).unwrap();
        assert!(are_isomorphic(&cube, &copy));
        assert!(!are_isomorphic(&cube, &fixtures::octahedron_vertices()));
        assert_eq!(combinatorial_type(&cube).facet_count(), 6);
    }

    #[test]
    fn relabeling_preserves_type() {
        let c = fixtures::cyclic(7, 4);
        assert!(are_isomorphic(&c, &permuted(&c, &[6, 0, 5, 1, 4, 2, 3])));
    }

    #[test]
    fn isomorphism_ignores_interior_points() {
        let mut pts = fixtures::square().points().to_vec();
        pts.push(vec![Rational::new(1.into(), 2.into()), Rational::new(1.into(), 3.into())]);
        let with_interior = PointConfig::new(2, pts).unwrap();
        assert!(are_isomorphic(&fixtures::square(), &with_interior));
        assert!(!are_isomorphic(&fixtures::square(), &fixtures::hexagon()));
    }

    #[test]
    fn simplex_from_minimal_samples() {
        let data = generate(&GenSpec { seed_cap: 10, ..GenSpec::new(3, 4, 1, 11) }).unwrap();
        assert_eq!(data.configs.len(), 1);
        assert_eq!(data.configs[0].len(), 4);
        assert_eq!(data.seeds[0].len(), 1);
    }

    #[test]
    fn generation_is_deterministic_and_deduplicated() {
        let spec = GenSpec { seed_cap: 20, ..GenSpec::new(3, 7, 3, 5) };
        let a = generate(&spec).unwrap();
        let b = generate_with(&spec, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        for i in 0..a.configs.len() {
            for j in 0..i {
                assert!(!are_isomorphic(&a.configs[i], &a.configs[j]));
            }
            for t in &a.seeds[i] {
                assert!(t.validate(&a.configs[i]).is_valid());
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(generate(&GenSpec::new(3, 3, 1, 0)).is_err());
        assert!(generate(&GenSpec::new(3, 8, 0, 0)).is_err());
        assert!(generate(&GenSpec::new(0, 8, 1, 0)).is_err());
    }

    #[test]
    fn seeds_of_small_polygons() {
        let square = Arc::new(fixtures::square());
        assert_eq!(seed_triangulations(&square, 2000, Exec::Sequential).len(), 2);
        let hex = Arc::new(fixtures::hexagon());
        let five = seed_triangulations(&hex, 5, Exec::Sequential);
        assert_eq!(five.iter().map(Triangulation::key).collect::<HashSet<_>>().len(), 5);
        assert_eq!(seed_triangulations(&hex, 2000, Exec::Sequential).len(), 14);
    }

    #[test]
    fn dataset_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let data = generate(&GenSpec { seed_cap: 10, ..GenSpec::new(2, 6, 2, 3) }).unwrap();
        data.write_dir(dir.path()).unwrap();
        assert_eq!(Dataset::read_dir(dir.path()).unwrap(), data);
    }
}
