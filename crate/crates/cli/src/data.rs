//! Input loading and the shared search-evaluation harness used by `search`
//! and `eval`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use flipforge_core::io::parse_polytope;
use flipforge_core::objective::mean_and_stderr;
use flipforge_core::polygen::{initial_triangulation, Dataset, MANIFEST_FILE};
use flipforge_core::search::{exhaustive_best, run_many, write_gap_table, GapRow, Job};
use flipforge_core::{CircuitTable, Exec, Objective, PointConfig, Sense, Strategy, Triangulation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::write_file;
use crate::error::{CliError, CliResult};

/// Configurations with their seed triangulations.
pub struct Inputs {
    pub configs: Vec<PointConfig>,
    pub seeds: Vec<Vec<Triangulation>>,
}

impl Inputs {
    pub fn dim(&self) -> usize {
        self.configs[0].dim()
    }

    pub fn tables(&self) -> Vec<CircuitTable> {
        self.configs.iter().map(|c| CircuitTable::build(Arc::new(c.clone()))).collect()
    }
}

pub fn read_polytope(path: &Path) -> CliResult<PointConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_polytope(&text).map_err(|e| CliError::io(path, e))
}

/// A dataset directory, or a single polytope file seeded with its Delaunay-lift
/// triangulation.
pub fn load_inputs(path: &Path) -> CliResult<Inputs> {
    let inputs = if path.join(MANIFEST_FILE).is_file() {
        let ds = Dataset::read_dir(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Inputs { configs: ds.configs, seeds: ds.seeds }
    } else {
        let config = read_polytope(path)?;
        let seed = initial_triangulation(&config);
        Inputs { configs: vec![config], seeds: vec![vec![seed]] }
    };
    if inputs.configs.is_empty() {
        return Err(CliError::Data(format!("{}: no configurations", path.display())));
    }
    if let Some(i) = inputs.seeds.iter().position(Vec::is_empty) {
        return Err(CliError::Data(format!("{}: configuration {i} has no seed triangulations", path.display())));
    }
    if inputs.configs.iter().any(|c| c.dim() != inputs.configs[0].dim()) {
        return Err(CliError::Data(format!("{}: configurations of mixed dimension", path.display())));
    }
    Ok(inputs)
}

/// One (configuration, seed triangulation, RNG seed) evaluation slot,
/// shared by every strategy so that comparisons are paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub config: usize,
    pub seed_index: usize,
    pub rng_seed: u64,
}

pub fn plan_slots(seeds: &[Vec<Triangulation>], per_config: usize, seed: u64) -> Vec<Slot> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slots = Vec::with_capacity(seeds.len() * per_config);
    for (config, s) in seeds.iter().enumerate() {
        for _ in 0..per_config {
            slots.push(Slot { config, seed_index: rng.random_range(0..s.len()), rng_seed: rng.random() });
        }
    }
    slots
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reference {
    pub value: f64,
    pub truncated: bool,
}

/// Best value over each configuration's flip-graph component, found by
/// exhaustive traversal from its first seed.
pub fn references(inputs: &Inputs, tables: &[CircuitTable], objective: Objective, limit: usize) -> Vec<Reference> {
    tables
        .iter()
        .zip(&inputs.seeds)
        .map(|(t, s)| {
            let (value, truncated) = exhaustive_best(t, &s[0], objective, limit, Exec::Auto);
            Reference { value, truncated }
        })
        .collect()
}

/// Relative gap oriented so that zero is optimal and larger is worse;
/// undefined for non-positive references.
pub fn gap(objective: Objective, best: f64, reference: f64) -> Option<f64> {
    if reference.is_nan() || reference <= 0.0 {
        return None;
    }
    Some(match objective.sense() {
        Sense::Minimize => (best - reference) / reference,
        Sense::Maximize => (reference - best) / reference,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub config: usize,
    pub seed_index: usize,
    pub rng_seed: u64,
    pub method: String,
    pub initial_value: f64,
    pub best_value: f64,
    pub reference: f64,
    pub reference_truncated: bool,
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub mean_gap: Option<f64>,
    pub std_err: Option<f64>,
    /// Runs with a defined gap.
    pub n: usize,
    pub runs: usize,
}

/// Runs every named strategy on every slot.
pub fn evaluate(
    inputs: &Inputs,
    tables: &[CircuitTable],
    strategies: &[(String, Strategy)],
    slots: &[Slot],
    objective: Objective,
    budget: usize,
    refs: &[Reference],
) -> Vec<RunRecord> {
    let jobs: Vec<Job> = slots
        .iter()
        .map(|s| Job {
            table: &tables[s.config],
            seed: inputs.seeds[s.config][s.seed_index].clone(),
            rng_seed: s.rng_seed,
        })
        .collect();
    let mut records = Vec::new();
    for (name, strategy) in strategies {
        let traces = run_many(*strategy, &jobs, objective, budget, Exec::Auto);
        for (slot, trace) in slots.iter().zip(traces) {
            let reference = refs[slot.config];
            records.push(RunRecord {
                config: slot.config,
                seed_index: slot.seed_index,
                rng_seed: slot.rng_seed,
                method: name.clone(),
                initial_value: trace.steps[0].value,
                best_value: trace.best_value,
                reference: reference.value,
                reference_truncated: reference.truncated,
                gap: gap(objective, trace.best_value, reference.value),
            });
        }
    }
    records
}

pub fn summarize(records: &[RunRecord]) -> Vec<MethodSummary> {
    let mut methods: Vec<&str> = Vec::new();
    for r in records {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    methods
        .into_iter()
        .map(|m| {
            let runs: Vec<&RunRecord> = records.iter().filter(|r| r.method == m).collect();
            let gaps: Vec<f64> = runs.iter().filter_map(|r| r.gap).collect();
            let (mean, se) = mean_and_stderr(&gaps);
            let defined = !gaps.is_empty();
            MethodSummary {
                method: m.to_string(),
                mean_gap: defined.then_some(mean),
                std_err: defined.then_some(se),
                n: gaps.len(),
                runs: runs.len(),
            }
        })
        .collect()
}

/// Gap rows grouped by (dimension, vertex count, method).
pub fn gap_rows(inputs: &Inputs, records: &[RunRecord], objective: Objective) -> Vec<GapRow> {
    let mut groups: BTreeMap<(usize, usize, usize), Vec<f64>> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for r in records {
        let m = match order.iter().position(|&o| o == r.method) {
            Some(i) => i,
            None => {
                order.push(&r.method);
                order.len() - 1
            }
        };
        let c = &inputs.configs[r.config];
        let entry = groups.entry((c.dim(), c.len(), m)).or_default();
        entry.extend(r.gap);
    }
    groups
        .into_iter()
        .filter(|(_, gaps)| !gaps.is_empty())
        .map(|((dim, vertices, m), gaps)| {
            let (mean_gap, std_err) = mean_and_stderr(&gaps);
            GapRow { dim, vertices, objective, method: order[m].to_string(), mean_gap, std_err, n: gaps.len() }
        })
        .collect()
}

/// Writes `runs.jsonl` and `gap_table.tsv`.
pub fn write_runs(dir: &Path, inputs: &Inputs, records: &[RunRecord], objective: Objective) -> CliResult<()> {
    let mut lines = Vec::new();
    for r in records {
        serde_json::to_writer(&mut lines, r).expect("run record serializes");
        lines.push(b'\n');
    }
    write_file(&dir.join("runs.jsonl"), &lines)?;
    let mut table = Vec::new();
    write_gap_table(&gap_rows(inputs, records, objective), &mut table).expect("writing to memory");
    write_file(&dir.join("gap_table.tsv"), &table)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    write_file(path, text.as_bytes())
}
