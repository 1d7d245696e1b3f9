use std::path::PathBuf;

use flipforge_core::{Objective, Schedule};
use serde::{Deserialize, Serialize};

use crate::cli::SearchArgs;
use crate::commands::classical_strategy;
use crate::config::{create_dir, write_resolved, Overlay};
use crate::data::{
    evaluate, load_inputs, plan_slots, references, summarize, write_json, write_runs, MethodSummary, Reference,
};
use crate::error::{CliError, CliResult};

pub const DEFAULT_BUDGET: usize = 500;
pub const DEFAULT_SEEDS_PER_CONFIG: usize = 4;
pub const DEFAULT_REFERENCE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchRun {
    pub data: PathBuf,
    pub out: PathBuf,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    #[serde(default = "default_objective")]
    pub objective: Objective,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_seeds_per_config")]
    pub seeds_per_config: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_reference_limit")]
    pub reference_limit: usize,
    #[serde(default)]
    pub sa: Schedule,
}

fn default_strategies() -> Vec<String> {
    vec!["greedy".into(), "sa".into(), "random_walk".into()]
}

pub(crate) fn default_objective() -> Objective {
    Objective::MinWeight
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

pub(crate) fn default_seeds_per_config() -> usize {
    DEFAULT_SEEDS_PER_CONFIG
}

pub(crate) fn default_reference_limit() -> usize {
    DEFAULT_REFERENCE_LIMIT
}

#[derive(Debug, Serialize)]
pub(crate) struct Summary {
    pub objective: Objective,
    pub budget: usize,
    pub configs: usize,
    pub slots: usize,
    pub references: Vec<Reference>,
    pub methods: Vec<MethodSummary>,
}

pub fn run(args: SearchArgs) -> CliResult<()> {
    let mut o = Overlay::load(args.config.as_deref())?;
    o.set("data", args.data)?;
    o.set("out", args.out)?;
    o.set("strategies", (!args.strategies.is_empty()).then_some(args.strategies))?;
    o.set("objective", args.objective)?;
    o.set("budget", args.budget)?;
    o.set("seeds_per_config", args.seeds_per_config)?;
    o.set("seed", args.seed)?;
    o.set("reference_limit", args.reference_limit)?;
    o.set("sa.t0", args.sa_t0)?;
    o.set("sa.final_ratio", args.sa_final_ratio)?;
    let run: SearchRun = o.resolve()?;
    if run.strategies.is_empty() {
        return Err(CliError::Usage("no strategies given".into()));
    }
    let strategies = run
        .strategies
        .iter()
        .map(|name| Ok((name.clone(), classical_strategy(name, run.sa)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let inputs = load_inputs(&run.data)?;
    create_dir(&run.out)?;
    write_resolved(&run, &run.out)?;
    let tables = inputs.tables();
    let refs = references(&inputs, &tables, run.objective, run.reference_limit);
    let slots = plan_slots(&inputs.seeds, run.seeds_per_config, run.seed);
    let records = evaluate(&inputs, &tables, &strategies, &slots, run.objective, run.budget, &refs);
    write_runs(&run.out, &inputs, &records, run.objective)?;
    let summary = Summary {
        objective: run.objective,
        budget: run.budget,
        configs: inputs.configs.len(),
        slots: slots.len(),
        references: refs,
        methods: summarize(&records),
    };
    write_json(&run.out.join("summary.json"), &summary)?;
    print_methods(&summary.methods);
    Ok(())
}

pub(crate) fn print_methods(methods: &[MethodSummary]) {
    for m in methods {
        match m.mean_gap {
            Some(g) => println!("{}: mean gap {g:.6} (n = {})", m.method, m.n),
            None => println!("{}: mean gap undefined (no positive reference)", m.method),
        }
    }
}
