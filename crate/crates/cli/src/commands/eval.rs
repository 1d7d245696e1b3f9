use std::path::PathBuf;

use flipforge_core::{ActionMode, Objective, Schedule, Strategy};
use flipforge_learn::{ActorKind, ModelConfig};
use serde::{Deserialize, Serialize};

use crate::cli::EvalArgs;
use crate::commands::search::{
    default_objective, default_reference_limit, default_seeds_per_config, print_methods, Summary,
};
use crate::commands::{check_model_dim, classical_strategy, load_model};
use crate::config::{create_dir, write_resolved, Overlay};
use crate::data::{evaluate, load_inputs, plan_slots, references, summarize, write_json, write_runs};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalRun {
    pub checkpoint: PathBuf,
    pub data: PathBuf,
    pub out: PathBuf,
    #[serde(default = "default_objective")]
    pub objective: Objective,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_mode")]
    pub mode: ActionMode,
    #[serde(default)]
    pub baselines: Vec<String>,
    #[serde(default)]
    pub sa: Schedule,
    #[serde(default = "default_seeds_per_config")]
    pub seeds_per_config: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_reference_limit")]
    pub reference_limit: usize,
    /// When given, must match the configuration recorded in the checkpoint.
    pub model: Option<ModelConfig>,
}

fn default_budget() -> usize {
    crate::commands::search::DEFAULT_BUDGET
}

fn default_mode() -> ActionMode {
    ActionMode::Argmax
}

pub fn mode_name(mode: ActionMode) -> &'static str {
    match mode {
        ActionMode::Argmax => "argmax",
        ActionMode::Sample => "sample",
    }
}

pub fn run(args: EvalArgs) -> CliResult<()> {
    let mut o = Overlay::load(args.config.as_deref())?;
    o.set("checkpoint", args.checkpoint)?;
    o.set("data", args.data)?;
    o.set("out", args.out)?;
    o.set("objective", args.objective)?;
    o.set("budget", args.budget)?;
    o.set("mode", args.mode)?;
    o.set("baselines", (!args.baselines.is_empty()).then_some(args.baselines))?;
    o.set("seeds_per_config", args.seeds_per_config)?;
    o.set("seed", args.seed)?;
    o.set("reference_limit", args.reference_limit)?;
    let run: EvalRun = o.resolve()?;
    let model = load_model(&run.checkpoint, run.model.as_ref())?;
    let inputs = load_inputs(&run.data)?;
    check_model_dim(&model, inputs.dim())?;
    let actor = model.config().actor;
    let (name, learned) = match actor {
        ActorKind::NlsAccept => (actor.name().to_string(), Strategy::NlsAccept(&model)),
        _ => (format!("{}_{}", actor.name(), mode_name(run.mode)), Strategy::Policy(&model, run.mode)),
    };
    let mut strategies = vec![(name, learned)];
    for b in &run.baselines {
        if strategies.iter().any(|(n, _)| n == b) {
            return Err(CliError::Usage(format!("baseline `{b}` listed twice")));
        }
        strategies.push((b.clone(), classical_strategy(b, run.sa)?));
    }
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
