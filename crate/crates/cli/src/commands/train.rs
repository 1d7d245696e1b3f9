use std::path::PathBuf;
use std::sync::Arc;

use flipforge_core::{CircuitTable, Exec, Objective};
use flipforge_learn::ppo::CurveRecord;
use flipforge_learn::{train, ModelConfig, PolicyNet, TrainError, TrainInstance, TrainerConfig};
use serde::{Deserialize, Serialize};

use crate::cli::TrainArgs;
use crate::commands::model_error;
use crate::commands::search::default_objective;
use crate::config::{create_dir, write_resolved, Overlay};
use crate::data::{load_inputs, write_json};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRun {
    pub data: PathBuf,
    pub out: PathBuf,
    #[serde(default = "default_objective")]
    pub objective: Objective,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub trainer: TrainerConfig,
}

#[derive(Debug, Serialize)]
struct Summary {
    iterations: usize,
    config_digest: String,
    checkpoint: &'static str,
    final_record: Option<CurveRecord>,
}

pub fn run(args: TrainArgs) -> CliResult<()> {
    let mut o = Overlay::load(args.config.as_deref())?;
    o.set("data", args.data)?;
    o.set("out", args.out)?;
    o.set("objective", args.objective)?;
    o.set("trainer.iterations", args.iterations)?;
    o.set("trainer.parallel_envs", args.envs)?;
    o.set("trainer.horizon", args.horizon)?;
    o.set("trainer.lr", args.lr)?;
    o.set("trainer.seed", args.seed)?;
    o.set("model.actor", args.actor)?;
    o.set("model.hidden", args.hidden)?;
    o.set("model.init_seed", args.init_seed)?;
    let explicit_dim = o.contains("model.dim");
    let mut run: TrainRun = o.resolve()?;
    let inputs = load_inputs(&run.data)?;
    if !explicit_dim {
        run.model.dim = inputs.dim();
    } else if run.model.dim != inputs.dim() {
        return Err(CliError::Usage(format!(
            "model.dim is {} but the data is {}-dimensional",
            run.model.dim,
            inputs.dim()
        )));
    }
    run.trainer.check().map_err(|e| CliError::Usage(e.to_string()))?;
    let model = PolicyNet::new(run.model.clone()).map_err(model_error)?;
    create_dir(&run.out)?;
    write_resolved(&run, &run.out)?;
    let instances: Vec<TrainInstance> = inputs
        .configs
        .into_iter()
        .zip(inputs.seeds)
        .map(|(c, seeds)| TrainInstance { table: CircuitTable::build(Arc::new(c)), seeds })
        .collect();
    let outcome =
        train(&instances, run.objective, model, &run.trainer, Some(&run.out), Exec::Auto).map_err(|e| match e {
            TrainError::Config(_) => CliError::Usage(e.to_string()),
            TrainError::EmptySeeds(_) | TrainError::NoInstances | TrainError::Io { .. } => {
                CliError::Data(e.to_string())
            }
            TrainError::Model(m) => model_error(m),
            TrainError::NonFinite { .. } => CliError::Internal(e.to_string()),
        })?;
    let summary = Summary {
        iterations: run.trainer.iterations,
        config_digest: run.model.digest(),
        checkpoint: "model.ckpt",
        final_record: outcome.curve.last().cloned(),
    };
    write_json(&run.out.join("summary.json"), &summary)?;
    match &summary.final_record {
        Some(r) => println!("iterations: {}, final mean return: {:.6}", r.iteration, r.mean_return),
        None => println!("iterations: 0, wrote the initial checkpoint"),
    }
    Ok(())
}
