pub mod enumerate;
pub mod eval;
pub mod frst;
pub mod gen;
pub mod search;
pub mod train;

use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use flipforge_core::{Schedule, Strategy};
use flipforge_learn::{Checkpoint, CheckpointError, ModelConfig, ModelError, PolicyNet};

use crate::error::{CliError, CliResult};

pub const CLASSICAL: [&str; 5] = ["greedy", "dfs", "befs", "sa", "random_walk"];

pub fn classical_strategy(name: &str, schedule: Schedule) -> CliResult<Strategy<'static>> {
    Ok(match name {
        "greedy" => Strategy::Greedy,
        "dfs" => Strategy::Dfs,
        "befs" => Strategy::Befs,
        "sa" => Strategy::SimAnneal(schedule),
        "random_walk" => Strategy::RandomWalk,
        _ => {
            return Err(CliError::Usage(format!(
                "unknown strategy `{name}` (expected one of {})",
                CLASSICAL.join(", ")
            )))
        }
    })
}

/// Loads a checkpoint; with `expected`, its recorded config digest must match.
pub fn load_model(path: &Path, expected: Option<&ModelConfig>) -> CliResult<PolicyNet> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => CliError::Checkpoint(format!("{}: checkpoint not found", path.display())),
        _ => CliError::Checkpoint(format!("{}: {e}", path.display())),
    })?;
    let ck = Checkpoint::from_bytes(&bytes).map_err(|e| CliError::Checkpoint(format!("{}: {e}", path.display())))?;
    if let Some(config) = expected {
        if config.digest() != ck.digest() {
            let e = CheckpointError::DigestMismatch { expected: config.digest(), found: ck.digest() };
            return Err(CliError::Checkpoint(format!("{}: {e}", path.display())));
        }
    }
    PolicyNet::from_checkpoint(&ck).map_err(|e| CliError::Checkpoint(format!("{}: {e}", path.display())))
}

pub fn check_model_dim(model: &PolicyNet, dim: usize) -> CliResult<()> {
    if model.config().dim != dim {
        return Err(CliError::Checkpoint(format!(
            "model expects {}-dimensional configurations, data is {dim}-dimensional",
            model.config().dim
        )));
    }
    Ok(())
}

pub fn model_error(e: ModelError) -> CliError {
    match e {
        ModelError::Config(_) => CliError::Usage(e.to_string()),
        _ => CliError::Checkpoint(e.to_string()),
    }
}
