use std::path::PathBuf;

use flipforge_core::polygen::{generate, GenSpec};
use flipforge_core::GenError;
use serde::{Deserialize, Serialize};

use crate::cli::GenArgs;
use crate::config::{write_resolved, Overlay};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenRun {
    pub out: PathBuf,
    pub spec: GenSpec,
}

pub fn run(args: GenArgs) -> CliResult<()> {
    let mut o = Overlay::load(args.config.as_deref())?;
    o.set("out", args.out)?;
    o.set("spec.dim", args.dim)?;
    o.set("spec.samples", args.samples)?;
    o.set("spec.count", args.count)?;
    o.set("spec.seed", args.seed)?;
    o.set("spec.snap_bits", args.snap_bits)?;
    o.set("spec.seed_cap", args.seed_cap)?;
    o.set("spec.require_vertices", args.require_vertices)?;
    let run: GenRun = o.resolve()?;
    let dataset = generate(&run.spec).map_err(|e| match e {
        GenError::InvalidSpec(_) => CliError::Usage(e.to_string()),
        GenError::DrawCap { .. } => CliError::Data(e.to_string()),
    })?;
    dataset.write_dir(&run.out).map_err(|e| CliError::io(&run.out, e))?;
    write_resolved(&run, &run.out)?;
    let seeds: usize = dataset.seeds.iter().map(Vec::len).sum();
    println!(
        "configs: {}, seeds: {seeds}, draws: {}, out: {}",
        dataset.configs.len(),
        dataset.draws,
        run.out.display()
    );
    Ok(())
}
