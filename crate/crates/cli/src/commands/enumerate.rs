use std::path::PathBuf;
use std::sync::Arc;

use flipforge_core::io::write_triangulations;
use flipforge_core::polygen::initial_triangulation;
use flipforge_core::{enumerate_component, CircuitTable, Exec};
use serde::{Deserialize, Serialize};

use crate::cli::EnumerateArgs;
use crate::config::{create_dir, write_file, write_resolved, Overlay};
use crate::data::{read_polytope, write_json};
use crate::error::{CliError, CliResult};

pub const DEFAULT_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateRun {
    pub polytope: PathBuf,
    #[serde(default = "default_limit")]
    pub limit: usize,
    pub dump: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

fn default_limit() -> usize {
    DEFAULT_LIMIT
}

#[derive(Debug, Serialize)]
struct Summary {
    states: usize,
    edges: usize,
    truncated: bool,
}

pub fn run(args: EnumerateArgs) -> CliResult<()> {
    let mut o = Overlay::load(args.config.as_deref())?;
    o.set("polytope", args.polytope)?;
    o.set("limit", args.limit)?;
    o.set("dump", args.dump)?;
    o.set("out", args.out)?;
    let run: EnumerateRun = o.resolve()?;
    if run.limit == 0 {
        return Err(CliError::Usage("limit must be at least 1".into()));
    }
    let config = Arc::new(read_polytope(&run.polytope)?);
    let seed = initial_triangulation(&config);
    let table = CircuitTable::build(config);
    let comp = enumerate_component(&seed, &table, run.limit, Exec::Auto);
    let summary = Summary { states: comp.states.len(), edges: comp.edges, truncated: comp.truncated };
    if let Some(path) = &run.dump {
        write_file(path, write_triangulations(&comp.states).as_bytes())?;
    }
    if let Some(dir) = &run.out {
        create_dir(dir)?;
        write_resolved(&run, dir)?;
        write_json(&dir.join("summary.json"), &summary)?;
    }
    println!("states: {}, edges: {}, truncated: {}", summary.states, summary.edges, summary.truncated);
    Ok(())
}
