use std::path::PathBuf;

use flipforge_core::frst::{sample_frsts, Clock, LatticeConfig, Locator, SamplerConfig, StopReason};
use flipforge_core::io::{write_polytope, write_triangulations};
use flipforge_core::{ActionMode, FrstError};
use serde::{Deserialize, Serialize};

use crate::cli::SampleFrstArgs;
use crate::commands::{check_model_dim, load_model};
use crate::config::{create_dir, write_file, write_resolved, Overlay};
use crate::data::{read_polytope, write_json};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocatorKind {
    RandomWalk,
    Policy,
    PlainLifting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrstRun {
    pub polytope: PathBuf,
    pub out: PathBuf,
    #[serde(default = "default_locator")]
    pub locator: LocatorKind,
    pub checkpoint: Option<PathBuf>,
    #[serde(default = "default_mode")]
    pub mode: ActionMode,
    pub label: Option<String>,
    #[serde(default)]
    pub sampler: SamplerConfig,
}

fn default_locator() -> LocatorKind {
    LocatorKind::RandomWalk
}

fn default_mode() -> ActionMode {
    ActionMode::Argmax
}

#[derive(Debug, Serialize)]
struct Summary {
    points: usize,
    origin: usize,
    label: Option<String>,
    locator: &'static str,
    frsts: usize,
    iterations: usize,
    stop: StopReason,
}

pub fn run(args: SampleFrstArgs) -> CliResult<()> {
    let mut o = Overlay::load(args.config.as_deref())?;
    o.set("polytope", args.polytope)?;
    o.set("out", args.out)?;
    o.set("locator", args.locator)?;
    o.set("checkpoint", args.checkpoint)?;
    o.set("mode", args.mode)?;
    o.set("label", args.label)?;
    o.set("sampler.seed", args.seed)?;
    o.set("sampler.max_iterations", args.max_iterations)?;
    o.set("sampler.max_seconds", args.max_seconds)?;
    o.set("sampler.retry_limit", args.retry_limit)?;
    o.set("sampler.flip_budget", args.flip_budget)?;
    o.set("sampler.height_std", args.height_std)?;
    o.set("sampler.clock", args.clock)?;
    // reproducible ledgers unless wall-clock timing is asked for
    if !o.contains("sampler.clock") {
        o.set("sampler.clock", Some(Clock::Logical))?;
    }
    let run: FrstRun = o.resolve()?;
    if !(run.sampler.height_std > 0.0 && run.sampler.height_std.is_finite()) {
        return Err(CliError::Usage("sampler.height_std must be positive".into()));
    }
    let vertices = read_polytope(&run.polytope)?;
    let lattice = match LatticeConfig::new(vertices.clone()) {
        Err(FrstError::MissingLatticePoints { .. }) => LatticeConfig::from_polytope(&vertices),
        other => other,
    }
    .map_err(|e| CliError::Data(format!("{}: {e}", run.polytope.display())))?;
    let lattice = match &run.label {
        Some(l) => lattice.with_label(l.clone()),
        None => lattice,
    };
    let model = match (run.locator, &run.checkpoint) {
        (LocatorKind::Policy, None) => return Err(CliError::Usage("the policy locator needs a checkpoint".into())),
        (LocatorKind::Policy, Some(path)) => {
            let m = load_model(path, None)?;
            check_model_dim(&m, lattice.config().dim())?;
            Some(m)
        }
        _ => None,
    };
    let locator = match (run.locator, &model) {
        (LocatorKind::Policy, Some(m)) => Locator::Policy(m, run.mode),
        (LocatorKind::PlainLifting, _) => Locator::PlainLifting,
        _ => Locator::RandomWalk,
    };
    create_dir(&run.out)?;
    write_resolved(&run, &run.out)?;
    let ledger = sample_frsts(&lattice, &run.sampler, locator);
    let mut log = Vec::new();
    ledger.write_jsonl(&mut log).expect("writing to memory");
    write_file(&run.out.join("ledger.jsonl"), &log)?;
    write_file(&run.out.join("frsts.tri"), write_triangulations(&ledger.frsts).as_bytes())?;
    write_file(&run.out.join("lattice.poly"), write_polytope(lattice.config()).as_bytes())?;
    let summary = Summary {
        points: lattice.config().len(),
        origin: lattice.origin(),
        label: run.label.clone(),
        locator: locator.name(),
        frsts: ledger.len(),
        iterations: ledger.log.len(),
        stop: ledger.stop,
    };
    write_json(&run.out.join("summary.json"), &summary)?;
    println!("frsts: {}, iterations: {}, stop: {:?}", summary.frsts, summary.iterations, summary.stop);
    Ok(())
}
