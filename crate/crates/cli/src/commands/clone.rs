use std::path::PathBuf;

use serde::Serialize;

use replicheck::io::ChannelDoc;
use replicheck::replication::{clone_search, CloneSearchConfig};
use replicheck::State;

use crate::error::{CliError, CliResult};
use crate::report::{self, Envelope};
use crate::Ctx;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Target state file. Repeatable.
    #[arg(long = "target", required = true)]
    targets: Vec<PathBuf>,
    /// Environment state; a trivial one-outcome environment when omitted.
    #[arg(long)]
    env: Option<PathBuf>,
    /// Dimension of the environment remainder; defaults to the environment dimension.
    #[arg(long)]
    remainder_dim: Option<usize>,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 2000)]
    max_evals: usize,
    /// Allow quantum (qubit) targets.
    #[arg(long)]
    quantum: bool,
    #[arg(long, default_value_t = 4)]
    kraus_count: usize,
}

#[derive(Serialize)]
struct CloneReport {
    config: CloneSearchConfig,
    remainder_dim: usize,
    objective: f64,
    converged: bool,
    evaluations: usize,
    best_restart: usize,
    trace: Vec<(usize, f64)>,
    best_channel: ChannelDoc,
}

pub fn run(ctx: &mut Ctx, args: Args) -> CliResult<bool> {
    ctx.json_only("clone-search")?;
    let targets = args
        .targets
        .iter()
        .enumerate()
        .map(|(i, p)| Ok(ctx.inputs.state(p, &format!("target[{i}]"))?.0))
        .collect::<CliResult<Vec<_>>>()?;
    let backend = targets[0].backend();
    let env = match &args.env {
        Some(p) => ctx.inputs.state(p, "env")?.0,
        None => State::trivial(backend),
    };
    let remainder_dim = args.remainder_dim.unwrap_or(env.dim());
    if remainder_dim == 0 {
        return Err(CliError::malformed("--remainder-dim must be at least 1"));
    }
    let config = CloneSearchConfig {
        restarts: args.restarts,
        max_evals: args.max_evals,
        seed: ctx.seed(),
        quantum: args.quantum,
        kraus_count: args.kraus_count,
        ..CloneSearchConfig::default()
    };
    let r = clone_search(&targets, &env, remainder_dim, &config)?;
    if !r.converged {
        eprintln!("note: the best restart stopped at its evaluation budget");
    }
    let result = CloneReport {
        remainder_dim,
        objective: r.objective,
        converged: r.converged,
        evaluations: r.evaluations,
        best_restart: r.best_restart,
        trace: r.trace,
        best_channel: ChannelDoc::from_channel(&r.best_channel),
        config,
    };
    let meta = ctx.meta("clone-search", ctx.seed());
    report::emit(ctx.out.as_deref(), &report::pretty(&Envelope { meta, result })?)?;
    Ok(true)
}
