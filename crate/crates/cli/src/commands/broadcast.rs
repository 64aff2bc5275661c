use std::path::PathBuf;

use serde::Serialize;

use replicheck::replication::{
    diag_broadcaster, env_copier, verify_broadcast_inequalities, verify_wigner_clone, BroadcastSetup,
    BroadcastVerdict, CloneVerdict,
};
use replicheck::{Backend, Channel, State};

use crate::error::{CliError, CliResult};
use crate::report::{self, Envelope};
use crate::Ctx;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Channel file, or `diag-broadcaster` / `env-copier`.
    #[arg(long)]
    channel: String,
    /// The two input states, given twice.
    #[arg(long = "state", required = true, num_args = 1)]
    states: Vec<PathBuf>,
    /// Environment state for both inputs; trivial when omitted.
    #[arg(long)]
    env: Option<PathBuf>,
    /// Environment state for the second input, if it differs.
    #[arg(long)]
    env_b: Option<PathBuf>,
}

#[derive(Serialize)]
struct BroadcastReport {
    channel: String,
    system_dim: usize,
    env_dim: usize,
    remainder_dim: usize,
    clone: CloneVerdict,
    inequalities: BroadcastVerdict,
}

/// Builds the setup. A channel from `d` to `d·d` is lifted to act trivially on the
/// environment, which is then the remainder.
fn setup(channel: &Channel, env: State, d: usize) -> CliResult<BroadcastSetup> {
    if channel.in_dim() == d && channel.out_dim() == d * d {
        return Ok(BroadcastSetup::passive_env(channel, env)?);
    }
    let pair = d * d;
    if channel.out_dim() % pair != 0 {
        return Err(CliError::mismatch(format!(
            "channel output dim {} is not a multiple of {d}x{d}",
            channel.out_dim()
        )));
    }
    Ok(BroadcastSetup::new(channel.clone(), env, d, channel.out_dim() / pair)?)
}

pub fn run(ctx: &mut Ctx, args: Args) -> CliResult<bool> {
    ctx.json_only("broadcast-check")?;
    if args.states.len() != 2 {
        return Err(CliError::malformed("exactly two --state files are required"));
    }
    let (phi, _) = ctx.inputs.state(&args.states[0], "state[0]")?;
    let (psi, _) = ctx.inputs.state(&args.states[1], "state[1]")?;
    let backend = phi.backend();
    let env_a = match &args.env {
        Some(p) => ctx.inputs.state(p, "env")?.0,
        None => State::trivial(backend),
    };
    let env_b = match &args.env_b {
        Some(p) => ctx.inputs.state(p, "env_b")?.0,
        None => env_a.clone(),
    };
    let d = phi.dim();
    let channel: Channel = match args.channel.as_str() {
        "diag-broadcaster" => {
            require_classical(backend, "diag-broadcaster")?;
            diag_broadcaster(d)?.into()
        }
        "env-copier" => {
            require_classical(backend, "env-copier")?;
            env_copier(d)?.into()
        }
        path => ctx.inputs.channel(&PathBuf::from(path), "channel")?,
    };
    let setup_a = setup(&channel, env_a, d)?;
    let setup_b = setup(&channel, env_b, d)?;
    let clone = verify_wigner_clone(&setup_a, &phi, &psi, ctx.tol.clone)?;
    let inequalities = verify_broadcast_inequalities(&setup_a, &phi, &setup_b, &psi, &ctx.tol)?;
    let passed = clone.passed && inequalities.passed;
    let result = BroadcastReport {
        channel: args.channel,
        system_dim: d,
        env_dim: setup_a.env_dim(),
        remainder_dim: setup_a.remainder_dim(),
        clone,
        inequalities,
    };
    let meta = ctx.meta("broadcast-check", ctx.seed());
    report::emit(ctx.out.as_deref(), &report::pretty(&Envelope { meta, result })?)?;
    Ok(passed)
}

fn require_classical(backend: Backend, name: &str) -> CliResult<()> {
    if backend != Backend::Classical {
        return Err(CliError::mismatch(format!("{name} is a classical channel")));
    }
    Ok(())
}
