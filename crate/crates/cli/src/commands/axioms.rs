use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use replicheck::axioms::{check_channel, run_axiom_suite, AxiomReport, SuiteConfig};
use replicheck::Backend;

use crate::error::CliResult;
use crate::report::{self, Meta};
use crate::{Ctx, Format};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Classical,
    Quantum,
    Both,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = BackendArg::Both)]
    backend: BackendArg,
    /// Also check monotonicity of overlap under this channel. Repeatable.
    #[arg(long)]
    channel: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Header<'a> {
    #[serde(flatten)]
    meta: Meta<'a>,
    config: &'a SuiteConfig,
}

pub fn run(ctx: &mut Ctx, args: Args) -> CliResult<bool> {
    // Load everything first so malformed inputs fail before any work.
    let channels = args
        .channel
        .iter()
        .enumerate()
        .map(|(i, p)| ctx.inputs.channel(p, &format!("channel[{i}]")))
        .collect::<CliResult<Vec<_>>>()?;
    let cfg = SuiteConfig {
        backends: match args.backend {
            BackendArg::Classical => vec![Backend::Classical],
            BackendArg::Quantum => vec![Backend::Quantum],
            BackendArg::Both => vec![Backend::Classical, Backend::Quantum],
        },
        trials: args.trials,
        seed: ctx.seed(),
        tolerances: ctx.tol.clone(),
        ..SuiteConfig::default()
    };
    let mut reports = run_axiom_suite(&cfg)?;
    for (i, ch) in channels.iter().enumerate() {
        let seed = replicheck::seed::derive(cfg.seed, "cli/channel", i as u64);
        reports.push(check_channel(ch, cfg.trials, seed, &cfg.tolerances)?);
    }
    let passed = reports.iter().all(|r| r.passed);

    let out = ctx.out.as_deref();
    let meta = ctx.meta("verify-axioms", cfg.seed);
    match ctx.format(Format::Json) {
        Format::Json => {
            let mut bytes = serde_json::to_vec(&Header { meta, config: &cfg })?;
            bytes.push(b'\n');
            for r in &reports {
                serde_json::to_writer(&mut bytes, r)?;
                bytes.push(b'\n');
            }
            report::emit(out, &bytes)?;
        }
        Format::Csv => {
            let rows = reports.iter().map(csv_row);
            let header = ["axiom", "backend", "trials", "worst_violation", "tolerance", "passed"];
            report::emit(out, &report::csv_bytes(&header, rows)?)?;
            report::write_sidecar(out, &meta)?;
        }
    }
    for r in reports.iter().filter(|r| !r.passed) {
        eprintln!(
            "{} ({}) failed: worst violation {:e} beyond tolerance {:e}",
            r.axiom, r.backend, r.worst_violation, r.tolerance
        );
    }
    Ok(passed)
}

fn csv_row(r: &AxiomReport) -> Vec<String> {
    vec![
        r.axiom.to_string(),
        r.backend.to_string(),
        r.trials.to_string(),
        report::float(r.worst_violation),
        report::float(r.tolerance),
        r.passed.to_string(),
    ]
}
