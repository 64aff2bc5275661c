use std::path::PathBuf;

use serde::Serialize;

use replicheck::Backend;

use crate::error::CliResult;
use crate::report::{self, Envelope};
use crate::{Ctx, Format};

#[derive(Debug, clap::Args)]
pub struct Args {
    a: PathBuf,
    b: PathBuf,
}

#[derive(Serialize)]
struct OverlapResult {
    backend: Backend,
    overlap: f64,
}

pub fn run(ctx: &mut Ctx, args: Args) -> CliResult<bool> {
    let (a, _) = ctx.inputs.state(&args.a, "a")?;
    let (b, _) = ctx.inputs.state(&args.b, "b")?;
    let result = OverlapResult {
        backend: a.backend(),
        overlap: a.overlap(&b)?,
    };
    let out = ctx.out.as_deref();
    let meta = ctx.meta("overlap", ctx.seed());
    match ctx.format(Format::Json) {
        Format::Json => report::emit(out, &report::pretty(&Envelope { meta, result })?)?,
        Format::Csv => {
            let row = vec![result.backend.to_string(), report::float(result.overlap)];
            report::emit(out, &report::csv_bytes(&["backend", "overlap"], [row])?)?;
            report::write_sidecar(out, &meta)?;
        }
    }
    Ok(true)
}
