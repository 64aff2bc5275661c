mod commands;
mod error;
mod inputs;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use replicheck::Tolerances;

use crate::error::{CliError, CliResult};
use crate::inputs::Inputs;
use crate::report::Meta;

#[derive(Debug, Parser)]
#[command(name = "replicheck", version, about = "Overlap axioms, cloning and broadcasting checks, and the entropy toy model")]
struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override a tolerance, e.g. `--tol a3=1e-7`. Repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Overlap of two states.
    Overlap(commands::overlap::Args),
    /// Monte Carlo check of the four overlap axioms.
    VerifyAxioms(commands::axioms::Args),
    /// Search for the best approximate cloner of a set of target states.
    CloneSearch(commands::clone::Args),
    /// Cloning and broadcasting checks of a channel on two states.
    BroadcastCheck(commands::broadcast::Args),
    /// Entropy toy model: membership, witness, separability search.
    Toy(commands::toy::Args),
    /// Multi-generation species simulation.
    Species(commands::species::Args),
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let value: f64 = value.parse().map_err(|e| format!("{value}: {e}"))?;
    Ok((name.to_string(), value))
}

pub struct Ctx {
    seed: Option<u64>,
    pub tol: Tolerances,
    pub out: Option<PathBuf>,
    format: Option<Format>,
    pub inputs: Inputs,
}

impl Ctx {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// The `--seed` flag if given, else `fallback`.
    pub fn seed_or(&self, fallback: Option<u64>) -> u64 {
        self.seed.or(fallback).unwrap_or(0)
    }

    pub fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    pub fn json_only(&self, command: &str) -> CliResult<()> {
        if self.format == Some(Format::Csv) {
            return Err(CliError::malformed(format!("{command} only writes JSON")));
        }
        Ok(())
    }

    pub fn meta<'a>(&'a self, command: &'a str, seed: u64) -> Meta<'a> {
        Meta {
            command,
            seed,
            tolerances: &self.tol,
            inputs: &self.inputs.digests,
        }
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    let mut tol = Tolerances::default();
    for (name, value) in &cli.tol {
        tol.set(name, value.to_owned()).map_err(CliError::from)?;
    }
    let mut ctx = Ctx {
        seed: cli.seed,
        tol,
        out: cli.out,
        format: cli.format,
        inputs: Inputs::default(),
    };
    match cli.command {
        Command::Overlap(a) => commands::overlap::run(&mut ctx, a),
        Command::VerifyAxioms(a) => commands::axioms::run(&mut ctx, a),
        Command::CloneSearch(a) => commands::clone::run(&mut ctx, a),
        Command::BroadcastCheck(a) => commands::broadcast::run(&mut ctx, a),
        Command::Toy(a) => commands::toy::run(&mut ctx, a),
        Command::Species(a) => commands::species::run(&mut ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
