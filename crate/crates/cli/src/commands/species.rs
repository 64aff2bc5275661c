//! Scenario files:
//!
//! ```json
//! {"species": ["a.json", {"kind":"prob","dims":[2],"weights":[0.81,0.19]}],
//!  "env_policy": {"kind":"map", "envs": ["w0.json", "w1.json"]},
//!  "channel": {"builtin":"env_copier", "dim":2},
//!  "generations": 1, "seed": 0}
//! ```
//!
//! States and channels are given inline or as paths relative to the scenario file. The
//! homogeneous policy is `{"kind":"homogeneous", "env": ref}`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use replicheck::io::{ChannelDoc, StateDoc};
use replicheck::replication::channels::with_passive_env;
use replicheck::replication::species::GenerationRecord;
use replicheck::replication::{diag_broadcaster, env_copier, species_simulate, EnvPolicy, SpeciesScenario};
use replicheck::{Channel, State};

use crate::error::{CliError, CliResult};
use crate::inputs::{relative_to, Inputs};
use crate::report::{self, Envelope};
use crate::{Ctx, Format};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum StateRef {
    Path(String),
    Inline(StateDoc),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ChannelRef {
    Path(String),
    Builtin { builtin: String, dim: usize },
    Inline(ChannelDoc),
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum EnvPolicyDoc {
    Homogeneous { env: StateRef },
    Map { envs: Vec<StateRef> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    species: Vec<StateRef>,
    env_policy: EnvPolicyDoc,
    channel: ChannelRef,
    generations: usize,
    seed: Option<u64>,
}

fn load_state(inputs: &mut Inputs, base: &Path, r: &StateRef, role: &str) -> CliResult<State> {
    match r {
        StateRef::Path(p) => Ok(inputs.state(&relative_to(base, p), role)?.0),
        StateRef::Inline(doc) => Ok(doc.to_state().map_err(|e| CliError::from(e).context(role))?.0),
    }
}

/// `diag_broadcaster` maps `d → d·d`, so it is lifted to carry the environment through.
fn load_channel(inputs: &mut Inputs, base: &Path, r: &ChannelRef, env_dim: usize) -> CliResult<Channel> {
    match r {
        ChannelRef::Path(p) => inputs.channel(&relative_to(base, p), "channel"),
        ChannelRef::Inline(doc) => Ok(doc.to_channel().map_err(|e| CliError::from(e).context("channel"))?),
        ChannelRef::Builtin { builtin, dim } => match builtin.replace('-', "_").as_str() {
            "diag_broadcaster" => Ok(with_passive_env(&diag_broadcaster(*dim)?.into(), env_dim)?),
            "env_copier" => Ok(env_copier(*dim)?.into()),
            other => Err(CliError::malformed(format!("unknown builtin channel {other:?}"))),
        },
    }
}

#[derive(Serialize)]
struct SpeciesReport<'a> {
    species: usize,
    homogeneous: bool,
    generations: &'a [GenerationRecord],
}

pub fn run(ctx: &mut Ctx, args: Args) -> CliResult<bool> {
    let base = args.scenario.clone();
    let doc: ScenarioDoc = ctx.inputs.json(&base, "scenario")?;
    let species = doc
        .species
        .iter()
        .enumerate()
        .map(|(i, r)| load_state(&mut ctx.inputs, &base, r, &format!("species[{i}]")))
        .collect::<CliResult<Vec<_>>>()?;
    let (env, env_dim) = match &doc.env_policy {
        EnvPolicyDoc::Homogeneous { env } => {
            let w = load_state(&mut ctx.inputs, &base, env, "env")?;
            let e = w.dim();
            (EnvPolicy::Homogeneous(w), e)
        }
        EnvPolicyDoc::Map { envs } => {
            let ws = envs
                .iter()
                .enumerate()
                .map(|(i, r)| load_state(&mut ctx.inputs, &base, r, &format!("env[{i}]")))
                .collect::<CliResult<Vec<_>>>()?;
            let e = ws.first().map_or(1, State::dim);
            (EnvPolicy::PerSpecies(ws), e)
        }
    };
    let channel = load_channel(&mut ctx.inputs, &base, &doc.channel, env_dim)?;
    let scenario = SpeciesScenario::new(species, env, channel, doc.generations)?;
    let seed = ctx.seed_or(doc.seed);
    let traj = species_simulate(&scenario, seed)?;

    let out = ctx.out.as_deref();
    let meta = ctx.meta("species", seed);
    match ctx.format(Format::Csv) {
        Format::Json => {
            let result = SpeciesReport {
                species: scenario.species().len(),
                homogeneous: scenario.is_homogeneous(),
                generations: &traj.generations,
            };
            report::emit(out, &report::pretty(&Envelope { meta, result })?)?;
        }
        Format::Csv => {
            let header = ["generation", "i", "j", "overlap"];
            report::emit(out, &report::csv_bytes(&header, pair_rows(&traj.generations, |g| &g.overlaps))?)?;
            if let Some(path) = out {
                let joint = report::csv_bytes(&header, pair_rows(&traj.generations, |g| &g.joint_overlaps))?;
                report::emit(Some(&report::sibling(path, "joint.csv")), &joint)?;
                let lineage = report::csv_bytes(
                    &["generation", "species", "parent_offspring_overlap", "joint_product_overlap"],
                    traj.generations.iter().flat_map(|g| {
                        g.lineage.iter().map(move |l| {
                            vec![
                                g.generation.to_string(),
                                l.species.to_string(),
                                report::float(l.parent_offspring_overlap),
                                report::float(l.joint_product_overlap),
                            ]
                        })
                    }),
                )?;
                report::emit(Some(&report::sibling(path, "lineage.csv")), &lineage)?;
            }
            report::write_sidecar(out, &meta)?;
        }
    }
    Ok(true)
}

/// One row per unordered pair `i < j`, per generation.
fn pair_rows<'a>(
    generations: &'a [GenerationRecord],
    pick: impl Fn(&GenerationRecord) -> &Vec<Vec<f64>> + 'a,
) -> impl Iterator<Item = Vec<String>> + 'a {
    generations.iter().flat_map(move |g| {
        let m = pick(g);
        let n = m.len();
        let mut rows = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                rows.push(vec![
                    g.generation.to_string(),
                    i.to_string(),
                    j.to_string(),
                    report::float(m[i][j]),
                ]);
            }
        }
        rows
    })
}
