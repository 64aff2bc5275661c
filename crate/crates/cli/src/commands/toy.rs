use std::path::PathBuf;

use serde::Serialize;

use replicheck::classical;
use replicheck::toymodel::{separability_search, MonteCarloSummary, SearchConfig, SeparabilityVerdict, ToyStateSpace};

use crate::error::{CliError, CliResult};
use crate::report::{self, Envelope};
use crate::Ctx;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Probability state file; two subsystems enable the witness and the search.
    #[arg(long)]
    state: Option<PathBuf>,
    /// Entropy floor in nats.
    #[arg(long, default_value_t = std::f64::consts::LN_2)]
    epsilon: f64,
    /// Run the separable-decomposition search.
    #[arg(long)]
    search: bool,
    /// Product components; defaults to dim_A * dim_B.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// Estimate the fraction of random joint states the witness flags.
    #[arg(long, value_name = "SAMPLES")]
    monte_carlo: Option<usize>,
    /// Subsystem dimensions for the Monte Carlo estimate.
    #[arg(long, value_delimiter = ',', default_values_t = [2, 2])]
    dims: Vec<usize>,
}

#[derive(Serialize)]
struct StateSummary {
    dims: Vec<usize>,
    entropy: f64,
    membership: bool,
    /// Absent for non-members.
    pure: Option<bool>,
}

#[derive(Serialize)]
struct ToyReport {
    space: ToyStateSpace,
    warnings: Vec<String>,
    state: Option<StateSummary>,
    verdict: Option<SeparabilityVerdict>,
    /// Whether the search residual is within `separable_residual`; absent without a search.
    certified_separable: Option<bool>,
    search_config: Option<SearchConfig>,
    monte_carlo: Option<MonteCarloSummary>,
}

pub fn run(ctx: &mut Ctx, args: Args) -> CliResult<bool> {
    ctx.json_only("toy")?;
    let space = ToyStateSpace::with_purity_tol(args.epsilon, ctx.tol.purity)?;
    let seed = ctx.seed();
    let mut warnings = Vec::new();
    let mut state = None;
    let mut verdict = None;
    let mut search_config = None;
    if let Some(path) = &args.state {
        let doc: replicheck::io::StateDoc = ctx.inputs.json(path, "state")?;
        let joint = doc.to_joint().map_err(|e| CliError::from(e).context(path.display()))?;
        let dims = joint.dims().to_vec();
        warnings.extend(space.emptiness_warning(joint.weights().len()));
        let p = joint.as_prob();
        let membership = space.membership(p);
        state = Some(StateSummary {
            entropy: classical::shannon_entropy(p),
            membership,
            pure: if membership { Some(space.is_pure(p)?) } else { None },
            dims: dims.clone(),
        });
        if dims.len() == 2 {
            verdict = Some(if args.search {
                let cfg = SearchConfig {
                    k: args.k,
                    iters: args.iters,
                    restarts: args.restarts,
                    seed,
                    ..SearchConfig::default()
                };
                let v = separability_search(&joint, &space, &cfg)?;
                search_config = Some(cfg);
                v
            } else {
                space.entropy_witness(&joint)?
            });
        } else if args.search {
            return Err(CliError::mismatch("the separability search needs two subsystems"));
        }
    }
    let certified_separable = search_config
        .as_ref()
        .zip(verdict.as_ref())
        .map(|(_, v)| v.certifies_separable(&space, ctx.tol.separable_residual));
    let monte_carlo = match args.monte_carlo {
        Some(n) => {
            let [a, b] = args.dims[..] else {
                return Err(CliError::malformed("--dims takes two dimensions, e.g. 2,3"));
            };
            Some(space.entangled_fraction([a, b], n, seed)?)
        }
        None => None,
    };
    let result = ToyReport {
        space,
        warnings,
        state,
        verdict,
        certified_separable,
        search_config,
        monte_carlo,
    };
    let meta = ctx.meta("toy", seed);
    report::emit(ctx.out.as_deref(), &report::pretty(&Envelope { meta, result })?)?;
    Ok(true)
}
