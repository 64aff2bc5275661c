//! Numerical search for the best approximate cloner of a family of states.
//!
//! The objective of a channel is `min_φ (Φ | φ ⊗ φ)`: how close the parent–offspring joint state
//! comes to two independent copies, for the worst target. Disjoint targets reach 1; overlapping
//! ones cannot.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::broadcast::{broadcast, BroadcastSetup};
use super::nelder_mead::NelderMead;
use crate::classical::StochasticChannel;
use crate::error::{Error, Result};
use crate::quantum::{self, CMatrix, C64};
use crate::seed;
use crate::state::{Backend, Channel, State};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloneSearchConfig {
    pub restarts: usize,
    /// Objective evaluations per restart.
    pub max_evals: usize,
    pub initial_step: f64,
    pub seed: u64,
    /// Allow quantum targets (qubits only).
    pub quantum: bool,
    /// Kraus operators in the quantum parameterization.
    pub kraus_count: usize,
}

impl Default for CloneSearchConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_evals: 2000,
            initial_step: 1.0,
            seed: 0,
            quantum: false,
            kraus_count: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloneSearchResult {
    pub best_channel: Channel,
    pub objective: f64,
    /// `(evaluation, best objective so far)`, with evaluations counted across restarts in
    /// restart order.
    pub trace: Vec<(usize, f64)>,
    pub converged: bool,
    pub evaluations: usize,
    pub best_restart: usize,
}

/// `min_φ (Φ_φ | φ ⊗ φ)` for a channel on system ⊗ environment.
pub fn clone_objective(channel: &Channel, targets: &[State], env: &State, remainder_dim: usize) -> Result<f64> {
    let d = targets
        .first()
        .ok_or_else(|| Error::InvalidArgument("at least one target is required".into()))?
        .dim();
    let setup = BroadcastSetup::new(channel.clone(), env.clone(), d, remainder_dim)?;
    let mut worst = f64::INFINITY;
    for phi in targets {
        let out = broadcast(&setup, phi)?;
        worst = worst.min(out.joint.overlap(&phi.tensor(phi)?)?);
    }
    Ok(worst)
}

struct Problem<'a> {
    targets: &'a [State],
    env: &'a State,
    backend: Backend,
    in_dim: usize,
    out_dim: usize,
    remainder_dim: usize,
    kraus_count: usize,
}

impl Problem<'_> {
    fn n_params(&self) -> usize {
        match self.backend {
            Backend::Classical => self.in_dim * self.out_dim,
            Backend::Quantum => 2 * self.out_dim * self.kraus_count * self.in_dim,
        }
    }

    /// Classical: column `j` is `softmax(θ[j·out .. (j+1)·out])`. Quantum: `θ` holds the real and
    /// imaginary parts of a matrix whose orthonormalized columns form the Stinespring isometry.
    fn channel(&self, theta: &[f64]) -> Result<Channel> {
        match self.backend {
            Backend::Classical => {
                let (n_in, n_out) = (self.in_dim, self.out_dim);
                let mut flat = vec![0.0; n_in * n_out];
                for (j, col) in theta.chunks(n_out).enumerate() {
                    let m = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let e: Vec<f64> = col.iter().map(|v| (v - m).exp()).collect();
                    let z: f64 = e.iter().sum();
                    for (i, v) in e.iter().enumerate() {
                        flat[i * n_in + j] = v / z;
                    }
                }
                Ok(StochasticChannel::new(n_out, n_in, flat)?.into())
            }
            Backend::Quantum => {
                let rows = self.out_dim * self.kraus_count;
                let half = rows * self.in_dim;
                let g = CMatrix::from_fn(rows, self.in_dim, |r, c| {
                    let k = c * rows + r;
                    C64::new(theta[k], theta[half + k])
                });
                Ok(quantum::isometry_channel(g, self.out_dim, self.kraus_count)?.into())
            }
        }
    }

    fn objective(&self, theta: &[f64]) -> f64 {
        self.channel(theta)
            .and_then(|ch| clone_objective(&ch, self.targets, self.env, self.remainder_dim))
            .unwrap_or(f64::NAN)
    }
}

/// Multi-start Nelder–Mead over channels. Each restart draws its start point from a stream
/// derived from `cfg.seed` and the restart index, so the result does not depend on scheduling.
pub fn clone_search(
    targets: &[State],
    env: &State,
    remainder_dim: usize,
    cfg: &CloneSearchConfig,
) -> Result<CloneSearchResult> {
    let first = targets
        .first()
        .ok_or_else(|| Error::InvalidArgument("at least one target is required".into()))?;
    let d = first.dim();
    let backend = first.backend();
    for t in targets {
        if t.backend() != backend {
            return Err(Error::BackendMismatch("targets mix backends".into()));
        }
        if t.dim() != d {
            return Err(Error::DimensionMismatch(format!("target dims {d} and {}", t.dim())));
        }
    }
    if env.backend() != backend {
        return Err(Error::BackendMismatch(format!(
            "targets are {backend} but environment is {}",
            env.backend()
        )));
    }
    if cfg.restarts == 0 || cfg.max_evals == 0 || remainder_dim == 0 {
        return Err(Error::InvalidArgument(
            "restarts, max_evals and remainder_dim must be at least 1".into(),
        ));
    }
    if backend == Backend::Quantum {
        if !cfg.quantum {
            return Err(Error::InvalidArgument(
                "quantum clone search is disabled; enable it in the config".into(),
            ));
        }
        if d != 2 {
            return Err(Error::InvalidArgument(format!(
                "quantum clone search supports qubits only, got dim {d}"
            )));
        }
        if cfg.kraus_count == 0 {
            return Err(Error::InvalidArgument("kraus_count must be at least 1".into()));
        }
    }
    let problem = Problem {
        targets,
        env,
        backend,
        in_dim: d * env.dim(),
        out_dim: d * d * remainder_dim,
        remainder_dim,
        kraus_count: cfg.kraus_count,
    };
    if backend == Backend::Quantum && problem.out_dim * problem.kraus_count < problem.in_dim {
        return Err(Error::InvalidArgument("too few Kraus operators for an isometry".into()));
    }
    let nm = NelderMead {
        max_evals: cfg.max_evals,
        initial_step: cfg.initial_step,
        ..NelderMead::default()
    };
    let n = problem.n_params();
    let runs: Vec<_> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed::derived_rng(cfg.seed, "clone_search", r as u64);
            let x0: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            nm.minimize(|x| -problem.objective(x), &x0)
        })
        .collect();

    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.f < runs[best].f {
            best = i;
        }
    }
    let mut trace = Vec::new();
    let mut offset = 0;
    let mut so_far = f64::NEG_INFINITY;
    for run in &runs {
        for &(e, f) in &run.history {
            if -f > so_far {
                so_far = -f;
                trace.push((offset + e, so_far));
            }
        }
        offset += run.evals;
    }
    let best_channel = problem.channel(&runs[best].x)?;
    let objective = clone_objective(&best_channel, targets, env, remainder_dim)?;
    Ok(CloneSearchResult {
        best_channel,
        objective,
        trace,
        converged: runs[best].converged,
        evaluations: offset,
        best_restart: best,
    })
}
