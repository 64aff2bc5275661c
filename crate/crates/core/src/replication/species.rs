//! Multi-generation replication of several species.
//!
//! Every generation each species is broadcast with its environment state and the offspring
//! becomes the next parent. With a shared environment the pairwise overlaps can only grow;
//! distinct environments are what lets species separate.

use rayon::prelude::*;
use serde::Serialize;

use super::broadcast::{broadcast, BroadcastSetup};
use crate::error::{Error, Result};
use crate::state::{Channel, State};

#[derive(Debug, Clone, PartialEq)]
pub enum EnvPolicy {
    Homogeneous(State),
    /// One environment state per species, by index.
    PerSpecies(Vec<State>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesScenario {
    species: Vec<State>,
    env: EnvPolicy,
    channel: Channel,
    generations: usize,
    setups: Vec<BroadcastSetup>,
}

impl SpeciesScenario {
    /// The remainder dimension is inferred from the channel's output dimension.
    pub fn new(species: Vec<State>, env: EnvPolicy, channel: Channel, generations: usize) -> Result<Self> {
        if generations == 0 {
            return Err(Error::InvalidArgument("generations must be at least 1".into()));
        }
        let d = species
            .first()
            .ok_or_else(|| Error::InvalidArgument("at least one species is required".into()))?
            .dim();
        for s in &species {
            if s.dim() != d {
                return Err(Error::DimensionMismatch(format!("species dims {d} and {}", s.dim())));
            }
            if s.backend() != channel.backend() {
                return Err(Error::BackendMismatch(format!(
                    "species state is {} but channel is {}",
                    s.backend(),
                    channel.backend()
                )));
            }
        }
        if channel.out_dim() % (d * d) != 0 {
            return Err(Error::DimensionMismatch(format!(
                "channel output dim {} is not a multiple of {d}x{d}",
                channel.out_dim()
            )));
        }
        let r = channel.out_dim() / (d * d);
        let envs: Vec<State> = match &env {
            EnvPolicy::Homogeneous(w) => vec![w.clone(); species.len()],
            EnvPolicy::PerSpecies(ws) => {
                if ws.len() != species.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} environment states for {} species",
                        ws.len(),
                        species.len()
                    )));
                }
                ws.clone()
            }
        };
        let setups = envs
            .into_iter()
            .map(|w| BroadcastSetup::new(channel.clone(), w, d, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            species,
            env,
            channel,
            generations,
            setups,
        })
    }

    pub fn species(&self) -> &[State] {
        &self.species
    }

    pub fn env(&self) -> &EnvPolicy {
        &self.env
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn generations(&self) -> usize {
        self.generations
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self.env, EnvPolicy::Homogeneous(_))
    }
}

/// Parent–offspring correlation of one species in one generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineageRecord {
    pub species: usize,
    /// `(φ₁ | φ₂)`.
    pub parent_offspring_overlap: f64,
    /// `(Φ | φ₁ ⊗ φ₂)`; below 1 when parent and offspring are correlated.
    pub joint_product_overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Pairwise overlaps of the species states of this generation.
    pub overlaps: Vec<Vec<f64>>,
    /// Pairwise overlaps of the parent–offspring joints that produced this generation; empty
    /// for generation 0.
    pub joint_overlaps: Vec<Vec<f64>>,
    /// Empty for generation 0.
    pub lineage: Vec<LineageRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub generations: Vec<GenerationRecord>,
    pub final_states: Vec<State>,
}

impl Trajectory {
    /// Overlap of species `i` and `j` across generations, starting with the initial states.
    pub fn pairwise_series(&self, i: usize, j: usize) -> Vec<f64> {
        self.generations.iter().map(|g| g.overlaps[i][j]).collect()
    }

    /// Most negative one-step change of any pairwise overlap (0 if none decreases).
    pub fn worst_step_decrease(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for w in self.generations.windows(2) {
            for (row0, row1) in w[0].overlaps.iter().zip(&w[1].overlaps) {
                for (a, b) in row0.iter().zip(row1) {
                    worst = worst.min(b - a);
                }
            }
        }
        worst
    }
}

fn pairwise(states: &[State]) -> Result<Vec<Vec<f64>>> {
    let n = states.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = states[i].overlap(&states[j])?;
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    Ok(m)
}

/// Runs the scenario. The process itself is deterministic; `seed` is carried into the
/// trajectory so reports built from it record where their inputs came from.
pub fn species_simulate(scenario: &SpeciesScenario, seed: u64) -> Result<Trajectory> {
    let mut current = scenario.species.clone();
    let mut generations = vec![GenerationRecord {
        generation: 0,
        overlaps: pairwise(&current)?,
        joint_overlaps: Vec::new(),
        lineage: Vec::new(),
    }];
    for g in 1..=scenario.generations {
        let outcomes = current
            .par_iter()
            .zip(&scenario.setups)
            .map(|(phi, setup)| broadcast(setup, phi))
            .collect::<Result<Vec<_>>>()?;
        let lineage = outcomes
            .iter()
            .enumerate()
            .map(|(k, o)| {
                let product = o.parent.tensor(&o.offspring)?;
                Ok(LineageRecord {
                    species: k,
                    parent_offspring_overlap: o.parent.overlap(&o.offspring)?,
                    joint_product_overlap: o.joint.overlap(&product)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let joints: Vec<State> = outcomes.iter().map(|o| o.joint.clone()).collect();
        current = outcomes.into_iter().map(|o| o.offspring).collect();
        generations.push(GenerationRecord {
            generation: g,
            overlaps: pairwise(&current)?,
            joint_overlaps: pairwise(&joints)?,
            lineage,
        });
    }
    Ok(Trajectory {
        seed,
        generations,
        final_states: current,
    })
}
