//! Classical toy model with an entropy floor: only distributions with Shannon entropy at least
//! `ε` are states. The pure states are those sitting exactly on `S = ε`, and they overlap.
//!
//! A product of two members has entropy at least `2ε`, and so does every mixture of products,
//! so a joint state with `S < 2ε` cannot be separable.

mod separability;

use rand::Rng;
use serde::Serialize;

use crate::classical::{self, JointProb, ProbVec};
use crate::error::{Error, Result};
use crate::seed;

pub use separability::{separability_search, Decomposition, SearchConfig};

/// Slack on the entropy comparisons.
const ENTROPY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToyStateSpace {
    /// Entropy floor in nats.
    pub epsilon: f64,
    pub purity_tol: f64,
}

impl ToyStateSpace {
    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_purity_tol(epsilon, 1e-9)
    }

    pub fn with_purity_tol(epsilon: f64, purity_tol: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(purity_tol.is_finite() && purity_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "purity tolerance must be positive, got {purity_tol}"
            )));
        }
        Ok(Self { epsilon, purity_tol })
    }

    /// A message when no dim-`dim` distribution can reach the entropy floor.
    pub fn emptiness_warning(&self, dim: usize) -> Option<String> {
        let max = (dim as f64).ln();
        (self.epsilon > max + ENTROPY_SLACK).then(|| {
            format!(
                "epsilon {} exceeds ln {dim} = {max}; the dim-{dim} state set is empty",
                self.epsilon
            )
        })
    }

    pub fn membership(&self, p: &ProbVec) -> bool {
        classical::shannon_entropy(p) >= self.epsilon - ENTROPY_SLACK
    }

    pub fn is_pure(&self, p: &ProbVec) -> Result<bool> {
        let s = classical::shannon_entropy(p);
        if s < self.epsilon - ENTROPY_SLACK {
            return Err(Error::InvalidState(format!(
                "entropy {s} is below epsilon {}",
                self.epsilon
            )));
        }
        Ok((s - self.epsilon).abs() <= self.purity_tol)
    }

    pub fn sample_pure(&self, dim: usize, seed: u64) -> Result<ProbVec> {
        self.sample_pure_with(dim, &mut seed::rng(seed))
    }

    /// A random point of the `S = ε` surface: bisection along the segment from a random vertex
    /// (entropy 0) to a random interior point with entropy at least `ε`.
    pub fn sample_pure_with<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Result<ProbVec> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let max = (dim as f64).ln();
        if (self.epsilon - max).abs() <= self.purity_tol {
            return ProbVec::uniform(dim);
        }
        if self.epsilon > max {
            return Err(Error::InvalidArgument(format!(
                "no dim-{dim} state has entropy {} (maximum ln {dim} = {max})",
                self.epsilon
            )));
        }
        let vertex = rng.random_range(0..dim);
        let uniform = 1.0 / dim as f64;
        let mut u = classical::sample_state(dim, rng)?.into_weights();
        // Halve the distance to the uniform state until the endpoint is a member.
        while classical::entropy_of(&u) < self.epsilon {
            for x in u.iter_mut() {
                *x = 0.5 * (*x + uniform);
            }
        }
        let at = |t: f64| -> Vec<f64> {
            (0..dim)
                .map(|i| t * u[i] + if i == vertex { 1.0 - t } else { 0.0 })
                .collect()
        };
        // Entropy is concave along the segment, zero at the vertex and ≥ ε at `u`, so it
        // crosses ε exactly once.
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut p = at(hi);
        for _ in 0..200 {
            if (classical::entropy_of(&p) - self.epsilon).abs() <= self.purity_tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let q = at(mid);
            if classical::entropy_of(&q) >= self.epsilon {
                hi = mid;
                p = q;
            } else {
                lo = mid;
            }
        }
        ProbVec::new(p)
    }

    /// Fires when `S(P) < 2ε`, which rules out any separable decomposition.
    pub fn entropy_witness(&self, p: &JointProb) -> Result<SeparabilityVerdict> {
        check_bipartite(p)?;
        let entropy = classical::shannon_entropy(p.as_prob());
        if entropy < self.epsilon - ENTROPY_SLACK {
            return Err(Error::InvalidState(format!(
                "joint entropy {entropy} is below epsilon {}",
                self.epsilon
            )));
        }
        Ok(SeparabilityVerdict {
            witness_fired: self.fires(entropy),
            entropy,
            search_residual: None,
            components: None,
        })
    }

    fn fires(&self, entropy: f64) -> bool {
        entropy < 2.0 * self.epsilon - ENTROPY_SLACK
    }

    /// Samples flat-Dirichlet joint states, keeps the members, and counts how many of them the
    /// witness flags.
    pub fn entangled_fraction(&self, dims: [usize; 2], samples: usize, seed: u64) -> Result<MonteCarloSummary> {
        let n = dims[0] * dims[1];
        if n == 0 {
            return Err(Error::InvalidArgument("dimensions must be at least 1".into()));
        }
        let mut rng = seed::derived_rng(seed, "toy/monte_carlo", 0);
        let (mut members, mut entangled) = (0, 0);
        for _ in 0..samples {
            let p = classical::sample_state(n, &mut rng)?;
            if self.membership(&p) {
                members += 1;
                if self.fires(classical::shannon_entropy(&p)) {
                    entangled += 1;
                }
            }
        }
        Ok(MonteCarloSummary {
            samples,
            members,
            entangled,
            fraction: if members == 0 { 0.0 } else { entangled as f64 / members as f64 },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub samples: usize,
    pub members: usize,
    pub entangled: usize,
    /// `entangled / members`.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparabilityVerdict {
    pub witness_fired: bool,
    pub entropy: f64,
    /// L1 distance between the state and the best decomposition found.
    pub search_residual: Option<f64>,
    pub components: Option<Decomposition>,
}

impl SeparabilityVerdict {
    /// A decomposition within `tol` in L1 whose factors all satisfy the entropy floor.
    pub fn certifies_separable(&self, space: &ToyStateSpace, tol: f64) -> bool {
        match (&self.search_residual, &self.components) {
            (Some(r), Some(c)) => *r <= tol && c.factors_respect(space.epsilon - 1e-9),
            _ => false,
        }
    }
}

fn check_bipartite(p: &JointProb) -> Result<()> {
    if p.subsystems() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected 2 subsystems, found {}",
            p.subsystems()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn p(w: &[f64]) -> ProbVec {
        ProbVec::new(w.to_vec()).unwrap()
    }

    #[test]
    fn membership_examples() {
        let s = ToyStateSpace::new(LN_2).unwrap();
        assert!(s.membership(&ProbVec::uniform(4).unwrap()));
        assert!(!s.membership(&p(&[1.0, 0.0, 0.0])));
        assert!(!ToyStateSpace::new(1e-3).unwrap().membership(&p(&[1.0, 0.0, 0.0])));
        assert!(s.membership(&p(&[0.5, 0.5, 0.0])));
        assert!(ToyStateSpace::new(0.0).is_err());
        assert!(s.emptiness_warning(1).is_some());
        assert!(s.emptiness_warning(2).is_none());
    }

    #[test]
    fn purity_examples() {
        let s = ToyStateSpace::new(LN_2).unwrap();
        assert!(s.is_pure(&p(&[0.5, 0.5])).unwrap());
        assert!(!s.is_pure(&ProbVec::uniform(3).unwrap()).unwrap());
        assert!(s.is_pure(&p(&[0.9, 0.1])).is_err());
        let (a, b) = (p(&[0.5, 0.5, 0.0]), p(&[0.0, 0.5, 0.5]));
        assert!(s.is_pure(&a).unwrap() && s.is_pure(&b).unwrap());
        assert!((classical::bhattacharyya(&a, &b).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sampled_pure_states_sit_on_the_surface() {
        let s = ToyStateSpace::new(0.5).unwrap();
        let mut rng = seed::rng(3);
        for _ in 0..1000 {
            let q = s.sample_pure_with(4, &mut rng).unwrap();
            assert!((classical::shannon_entropy(&q) - 0.5).abs() <= 1e-9);
            assert!(s.is_pure(&q).unwrap());
        }
        assert_eq!(s.sample_pure(3, 9).unwrap(), s.sample_pure(3, 9).unwrap());
    }

    #[test]
    fn sample_pure_at_maximum_entropy() {
        let s = ToyStateSpace::new(LN_2).unwrap();
        let q = s.sample_pure(2, 1).unwrap();
        assert!(q.l1_distance(&ProbVec::uniform(2).unwrap()).unwrap() < 1e-12);
        assert!(s.sample_pure(1, 1).is_err());
        assert!(ToyStateSpace::new(1.2).unwrap().sample_pure(3, 1).is_err());
    }

    #[test]
    fn witness_examples() {
        let s = ToyStateSpace::new(LN_2).unwrap();
        let diag = JointProb::new(vec![0.5, 0.0, 0.0, 0.5], vec![2, 2]).unwrap();
        let v = s.entropy_witness(&diag).unwrap();
        assert!(v.witness_fired);
        assert!((v.entropy - LN_2).abs() < 1e-15);

        let half = p(&[0.5, 0.5]);
        let product = classical::tensor(&half, &half);
        assert!(!s.entropy_witness(&product).unwrap().witness_fired);
        let uniform = JointProb::new(vec![0.25; 4], vec![2, 2]).unwrap();
        assert!(!s.entropy_witness(&uniform).unwrap().witness_fired);

        let point = JointProb::new(vec![1.0, 0.0, 0.0, 0.0], vec![2, 2]).unwrap();
        assert!(matches!(s.entropy_witness(&point), Err(Error::InvalidState(_))));
        let flat = JointProb::new(vec![0.25; 4], vec![4]).unwrap();
        assert!(matches!(s.entropy_witness(&flat), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn pure_joint_states_fire_the_witness() {
        let s = ToyStateSpace::new(0.5).unwrap();
        let mut rng = seed::rng(8);
        for _ in 0..200 {
            let q = s.sample_pure_with(6, &mut rng).unwrap();
            let joint = JointProb::from_prob(q, vec![2, 3]).unwrap();
            assert!(s.entropy_witness(&joint).unwrap().witness_fired);
        }
    }

    #[test]
    fn monte_carlo_fraction_is_reproducible() {
        let s = ToyStateSpace::new(0.5).unwrap();
        let a = s.entangled_fraction([2, 2], 2000, 4).unwrap();
        assert_eq!(a, s.entangled_fraction([2, 2], 2000, 4).unwrap());
        assert!(a.members <= a.samples && a.entangled <= a.members);
        assert!(a.fraction > 0.0 && a.fraction < 1.0);
    }
}
