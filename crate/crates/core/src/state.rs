//! Backend-agnostic states and channels.
//!
//! The axiom checks and replication processes are written once against [`State`] and
//! [`Channel`]; the overlap is the Bhattacharyya coefficient for distributions and the Uhlmann
//! fidelity for density matrices.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{self, JointProb, ProbVec, StochasticChannel};
use crate::error::{Error, Result};
use crate::quantum::{self, DensityMatrix, KrausChannel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Classical,
    Quantum,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Classical => "classical",
            Backend::Quantum => "quantum",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Classical(ProbVec),
    Quantum(DensityMatrix),
}

impl From<ProbVec> for State {
    fn from(p: ProbVec) -> Self {
        State::Classical(p)
    }
}

impl From<JointProb> for State {
    fn from(p: JointProb) -> Self {
        State::Classical(p.into_prob())
    }
}

impl From<DensityMatrix> for State {
    fn from(rho: DensityMatrix) -> Self {
        State::Quantum(rho)
    }
}

fn backend_mismatch(a: Backend, b: Backend) -> Error {
    Error::BackendMismatch(format!("{a} vs {b}"))
}

impl State {
    pub fn backend(&self) -> Backend {
        match self {
            State::Classical(_) => Backend::Classical,
            State::Quantum(_) => Backend::Quantum,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            State::Classical(p) => p.dim(),
            State::Quantum(rho) => rho.dim(),
        }
    }

    /// The trivial one-outcome state, used as an environment that carries nothing.
    pub fn trivial(backend: Backend) -> State {
        match backend {
            Backend::Classical => State::Classical(ProbVec::from_trusted(vec![1.0])),
            Backend::Quantum => State::Quantum(DensityMatrix::maximally_mixed(1).expect("dim 1")),
        }
    }

    pub fn as_classical(&self) -> Option<&ProbVec> {
        match self {
            State::Classical(p) => Some(p),
            State::Quantum(_) => None,
        }
    }

    pub fn as_quantum(&self) -> Option<&DensityMatrix> {
        match self {
            State::Quantum(rho) => Some(rho),
            State::Classical(_) => None,
        }
    }

    /// The overlap `(self | other)`.
    pub fn overlap(&self, other: &State) -> Result<f64> {
        match (self, other) {
            (State::Classical(p), State::Classical(q)) => classical::bhattacharyya(p, q),
            (State::Quantum(a), State::Quantum(b)) => quantum::uhlmann_fidelity(a, b),
            _ => Err(backend_mismatch(self.backend(), other.backend())),
        }
    }

    /// L1 distance for distributions, trace norm for density matrices.
    pub fn distance(&self, other: &State) -> Result<f64> {
        match (self, other) {
            (State::Classical(p), State::Classical(q)) => p.l1_distance(q),
            (State::Quantum(a), State::Quantum(b)) => a.trace_norm_distance(b),
            _ => Err(backend_mismatch(self.backend(), other.backend())),
        }
    }

    pub fn tensor(&self, other: &State) -> Result<State> {
        match (self, other) {
            (State::Classical(p), State::Classical(q)) => Ok(classical::tensor(p, q).into()),
            (State::Quantum(a), State::Quantum(b)) => Ok(quantum::tensor(a, b)?.into()),
            _ => Err(backend_mismatch(self.backend(), other.backend())),
        }
    }

    /// Reduced state on the `keep` subsystems of a composite with the given dimensions.
    pub fn reduce(&self, dims: &[usize], keep: &[usize]) -> Result<State> {
        match self {
            State::Classical(p) => {
                let joint = JointProb::from_prob(p.clone(), dims.to_vec())?;
                Ok(joint.reduce(keep)?.into())
            }
            State::Quantum(rho) => Ok(quantum::partial_trace(rho, dims, keep)?.into()),
        }
    }

    pub fn marginal(&self, dims: &[usize], keep: usize) -> Result<State> {
        self.reduce(dims, &[keep])
    }

    /// Shannon entropy of the distribution or von Neumann entropy of the spectrum, in nats.
    pub fn entropy(&self) -> Result<f64> {
        match self {
            State::Classical(p) => Ok(classical::shannon_entropy(p)),
            State::Quantum(rho) => Ok(classical::entropy_of(&rho.eigenvalues()?)),
        }
    }

    pub fn sample<R: Rng + ?Sized>(backend: Backend, dim: usize, rng: &mut R) -> Result<State> {
        match backend {
            Backend::Classical => Ok(classical::sample_state(dim, rng)?.into()),
            Backend::Quantum => Ok(quantum::sample_density(dim, rng)?.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Classical(StochasticChannel),
    Quantum(KrausChannel),
}

impl From<StochasticChannel> for Channel {
    fn from(m: StochasticChannel) -> Self {
        Channel::Classical(m)
    }
}

impl From<KrausChannel> for Channel {
    fn from(k: KrausChannel) -> Self {
        Channel::Quantum(k)
    }
}

impl Channel {
    pub fn backend(&self) -> Backend {
        match self {
            Channel::Classical(_) => Backend::Classical,
            Channel::Quantum(_) => Backend::Quantum,
        }
    }

    pub fn in_dim(&self) -> usize {
        match self {
            Channel::Classical(m) => m.in_dim(),
            Channel::Quantum(k) => k.in_dim(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Channel::Classical(m) => m.out_dim(),
            Channel::Quantum(k) => k.out_dim(),
        }
    }

    pub fn identity(backend: Backend, dim: usize) -> Result<Channel> {
        match backend {
            Backend::Classical => Ok(StochasticChannel::identity(dim)?.into()),
            Backend::Quantum => Ok(KrausChannel::identity(dim)?.into()),
        }
    }

    pub fn apply(&self, state: &State) -> Result<State> {
        match (self, state) {
            (Channel::Classical(m), State::Classical(p)) => Ok(m.apply(p)?.into()),
            (Channel::Quantum(k), State::Quantum(rho)) => Ok(k.apply(rho)?.into()),
            _ => Err(backend_mismatch(self.backend(), state.backend())),
        }
    }

    pub fn kron(&self, other: &Channel) -> Result<Channel> {
        match (self, other) {
            (Channel::Classical(a), Channel::Classical(b)) => Ok(a.kron(b).into()),
            (Channel::Quantum(a), Channel::Quantum(b)) => Ok(a.kron(b)?.into()),
            _ => Err(backend_mismatch(self.backend(), other.backend())),
        }
    }

    /// Whether two channels act identically, up to `tol`.
    ///
    /// Kraus channels are compared through their action on a basis of matrix units, which is
    /// independent of the (non-unique) Kraus decomposition.
    pub fn approx_eq(&self, other: &Channel, tol: f64) -> bool {
        if self.in_dim() != other.in_dim() || self.out_dim() != other.out_dim() {
            return false;
        }
        match (self, other) {
            (Channel::Classical(a), Channel::Classical(b)) => {
                a.max_abs_diff(b).is_some_and(|d| d <= tol)
            }
            (Channel::Quantum(a), Channel::Quantum(b)) => {
                let n = a.in_dim();
                for i in 0..n {
                    for j in 0..n {
                        let mut unit = quantum::CMatrix::zeros(n, n);
                        unit[(i, j)] = quantum::C64::new(1.0, 0.0);
                        let act = |k: &KrausChannel| {
                            k.ops()
                                .iter()
                                .fold(quantum::CMatrix::zeros(k.out_dim(), k.out_dim()), |acc, op| {
                                    acc + op * &unit * op.adjoint()
                                })
                        };
                        if (act(a) - act(b)).norm() > tol {
                            return false;
                        }
                    }
                }
                true
            }
            _ => false,
        }
    }

    pub fn sample<R: Rng + ?Sized>(
        backend: Backend,
        in_dim: usize,
        out_dim: usize,
        rng: &mut R,
    ) -> Result<Channel> {
        match backend {
            Backend::Classical => Ok(classical::sample_channel(in_dim, out_dim, rng)?.into()),
            Backend::Quantum => {
                // Enough Kraus operators for the isometry to exist, plus a little mixing.
                let env = in_dim.div_ceil(out_dim).max(2);
                Ok(quantum::sample_cptp(in_dim, out_dim, env, rng)?.into())
            }
        }
    }
}
