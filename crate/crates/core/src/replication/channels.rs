//! Channel constructions used by the replication processes.

use crate::classical::{ProbVec, StochasticChannel};
use crate::error::{Error, Result};
use crate::quantum::{self, CMatrix, DensityMatrix, KrausChannel};
use crate::state::{Channel, State};

/// Deterministic copier `i ↦ (i, i)`, taking `p` to `P(i, j) = p(i) δ_ij`.
pub fn diag_broadcaster(d: usize) -> Result<StochasticChannel> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let cols = (0..d)
        .map(|i| ProbVec::basis(d * d, i * d + i))
        .collect::<Result<Vec<_>>>()?;
    StochasticChannel::from_columns(&cols)
}

/// Perfect broadcaster for a commuting family.
///
/// Rotates into the common eigenbasis, copies the diagonal with [`diag_broadcaster`], and
/// rotates both output factors back: `K_k = (u_k ⊗ u_k) u_k†` for each shared eigenvector `u_k`.
pub fn commuting_broadcaster(states: &[DensityMatrix], tol: f64) -> Result<KrausChannel> {
    let (basis, _) = quantum::simultaneous_diagonalization(states, tol)?;
    let d = basis.nrows();
    let ops = (0..d)
        .map(|k| {
            let u = basis.column(k);
            let uu = u.kronecker(&u);
            uu * u.adjoint()
        })
        .collect();
    KrausChannel::new(ops)
}

/// `x ↦ x ⊗ offspring`: the parent passes through untouched and the offspring slot is filled
/// with a fixed state.
pub fn fixed_offspring(d: usize, offspring: &State) -> Result<Channel> {
    match offspring {
        State::Classical(c) => {
            let cols = (0..d)
                .map(|i| {
                    let mut w = vec![0.0; d * c.dim()];
                    w[i * c.dim()..(i + 1) * c.dim()].copy_from_slice(c.weights());
                    ProbVec::new(w)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(StochasticChannel::from_columns(&cols)?.into())
        }
        State::Quantum(rho) => {
            let (values, vectors) = quantum::hermitian_eigen(rho.matrix())?;
            let id = CMatrix::identity(d, d);
            let ops = values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.0)
                .map(|(k, &v)| {
                    let ket = vectors.column(k).scale(v.sqrt());
                    id.kronecker(&ket)
                })
                .collect();
            Ok(KrausChannel::new(ops)?.into())
        }
    }
}

/// Classical channel on system ⊗ environment (both dimension `d`) that keeps the parent, writes
/// the environment value into the offspring slot, and leaves the environment as the remainder:
/// `(s, e) ↦ (s, e, e)`.
pub fn env_copier(d: usize) -> Result<StochasticChannel> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut cols = Vec::with_capacity(d * d);
    for s in 0..d {
        for e in 0..d {
            cols.push(ProbVec::basis(d * d * d, (s * d + e) * d + e)?);
        }
    }
    StochasticChannel::from_columns(&cols)
}

/// `channel ⊗ id_env`: the environment is carried through unchanged as the remainder.
pub fn with_passive_env(channel: &Channel, env_dim: usize) -> Result<Channel> {
    channel.kron(&Channel::identity(channel.backend(), env_dim)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{self, tensor};
    use crate::quantum::{diag_embed, partial_trace, uhlmann_fidelity};
    use crate::quantum::C64;
    use crate::seed;

    #[test]
    fn diag_broadcaster_examples() {
        let m = diag_broadcaster(2).unwrap();
        let out = m.apply(&ProbVec::basis(2, 0).unwrap()).unwrap();
        assert_eq!(out.weights(), &[1.0, 0.0, 0.0, 0.0]);
        let out = m.apply(&ProbVec::uniform(2).unwrap()).unwrap();
        assert_eq!(out.weights(), &[0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn diag_broadcaster_marginals_reproduce_input() {
        let mut rng = seed::rng(12);
        for d in 1..=5 {
            let m = diag_broadcaster(d).unwrap();
            let p = classical::sample_state(d, &mut rng).unwrap();
            let out = classical::JointProb::from_prob(m.apply(&p).unwrap(), vec![d, d]).unwrap();
            for k in 0..2 {
                assert!(out.marginal(k).unwrap().l1_distance(&p).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn fixed_offspring_appends_state() {
        let c = State::from(ProbVec::new(vec![0.25, 0.75]).unwrap());
        let ch = fixed_offspring(3, &c).unwrap();
        let p = classical::random_state(3, 1).unwrap();
        let out = ch.apply(&State::from(p.clone())).unwrap();
        let expected: State = tensor(&p, c.as_classical().unwrap()).into();
        assert!(out.distance(&expected).unwrap() < 1e-15);

        let rho = quantum::random_density(2, 3).unwrap();
        let sigma = quantum::random_density(2, 4).unwrap();
        let ch = fixed_offspring(2, &State::from(sigma.clone())).unwrap();
        let out = ch.apply(&State::from(rho.clone())).unwrap();
        let expected = State::from(quantum::tensor(&rho, &sigma).unwrap());
        assert!(out.distance(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn env_copier_moves_environment_into_offspring() {
        let m = env_copier(2).unwrap();
        let s = ProbVec::new(vec![0.81, 0.19]).unwrap();
        let e = ProbVec::basis(2, 1).unwrap();
        let out = m.apply(tensor(&s, &e).as_prob()).unwrap();
        let joint = classical::JointProb::from_prob(out, vec![2, 2, 2]).unwrap();
        assert_eq!(joint.marginal(0).unwrap(), s);
        assert_eq!(joint.marginal(1).unwrap(), e);
        assert_eq!(joint.marginal(2).unwrap(), e);
    }

    #[test]
    fn commuting_broadcaster_reproduces_family() {
        let a = diag_embed(&ProbVec::new(vec![0.5, 0.5]).unwrap(), None).unwrap();
        let b = diag_embed(&ProbVec::new(vec![0.8, 0.2]).unwrap(), None).unwrap();
        let ch = commuting_broadcaster(&[a.clone(), b.clone()], 1e-8).unwrap();
        for s in [&a, &b] {
            let out = ch.apply(s).unwrap();
            for k in 0..2 {
                let m = partial_trace(&out, &[2, 2], &[k]).unwrap();
                assert!(uhlmann_fidelity(&m, s).unwrap() >= 1.0 - 1e-9);
            }
        }
        let zero = DensityMatrix::basis(2, 0).unwrap();
        let plus = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert!(matches!(
            commuting_broadcaster(&[zero, plus], 1e-8),
            Err(Error::NonCommuting { .. })
        ));
    }
}
