//! Verifiers for the four overlap axioms and a seeded Monte Carlo runner.
//!
//! Each check computes a signed margin: non-negative when the property holds exactly, negative
//! by the size of the violation otherwise. A report passes when its worst margin is at least
//! `-tolerance`.
//!
//! - A1: `0 ≤ (φ|ψ) ≤ 1`, and `(φ|ψ) = 1` exactly when `φ = ψ`.
//! - A2: `(φ⊗ψ | φ′⊗ψ′) = (φ|φ′)(ψ|ψ′)`.
//! - A3: `(Tφ | Tψ) ≥ (φ|ψ)`, with equality for unitary dynamics.
//! - A4: each marginal overlap is at least the joint overlap.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{ChannelDoc, StateDoc};
use crate::seed;
use crate::state::{Backend, Channel, State};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axiom {
    A1,
    A2,
    A3,
    A4,
}

impl Axiom {
    pub const ALL: [Axiom; 4] = [Axiom::A1, Axiom::A2, Axiom::A3, Axiom::A4];

    pub fn tolerance(self, tol: &Tolerances) -> f64 {
        match self {
            Axiom::A1 => tol.a1,
            Axiom::A2 => tol.a2,
            Axiom::A3 => tol.a3,
            Axiom::A4 => tol.a4,
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Verdict for one axiom over one or more trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub backend: Backend,
    pub trials: usize,
    /// Smallest margin seen; negative means the property was violated by that much.
    pub worst_violation: f64,
    pub tolerance: f64,
    /// Inputs of the worst trial, enough to replay it.
    pub witness: Value,
    pub passed: bool,
}

impl AxiomReport {
    fn single(axiom: Axiom, backend: Backend, margin: f64, tol: &Tolerances, witness: Value) -> Self {
        let tolerance = axiom.tolerance(tol);
        Self {
            axiom,
            backend,
            trials: 1,
            worst_violation: margin,
            tolerance,
            witness,
            passed: margin >= -tolerance,
        }
    }

    /// Combines per-trial reports, keeping the worst one (earliest on ties).
    fn merge(reports: Vec<AxiomReport>) -> Option<AxiomReport> {
        let trials = reports.iter().map(|r| r.trials).sum();
        let (index, worst) = reports.into_iter().enumerate().min_by(|(i, a), (j, b)| {
            a.worst_violation.total_cmp(&b.worst_violation).then(i.cmp(j))
        })?;
        let mut witness = worst.witness;
        if let Value::Object(map) = &mut witness {
            map.insert("trial".into(), json!(index));
        }
        Some(AxiomReport {
            trials,
            witness,
            passed: worst.worst_violation >= -worst.tolerance,
            ..worst
        })
    }
}

fn same_backend(states: &[&State]) -> Result<Backend> {
    let b = states[0].backend();
    if let Some(other) = states.iter().find(|s| s.backend() != b) {
        return Err(Error::BackendMismatch(format!("{b} vs {}", other.backend())));
    }
    Ok(b)
}

fn doc(s: &State) -> Value {
    serde_json::to_value(StateDoc::from_state(s)).unwrap_or(Value::Null)
}

/// Bounds and the identity-of-indiscernibles biconditional.
///
/// "Overlap one implies equal" is checked in its quantitative form
/// `‖φ − ψ‖₁ ≤ 2√(1 − (φ|ψ)²)`, which reduces to the literal implication at overlap one and
/// stays meaningful at floating-point resolution.
pub fn check_a1(phi: &State, psi: &State, tol: &Tolerances) -> Result<AxiomReport> {
    let backend = same_backend(&[phi, psi])?;
    let overlap = phi.overlap(psi)?;
    let distance = phi.distance(psi)?;
    let mut margin = overlap.min(1.0 - overlap);
    if distance <= tol.state_equality {
        margin = margin.min(overlap - 1.0);
    }
    let bound = 2.0 * (1.0 - overlap * overlap).max(0.0).sqrt();
    margin = margin.min(bound - distance);
    let witness = json!({
        "phi": doc(phi),
        "psi": doc(psi),
        "overlap": overlap,
        "distance": distance,
    });
    Ok(AxiomReport::single(Axiom::A1, backend, margin, tol, witness))
}

/// Factorization of the overlap over product states.
pub fn check_a2(
    phi: &State,
    psi: &State,
    phi2: &State,
    psi2: &State,
    tol: &Tolerances,
) -> Result<AxiomReport> {
    let backend = same_backend(&[phi, psi, phi2, psi2])?;
    if phi.dim() != phi2.dim() || psi.dim() != psi2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "product factors must match: {}⊗{} vs {}⊗{}",
            phi.dim(),
            psi.dim(),
            phi2.dim(),
            psi2.dim()
        )));
    }
    let joint = phi.tensor(psi)?.overlap(&phi2.tensor(psi2)?)?;
    let product = phi.overlap(phi2)? * psi.overlap(psi2)?;
    let witness = json!({
        "phi": doc(phi),
        "psi": doc(psi),
        "phi_prime": doc(phi2),
        "psi_prime": doc(psi2),
        "joint_overlap": joint,
        "product_overlap": product,
    });
    Ok(AxiomReport::single(
        Axiom::A2,
        backend,
        -(joint - product).abs(),
        tol,
        witness,
    ))
}

/// Monotonicity of the overlap under a channel; equality is also required for unitary channels.
pub fn check_a3(channel: &Channel, phi: &State, psi: &State, tol: &Tolerances) -> Result<AxiomReport> {
    let backend = same_backend(&[phi, psi])?;
    if channel.backend() != backend {
        return Err(Error::BackendMismatch(format!(
            "channel is {}, states are {backend}",
            channel.backend()
        )));
    }
    let before = phi.overlap(psi)?;
    let after = channel.apply(phi)?.overlap(&channel.apply(psi)?)?;
    let unitary = matches!(channel, Channel::Quantum(k) if k.is_unitary());
    let margin = if unitary {
        -(after - before).abs()
    } else {
        after - before
    };
    let witness = json!({
        "channel": serde_json::to_value(ChannelDoc::from_channel(channel)).unwrap_or(Value::Null),
        "phi": doc(phi),
        "psi": doc(psi),
        "overlap_before": before,
        "overlap_after": after,
        "unitary": unitary,
    });
    Ok(AxiomReport::single(Axiom::A3, backend, margin, tol, witness))
}

/// Marginals are no better distinguishable than the joint states.
pub fn check_a4(joint_a: &State, joint_b: &State, dims: &[usize], tol: &Tolerances) -> Result<AxiomReport> {
    let backend = same_backend(&[joint_a, joint_b])?;
    if joint_a.dim() != joint_b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "joint states have dimensions {} and {}",
            joint_a.dim(),
            joint_b.dim()
        )));
    }
    let joint = joint_a.overlap(joint_b)?;
    let marginals = (0..dims.len())
        .map(|k| joint_a.marginal(dims, k)?.overlap(&joint_b.marginal(dims, k)?))
        .collect::<Result<Vec<f64>>>()?;
    let margin = marginals.iter().fold(f64::INFINITY, |m, &x| m.min(x - joint));
    let witness = json!({
        "joint_a": doc(joint_a),
        "joint_b": doc(joint_b),
        "dims": dims,
        "joint_overlap": joint,
        "marginal_overlaps": marginals,
    });
    Ok(AxiomReport::single(Axiom::A4, backend, margin, tol, witness))
}

/// Configuration of a Monte Carlo axiom run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub backends: Vec<Backend>,
    /// Inclusive range of single-system dimensions for the classical backend.
    pub classical_dims: (usize, usize),
    /// Inclusive range for the quantum backend; composites are products of two such systems.
    pub quantum_dims: (usize, usize),
    pub trials: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            backends: vec![Backend::Classical, Backend::Quantum],
            classical_dims: (2, 4),
            quantum_dims: (2, 3),
            trials: 1000,
            seed: 0,
            tolerances: Tolerances::default(),
        }
    }
}

impl SuiteConfig {
    fn dims(&self, backend: Backend) -> (usize, usize) {
        match backend {
            Backend::Classical => self.classical_dims,
            Backend::Quantum => self.quantum_dims,
        }
    }
}

fn trial(cfg: &SuiteConfig, backend: Backend, axiom: Axiom, index: usize) -> Result<AxiomReport> {
    use rand::Rng;
    let label = format!("axioms/{backend}/{axiom}");
    let mut rng = seed::derived_rng(cfg.seed, &label, index as u64);
    let (lo, hi) = cfg.dims(backend);
    let dim = |rng: &mut seed::Rng| rng.random_range(lo..=hi);
    let tol = &cfg.tolerances;
    match axiom {
        Axiom::A1 => {
            let d = dim(&mut rng);
            let phi = State::sample(backend, d, &mut rng)?;
            let psi = State::sample(backend, d, &mut rng)?;
            let distinct = check_a1(&phi, &psi, tol)?;
            let same = check_a1(&phi, &phi.clone(), tol)?;
            let merged = AxiomReport::merge(vec![distinct, same]).expect("two reports");
            Ok(AxiomReport { trials: 1, ..merged })
        }
        Axiom::A2 => {
            let (d1, d2) = (dim(&mut rng), dim(&mut rng));
            let phi = State::sample(backend, d1, &mut rng)?;
            let psi = State::sample(backend, d2, &mut rng)?;
            let phi2 = State::sample(backend, d1, &mut rng)?;
            let psi2 = State::sample(backend, d2, &mut rng)?;
            check_a2(&phi, &psi, &phi2, &psi2, tol)
        }
        Axiom::A3 => {
            let (d_in, d_out) = (dim(&mut rng), dim(&mut rng));
            let channel = Channel::sample(backend, d_in, d_out, &mut rng)?;
            let phi = State::sample(backend, d_in, &mut rng)?;
            let psi = State::sample(backend, d_in, &mut rng)?;
            check_a3(&channel, &phi, &psi, tol)
        }
        Axiom::A4 => {
            let dims = [dim(&mut rng), dim(&mut rng)];
            let a = State::sample(backend, dims[0] * dims[1], &mut rng)?;
            let b = State::sample(backend, dims[0] * dims[1], &mut rng)?;
            check_a4(&a, &b, &dims, tol)
        }
    }
}

/// Runs every axiom on `cfg.trials` seeded random instances per backend.
///
/// Trials run in parallel; each draws from its own derived seed and the aggregate is a minimum,
/// so the reports do not depend on scheduling.
pub fn run_axiom_suite(cfg: &SuiteConfig) -> Result<Vec<AxiomReport>> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    for backend in &cfg.backends {
        let (lo, hi) = cfg.dims(*backend);
        if lo == 0 || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "invalid {backend} dimension range {lo}..={hi}"
            )));
        }
    }
    let mut out = Vec::new();
    for &backend in &cfg.backends {
        for axiom in Axiom::ALL {
            let reports = (0..cfg.trials)
                .into_par_iter()
                .map(|i| trial(cfg, backend, axiom, i))
                .collect::<Result<Vec<_>>>()?;
            out.extend(AxiomReport::merge(reports));
        }
    }
    Ok(out)
}

/// Checks A3 for a given channel against `trials` random input pairs.
pub fn check_channel(channel: &Channel, trials: usize, seed: u64, tol: &Tolerances) -> Result<AxiomReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let backend = channel.backend();
    let reports = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::derived_rng(seed, "axioms/channel", i as u64);
            let phi = State::sample(backend, channel.in_dim(), &mut rng)?;
            let psi = State::sample(backend, channel.in_dim(), &mut rng)?;
            check_a3(channel, &phi, &psi, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AxiomReport::merge(reports).expect("at least one trial"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{ProbVec, StochasticChannel};
    use crate::quantum::{self, DensityMatrix, KrausChannel};

    fn p(w: &[f64]) -> State {
        ProbVec::new(w.to_vec()).unwrap().into()
    }

    #[test]
    fn a1_examples() {
        let tol = Tolerances::default();
        let r = check_a1(&p(&[0.5, 0.5]), &p(&[0.5, 0.5]), &tol).unwrap();
        assert!(r.passed);
        assert_eq!(r.witness["overlap"], 1.0);
        let r = check_a1(&p(&[1.0, 0.0]), &p(&[0.0, 1.0]), &tol).unwrap();
        assert!(r.passed);
        assert_eq!(r.witness["overlap"], 0.0);
        let delta = 1e-3;
        let r = check_a1(&p(&[0.5, 0.5]), &p(&[0.5 + delta, 0.5 - delta]), &tol).unwrap();
        assert!(r.passed);
        let overlap = r.witness["overlap"].as_f64().unwrap();
        assert!(overlap < 1.0);
        // 1 − B ≈ δ²/2 for this pair
        assert!((1.0 - overlap - delta * delta / 2.0).abs() < 1e-9);
        let rho: State = DensityMatrix::basis(2, 0).unwrap().into();
        assert!(matches!(check_a1(&p(&[1.0, 0.0]), &rho, &tol), Err(Error::BackendMismatch(_))));
    }

    #[test]
    fn a2_examples() {
        let tol = Tolerances::default();
        let (phi, phi2) = (p(&[0.2, 0.8]), p(&[0.6, 0.4]));
        let psi = p(&[0.1, 0.3, 0.6]);
        let r = check_a2(&phi, &psi, &phi2, &psi, &tol).unwrap();
        assert!(r.passed);
        let joint = r.witness["joint_overlap"].as_f64().unwrap();
        assert!((joint - phi.overlap(&phi2).unwrap()).abs() < 1e-12);

        let r = check_a2(&phi, &p(&[1.0, 0.0]), &phi2, &p(&[0.0, 1.0]), &tol).unwrap();
        assert!(r.passed);
        assert_eq!(r.witness["joint_overlap"], 0.0);
        assert!(check_a2(&phi, &psi, &psi, &phi, &tol).is_err());
    }

    #[test]
    fn a2_matches_brute_force_joint_sum() {
        let mut rng = seed::rng(17);
        let s = |d, rng: &mut seed::Rng| crate::classical::sample_state(d, rng).unwrap();
        let (a, b, a2, b2) = (s(3, &mut rng), s(2, &mut rng), s(3, &mut rng), s(2, &mut rng));
        let mut brute = 0.0;
        for i in 0..3 {
            for j in 0..2 {
                brute += (a.weights()[i] * b.weights()[j] * a2.weights()[i] * b2.weights()[j]).sqrt();
            }
        }
        let r = check_a2(&a.into(), &b.into(), &a2.into(), &b2.into(), &Tolerances::default()).unwrap();
        assert!((r.witness["joint_overlap"].as_f64().unwrap() - brute).abs() < 1e-14);
        assert!(r.passed);
    }

    #[test]
    fn a3_examples() {
        let tol = Tolerances::default();
        let (phi, psi) = (p(&[0.2, 0.3, 0.5]), p(&[0.6, 0.3, 0.1]));
        let id = Channel::identity(Backend::Classical, 3).unwrap();
        let r = check_a3(&id, &phi, &psi, &tol).unwrap();
        assert!(r.passed);
        let before = r.witness["overlap_before"].as_f64().unwrap();
        assert!((r.witness["overlap_after"].as_f64().unwrap() - before).abs() < 1e-15);
        let constant: Channel = StochasticChannel::constant(&ProbVec::new(vec![0.3, 0.7]).unwrap(), 3)
            .unwrap()
            .into();
        let r = check_a3(&constant, &phi, &psi, &tol).unwrap();
        assert!(r.passed);
        assert!((r.witness["overlap_after"].as_f64().unwrap() - 1.0).abs() < 1e-15);

        let mut rng = seed::rng(5);
        for _ in 0..500 {
            let ch = Channel::sample(Backend::Classical, 3, 3, &mut rng).unwrap();
            let a = State::sample(Backend::Classical, 3, &mut rng).unwrap();
            let b = State::sample(Backend::Classical, 3, &mut rng).unwrap();
            assert!(check_a3(&ch, &a, &b, &tol).unwrap().passed);
        }
    }

    #[test]
    fn a3_requires_equality_for_unitaries() {
        let tol = Tolerances::default();
        let rho: State = quantum::random_density(2, 1).unwrap().into();
        let sigma: State = quantum::random_density(2, 2).unwrap().into();
        let u = quantum::random_cptp(2, 2, 1, 3).unwrap();
        assert!(u.is_unitary());
        let r = check_a3(&u.into(), &rho, &sigma, &tol).unwrap();
        assert!(r.passed);
        assert_eq!(r.witness["unitary"], true);
        assert!(r.worst_violation <= 0.0);
        assert!(r.worst_violation > -1e-10);
    }

    #[test]
    fn a4_examples() {
        let tol = Tolerances::default();
        let (a, a2) = (p(&[0.3, 0.7]), p(&[0.5, 0.5]));
        let (b, b2) = (p(&[0.9, 0.1]), p(&[0.4, 0.6]));
        let r = check_a4(&a.tensor(&b).unwrap(), &a2.tensor(&b2).unwrap(), &[2, 2], &tol).unwrap();
        assert!(r.passed);
        let marg: Vec<f64> = serde_json::from_value(r.witness["marginal_overlaps"].clone()).unwrap();
        let joint = r.witness["joint_overlap"].as_f64().unwrap();
        assert!((marg[0] * marg[1] - joint).abs() < 1e-12);

        // correlated copies: both marginal overlaps equal the joint overlap Σ√(pp′)
        let copies = |w: &[f64]| p(&[w[0], 0.0, 0.0, w[1]]);
        let r = check_a4(&copies(&[0.5, 0.5]), &copies(&[0.7, 0.3]), &[2, 2], &tol).unwrap();
        let expected = (0.5f64 * 0.7).sqrt() + (0.5f64 * 0.3).sqrt();
        assert!((r.witness["joint_overlap"].as_f64().unwrap() - expected).abs() < 1e-15);
        assert!(r.worst_violation.abs() < 1e-15);
        assert!(r.passed);
    }

    #[test]
    fn a4_quantum_monte_carlo() {
        let tol = Tolerances::default();
        let mut rng = seed::rng(44);
        for _ in 0..500 {
            let a = State::sample(Backend::Quantum, 4, &mut rng).unwrap();
            let b = State::sample(Backend::Quantum, 4, &mut rng).unwrap();
            assert!(check_a4(&a, &b, &[2, 2], &tol).unwrap().passed);
        }
    }

    #[test]
    fn suite_rejects_zero_trials_and_is_reproducible() {
        let cfg = SuiteConfig {
            trials: 0,
            ..SuiteConfig::default()
        };
        assert!(run_axiom_suite(&cfg).is_err());
        let cfg = SuiteConfig {
            trials: 25,
            seed: 9,
            ..SuiteConfig::default()
        };
        let a = run_axiom_suite(&cfg).unwrap();
        let b = run_axiom_suite(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        assert!(a.iter().all(|r| r.passed && r.trials == 25));
    }

    #[test]
    fn depolarizing_strictly_increases_overlap() {
        let tol = Tolerances::default();
        let phi: State = DensityMatrix::basis(2, 0).unwrap().into();
        let psi: State = DensityMatrix::maximally_mixed(2).unwrap().into();
        let dep: Channel = KrausChannel::completely_depolarizing(2).unwrap().into();
        let out = check_a3(&dep, &phi, &psi, &tol).unwrap();
        assert!(out.passed);
        assert!(out.worst_violation > 0.2);
    }
}
