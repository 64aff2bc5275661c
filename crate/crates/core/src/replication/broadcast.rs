use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{Channel, State};
use crate::tol::Tolerances;

/// Channel `T` together with the environment state `ω` it starts from.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastSetup {
    channel: Channel,
    env: State,
    system_dim: usize,
    remainder_dim: usize,
}

impl BroadcastSetup {
    /// `channel` maps `d·e` to `d·d·r`, where `e` is the dimension of `env`.
    pub fn new(channel: Channel, env: State, system_dim: usize, remainder_dim: usize) -> Result<Self> {
        if channel.backend() != env.backend() {
            return Err(Error::BackendMismatch(format!(
                "channel is {} but environment is {}",
                channel.backend(),
                env.backend()
            )));
        }
        if system_dim == 0 || remainder_dim == 0 {
            return Err(Error::InvalidArgument(
                "system and remainder dimensions must be at least 1".into(),
            ));
        }
        let e = env.dim();
        if channel.in_dim() != system_dim * e {
            return Err(Error::DimensionMismatch(format!(
                "channel input dim {} != system {system_dim} x environment {e}",
                channel.in_dim()
            )));
        }
        let out = system_dim * system_dim * remainder_dim;
        if channel.out_dim() != out {
            return Err(Error::DimensionMismatch(format!(
                "channel output dim {} != {system_dim}x{system_dim}x{remainder_dim}",
                channel.out_dim()
            )));
        }
        Ok(Self {
            channel,
            env,
            system_dim,
            remainder_dim,
        })
    }

    /// Wraps a parent-to-pair channel (`d → d·d`) so the environment passes through untouched as
    /// the remainder.
    pub fn passive_env(pair_channel: &Channel, env: State) -> Result<Self> {
        let d2 = pair_channel.out_dim();
        let d = pair_channel.in_dim();
        if d * d != d2 {
            return Err(Error::DimensionMismatch(format!(
                "pair channel must map d to d*d, got {d} -> {d2}"
            )));
        }
        let e = env.dim();
        let channel = super::channels::with_passive_env(pair_channel, e)?;
        Self::new(channel, env, d, e)
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn env(&self) -> &State {
        &self.env
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn env_dim(&self) -> usize {
        self.env.dim()
    }

    pub fn remainder_dim(&self) -> usize {
        self.remainder_dim
    }

    /// `[d, d, r]`.
    pub fn output_dims(&self) -> [usize; 3] {
        [self.system_dim, self.system_dim, self.remainder_dim]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastOutcome {
    /// Full output on parent ⊗ offspring ⊗ remainder.
    pub output: State,
    /// Parent–offspring joint state `Φ`.
    pub joint: State,
    pub parent: State,
    pub offspring: State,
    /// Environment remainder `σ`.
    pub remainder: State,
}

pub fn broadcast(setup: &BroadcastSetup, phi: &State) -> Result<BroadcastOutcome> {
    if phi.dim() != setup.system_dim {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} != system dim {}",
            phi.dim(),
            setup.system_dim
        )));
    }
    let input = phi.tensor(&setup.env)?;
    let output = setup.channel.apply(&input)?;
    let dims = setup.output_dims();
    let joint = output.reduce(&dims, &[0, 1])?;
    let pair = [setup.system_dim, setup.system_dim];
    let parent = joint.marginal(&pair, 0)?;
    let offspring = joint.marginal(&pair, 1)?;
    let remainder = output.reduce(&dims, &[2])?;
    Ok(BroadcastOutcome {
        output,
        joint,
        parent,
        offspring,
        remainder,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

/// One link `lhs ≤ rhs` (or `lhs = rhs`) of the no-cloning chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainLink {
    pub name: &'static str,
    pub equality: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub status: CheckStatus,
}

impl ChainLink {
    fn new(name: &'static str, equality: bool, lhs: f64, rhs: f64, applicable: bool, tol: f64) -> Self {
        let holds = if equality {
            (lhs - rhs).abs() <= tol
        } else {
            lhs <= rhs + tol
        };
        let status = match (applicable, holds) {
            (false, _) => CheckStatus::NotApplicable,
            (true, true) => CheckStatus::Pass,
            (true, false) => CheckStatus::Fail,
        };
        Self {
            name,
            equality,
            lhs,
            rhs,
            status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloneVerdict {
    pub input_overlap: f64,
    /// Trace-norm (L1) distance of each output from `φ ⊗ φ ⊗ σ`.
    pub clone_residuals: [f64; 2],
    pub cloned: [bool; 2],
    /// `None` unless both states cloned.
    pub dichotomy_holds: Option<bool>,
    pub chain: Vec<ChainLink>,
    pub passed: bool,
}

/// Tests whether the setup clones `φ` and `φ′` and walks the no-cloning inequality chain
/// `(φ|φ′) ≤ (Φ|Φ′)(σ|σ′) ≤ (φ|φ′)²`.
///
/// Links that only hold for an actual clone are reported as not applicable otherwise.
pub fn verify_wigner_clone(setup: &BroadcastSetup, phi: &State, phi_prime: &State, tol: f64) -> Result<CloneVerdict> {
    let a = broadcast(setup, phi)?;
    let b = broadcast(setup, phi_prime)?;
    let residual = |s: &State, out: &BroadcastOutcome| -> Result<f64> {
        let target = s.tensor(s)?.tensor(&out.remainder)?;
        out.output.distance(&target)
    };
    let clone_residuals = [residual(phi, &a)?, residual(phi_prime, &b)?];
    let cloned = clone_residuals.map(|r| r <= tol);
    let both = cloned[0] && cloned[1];

    let x = phi.overlap(phi_prime)?;
    let before = phi.tensor(&setup.env)?.overlap(&phi_prime.tensor(&setup.env)?)?;
    let after = a.output.overlap(&b.output)?;
    let joint = a.joint.overlap(&b.joint)?;
    let sigma = a.remainder.overlap(&b.remainder)?;

    let chain = vec![
        ChainLink::new("env_factor", true, x, before, true, tol),
        ChainLink::new("monotone_under_channel", false, before, after, true, tol),
        ChainLink::new("output_factorizes", true, after, joint * sigma, both, tol),
        ChainLink::new("joint_is_square", true, joint * sigma, x * x * sigma, both, tol),
        ChainLink::new("remainder_bounded", false, x * x * sigma, x * x, true, tol),
    ];
    let dichotomy_holds = both.then_some(x >= 1.0 - tol || x <= tol);
    let passed = chain.iter().all(|l| l.status != CheckStatus::Fail) && dichotomy_holds != Some(false);
    Ok(CloneVerdict {
        input_overlap: x,
        clone_residuals,
        cloned,
        dichotomy_holds,
        chain,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs` for inequalities, `−|lhs − rhs|` for equalities.
    pub margin: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
}

impl InequalityCheck {
    fn ge(name: &'static str, lhs: f64, rhs: f64, tol: f64, applicable: bool) -> Self {
        Self::finish(name, lhs, rhs, lhs - rhs, tol, applicable)
    }

    fn eq(name: &'static str, lhs: f64, rhs: f64, tol: f64, applicable: bool) -> Self {
        Self::finish(name, lhs, rhs, -(lhs - rhs).abs(), tol, applicable)
    }

    fn finish(name: &'static str, lhs: f64, rhs: f64, margin: f64, tol: f64, applicable: bool) -> Self {
        let status = if !applicable {
            CheckStatus::NotApplicable
        } else if margin >= -tol {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            name,
            lhs,
            rhs,
            margin,
            tolerance: tol,
            status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BroadcastVerdict {
    /// Same channel and same environment state in both setups.
    pub homogeneous: bool,
    pub parent_preserved: bool,
    pub input_overlap: f64,
    pub joint_overlap: f64,
    pub parent_overlap: f64,
    pub offspring_overlap: f64,
    pub remainder_overlap: f64,
    pub checks: Vec<InequalityCheck>,
    pub passed: bool,
}

/// Checks the overlap inequalities that follow from monotonicity when `φ` and `φ′` are
/// broadcast with a shared environment, plus the equality that holds when the parent is left
/// unchanged.
pub fn verify_broadcast_inequalities(
    setup_a: &BroadcastSetup,
    phi: &State,
    setup_b: &BroadcastSetup,
    phi_prime: &State,
    tol: &Tolerances,
) -> Result<BroadcastVerdict> {
    if setup_a.output_dims() != setup_b.output_dims() || setup_a.env_dim() != setup_b.env_dim() {
        return Err(Error::DimensionMismatch(format!(
            "setups have output dims {:?} and {:?}",
            setup_a.output_dims(),
            setup_b.output_dims()
        )));
    }
    let a = broadcast(setup_a, phi)?;
    let b = broadcast(setup_b, phi_prime)?;
    let homogeneous = setup_a.channel.approx_eq(&setup_b.channel, 1e-12)
        && setup_a.env.distance(&setup_b.env)? <= tol.state_equality;
    let parent_preserved = a.parent.distance(phi)? <= tol.parent_preserved
        && b.parent.distance(phi_prime)? <= tol.parent_preserved;

    let input = phi.overlap(phi_prime)?;
    let joint = a.joint.overlap(&b.joint)?;
    let parent = a.parent.overlap(&b.parent)?;
    let offspring = a.offspring.overlap(&b.offspring)?;
    let remainder = a.remainder.overlap(&b.remainder)?;

    let ineq = tol.inequality;
    let par = homogeneous && parent_preserved;
    let checks = vec![
        InequalityCheck::ge("parent_ge_joint", parent, joint, ineq, homogeneous),
        InequalityCheck::ge("offspring_ge_joint", offspring, joint, ineq, homogeneous),
        InequalityCheck::ge("joint_ge_input", joint, input, ineq, homogeneous),
        InequalityCheck::ge("offspring_ge_input", offspring, input, ineq, par),
        InequalityCheck::eq("joint_eq_input", joint, input, tol.parent_equality, par),
    ];
    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    Ok(BroadcastVerdict {
        homogeneous,
        parent_preserved,
        input_overlap: input,
        joint_overlap: joint,
        parent_overlap: parent,
        offspring_overlap: offspring,
        remainder_overlap: remainder,
        checks,
        passed,
    })
}
