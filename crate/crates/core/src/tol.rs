//! Numerical tolerances.
//!
//! Construction tolerances are fixed constants: they define what a valid state or channel is.
//! Property tolerances live in [`Tolerances`] and can be overridden per run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sum-to-one and completeness slack accepted when building states and channels.
pub const CONSTRUCTION: f64 = 1e-9;
/// Negative weights in `[-DUST, 0)` are clamped to zero.
pub const DUST: f64 = 1e-12;
/// Entrywise Hermiticity slack for density matrices.
pub const HERMITIAN: f64 = 1e-10;
/// Eigenvalues in `[-EIGEN_CLAMP, 0)` are clamped to zero.
pub const EIGEN_CLAMP: f64 = 1e-9;

/// Thresholds used by property checks and verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// State equality (L1 distance classically, trace norm quantumly).
    pub state_equality: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    /// Slack on the broadcasting inequality chain.
    pub inequality: f64,
    /// Distance below which a parent counts as unchanged by the process.
    pub parent_preserved: f64,
    /// Slack on the joint-equals-input identity when the parent is preserved.
    pub parent_equality: f64,
    /// Residual below which an outcome counts as a perfect clone.
    pub clone: f64,
    /// Operator norm below which two density matrices commute.
    pub commutator: f64,
    /// L1 residual below which a decomposition certifies separability.
    pub separable_residual: f64,
    /// Entropy slack for toy-model membership.
    pub membership: f64,
    /// Entropy slack for toy-model purity.
    pub purity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            state_equality: 1e-9,
            a1: 1e-9,
            a2: 1e-10,
            a3: 1e-8,
            a4: 1e-8,
            inequality: 1e-8,
            parent_preserved: 1e-6,
            parent_equality: 1e-6,
            clone: 1e-6,
            commutator: 1e-8,
            separable_residual: 1e-6,
            membership: 1e-12,
            purity: 1e-9,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 13] = [
        "state_equality",
        "a1",
        "a2",
        "a3",
        "a4",
        "inequality",
        "parent_preserved",
        "parent_equality",
        "clone",
        "commutator",
        "separable_residual",
        "membership",
        "purity",
    ];

    /// Overrides a single named tolerance.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance {name} must be a finite non-negative number, got {value}"
            )));
        }
        let slot = match name {
            "state_equality" => &mut self.state_equality,
            "a1" => &mut self.a1,
            "a2" => &mut self.a2,
            "a3" => &mut self.a3,
            "a4" => &mut self.a4,
            "inequality" => &mut self.inequality,
            "parent_preserved" => &mut self.parent_preserved,
            "parent_equality" => &mut self.parent_equality,
            "clone" => &mut self.clone,
            "commutator" => &mut self.commutator,
            "separable_residual" => &mut self.separable_residual,
            "membership" => &mut self.membership,
            "purity" => &mut self.purity,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown tolerance {other:?}; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_is_settable() {
        let mut t = Tolerances::default();
        for name in Tolerances::NAMES {
            t.set(name, 0.5).unwrap();
        }
        assert_eq!(t.a2, 0.5);
        assert_eq!(t.purity, 0.5);
    }

    #[test]
    fn rejects_unknown_and_negative() {
        let mut t = Tolerances::default();
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("a1", -1.0).is_err());
        assert!(t.set("a1", f64::NAN).is_err());
    }
}
