//! JSON documents for states and channels.
//!
//! States:
//!
//! ```json
//! {"kind":"prob", "dims":[2,2], "weights":[0.5,0,0,0.5]}
//! {"kind":"density", "dim":2, "re":[[1,0],[0,0]], "im":[[0,0],[0,0]]}
//! ```
//!
//! Channels use `{"kind":"stochastic", "in_dim", "out_dim", "matrix"}` with `matrix` given as
//! `out_dim` rows of `in_dim` entries, or `{"kind":"kraus", "in_dim", "out_dim", "ops"}` with
//! each operator split into `re`/`im` rows.

use serde::{Deserialize, Serialize};

use crate::classical::{JointProb, ProbVec, StochasticChannel};
use crate::error::{Error, Result};
use crate::quantum::{CMatrix, DensityMatrix, KrausChannel, C64};
use crate::state::{Channel, State};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StateDoc {
    #[serde(rename = "prob")]
    Prob { dims: Vec<usize>, weights: Vec<f64> },
    #[serde(rename = "density")]
    Density {
        dim: usize,
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    },
}

impl StateDoc {
    pub fn from_prob(p: &ProbVec) -> Self {
        StateDoc::Prob {
            dims: vec![p.dim()],
            weights: p.weights().to_vec(),
        }
    }

    pub fn from_joint(p: &JointProb) -> Self {
        StateDoc::Prob {
            dims: p.dims().to_vec(),
            weights: p.weights().to_vec(),
        }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        let (re, im) = rho.parts();
        StateDoc::Density {
            dim: rho.dim(),
            re,
            im,
        }
    }

    pub fn from_state(state: &State) -> Self {
        match state {
            State::Classical(p) => Self::from_prob(p),
            State::Quantum(rho) => Self::from_density(rho),
        }
    }

    /// Validates the document and returns the state with its subsystem dimensions.
    pub fn to_state(&self) -> Result<(State, Vec<usize>)> {
        match self {
            StateDoc::Prob { .. } => {
                let joint = self.to_joint()?;
                let dims = joint.dims().to_vec();
                Ok((joint.into(), dims))
            }
            StateDoc::Density { dim, re, im } => {
                if re.len() != *dim {
                    return Err(Error::InvalidState(format!(
                        "declared dim {dim} but matrix has {} rows",
                        re.len()
                    )));
                }
                Ok((DensityMatrix::from_parts(re, im)?.into(), vec![*dim]))
            }
        }
    }

    pub fn to_joint(&self) -> Result<JointProb> {
        match self {
            StateDoc::Prob { dims, weights } => JointProb::new(weights.clone(), dims.clone()),
            StateDoc::Density { .. } => Err(Error::BackendMismatch(
                "expected a probability distribution, found a density matrix".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixDoc {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl ComplexMatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
                .collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self, rows: usize, cols: usize) -> Result<CMatrix> {
        let shape_ok = |part: &Vec<Vec<f64>>| part.len() == rows && part.iter().all(|r| r.len() == cols);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::InvalidChannel(format!(
                "Kraus operator parts must be {rows}x{cols}"
            )));
        }
        Ok(CMatrix::from_fn(rows, cols, |r, c| {
            C64::new(self.re[r][c], self.im[r][c])
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ChannelDoc {
    #[serde(rename = "stochastic")]
    Stochastic {
        in_dim: usize,
        out_dim: usize,
        matrix: Vec<Vec<f64>>,
    },
    #[serde(rename = "kraus")]
    Kraus {
        in_dim: usize,
        out_dim: usize,
        ops: Vec<ComplexMatrixDoc>,
    },
}

impl ChannelDoc {
    pub fn from_channel(channel: &Channel) -> Self {
        match channel {
            Channel::Classical(m) => ChannelDoc::Stochastic {
                in_dim: m.in_dim(),
                out_dim: m.out_dim(),
                matrix: m.rows(),
            },
            Channel::Quantum(k) => ChannelDoc::Kraus {
                in_dim: k.in_dim(),
                out_dim: k.out_dim(),
                ops: k.ops().iter().map(ComplexMatrixDoc::from_matrix).collect(),
            },
        }
    }

    pub fn to_channel(&self) -> Result<Channel> {
        match self {
            ChannelDoc::Stochastic {
                in_dim,
                out_dim,
                matrix,
            } => {
                if matrix.len() != *out_dim || matrix.iter().any(|r| r.len() != *in_dim) {
                    return Err(Error::InvalidChannel(format!(
                        "matrix must have {out_dim} rows of {in_dim} entries"
                    )));
                }
                let flat = matrix.iter().flatten().copied().collect();
                Ok(StochasticChannel::new(*out_dim, *in_dim, flat)?.into())
            }
            ChannelDoc::Kraus {
                in_dim,
                out_dim,
                ops,
            } => {
                let ops = ops
                    .iter()
                    .map(|op| op.to_matrix(*out_dim, *in_dim))
                    .collect::<Result<Vec<_>>>()?;
                Ok(KrausChannel::new(ops)?.into())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random_cptp;
    use crate::{classical, quantum};

    #[test]
    fn state_json_uses_exact_field_names() {
        let doc = StateDoc::from_joint(&JointProb::new(vec![0.5, 0.0, 0.0, 0.5], vec![2, 2]).unwrap());
        let text = serde_json::to_string(&doc).unwrap();
        assert_eq!(text, r#"{"kind":"prob","dims":[2,2],"weights":[0.5,0.0,0.0,0.5]}"#);
        let rho = quantum::DensityMatrix::basis(2, 0).unwrap();
        let text = serde_json::to_string(&StateDoc::from_density(&rho)).unwrap();
        assert_eq!(
            text,
            r#"{"kind":"density","dim":2,"re":[[1.0,0.0],[0.0,0.0]],"im":[[0.0,0.0],[0.0,0.0]]}"#
        );
    }

    #[test]
    fn documents_round_trip() {
        let p = classical::random_state(5, 3).unwrap();
        let (back, dims) = StateDoc::from_prob(&p).to_state().unwrap();
        assert_eq!(back, State::Classical(p));
        assert_eq!(dims, vec![5]);

        let rho = quantum::random_density(3, 3).unwrap();
        let text = serde_json::to_string(&StateDoc::from_density(&rho)).unwrap();
        let doc: StateDoc = serde_json::from_str(&text).unwrap();
        let (back, _) = doc.to_state().unwrap();
        assert!(back.distance(&State::Quantum(rho)).unwrap() < 1e-14);

        for ch in [
            Channel::from(classical::random_channel(3, 2, 1).unwrap()),
            Channel::from(random_cptp(2, 3, 2, 1).unwrap()),
        ] {
            let text = serde_json::to_string(&ChannelDoc::from_channel(&ch)).unwrap();
            let doc: ChannelDoc = serde_json::from_str(&text).unwrap();
            assert!(doc.to_channel().unwrap().approx_eq(&ch, 1e-15));
        }
    }

    #[test]
    fn invalid_documents_are_rejected() {
        let bad: StateDoc =
            serde_json::from_str(r#"{"kind":"prob","dims":[2,2],"weights":[0.5,0.5]}"#).unwrap();
        assert!(matches!(bad.to_state(), Err(Error::DimensionMismatch(_))));
        let bad: ChannelDoc = serde_json::from_str(
            r#"{"kind":"stochastic","in_dim":2,"out_dim":2,"matrix":[[1.0,0.6],[0.0,0.6]]}"#,
        )
        .unwrap();
        assert!(matches!(bad.to_channel(), Err(Error::InvalidChannel(_))));
        let bad: StateDoc = serde_json::from_str(
            r#"{"kind":"density","dim":3,"re":[[1.0,0.0],[0.0,0.0]],"im":[[0.0,0.0],[0.0,0.0]]}"#,
        )
        .unwrap();
        assert!(bad.to_state().is_err());
    }
}
