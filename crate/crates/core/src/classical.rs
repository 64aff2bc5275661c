//! Finite probability distributions and stochastic channels.
//!
//! Joint distributions are stored flat in row-major order: the leftmost subsystem varies
//! slowest. The quantum backend uses the same convention for its Kronecker products.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{dim_mismatch, Error, Result};
use crate::seed;
use crate::tol::{CONSTRUCTION, DUST};

/// A probability distribution over `dim` outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVec {
    weights: Vec<f64>,
}

impl ProbVec {
    /// Validates and normalizes a weight vector.
    ///
    /// Weights in `[-1e-12, 0)` are treated as rounding dust and set to zero; the vector is then
    /// rescaled so it sums to one, provided the sum was already within `1e-9` of one.
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidState("empty weight vector".into()));
        }
        for (i, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidState(format!("weight {i} is not finite")));
            }
            if *w < -DUST {
                return Err(Error::InvalidState(format!("weight {i} is negative ({w:e})")));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > CONSTRUCTION {
            return Err(Error::InvalidState(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        if total != 1.0 {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        Ok(Self { weights })
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(Self {
            weights: vec![1.0 / dim as f64; dim],
        })
    }

    /// The deterministic distribution concentrated on `index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut weights = vec![0.0; dim];
        weights[index] = 1.0;
        Ok(Self { weights })
    }

    /// Wraps weights already known to be a valid distribution, skipping normalization.
    pub(crate) fn from_trusted(weights: Vec<f64>) -> Self {
        debug_assert!(!weights.is_empty());
        Self { weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn l1_distance(&self, other: &ProbVec) -> Result<f64> {
        check_same_dim(self, other)?;
        Ok(self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    /// Convex mixture `(1 - t) * self + t * other`.
    pub fn mix(&self, other: &ProbVec, t: f64) -> Result<ProbVec> {
        check_same_dim(self, other)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!(
                "mixing parameter {t} outside [0, 1]"
            )));
        }
        Ok(Self::from_trusted(
            self.weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        ))
    }
}

fn check_same_dim(p: &ProbVec, q: &ProbVec) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(dim_mismatch("distribution dimensions", p.dim(), q.dim()));
    }
    Ok(())
}

/// A distribution over a composite system, flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointProb {
    probs: ProbVec,
    dims: Vec<usize>,
}

impl JointProb {
    pub fn new(weights: Vec<f64>, dims: Vec<usize>) -> Result<Self> {
        Self::from_prob(ProbVec::new(weights)?, dims)
    }

    /// Reinterprets a flat distribution as a joint one with the given subsystem dimensions.
    pub fn from_prob(probs: ProbVec, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, probs.dim())?;
        Ok(Self { probs, dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn weights(&self) -> &[f64] {
        self.probs.weights()
    }

    pub fn as_prob(&self) -> &ProbVec {
        &self.probs
    }

    pub fn into_prob(self) -> ProbVec {
        self.probs
    }

    pub fn subsystems(&self) -> usize {
        self.dims.len()
    }

    /// The weight at a multi-index.
    pub fn get(&self, index: &[usize]) -> f64 {
        self.probs.weights[flat_index(&self.dims, index)]
    }

    /// Reduced distribution of a single subsystem.
    pub fn marginal(&self, keep: usize) -> Result<ProbVec> {
        Ok(self.reduce(&[keep])?.into_prob())
    }

    /// Reduced distribution of the listed subsystems, kept in the listed order.
    pub fn reduce(&self, keep: &[usize]) -> Result<JointProb> {
        let kept_dims = check_keep(&self.dims, keep)?;
        let total: usize = kept_dims.iter().product();
        let mut out = vec![0.0; total];
        let mut digits = vec![0usize; self.dims.len()];
        for &w in self.probs.weights() {
            let mut target = 0;
            for &k in keep {
                target = target * self.dims[k] + digits[k];
            }
            out[target] += w;
            increment(&mut digits, &self.dims);
        }
        Ok(Self {
            probs: ProbVec::from_trusted(out),
            dims: kept_dims,
        })
    }
}

impl From<ProbVec> for JointProb {
    fn from(p: ProbVec) -> Self {
        let dims = vec![p.dim()];
        Self { probs: p, dims }
    }
}

pub(crate) fn check_dims(dims: &[usize], total: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "subsystem dimensions must be non-empty and positive, got {dims:?}"
        )));
    }
    let product = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::InvalidArgument("subsystem dimensions overflow".into()))?;
    if product != total {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimensions {dims:?} multiply to {product}, state has dimension {total}"
        )));
    }
    Ok(())
}

/// Validates a list of kept subsystems and returns their dimensions.
pub(crate) fn check_keep(dims: &[usize], keep: &[usize]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("no subsystem kept".into()));
    }
    let mut seen = vec![false; dims.len()];
    let mut out = Vec::with_capacity(keep.len());
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::InvalidArgument(format!(
                "subsystem index {k} out of range for {} subsystems",
                dims.len()
            )));
        }
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidArgument(format!("subsystem {k} kept twice")));
        }
        out.push(dims[k]);
    }
    Ok(out)
}

/// Advances a row-major multi-index (last digit fastest).
pub(crate) fn increment(digits: &mut [usize], dims: &[usize]) {
    for pos in (0..dims.len()).rev() {
        digits[pos] += 1;
        if digits[pos] < dims[pos] {
            return;
        }
        digits[pos] = 0;
    }
}

pub(crate) fn flat_index(dims: &[usize], index: &[usize]) -> usize {
    index
        .iter()
        .zip(dims)
        .fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Bhattacharyya coefficient `sum_i sqrt(p_i q_i)`, clamped to `[0, 1]`.
pub fn bhattacharyya(p: &ProbVec, q: &ProbVec) -> Result<f64> {
    check_same_dim(p, q)?;
    let s: f64 = p
        .weights
        .iter()
        .zip(&q.weights)
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    Ok(s.clamp(0.0, 1.0))
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &ProbVec) -> f64 {
    entropy_of(p.weights())
}

pub(crate) fn entropy_of(weights: &[f64]) -> f64 {
    -weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * w.ln())
        .sum::<f64>()
}

/// Product distribution `p ⊗ q` with dims `[p.dim, q.dim]`.
pub fn tensor(p: &ProbVec, q: &ProbVec) -> JointProb {
    let mut weights = Vec::with_capacity(p.dim() * q.dim());
    for &a in p.weights() {
        weights.extend(q.weights().iter().map(|&b| a * b));
    }
    JointProb {
        probs: ProbVec::from_trusted(weights),
        dims: vec![p.dim(), q.dim()],
    }
}

/// Product of two joint distributions; subsystem lists are concatenated.
pub fn tensor_joint(p: &JointProb, q: &JointProb) -> JointProb {
    let flat = tensor(p.as_prob(), q.as_prob());
    let mut dims = p.dims.clone();
    dims.extend_from_slice(&q.dims);
    JointProb {
        probs: flat.probs,
        dims,
    }
}

pub fn marginal(joint: &JointProb, keep: usize) -> Result<ProbVec> {
    joint.marginal(keep)
}

/// A column-stochastic matrix mapping distributions on `in_dim` outcomes to `out_dim` outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticChannel {
    /// Row-major `out_dim x in_dim`.
    matrix: Vec<f64>,
    in_dim: usize,
    out_dim: usize,
}

impl StochasticChannel {
    /// Builds a channel from row-major entries; every column must be a distribution.
    pub fn new(out_dim: usize, in_dim: usize, matrix: Vec<f64>) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidChannel("dimensions must be positive".into()));
        }
        if matrix.len() != in_dim * out_dim {
            return Err(Error::InvalidChannel(format!(
                "expected {} entries for a {out_dim}x{in_dim} matrix, got {}",
                in_dim * out_dim,
                matrix.len()
            )));
        }
        let mut columns = Vec::with_capacity(in_dim);
        for j in 0..in_dim {
            let col: Vec<f64> = (0..out_dim).map(|i| matrix[i * in_dim + j]).collect();
            let col = ProbVec::new(col)
                .map_err(|e| Error::InvalidChannel(format!("column {j}: {e}")))?;
            columns.push(col);
        }
        Ok(Self::from_valid_columns(&columns))
    }

    /// Builds a channel whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[ProbVec]) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::InvalidChannel("no columns".into()));
        };
        if let Some(bad) = columns.iter().find(|c| c.dim() != first.dim()) {
            return Err(dim_mismatch("column lengths", first.dim(), bad.dim()));
        }
        Ok(Self::from_valid_columns(columns))
    }

    fn from_valid_columns(columns: &[ProbVec]) -> Self {
        let in_dim = columns.len();
        let out_dim = columns[0].dim();
        let mut matrix = vec![0.0; in_dim * out_dim];
        for (j, col) in columns.iter().enumerate() {
            for (i, &w) in col.weights().iter().enumerate() {
                matrix[i * in_dim + j] = w;
            }
        }
        Self {
            matrix,
            in_dim,
            out_dim,
        }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let cols = (0..dim)
            .map(|i| ProbVec::basis(dim, i))
            .collect::<Result<Vec<_>>>()?;
        Self::from_columns(&cols)
    }

    /// The channel that outputs `state` whatever its input.
    pub fn constant(state: &ProbVec, in_dim: usize) -> Result<Self> {
        if in_dim == 0 {
            return Err(Error::InvalidChannel("input dimension must be positive".into()));
        }
        Self::from_columns(&vec![state.clone(); in_dim])
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.in_dim + col]
    }

    pub fn column(&self, col: usize) -> ProbVec {
        ProbVec::from_trusted((0..self.out_dim).map(|i| self.entry(i, col)).collect())
    }

    /// Rows of the matrix, for serialization.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.chunks(self.in_dim).map(<[f64]>::to_vec).collect()
    }

    pub fn apply(&self, p: &ProbVec) -> Result<ProbVec> {
        if p.dim() != self.in_dim {
            return Err(dim_mismatch("channel input vs state", self.in_dim, p.dim()));
        }
        let out = self
            .matrix
            .chunks(self.in_dim)
            .map(|row| row.iter().zip(p.weights()).map(|(m, w)| m * w).sum())
            .collect();
        // Columns sum to one, so the output does too up to rounding.
        ProbVec::new(out).map_err(|e| Error::Numerical(format!("channel output: {e}")))
    }

    /// Parallel composition `self ⊗ other`.
    pub fn kron(&self, other: &StochasticChannel) -> StochasticChannel {
        let in_dim = self.in_dim * other.in_dim;
        let out_dim = self.out_dim * other.out_dim;
        let mut matrix = vec![0.0; in_dim * out_dim];
        for i1 in 0..self.out_dim {
            for i2 in 0..other.out_dim {
                let row = i1 * other.out_dim + i2;
                for j1 in 0..self.in_dim {
                    let a = self.entry(i1, j1);
                    if a == 0.0 {
                        continue;
                    }
                    for j2 in 0..other.in_dim {
                        let col = j1 * other.in_dim + j2;
                        matrix[row * in_dim + col] = a * other.entry(i2, j2);
                    }
                }
            }
        }
        StochasticChannel {
            matrix,
            in_dim,
            out_dim,
        }
    }

    /// Sequential composition: apply `self`, then `next`.
    pub fn then(&self, next: &StochasticChannel) -> Result<StochasticChannel> {
        if next.in_dim != self.out_dim {
            return Err(dim_mismatch("composed channel dimensions", self.out_dim, next.in_dim));
        }
        let cols = (0..self.in_dim)
            .map(|j| next.apply(&self.column(j)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_columns(&cols)
    }

    pub fn max_abs_diff(&self, other: &StochasticChannel) -> Option<f64> {
        if self.in_dim != other.in_dim || self.out_dim != other.out_dim {
            return None;
        }
        Some(
            self.matrix
                .iter()
                .zip(&other.matrix)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

pub fn apply_channel(channel: &StochasticChannel, p: &ProbVec) -> Result<ProbVec> {
    channel.apply(p)
}

/// Draws from the flat Dirichlet distribution on the `dim`-simplex.
pub fn sample_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ProbVec> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut w: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(ProbVec::from_trusted(w))
}

/// Draws a channel whose columns are independent flat Dirichlet samples.
pub fn sample_channel<R: Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    rng: &mut R,
) -> Result<StochasticChannel> {
    if in_dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let cols = (0..in_dim)
        .map(|_| sample_state(out_dim, rng))
        .collect::<Result<Vec<_>>>()?;
    StochasticChannel::from_columns(&cols)
}

pub fn random_state(dim: usize, seed: u64) -> Result<ProbVec> {
    sample_state(dim, &mut seed::rng(seed))
}

pub fn random_channel(in_dim: usize, out_dim: usize, seed: u64) -> Result<StochasticChannel> {
    sample_channel(in_dim, out_dim, &mut seed::rng(seed))
}
