//! Density matrices, Uhlmann fidelity, partial traces and Kraus channels.
//!
//! Matrix functions (square roots, norms) go through a Hermitian eigendecomposition with
//! eigenvalues in `[-1e-9, 0)` clamped to zero. Dimensions are desk-scale: at most 64 per
//! subsystem and 4096 in total.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::classical::{check_dims, check_keep, increment, ProbVec, StochasticChannel};
use crate::error::{dim_mismatch, Error, Result};
use crate::seed;
use crate::tol::{CONSTRUCTION, EIGEN_CLAMP, HERMITIAN};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const MAX_TOTAL_DIM: usize = 4096;
pub const MAX_SUBSYSTEM_DIM: usize = 64;

const EIGEN_MAX_ITER: usize = 100_000;

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(DVector<f64>, CMatrix)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER).ok_or_else(|| {
        Error::Numerical(format!(
            "Hermitian eigendecomposition did not converge (dim {n}, Frobenius norm {:.3e})",
            m.norm()
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn from_spectrum(values: &[f64], vectors: &CMatrix) -> CMatrix {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (c, &v) in values.iter().enumerate() {
        for r in 0..n {
            scaled[(r, c)] *= v;
        }
    }
    &scaled * vectors.adjoint()
}

/// Square root of a positive semi-definite matrix, clamping small negative eigenvalues.
fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(m)?;
    let roots: Vec<f64> = values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    Ok(from_spectrum(&roots, &vectors))
}

/// A Hermitian, positive semi-definite, unit-trace complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        let n = mat.nrows();
        if n == 0 || mat.ncols() != n {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and non-empty, got {}x{}",
                n,
                mat.ncols()
            )));
        }
        if n > MAX_TOTAL_DIM {
            return Err(Error::InvalidState(format!(
                "dimension {n} exceeds the supported maximum {MAX_TOTAL_DIM}"
            )));
        }
        if mat.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let mut asym = 0.0f64;
        for r in 0..n {
            for c in r..n {
                asym = asym.max((mat[(r, c)] - mat[(c, r)].conj()).norm());
            }
        }
        if asym > HERMITIAN {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max asymmetry {asym:.3e})"
            )));
        }
        let mut mat = hermitize(&mat);
        let trace = mat.trace().re;
        if (trace - 1.0).abs() > CONSTRUCTION {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let (values, vectors) = hermitian_eigen(&mat)?;
        let min = values[0];
        if min < -EIGEN_CLAMP {
            return Err(Error::InvalidState(format!(
                "not positive semi-definite (min eigenvalue {min:.3e})"
            )));
        }
        if min < 0.0 {
            let clamped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
            mat = hermitize(&from_spectrum(&clamped, &vectors));
        }
        let trace = mat.trace().re;
        if trace != 1.0 {
            mat.unscale_mut(trace);
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix produced from valid states by trace- and positivity-preserving algebra.
    pub(crate) fn from_trusted(mat: CMatrix) -> Self {
        Self {
            mat: hermitize(&mat),
        }
    }

    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if im.len() != n || re.iter().chain(im).any(|row| row.len() != n) {
            return Err(Error::InvalidState(format!(
                "real and imaginary parts must both be {n}x{n}"
            )));
        }
        Self::new(CMatrix::from_fn(n, n, |r, c| C64::new(re[r][c], im[r][c])))
    }

    /// `|ψ⟩⟨ψ|` for a (normalized on construction) state vector.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if ket.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("state vector must be non-zero".into()));
        }
        let v = DVector::from_iterator(ket.len(), ket.iter().map(|z| z / norm));
        Ok(Self::from_trusted(&v * v.adjoint()))
    }

    /// The computational basis projector `|index⟩⟨index|`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        Ok(diag(&ProbVec::basis(dim, index)?))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Ok(diag(&ProbVec::uniform(dim)?))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Split into real and imaginary parts, row by row.
    pub fn parts(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n = self.dim();
        let re = (0..n)
            .map(|r| (0..n).map(|c| self.mat[(r, c)].re).collect())
            .collect();
        let im = (0..n)
            .map(|r| (0..n).map(|c| self.mat[(r, c)].im).collect())
            .collect();
        (re, im)
    }

    /// Eigenvalues, ascending, with negative dust clamped.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (values, _) = hermitian_eigen(&self.mat)?;
        Ok(values.iter().map(|&v| v.max(0.0)).collect())
    }

    /// Trace norm `‖self − other‖₁`.
    pub fn trace_norm_distance(&self, other: &DensityMatrix) -> Result<f64> {
        check_same_dim(self, other)?;
        let (values, _) = hermitian_eigen(&hermitize(&(&self.mat - &other.mat)))?;
        Ok(values.iter().map(|v| v.abs()).sum())
    }
}

fn check_same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(dim_mismatch("density matrix dimensions", a.dim(), b.dim()));
    }
    Ok(())
}

fn diag(p: &ProbVec) -> DensityMatrix {
    let n = p.dim();
    DensityMatrix {
        mat: CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                C64::new(p.weights()[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }),
    }
}

/// Uhlmann fidelity `Tr √(√ρ σ √ρ)`, clamped to `[0, 1]`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let root = psd_sqrt(&rho.mat)?;
    let inner = hermitize(&(&root * &sigma.mat * &root));
    let (values, _) = hermitian_eigen(&inner)?;
    let f: f64 = values.iter().map(|&v| v.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    let n = u.nrows();
    if u.ncols() != n {
        return false;
    }
    (u.adjoint() * u - CMatrix::identity(n, n)).norm() <= tol
}

/// `U diag(p) U†`, or `diag(p)` when no basis is given.
pub fn diag_embed(p: &ProbVec, basis: Option<&CMatrix>) -> Result<DensityMatrix> {
    let d = diag(p);
    let Some(u) = basis else {
        return Ok(d);
    };
    if u.nrows() != p.dim() {
        return Err(dim_mismatch("basis vs distribution", u.nrows(), p.dim()));
    }
    if !is_unitary(u, CONSTRUCTION) {
        return Err(Error::InvalidArgument("basis is not unitary".into()));
    }
    Ok(DensityMatrix::from_trusted(u * d.mat * u.adjoint()))
}

/// Kronecker product `ρ ⊗ σ`.
pub fn tensor(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DensityMatrix> {
    let dim = rho.dim() * sigma.dim();
    if dim > MAX_TOTAL_DIM {
        return Err(Error::DimensionMismatch(format!(
            "product dimension {dim} exceeds the supported maximum {MAX_TOTAL_DIM}"
        )));
    }
    Ok(DensityMatrix {
        mat: rho.mat.kronecker(&sigma.mat),
    })
}

/// Reduced state on the `keep` subsystems (in the listed order).
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    check_dims(dims, rho.dim())?;
    if let Some(&big) = dims.iter().find(|&&d| d > MAX_SUBSYSTEM_DIM) {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimension {big} exceeds the supported maximum {MAX_SUBSYSTEM_DIM}"
        )));
    }
    let kept_dims = check_keep(dims, keep)?;
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let out_dim: usize = kept_dims.iter().product();
    let env_dim: usize = traced.iter().map(|&i| dims[i]).product();

    // Full index of (kept digits, traced digits).
    let n = dims.len();
    let mut full_index = vec![0usize; out_dim * env_dim];
    let mut digits = vec![0usize; n];
    for _ in 0..rho.dim() {
        let kept = keep.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
        let env = traced.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
        let flat = digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x);
        full_index[kept * env_dim + env] = flat;
        increment(&mut digits, dims);
    }

    let mut out = CMatrix::zeros(out_dim, out_dim);
    for r in 0..out_dim {
        for c in 0..out_dim {
            let mut acc = C64::new(0.0, 0.0);
            for e in 0..env_dim {
                acc += rho.mat[(full_index[r * env_dim + e], full_index[c * env_dim + e])];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// A completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
    in_dim: usize,
    out_dim: usize,
}

impl KrausChannel {
    /// Validates completeness `Σ K†K = I` to `1e-9` in Frobenius norm.
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        };
        let (out_dim, in_dim) = first.shape();
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidChannel("Kraus operators must be non-empty".into()));
        }
        if let Some(bad) = ops.iter().find(|k| k.shape() != (out_dim, in_dim)) {
            return Err(Error::InvalidChannel(format!(
                "Kraus operator shapes differ: {out_dim}x{in_dim} vs {}x{}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        let defect = completeness_defect(&ops, in_dim);
        if !(defect <= CONSTRUCTION) {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators are not complete (‖Σ K†K − I‖ = {defect:.3e})"
            )));
        }
        Ok(Self {
            ops,
            in_dim,
            out_dim,
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(vec![CMatrix::identity(dim, dim)])
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        if !is_unitary(&u, CONSTRUCTION) {
            return Err(Error::InvalidChannel("operator is not unitary".into()));
        }
        Self::new(vec![u])
    }

    /// The channel sending every input to `I/dim`.
    pub fn completely_depolarizing(dim: usize) -> Result<Self> {
        let scale = 1.0 / (dim as f64).sqrt();
        let mut ops = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut k = CMatrix::zeros(dim, dim);
                k[(i, j)] = C64::new(scale, 0.0);
                ops.push(k);
            }
        }
        Self::new(ops)
    }

    /// Kraus form of a classical channel acting on diagonal states: `K_ij = √M_ij |i⟩⟨j|`.
    pub fn from_stochastic(m: &StochasticChannel) -> Result<Self> {
        let mut ops = Vec::new();
        for i in 0..m.out_dim() {
            for j in 0..m.in_dim() {
                let w = m.entry(i, j);
                if w > 0.0 {
                    let mut k = CMatrix::zeros(m.out_dim(), m.in_dim());
                    k[(i, j)] = C64::new(w.sqrt(), 0.0);
                    ops.push(k);
                }
            }
        }
        Self::new(ops)
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// True for a single square unitary Kraus operator (closed-system dynamics).
    pub fn is_unitary(&self) -> bool {
        self.ops.len() == 1 && is_unitary(&self.ops[0], CONSTRUCTION)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.in_dim {
            return Err(dim_mismatch("channel input vs state", self.in_dim, rho.dim()));
        }
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.ops {
            out += k * &rho.mat * k.adjoint();
        }
        Ok(DensityMatrix::from_trusted(out))
    }

    /// Parallel composition `self ⊗ other`.
    pub fn kron(&self, other: &KrausChannel) -> Result<KrausChannel> {
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for a in &self.ops {
            for b in &other.ops {
                ops.push(a.kronecker(b));
            }
        }
        Self::new(ops)
    }

    pub fn completeness_defect(&self) -> f64 {
        completeness_defect(&self.ops, self.in_dim)
    }
}

fn completeness_defect(ops: &[CMatrix], in_dim: usize) -> f64 {
    let mut sum = CMatrix::zeros(in_dim, in_dim);
    for k in ops {
        sum += k.adjoint() * k;
    }
    (sum - CMatrix::identity(in_dim, in_dim)).norm()
}

pub fn apply_kraus(channel: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    channel.apply(rho)
}

/// Operator norm of `[a, b]`.
pub fn commutator_norm(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    let c = &a.mat * &b.mat - &b.mat * &a.mat;
    // [a, b] is anti-Hermitian, so i[a, b] is Hermitian with the same singular values.
    let h = hermitize(&c.map(|z| z * C64::i()));
    let (values, _) = hermitian_eigen(&h)?;
    Ok(values.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
}

/// Largest pairwise commutator norm in a family.
pub fn max_commutator_norm(states: &[DensityMatrix]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            worst = worst.max(commutator_norm(a, b)?);
        }
    }
    Ok(worst)
}

pub fn commute_check(states: &[DensityMatrix], tol: f64) -> Result<bool> {
    Ok(max_commutator_norm(states)? <= tol)
}

const CLUSTER_TOL: f64 = 1e-7;
const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Finds a common eigenbasis for a commuting family.
///
/// Returns the unitary whose columns are the shared eigenvectors and, for each state, its
/// eigenvalue distribution in that basis.
pub fn simultaneous_diagonalization(
    states: &[DensityMatrix],
    tol: f64,
) -> Result<(CMatrix, Vec<ProbVec>)> {
    let Some(first) = states.first() else {
        return Err(Error::InvalidArgument("empty family".into()));
    };
    let n = first.dim();
    if let Some(bad) = states.iter().find(|s| s.dim() != n) {
        return Err(dim_mismatch("family dimensions", n, bad.dim()));
    }
    let norm = max_commutator_norm(states)?;
    if norm > tol {
        return Err(Error::NonCommuting { norm });
    }

    // A generic real combination splits every joint eigenspace the family distinguishes.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_d1a6);
    let mut combo = CMatrix::zeros(n, n);
    for s in states {
        combo += s.mat.scale(rng.random_range(1.0..2.0));
    }
    let (values, vectors) = hermitian_eigen(&hermitize(&combo))?;
    let mut blocks = split_by_clusters(values.as_slice(), &vectors);

    // Accidental near-degeneracies of the combination are resolved state by state.
    for s in states {
        let mut refined = Vec::with_capacity(blocks.len());
        for block in blocks {
            if block.ncols() == 1 {
                refined.push(block);
                continue;
            }
            let restricted = hermitize(&(block.adjoint() * &s.mat * &block));
            let (vals, vecs) = hermitian_eigen(&restricted)?;
            let rotated = &block * vecs;
            refined.extend(split_by_clusters(vals.as_slice(), &rotated));
        }
        blocks = refined;
    }

    let mut basis = CMatrix::zeros(n, n);
    let mut col = 0;
    for block in &blocks {
        for c in 0..block.ncols() {
            basis.set_column(col, &block.column(c));
            col += 1;
        }
    }

    let mut spectra = Vec::with_capacity(states.len());
    for s in states {
        let d = basis.adjoint() * &s.mat * &basis;
        let w: Vec<f64> = (0..n).map(|i| d[(i, i)].re.max(0.0)).collect();
        let total: f64 = w.iter().sum();
        let p = ProbVec::new(w.iter().map(|x| x / total).collect())?;
        let rebuilt = &basis * diag(&p).mat * basis.adjoint();
        let err = (&rebuilt - &s.mat).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if err > RECONSTRUCTION_TOL {
            return Err(Error::Numerical(format!(
                "simultaneous diagonalization reconstruction error {err:.3e}"
            )));
        }
        spectra.push(p);
    }
    Ok((basis, spectra))
}

/// Groups eigenvector columns whose (ascending) eigenvalues lie within `CLUSTER_TOL`.
fn split_by_clusters(values: &[f64], vectors: &CMatrix) -> Vec<CMatrix> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > CLUSTER_TOL {
            out.push(vectors.columns(start, i - start).into_owned());
            start = i;
        }
    }
    out
}

fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * scale, im * scale)
    })
}

/// `GG†/Tr(GG†)` for a complex Gaussian `G`.
pub fn sample_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix> {
    if dim == 0 || dim > MAX_TOTAL_DIM {
        return Err(Error::InvalidArgument(format!("unsupported dimension {dim}")));
    }
    let g = complex_gaussian(dim, dim, rng);
    let mut m = &g * g.adjoint();
    let trace = m.trace().re;
    m.unscale_mut(trace);
    Ok(DensityMatrix::from_trusted(m))
}

/// Random channel from a Gaussian isometry `in_dim → out_dim ⊗ env_dim`, sliced into
/// `env_dim` Kraus operators.
pub fn sample_cptp<R: Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    env_dim: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    if in_dim == 0 || out_dim == 0 || env_dim == 0 {
        return Err(Error::InvalidArgument("dimensions must be at least 1".into()));
    }
    if out_dim * env_dim < in_dim {
        return Err(Error::InvalidArgument(format!(
            "an isometry needs out_dim·env_dim ≥ in_dim ({out_dim}·{env_dim} < {in_dim})"
        )));
    }
    let g = complex_gaussian(out_dim * env_dim, in_dim, rng);
    isometry_channel(g, out_dim, env_dim)
}

/// Orthonormalizes the columns of `g` and slices the resulting isometry into Kraus operators.
pub fn isometry_channel(g: CMatrix, out_dim: usize, env_dim: usize) -> Result<KrausChannel> {
    if g.nrows() != out_dim * env_dim || g.ncols() > g.nrows() {
        return Err(Error::InvalidArgument(format!(
            "cannot build an isometry from a {}x{} matrix",
            g.nrows(),
            g.ncols()
        )));
    }
    let q = g.qr().q();
    let ops = (0..env_dim)
        .map(|k| q.rows(k * out_dim, out_dim).into_owned())
        .collect();
    KrausChannel::new(ops)
}

pub fn random_density(dim: usize, seed: u64) -> Result<DensityMatrix> {
    sample_density(dim, &mut seed::rng(seed))
}

pub fn random_cptp(in_dim: usize, out_dim: usize, env_dim: usize, seed: u64) -> Result<KrausChannel> {
    sample_cptp(in_dim, out_dim, env_dim, &mut seed::rng(seed))
}
