//! Heuristic search for a decomposition `P ≈ Σ_j λ_j a_j ⊗ b_j` with every factor obeying the
//! entropy floor.
//!
//! Each restart first runs alternating nonnegative updates (one factor at a time, followed by
//! a mix toward uniform until the floor holds), then polishes with Levenberg–Marquardt on an
//! unconstrained parameterization in which the floor is built in: `λ = softmax(θ)` and each
//! factor is `u + t·ρ(w)·w` with `w = softmax(v) − u`, `ρ(w)` the distance from the uniform
//! point `u` to the edge of the feasible set along `w`, and `t = (1 − cos τ)/2`. Pure factors
//! sit at `τ = π`, where the map is smooth; clamping to the floor instead leaves a kink there
//! that stalls the polish.
//!
//! A small residual is a constructive certificate of separability. A large one proves nothing.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_bipartite, SeparabilityVerdict, ToyStateSpace};
use crate::classical::{self, entropy_of, JointProb};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchConfig {
    /// Number of product components; `None` means `dim_A · dim_B`.
    pub k: Option<usize>,
    /// Iteration budget for each stage of each restart.
    pub iters: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Stop launching restarts once the residual is this small.
    pub target_residual: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            k: None,
            iters: 2000,
            restarts: 20,
            seed: 0,
            target_residual: 1e-9,
        }
    }
}

/// Restarts run in fixed-size batches so the early stop does not depend on the thread count.
const BATCH: usize = 4;
/// Alternating sweeps before the polish.
const ALS_SWEEPS: usize = 200;
/// Consecutive accepted steps with negligible progress that end a polish.
const STALL: usize = 50;
/// Re-anchoring rounds after the first polish.
const RESEATS: usize = 4;
/// Factors this close to the floor (in the edge fraction `t`) are pinned onto it.
const PIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub weights: Vec<f64>,
    pub factors_a: Vec<Vec<f64>>,
    pub factors_b: Vec<Vec<f64>>,
}

impl Decomposition {
    /// `Σ_j λ_j a_j ⊗ b_j` as a flat row-major vector.
    pub fn reconstruct(&self) -> Vec<f64> {
        let da = self.factors_a.first().map_or(0, Vec::len);
        let db = self.factors_b.first().map_or(0, Vec::len);
        let mut out = vec![0.0; da * db];
        for ((l, a), b) in self.weights.iter().zip(&self.factors_a).zip(&self.factors_b) {
            for x in 0..da {
                for y in 0..db {
                    out[x * db + y] += l * a[x] * b[y];
                }
            }
        }
        out
    }

    pub fn residual(&self, p: &JointProb) -> f64 {
        self.reconstruct()
            .iter()
            .zip(p.weights())
            .map(|(r, w)| (r - w).abs())
            .sum()
    }

    /// Every factor has entropy at least `floor`.
    pub fn factors_respect(&self, floor: f64) -> bool {
        self.factors_a
            .iter()
            .chain(&self.factors_b)
            .all(|f| entropy_of(f) >= floor)
    }
}

pub fn separability_search(p: &JointProb, space: &ToyStateSpace, cfg: &SearchConfig) -> Result<SeparabilityVerdict> {
    check_bipartite(p)?;
    let (da, db) = (p.dims()[0], p.dims()[1]);
    let k = cfg.k.unwrap_or(da * db);
    if k == 0 || cfg.restarts == 0 {
        return Err(Error::InvalidArgument("k and restarts must be at least 1".into()));
    }
    let problem = Problem {
        target: p.weights(),
        da,
        db,
        k,
        eps: space.epsilon,
    };
    let mut best: Option<(f64, Decomposition)> = None;
    let mut start = 0;
    while start < cfg.restarts {
        let end = (start + BATCH).min(cfg.restarts);
        let batch: Vec<(f64, Decomposition)> = (start..end)
            .into_par_iter()
            .map(|r| {
                let mut rng = seed::derived_rng(cfg.seed, "toy/separability", r as u64);
                let theta0 = if r == 0 {
                    problem.als(ALS_SWEEPS.min(cfg.iters), &mut rng)
                } else {
                    (0..problem.n_params()).map(|_| rng.random_range(-3.0..3.0)).collect()
                };
                problem.polish(p, theta0, cfg.iters, cfg.target_residual)
            })
            .collect();
        for (res, d) in batch {
            if best.as_ref().is_none_or(|(b, _)| res < *b) {
                best = Some((res, d));
            }
        }
        if best.as_ref().is_some_and(|(b, _)| *b <= cfg.target_residual) {
            break;
        }
        start = end;
    }
    let (residual, components) = best.expect("at least one restart");
    let entropy = classical::shannon_entropy(p.as_prob());
    Ok(SeparabilityVerdict {
        witness_fired: space.fires(entropy),
        entropy,
        search_residual: Some(residual),
        components: Some(components),
    })
}

fn softmax(v: &[f64]) -> Vec<f64> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

fn mix(q: &[f64], s: f64) -> Vec<f64> {
    let u = 1.0 / q.len() as f64;
    q.iter().map(|x| (1.0 - s) * x + s * u).collect()
}

/// Smallest mixing weight `s` with `S((1−s)q + s·u) ≥ eps`, by bisection.
fn floor_mix(q: &[f64], eps: f64) -> f64 {
    if entropy_of(q) >= eps {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if entropy_of(&mix(q, mid)) >= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn project(q: &[f64], eps: f64) -> Vec<f64> {
    mix(q, floor_mix(q, eps))
}

/// Distance from `u` along `w` to the edge of the feasible set, with its gradient in `w`.
///
/// On the entropy edge `S(u + ρw) = eps` gives `∇ρ = −ρ g / (g·w)`, `g = −(ln a + 1)`.
fn radius(w: &[f64], eps: f64) -> (f64, Vec<f64>) {
    let n = w.len();
    let u = 1.0 / n as f64;
    let (m, wm) = w
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, x)| if x < acc.1 { (i, x) } else { acc });
    if wm > -1e-15 {
        return (0.0, vec![0.0; n]);
    }
    let at = |r: f64| -> Vec<f64> { w.iter().map(|x| (u + r * x).max(0.0)).collect() };
    let r_max = -u / wm;
    if entropy_of(&at(r_max)) >= eps {
        let mut grad = vec![0.0; n];
        grad[m] = u / (wm * wm);
        return (r_max, grad);
    }
    // Safeguarded Newton on r ↦ S(u + r·w) − eps, which is decreasing on the bracket.
    let slope_at = |a: &[f64]| -> f64 { a.iter().zip(w).map(|(x, y)| -(x.ln() + 1.0) * y).sum() };
    let (mut lo, mut hi) = (0.0f64, r_max);
    let mut r = 0.5 * r_max;
    for _ in 0..200 {
        let a = at(r);
        let f = entropy_of(&a) - eps;
        if f.abs() <= 1e-14 {
            lo = r;
            break;
        }
        if f > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
        let next = r - f / slope_at(&a);
        r = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    let g: Vec<f64> = at(lo).iter().map(|x| -(x.ln() + 1.0)).collect();
    let slope: f64 = g.iter().zip(w).map(|(a, b)| a * b).sum();
    if lo == 0.0 || slope == 0.0 {
        return (lo, vec![0.0; n]);
    }
    (lo, g.iter().map(|x| -lo * x / slope).collect())
}

/// A factor from its logits `v` and edge angle `tau`, with the Jacobian in `(v, tau)`.
fn factor(v: &[f64], tau: f64, eps: f64) -> (Vec<f64>, DMatrix<f64>) {
    let n = v.len();
    let u = 1.0 / n as f64;
    let q = softmax(v);
    let dq = DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { q[i] } else { 0.0 };
        diag - q[i] * q[j]
    });
    let w: Vec<f64> = q.iter().map(|x| x - u).collect();
    let (rho, grad) = radius(&w, eps);
    let t = 0.5 * (1.0 - tau.cos());
    let a: Vec<f64> = w.iter().map(|x| (u + t * rho * x).max(0.0)).collect();
    let dw = DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { rho } else { 0.0 };
        t * (w[i] * grad[j] + diag)
    });
    let dv = dw * dq;
    let mut jac = DMatrix::zeros(n, n + 1);
    jac.view_mut((0, 0), (n, n)).copy_from(&dv);
    for i in 0..n {
        jac[(i, n)] = 0.5 * tau.sin() * rho * w[i];
    }
    (a, jac)
}

/// Inverse of [`factor`] up to the redundancy in `v`.
fn factor_params(a: &[f64], eps: f64) -> (Vec<f64>, f64) {
    let u = 1.0 / a.len() as f64;
    let v = a.iter().map(|x| (0.5 * (x + u)).ln()).collect();
    let w: Vec<f64> = a.iter().map(|x| 0.5 * (x - u)).collect();
    let (rho, _) = radius(&w, eps);
    let t = if rho > 0.0 { (2.0 / rho).min(1.0) } else { 0.0 };
    (v, (1.0 - 2.0 * t).acos())
}

struct Problem<'a> {
    target: &'a [f64],
    da: usize,
    db: usize,
    k: usize,
    eps: f64,
}

impl Problem<'_> {
    /// Layout: `k` weight logits, then for each component the logits and angle of `a`
    /// followed by those of `b`.
    fn n_params(&self) -> usize {
        self.k * (3 + self.da + self.db)
    }

    fn offset(&self, j: usize) -> usize {
        self.k + j * (2 + self.da + self.db)
    }

    /// The two factors of component `j` with their Jacobians.
    fn factors(&self, theta: &[f64], j: usize) -> ((Vec<f64>, DMatrix<f64>), (Vec<f64>, DMatrix<f64>)) {
        let (da, db) = (self.da, self.db);
        let off = self.offset(j);
        let a = factor(&theta[off..off + da], theta[off + da], self.eps);
        let off = off + da + 1;
        let b = factor(&theta[off..off + db], theta[off + db], self.eps);
        (a, b)
    }

    fn decomposition(&self, theta: &[f64]) -> Decomposition {
        let weights = softmax(&theta[..self.k]);
        let mut factors_a = Vec::with_capacity(self.k);
        let mut factors_b = Vec::with_capacity(self.k);
        for j in 0..self.k {
            let ((a, _), (b, _)) = self.factors(theta, j);
            factors_a.push(a);
            factors_b.push(b);
        }
        Decomposition {
            weights,
            factors_a,
            factors_b,
        }
    }

    /// Alternating nonnegative least-squares sweeps; returns logits for the polish stage.
    fn als<R: Rng + ?Sized>(&self, sweeps: usize, rng: &mut R) -> Vec<f64> {
        let (da, db, k) = (self.da, self.db, self.k);
        let mut a: Vec<Vec<f64>> = (0..k)
            .map(|_| Ok(project(&classical::sample_state(da, rng)?.into_weights(), self.eps)))
            .collect::<Result<_>>()
            .expect("positive dimension");
        let mut b: Vec<Vec<f64>> = (0..k)
            .map(|_| Ok(project(&classical::sample_state(db, rng)?.into_weights(), self.eps)))
            .collect::<Result<_>>()
            .expect("positive dimension");
        let mut lam = vec![1.0 / k as f64; k];
        for _ in 0..sweeps {
            for j in 0..k {
                let mut rest = self.target.to_vec();
                for i in (0..k).filter(|&i| i != j) {
                    for x in 0..da {
                        for y in 0..db {
                            rest[x * db + y] -= lam[i] * a[i][x] * b[i][y];
                        }
                    }
                }
                let bb: f64 = b[j].iter().map(|v| v * v).sum();
                let w: Vec<f64> = (0..da)
                    .map(|x| ((0..db).map(|y| rest[x * db + y] * b[j][y]).sum::<f64>() / bb).max(0.0))
                    .collect();
                let s: f64 = w.iter().sum();
                if s > 1e-15 {
                    lam[j] = s;
                    a[j] = project(&w.iter().map(|v| v / s).collect::<Vec<_>>(), self.eps);
                }
                let aa: f64 = a[j].iter().map(|v| v * v).sum();
                let w: Vec<f64> = (0..db)
                    .map(|y| ((0..da).map(|x| rest[x * db + y] * a[j][x]).sum::<f64>() / aa).max(0.0))
                    .collect();
                let s: f64 = w.iter().sum();
                if s > 1e-15 {
                    lam[j] = s;
                    b[j] = project(&w.iter().map(|v| v / s).collect::<Vec<_>>(), self.eps);
                }
            }
            let total: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= total);
        }
        self.logits(&Decomposition {
            weights: lam,
            factors_a: a,
            factors_b: b,
        })
    }

    /// Parameters that reproduce `d` without saturating any softmax.
    fn logits(&self, d: &Decomposition) -> Vec<f64> {
        let mut theta: Vec<f64> = d.weights.iter().map(|v| v.max(1e-300).ln()).collect();
        for f in d.factors_a.iter().zip(&d.factors_b).flat_map(|(a, b)| [a, b]) {
            let (v, tau) = factor_params(f, self.eps);
            theta.extend(v);
            theta.push(tau);
        }
        theta
    }

    /// Residual `Σ λ a⊗b − P` and optionally its Jacobian.
    fn residual(&self, theta: &[f64], jacobian: bool) -> (DVector<f64>, Option<DMatrix<f64>>) {
        let (da, db, k) = (self.da, self.db, self.k);
        let lam = softmax(&theta[..k]);
        let mut r = DVector::from_fn(da * db, |i, _| -self.target[i]);
        let mut jm = jacobian.then(|| DMatrix::zeros(da * db, self.n_params()));
        for j in 0..k {
            let off = self.offset(j);
            let ((a, ja), (b, jb)) = self.factors(theta, j);
            for x in 0..da {
                for y in 0..db {
                    let row = x * db + y;
                    let ab = a[x] * b[y];
                    r[row] += lam[j] * ab;
                    if let Some(jm) = jm.as_mut() {
                        for l in 0..k {
                            let diag = if l == j { lam[j] } else { 0.0 };
                            let dl = diag - lam[j] * lam[l];
                            jm[(row, l)] += dl * ab;
                        }
                        for t in 0..=da {
                            jm[(row, off + t)] += lam[j] * ja[(x, t)] * b[y];
                        }
                        for t in 0..=db {
                            jm[(row, off + da + 1 + t)] += lam[j] * a[x] * jb[(y, t)];
                        }
                    }
                }
            }
        }
        (r, jm)
    }

    /// Full polish from `theta0`, then rounds that re-anchor the parameters at the current
    /// factors and pin the ones lying on the floor.
    ///
    /// Near `τ = π` the angle converges only linearly, and saturated logits flatten the
    /// Jacobian; both are removed by re-anchoring.
    fn polish(&self, p: &JointProb, theta0: Vec<f64>, iters: usize, target: f64) -> (f64, Decomposition) {
        let mut d = self.decomposition(&self.levenberg_marquardt(theta0, iters, &[]));
        let mut res = d.residual(p);
        for _ in 0..RESEATS {
            if res <= target {
                break;
            }
            let mut theta = self.logits(&d);
            let mut pinned = Vec::new();
            for j in 0..self.k {
                let off = self.offset(j);
                for idx in [off + self.da, off + self.da + 1 + self.db] {
                    if 0.5 * (1.0 - theta[idx].cos()) > 1.0 - PIN {
                        theta[idx] = PI;
                        pinned.push(idx);
                    }
                }
            }
            let next = self.decomposition(&self.levenberg_marquardt(theta, iters, &pinned));
            let next_res = next.residual(p);
            if next_res >= res {
                break;
            }
            (d, res) = (next, next_res);
        }
        (res, d)
    }

    /// Damped Gauss–Newton on the squared residual; parameters in `frozen` stay fixed.
    fn levenberg_marquardt(&self, mut theta: Vec<f64>, iters: usize, frozen: &[usize]) -> Vec<f64> {
        let n = self.n_params();
        let mut mu = 1e-3;
        let jacobian = |theta: &[f64]| {
            let (r, jm) = self.residual(theta, true);
            let mut jm = jm.expect("jacobian requested");
            for &c in frozen {
                jm.column_mut(c).fill(0.0);
            }
            (r, jm)
        };
        let (mut r, mut jm) = jacobian(&theta);
        let mut cost = r.norm_squared();
        let mut stalled = 0;
        for _ in 0..iters {
            if cost < 1e-30 || stalled >= STALL {
                break;
            }
            let jt = jm.transpose();
            let jtj = &jt * &jm;
            let grad = &jt * &r;
            let mut lhs = jtj.clone();
            for i in 0..n {
                lhs[(i, i)] += mu * (1.0 + jtj[(i, i)]);
            }
            let Some(chol) = lhs.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let step = chol.solve(&(-grad));
            let candidate: Vec<f64> = theta.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            let (rc, _) = self.residual(&candidate, false);
            let cc = rc.norm_squared();
            if cc < cost {
                stalled = if cc > cost * (1.0 - 1e-6) { stalled + 1 } else { 0 };
                theta = candidate;
                cost = cc;
                mu = (mu / 3.0).max(1e-12);
                (r, jm) = jacobian(&theta);
            } else {
                mu *= 4.0;
                if mu > 1e12 {
                    break;
                }
            }
        }
        theta
    }
}
