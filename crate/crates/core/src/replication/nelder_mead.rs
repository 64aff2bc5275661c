//! Nelder–Mead simplex minimization with dimension-adaptive coefficients.
//!
//! When the simplex collapses before the evaluation budget is spent, the search restarts from
//! the best vertex with a fresh simplex, which helps on the kinked objectives produced by a
//! minimum over several fidelities.

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMead {
    pub max_evals: usize,
    pub initial_step: f64,
    /// Spread of function values across the simplex below which it counts as collapsed.
    pub f_tol: f64,
    /// Largest vertex distance from the best vertex below which it counts as collapsed.
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            initial_step: 1.0,
            f_tol: 1e-12,
            x_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// The final simplex collapsed within tolerance before the budget ran out.
    pub converged: bool,
    /// `(evaluation, best value)` at every improvement of the best value.
    pub history: Vec<(usize, f64)>,
}

struct Counter<F> {
    f: F,
    evals: usize,
    best: f64,
    history: Vec<(usize, f64)>,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        let v = (self.f)(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        self.evals += 1;
        if v < self.best {
            self.best = v;
            self.history.push((self.evals, v));
        }
        v
    }
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, f: F, x0: &[f64]) -> NmOutcome {
        let mut c = Counter {
            f,
            evals: 0,
            best: f64::INFINITY,
            history: Vec::new(),
        };
        let mut x = x0.to_vec();
        let mut fx = c.eval(&x);
        let mut converged = false;
        while c.evals < self.max_evals {
            let (xb, fb, collapsed) = self.run(&mut c, &x);
            let improved = fb < fx - self.f_tol;
            if fb < fx {
                x = xb;
                fx = fb;
            }
            converged = collapsed;
            if !collapsed || !improved {
                break;
            }
        }
        NmOutcome {
            x,
            f: fx,
            evals: c.evals,
            converged,
            history: c.history,
        }
    }

    /// One simplex run from `start`; returns the best vertex and whether the simplex collapsed.
    fn run<F: FnMut(&[f64]) -> f64>(&self, c: &mut Counter<F>, start: &[f64]) -> (Vec<f64>, f64, bool) {
        let n = start.len();
        let nf = n.max(1) as f64;
        let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
        let sigma = if n <= 1 { 0.5 } else { sigma };

        let mut pts: Vec<Vec<f64>> = vec![start.to_vec()];
        for i in 0..n {
            let mut p = start.to_vec();
            p[i] += self.initial_step;
            pts.push(p);
        }
        let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
        for p in &pts {
            if c.evals >= self.max_evals {
                break;
            }
            vals.push(c.eval(p));
        }
        if vals.len() < pts.len() {
            let i = argmin(&vals);
            return (pts[i].clone(), vals[i], false);
        }

        loop {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            let spread = vals[n] - vals[0];
            let size = pts[1..]
                .iter()
                .map(|p| dist(p, &pts[0]))
                .fold(0.0, f64::max);
            if spread <= self.f_tol && size <= self.x_tol {
                return (pts[0].clone(), vals[0], true);
            }
            if c.evals >= self.max_evals {
                return (pts[0].clone(), vals[0], false);
            }

            let mut centroid = vec![0.0; n];
            for p in &pts[..n] {
                for (m, v) in centroid.iter_mut().zip(p) {
                    *m += v / nf;
                }
            }
            let toward = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&pts[n])
                    .map(|(m, w)| m + t * (m - w))
                    .collect()
            };

            let xr = toward(alpha);
            let fr = c.eval(&xr);
            if fr < vals[0] {
                if c.evals >= self.max_evals {
                    pts[n] = xr;
                    vals[n] = fr;
                    continue;
                }
                let xe = toward(alpha * gamma);
                let fe = c.eval(&xe);
                if fe < fr {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
                continue;
            }
            if fr < vals[n - 1] {
                pts[n] = xr;
                vals[n] = fr;
                continue;
            }
            if c.evals >= self.max_evals {
                continue;
            }
            // Outside contraction if the reflection beat the worst vertex, inside otherwise.
            let xc = toward(if fr < vals[n] { alpha * rho } else { -rho });
            let fc = c.eval(&xc);
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
                continue;
            }
            // Shrink toward the best vertex.
            for i in 1..=n {
                if c.evals >= self.max_evals {
                    break;
                }
                let p: Vec<f64> = pts[0]
                    .iter()
                    .zip(&pts[i])
                    .map(|(b, v)| b + sigma * (v - b))
                    .collect();
                vals[i] = c.eval(&p);
                pts[i] = p;
            }
        }
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let nm = NelderMead::default();
        let out = nm.minimize(|x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2), &[0.0, 0.0]);
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] + 2.0).abs() < 1e-5);
        assert!(out.evals <= nm.max_evals);
    }

    #[test]
    fn rosenbrock() {
        let nm = NelderMead {
            max_evals: 5000,
            ..NelderMead::default()
        };
        let out = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
        );
        assert!(out.f < 1e-10, "{out:?}");
    }

    #[test]
    fn budget_is_respected_and_history_is_monotone() {
        let nm = NelderMead {
            max_evals: 50,
            ..NelderMead::default()
        };
        let out = nm.minimize(|x| x.iter().map(|v| v.abs()).sum(), &[3.0; 8]);
        assert!(out.evals <= 50);
        assert!(!out.converged);
        assert!(out.history.windows(2).all(|w| w[1].1 < w[0].1));
        assert_eq!(out.history.last().unwrap().1, out.f);
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let nm = NelderMead::default();
        let out = nm.minimize(|x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.5).powi(2) }, &[2.0]);
        assert!((out.x[0] - 0.5).abs() < 1e-4);
    }
}
