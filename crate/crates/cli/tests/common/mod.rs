//! Brute-force reference for the best cloner of {(1,0), (½,½)} over classical channels
//! 2 → 2⊗2 (trivial environment, one-outcome remainder).
//!
//! A channel is two columns c0, c1 on the 3-simplex over (00, 01, 10, 11). The clone objective
//! is `min(√c0[00], ½ Σ_k √(½(c0[k] + c1[k])))`; it is concave, so a coarse grid followed by
//! shrinking local pattern search finds the global maximum.

#![allow(dead_code)]

/// Value produced by [`grid_oracle`], frozen.
pub const CLONE_ORACLE: f64 = 0.972_575_398_734_094_4;

fn objective(c0: &[f64; 4], c1: &[f64; 4]) -> f64 {
    let first = c0[0].sqrt();
    let second: f64 = (0..4).map(|k| (0.5 * (c0[k] + c1[k])).sqrt()).sum::<f64>() * 0.5;
    first.min(second)
}

fn column(x: &[f64; 3]) -> Option<[f64; 4]> {
    let last = 1.0 - x[0] - x[1] - x[2];
    if x.iter().any(|v| *v < 0.0) || last < -1e-15 {
        return None;
    }
    Some([x[0], x[1], x[2], last.max(0.0)])
}

pub fn grid_oracle() -> f64 {
    let steps = 20; // grid step 0.05
    let mut grid = Vec::new();
    for a in 0..=steps {
        for b in 0..=steps - a {
            for c in 0..=steps - a - b {
                let s = steps as f64;
                grid.push([a as f64 / s, b as f64 / s, c as f64 / s]);
            }
        }
    }
    let mut best = (f64::NEG_INFINITY, [0.0; 3], [0.0; 3]);
    for x in &grid {
        let c0 = column(x).unwrap();
        for y in &grid {
            let v = objective(&c0, &column(y).unwrap());
            if v > best.0 {
                best = (v, *x, *y);
            }
        }
    }
    // Local refinement: every move in {-h, 0, h}^6, halving h when nothing improves.
    let mut h = 0.05;
    while h > 1e-13 {
        let mut improved = false;
        for m in 0..729usize {
            let mut x = best.1;
            let mut y = best.2;
            let mut code = m;
            for i in 0..6 {
                let step = (code % 3) as f64 - 1.0;
                code /= 3;
                if i < 3 {
                    x[i] += step * h;
                } else {
                    y[i - 3] += step * h;
                }
            }
            if let (Some(c0), Some(c1)) = (column(&x), column(&y)) {
                let v = objective(&c0, &c1);
                if v > best.0 {
                    best = (v, x, y);
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    best.0
}
