//! L2-regularized hinge-loss linear SVM trained by dual coordinate descent.
//!
//! The intercept is learned as the weight of an appended constant feature, so
//! it is regularized together with the other weights.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub cost: f64,
    pub max_epochs: usize,
    /// Stop once (primal - dual) / max(primal, 1) falls below this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { cost: 1.0, max_epochs: 200_000, tolerance: 1e-3, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub epochs: usize,
    pub duality_gap: f64,
}

impl LinearModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.intercept
    }
}

const SHRINK_EPS: f64 = 1e-3;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trains on rows `xs` with labels `ys` (true = positive class).
pub fn train_svm(xs: &[&[f64]], ys: &[bool], cfg: &SolverConfig) -> Result<LinearModel> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::Contract("empty or misaligned training data".into()));
    }
    if ys.iter().all(|&y| y) || ys.iter().all(|&y| !y) {
        return Err(Error::DegenerateLabels("only one class present".into()));
    }
    if !(cfg.cost > 0.0 && cfg.cost.is_finite()) {
        return Err(Error::InvalidParameter(format!("cost {} must be positive", cfg.cost)));
    }
    let dim = xs[0].len();
    let n = xs.len();
    let c = cfg.cost;
    let sign: Vec<f64> = ys.iter().map(|&y| if y { 1.0 } else { -1.0 }).collect();
    // squared norm of the augmented row (bias feature = 1)
    let qdiag: Vec<f64> = xs.iter().map(|x| dot(x, x) + 1.0).collect();

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut alpha = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut gap = f64::INFINITY;
    // variables stuck at a bound are shrunk out of the active set and
    // restored once the active problem looks solved
    let mut active = n;
    let (mut pg_max_old, mut pg_min_old) = (f64::INFINITY, f64::NEG_INFINITY);

    for epoch in 1..=cfg.max_epochs {
        order[..active].shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut s = 0;
        while s < active {
            let i = order[s];
            let g = sign[i] * (dot(&w, xs[i]) + b) - 1.0;
            let pg = if alpha[i] == 0.0 {
                if g > pg_max_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                }
                g.min(0.0)
            } else if alpha[i] == c {
                if g < pg_min_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                }
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qdiag[i]).clamp(0.0, c);
                let step = (alpha[i] - old) * sign[i];
                for (wj, xj) in w.iter_mut().zip(xs[i]) {
                    *wj += step * xj;
                }
                b += step;
            }
            s += 1;
        }

        let norm2 = dot(&w, &w) + b * b;
        let hinge: f64 = xs
            .iter()
            .zip(&sign)
            .map(|(x, s)| (1.0 - s * (dot(&w, x) + b)).max(0.0))
            .sum();
        let primal = 0.5 * norm2 + c * hinge;
        let dual = alpha.iter().sum::<f64>() - 0.5 * norm2;
        gap = primal - dual;
        if gap / primal.max(1.0) <= cfg.tolerance {
            return Ok(LinearModel { weights: w, intercept: b, epochs: epoch, duality_gap: gap });
        }

        if pg_max - pg_min <= SHRINK_EPS && active < n {
            active = n;
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
        } else {
            pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
            pg_min_old = if pg_min >= 0.0 { f64::NEG_INFINITY } else { pg_min };
        }
    }
    Err(Error::Convergence { iterations: cfg.max_epochs, gap })
}
