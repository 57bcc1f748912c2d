//! Synthetic instances and their unconstrained efficient frontiers.
//!
//! Correlations follow a one-factor model, `rho_ij = beta_i * beta_j` off the
//! diagonal, which is positive semi-definite for `|beta_i| <= 1`. The
//! frontier is traced by solving, for evenly spaced target returns between
//! the minimum-variance portfolio and the best single asset,
//!
//! ```text
//! minimize w' S w   subject to   sum w = 1,  mu' w = R,  w >= 0
//! ```
//!
//! with a primal active-set method, warm-started from the previous target.

use ccsport_core::{FrontPoint, Instance};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("need at least two assets, got {0}")]
    TooFewAssets(usize),
    #[error("need at least two frontier points, got {0}")]
    TooFewPoints(usize),
    #[error("quadratic program did not converge for target return {0}")]
    NoConvergence(f64),
    #[error(transparent)]
    Instance(#[from] ccsport_core::instance::InstanceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub assets: usize,
    pub seed: u64,
    pub frontier_points: usize,
    /// Range of the factor loadings.
    pub beta: (f64, f64),
    /// Range of expected returns per period.
    pub mu: (f64, f64),
    /// Range of standard deviations per period.
    pub sigma: (f64, f64),
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            assets: 31,
            seed: 1,
            frontier_points: 2000,
            beta: (0.45, 0.85),
            mu: (-0.001, 0.01),
            sigma: (0.03, 0.09),
        }
    }
}

/// Draws an instance. Riskier assets tend to earn more, as in the
/// benchmark data, so that the frontier is not a single asset.
pub fn synthetic_instance(name: &str, cfg: &SynthConfig) -> Result<Instance, SynthError> {
    let n = cfg.assets;
    if n < 2 {
        return Err(SynthError::TooFewAssets(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut beta = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for _ in 0..n {
        beta.push(rng.gen_range(cfg.beta.0..=cfg.beta.1));
        let s: f64 = rng.gen_range(cfg.sigma.0..=cfg.sigma.1);
        let tilt = (s - cfg.sigma.0) / (cfg.sigma.1 - cfg.sigma.0).max(f64::MIN_POSITIVE);
        let noise: f64 = rng.gen_range(0.0..=1.0);
        let m = cfg.mu.0 + (cfg.mu.1 - cfg.mu.0) * (0.6 * tilt + 0.4 * noise);
        sigma.push(s);
        mu.push(m);
    }
    let mut rho = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            rho[i * n + j] = if i == j { 1.0 } else { beta[i] * beta[j] };
        }
    }
    Ok(Instance::new(name, mu, sigma, rho)?)
}

fn covariance_matrix(inst: &Instance) -> DMatrix<f64> {
    let n = inst.n_assets();
    DMatrix::from_fn(n, n, |i, j| inst.cov(i, j))
}

/// Active-set solver state for one quadratic program.
struct ActiveSet<'a> {
    cov: &'a DMatrix<f64>,
    /// Equality rows and right-hand sides.
    rows: Vec<(Vec<f64>, f64)>,
}

impl ActiveSet<'_> {
    fn solve(&self, mut w: Vec<f64>, mut fixed: Vec<bool>) -> Option<Vec<f64>> {
        let n = w.len();
        let m = self.rows.len();
        for _ in 0..50 * n {
            let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
            let wv = DVector::from_column_slice(&w);
            let grad = (self.cov * &wv) * 2.0;
            let k = free.len();
            let mut kkt = DMatrix::zeros(k + m, k + m);
            let mut rhs = DVector::zeros(k + m);
            for (a, &i) in free.iter().enumerate() {
                for (b, &j) in free.iter().enumerate() {
                    kkt[(a, b)] = 2.0 * self.cov[(i, j)];
                }
                for (r, (row, _)) in self.rows.iter().enumerate() {
                    kkt[(a, k + r)] = row[i];
                    kkt[(k + r, a)] = row[i];
                }
                rhs[a] = -grad[i];
            }
            let sol = kkt
                .clone()
                .lu()
                .solve(&rhs)
                .filter(|s| s.iter().all(|v| v.is_finite()))
                .or_else(|| kkt.svd(true, true).solve(&rhs, 1e-15).ok())?;
            let step_norm = (0..k).map(|a| sol[a].abs()).fold(0.0, f64::max);
            if step_norm < 1e-13 {
                // multipliers of the bounds in the working set
                let scale = grad.amax().max(1e-300);
                let mut worst: Option<(usize, f64)> = None;
                for i in (0..n).filter(|&i| fixed[i]) {
                    let mut lambda = grad[i];
                    for (r, (row, _)) in self.rows.iter().enumerate() {
                        lambda += row[i] * sol[k + r];
                    }
                    if lambda < -1e-10 * scale && worst.is_none_or(|(_, l)| lambda < l) {
                        worst = Some((i, lambda));
                    }
                }
                match worst {
                    None => return Some(w),
                    Some((i, _)) => fixed[i] = false,
                }
                continue;
            }
            let mut alpha = 1.0;
            let mut blocking = None;
            for (a, &i) in free.iter().enumerate() {
                if sol[a] < 0.0 {
                    let ratio = -w[i] / sol[a];
                    if ratio < alpha {
                        alpha = ratio;
                        blocking = Some(i);
                    }
                }
            }
            for (a, &i) in free.iter().enumerate() {
                w[i] += alpha * sol[a];
            }
            if let Some(i) = blocking {
                w[i] = 0.0;
                fixed[i] = true;
            }
        }
        None
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn point(inst: &Instance, cov: &DMatrix<f64>, w: &[f64]) -> FrontPoint {
    let wv = DVector::from_column_slice(w);
    let risk = wv.dot(&(cov * &wv));
    let ret = w.iter().zip(inst.mu()).map(|(a, b)| a * b).sum();
    FrontPoint::new(ret, risk)
}

/// Minimum-variance long-only portfolio.
pub fn minimum_variance(inst: &Instance) -> Result<Vec<f64>, SynthError> {
    let n = inst.n_assets();
    let cov = covariance_matrix(inst);
    let start = (0..n)
        .min_by(|&a, &b| inst.sigma()[a].total_cmp(&inst.sigma()[b]))
        .unwrap_or(0);
    let mut w = vec![0.0; n];
    w[start] = 1.0;
    let fixed = (0..n).map(|i| i != start).collect();
    let qp = ActiveSet {
        cov: &cov,
        rows: vec![(vec![1.0; n], 1.0)],
    };
    qp.solve(w, fixed).ok_or(SynthError::NoConvergence(f64::NAN))
}

/// Long-only efficient frontier at `points` evenly spaced returns, as
/// `(return, variance)` pairs in ascending return.
pub fn efficient_frontier(inst: &Instance, points: usize) -> Result<Vec<FrontPoint>, SynthError> {
    if points < 2 {
        return Err(SynthError::TooFewPoints(points));
    }
    let n = inst.n_assets();
    let cov = covariance_matrix(inst);
    let mu = inst.mu();
    let top = argmax(mu);
    let mut w = minimum_variance(inst)?;
    let r0 = point(inst, &cov, &w).ret;
    let r1 = mu[top];
    let mut out = vec![point(inst, &cov, &w)];
    for k in 1..points {
        let target = if k == points - 1 {
            r1
        } else {
            r0 + (r1 - r0) * k as f64 / (points - 1) as f64
        };
        // move toward the best asset until the target return is met
        let current: f64 = w.iter().zip(mu).map(|(a, b)| a * b).sum();
        let theta = if r1 > current { ((target - current) / (r1 - current)).clamp(0.0, 1.0) } else { 1.0 };
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = (1.0 - theta) * *wi + if i == top { theta } else { 0.0 };
        }
        let fixed = w.iter().enumerate().map(|(i, &v)| v <= 0.0 && i != top).collect();
        let qp = ActiveSet {
            cov: &cov,
            rows: vec![(vec![1.0; n], 1.0), (mu.to_vec(), target)],
        };
        w = qp.solve(w, fixed).ok_or(SynthError::NoConvergence(target))?;
        out.push(point(inst, &cov, &w));
    }
    Ok(out)
}
