#![allow(dead_code)]

pub mod oracles;

use ccsport_core::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One-factor correlation model: rho_ij = beta_i * beta_j off the diagonal.
pub fn factor_instance(n: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..0.85)).collect();
    let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.002..0.012)).collect();
    let sigma: Vec<f64> = (0..n).map(|_| rng.gen_range(0.02..0.09)).collect();
    let mut rho = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            rho[i * n + j] = if i == j { 1.0 } else { beta[i] * beta[j] };
        }
    }
    Instance::new("factor", mu, sigma, rho).unwrap()
}
