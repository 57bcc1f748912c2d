//! Decomposition-based selection with the Tchebycheff aggregation.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::HasObjectives;
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoeadConfig {
    /// Neighborhood size `T`.
    pub neighborhood: usize,
    /// Probability of mating and replacing over the whole population
    /// instead of the neighborhood.
    pub global_probability: f64,
    /// Maximum number of subproblems one offspring may take over.
    pub replacement_limit: usize,
}

impl Default for MoeadConfig {
    fn default() -> Self {
        Self {
            neighborhood: 10,
            global_probability: 0.1,
            replacement_limit: 2,
        }
    }
}

/// `np` weight vectors evenly spaced on the segment from (0, 1) to (1, 0).
pub fn uniform_weights(np: usize) -> Vec<Point> {
    if np == 1 {
        return alloc::vec![[0.5, 0.5]];
    }
    (0..np)
        .map(|i| {
            let a = i as f64 / (np - 1) as f64;
            [a, 1.0 - a]
        })
        .collect()
}

/// The `t` closest weight vectors (Euclidean, lower index on ties) of each
/// subproblem, itself included.
pub fn neighborhoods(weights: &[Point], t: usize) -> Vec<Vec<usize>> {
    let t = t.min(weights.len());
    weights
        .iter()
        .map(|w| {
            let mut order: Vec<(f64, usize)> = weights
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let (d0, d1) = (w[0] - v[0], w[1] - v[1]);
                    (d0 * d0 + d1 * d1, j)
                })
                .collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            order.into_iter().take(t).map(|(_, j)| j).collect()
        })
        .collect()
}

/// `max_k lambda_k |f_k - z_k| / scale_k`.
pub fn tchebycheff(f: &Point, lambda: &Point, ideal: &Point, scale: &Point) -> f64 {
    (0..2)
        .map(|k| lambda[k] * (f[k] - ideal[k]).abs() / scale[k])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Population indexed by subproblem plus the running ideal point.
#[derive(Debug, Clone)]
pub struct MoeadState<T> {
    pub members: Vec<T>,
    pub weights: Vec<Point>,
    pub neighbors: Vec<Vec<usize>>,
    pub ideal: Point,
    pub config: MoeadConfig,
}

impl<T: HasObjectives + Clone> MoeadState<T> {
    pub fn new(members: Vec<T>, config: MoeadConfig) -> Self {
        let weights = uniform_weights(members.len());
        let neighbors = neighborhoods(&weights, config.neighborhood);
        let mut ideal = [f64::INFINITY; 2];
        for m in &members {
            let f = m.objectives();
            ideal[0] = ideal[0].min(f[0]);
            ideal[1] = ideal[1].min(f[1]);
        }
        Self {
            members,
            weights,
            neighbors,
            ideal,
            config,
        }
    }

    /// Neighborhood of `sub`, or the whole population with probability
    /// `global_probability`.
    pub fn mating_pool<R: Rng + ?Sized>(&self, sub: usize, rng: &mut R) -> Vec<usize> {
        if rng.gen::<f64>() < self.config.global_probability {
            (0..self.members.len()).collect()
        } else {
            self.neighbors[sub].clone()
        }
    }

    /// Per-objective normalization: current population maximum minus the
    /// ideal point, or one when that range vanishes.
    pub fn scale(&self) -> Point {
        let mut nadir = [f64::NEG_INFINITY; 2];
        for m in &self.members {
            let f = m.objectives();
            nadir[0] = nadir[0].max(f[0]);
            nadir[1] = nadir[1].max(f[1]);
        }
        let mut scale = [1.0; 2];
        for k in 0..2 {
            let range = nadir[k] - self.ideal[k];
            if range > 1e-12 && range.is_finite() {
                scale[k] = range;
            }
        }
        scale
    }

    /// Updates the ideal point, then walks `order` and lets `offspring`
    /// replace every member it strictly improves on, up to the replacement
    /// limit. Returns the replaced subproblems.
    pub fn replace_in_order(&mut self, offspring: &T, order: &[usize]) -> Vec<usize> {
        let f = offspring.objectives();
        self.ideal[0] = self.ideal[0].min(f[0]);
        self.ideal[1] = self.ideal[1].min(f[1]);
        let scale = self.scale();
        let mut replaced = Vec::new();
        for &j in order {
            if replaced.len() >= self.config.replacement_limit {
                break;
            }
            let lambda = self.weights[j];
            let new = tchebycheff(&f, &lambda, &self.ideal, &scale);
            let old = tchebycheff(&self.members[j].objectives(), &lambda, &self.ideal, &scale);
            if new < old {
                self.members[j] = offspring.clone();
                replaced.push(j);
            }
        }
        replaced
    }

    /// [`Self::replace_in_order`] over a random permutation of `pool`.
    pub fn offer<R: Rng + ?Sized>(&mut self, offspring: &T, pool: &[usize], rng: &mut R) -> Vec<usize> {
        let mut order = pool.to_vec();
        order.shuffle(rng);
        self.replace_in_order(offspring, &order)
    }
}
