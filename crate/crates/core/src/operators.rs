//! Variation operators.
//!
//! * [`Operator::DifferentialPolynomial`]: DE/rand/1 with binomial
//!   crossover, then bounded polynomial mutation.
//! * [`Operator::Power`]: raise every gene to one shared random exponent in
//!   `[1, 2]`. Gene order is preserved, so the selected assets never change.
//! * [`Operator::Swap`]: exchange the gene of a selected asset with the gene
//!   of a partner chosen by one of four problem-aware strategies.
//!
//! Every operator returns genes inside `[0, 1]`.

use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::encoding::{Genotype, Scheme};
use crate::instance::Instance;
use crate::problem::ConstraintSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("parent genotypes differ in length or scheme")]
    Mismatch,
    #[error("invalid operator configuration: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    DifferentialPolynomial,
    Power,
    Swap,
}

impl Operator {
    pub const ALL: [Operator; 3] = [Operator::DifferentialPolynomial, Operator::Power, Operator::Swap];
}

/// Operator parameters. Defaults: `F = 0.5`, `CR = 0.9`, `eta_m = 20`,
/// `p_m = 1/NP` with `NP = 100`, uniform operator weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorConfig {
    /// DE scaling factor `F`.
    pub scale: f64,
    /// Binomial crossover rate `CR`.
    pub crossover_rate: f64,
    /// Polynomial mutation distribution index `eta_m`.
    pub distribution_index: f64,
    /// Per-gene polynomial mutation probability `p_m`.
    pub mutation_probability: f64,
    /// Selection probabilities of the three operators, in [`Operator::ALL`] order.
    pub weights: [f64; 3],
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self::for_population(100)
    }
}

impl OperatorConfig {
    pub fn for_population(np: usize) -> Self {
        Self {
            scale: 0.5,
            crossover_rate: 0.9,
            distribution_index: 20.0,
            mutation_probability: 1.0 / np.max(1) as f64,
            weights: [1.0 / 3.0; 3],
        }
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(OperatorError::Config("scale factor F must be positive"));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(OperatorError::Config("crossover rate must lie in [0, 1]"));
        }
        if !(self.distribution_index > 0.0 && self.distribution_index.is_finite()) {
            return Err(OperatorError::Config("distribution index must be positive"));
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return Err(OperatorError::Config("mutation probability must lie in [0, 1]"));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(OperatorError::Config("operator weights must be non-negative"));
        }
        if (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(OperatorError::Config("operator weights must sum to one"));
        }
        Ok(())
    }
}

/// Categorical draw over [`Operator::ALL`] by `cfg.weights`.
pub fn select_operator<R: Rng + ?Sized>(cfg: &OperatorConfig, rng: &mut R) -> Operator {
    let total: f64 = cfg.weights.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = Operator::DifferentialPolynomial;
    for (op, &w) in Operator::ALL.iter().zip(&cfg.weights) {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = *op;
        if u < acc {
            return *op;
        }
    }
    last
}

/// Polynomial perturbation `delta` for a uniform draw `u` in `[0, 1)`:
///
/// ```text
/// delta = (2u)^(1/(eta+1)) - 1          if u < 0.5
/// delta = 1 - (2(1-u))^(1/(eta+1))      otherwise
/// ```
pub fn polynomial_delta(u: f64, eta: f64) -> f64 {
    let exponent = 1.0 / (eta + 1.0);
    if u < 0.5 {
        libm::pow(2.0 * u, exponent) - 1.0
    } else {
        1.0 - libm::pow(2.0 * (1.0 - u), exponent)
    }
}

/// Polynomial mutation of one gene on `[0, 1]`; the result is clamped.
pub fn polynomial_mutation<R: Rng + ?Sized>(gene: f64, eta: f64, rng: &mut R) -> f64 {
    let u = rng.gen::<f64>();
    (gene + polynomial_delta(u, eta)).clamp(0.0, 1.0)
}

/// DE/rand/1/bin followed by polynomial mutation.
///
/// Mutant `v = c3 + F (c1 - c2)`, crossed with `target` at rate `CR` with one
/// guaranteed mutant gene, clamped to `[0, 1]`, then each gene is mutated
/// with probability `p_m`.
pub fn de_polynomial<R: Rng + ?Sized>(
    target: &Genotype,
    c1: &Genotype,
    c2: &Genotype,
    c3: &Genotype,
    cfg: &OperatorConfig,
    rng: &mut R,
) -> Result<Genotype, OperatorError> {
    let len = target.genes().len();
    for g in [c1, c2, c3] {
        if g.genes().len() != len || g.scheme() != target.scheme() {
            return Err(OperatorError::Mismatch);
        }
    }
    let forced = rng.gen_range(0..len);
    let mut genes: Vec<f64> = Vec::with_capacity(len);
    for i in 0..len {
        let take_mutant = i == forced || rng.gen::<f64>() < cfg.crossover_rate;
        let v = if take_mutant {
            c3.genes()[i] + cfg.scale * (c1.genes()[i] - c2.genes()[i])
        } else {
            target.genes()[i]
        };
        genes.push(v.clamp(0.0, 1.0));
    }
    for g in genes.iter_mut() {
        if rng.gen::<f64>() < cfg.mutation_probability {
            *g = polynomial_mutation(*g, cfg.distribution_index, rng);
        }
    }
    Ok(Genotype::clamped(target.scheme(), genes))
}

/// Raises every gene to the power `exponent`.
pub fn power_with_exponent(g: &Genotype, exponent: f64) -> Genotype {
    let genes = g.genes().iter().map(|&x| libm::pow(x, exponent)).collect();
    Genotype::clamped(g.scheme(), genes)
}

/// Power operator with one exponent drawn from `[1, 2]` for the whole vector.
pub fn power<R: Rng + ?Sized>(g: &Genotype, rng: &mut R) -> Genotype {
    let exponent = rng.gen_range(1.0..=2.0);
    power_with_exponent(g, exponent)
}

/// How the swap operator picks the partner asset `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwapStrategy {
    /// Another selected asset, uniformly.
    WithinSelection,
    /// The unselected asset with the lowest standard deviation.
    LowestRisk,
    /// The unselected asset with the highest expected return.
    HighestReturn,
    /// The unselected asset with the least summed correlation to the other
    /// selected assets.
    LeastCorrelated,
}

impl SwapStrategy {
    pub const ALL: [SwapStrategy; 4] = [
        SwapStrategy::WithinSelection,
        SwapStrategy::LowestRisk,
        SwapStrategy::HighestReturn,
        SwapStrategy::LeastCorrelated,
    ];
}

fn argmin_by<F: Fn(usize) -> f64>(candidates: impl Iterator<Item = usize>, key: F) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for j in candidates {
        let k = key(j);
        if best.is_none_or(|(_, b)| k < b) {
            best = Some((j, k));
        }
    }
    best.map(|(j, _)| j)
}

/// Partner asset for `i` under `strategy`, or `None` when no candidate
/// exists. `selected` must be sorted ascending. Ties go to the lower index.
pub fn swap_partner<R: Rng + ?Sized>(
    strategy: SwapStrategy,
    i: usize,
    selected: &[usize],
    inst: &Instance,
    rng: &mut R,
) -> Option<usize> {
    let n = inst.n_assets();
    let unselected = || (0..n).filter(move |j| selected.binary_search(j).is_err());
    match strategy {
        SwapStrategy::WithinSelection => {
            let others: Vec<usize> = selected.iter().copied().filter(|&j| j != i).collect();
            if others.is_empty() {
                None
            } else {
                Some(others[rng.gen_range(0..others.len())])
            }
        }
        SwapStrategy::LowestRisk => argmin_by(unselected(), |j| inst.sigma()[j]),
        SwapStrategy::HighestReturn => argmin_by(unselected(), |j| -inst.mu()[j]),
        SwapStrategy::LeastCorrelated => argmin_by(unselected(), |j| {
            selected
                .iter()
                .filter(|&&k| k != i)
                .map(|&k| inst.rho(k, j))
                .sum::<f64>()
        }),
    }
}

/// Swaps genes `i` and `j`; for DCS the weight genes `i + N` and `j + N`
/// are swapped as well.
pub fn swap_genes(g: &Genotype, i: usize, j: usize) -> Genotype {
    let mut genes = g.genes().to_vec();
    genes.swap(i, j);
    if g.scheme() == Scheme::Dcs {
        let n = g.n_assets();
        genes.swap(i + n, j + n);
    }
    Genotype::clamped(g.scheme(), genes)
}

/// Swap operator. `i` is drawn from the selected, non-pre-assigned assets;
/// the strategy is drawn uniformly. Returns `g` unchanged when no eligible
/// `i` or partner exists.
pub fn swap<R: Rng + ?Sized>(
    g: &Genotype,
    selected: &[usize],
    inst: &Instance,
    c: &ConstraintSet,
    rng: &mut R,
) -> Genotype {
    let eligible: Vec<usize> = selected.iter().copied().filter(|&i| !c.is_preassigned(i)).collect();
    if eligible.is_empty() {
        return g.clone();
    }
    let i = eligible[rng.gen_range(0..eligible.len())];
    let strategy = SwapStrategy::ALL[rng.gen_range(0..SwapStrategy::ALL.len())];
    match swap_partner(strategy, i, selected, inst, rng) {
        Some(j) => swap_genes(g, i, j),
        None => g.clone(),
    }
}
