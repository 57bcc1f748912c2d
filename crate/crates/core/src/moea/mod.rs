//! The generational framework: sample, decode, repair, evaluate, then loop
//! over variation and environmental selection until the evaluation budget
//! is spent.
//!
//! Three selection backends plug into the loop:
//! * [`Backend::Moead`]: decomposition with Tchebycheff subproblems;
//! * [`Backend::Nsga2`]: non-dominated sorting plus crowding distance;
//! * [`Backend::SmsEmoa`]: steady state, drops the smallest hypervolume
//!   contributor of the worst front.
//!
//! Every evaluated individual is offered to a bounded external archive.

pub mod archive;
pub mod moead;
pub mod smsemoa;
pub mod sorting;

use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::encoding::{decode_and_repair, random_genotype, DecodeError, Genotype, Scheme};
use crate::instance::Instance;
use crate::operators::{self, Operator, OperatorConfig, OperatorError};
use crate::problem::{evaluate, ConstraintSet, ObjectiveVector, Portfolio, ProblemError};
use crate::Point;

pub use archive::Archive;
pub use moead::{MoeadConfig, MoeadState};
pub use smsemoa::smsemoa_select;
pub use sorting::{crowding_distance, dominates, nondominated_sort, nsga2_select};

/// Anything carrying a minimization objective vector.
pub trait HasObjectives {
    fn objectives(&self) -> Point;
}

impl HasObjectives for Point {
    fn objectives(&self) -> Point {
        *self
    }
}

/// A genotype with its repaired phenotype and objectives `[risk, -return]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    pub portfolio: Portfolio,
    pub objectives: Point,
}

impl Individual {
    pub fn objective_vector(&self) -> ObjectiveVector {
        ObjectiveVector::from_minimization(self.objectives)
    }
}

impl HasObjectives for Individual {
    fn objectives(&self) -> Point {
        self.objectives
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Backend {
    Moead,
    Nsga2,
    SmsEmoa,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Moead, Backend::Nsga2, Backend::SmsEmoa];

    pub fn label(self) -> &'static str {
        match self {
            Backend::Moead => "MOEA/D",
            Backend::Nsga2 => "NSGA-II",
            Backend::SmsEmoa => "SMS-EMOA",
        }
    }

    /// Lowercase identifier used in configuration files and paths.
    pub fn slug(self) -> &'static str {
        match self {
            Backend::Moead => "moead",
            Backend::Nsga2 => "nsga2",
            Backend::SmsEmoa => "smsemoa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub backend: Backend,
    pub population_size: usize,
    /// Total evaluations are `population_size * generations`; the initial
    /// population counts as the first generation.
    pub generations: usize,
    pub seed: u64,
    pub moead: MoeadConfig,
    pub operators: OperatorConfig,
}

impl RunConfig {
    /// Standard parameters: 100 individuals, 1000 generations.
    pub fn new(scheme: Scheme, backend: Backend) -> Self {
        Self {
            scheme,
            backend,
            population_size: 100,
            generations: 1000,
            seed: 0,
            moead: MoeadConfig::default(),
            operators: OperatorConfig::for_population(100),
        }
    }

    pub fn evaluation_budget(&self) -> usize {
        self.population_size * self.generations
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.population_size < 4 {
            return Err(RunError::Config("population size must be at least 4"));
        }
        if self.generations == 0 {
            return Err(RunError::Config("generations must be positive"));
        }
        if self.moead.neighborhood < 2 {
            return Err(RunError::Config("neighborhood size must be at least 2"));
        }
        if self.moead.replacement_limit == 0 {
            return Err(RunError::Config("replacement limit must be positive"));
        }
        if !(0.0..=1.0).contains(&self.moead.global_probability) {
            return Err(RunError::Config("global mating probability must lie in [0, 1]"));
        }
        self.operators.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("invalid run configuration: {0}")]
    Config(&'static str),
    #[error("constraint set covers {constraints} assets, instance has {instance}")]
    Dimension { instance: usize, constraints: usize },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub population: Vec<Individual>,
    /// Non-dominated individuals seen during the run, at most
    /// `population_size` of them.
    pub archive: Vec<Individual>,
    pub evaluations: usize,
}

/// Snapshot handed to a run observer after initialization and after every
/// generation (every `population_size` steps for the steady-state backend).
pub struct Progress<'a> {
    pub evaluations: usize,
    pub population: &'a [Individual],
    pub archive: &'a [Individual],
}

struct Evaluator<'a> {
    instance: &'a Instance,
    constraints: &'a ConstraintSet,
    evaluations: usize,
}

impl Evaluator<'_> {
    fn evaluate(&mut self, genotype: Genotype) -> Result<Individual, RunError> {
        let portfolio = decode_and_repair(&genotype, self.constraints)?;
        let objectives = evaluate(&portfolio, self.instance)?.minimization();
        self.evaluations += 1;
        Ok(Individual {
            genotype,
            portfolio,
            objectives,
        })
    }
}

/// Three distinct donors from `pool`, none equal to `target`. Falls back to
/// the whole population when the pool is too small.
fn pick_donors<R: Rng + ?Sized>(pool: &[usize], target: usize, np: usize, rng: &mut R) -> [usize; 3] {
    let mut candidates: Vec<usize> = pool.iter().copied().filter(|&j| j != target).collect();
    if candidates.len() < 3 {
        candidates = (0..np).filter(|&j| j != target).collect();
    }
    let picked = index::sample(rng, candidates.len(), 3);
    [
        candidates[picked.index(0)],
        candidates[picked.index(1)],
        candidates[picked.index(2)],
    ]
}

fn vary<R: Rng + ?Sized>(
    target: usize,
    population: &[Individual],
    pool: &[usize],
    instance: &Instance,
    constraints: &ConstraintSet,
    cfg: &OperatorConfig,
    rng: &mut R,
) -> Result<Genotype, RunError> {
    let parent = &population[target];
    Ok(match operators::select_operator(cfg, rng) {
        Operator::DifferentialPolynomial => {
            let [a, b, c] = pick_donors(pool, target, population.len(), rng);
            operators::de_polynomial(
                &parent.genotype,
                &population[a].genotype,
                &population[b].genotype,
                &population[c].genotype,
                cfg,
                rng,
            )?
        }
        Operator::Power => operators::power(&parent.genotype, rng),
        Operator::Swap => operators::swap(
            &parent.genotype,
            parent.portfolio.selected(),
            instance,
            constraints,
            rng,
        ),
    })
}

/// Runs one configuration to completion. See [`run_observed`].
pub fn run(instance: &Instance, constraints: &ConstraintSet, cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    run_observed(instance, constraints, cfg, &mut |_| {})
}

/// Runs one configuration, calling `observer` after initialization and
/// after every generation.
pub fn run_observed(
    instance: &Instance,
    constraints: &ConstraintSet,
    cfg: &RunConfig,
    observer: &mut dyn FnMut(&Progress<'_>),
) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    if constraints.n_assets() != instance.n_assets() {
        return Err(RunError::Dimension {
            instance: instance.n_assets(),
            constraints: constraints.n_assets(),
        });
    }
    let np = cfg.population_size;
    let n = instance.n_assets();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut eval = Evaluator {
        instance,
        constraints,
        evaluations: 0,
    };
    let mut archive = Archive::new(np);

    let mut population = Vec::with_capacity(np);
    for _ in 0..np {
        let ind = eval.evaluate(random_genotype(cfg.scheme, n, &mut rng))?;
        archive.offer(&ind);
        population.push(ind);
    }
    observer(&Progress {
        evaluations: eval.evaluations,
        population: &population,
        archive: archive.members(),
    });

    let rounds = cfg.generations - 1;
    let all: Vec<usize> = (0..np).collect();
    match cfg.backend {
        Backend::Moead => {
            let mut state = MoeadState::new(population, cfg.moead);
            for _ in 0..rounds {
                for sub in 0..np {
                    let pool = state.mating_pool(sub, &mut rng);
                    let child = vary(sub, &state.members, &pool, instance, constraints, &cfg.operators, &mut rng)?;
                    let child = eval.evaluate(child)?;
                    archive.offer(&child);
                    state.offer(&child, &pool, &mut rng);
                }
                observer(&Progress {
                    evaluations: eval.evaluations,
                    population: &state.members,
                    archive: archive.members(),
                });
            }
            population = state.members;
        }
        Backend::Nsga2 => {
            for _ in 0..rounds {
                let mut combined = population.clone();
                for target in 0..np {
                    let child = vary(target, &population, &all, instance, constraints, &cfg.operators, &mut rng)?;
                    let child = eval.evaluate(child)?;
                    archive.offer(&child);
                    combined.push(child);
                }
                let points: Vec<Point> = combined.iter().map(|i| i.objectives).collect();
                let keep = nsga2_select(&points, np);
                population = keep.into_iter().map(|i| combined[i].clone()).collect();
                observer(&Progress {
                    evaluations: eval.evaluations,
                    population: &population,
                    archive: archive.members(),
                });
            }
        }
        Backend::SmsEmoa => {
            for step in 0..rounds * np {
                let target = rng.gen_range(0..np);
                let child = vary(target, &population, &all, instance, constraints, &cfg.operators, &mut rng)?;
                let child = eval.evaluate(child)?;
                archive.offer(&child);
                population.push(child);
                let points: Vec<Point> = population.iter().map(|i| i.objectives).collect();
                let drop = smsemoa_select(&points).expect("population is never empty");
                population.remove(drop);
                if (step + 1) % np == 0 {
                    observer(&Progress {
                        evaluations: eval.evaluations,
                        population: &population,
                        archive: archive.members(),
                    });
                }
            }
        }
    }

    Ok(RunOutcome {
        population,
        archive: archive.into_members(),
        evaluations: eval.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{check_feasibility, ConstraintPreset};
    use alloc::vec;

    fn toy_instance(n: usize) -> Instance {
        let mu: Vec<f64> = (0..n).map(|i| 0.001 + 0.0005 * i as f64).collect();
        let sigma: Vec<f64> = (0..n).map(|i| 0.02 + 0.003 * i as f64).collect();
        let mut rho = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                rho[i * n + j] = if i == j { 1.0 } else { 0.3 };
            }
        }
        Instance::new("toy", mu, sigma, rho).unwrap()
    }

    fn small_config(scheme: Scheme, backend: Backend) -> RunConfig {
        RunConfig {
            population_size: 12,
            generations: 6,
            seed: 99,
            ..RunConfig::new(scheme, backend)
        }
    }

    #[test]
    fn budget_is_spent_exactly() {
        let inst = toy_instance(31);
        let c = ConstraintPreset::First.build(31).unwrap();
        for backend in Backend::ALL {
            for scheme in [Scheme::Ccs, Scheme::Dcs] {
                let cfg = small_config(scheme, backend);
                let out = run(&inst, &c, &cfg).unwrap();
                assert_eq!(out.evaluations, cfg.evaluation_budget());
                assert_eq!(out.population.len(), 12);
                assert!(out.archive.len() <= 12 && !out.archive.is_empty());
                for ind in out.population.iter().chain(&out.archive) {
                    assert!(check_feasibility(&ind.portfolio, &c).overall());
                }
            }
        }
    }

    #[test]
    fn single_generation_is_initial_population() {
        let inst = toy_instance(31);
        let c = ConstraintPreset::First.build(31).unwrap();
        let cfg = RunConfig {
            generations: 1,
            ..small_config(Scheme::Ccs, Backend::Moead)
        };
        let out = run(&inst, &c, &cfg).unwrap();
        assert_eq!(out.evaluations, 12);
        let points: Vec<Point> = out.population.iter().map(|i| i.objectives).collect();
        let front = &nondominated_sort(&points)[0];
        let mut expected: Vec<Point> = front.iter().map(|&i| points[i]).collect();
        let mut got: Vec<Point> = out.archive.iter().map(|i| i.objectives).collect();
        expected.sort_by(|a, b| a[0].total_cmp(&b[0]));
        expected.dedup();
        got.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(got, expected);
    }

    #[test]
    fn rejects_bad_config_and_dimension() {
        let inst = toy_instance(31);
        let c = ConstraintPreset::First.build(31).unwrap();
        let cfg = RunConfig {
            population_size: 3,
            ..small_config(Scheme::Ccs, Backend::Nsga2)
        };
        assert!(matches!(run(&inst, &c, &cfg), Err(RunError::Config(_))));
        let c = ConstraintPreset::First.build(40).unwrap();
        let cfg = small_config(Scheme::Ccs, Backend::Nsga2);
        assert!(matches!(run(&inst, &c, &cfg), Err(RunError::Dimension { .. })));
    }

    #[test]
    fn donors_are_distinct_from_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = pick_donors(&[0, 1, 2, 3], 2, 10, &mut rng);
            assert!(!d.contains(&2));
            assert!(d[0] != d[1] && d[1] != d[2] && d[0] != d[2]);
        }
        // pool too small: falls back to the whole population
        let d = pick_donors(&[0, 1], 0, 5, &mut rng);
        assert!(!d.contains(&0));
    }
}
