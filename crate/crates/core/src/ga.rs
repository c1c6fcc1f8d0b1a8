//! Generational genetic algorithm on the same penalized merit function as
//! the gradient optimizers.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gsm::run_rng;
use crate::optimizer::{penalized_objective, Design, IterationRecord, Method, Phase, RunRecord, FEASIBILITY_TOL};
use crate::problem::{DesignProblem, Evaluation, SolveCounts};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    /// Population size per design variable.
    pub population_multiplier: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Standard deviation of continuous-gene mutation on the `[0, 1]` scale.
    pub mutation_sigma: f64,
    pub tournament_size: usize,
    pub penalty_factor: f64,
    /// Number of generations, including the initial one.
    pub max_iterations: usize,
    pub elitism: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_multiplier: 10,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            mutation_sigma: 0.1,
            tournament_size: 2,
            penalty_factor: 1000.0,
            max_iterations: 100,
            elitism: 1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let rate = |r: f64| (0.0..=1.0).contains(&r);
        if !rate(self.crossover_rate) || !rate(self.mutation_rate) {
            return Err(Error::Config("crossover and mutation rates must lie in [0, 1]".into()));
        }
        if self.population_multiplier == 0 || self.max_iterations == 0 || self.tournament_size == 0 {
            return Err(Error::Config("population, generation count and tournament size must be positive".into()));
        }
        if !(self.mutation_sigma >= 0.0) || !(self.penalty_factor >= 0.0) {
            return Err(Error::Config("mutation sigma and penalty factor must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn population_size(&self, n_variables: usize) -> usize {
        (self.population_multiplier * n_variables).max(2)
    }
}

/// Continuous genes on the bound-normalized `[0, 1]` scale, one choice index
/// per categorical variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub continuous: Vec<f64>,
    pub categorical: Vec<usize>,
}

impl Chromosome {
    pub fn random<R: Rng + ?Sized>(choice_counts: &[usize], n_continuous: usize, rng: &mut R) -> Self {
        Self {
            continuous: (0..n_continuous).map(|_| rng.random::<f64>()).collect(),
            categorical: choice_counts.iter().map(|&n| rng.random_range(0..n)).collect(),
        }
    }
}

struct Scored {
    chromosome: Chromosome,
    fitness: f64,
    eval: Option<Evaluation>,
}

fn score<P: DesignProblem + ?Sized>(problem: &P, c: &Chromosome, penalty: f64) -> Scored {
    let x = problem.space().denormalize(&c.continuous);
    match problem.evaluate_choices(&c.categorical, &x) {
        Ok(e) => {
            let f = penalized_objective(e.objective, &e.constraints, penalty);
            Scored { chromosome: c.clone(), fitness: if f.is_nan() { f64::INFINITY } else { f }, eval: Some(e) }
        }
        Err(_) => Scored { chromosome: c.clone(), fitness: f64::INFINITY, eval: None },
    }
}

fn best_index(pop: &[Scored]) -> usize {
    // first minimum wins, so ties resolve deterministically
    let mut best = 0;
    for (i, s) in pop.iter().enumerate() {
        if s.fitness < pop[best].fitness {
            best = i;
        }
    }
    best
}

fn tournament<'a, R: Rng + ?Sized>(pop: &'a [Scored], size: usize, rng: &mut R) -> &'a Chromosome {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..size {
        let j = rng.random_range(0..pop.len());
        if pop[j].fitness < pop[best].fitness {
            best = j;
        }
    }
    &pop[best].chromosome
}

fn crossover<R: Rng + ?Sized>(a: &Chromosome, b: &Chromosome, rate: f64, rng: &mut R) -> (Chromosome, Chromosome) {
    let (mut c, mut d) = (a.clone(), b.clone());
    if rng.random::<f64>() < rate {
        for i in 0..c.continuous.len() {
            if rng.random::<bool>() {
                std::mem::swap(&mut c.continuous[i], &mut d.continuous[i]);
            }
        }
        for i in 0..c.categorical.len() {
            if rng.random::<bool>() {
                std::mem::swap(&mut c.categorical[i], &mut d.categorical[i]);
            }
        }
    }
    (c, d)
}

fn mutate<R: Rng + ?Sized>(c: &mut Chromosome, counts: &[usize], config: &GaConfig, rng: &mut R) {
    let noise = Normal::new(0.0, config.mutation_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
    for z in c.continuous.iter_mut() {
        if rng.random::<f64>() < config.mutation_rate {
            *z = (*z + noise.sample(rng)).clamp(0.0, 1.0);
        }
    }
    for (k, &n) in c.categorical.iter_mut().zip(counts) {
        if rng.random::<f64>() < config.mutation_rate {
            *k = rng.random_range(0..n);
        }
    }
}

/// Runs the GA from a random initial population.
pub fn ga_run<P: DesignProblem + ?Sized>(problem: &P, config: &GaConfig) -> Result<RunRecord> {
    config.validate()?;
    let space = problem.space();
    let counts: Vec<usize> = space.categorical.iter().map(|c| c.n_choices()).collect();
    let mut rng = run_rng(config.seed);
    let n = config.population_size(space.n_variables());
    let initial = (0..n).map(|_| Chromosome::random(&counts, space.n_continuous(), &mut rng)).collect();
    evolve(problem, config, initial, rng)
}

/// Runs the GA from a given initial population.
pub fn ga_run_from<P: DesignProblem + ?Sized>(
    problem: &P,
    config: &GaConfig,
    population: Vec<Chromosome>,
) -> Result<RunRecord> {
    config.validate()?;
    let rng = run_rng(config.seed);
    evolve(problem, config, population, rng)
}

fn evolve<P: DesignProblem + ?Sized>(
    problem: &P,
    config: &GaConfig,
    mut population: Vec<Chromosome>,
    mut rng: crate::gsm::RunRng,
) -> Result<RunRecord> {
    let started = Instant::now();
    let space = problem.space();
    let choice_counts: Vec<usize> = space.categorical.iter().map(|c| c.n_choices()).collect();
    if population.len() < 2 {
        return Err(Error::Config("GA population needs at least two individuals".into()));
    }
    for c in &population {
        let ok = c.continuous.len() == space.n_continuous()
            && c.categorical.len() == choice_counts.len()
            && c.categorical.iter().zip(&choice_counts).all(|(k, n)| k < n)
            && c.continuous.iter().all(|z| (0.0..=1.0).contains(z));
        if !ok {
            return Err(Error::Config("chromosome does not fit the design space".into()));
        }
    }
    let size = population.len();
    let mut total = SolveCounts::default();
    let mut iterations = Vec::with_capacity(config.max_iterations);
    let mut scored: Vec<Scored> = Vec::new();

    for generation in 0..config.max_iterations {
        scored = population.par_iter().map(|c| score(problem, c, config.penalty_factor)).collect();
        let mut solves = 0;
        for s in &scored {
            let c = s.eval.as_ref().map(|e| e.counts).unwrap_or(SolveCounts { primal: 1, ..Default::default() });
            solves += c.primal + c.modal;
            total += c;
        }
        let b = &scored[best_index(&scored)];
        let (objective, max_violation) =
            b.eval.as_ref().map(|e| (e.objective, e.max_violation())).unwrap_or((f64::INFINITY, f64::INFINITY));
        iterations.push(IterationRecord {
            iteration: generation,
            phase: Phase::Generation,
            temperature: 0.0,
            objective,
            penalized: b.fitness,
            max_violation,
            choices: b.chromosome.categorical.clone(),
            x: space.denormalize(&b.chromosome.continuous),
            fe_solves: solves,
        });
        if generation + 1 == config.max_iterations {
            break;
        }

        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&i, &j| scored[i].fitness.total_cmp(&scored[j].fitness).then(i.cmp(&j)));
        let mut next: Vec<Chromosome> =
            order.iter().take(config.elitism.min(size)).map(|&i| scored[i].chromosome.clone()).collect();
        while next.len() < size {
            let a = tournament(&scored, config.tournament_size, &mut rng);
            let b = tournament(&scored, config.tournament_size, &mut rng);
            let (mut c, mut d) = crossover(a, b, config.crossover_rate, &mut rng);
            mutate(&mut c, &choice_counts, config, &mut rng);
            mutate(&mut d, &choice_counts, config, &mut rng);
            next.push(c);
            if next.len() < size {
                next.push(d);
            }
        }
        population = next;
    }

    let best = &scored[best_index(&scored)];
    let eval = best
        .eval
        .clone()
        .ok_or_else(|| Error::Numerical("no individual of the final generation could be analyzed".into()))?;
    let x = space.denormalize(&best.chromosome.continuous);
    let design = Design {
        labels: space.categorical.iter().zip(&best.chromosome.categorical).map(|(c, &k)| c.labels[k].clone()).collect(),
        probabilities: vec![1.0; best.chromosome.categorical.len()],
        choices: best.chromosome.categorical.clone(),
        x,
    };
    let max_violation = eval.max_violation();
    Ok(RunRecord {
        method: Method::Ga,
        seed: config.seed,
        iterations,
        design,
        final_objective: eval.objective,
        final_constraints: eval.constraints,
        final_max_violation: max_violation,
        feasible: max_violation <= FEASIBILITY_TOL,
        counts: total,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn crossover_at_zero_rate_copies_parents() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a = Chromosome { continuous: vec![0.1, 0.2], categorical: vec![0, 1] };
        let b = Chromosome { continuous: vec![0.9, 0.8], categorical: vec![2, 3] };
        let (c, d) = crossover(&a, &b, 0.0, &mut rng);
        assert_eq!((c, d), (a, b));
    }

    #[test]
    fn mutation_respects_ranges() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let config = GaConfig { mutation_rate: 1.0, mutation_sigma: 5.0, ..Default::default() };
        for _ in 0..200 {
            let mut c = Chromosome { continuous: vec![0.5; 3], categorical: vec![0, 0] };
            mutate(&mut c, &[2, 5], &config, &mut rng);
            assert!(c.continuous.iter().all(|z| (0.0..=1.0).contains(z)));
            assert!(c.categorical[0] < 2 && c.categorical[1] < 5);
        }
    }

    #[test]
    fn rates_are_validated() {
        assert!(GaConfig { crossover_rate: 1.5, ..Default::default() }.validate().is_err());
        assert_eq!(GaConfig::default().population_size(16), 160);
    }
}
